//! The binary printing channel.
//!
//! Noise fields come from threshold halftoning a uniform 8-bit random
//! matrix: `v = 1` iff `r < T * 256`. Channel errors are controlled gates:
//! the noise field is the control, the halftone is the target, and the gate
//! operation is applied only where the control bit is 1.
//!
//! Randomness is a ChaCha8 stream seeded from a `u64`; bytes are consumed
//! one per pixel in row-major order.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::halftone::level_threshold;
use crate::imagery::BinaryImage;
use crate::scalar::{plogp, Real};

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("noise power {0} outside [0, 1]")]
    InvalidPower(f64),
    #[error("block size {0} must be odd and >= 3")]
    InvalidBlock(usize),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("unknown noise kind '{0}' (expected bitflip, erase or block-erase)")]
    UnknownKind(String),
}

/// Noise power T in [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct NoisePower(f64);

impl NoisePower {
    pub fn new(t: f64) -> Result<Self, ChannelError> {
        if (0.0..=1.0).contains(&t) {
            Ok(Self(t))
        } else {
            Err(ChannelError::InvalidPower(t))
        }
    }

    pub fn t(self) -> f64 {
        self.0
    }

    /// Integer threshold `ceil(T * 256)` in 0..=256.
    pub fn threshold(self) -> u16 {
        level_threshold(self.0)
    }

    /// Expected ones-density of a noise field at this power.
    pub fn achieved_density(self) -> f64 {
        f64::from(self.threshold()) / 256.0
    }
}

/// Odd block size with a well-defined center pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockSpec(usize);

impl BlockSpec {
    pub fn new(size: usize) -> Result<Self, ChannelError> {
        if size >= 3 && size % 2 == 1 {
            Ok(Self(size))
        } else {
            Err(ChannelError::InvalidBlock(size))
        }
    }

    pub fn size(self) -> usize {
        self.0
    }

    pub fn center_offset(self) -> usize {
        (self.0 - 1) / 2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NoiseKind {
    BitFlip,
    Erase,
    BlockErase,
}

impl NoiseKind {
    pub fn token(self) -> &'static str {
        match self {
            Self::BitFlip => "bitflip",
            Self::Erase => "erase",
            Self::BlockErase => "block-erase",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for NoiseKind {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "bitflip" => Ok(Self::BitFlip),
            "erase" => Ok(Self::Erase),
            "block-erase" => Ok(Self::BlockErase),
            other => Err(ChannelError::UnknownKind(other.to_string())),
        }
    }
}

/// Channel type; the block spec only exists for block erase.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    BitFlip,
    Erase,
    BlockErase(BlockSpec),
}

impl Channel {
    pub fn kind(self) -> NoiseKind {
        match self {
            Self::BitFlip => NoiseKind::BitFlip,
            Self::Erase => NoiseKind::Erase,
            Self::BlockErase(_) => NoiseKind::BlockErase,
        }
    }

    /// Builds a channel from a kind and an optional block size. The block is
    /// required for block erase and rejected otherwise.
    pub fn from_parts(kind: NoiseKind, block: Option<usize>) -> Result<Self, String> {
        match (kind, block) {
            (NoiseKind::BlockErase, Some(b)) => BlockSpec::new(b)
                .map(Self::BlockErase)
                .map_err(|e| e.to_string()),
            (NoiseKind::BlockErase, None) => Err("block-erase requires a block size".into()),
            (_, Some(_)) => Err(format!(
                "block size is only valid for block-erase, not {kind}"
            )),
            (NoiseKind::BitFlip, None) => Ok(Self::BitFlip),
            (NoiseKind::Erase, None) => Ok(Self::Erase),
        }
    }
}

/// Full description of one channel instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelConfig {
    pub channel: Channel,
    pub power: NoisePower,
    pub seed: u64,
}

/// Target operation U of a controlled gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateOp {
    Identity,
    Not,
    Set0,
    Set1,
}

impl GateOp {
    pub fn apply(self, y: u8) -> u8 {
        match self {
            Self::Identity => y,
            Self::Not => y ^ 1,
            Self::Set0 => 0,
            Self::Set1 => 1,
        }
    }
}

/// SplitMix64 finalizer over `master ^ golden * (index + 1)`; gives each
/// sweep cell an independent-looking seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Threshold noise field: `v[m,n] = 1` iff `r[m,n] < T * 256`.
pub fn gen_noise(width: usize, height: usize, power: NoisePower, seed: u64) -> BinaryImage {
    let mut r = vec![0u8; width * height];
    ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut r);
    let thr = power.threshold();
    for v in &mut r {
        *v = u8::from(u16::from(*v) < thr);
    }
    BinaryImage::new(width, height, r).expect("dimensions must be >= 1")
}

/// Controlled gate: applies `op` to every target bit whose control bit is 1.
pub fn apply_gate(
    control: &BinaryImage,
    target: &BinaryImage,
    op: GateOp,
) -> Result<BinaryImage, ChannelError> {
    if !control.same_dims(target) {
        return Err(ChannelError::DimensionMismatch(
            control.width(),
            control.height(),
            target.width(),
            target.height(),
        ));
    }
    let bits = control
        .bits()
        .iter()
        .zip(target.bits())
        .map(|(&x, &y)| if x == 1 { op.apply(y) } else { y })
        .collect();
    Ok(BinaryImage::from_bits_unchecked(
        target.width(),
        target.height(),
        bits,
    ))
}

fn noise_for(g: &BinaryImage, power: NoisePower, seed: u64) -> BinaryImage {
    gen_noise(g.width(), g.height(), power, seed)
}

/// Flips every bit where the noise field is 1.
pub fn transmit_bitflip(g: &BinaryImage, power: NoisePower, seed: u64) -> BinaryImage {
    apply_gate(&noise_for(g, power, seed), g, GateOp::Not).expect("same dimensions")
}

/// `g' = v OR g`.
pub fn transmit_erase(g: &BinaryImage, power: NoisePower, seed: u64) -> BinaryImage {
    apply_gate(&noise_for(g, power, seed), g, GateOp::Set1).expect("same dimensions")
}

/// Block erase over non-overlapping tiles.
///
/// Control is `v[m,n] AND g[center]`, where the center sits at offset
/// `((size-1)/2, (size-1)/2)` of the tile. Edge tiles too small to hold
/// that center pass through.
pub fn transmit_block_erase(
    g: &BinaryImage,
    power: NoisePower,
    block: BlockSpec,
    seed: u64,
) -> BinaryImage {
    let v = noise_for(g, power, seed);
    let (w, h) = (g.width(), g.height());
    let (size, off) = (block.size(), block.center_offset());
    let mut control = vec![0u8; w * h];
    for top in (0..h).step_by(size) {
        for left in (0..w).step_by(size) {
            let (cr, cc) = (top + off, left + off);
            if cr >= h || cc >= w || g.get(cr, cc) == 0 {
                continue;
            }
            for row in top..(top + size).min(h) {
                for col in left..(left + size).min(w) {
                    control[row * w + col] = v.get(row, col);
                }
            }
        }
    }
    let control = BinaryImage::from_bits_unchecked(w, h, control);
    apply_gate(&control, g, GateOp::Set1).expect("same dimensions")
}

/// Passes `g` through the channel described by `cfg`.
pub fn transmit(g: &BinaryImage, cfg: &ChannelConfig) -> BinaryImage {
    match cfg.channel {
        Channel::BitFlip => transmit_bitflip(g, cfg.power, cfg.seed),
        Channel::Erase => transmit_erase(g, cfg.power, cfg.seed),
        Channel::BlockErase(block) => transmit_block_erase(g, cfg.power, block, cfg.seed),
    }
}

/// Binary entropy `H2(p)` in bits.
pub fn binary_entropy_of<F: Real>(p: F) -> F {
    F::zero() - (plogp(p) + plogp(F::one() - p))
}

/// Capacity of a binary symmetric channel with crossover `p`: `1 - H2(p)`.
pub fn bsc_capacity<F: Real>(p: F) -> Result<F, ChannelError> {
    if !(p >= F::zero() && p <= F::one()) {
        return Err(ChannelError::InvalidProbability(p.as_f64()));
    }
    Ok(F::one() - binary_entropy_of(p))
}
