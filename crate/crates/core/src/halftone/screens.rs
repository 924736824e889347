//! Compiled-in threshold screens and the dot-diffusion class matrix.

/// A square index matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Screen {
    pub name: &'static str,
    pub order: usize,
    pub cells: &'static [u8],
}

impl Screen {
    pub fn at(&self, row: usize, col: usize) -> u8 {
        self.cells[(row % self.order) * self.order + col % self.order]
    }

    pub fn rows(&self) -> impl Iterator<Item = &'static [u8]> {
        self.cells.chunks_exact(self.order)
    }
}

// Dispersed-dot ordered dither, built by M(2n) = [[4M, 4M+2], [4M+3, 4M+1]].
#[rustfmt::skip]
const BAYER_2: [u8; 4] = [
    0, 2,
    3, 1,
];

#[rustfmt::skip]
const BAYER_4: [u8; 16] = [
     0,  8,  2, 10,
    12,  4, 14,  6,
     3, 11,  1,  9,
    15,  7, 13,  5,
];

#[rustfmt::skip]
const BAYER_8: [u8; 64] = [
     0, 32,  8, 40,  2, 34, 10, 42,
    48, 16, 56, 24, 50, 18, 58, 26,
    12, 44,  4, 36, 14, 46,  6, 38,
    60, 28, 52, 20, 62, 30, 54, 22,
     3, 35, 11, 43,  1, 33,  9, 41,
    51, 19, 59, 27, 49, 17, 57, 25,
    15, 47,  7, 39, 13, 45,  5, 37,
    63, 31, 55, 23, 61, 29, 53, 21,
];

// Clustered-dot spiral: cells ranked by squared distance to the tile center,
// ties broken by angle atan2(dr, dc). Dots grow outward from the center.
#[rustfmt::skip]
const SPIRAL_4: [u8; 16] = [
    12,  5,  6, 13,
     4,  0,  1,  7,
    11,  3,  2,  8,
    15, 10,  9, 14,
];

#[rustfmt::skip]
const SPIRAL_8: [u8; 64] = [
    60, 53, 45, 34, 35, 46, 54, 61,
    52, 33, 25, 17, 18, 26, 36, 55,
    44, 24, 12,  5,  6, 13, 27, 47,
    32, 16,  4,  0,  1,  7, 19, 37,
    43, 23, 11,  3,  2,  8, 20, 38,
    51, 31, 15, 10,  9, 14, 28, 48,
    59, 42, 30, 22, 21, 29, 39, 56,
    63, 58, 50, 41, 40, 49, 57, 62,
];

// Knuth's 8x8 class matrix for dot diffusion.
#[rustfmt::skip]
const KNUTH_CLASS: [u8; 64] = [
    34, 48, 40, 32, 29, 15, 23, 31,
    42, 58, 56, 53, 21,  5,  7, 10,
    50, 62, 61, 45, 13,  1,  2, 18,
    38, 46, 54, 37, 25, 17,  9, 26,
    28, 14, 22, 30, 35, 49, 41, 33,
    20,  4,  6, 11, 43, 59, 57, 52,
    12,  0,  3, 19, 51, 63, 60, 44,
    24, 16,  8, 27, 39, 47, 55, 36,
];

pub fn bayer(order: usize) -> Option<Screen> {
    let cells: &'static [u8] = match order {
        2 => &BAYER_2,
        4 => &BAYER_4,
        8 => &BAYER_8,
        _ => return None,
    };
    Some(Screen {
        name: "bayer",
        order,
        cells,
    })
}

pub fn clustered_dot(order: usize) -> Option<Screen> {
    let cells: &'static [u8] = match order {
        4 => &SPIRAL_4,
        8 => &SPIRAL_8,
        _ => return None,
    };
    Some(Screen {
        name: "cdot",
        order,
        cells,
    })
}

pub fn knuth_class_matrix() -> Screen {
    Screen {
        name: "dotdif-class",
        order: 8,
        cells: &KNUTH_CLASS,
    }
}

/// Every compiled-in matrix, in a fixed order.
pub fn all_screens() -> Vec<Screen> {
    let mut out: Vec<Screen> = [2, 4, 8].into_iter().filter_map(bayer).collect();
    out.extend([4, 8].into_iter().filter_map(clustered_dot));
    out.push(knuth_class_matrix());
    out
}
