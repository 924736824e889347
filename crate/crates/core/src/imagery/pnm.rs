//! PGM (P2/P5, maxval 255) and PBM (P1/P4) codecs.
//!
//! Header comments are skipped on read and never written. Writers emit the
//! binary forms unless asked otherwise.

use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use super::{BinaryImage, GrayImage, ImageError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PnmEncoding {
    Ascii,
    #[default]
    Binary,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn header_number(&mut self, what: &str) -> Result<u32, ImageError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageError::MalformedHeader(format!("missing {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| ImageError::MalformedHeader(format!("{what} out of range")))
    }

    /// Consumes the single whitespace byte that separates header and raster.
    fn raster_separator(&mut self) -> Result<(), ImageError> {
        match self.data.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(ImageError::MalformedHeader(
                "missing whitespace after header".into(),
            )),
        }
    }

    fn rest(&self) -> &'a [u8] {
        &self.data[self.pos.min(self.data.len())..]
    }
}

fn magic(data: &[u8]) -> Result<u8, ImageError> {
    match data {
        [] => Err(ImageError::MalformedHeader("empty file".into())),
        [b'P', d, ..] if (b'1'..=b'6').contains(d) => Ok(*d),
        _ => Err(ImageError::MalformedHeader("bad magic number".into())),
    }
}

fn dims(cur: &mut Cursor<'_>) -> Result<(usize, usize), ImageError> {
    let w = cur.header_number("width")? as usize;
    let h = cur.header_number("height")? as usize;
    if w == 0 || h == 0 {
        return Err(ImageError::MalformedHeader(format!(
            "zero dimension {w}x{h}"
        )));
    }
    Ok((w, h))
}

pub fn decode_gray(data: &[u8]) -> Result<GrayImage, ImageError> {
    let kind = magic(data)?;
    if kind != b'2' && kind != b'5' {
        return Err(ImageError::MalformedHeader(format!(
            "P{} is not a PGM",
            kind as char
        )));
    }
    let mut cur = Cursor::new(&data[2..]);
    let (w, h) = dims(&mut cur)?;
    let maxval = cur.header_number("maxval")?;
    if maxval != 255 {
        return Err(ImageError::UnsupportedMaxval(maxval));
    }
    let n = w * h;
    let pixels = if kind == b'5' {
        cur.raster_separator()?;
        let raster = cur.rest();
        if raster.len() < n {
            return Err(ImageError::Truncated {
                expected: n,
                actual: raster.len(),
            });
        }
        raster[..n].to_vec()
    } else {
        let mut pixels = Vec::with_capacity(n);
        while pixels.len() < n {
            cur.skip_space_and_comments();
            if cur.rest().is_empty() {
                return Err(ImageError::Truncated {
                    expected: n,
                    actual: pixels.len(),
                });
            }
            let v = cur
                .header_number("sample")
                .map_err(|_| ImageError::MalformedPayload("non-numeric sample".into()))?;
            if v > 255 {
                return Err(ImageError::MalformedPayload(format!(
                    "sample {v} exceeds maxval"
                )));
            }
            pixels.push(v as u8);
        }
        pixels
    };
    GrayImage::new(w, h, pixels)
}

pub fn decode_binary(data: &[u8]) -> Result<BinaryImage, ImageError> {
    let kind = magic(data)?;
    if kind != b'1' && kind != b'4' {
        return Err(ImageError::MalformedHeader(format!(
            "P{} is not a PBM",
            kind as char
        )));
    }
    let mut cur = Cursor::new(&data[2..]);
    let (w, h) = dims(&mut cur)?;
    let n = w * h;
    let bits = if kind == b'4' {
        cur.raster_separator()?;
        let stride = w.div_ceil(8);
        let raster = cur.rest();
        if raster.len() < stride * h {
            return Err(ImageError::Truncated {
                expected: n,
                actual: (raster.len() / stride) * w,
            });
        }
        let mut bits = Vec::with_capacity(n);
        for row in raster[..stride * h].chunks_exact(stride) {
            for col in 0..w {
                bits.push((row[col / 8] >> (7 - col % 8)) & 1);
            }
        }
        bits
    } else {
        let mut bits = Vec::with_capacity(n);
        while bits.len() < n {
            cur.skip_space_and_comments();
            match cur.rest().first() {
                None => {
                    return Err(ImageError::Truncated {
                        expected: n,
                        actual: bits.len(),
                    })
                }
                Some(b'0') => bits.push(0),
                Some(b'1') => bits.push(1),
                Some(&b) => {
                    return Err(ImageError::MalformedPayload(format!(
                        "unexpected byte {b:#04x} in P1 raster"
                    )))
                }
            }
            cur.pos += 1;
        }
        bits
    };
    BinaryImage::new(w, h, bits)
}

pub fn encode_gray(img: &GrayImage, encoding: PnmEncoding) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    match encoding {
        PnmEncoding::Binary => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(img.pixels());
            out
        }
        PnmEncoding::Ascii => {
            let mut out = format!("P2\n{w} {h}\n255\n");
            for row in img.pixels().chunks_exact(w) {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

pub fn encode_binary(img: &BinaryImage, encoding: PnmEncoding) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    match encoding {
        PnmEncoding::Binary => {
            let mut out = format!("P4\n{w} {h}\n").into_bytes();
            let stride = w.div_ceil(8);
            for row in img.bits().chunks_exact(w) {
                let mut packed = vec![0u8; stride];
                for (col, &b) in row.iter().enumerate() {
                    packed[col / 8] |= b << (7 - col % 8);
                }
                out.extend_from_slice(&packed);
            }
            debug_assert_eq!(out.len() - format!("P4\n{w} {h}\n").len(), stride * h);
            out
        }
        PnmEncoding::Ascii => {
            let mut out = format!("P1\n{w} {h}\n");
            for row in img.bits().chunks_exact(w) {
                let line: Vec<&str> = row
                    .iter()
                    .map(|&b| if b == 1 { "1" } else { "0" })
                    .collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, ImageError> {
    fs::read(path).map_err(|e| {
        if e.kind() == ErrorKind::NotFound {
            ImageError::NotFound(path.to_path_buf())
        } else {
            ImageError::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })
}

fn write_file(path: &Path, data: &[u8]) -> Result<(), ImageError> {
    fs::write(path, data).map_err(|e| ImageError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn read_gray(path: impl AsRef<Path>) -> Result<GrayImage, ImageError> {
    decode_gray(&read_file(path.as_ref())?)
}

/// Writes a P5 file.
pub fn write_gray(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), ImageError> {
    write_gray_as(img, path, PnmEncoding::Binary)
}

pub fn write_gray_as(
    img: &GrayImage,
    path: impl AsRef<Path>,
    encoding: PnmEncoding,
) -> Result<(), ImageError> {
    write_file(path.as_ref(), &encode_gray(img, encoding))
}

pub fn read_binary(path: impl AsRef<Path>) -> Result<BinaryImage, ImageError> {
    decode_binary(&read_file(path.as_ref())?)
}

/// Writes a P4 file.
pub fn write_binary(img: &BinaryImage, path: impl AsRef<Path>) -> Result<(), ImageError> {
    write_binary_as(img, path, PnmEncoding::Binary)
}

pub fn write_binary_as(
    img: &BinaryImage,
    path: impl AsRef<Path>,
    encoding: PnmEncoding,
) -> Result<(), ImageError> {
    write_file(path.as_ref(), &encode_binary(img, encoding))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_p5() {
        let mut data = b"P5\n2 2\n255\n".to_vec();
        data.extend_from_slice(&[0, 128, 255, 64]);
        let img = decode_gray(&data).unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[0, 128, 255, 64]);
    }

    #[test]
    fn decodes_p2_with_comments() {
        let img = decode_gray(b"P2 1 1 255 200").unwrap();
        assert_eq!(img.pixels(), &[200]);
        let img = decode_gray(b"P2\n# made by hand\n2 1\n# max\n255\n7 9\n").unwrap();
        assert_eq!(img.pixels(), &[7, 9]);
    }

    #[test]
    fn gray_errors_are_distinct() {
        assert!(matches!(
            decode_gray(b"P5 1 1 65535\n\0\0"),
            Err(ImageError::UnsupportedMaxval(65535))
        ));
        assert!(matches!(
            decode_gray(b"P5 2 2 255\n\x01\x02"),
            Err(ImageError::Truncated {
                expected: 4,
                actual: 2
            })
        ));
        assert!(matches!(
            decode_gray(b"P5 x 2 255\n"),
            Err(ImageError::MalformedHeader(_))
        ));
        assert!(matches!(
            decode_gray(b"P2 2 1 255 3"),
            Err(ImageError::Truncated { .. })
        ));
        assert!(matches!(
            decode_gray(b"P2 1 1 255 300"),
            Err(ImageError::MalformedPayload(_))
        ));
        assert!(matches!(
            decode_gray(b"P4 1 1\n\x80"),
            Err(ImageError::MalformedHeader(_))
        ));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            read_gray("/nonexistent/dir/x.pgm"),
            Err(ImageError::NotFound(_))
        ));
    }

    #[test]
    fn header_declares_width_first() {
        let img = GrayImage::filled(3, 2, 9);
        let data = encode_gray(&img, PnmEncoding::Binary);
        assert!(data.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(data.len(), 11 + 6);
        assert!(!data.contains(&b'#'));
        let one = encode_gray(&GrayImage::filled(1, 1, 0), PnmEncoding::Binary);
        assert_eq!(one, b"P5\n1 1\n255\n\0");
    }

    #[test]
    fn decodes_p1() {
        let img = decode_binary(b"P1 2 1 1 0").unwrap();
        assert_eq!(img.bits(), &[1, 0]);
        // digits may be packed without separators
        let img = decode_binary(b"P1\n# c\n3 1\n101").unwrap();
        assert_eq!(img.bits(), &[1, 0, 1]);
    }

    #[test]
    fn pbm_errors() {
        assert!(matches!(
            decode_binary(b""),
            Err(ImageError::MalformedHeader(_))
        ));
        assert!(matches!(
            decode_binary(b"P1 3 1 1 0"),
            Err(ImageError::Truncated { .. })
        ));
        assert!(matches!(
            decode_binary(b"P4 9 2\n\xff\x80"),
            Err(ImageError::Truncated { .. })
        ));
        assert!(matches!(
            decode_binary(b"P1 2 1 1 2"),
            Err(ImageError::MalformedPayload(_))
        ));
    }

    #[test]
    fn p4_packs_rows_msb_first_with_padding() {
        let img = BinaryImage::from_fn(9, 3, |r, c| c == 0 || (c == 8 && r == 1));
        let data = encode_binary(&img, PnmEncoding::Binary);
        let raster = &data[b"P4\n9 3\n".len()..];
        assert_eq!(raster, &[0x80, 0x00, 0x80, 0x80, 0x80, 0x00]);
        assert_eq!(decode_binary(&data).unwrap(), img);
    }
}
