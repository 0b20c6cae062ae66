//! Netpbm (PGM/PPM) reading and writing, ASCII and binary variants.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Decoded Netpbm raster before any normalisation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImage {
    pub width: usize,
    pub height: usize,
    /// 1 for PGM, 3 for PPM.
    pub channels: usize,
    pub maxval: u16,
    /// Interleaved samples, row-major.
    pub samples: Vec<u16>,
}

impl RawImage {
    /// Rec. 601 luma normalised to `[0, 1]`, one value per pixel.
    pub fn to_gray(&self) -> Vec<f64> {
        let max = self.maxval as f64;
        match self.channels {
            1 => self.samples.iter().map(|&v| v as f64 / max).collect(),
            _ => self
                .samples
                .chunks_exact(3)
                .map(|c| (0.299 * c[0] as f64 + 0.587 * c[1] as f64 + 0.114 * c[2] as f64) / max)
                .collect(),
        }
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::parse(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::parse(start, format!("{what} out of range")))
    }
}

/// Parses a P2, P3, P5 or P6 image.
pub fn parse_pnm(bytes: &[u8]) -> Result<RawImage> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::parse(0, "missing Netpbm magic number"));
    }
    let (channels, ascii) = match bytes[1] {
        b'2' => (1, true),
        b'3' => (3, true),
        b'5' => (1, false),
        b'6' => (3, false),
        _ => return Err(Error::parse(1, "unsupported Netpbm variant (expected P2, P3, P5 or P6)")),
    };
    let mut h = Header { bytes, pos: 2 };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let max_at = h.pos;
    let maxval = h.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::parse(max_at, format!("maxval {maxval} outside 1..=65535")));
    }
    if width == 0 || height == 0 {
        return Err(Error::parse(max_at, "image has zero area"));
    }
    let count = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(channels))
        .ok_or_else(|| Error::parse(2, "image dimensions overflow"))?;
    let mut samples = Vec::with_capacity(count);
    if ascii {
        for _ in 0..count {
            let at = {
                h.skip_space();
                h.pos
            };
            let v = h.number("sample")?;
            if v > maxval {
                return Err(Error::parse(at, format!("sample {v} exceeds maxval {maxval}")));
            }
            samples.push(v as u16);
        }
    } else {
        // exactly one whitespace byte separates the header from the raster
        if h.pos >= bytes.len() || !bytes[h.pos].is_ascii_whitespace() {
            return Err(Error::parse(h.pos, "expected whitespace after maxval"));
        }
        let data = &bytes[h.pos + 1..];
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        if data.len() < need {
            return Err(Error::parse(
                bytes.len(),
                format!("truncated raster: {} of {need} bytes", data.len()),
            ));
        }
        for k in 0..count {
            let v = if wide {
                u16::from_be_bytes([data[2 * k], data[2 * k + 1]])
            } else {
                data[k] as u16
            };
            if v as usize > maxval {
                let at = h.pos + 1 + if wide { 2 * k } else { k };
                return Err(Error::parse(at, format!("sample {v} exceeds maxval {maxval}")));
            }
            samples.push(v);
        }
    }
    Ok(RawImage {
        width,
        height,
        channels,
        maxval: maxval as u16,
        samples,
    })
}

pub fn read_pnm(path: &Path) -> Result<RawImage> {
    parse_pnm(&std::fs::read(path)?)
}

/// Binary PGM (P5); 16-bit big-endian samples when `maxval > 255`.
pub fn encode_pgm(width: usize, height: usize, maxval: u16, samples: &[u16]) -> Result<Vec<u8>> {
    if samples.len() != width * height {
        return Err(Error::invalid(format!(
            "{} samples for a {width}x{height} image",
            samples.len()
        )));
    }
    if maxval == 0 {
        return Err(Error::invalid("maxval must be positive"));
    }
    if let Some(&v) = samples.iter().find(|&&v| v > maxval) {
        return Err(Error::invalid(format!("sample {v} exceeds maxval {maxval}")));
    }
    let mut header = String::new();
    write!(header, "P5\n{width} {height}\n{maxval}\n").unwrap();
    let mut out = header.into_bytes();
    if maxval > 255 {
        for &v in samples {
            out.extend_from_slice(&v.to_be_bytes());
        }
    } else {
        out.extend(samples.iter().map(|&v| v as u8));
    }
    Ok(out)
}

pub fn write_pgm(path: &Path, width: usize, height: usize, maxval: u16, samples: &[u16]) -> Result<()> {
    std::fs::write(path, encode_pgm(width, height, maxval, samples)?)?;
    Ok(())
}

/// Binary PPM (P6) with 8-bit samples; used for fixtures.
pub fn encode_ppm(width: usize, height: usize, rgb: &[[u8; 3]]) -> Result<Vec<u8>> {
    if rgb.len() != width * height {
        return Err(Error::invalid(format!("{} pixels for a {width}x{height} image", rgb.len())));
    }
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    for px in rgb {
        out.extend_from_slice(px);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_white_pixel() {
        let img = parse_pnm(b"P5\n1 1\n255\n\xff").unwrap();
        assert_eq!(img.to_gray(), vec![1.0]);
    }

    #[test]
    fn red_is_rec601_weight() {
        let img = parse_pnm(b"P3\n1 1\n255\n255 0 0\n").unwrap();
        assert!((img.to_gray()[0] - 0.299).abs() < 1e-12);
        let bin = parse_pnm(&encode_ppm(1, 1, &[[255, 0, 0]]).unwrap()).unwrap();
        assert_eq!(bin, img);
    }

    #[test]
    fn comments_and_ascii_gray() {
        let img = parse_pnm(b"P2 # gray\n# size\n2 1\n# max\n10\n0 10\n").unwrap();
        assert_eq!(img.to_gray(), vec![0.0, 1.0]);
    }

    #[test]
    fn sixteen_bit_round_trip() {
        let samples: Vec<u16> = (0..12).map(|k| (k * 5000) as u16).collect();
        let bytes = encode_pgm(4, 3, 65535, &samples).unwrap();
        let img = parse_pnm(&bytes).unwrap();
        assert_eq!(img.samples, samples);
        assert_eq!((img.width, img.height, img.maxval), (4, 3, 65535));
    }

    #[test]
    fn errors_carry_offsets() {
        match parse_pnm(b"P5\n2 2\n255\n\x01\x02") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 13),
            other => panic!("unexpected {other:?}"),
        }
        match parse_pnm(b"P5\n2 x\n255\n") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_pnm(b"P4\n1 1\n"), Err(Error::Parse { offset: 1, .. })));
        assert!(parse_pnm(b"P2\n1 1\n70000\n0\n").is_err());
        assert!(parse_pnm(b"P2\n1 1\n10\n11\n").is_err());
    }
}
