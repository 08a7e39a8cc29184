//! 8-bit YCbCr 4:4:4 frames and the `EMIF` file format.
//!
//! ```text
//! offset  size        field
//! 0       4           magic "EMIF"
//! 4       1           version (1)
//! 5       4           width, u32 little-endian
//! 9       4           height, u32 little-endian
//! 13      1           range tag: 0 = studio, 1 = full
//! 14      w·h         Y plane, row-major
//! ..      w·h         Cb plane
//! ..      w·h         Cr plane
//! ```

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::colour::ycbcr_to_rgb;
use crate::error::{Error, Result};

pub const EMIF_MAGIC: &[u8; 4] = b"EMIF";
pub const EMIF_VERSION: u8 = 1;
pub const EMIF_HEADER_LEN: usize = 14;

/// Quantisation range of the samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Range {
    /// Y in 16–235, Cb/Cr in 16–240.
    #[default]
    Studio,
    /// All components in 0–255.
    Full,
}

impl Range {
    pub fn tag(self) -> u8 {
        match self {
            Range::Studio => 0,
            Range::Full => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Range::Studio),
            1 => Ok(Range::Full),
            t => Err(Error::format("EMIF", format!("unknown range tag {t}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    Y,
    Cb,
    Cr,
}

impl Plane {
    pub const ALL: [Plane; 3] = [Plane::Y, Plane::Cb, Plane::Cr];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    range: Range,
    y: Vec<u8>,
    cb: Vec<u8>,
    cr: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, range: Range, y: Vec<u8>, cb: Vec<u8>, cr: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "frame dimensions must be positive, got {width}x{height}"
            )));
        }
        let n = width * height;
        if [y.len(), cb.len(), cr.len()] != [n, n, n] {
            return Err(Error::InvalidArgument(format!(
                "planes of a {width}x{height} frame need {n} samples, got {}/{}/{}",
                y.len(),
                cb.len(),
                cr.len()
            )));
        }
        Ok(Self {
            width,
            height,
            range,
            y,
            cb,
            cr,
        })
    }

    /// Every pixel set to the same `(Y, Cb, Cr)` triple.
    pub fn filled(width: usize, height: usize, range: Range, ycc: [u8; 3]) -> Result<Self> {
        let n = width * height;
        Self::new(width, height, range, vec![ycc[0]; n], vec![ycc[1]; n], vec![ycc[2]; n])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn range(&self) -> Range {
        self.range
    }

    pub fn plane(&self, plane: Plane) -> &[u8] {
        match plane {
            Plane::Y => &self.y,
            Plane::Cb => &self.cb,
            Plane::Cr => &self.cr,
        }
    }

    pub fn plane_mut(&mut self, plane: Plane) -> &mut [u8] {
        match plane {
            Plane::Y => &mut self.y,
            Plane::Cb => &mut self.cb,
            Plane::Cr => &mut self.cr,
        }
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = y * self.width + x;
        [self.y[i], self.cb[i], self.cr[i]]
    }

    pub fn same_dimensions(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn flip_horizontal(&self) -> Frame {
        let mut out = self.clone();
        for plane in Plane::ALL {
            for row in out.plane_mut(plane).chunks_exact_mut(self.width) {
                row.reverse();
            }
        }
        out
    }

    pub fn flip_vertical(&self) -> Frame {
        let mut out = self.clone();
        for plane in Plane::ALL {
            let src = self.plane(plane);
            let dst = out.plane_mut(plane);
            for (r, row) in src.chunks_exact(self.width).enumerate() {
                let to = (self.height - 1 - r) * self.width;
                dst[to..to + self.width].copy_from_slice(row);
            }
        }
        out
    }

    pub fn emif_len(&self) -> usize {
        EMIF_HEADER_LEN + 3 * self.width * self.height
    }

    pub fn to_emif_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.emif_len());
        out.extend_from_slice(EMIF_MAGIC);
        out.push(EMIF_VERSION);
        out.extend_from_slice(&(self.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.height as u32).to_le_bytes());
        out.push(self.range.tag());
        out.extend_from_slice(&self.y);
        out.extend_from_slice(&self.cb);
        out.extend_from_slice(&self.cr);
        out
    }

    pub fn from_emif_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < EMIF_HEADER_LEN {
            return Err(Error::format("EMIF", format!("{} bytes is shorter than the header", bytes.len())));
        }
        if &bytes[..4] != EMIF_MAGIC {
            return Err(Error::format("EMIF", "bad magic"));
        }
        if bytes[4] != EMIF_VERSION {
            return Err(Error::format("EMIF", format!("unsupported version {}", bytes[4])));
        }
        let width = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes")) as usize;
        let height = u32::from_le_bytes(bytes[9..13].try_into().expect("4 bytes")) as usize;
        let range = Range::from_tag(bytes[13])?;
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Error::format("EMIF", "dimensions overflow"))?;
        if n == 0 {
            return Err(Error::format("EMIF", format!("empty frame {width}x{height}")));
        }
        let expected = EMIF_HEADER_LEN + 3 * n;
        if bytes.len() != expected {
            return Err(Error::format(
                "EMIF",
                format!("{width}x{height} frame needs {expected} bytes, file has {}", bytes.len()),
            ));
        }
        let body = &bytes[EMIF_HEADER_LEN..];
        Self::new(
            width,
            height,
            range,
            body[..n].to_vec(),
            body[n..2 * n].to_vec(),
            body[2 * n..].to_vec(),
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_emif_bytes()).map_err(Error::at(path))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(Error::at(path))?;
        Self::from_emif_bytes(&bytes)
    }

    /// Writes one plane as a binary greyscale PGM.
    pub fn export_pgm(&self, plane: Plane, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(Error::at(path))?;
        let mut w = BufWriter::new(file);
        write!(w, "P5\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(self.plane(plane))?;
        w.flush()?;
        Ok(())
    }

    /// Writes the BT.601 RGB composite as a binary PPM.
    pub fn export_ppm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(Error::at(path))?;
        let mut w = BufWriter::new(file);
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        for i in 0..self.width * self.height {
            w.write_all(&ycbcr_to_rgb([self.y[i], self.cb[i], self.cr[i]], self.range))?;
        }
        w.flush()?;
        Ok(())
    }
}
