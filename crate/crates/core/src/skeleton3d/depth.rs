//! Depth images, neighborhood-minimum dilation, and the 16-bit PGM frame
//! format.

use std::io::Write;
use std::path::Path;

use super::{CameraIntrinsics, SkeletonError};

/// Per-pixel distance in meters; `0` marks an invalid reading.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    width: u32,
    height: u32,
    depth: Vec<f64>,
}

impl DepthImage {
    pub fn new(width: u32, height: u32, depth: Vec<f64>) -> Result<Self, SkeletonError> {
        if depth.len() != width as usize * height as usize {
            return Err(SkeletonError::DepthFormat(format!(
                "{} values for a {width}x{height} image",
                depth.len()
            )));
        }
        if depth.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(SkeletonError::DepthFormat("negative or non-finite depth".into()));
        }
        Ok(Self { width, height, depth })
    }

    pub fn filled(width: u32, height: u32, value: f64) -> Self {
        Self {
            width,
            height,
            depth: vec![value; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.depth
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.depth[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, d: f64) {
        let w = self.width as usize;
        self.depth[y as usize * w + x as usize] = d;
    }

    /// Depth at the pixel nearest to `(u, v)`; `None` when outside the image
    /// or invalid.
    pub fn sample(&self, u: f64, v: f64) -> Option<f64> {
        let (x, y) = (u.round(), v.round());
        if x < 0.0 || y < 0.0 || x >= self.width as f64 || y >= self.height as f64 {
            return None;
        }
        let d = self.get(x as u32, y as u32);
        (d > 0.0).then_some(d)
    }

    pub fn matches(&self, k: &CameraIntrinsics) -> bool {
        self.width == k.width && self.height == k.height
    }

    pub fn valid_count(&self) -> usize {
        self.depth.iter().filter(|&&d| d > 0.0).count()
    }

    /// Minimum of the valid depths in the `(2r+1)²` window around every pixel.
    /// Near regions grow by `r` pixels and holes with a valid neighbor get
    /// filled; a pixel stays 0 only if its whole window is invalid.
    pub fn dilate(&self, radius: u32) -> DepthImage {
        if radius == 0 {
            return self.clone();
        }
        let (w, h) = (self.width as usize, self.height as usize);
        let r = radius as usize;
        let src: Vec<f64> = self
            .depth
            .iter()
            .map(|&d| if d > 0.0 { d } else { f64::INFINITY })
            .collect();
        // the square window minimum is separable: rows first, then columns
        let mut rows = vec![f64::INFINITY; w * h];
        for y in 0..h {
            let line = &src[y * w..(y + 1) * w];
            for x in 0..w {
                let lo = x.saturating_sub(r);
                let hi = (x + r).min(w - 1);
                rows[y * w + x] = line[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min);
            }
        }
        let mut out = vec![0.0; w * h];
        for x in 0..w {
            for y in 0..h {
                let lo = y.saturating_sub(r);
                let hi = (y + r).min(h - 1);
                let m = (lo..=hi).map(|yy| rows[yy * w + x]).fold(f64::INFINITY, f64::min);
                out[y * w + x] = if m.is_finite() { m } else { 0.0 };
            }
        }
        DepthImage {
            width: self.width,
            height: self.height,
            depth: out,
        }
    }

    /// 16-bit binary PGM with depth in millimeters and the focal length in a
    /// header comment:
    ///
    /// ```text
    /// P5
    /// # signbot-depth f=<focal px>
    /// <width> <height>
    /// 65535
    /// <big-endian u16 samples>
    /// ```
    pub fn to_pgm(&self, f: f64) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.depth.len() * 2 + 64);
        let _ = write!(
            out,
            "P5\n# signbot-depth f={f}\n{} {}\n65535\n",
            self.width, self.height
        );
        for &d in &self.depth {
            let mm = (d * 1000.0).round().clamp(0.0, 65535.0) as u16;
            out.extend_from_slice(&mm.to_be_bytes());
        }
        out
    }

    /// Parses [`to_pgm`](Self::to_pgm) output, returning the image and the
    /// intrinsics carried by the header.
    pub fn from_pgm(bytes: &[u8]) -> Result<(DepthImage, CameraIntrinsics), SkeletonError> {
        let bad = |m: &str| SkeletonError::DepthFormat(m.to_string());
        let mut pos = 0;
        let mut fields: Vec<String> = Vec::new();
        let mut focal = None;
        // magic, width, height, maxval, each possibly preceded by comments
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos >= bytes.len() {
                return Err(bad("truncated header"));
            }
            if bytes[pos] == b'#' {
                let end = bytes[pos..]
                    .iter()
                    .position(|&b| b == b'\n')
                    .map(|e| pos + e)
                    .ok_or_else(|| bad("unterminated comment"))?;
                let comment = std::str::from_utf8(&bytes[pos + 1..end]).map_err(|_| bad("comment"))?;
                for tok in comment.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("f=") {
                        focal = Some(v.parse::<f64>().map_err(|_| bad("focal length"))?);
                    }
                }
                pos = end + 1;
                continue;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        }
        // exactly one whitespace byte separates the header from the samples
        pos += 1;
        if fields[0] != "P5" {
            return Err(bad("not a binary PGM"));
        }
        let width: u32 = fields[1].parse().map_err(|_| bad("width"))?;
        let height: u32 = fields[2].parse().map_err(|_| bad("height"))?;
        if fields[3] != "65535" {
            return Err(bad("expected 16-bit samples (maxval 65535)"));
        }
        let f = focal.ok_or_else(|| bad("missing `f=` focal length comment"))?;
        let n = width as usize * height as usize;
        let data = bytes.get(pos..pos + 2 * n).ok_or_else(|| bad("truncated pixel data"))?;
        let depth = data
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / 1000.0)
            .collect();
        let k = CameraIntrinsics::new(f, width, height)?;
        Ok((DepthImage::new(width, height, depth)?, k))
    }

    pub fn load_pgm(path: &Path) -> Result<(DepthImage, CameraIntrinsics), SkeletonError> {
        let bytes = std::fs::read(path).map_err(|e| SkeletonError::Io(path.display().to_string(), e))?;
        Self::from_pgm(&bytes)
    }

    pub fn save_pgm(&self, path: &Path, f: f64) -> Result<(), SkeletonError> {
        crate::fsutil::write_atomic(path, &self.to_pgm(f)).map_err(|e| SkeletonError::Io(path.display().to_string(), e))
    }
}
