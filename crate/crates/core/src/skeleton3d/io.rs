//! Text formats for keypoint streams and reconstruction output, and depth
//! frame directories.
//!
//! Keypoints: one line per detection, `frame_index part u v confidence`.
//! Reconstruction: one line per frame and part, `frame_index part x y z valid`
//! with coordinates in meters and `valid` 0 or 1 (invalid parts are written
//! as zeros). Lines starting with `#` are comments in both.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{BodyPart, CameraIntrinsics, DepthImage, Keypoint2D, Skeleton3D, SkeletonError};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SkeletonError + '_ {
    move |e| SkeletonError::Io(path.display().to_string(), e)
}

/// Parses a keypoint stream into one list per frame. Frame indices need not
/// be contiguous; missing frames come back empty, up to the largest index.
pub fn parse_keypoints(text: &str) -> Result<Vec<Vec<Keypoint2D>>, SkeletonError> {
    let mut frames: Vec<Vec<Keypoint2D>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |what: &str| SkeletonError::Parse(format!("keypoint line {}: {what}", i + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [frame, part, u, v, c] = fields.as_slice() else {
            return Err(bad("expected `frame_index part u v confidence`"));
        };
        let frame: usize = frame.parse().map_err(|_| bad("bad frame index"))?;
        let part: BodyPart = part.parse()?;
        let num = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
        let (Some(u), Some(v), Some(c)) = (num(u), num(v), num(c)) else {
            return Err(bad("bad number"));
        };
        if !(0.0..=1.0).contains(&c) {
            return Err(bad("confidence outside [0, 1]"));
        }
        if frames.len() <= frame {
            frames.resize_with(frame + 1, Vec::new);
        }
        frames[frame].push(Keypoint2D::new(part, u, v, c));
    }
    Ok(frames)
}

pub fn format_keypoints(frames: &[Vec<Keypoint2D>]) -> String {
    let mut out = String::from("# frame_index part u v confidence\n");
    for (i, kps) in frames.iter().enumerate() {
        for k in kps {
            let _ = writeln!(out, "{i} {} {} {} {}", k.part, k.u, k.v, k.confidence);
        }
    }
    out
}

pub fn load_keypoints(path: &Path) -> Result<Vec<Vec<Keypoint2D>>, SkeletonError> {
    parse_keypoints(&std::fs::read_to_string(path).map_err(io_err(path))?)
}

pub fn format_skeletons(frames: &[Skeleton3D]) -> String {
    let mut out = String::from("# frame_index part x y z valid\n");
    for (i, s) in frames.iter().enumerate() {
        for part in BodyPart::ALL {
            match s.get(part) {
                Some(p) => {
                    let _ = writeln!(out, "{i} {part} {} {} {} 1", p.x, p.y, p.z);
                }
                None => {
                    let _ = writeln!(out, "{i} {part} 0 0 0 0");
                }
            }
        }
    }
    out
}

pub fn parse_skeletons(text: &str) -> Result<Vec<Skeleton3D>, SkeletonError> {
    let mut frames: Vec<Skeleton3D> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || SkeletonError::Parse(format!("skeleton line {}: {line:?}", i + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [frame, part, x, y, z, valid] = fields.as_slice() else {
            return Err(bad());
        };
        let frame: usize = frame.parse().map_err(|_| bad())?;
        let part: BodyPart = part.parse()?;
        let c: Vec<f64> = [x, y, z]
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        if frames.len() <= frame {
            frames.resize_with(frame + 1, Skeleton3D::new);
        }
        match *valid {
            "1" => frames[frame].set(part, nalgebra::Vector3::new(c[0], c[1], c[2])),
            "0" => frames[frame].invalidate(part),
            _ => return Err(bad()),
        }
    }
    Ok(frames)
}

pub fn save_skeletons(path: &Path, frames: &[Skeleton3D]) -> Result<(), SkeletonError> {
    crate::fsutil::write_atomic(path, format_skeletons(frames).as_bytes()).map_err(io_err(path))
}

/// `*.pgm` files of a directory in lexicographic order.
pub fn depth_frame_paths(dir: &Path) -> Result<Vec<PathBuf>, SkeletonError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pgm"))
        .collect();
    paths.sort();
    Ok(paths)
}

/// Loads a depth directory; every frame must carry the same intrinsics.
pub fn load_depth_dir(dir: &Path) -> Result<(Vec<DepthImage>, Option<CameraIntrinsics>), SkeletonError> {
    let mut images = Vec::new();
    let mut intrinsics: Option<CameraIntrinsics> = None;
    for path in depth_frame_paths(dir)? {
        let (img, k) = DepthImage::load_pgm(&path)?;
        if let Some(prev) = intrinsics {
            if prev != k {
                return Err(SkeletonError::DepthFormat(format!(
                    "{} has intrinsics differing from earlier frames",
                    path.display()
                )));
            }
        }
        intrinsics = Some(k);
        images.push(img);
    }
    Ok((images, intrinsics))
}

/// Writes `frame_00000.pgm`, `frame_00001.pgm`, ... into `dir`.
pub fn save_depth_dir(dir: &Path, images: &[DepthImage], f: f64) -> Result<(), SkeletonError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (i, img) in images.iter().enumerate() {
        img.save_pgm(&dir.join(format!("frame_{i:05}.pgm")), f)?;
    }
    Ok(())
}
