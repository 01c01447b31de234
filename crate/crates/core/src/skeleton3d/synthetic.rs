//! Synthetic RGB-D frames of a known skeleton.
//!
//! The body is rendered as capsules around the limb segments in front of a
//! flat wall. A pixel covered by a capsule reads the depth of the segment
//! axis at the nearest point (not the capsule surface), so a keypoint placed
//! exactly on a joint reads that joint's true depth. Noise comes in two
//! flavors: mixed pixels along silhouette edges and Gaussian jitter of the
//! 2D keypoints.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{BodyPart, CameraIntrinsics, DepthImage, Keypoint2D, Limb, Skeleton3D};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneConfig {
    pub intrinsics: CameraIntrinsics,
    /// Wall depth behind the person, meters.
    pub background_depth: f64,
    /// Capsule radius of arms and legs, meters.
    pub limb_radius: f64,
    /// Capsule radius of the head and torso links, meters.
    pub torso_radius: f64,
    /// Probability that a pixel near a depth edge is corrupted.
    pub contour_noise: f64,
    /// Width in pixels of the edge band affected by contour noise.
    pub contour_band: u32,
    /// Fraction of corrupted pixels that become holes (0) rather than taking
    /// the far-side depth.
    pub hole_fraction: f64,
    /// Standard deviation of keypoint jitter, pixels.
    pub keypoint_jitter: f64,
    pub confidence: f64,
}

impl SceneConfig {
    /// 320×240, f = 300 px, no noise.
    pub fn clean() -> Self {
        Self {
            intrinsics: CameraIntrinsics {
                f: 300.0,
                width: 320,
                height: 240,
            },
            background_depth: 3.0,
            limb_radius: 0.035,
            torso_radius: 0.08,
            contour_noise: 0.0,
            contour_band: 2,
            hole_fraction: 0.25,
            keypoint_jitter: 0.0,
            confidence: 0.9,
        }
    }

    pub fn noisy() -> Self {
        Self {
            contour_noise: 0.5,
            keypoint_jitter: 1.5,
            ..Self::clean()
        }
    }
}

fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
    Vector3::new(x, y, z)
}

/// Upright person 2 m from the camera, every joint at the same depth, arms
/// hanging slightly away from the body. `y` points down.
pub fn upright_pose() -> Skeleton3D {
    use BodyPart::*;
    let z = 2.0;
    let mut s = Skeleton3D::new();
    let pts = [
        (Nose, v(0.0, -0.45, z)),
        (Neck, v(0.0, -0.28, z)),
        (RShoulder, v(-0.18, -0.26, z)),
        (RElbow, v(-0.26, 0.0, z)),
        (RWrist, v(-0.30, 0.24, z)),
        (RHand, v(-0.31, 0.32, z)),
        (LShoulder, v(0.18, -0.26, z)),
        (LElbow, v(0.26, 0.0, z)),
        (LWrist, v(0.30, 0.24, z)),
        (LHand, v(0.31, 0.32, z)),
        (RHip, v(-0.10, 0.25, z)),
        (RKnee, v(-0.11, 0.68, z)),
        (RAnkle, v(-0.12, 1.10, z)),
        (LHip, v(0.10, 0.25, z)),
        (LKnee, v(0.11, 0.68, z)),
        (LAnkle, v(0.12, 1.10, z)),
    ];
    for (p, x) in pts {
        s.set(p, x);
    }
    s
}

/// [`upright_pose`] with the right forearm pointing straight at the camera:
/// the wrist lies on the elbow's viewing ray, one forearm length closer, and
/// hides the elbow. The hand hangs below the wrist.
pub fn occluded_pose() -> Skeleton3D {
    let mut s = upright_pose();
    let elbow = s.get(BodyPart::RElbow).unwrap();
    let wrist = s.get(BodyPart::RWrist).unwrap();
    let hand = s.get(BodyPart::RHand).unwrap();
    let forearm = (wrist - elbow).norm();
    let new_wrist = elbow - elbow.normalize() * forearm;
    s.set(BodyPart::RWrist, new_wrist);
    s.set(BodyPart::RHand, new_wrist + (hand - wrist));
    s
}

/// Limbs drawn by the renderer, with the radius class of each.
fn body_segments() -> Vec<(Limb, bool)> {
    use BodyPart::*;
    let mut segs: Vec<(Limb, bool)> = Limb::all()
        .into_iter()
        .map(|l| (l, matches!(l.1, Nose | RHip | LHip)))
        .collect();
    segs.push((Limb(RShoulder, RHip), true));
    segs.push((Limb(LShoulder, LHip), true));
    segs
}

/// Noise-free depth image of `skel` in front of the wall.
pub fn render_depth(skel: &Skeleton3D, cfg: &SceneConfig) -> DepthImage {
    let k = &cfg.intrinsics;
    let (w, h) = (k.width, k.height);
    let mut img = DepthImage::filled(w, h, cfg.background_depth);
    for (limb, thick) in body_segments() {
        let (Some(a), Some(b)) = (skel.get(limb.0), skel.get(limb.1)) else {
            continue;
        };
        let (Some(pa), Some(pb)) = (k.reproject(&a), k.reproject(&b)) else {
            continue;
        };
        let radius = if thick { cfg.torso_radius } else { cfg.limb_radius };
        let r_px = k.f * radius / a.z.min(b.z);
        let x0 = (pa.0.min(pb.0) - r_px).floor().max(0.0) as u32;
        let x1 = (pa.0.max(pb.0) + r_px).ceil().min(w as f64 - 1.0);
        let y0 = (pa.1.min(pb.1) - r_px).floor().max(0.0) as u32;
        let y1 = (pa.1.max(pb.1) + r_px).ceil().min(h as f64 - 1.0);
        if x1 < 0.0 || y1 < 0.0 {
            continue;
        }
        let (dx, dy) = (pb.0 - pa.0, pb.1 - pa.1);
        let len_sq = dx * dx + dy * dy;
        for y in y0..=y1 as u32 {
            for x in x0..=x1 as u32 {
                let (px, py) = (x as f64, y as f64);
                let t = if len_sq < 1e-12 {
                    if a.z <= b.z {
                        0.0
                    } else {
                        1.0
                    }
                } else {
                    (((px - pa.0) * dx + (py - pa.1) * dy) / len_sq).clamp(0.0, 1.0)
                };
                let (qx, qy) = (pa.0 + t * dx, pa.1 + t * dy);
                let z = a.z + t * (b.z - a.z);
                let dist_sq = (px - qx).powi(2) + (py - qy).powi(2);
                let r = k.f * radius / z;
                if dist_sq <= r * r && z < img.get(x, y) {
                    img.set(x, y, z);
                }
            }
        }
    }
    img
}

/// Corrupts pixels within `contour_band` of a depth edge: each with
/// probability `contour_noise` becomes a hole or takes the farthest depth in
/// its band neighborhood.
pub fn add_contour_noise<R: Rng>(img: &DepthImage, cfg: &SceneConfig, rng: &mut R) -> DepthImage {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let b = cfg.contour_band as i64;
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for yy in (y - b).max(0)..=(y + b).min(h - 1) {
                for xx in (x - b).max(0)..=(x + b).min(w - 1) {
                    let d = img.get(xx as u32, yy as u32);
                    if d > 0.0 {
                        lo = lo.min(d);
                        hi = hi.max(d);
                    }
                }
            }
            if hi - lo > 0.1 && rng.gen::<f64>() < cfg.contour_noise {
                let d = if rng.gen::<f64>() < cfg.hole_fraction { 0.0 } else { hi };
                out.set(x as u32, y as u32, d);
            }
        }
    }
    out
}

/// 2D detections of every part that projects inside the image, jittered by
/// `keypoint_jitter` pixels. Parts outside the image are reported with zero
/// confidence at the clamped position.
pub fn observe_keypoints<R: Rng>(skel: &Skeleton3D, cfg: &SceneConfig, rng: &mut R) -> Vec<Keypoint2D> {
    let k = &cfg.intrinsics;
    let (w, h) = (k.width as f64, k.height as f64);
    let jitter = Normal::new(0.0, cfg.keypoint_jitter.max(0.0)).expect("finite jitter");
    let mut out = Vec::new();
    for (part, p) in skel.iter() {
        let Some((u, v, _)) = k.reproject(&p) else {
            continue;
        };
        let (ju, jv) = if cfg.keypoint_jitter > 0.0 {
            (jitter.sample(rng), jitter.sample(rng))
        } else {
            (0.0, 0.0)
        };
        let (u, v) = (u + ju, v + jv);
        let inside = u >= 0.0 && v >= 0.0 && u < w && v < h;
        let conf = if inside { cfg.confidence } else { 0.0 };
        out.push(Keypoint2D::new(
            part,
            u.clamp(0.0, w - 1.0),
            v.clamp(0.0, h - 1.0),
            conf,
        ));
    }
    out
}

#[derive(Debug, Clone)]
pub struct SyntheticFrame {
    pub keypoints: Vec<Keypoint2D>,
    pub depth: DepthImage,
    /// Ground truth restricted to the parts detected in this frame.
    pub truth: Skeleton3D,
}

/// `n` frames of a static `pose` with fresh noise per frame.
pub fn static_stream(pose: &Skeleton3D, n: usize, cfg: &SceneConfig, seed: u64) -> Vec<SyntheticFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clean = render_depth(pose, cfg);
    (0..n)
        .map(|_| {
            let depth = if cfg.contour_noise > 0.0 {
                add_contour_noise(&clean, cfg, &mut rng)
            } else {
                clean.clone()
            };
            let keypoints = observe_keypoints(pose, cfg, &mut rng);
            let mut truth = Skeleton3D::new();
            for kp in keypoints.iter().filter(|k| k.confidence > 0.0) {
                truth.set(kp.part, pose.get(kp.part).expect("observed parts exist"));
            }
            SyntheticFrame {
                keypoints,
                depth,
                truth,
            }
        })
        .collect()
}
