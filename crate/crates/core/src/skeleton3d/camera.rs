use nalgebra::Vector3;

use super::SkeletonError;

/// Pinhole camera with a single focal length (square pixels) and the
/// principal point at the image center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    /// Focal length in pixels.
    pub f: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(f: f64, width: u32, height: u32) -> Result<Self, SkeletonError> {
        if !(f > 0.0 && f.is_finite()) || width == 0 || height == 0 {
            return Err(SkeletonError::Intrinsics(format!("f={f}, size {width}x{height}")));
        }
        Ok(Self { f, width, height })
    }

    fn cx(&self) -> f64 {
        self.width as f64 / 2.0
    }

    fn cy(&self) -> f64 {
        self.height as f64 / 2.0
    }

    /// Viewing ray through pixel `(u, v)` scaled so that its `z` is 1.
    pub fn ray(&self, u: f64, v: f64) -> Vector3<f64> {
        Vector3::new((u - self.cx()) / self.f, (v - self.cy()) / self.f, 1.0)
    }

    /// `p = d · ((u − w/2)/f, (v − h/2)/f, 1)`. `None` unless `d > 0`.
    pub fn project(&self, u: f64, v: f64, d: f64) -> Option<Vector3<f64>> {
        if d > 0.0 && d.is_finite() {
            Some(self.ray(u, v) * d)
        } else {
            None
        }
    }

    /// Inverse of [`project`](Self::project): `(u, v, d)` of a camera-frame point.
    pub fn reproject(&self, p: &Vector3<f64>) -> Option<(f64, f64, f64)> {
        if p.z > 0.0 {
            Some((p.x / p.z * self.f + self.cx(), p.y / p.z * self.f + self.cy(), p.z))
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optical_center_maps_to_axis() {
        let k = CameraIntrinsics::new(600.0, 640, 480).unwrap();
        assert_eq!(k.project(320.0, 240.0, 1.5), Some(Vector3::new(0.0, 0.0, 1.5)));
    }

    #[test]
    fn unit_tangent() {
        let k = CameraIntrinsics::new(600.0, 640, 480).unwrap();
        assert_eq!(k.project(320.0 + 600.0, 240.0, 2.0), Some(Vector3::new(2.0, 0.0, 2.0)));
    }

    #[test]
    fn non_positive_depth_is_invalid() {
        let k = CameraIntrinsics::new(600.0, 640, 480).unwrap();
        assert_eq!(k.project(10.0, 10.0, 0.0), None);
        assert_eq!(k.project(10.0, 10.0, -1.0), None);
        assert!(CameraIntrinsics::new(0.0, 640, 480).is_err());
        assert!(CameraIntrinsics::new(600.0, 0, 480).is_err());
    }

    #[test]
    fn reprojection_inverts_projection() {
        let k = CameraIntrinsics::new(615.3, 640, 480).unwrap();
        let p = k.project(101.25, 377.5, 2.25).unwrap();
        let (u, v, d) = k.reproject(&p).unwrap();
        assert!((u - 101.25).abs() < 1e-9 && (v - 377.5).abs() < 1e-9);
        assert_eq!(d, 2.25);
    }
}
