//! Per-part temporal median filter.

use std::collections::VecDeque;

use nalgebra::Vector3;

use super::{BodyPart, Skeleton3D};

/// Lower median: for an even count the smaller of the two middle values.
fn lower_median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values[(values.len() - 1) / 2]
}

/// Coordinate-wise median of a window of points; `None` for an empty window.
pub fn median_point(window: &[Vector3<f64>]) -> Option<Vector3<f64>> {
    if window.is_empty() {
        return None;
    }
    let mut out = Vector3::zeros();
    let mut buf: Vec<f64> = Vec::with_capacity(window.len());
    for axis in 0..3 {
        buf.clear();
        buf.extend(window.iter().map(|p| p[axis]));
        out[axis] = lower_median(&mut buf);
    }
    Some(out)
}

/// Sliding windows of the most recent valid samples of every part.
#[derive(Debug, Clone)]
pub struct MedianFilter {
    order: usize,
    windows: Vec<VecDeque<Vector3<f64>>>,
}

impl MedianFilter {
    /// `order` is clamped to at least 1.
    pub fn new(order: usize) -> Self {
        Self {
            order: order.max(1),
            windows: vec![VecDeque::new(); BodyPart::COUNT],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn window(&self, part: BodyPart) -> &VecDeque<Vector3<f64>> {
        &self.windows[part.index()]
    }

    /// Pushes the valid parts of `frame` and returns the smoothed skeleton.
    /// Parts that are invalid in `frame` stay invalid in the output and do not
    /// enter their window.
    pub fn push(&mut self, frame: &Skeleton3D) -> Skeleton3D {
        let mut out = Skeleton3D::new();
        for (part, p) in frame.iter() {
            let w = &mut self.windows[part.index()];
            w.push_back(p);
            while w.len() > self.order {
                w.pop_front();
            }
            let samples: Vec<Vector3<f64>> = w.iter().copied().collect();
            if let Some(m) = median_point(&samples) {
                out.set(part, m);
            }
        }
        out
    }

    pub fn reset(&mut self) {
        self.windows.iter_mut().for_each(VecDeque::clear);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_window() {
        let p = Vector3::new(0.1, -0.2, 1.7);
        assert_eq!(median_point(&[p; 5]), Some(p));
        assert_eq!(median_point(&[]), None);
    }

    #[test]
    fn spike_is_rejected() {
        let w: Vec<Vector3<f64>> = [1.0, 1.0, 1.0, 9.0, 1.0]
            .iter()
            .map(|&v| Vector3::new(v, v, v))
            .collect();
        assert_eq!(median_point(&w), Some(Vector3::new(1.0, 1.0, 1.0)));
    }

    #[test]
    fn even_window_uses_lower_median() {
        let w: Vec<Vector3<f64>> = [4.0, 1.0, 3.0, 2.0].iter().map(|&v| Vector3::new(v, -v, 0.5)).collect();
        assert_eq!(median_point(&w), Some(Vector3::new(2.0, -3.0, 0.5)));
    }

    #[test]
    fn filter_keeps_only_order_samples() {
        let mut f = MedianFilter::new(3);
        let mut s = Skeleton3D::new();
        for z in [1.0, 2.0, 3.0, 4.0, 5.0] {
            s.set(BodyPart::Neck, Vector3::new(0.0, 0.0, z));
            let out = f.push(&s);
            assert!(out.is_valid(BodyPart::Neck));
        }
        assert_eq!(f.window(BodyPart::Neck).len(), 3);
        assert_eq!(f.push(&s).get(BodyPart::Neck).unwrap().z, 5.0);
        let empty = f.push(&Skeleton3D::new());
        assert!(!empty.is_valid(BodyPart::Neck));
    }
}
