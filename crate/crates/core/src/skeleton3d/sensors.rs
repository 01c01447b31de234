//! RGB-D sensor registry and selection.

use std::cmp::Ordering;
use std::path::Path;

use serde::Deserialize;

use super::SkeletonError;

/// The shipped registry, also available as `data/sensors.toml`.
pub const DEFAULT_REGISTRY: &str = include_str!("../../../../data/sensors.toml");

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum FieldOfView {
    /// Horizontal × vertical, degrees.
    HxV([f64; 2]),
    /// Single average angle, degrees.
    Average(f64),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SensorSpec {
    pub name: String,
    pub rgb_resolution: Option<[u32; 2]>,
    pub depth_resolution: [u32; 2],
    pub depth_accuracy_mm: Option<f64>,
    /// Working range `[min, max]` in meters.
    pub depth_range_m: [f64; 2],
    pub field_of_view_deg: FieldOfView,
    #[serde(default)]
    pub discontinued: bool,
}

impl SensorSpec {
    pub fn depth_pixels(&self) -> u64 {
        u64::from(self.depth_resolution[0]) * u64::from(self.depth_resolution[1])
    }

    fn validate(&self) -> Result<(), SkeletonError> {
        let [lo, hi] = self.depth_range_m;
        let res_ok = self.depth_resolution.iter().all(|&v| v > 0)
            && self.rgb_resolution.is_none_or(|r| r.iter().all(|&v| v > 0));
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) || !res_ok {
            return Err(SkeletonError::Registry(format!("invalid entry {:?}", self.name)));
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct RegistryFile {
    sensor: Vec<SensorSpec>,
}

pub fn parse_registry(text: &str) -> Result<Vec<SensorSpec>, SkeletonError> {
    let file: RegistryFile = toml::from_str(text).map_err(|e| SkeletonError::Registry(e.to_string()))?;
    for s in &file.sensor {
        s.validate()?;
    }
    Ok(file.sensor)
}

pub fn load_registry(path: &Path) -> Result<Vec<SensorSpec>, SkeletonError> {
    let text = std::fs::read_to_string(path).map_err(|e| SkeletonError::Io(path.display().to_string(), e))?;
    parse_registry(&text)
}

pub fn default_registry() -> Vec<SensorSpec> {
    parse_registry(DEFAULT_REGISTRY).expect("shipped registry parses")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorRequirements {
    /// The sensor range must reach down to this distance (m).
    pub min_range: f64,
    /// The sensor range must reach up to this distance (m).
    pub max_range: f64,
    /// Minimum number of depth pixels.
    pub min_depth_pixels: u64,
    pub allow_discontinued: bool,
}

impl Default for SensorRequirements {
    fn default() -> Self {
        Self {
            min_range: 0.2,
            max_range: 3.0,
            min_depth_pixels: 0,
            allow_discontinued: false,
        }
    }
}

impl SensorRequirements {
    pub fn accepts(&self, s: &SensorSpec) -> bool {
        s.depth_range_m[0] <= self.min_range
            && s.depth_range_m[1] >= self.max_range
            && s.depth_pixels() >= self.min_depth_pixels
            && (self.allow_discontinued || !s.discontinued)
    }
}

/// Best accepted sensor: most depth pixels, then finest accuracy (unspecified
/// ranks last), then name.
pub fn select_sensor<'a>(
    registry: &'a [SensorSpec],
    req: &SensorRequirements,
) -> Result<&'a SensorSpec, SkeletonError> {
    let accuracy = |s: &SensorSpec| s.depth_accuracy_mm.unwrap_or(f64::INFINITY);
    registry
        .iter()
        .filter(|s| req.accepts(s))
        .min_by(|a, b| {
            b.depth_pixels()
                .cmp(&a.depth_pixels())
                .then(accuracy(a).partial_cmp(&accuracy(b)).unwrap_or(Ordering::Equal))
                .then_with(|| a.name.cmp(&b.name))
        })
        .ok_or(SkeletonError::NoSensor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_registry_has_six_devices() {
        let reg = default_registry();
        assert_eq!(reg.len(), 6);
        let leap = reg.iter().find(|s| s.name == "Leap Motion").unwrap();
        assert_eq!(leap.rgb_resolution, None);
        assert_eq!(leap.field_of_view_deg, FieldOfView::Average(135.0));
        assert!(reg
            .iter()
            .filter(|s| s.discontinued)
            .all(|s| s.name.starts_with("Kinect")));
    }

    #[test]
    fn default_requirements_pick_d435() {
        let reg = default_registry();
        assert_eq!(
            select_sensor(&reg, &SensorRequirements::default()).unwrap().name,
            "RealSense D435"
        );
    }

    #[test]
    fn impossible_range_errors() {
        let reg = default_registry();
        let req = SensorRequirements {
            min_range: 0.01,
            max_range: 20.0,
            ..Default::default()
        };
        let err = select_sensor(&reg, &req).unwrap_err();
        assert!(err.to_string().contains("no sensor satisfies"));
    }

    #[test]
    fn single_matching_sensor_is_returned() {
        let reg: Vec<SensorSpec> = default_registry()
            .into_iter()
            .filter(|s| s.name == "Kinect 2")
            .collect();
        let req = SensorRequirements {
            min_range: 1.0,
            allow_discontinued: true,
            ..Default::default()
        };
        assert_eq!(select_sensor(&reg, &req).unwrap().name, "Kinect 2");
    }

    #[test]
    fn unspecified_accuracy_ranks_last() {
        let mut reg = default_registry();
        for s in &mut reg {
            s.depth_resolution = [100, 100];
            s.discontinued = false;
            s.depth_range_m = [0.1, 5.0];
        }
        let pick = select_sensor(&reg, &SensorRequirements::default()).unwrap();
        assert_eq!(pick.name, "Leap Motion");
        reg.retain(|s| s.depth_accuracy_mm.is_none());
        assert_eq!(
            select_sensor(&reg, &SensorRequirements::default()).unwrap().name,
            "Kinect 1"
        );
    }
}
