use super::geometry::EulerAngles;

/// Maps (pitch, roll, yaw) in degrees onto the network's [-1, 1] target range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleNormalizer {
    scale_deg: [f64; 3],
}

/// Angular spans of the Biwi recordings: pitch +-60, roll +-50, yaw +-75.
pub const DEFAULT_ANGLE_SCALES: [f64; 3] = [60.0, 50.0, 75.0];

impl Default for AngleNormalizer {
    fn default() -> Self {
        Self {
            scale_deg: DEFAULT_ANGLE_SCALES,
        }
    }
}

impl AngleNormalizer {
    pub fn new(scale_deg: [f64; 3]) -> Option<Self> {
        scale_deg
            .iter()
            .all(|s| *s > 0.0 && s.is_finite())
            .then_some(Self { scale_deg })
    }

    pub fn scales(&self) -> [f64; 3] {
        self.scale_deg
    }

    /// Divides by the scales. Components outside [-1, 1] are clamped.
    pub fn normalize(&self, euler: EulerAngles) -> [f64; 3] {
        let raw = euler.to_array();
        let mut out = [0.0; 3];
        for i in 0..3 {
            let v = raw[i] / self.scale_deg[i];
            if v.abs() > 1.0 {
                log::warn!(
                    "angle {} deg exceeds normalizer span +-{} deg; clamping",
                    raw[i],
                    self.scale_deg[i]
                );
            }
            out[i] = v.clamp(-1.0, 1.0);
        }
        out
    }

    pub fn denormalize(&self, normalized: [f64; 3]) -> EulerAngles {
        EulerAngles::from_array([0, 1, 2].map(|i| normalized[i] * self.scale_deg[i]))
    }
}
