//! Projection and Euler-angle conversion.
//!
//! Camera frame: x right, y down, z forward (into the scene). Angles are in
//! degrees and always reported in (pitch, roll, yaw) order.

use crate::depth_prep::CameraIntrinsics;
use crate::error::DatasetError;

pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Tolerance on `|R^T R - I|` and `|det R - 1|` accepted for ground-truth matrices.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-3;
/// Half-width of the band around +-90 deg of the middle angle treated as gimbal lock.
pub const GIMBAL_LOCK_MARGIN_DEG: f64 = 0.5;

/// Order in which the elementary rotations compose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EulerConvention {
    /// `R = Ry(yaw) * Rx(pitch) * Rz(roll)`: intrinsic yaw, then pitch, then roll.
    #[default]
    YawPitchRoll,
    /// `R = Rz(roll) * Ry(yaw) * Rx(pitch)`.
    RollYawPitch,
}

/// The convention used for every label in this crate.
pub const EULER_CONVENTION: EulerConvention = EulerConvention::YawPitchRoll;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerAngles {
    pub pitch: f64,
    pub roll: f64,
    pub yaw: f64,
}

impl EulerAngles {
    pub fn new(pitch: f64, roll: f64, yaw: f64) -> Self {
        Self { pitch, roll, yaw }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.pitch, self.roll, self.yaw]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

pub fn rot_x(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
}

pub fn rot_y(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

pub fn rot_z(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat_vec(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

pub fn transpose(m: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            t[j][i] = v;
        }
    }
    t
}

pub fn determinant(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Largest deviation of `R^T R` from identity, or of `det R` from 1.
pub fn orthonormality_error(m: &Mat3) -> f64 {
    let g = mat_mul(&transpose(m), m);
    let mut worst = (determinant(m) - 1.0).abs();
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[i][j] - target).abs());
        }
    }
    worst
}

pub fn euler_to_rotation(angles: EulerAngles, convention: EulerConvention) -> Mat3 {
    match convention {
        EulerConvention::YawPitchRoll => mat_mul(
            &rot_y(angles.yaw),
            &mat_mul(&rot_x(angles.pitch), &rot_z(angles.roll)),
        ),
        EulerConvention::RollYawPitch => mat_mul(
            &rot_z(angles.roll),
            &mat_mul(&rot_y(angles.yaw), &rot_x(angles.pitch)),
        ),
    }
}

/// Decomposes `rotation` under `convention`. Fails when the matrix is not a
/// rotation or the middle angle sits in the gimbal-lock band.
pub fn rotation_to_euler(
    rotation: &Mat3,
    convention: EulerConvention,
) -> Result<EulerAngles, DatasetError> {
    let deviation = orthonormality_error(rotation);
    if !(deviation <= ORTHONORMAL_TOLERANCE) {
        return Err(DatasetError::NotOrthonormal { deviation });
    }
    let r = rotation;
    let angles = match convention {
        EulerConvention::YawPitchRoll => {
            let pitch = (-r[1][2]).clamp(-1.0, 1.0).asin();
            check_gimbal(pitch)?;
            EulerAngles {
                pitch: pitch.to_degrees(),
                roll: r[1][0].atan2(r[1][1]).to_degrees(),
                yaw: r[0][2].atan2(r[2][2]).to_degrees(),
            }
        }
        EulerConvention::RollYawPitch => {
            let yaw = (-r[2][0]).clamp(-1.0, 1.0).asin();
            check_gimbal(yaw)?;
            EulerAngles {
                pitch: r[2][1].atan2(r[2][2]).to_degrees(),
                roll: r[1][0].atan2(r[0][0]).to_degrees(),
                yaw: yaw.to_degrees(),
            }
        }
    };
    Ok(angles)
}

fn check_gimbal(middle_rad: f64) -> Result<(), DatasetError> {
    let deg = middle_rad.to_degrees();
    if 90.0 - deg.abs() < GIMBAL_LOCK_MARGIN_DEG {
        return Err(DatasetError::GimbalLock { pitch_deg: deg });
    }
    Ok(())
}

/// Pinhole projection of a camera-frame point in millimeters.
pub fn project_to_pixel(
    point_mm: [f64; 3],
    intrinsics: &CameraIntrinsics,
) -> Result<(f64, f64), DatasetError> {
    let [x, y, z] = point_mm;
    if !(z > 0.0) {
        return Err(DatasetError::BehindCamera(z));
    }
    Ok((
        intrinsics.fx * x / z + intrinsics.cx,
        intrinsics.fy * y / z + intrinsics.cy,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn k() -> CameraIntrinsics {
        CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0).unwrap()
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_to_pixel([0.0, 0.0, 1000.0], &k()).unwrap(), (320.0, 240.0));
        assert_eq!(project_to_pixel([100.0, 0.0, 1000.0], &k()).unwrap(), (370.0, 240.0));
        assert!(matches!(
            project_to_pixel([1.0, 1.0, 0.0], &k()),
            Err(DatasetError::BehindCamera(_))
        ));
    }

    #[test]
    fn identity_decomposes_to_zero() {
        for conv in [EulerConvention::YawPitchRoll, EulerConvention::RollYawPitch] {
            let e = rotation_to_euler(&IDENTITY, conv).unwrap();
            assert_eq!(e.to_array(), [0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn analytic_yaw_thirty() {
        // Rotation by 30 deg about the vertical (y) axis, written out by hand.
        let (s, c) = (0.5, 3f64.sqrt() / 2.0);
        let m = [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]];
        let e = rotation_to_euler(&m, EULER_CONVENTION).unwrap();
        assert!((e.yaw - 30.0).abs() <= 1e-9);
        assert!(e.pitch.abs() <= 1e-9 && e.roll.abs() <= 1e-9);
    }

    #[test]
    fn yaw_then_pitch_composition_round_trips() {
        let m = mat_mul(&rot_y(20.0), &rot_x(10.0));
        let e = rotation_to_euler(&m, EULER_CONVENTION).unwrap();
        assert!((e.yaw - 20.0).abs() < 1e-12 && (e.pitch - 10.0).abs() < 1e-12);
        let back = euler_to_rotation(e, EULER_CONVENTION);
        for i in 0..3 {
            for j in 0..3 {
                assert!((back[i][j] - m[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gimbal_lock_flagged() {
        let m = euler_to_rotation(EulerAngles::new(89.8, 10.0, 5.0), EULER_CONVENTION);
        assert!(matches!(
            rotation_to_euler(&m, EULER_CONVENTION),
            Err(DatasetError::GimbalLock { .. })
        ));
        let ok = euler_to_rotation(EulerAngles::new(89.0, 10.0, 5.0), EULER_CONVENTION);
        assert!(rotation_to_euler(&ok, EULER_CONVENTION).is_ok());
    }

    #[test]
    fn non_rotation_rejected() {
        let mut m = IDENTITY;
        m[0][0] = 1.1;
        assert!(matches!(
            rotation_to_euler(&m, EULER_CONVENTION),
            Err(DatasetError::NotOrthonormal { .. })
        ));
        let reflection = [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(rotation_to_euler(&reflection, EULER_CONVENTION).is_err());
    }

    #[test]
    fn ten_thousand_random_round_trips() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for conv in [EulerConvention::YawPitchRoll, EulerConvention::RollYawPitch] {
            for _ in 0..10_000 {
                let e = EulerAngles::new(
                    rng.random_range(-89.0..89.0),
                    rng.random_range(-179.0..179.0),
                    rng.random_range(-179.0..179.0),
                );
                let e = match conv {
                    // The middle angle must stay away from +-90.
                    EulerConvention::RollYawPitch => EulerAngles::new(e.roll, e.yaw, e.pitch),
                    EulerConvention::YawPitchRoll => e,
                };
                let back = rotation_to_euler(&euler_to_rotation(e, conv), conv).unwrap();
                for (a, b) in back.to_array().iter().zip(e.to_array()) {
                    assert!((a - b).abs() <= 1e-9, "{e:?} -> {back:?}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn generated_rotations_are_orthonormal(p in -80.0f64..80.0, r in -180.0f64..180.0, y in -180.0f64..180.0) {
            let m = euler_to_rotation(EulerAngles::new(p, r, y), EULER_CONVENTION);
            prop_assert!(orthonormality_error(&m) < 1e-12);
        }
    }
}
