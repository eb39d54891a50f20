//! Forward kinematics of the dual-slider parallel base, the four-joint
//! serial chain mounted on it, and their composition.

use nalgebra::{Matrix4, Vector3};
use thiserror::Error;

use crate::model::{JointState, Pose, StructuralParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("sqrt domain: separation b = {b} gives half-chord {half_chord} beyond d1 = {d1}")]
    SqrtDomain { b: f64, half_chord: f64, d1: f64 },
    #[error("non-finite slider input (a = {a}, b = {b})")]
    NonFinite { a: f64, b: f64 },
}

/// Height of point C above the rail for separation `b`.
pub fn platform_height(b: f64, p: &StructuralParams) -> Result<f64, KinematicsError> {
    let half = p.half_chord(b);
    let radicand = p.d1 * p.d1 - half * half;
    if radicand < 0.0 {
        return Err(KinematicsError::SqrtDomain {
            b,
            half_chord: half,
            d1: p.d1,
        });
    }
    Ok(radicand.sqrt() + p.h + p.e1)
}

/// Pose of frame C in the rail frame A. The platform never rotates.
pub fn parallel_fk(a: f64, b: f64, p: &StructuralParams) -> Result<Pose, KinematicsError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(KinematicsError::NonFinite { a, b });
    }
    let xc = p.e3 / 2.0 + a + p.half_chord(b);
    let zc = platform_height(b, p)?;
    Ok(Pose::from_translation(xc, p.e4, zc))
}

/// The four link transforms of the serial chain, base to tip.
pub fn serial_link_transforms(theta: &[f64; 4], p: &StructuralParams) -> [Matrix4<f64>; 4] {
    let (s1, c1) = theta[0].sin_cos();
    let (s2, c2) = theta[1].sin_cos();
    let (s3, c3) = theta[2].sin_cos();
    let (s4, c4) = theta[3].sin_cos();
    #[rustfmt::skip]
    let t01 = Matrix4::new(
        c1, -s1, 0.0, 0.0,
        s1,  c1, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
    );
    // Link 2 length is applied along x of frame 1 before the θ2 rotation
    // (a_1 = d2). Applying it after the rotation would make the pose depend
    // on θ1 + θ2 only.
    #[rustfmt::skip]
    let t12 = Matrix4::new(
        c2, -s2, 0.0, p.d2,
        s2,  c2, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
    );
    #[rustfmt::skip]
    let t23 = Matrix4::new(
        c3, 0.0,  s3, c3 * p.d3,
        s3, 0.0, -c3, s3 * p.d3,
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
    );
    #[rustfmt::skip]
    let t34 = Matrix4::new(
        c4, 0.0,  s4, 0.0,
        s4, 0.0, -c4, 0.0,
        0.0, 1.0, 0.0, p.d4,
        0.0, 0.0, 0.0, 1.0,
    );
    [t01, t12, t23, t34]
}

/// Pose of the tool point P in frame C.
pub fn serial_fk(theta: &[f64; 4], p: &StructuralParams) -> Pose {
    let [t01, t12, t23, t34] = serial_link_transforms(theta, p);
    Pose::from_matrix4(&(t01 * t12 * t23 * t34))
}

/// Pose of the tool point P in the rail frame A.
pub fn full_fk(q: &JointState, p: &StructuralParams) -> Result<Pose, KinematicsError> {
    let base = parallel_fk(q.a, q.b, p)?;
    Ok(base.compose(&serial_fk(&q.theta, p)))
}

/// Highest point of the mechanism: platform height plus the serial stack.
/// Returns NaN when `b` lies outside the linkage's sqrt domain.
pub fn body_height(q: &JointState, p: &StructuralParams) -> f64 {
    platform_height(q.b, p).map_or(f64::NAN, |z| z + p.stack_allowance)
}

/// Smallest separation at which the body height is at most `height`.
///
/// Returns `None` when `height` is below the fully split floor. Heights above
/// the upright ceiling map to the apex separation `e2 - e3`.
pub fn separation_for_body_height(height: f64, p: &StructuralParams) -> Option<f64> {
    let platform = height - p.stack_allowance;
    let rise = platform - p.h - p.e1;
    if rise < 0.0 {
        return None;
    }
    if rise >= p.d1 {
        return Some(p.e2 - p.e3);
    }
    let half = (p.d1 * p.d1 - rise * rise).sqrt();
    Some(2.0 * half - p.e3 + p.e2)
}

/// In-plane offset of the tool point from joint 2 for wrist angle θ3,
/// expressed in the frame that joint 2 rotates.
pub fn distal_offset(theta3: f64, p: &StructuralParams) -> (f64, f64) {
    let (s3, c3) = theta3.sin_cos();
    (c3 * p.d3 + s3 * p.d4, s3 * p.d3 - c3 * p.d4)
}

/// Vertical offset of the tool point from point C. Independent of θ1 and θ2
/// because both rotate about the vertical axis.
pub fn serial_rise(theta3: f64, theta4: f64, p: &StructuralParams) -> f64 {
    serial_fk(&[0.0, 0.0, theta3, theta4], p).translation.z
}

/// Point C in frame A for a state, without the serial chain.
pub fn platform_point(q: &JointState, p: &StructuralParams) -> Result<Vector3<f64>, KinematicsError> {
    parallel_fk(q.a, q.b, p).map(|pose| pose.translation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix3;
    use std::f64::consts::FRAC_PI_2;

    fn defaults() -> StructuralParams {
        StructuralParams::default()
    }

    #[test]
    fn upright_linkage_puts_c_at_full_height() {
        let p = defaults();
        let pose = parallel_fk(100.0, 0.0, &p).unwrap();
        assert_abs_diff_eq!(pose.translation, Vector3::new(130.0, 0.0, 483.0), epsilon = 1e-12);
        assert_eq!(pose.rotation, Matrix3::identity());
    }

    #[test]
    fn full_split_drops_c_to_floor() {
        let p = defaults();
        let pose = parallel_fk(0.0, 786.0, &p).unwrap();
        assert_abs_diff_eq!(pose.translation.z, 90.0, epsilon = 1e-12);
    }

    #[test]
    fn parallel_fk_matches_direct_formula() {
        let p = defaults();
        let (a, b) = (200.0_f64, 300.0_f64);
        // written out independently: half chord = (300 + 60 - 60) / 2 = 150
        let x = 30.0 + 200.0 + 150.0;
        let z = (393.0_f64 * 393.0 - 150.0 * 150.0).sqrt() + 50.0 + 40.0;
        let pose = parallel_fk(a, b, &p).unwrap();
        assert_abs_diff_eq!(pose.translation.x, x, epsilon = 1e-12);
        assert_abs_diff_eq!(pose.translation.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pose.translation.z, z, epsilon = 1e-12);
    }

    #[test]
    fn parallel_fk_rejects_overstretched_linkage() {
        let p = defaults();
        assert!(matches!(
            parallel_fk(0.0, 787.0, &p),
            Err(KinematicsError::SqrtDomain { .. })
        ));
        assert!(parallel_fk(f64::NAN, 0.0, &p).is_err());
    }

    #[test]
    fn serial_chain_at_zero() {
        let p = defaults();
        let pose = serial_fk(&[0.0; 4], &p);
        assert_abs_diff_eq!(pose.translation, Vector3::new(305.0, -118.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn serial_chain_with_elbow_at_right_angle() {
        let p = defaults();
        let pose = serial_fk(&[0.0, FRAC_PI_2, 0.0, 0.0], &p);
        // elbow at (d2, 0); distal (d3, -d4) turned by 90° becomes (d4, d3)
        assert_abs_diff_eq!(pose.translation, Vector3::new(278.0, 145.0, 0.0), epsilon = 1e-12);
        let pose = serial_fk(&[FRAC_PI_2, 0.0, 0.0, 0.0], &p);
        assert_abs_diff_eq!(pose.translation, Vector3::new(118.0, 305.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn composed_zero_state() {
        let p = defaults();
        let q = JointState::new(100.0, 0.0, [0.0; 4]);
        let pose = full_fk(&q, &p).unwrap();
        assert_abs_diff_eq!(pose.translation, Vector3::new(435.0, -118.0, 483.0), epsilon = 1e-12);
    }

    #[test]
    fn body_height_extremes_and_monotonicity() {
        let p = defaults();
        let floor = p.h + p.e1 + p.stack_allowance;
        let ceiling = p.d1 + floor;
        let at = |b: f64| body_height(&JointState::new(0.0, b, [0.0; 4]), &p);
        assert_abs_diff_eq!(at(p.b_max), floor, epsilon = 1e-12);
        assert_abs_diff_eq!(at(p.e2 - p.e3), ceiling, epsilon = 1e-12);
        assert!(at(100.0) > at(300.0) && at(300.0) > at(500.0));
        assert!(at(p.b_max + 1.0).is_nan());
    }

    #[test]
    fn separation_for_height_inverts_body_height() {
        let p = defaults();
        for b in [60.0, 250.0, 500.0, 785.0] {
            let hgt = body_height(&JointState::new(0.0, b, [0.0; 4]), &p);
            let back = separation_for_body_height(hgt, &p).unwrap();
            assert_abs_diff_eq!(back, b, epsilon = 1e-6);
        }
        assert_eq!(separation_for_body_height(p.h + p.e1 + p.stack_allowance - 1.0, &p), None);
        assert_eq!(separation_for_body_height(1.0e4, &p), Some(0.0));
    }

    #[test]
    fn distal_offset_matches_chain_tail() {
        let p = defaults();
        for t3 in [-1.2, -0.3, 0.0, 0.7, 1.5] {
            let tail = serial_fk(&[0.0, 0.0, t3, 0.4], &p).translation;
            let (x, y) = distal_offset(t3, &p);
            assert_abs_diff_eq!(tail.x, p.d2 + x, epsilon = 1e-12);
            assert_abs_diff_eq!(tail.y, y, epsilon = 1e-12);
            assert_abs_diff_eq!(serial_rise(t3, 0.4, &p), 0.0, epsilon = 1e-12);
        }
    }
}
