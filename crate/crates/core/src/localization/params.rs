//! Five-parameter pose representation used inside the solver.
//!
//! The six constrained unknowns (position + unit orientation) are reduced to
//! five free parameters: the position and two spherical angles. The angles
//! are measured against an anchor axis; when the orientation drifts close to
//! the anchor's poles (where the azimuth becomes degenerate) the
//! parameterization is re-anchored onto a better axis. The mapping is a
//! cyclic coordinate permutation, so each anchor is a proper rotation of the
//! standard spherical chart.

use crate::error::Result;
use crate::field_model::MagnetPose;
use crate::scalar::Real;
use crate::vec3::Vec3;

/// Re-anchor when sin(theta) falls below this.
pub const REANCHOR_SIN_THETA: f64 = 1e-3;

/// Axis the spherical angles are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    X,
    Y,
    Z,
}

impl Anchor {
    /// Anchor whose poles are farthest from `direction`.
    fn best_for<T: Real>(direction: Vec3<T>) -> Self {
        let ax = direction.x.abs();
        let ay = direction.y.abs();
        let az = direction.z.abs();
        if ax <= ay && ax <= az {
            Anchor::X
        } else if ay <= ax && ay <= az {
            Anchor::Y
        } else {
            Anchor::Z
        }
    }
}

/// Solver-internal pose parameters: position plus polar/azimuth angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseParams<T> {
    pub position: Vec3<T>,
    /// Polar angle against the anchor axis, radians.
    pub theta: T,
    /// Azimuth around the anchor axis, radians.
    pub phi: T,
    pub anchor: Anchor,
}

impl<T: Real> PoseParams<T> {
    /// Parameterize an existing pose, picking the anchor farthest from the
    /// orientation.
    pub fn from_pose(pose: &MagnetPose<T>) -> Self {
        let h = pose.orientation();
        let anchor = Anchor::best_for(h);
        let (polar_component, azimuth_y, azimuth_x) = match anchor {
            Anchor::Z => (h.z, h.y, h.x),
            Anchor::X => (h.x, h.z, h.y),
            Anchor::Y => (h.y, h.x, h.z),
        };
        let theta = polar_component.min(T::one()).max(-T::one()).acos();
        let phi = azimuth_y.atan2(azimuth_x);
        Self {
            position: pose.position(),
            theta,
            phi,
            anchor,
        }
    }

    /// Parameterize a position plus an arbitrary non-zero direction.
    pub fn from_position_direction(position: Vec3<T>, direction: Vec3<T>) -> Result<Self> {
        let pose = MagnetPose::from_direction(position, direction)?;
        Ok(Self::from_pose(&pose))
    }

    /// The unit orientation this parameter vector encodes.
    pub fn orientation(&self) -> Vec3<T> {
        let (st, ct) = (self.theta.sin(), self.theta.cos());
        let (sp, cp) = (self.phi.sin(), self.phi.cos());
        match self.anchor {
            Anchor::Z => Vec3::new(st * cp, st * sp, ct),
            Anchor::X => Vec3::new(ct, st * cp, st * sp),
            Anchor::Y => Vec3::new(st * sp, ct, st * cp),
        }
    }

    /// The full pose; the orientation is unit-length by construction.
    pub fn to_pose(&self) -> MagnetPose<T> {
        MagnetPose::new(self.position, self.orientation())
            .expect("spherical parameterization yields a unit orientation")
    }

    /// Derivatives of the orientation with respect to (theta, phi).
    pub fn orientation_jacobian(&self) -> (Vec3<T>, Vec3<T>) {
        let (st, ct) = (self.theta.sin(), self.theta.cos());
        let (sp, cp) = (self.phi.sin(), self.phi.cos());
        match self.anchor {
            Anchor::Z => (
                Vec3::new(ct * cp, ct * sp, -st),
                Vec3::new(-st * sp, st * cp, T::zero()),
            ),
            Anchor::X => (
                Vec3::new(-st, ct * cp, ct * sp),
                Vec3::new(T::zero(), -st * sp, st * cp),
            ),
            Anchor::Y => (
                Vec3::new(ct * sp, -st, ct * cp),
                Vec3::new(st * cp, T::zero(), -st * sp),
            ),
        }
    }

    /// True when the orientation sits too close to the anchor poles for the
    /// azimuth to stay well-conditioned.
    pub fn needs_reanchor(&self) -> bool {
        self.theta.sin().abs() < T::lit(REANCHOR_SIN_THETA)
    }

    /// Re-express the same pose against the best anchor for its orientation.
    pub fn reanchored(&self) -> Self {
        Self::from_pose(&self.to_pose())
    }

    /// Apply an additive step in (x, y, z, theta, phi) order.
    pub fn apply_step(&self, delta: &[T; 5]) -> Self {
        Self {
            position: self.position + Vec3::new(delta[0], delta[1], delta[2]),
            theta: self.theta + delta[3],
            phi: self.phi + delta[4],
            anchor: self.anchor,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite() && self.theta.is_finite() && self.phi.is_finite()
    }

    /// Euclidean norm of the raw parameter vector, for step-size scaling.
    pub fn param_norm(&self) -> T {
        (self.position.norm_squared() + self.theta * self.theta + self.phi * self.phi).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z).normalized().unwrap()
    }

    #[test]
    fn round_trip_through_angles_preserves_orientation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..500 {
            let h = unit(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let pose = MagnetPose::new(Vec3::new(0.01, 0.02, 0.03), h).unwrap();
            let params = PoseParams::from_pose(&pose);
            let back = params.orientation();
            assert!((back - h).norm() < 1e-12);
            assert!((back.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn orientation_is_exactly_unit_for_arbitrary_angles() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for anchor in [Anchor::X, Anchor::Y, Anchor::Z] {
            for _ in 0..200 {
                let params = PoseParams {
                    position: Vec3::<f64>::zero(),
                    theta: rng.random_range(-7.0..7.0),
                    phi: rng.random_range(-7.0..7.0),
                    anchor,
                };
                assert!((params.orientation().norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn anchor_selection_avoids_poles() {
        let near_z = PoseParams::from_position_direction(
            Vec3::zero(),
            Vec3::new(1e-6, 0.0, 1.0),
        )
        .unwrap();
        assert_ne!(near_z.anchor, Anchor::Z);
        assert!(!near_z.needs_reanchor());

        let near_x = PoseParams::from_position_direction(
            Vec3::zero(),
            Vec3::new(1.0, 1e-6, 1e-6),
        )
        .unwrap();
        assert_ne!(near_x.anchor, Anchor::X);
        assert!(!near_x.needs_reanchor());
    }

    #[test]
    fn reanchoring_preserves_the_pose() {
        // Construct parameters deliberately near the Z anchor pole.
        let bad = PoseParams {
            position: Vec3::new(0.01, -0.02, 0.05),
            theta: 1e-5,
            phi: 0.3,
            anchor: Anchor::Z,
        };
        assert!(bad.needs_reanchor());
        let fixed = bad.reanchored();
        assert!(!fixed.needs_reanchor());
        assert!((fixed.orientation() - bad.orientation()).norm() < 1e-12);
        assert_eq!(fixed.position, bad.position);
    }

    #[test]
    fn orientation_jacobian_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        let h = 1e-7;
        for anchor in [Anchor::X, Anchor::Y, Anchor::Z] {
            for _ in 0..100 {
                let params = PoseParams {
                    position: Vec3::zero(),
                    theta: rng.random_range(0.2..2.9),
                    phi: rng.random_range(-3.0..3.0),
                    anchor,
                };
                let (dt, dp) = params.orientation_jacobian();
                let plus_t = PoseParams {
                    theta: params.theta + h,
                    ..params
                };
                let minus_t = PoseParams {
                    theta: params.theta - h,
                    ..params
                };
                let fd_t = (plus_t.orientation() - minus_t.orientation()) / (2.0 * h);
                assert!((fd_t - dt).norm() < 1e-6);
                let plus_p = PoseParams {
                    phi: params.phi + h,
                    ..params
                };
                let minus_p = PoseParams {
                    phi: params.phi - h,
                    ..params
                };
                let fd_p = (plus_p.orientation() - minus_p.orientation()) / (2.0 * h);
                assert!((fd_p - dp).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn apply_step_offsets_each_parameter() {
        let params = PoseParams {
            position: Vec3::new(1.0, 2.0, 3.0),
            theta: 0.5,
            phi: 0.25,
            anchor: Anchor::Z,
        };
        let stepped = params.apply_step(&[0.1, 0.2, 0.3, 0.01, 0.02]);
        assert_eq!(stepped.position, Vec3::new(1.1, 2.2, 3.3));
        assert_eq!(stepped.theta, 0.51);
        assert_eq!(stepped.phi, 0.27);
        assert_eq!(stepped.anchor, Anchor::Z);
    }
}
