//! Closed-form magnetic dipole forward model and its analytic pose Jacobian.
//!
//! A cylindrical permanent magnet, observed from distances large compared to
//! its own size, is modeled as a point dipole with strength
//! `B_T = mu_r * mu_0 * r^2 * L * M0 / 4` (tesla·m³). The flux density at a
//! sensor offset `P` from the magnet center, with unit magnetization axis
//! `H`, is
//!
//! ```text
//! B = B_T * ( 3 (H·P) P / R^5  -  H / R^3 ),   R = |P|
//! ```
//!
//! [`flux_jacobian`] differentiates this with respect to the six pose
//! parameters (three position components, three orientation components); the
//! solver chains the orientation block through its own angle
//! parameterization.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec3::{Mat3, Vec3};

/// Vacuum permeability, T·m/A.
pub const MU_0: f64 = 4.0 * std::f64::consts::PI * 1e-7;

/// Default minimum magnet-to-sensor separation in meters; below this the
/// field evaluation reports a singularity instead of returning huge values.
pub const DEFAULT_SINGULARITY_EPS_M: f64 = 1e-6;

/// Tolerance on `|orientation| - 1` accepted by [`MagnetPose::new`].
pub const ORIENTATION_UNIT_TOL: f64 = 1e-9;

/// Flux density vector at a sensor, tesla per axis.
pub type FluxVector<T> = Vec3<T>;

/// Geometry and magnetization of the cylindrical source magnet.
///
/// All lengths are meters and the magnetization is A/m; the vacuum
/// permeability is fixed, relative permeability defaults to air.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnetSpec<T> {
    length: T,
    radius: T,
    magnetization: T,
    mu_r: T,
    mu_0: T,
}

impl<T: Real> MagnetSpec<T> {
    pub fn new(length_m: T, radius_m: T, magnetization_a_per_m: T, mu_r: T) -> Result<Self> {
        if !(length_m.is_finite() && length_m > T::zero()) {
            return Err(Error::InvalidMagnetSpec(format!(
                "length must be positive, got {length_m}"
            )));
        }
        if !(radius_m.is_finite() && radius_m > T::zero()) {
            return Err(Error::InvalidMagnetSpec(format!(
                "radius must be positive, got {radius_m}"
            )));
        }
        if !(magnetization_a_per_m.is_finite() && magnetization_a_per_m > T::zero()) {
            return Err(Error::InvalidMagnetSpec(format!(
                "magnetization must be positive, got {magnetization_a_per_m}"
            )));
        }
        if !(mu_r.is_finite() && mu_r > T::zero()) {
            return Err(Error::InvalidMagnetSpec(format!(
                "relative permeability must be positive, got {mu_r}"
            )));
        }
        Ok(Self {
            length: length_m,
            radius: radius_m,
            magnetization: magnetization_a_per_m,
            mu_r,
            mu_0: T::lit(MU_0),
        })
    }

    /// The 2 mm x 1 mm cylinder used throughout the experiment presets,
    /// with a configurable magnetization (sintered NdFeB is around 8e5 A/m).
    pub fn small_cylinder(magnetization_a_per_m: T) -> Result<Self> {
        Self::new(T::lit(2e-3), T::lit(1e-3), magnetization_a_per_m, T::one())
    }

    pub fn length_m(&self) -> T {
        self.length
    }

    pub fn radius_m(&self) -> T {
        self.radius
    }

    pub fn magnetization_a_per_m(&self) -> T {
        self.magnetization
    }

    pub fn mu_r(&self) -> T {
        self.mu_r
    }

    pub fn mu_0(&self) -> T {
        self.mu_0
    }

    /// Dipole strength `B_T` in tesla·m³.
    ///
    /// `mu_r * mu_0 * pi * r^2 * L * M0 / (4 pi)`; the `pi` cancels.
    pub fn dipole_strength(&self) -> T {
        self.mu_r * self.mu_0 * self.radius * self.radius * self.length * self.magnetization
            / T::lit(4.0)
    }
}

/// Position and magnetization direction of the magnet: the six unknowns the
/// localizer estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnetPose<T> {
    position: Vec3<T>,
    orientation: Vec3<T>,
}

impl<T: Real> MagnetPose<T> {
    /// Construct from a position and an orientation that must already be a
    /// unit vector (to within [`ORIENTATION_UNIT_TOL`]).
    pub fn new(position: Vec3<T>, orientation: Vec3<T>) -> Result<Self> {
        if !position.is_finite() || !orientation.is_finite() {
            return Err(Error::NonUnitOrientation { deviation: f64::NAN });
        }
        let deviation = (orientation.norm() - T::one()).abs();
        if deviation > T::lit(ORIENTATION_UNIT_TOL) {
            return Err(Error::NonUnitOrientation {
                deviation: deviation.as_f64(),
            });
        }
        Ok(Self {
            position,
            orientation,
        })
    }

    /// Construct from a position and an arbitrary non-zero direction, which
    /// is normalized.
    pub fn from_direction(position: Vec3<T>, direction: Vec3<T>) -> Result<Self> {
        let orientation = direction.normalized().ok_or(Error::ZeroOrientation)?;
        Ok(Self {
            position,
            orientation,
        })
    }

    pub fn position(&self) -> Vec3<T> {
        self.position
    }

    pub fn orientation(&self) -> Vec3<T> {
        self.orientation
    }
}

/// Flux density at `sensor_pos` using the default singularity guard.
pub fn flux_at<T: Real>(
    pose: &MagnetPose<T>,
    spec: &MagnetSpec<T>,
    sensor_pos: Vec3<T>,
) -> Result<FluxVector<T>> {
    flux_at_eps(pose, spec, sensor_pos, T::lit(DEFAULT_SINGULARITY_EPS_M))
}

/// Flux density at `sensor_pos`, reporting a singularity when the sensor is
/// within `epsilon_m` of the magnet center.
pub fn flux_at_eps<T: Real>(
    pose: &MagnetPose<T>,
    spec: &MagnetSpec<T>,
    sensor_pos: Vec3<T>,
    epsilon_m: T,
) -> Result<FluxVector<T>> {
    let p = sensor_pos - pose.position;
    let r2 = p.norm_squared();
    let r = r2.sqrt();
    if r < epsilon_m || !r.is_finite() {
        return Err(Error::SensorCoincident {
            distance_m: r.as_f64(),
            epsilon_m: epsilon_m.as_f64(),
        });
    }
    let r3 = r2 * r;
    let r5 = r3 * r2;
    let h = pose.orientation;
    let axial = h.dot(p);
    let bt = spec.dipole_strength();
    Ok((p * (T::lit(3.0) * axial / r5) - h / r3) * bt)
}

/// Derivatives of the flux vector with respect to the six pose parameters,
/// split into the two natural 3x3 blocks.
#[derive(Debug, Clone, Copy)]
pub struct FluxJacobian<T> {
    /// d(flux)/d(position), tesla per meter. Row = flux axis, col = a, b, c.
    pub d_position: Mat3<T>,
    /// d(flux)/d(orientation), tesla. Row = flux axis, col = m, n, p.
    pub d_orientation: Mat3<T>,
}

impl<T: Real> FluxJacobian<T> {
    /// Entry view of the 3x6 matrix with parameter order (a, b, c, m, n, p).
    pub fn entry(&self, flux_axis: usize, param: usize) -> T {
        if param < 3 {
            self.d_position.entry(flux_axis, param)
        } else {
            self.d_orientation.entry(flux_axis, param - 3)
        }
    }
}

/// Analytic Jacobian of [`flux_at`] using the default singularity guard.
pub fn flux_jacobian<T: Real>(
    pose: &MagnetPose<T>,
    spec: &MagnetSpec<T>,
    sensor_pos: Vec3<T>,
) -> Result<FluxJacobian<T>> {
    flux_jacobian_eps(pose, spec, sensor_pos, T::lit(DEFAULT_SINGULARITY_EPS_M))
}

/// Analytic Jacobian of [`flux_at_eps`].
///
/// With `P = sensor - position`, `R = |P|`, `D = H·P`:
///
/// ```text
/// dB/d(position)    = B_T * ( -3/R^5 (P Hᵀ + H Pᵀ + D I) + 15 D / R^7 P Pᵀ )
/// dB/d(orientation) = B_T * (  3/R^5 P Pᵀ - I / R^3 )
/// ```
pub fn flux_jacobian_eps<T: Real>(
    pose: &MagnetPose<T>,
    spec: &MagnetSpec<T>,
    sensor_pos: Vec3<T>,
    epsilon_m: T,
) -> Result<FluxJacobian<T>> {
    let p = sensor_pos - pose.position;
    let r2 = p.norm_squared();
    let r = r2.sqrt();
    if r < epsilon_m || !r.is_finite() {
        return Err(Error::SensorCoincident {
            distance_m: r.as_f64(),
            epsilon_m: epsilon_m.as_f64(),
        });
    }
    let r3 = r2 * r;
    let r5 = r3 * r2;
    let r7 = r5 * r2;
    let h = pose.orientation;
    let axial = h.dot(p);
    let bt = spec.dipole_strength();

    let three = T::lit(3.0);
    let pp = p.outer(p);
    let sym = p
        .outer(h)
        .add_mat(&h.outer(p))
        .add_mat(&Mat3::identity().scale(axial));
    let d_position = sym
        .scale(-three / r5)
        .add_mat(&pp.scale(T::lit(15.0) * axial / r7))
        .scale(bt);
    let d_orientation = pp
        .scale(three / r5)
        .add_mat(&Mat3::identity().scale(-T::one() / r3))
        .scale(bt);

    Ok(FluxJacobian {
        d_position,
        d_orientation,
    })
}
