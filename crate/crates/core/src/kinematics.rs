//! Coordinate transforms between the body frame {b} and the NED frame {n},
//! and the kinematic differential equation for pose:
//!
//! p_dot = R(Theta) * v_body
//! Theta_dot = T(Theta) * omega_body
//!
//! The Euler-angle rate transform T is singular at theta = +-pi/2; a guard
//! band of `SINGULARITY_GUARD` below that keeps the simulation inside the
//! valid operating region and turns the blow-up into a hard error.

use nalgebra::{Matrix3, Vector3, Vector6};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Guard band below |theta| = pi/2 at which the rate transform errors out.
pub const SINGULARITY_GUARD: f64 = 1e-3;

/// Wrap an angle to (-pi, pi].
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Roll, pitch and yaw describing the vehicle attitude, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl EulerAngles {
    /// Build an attitude with all three angles wrapped to (-pi, pi].
    pub fn new(phi: f64, theta: f64, psi: f64) -> Self {
        Self {
            phi: wrap_angle(phi),
            theta: wrap_angle(theta),
            psi: wrap_angle(psi),
        }
    }

    pub fn level(psi: f64) -> Self {
        Self::new(0.0, 0.0, psi)
    }

    /// True when pitch is inside the guard band around the transform
    /// singularity at +-pi/2.
    pub fn is_singular(&self) -> bool {
        self.theta.abs() >= PI / 2.0 - SINGULARITY_GUARD
    }
}

/// Position in NED coordinates plus attitude; the kinematic state eta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub attitude: EulerAngles,
}

impl Pose {
    pub fn new(position: Vector3<f64>, attitude: EulerAngles) -> Self {
        Self { position, attitude }
    }

    pub fn as_vector(&self) -> Vector6<f64> {
        Vector6::new(
            self.position.x,
            self.position.y,
            self.position.z,
            self.attitude.phi,
            self.attitude.theta,
            self.attitude.psi,
        )
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            position: Vector3::new(v[0], v[1], v[2]),
            attitude: EulerAngles::new(v[3], v[4], v[5]),
        }
    }
}

/// Body-frame velocity nu: linear (u, v, w) and angular (p, q, r).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyVelocity {
    pub linear: Vector3<f64>,
    pub angular: Vector3<f64>,
}

impl BodyVelocity {
    pub fn new(u: f64, v: f64, w: f64, p: f64, q: f64, r: f64) -> Self {
        Self {
            linear: Vector3::new(u, v, w),
            angular: Vector3::new(p, q, r),
        }
    }

    pub fn zero() -> Self {
        Self {
            linear: Vector3::zeros(),
            angular: Vector3::zeros(),
        }
    }

    pub fn as_vector(&self) -> Vector6<f64> {
        Vector6::new(
            self.linear.x,
            self.linear.y,
            self.linear.z,
            self.angular.x,
            self.angular.y,
            self.angular.z,
        )
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            linear: Vector3::new(v[0], v[1], v[2]),
            angular: Vector3::new(v[3], v[4], v[5]),
        }
    }

    pub fn surge(&self) -> f64 {
        self.linear.x
    }
}

/// Rotation matrix from {b} to {n} for the given attitude.
///
/// Orthonormal with determinant +1; the inverse rotation {n} -> {b} is the
/// transpose.
pub fn rotation_body_to_ned(attitude: &EulerAngles) -> Matrix3<f64> {
    let (sphi, cphi) = attitude.phi.sin_cos();
    let (sth, cth) = attitude.theta.sin_cos();
    let (spsi, cpsi) = attitude.psi.sin_cos();

    Matrix3::new(
        cpsi * cth,
        -spsi * cphi + cpsi * sth * sphi,
        spsi * sphi + cpsi * cphi * sth,
        spsi * cth,
        cpsi * cphi + sphi * sth * spsi,
        -cpsi * sphi + sth * spsi * cphi,
        -sth,
        cth * sphi,
        cth * cphi,
    )
}

/// Transform mapping body angular rates (p, q, r) to Euler-angle rates.
///
/// Errors with [`Error::SingularAttitude`] inside the guard band around
/// |theta| = pi/2, where the transform is not defined.
pub fn angular_rate_transform(attitude: &EulerAngles) -> Result<Matrix3<f64>> {
    if attitude.is_singular() {
        return Err(Error::SingularAttitude {
            theta_abs: attitude.theta.abs(),
        });
    }
    let (sphi, cphi) = attitude.phi.sin_cos();
    let cth = attitude.theta.cos();
    let tth = attitude.theta.tan();

    Ok(Matrix3::new(
        1.0,
        sphi * tth,
        cphi * tth,
        0.0,
        cphi,
        -sphi,
        0.0,
        sphi / cth,
        cphi / cth,
    ))
}

/// Time derivative of the pose: eta_dot = J(eta) * nu with block-diagonal J.
pub fn pose_derivative(pose: &Pose, nu: &BodyVelocity) -> Result<Vector6<f64>> {
    let rot = rotation_body_to_ned(&pose.attitude);
    let rate = angular_rate_transform(&pose.attitude)?;
    let p_dot = rot * nu.linear;
    let theta_dot = rate * nu.angular;
    Ok(Vector6::new(
        p_dot.x, p_dot.y, p_dot.z, theta_dot.x, theta_dot.y, theta_dot.z,
    ))
}
