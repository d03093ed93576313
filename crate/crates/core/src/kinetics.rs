//! Force terms of the nonlinear kinetic equation
//!
//! M * nu_r_dot + C(nu_r) * nu_r + D(nu_r) * nu_r + G(eta) = tau_control
//!
//! with the mass matrix M (rigid body plus added mass), Coriolis-centripetal
//! matrix C, damping D = D_lin + D_quad + L (linear viscous, quadratic and
//! lift), restoring forces G from gravity/buoyancy, and the actuator force
//! map tau. All coefficients live in a flat key-value coefficient file.

use nalgebra::{Cholesky, Matrix6, Vector6};
use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kinematics::{BodyVelocity, EulerAngles};

/// Normalized control inputs: propeller command in [0, 1], fin angles in
/// radians saturated to the fin limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput {
    pub n: f64,
    pub delta_r: f64,
    pub delta_s: f64,
}

impl ControlInput {
    pub fn zero() -> Self {
        Self {
            n: 0.0,
            delta_r: 0.0,
            delta_s: 0.0,
        }
    }

    /// Clamp the input to its actuator bounds.
    pub fn saturated(&self, fin_limit: f64) -> Self {
        Self {
            n: self.n.clamp(0.0, 1.0),
            delta_r: self.delta_r.clamp(-fin_limit, fin_limit),
            delta_s: self.delta_s.clamp(-fin_limit, fin_limit),
        }
    }
}

/// Full hydrodynamic coefficient set plus derived quantities.
///
/// Immutable after load; the mass matrix is factorized once here and the
/// factorization is reused for every acceleration solve.
#[allow(non_snake_case)]
#[derive(Debug, Clone)]
pub struct HydroModel {
    // Rigid body
    pub m: f64,
    pub W: f64,
    pub B: f64,
    pub z_G: f64,
    pub L: f64,
    pub d: f64,
    // Inertia
    pub I_x: f64,
    pub I_y: f64,
    pub I_z: f64,
    // Added mass
    pub X_udot: f64,
    pub Y_vdot: f64,
    pub Z_wdot: f64,
    pub K_pdot: f64,
    pub M_qdot: f64,
    pub N_rdot: f64,
    // Linear damping
    pub X_u: f64,
    pub Y_v: f64,
    pub Y_r: f64,
    pub Z_w: f64,
    pub Z_q: f64,
    pub K_p: f64,
    pub M_w: f64,
    pub M_q: f64,
    pub N_v: f64,
    pub N_r: f64,
    // Quadratic damping
    pub X_uu: f64,
    pub Y_vv: f64,
    pub Z_ww: f64,
    pub K_pp: f64,
    pub M_ww: f64,
    pub N_vv: f64,
    pub Y_rr: f64,
    pub Z_qq: f64,
    pub M_qq: f64,
    pub N_rr: f64,
    // Lift
    pub Y_uvf: f64,
    pub Y_uvb: f64,
    pub Z_uwf: f64,
    pub Z_uwb: f64,
    pub M_uwf: f64,
    pub M_uwb: f64,
    pub N_uvf: f64,
    pub N_uvb: f64,
    pub Y_urf: f64,
    pub Z_uqf: f64,
    pub M_uqf: f64,
    pub N_urf: f64,
    // Actuators
    pub Y_uudr: f64,
    pub N_uudr: f64,
    pub Z_uuds: f64,
    pub M_uuds: f64,
    pub fin_limit: f64,
    pub thrust_max: f64,

    mass: Matrix6<f64>,
    mass_chol: Cholesky<f64, nalgebra::Const<6>>,
}

/// The default coefficient file shipped with the crate.
pub const DEFAULT_COEFFICIENTS: &str = include_str!("../data/vehicle.coef");

const COEFFICIENT_KEYS: [&str; 53] = [
    "m", "W", "B", "z_G", "L", "d", "I_x", "I_y", "I_z", "X_udot", "Y_vdot", "Z_wdot", "K_pdot",
    "M_qdot", "N_rdot", "X_u", "Y_v", "Y_r", "Z_w", "Z_q", "K_p", "M_w", "M_q", "N_v", "N_r",
    "X_uu", "Y_vv", "Z_ww", "K_pp", "M_ww", "N_vv", "Y_rr", "Z_qq", "M_qq", "N_rr", "Y_uvf",
    "Y_uvb", "Z_uwf", "Z_uwb", "M_uwf", "M_uwb", "N_uvf", "N_uvb", "Y_urf", "Z_uqf", "M_uqf",
    "N_urf", "Y_uudr", "N_uudr", "Z_uuds", "M_uuds", "fin_limit", "thrust_max",
];

fn parse_coefficients(text: &str) -> Result<HashMap<String, f64>> {
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("coefficient line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim();
        if !COEFFICIENT_KEYS.contains(&key) {
            return Err(Error::Config(format!(
                "coefficient line {}: unknown key `{key}`",
                lineno + 1
            )));
        }
        let value: f64 = value.trim().parse().map_err(|_| {
            Error::Config(format!("coefficient line {}: bad value for `{key}`", lineno + 1))
        })?;
        if map.insert(key.to_string(), value).is_some() {
            return Err(Error::Config(format!("duplicate coefficient `{key}`")));
        }
    }
    Ok(map)
}

impl HydroModel {
    /// Load the coefficient set shipped with the crate.
    pub fn default_model() -> Result<Self> {
        Self::from_text(DEFAULT_COEFFICIENTS)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    /// Parse a flat key-value coefficient listing. Every key must be
    /// present exactly once; unknown keys are rejected.
    pub fn from_text(text: &str) -> Result<Self> {
        let map = parse_coefficients(text)?;
        let get = |key: &str| -> Result<f64> {
            map.get(key)
                .copied()
                .ok_or_else(|| Error::Config(format!("missing coefficient `{key}`")))
        };

        let damping_keys = [
            "X_u", "Y_v", "Y_r", "Z_w", "Z_q", "K_p", "M_w", "M_q", "N_v", "N_r", "X_uu", "Y_vv",
            "Z_ww", "K_pp", "M_ww", "N_vv", "Y_rr", "Z_qq", "M_qq", "N_rr", "Y_uvf", "Y_uvb",
            "Z_uwf", "Z_uwb", "M_uwf", "M_uwb", "N_uvf", "N_uvb", "Y_urf", "Z_uqf", "M_uqf",
            "N_urf",
        ];
        for key in damping_keys {
            if get(key)? >= 0.0 {
                return Err(Error::Config(format!(
                    "damping coefficient `{key}` must be strictly negative"
                )));
            }
        }
        let weight = get("W")?;
        let buoyancy = get("B")?;
        if buoyancy <= weight {
            return Err(Error::Config(
                "buoyancy must exceed weight (slightly buoyant vehicle)".into(),
            ));
        }

        let m = get("m")?;
        let z_g = get("z_G")?;
        let mass = Self::build_mass_matrix(
            m,
            z_g,
            get("X_udot")?,
            get("Y_vdot")?,
            get("Z_wdot")?,
            get("I_x")? - get("K_pdot")?,
            get("I_y")? - get("M_qdot")?,
            get("I_z")? - get("N_rdot")?,
        );
        let mass_chol = Cholesky::new(mass).ok_or(Error::NonPositiveDefinite)?;

        Ok(Self {
            m,
            W: weight,
            B: buoyancy,
            z_G: z_g,
            L: get("L")?,
            d: get("d")?,
            I_x: get("I_x")?,
            I_y: get("I_y")?,
            I_z: get("I_z")?,
            X_udot: get("X_udot")?,
            Y_vdot: get("Y_vdot")?,
            Z_wdot: get("Z_wdot")?,
            K_pdot: get("K_pdot")?,
            M_qdot: get("M_qdot")?,
            N_rdot: get("N_rdot")?,
            X_u: get("X_u")?,
            Y_v: get("Y_v")?,
            Y_r: get("Y_r")?,
            Z_w: get("Z_w")?,
            Z_q: get("Z_q")?,
            K_p: get("K_p")?,
            M_w: get("M_w")?,
            M_q: get("M_q")?,
            N_v: get("N_v")?,
            N_r: get("N_r")?,
            X_uu: get("X_uu")?,
            Y_vv: get("Y_vv")?,
            Z_ww: get("Z_ww")?,
            K_pp: get("K_pp")?,
            M_ww: get("M_ww")?,
            N_vv: get("N_vv")?,
            Y_rr: get("Y_rr")?,
            Z_qq: get("Z_qq")?,
            M_qq: get("M_qq")?,
            N_rr: get("N_rr")?,
            Y_uvf: get("Y_uvf")?,
            Y_uvb: get("Y_uvb")?,
            Z_uwf: get("Z_uwf")?,
            Z_uwb: get("Z_uwb")?,
            M_uwf: get("M_uwf")?,
            M_uwb: get("M_uwb")?,
            N_uvf: get("N_uvf")?,
            N_uvb: get("N_uvb")?,
            Y_urf: get("Y_urf")?,
            Z_uqf: get("Z_uqf")?,
            M_uqf: get("M_uqf")?,
            N_urf: get("N_urf")?,
            Y_uudr: get("Y_uudr")?,
            N_uudr: get("N_uudr")?,
            Z_uuds: get("Z_uuds")?,
            M_uuds: get("M_uuds")?,
            fin_limit: get("fin_limit")?,
            thrust_max: get("thrust_max")?,
            mass,
            mass_chol,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn build_mass_matrix(
        m: f64,
        z_g: f64,
        x_udot: f64,
        y_vdot: f64,
        z_wdot: f64,
        ixk: f64,
        iym: f64,
        izn: f64,
    ) -> Matrix6<f64> {
        let mzg = m * z_g;
        let mut mass = Matrix6::zeros();
        mass[(0, 0)] = m - x_udot;
        mass[(1, 1)] = m - y_vdot;
        mass[(2, 2)] = m - z_wdot;
        mass[(3, 3)] = ixk;
        mass[(4, 4)] = iym;
        mass[(5, 5)] = izn;
        // COG sits z_G below the center of control, coupling surge/pitch
        // and sway/roll. Symmetric by construction.
        mass[(0, 4)] = mzg;
        mass[(4, 0)] = mzg;
        mass[(1, 3)] = -mzg;
        mass[(3, 1)] = -mzg;
        mass
    }

    /// The system inertia matrix (rigid body plus added mass).
    pub fn mass_matrix(&self) -> Matrix6<f64> {
        self.mass
    }

    /// Coriolis-centripetal matrix evaluated at the relative velocity.
    /// Skew-symmetric for every nu_r, and independent of linear velocity
    /// in the sense required for irrotational current modeling.
    pub fn coriolis_matrix(&self, nu_r: &BodyVelocity) -> Matrix6<f64> {
        let (u, v, w) = (nu_r.linear.x, nu_r.linear.y, nu_r.linear.z);
        let (p, q, r) = (nu_r.angular.x, nu_r.angular.y, nu_r.angular.z);
        let mzg = self.m * self.z_G;
        let bu = self.m - self.X_udot;
        let bv = self.m - self.Y_vdot;
        let bw = self.m - self.Z_wdot;
        let cp = self.I_x - self.K_pdot;
        let cq = self.I_y - self.M_qdot;
        let cr = self.I_z - self.N_rdot;

        let mut c = Matrix6::zeros();
        c[(0, 3)] = mzg * r;
        c[(0, 4)] = bw * w;
        c[(0, 5)] = -bv * v;
        c[(1, 3)] = -bw * w;
        c[(1, 4)] = mzg * r;
        c[(1, 5)] = bu * u;
        c[(2, 3)] = -mzg * p + bv * v;
        c[(2, 4)] = -mzg * q - bu * u;
        c[(2, 5)] = 0.0;
        c[(3, 4)] = cr * r;
        c[(3, 5)] = -cq * q;
        c[(4, 5)] = cp * p;
        // Mirror the upper triangle with flipped sign.
        for row in 0..6 {
            for col in (row + 1)..6 {
                c[(col, row)] = -c[(row, col)];
            }
        }
        c
    }

    /// Total damping matrix D + D_n(nu_r) + L(nu_r).
    pub fn damping_matrix(&self, nu_r: &BodyVelocity) -> Matrix6<f64> {
        let (u, v, w) = (nu_r.linear.x, nu_r.linear.y, nu_r.linear.z);
        let (p, q, r) = (nu_r.angular.x, nu_r.angular.y, nu_r.angular.z);

        let mut d = Matrix6::zeros();
        // Linear viscous damping.
        d[(0, 0)] = -self.X_u;
        d[(1, 1)] = -self.Y_v;
        d[(1, 5)] = -self.Y_r;
        d[(2, 2)] = -self.Z_w;
        d[(2, 4)] = -self.Z_q;
        d[(3, 3)] = -self.K_p;
        d[(4, 2)] = -self.M_w;
        d[(4, 4)] = -self.M_q;
        d[(5, 1)] = -self.N_v;
        d[(5, 5)] = -self.N_r;
        // Quadratic damping from vortex shedding.
        d[(0, 0)] += -self.X_uu * u.abs();
        d[(1, 1)] += -self.Y_vv * v.abs();
        d[(2, 2)] += -self.Z_ww * w.abs();
        d[(3, 3)] += -self.K_pp * p.abs();
        d[(4, 2)] += -self.M_ww * w.abs();
        d[(5, 1)] += -self.N_vv * v.abs();
        d[(1, 5)] += -self.Y_rr * r.abs();
        d[(2, 4)] += -self.Z_qq * q.abs();
        d[(4, 4)] += -self.M_qq * q.abs();
        d[(5, 5)] += -self.N_rr * r.abs();
        // Body and fin lift, proportional to relative surge speed.
        d[(1, 1)] += -(self.Y_uvf + self.Y_uvb) * u;
        d[(2, 2)] += -(self.Z_uwf + self.Z_uwb) * u;
        d[(4, 2)] += -(self.M_uwf + self.M_uwb) * u;
        d[(5, 1)] += -(self.N_uvf + self.N_uvb) * u;
        d[(1, 5)] += -self.Y_urf * u;
        d[(2, 4)] += -self.Z_uqf * u;
        d[(4, 4)] += -self.M_uqf * u;
        d[(5, 5)] += -self.N_urf * u;
        d
    }

    /// Restoring force/moment vector from gravity and buoyancy. Depends
    /// only on roll and pitch; the yaw-moment entry is identically zero.
    pub fn restoring_vector(&self, attitude: &EulerAngles) -> Vector6<f64> {
        let (sphi, cphi) = attitude.phi.sin_cos();
        let (sth, cth) = attitude.theta.sin_cos();
        let wb = self.W - self.B;
        Vector6::new(
            wb * sth,
            -wb * cth * sphi,
            -wb * cth * cphi,
            self.z_G * self.W * cth * sphi,
            self.z_G * self.W * sth,
            0.0,
        )
    }

    /// Actuator force map: tau = B(u_r) * [thrust_force, delta_r, delta_s].
    /// Fin forces scale with the square of relative surge speed, so fins
    /// are ineffective at rest.
    pub fn control_force(&self, input: &ControlInput, u_r: f64) -> Vector6<f64> {
        let input = input.saturated(self.fin_limit);
        let thrust = input.n * self.thrust_max;
        let uu = u_r * u_r;
        Vector6::new(
            thrust,
            self.Y_uudr * uu * input.delta_r,
            self.Z_uuds * uu * input.delta_s,
            0.0,
            self.M_uuds * uu * input.delta_s,
            self.N_uudr * uu * input.delta_r,
        )
    }

    /// Body-frame acceleration: solves
    /// M * nu_r_dot = tau - C(nu_r) nu_r - D(nu_r) nu_r - G(eta)
    /// using the cached Cholesky factorization of M.
    pub fn acceleration(
        &self,
        nu_r: &BodyVelocity,
        attitude: &EulerAngles,
        input: &ControlInput,
    ) -> Vector6<f64> {
        let nu_r_vec = nu_r.as_vector();
        let rhs = self.control_force(input, nu_r.linear.x)
            - self.coriolis_matrix(nu_r) * nu_r_vec
            - self.damping_matrix(nu_r) * nu_r_vec
            - self.restoring_vector(attitude);
        self.mass_chol.solve(&rhs)
    }
}
