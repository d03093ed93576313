//! Fixed-step integration of the coupled kinematic and kinetic equations,
//! with actuator saturation and an irrotational ocean-current disturbance.
//!
//! The current has a fixed NED direction per episode and an intensity that
//! random-walks inside [`CURRENT_MIN`], [`CURRENT_MAX`]. It enters the
//! dynamics only through the relative velocity nu_r; the current velocity
//! is held constant in NED over a step and its body-frame rate of change
//! is neglected inside the RK4 stage derivatives.

use nalgebra::{Vector3, Vector6};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, UnitSphere};
use std::io::Write;

use crate::error::{Error, Result};
use crate::kinematics::{pose_derivative, rotation_body_to_ned, BodyVelocity, Pose};
use crate::kinetics::{ControlInput, HydroModel};

/// Default integration step, 10 Hz.
pub const DEFAULT_DT: f64 = 0.1;
/// Bounds of the current-intensity random walk, m/s.
pub const CURRENT_MIN: f64 = 0.5;
pub const CURRENT_MAX: f64 = 1.0;
/// Default standard deviation of the intensity walk, m/s per sqrt(s).
pub const CURRENT_WALK_SIGMA: f64 = 0.05;
/// Any state component beyond this magnitude counts as a blow-up.
const DIVERGENCE_LIMIT: f64 = 1e6;

/// Ocean-current disturbance: fixed direction, random-walking intensity.
#[derive(Debug, Clone)]
pub struct CurrentState {
    pub direction: Vector3<f64>,
    pub intensity: f64,
    pub sigma_walk: f64,
    rng: ChaCha8Rng,
}

impl CurrentState {
    /// Draw a direction uniformly on the unit sphere and an initial
    /// intensity uniform in the allowed interval. Deterministic in `seed`.
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dir: [f64; 3] = UnitSphere.sample(&mut rng);
        let unit: f64 = rand::Rng::random(&mut rng);
        Self {
            direction: Vector3::new(dir[0], dir[1], dir[2]),
            intensity: CURRENT_MIN + unit * (CURRENT_MAX - CURRENT_MIN),
            sigma_walk: CURRENT_WALK_SIGMA,
            rng,
        }
    }

    pub fn with_direction(mut self, direction: Vector3<f64>) -> Self {
        self.direction = direction.normalize();
        self
    }

    /// Current velocity in the NED frame.
    pub fn velocity_ned(&self) -> Vector3<f64> {
        self.direction * self.intensity
    }

    /// One random-walk step of the intensity, clamped to the interval.
    /// The direction never changes within an episode.
    pub fn advance(&mut self, dt: f64) {
        let noise: f64 = StandardNormal.sample(&mut self.rng);
        self.intensity += self.sigma_walk * dt.sqrt() * noise;
        self.intensity = self.intensity.clamp(CURRENT_MIN, CURRENT_MAX);
    }
}

/// Integrated plant state: pose, body velocity, time and the optional
/// current disturbance. Owned by exactly one environment instance.
#[derive(Debug, Clone)]
pub struct SimState {
    pub pose: Pose,
    pub nu: BodyVelocity,
    pub time: f64,
    pub current: Option<CurrentState>,
}

impl SimState {
    pub fn at_rest(pose: Pose) -> Self {
        Self {
            pose,
            nu: BodyVelocity::zero(),
            time: 0.0,
            current: None,
        }
    }

    /// Velocity relative to the water: the current is rotated into the
    /// body frame and subtracted from the linear part; the angular part is
    /// untouched (irrotational current).
    pub fn relative_velocity(&self) -> BodyVelocity {
        match &self.current {
            None => self.nu,
            Some(current) => {
                let rot = rotation_body_to_ned(&self.pose.attitude);
                let current_body = rot.transpose() * current.velocity_ned();
                BodyVelocity {
                    linear: self.nu.linear - current_body,
                    angular: self.nu.angular,
                }
            }
        }
    }
}

fn state_derivative(
    model: &HydroModel,
    pose: &Pose,
    nu: &BodyVelocity,
    current_ned: Option<&Vector3<f64>>,
    input: &ControlInput,
) -> Result<(Vector6<f64>, Vector6<f64>)> {
    let nu_r = match current_ned {
        None => *nu,
        Some(vc) => {
            let rot = rotation_body_to_ned(&pose.attitude);
            BodyVelocity {
                linear: nu.linear - rot.transpose() * vc,
                angular: nu.angular,
            }
        }
    };
    let eta_dot = pose_derivative(pose, nu)?;
    let nu_dot = model.acceleration(&nu_r, &pose.attitude, input);
    Ok((eta_dot, nu_dot))
}

/// Advance the plant one fixed RK4 step. The input is saturated first and
/// held constant over the step, as is the NED current velocity. Angles are
/// re-wrapped afterwards.
///
/// Errors with [`Error::SingularAttitude`] if any stage or the result
/// leaves the valid attitude region, and [`Error::NumericalDivergence`]
/// if a state component blows up.
pub fn step(model: &HydroModel, state: &SimState, input: &ControlInput, dt: f64) -> Result<SimState> {
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let input = input.saturated(model.fin_limit);
    let current_ned = state.current.as_ref().map(|c| c.velocity_ned());
    let current_ref = current_ned.as_ref();

    let eta0 = state.pose.as_vector();
    let nu0 = state.nu.as_vector();

    let eval = |eta: &Vector6<f64>, nu: &Vector6<f64>| -> Result<(Vector6<f64>, Vector6<f64>)> {
        state_derivative(
            model,
            &Pose::from_vector(eta),
            &BodyVelocity::from_vector(nu),
            current_ref,
            &input,
        )
    };

    let (k1_eta, k1_nu) = eval(&eta0, &nu0)?;
    let half = dt / 2.0;
    let (k2_eta, k2_nu) = eval(&(eta0 + half * k1_eta), &(nu0 + half * k1_nu))?;
    let (k3_eta, k3_nu) = eval(&(eta0 + half * k2_eta), &(nu0 + half * k2_nu))?;
    let (k4_eta, k4_nu) = eval(&(eta0 + dt * k3_eta), &(nu0 + dt * k3_nu))?;

    let eta = eta0 + dt / 6.0 * (k1_eta + 2.0 * k2_eta + 2.0 * k3_eta + k4_eta);
    let nu = nu0 + dt / 6.0 * (k1_nu + 2.0 * k2_nu + 2.0 * k3_nu + k4_nu);

    for i in 0..6 {
        if !eta[i].is_finite() || eta[i].abs() > DIVERGENCE_LIMIT {
            return Err(Error::NumericalDivergence { value: eta[i] });
        }
        if !nu[i].is_finite() || nu[i].abs() > DIVERGENCE_LIMIT {
            return Err(Error::NumericalDivergence { value: nu[i] });
        }
    }

    let pose = Pose::from_vector(&eta);
    if pose.attitude.is_singular() {
        return Err(Error::SingularAttitude {
            theta_abs: pose.attitude.theta.abs(),
        });
    }

    Ok(SimState {
        pose,
        nu: BodyVelocity::from_vector(&nu),
        time: state.time + dt,
        current: state.current.clone(),
    })
}

/// Header of the trajectory log written by [`TrajectoryLogger`].
pub const TRAJECTORY_HEADER: &str = "time,x,y,z,phi,theta,psi,u,v,w,p,q,r,u_r,v_r,w_r,n,delta_r,delta_s,current_intensity";

/// Append-only CSV trajectory log, one row per simulation step.
pub struct TrajectoryLogger<W: Write> {
    sink: W,
}

impl<W: Write> TrajectoryLogger<W> {
    pub fn new(mut sink: W) -> Result<Self> {
        writeln!(sink, "{TRAJECTORY_HEADER}")?;
        Ok(Self { sink })
    }

    /// Log one step: state after the step, the normalized inputs that were
    /// applied, and the current intensity (zero when disabled).
    pub fn log(&mut self, state: &SimState, n: f64, delta_r: f64, delta_s: f64) -> Result<()> {
        let eta = state.pose.as_vector();
        let nu = state.nu.as_vector();
        let nu_r = state.relative_velocity();
        let intensity = state.current.as_ref().map_or(0.0, |c| c.intensity);
        write!(self.sink, "{:.6}", state.time)?;
        for i in 0..6 {
            write!(self.sink, ",{:.9}", eta[i])?;
        }
        for i in 0..6 {
            write!(self.sink, ",{:.9}", nu[i])?;
        }
        for i in 0..3 {
            write!(self.sink, ",{:.9}", nu_r.linear[i])?;
        }
        writeln!(self.sink, ",{n:.9},{delta_r:.9},{delta_s:.9},{intensity:.9}")?;
        Ok(())
    }
}
