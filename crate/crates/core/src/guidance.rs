//! Waypoint path representation, Serret-Frenet tracking errors and
//! look-ahead steering.
//!
//! A path is a piecewise straight line through waypoints. Each segment
//! carries an azimuth chi_p and elevation upsilon_p so that waypoint i is
//! reached from waypoint i-1 by
//!
//! x += s * cos(chi_p) * cos(upsilon_p)
//! y += s * sin(chi_p) * cos(upsilon_p)
//! z -= s * sin(upsilon_p)
//!
//! Tracking errors are the components of the vehicle offset from the
//! closest point of the active segment, expressed in the path-attached
//! frame: e is positive to starboard of the path, h positive below it.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::Path as FsPath;

use crate::error::{Error, Result};
use crate::kinematics::{rotation_body_to_ned, wrap_angle, EulerAngles};

/// Sphere-of-acceptance radius for waypoint switching: two body lengths.
pub const ACCEPTANCE_RADIUS: f64 = 2.16;
/// Default look-ahead distance, meters.
pub const DEFAULT_LOOKAHEAD: f64 = 5.0;

/// Piecewise straight-line path through waypoints, first at the NED origin.
#[derive(Debug, Clone)]
pub struct Path {
    waypoints: Vec<Vector3<f64>>,
    azimuths: Vec<f64>,
    elevations: Vec<f64>,
    lengths: Vec<f64>,
}

/// Along-track distance, cross-track error and vertical-track error on the
/// active segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingError {
    pub s: f64,
    pub e: f64,
    pub h: f64,
    pub segment_index: usize,
}

impl Path {
    /// Build a path from waypoints. Requires at least two, distinct
    /// consecutive points.
    pub fn from_waypoints(waypoints: Vec<Vector3<f64>>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::Config("path needs at least 2 waypoints".into()));
        }
        let mut azimuths = Vec::with_capacity(waypoints.len() - 1);
        let mut elevations = Vec::with_capacity(waypoints.len() - 1);
        let mut lengths = Vec::with_capacity(waypoints.len() - 1);
        for pair in waypoints.windows(2) {
            let delta = pair[1] - pair[0];
            let length = delta.norm();
            if length < 1e-9 {
                return Err(Error::Config("consecutive waypoints must be distinct".into()));
            }
            let horizontal = (delta.x * delta.x + delta.y * delta.y).sqrt();
            azimuths.push(delta.y.atan2(delta.x));
            elevations.push((-delta.z).atan2(horizontal));
            lengths.push(length);
        }
        Ok(Self {
            waypoints,
            azimuths,
            elevations,
            lengths,
        })
    }

    /// Deterministic random path: first waypoint at the origin, segment
    /// lengths uniform in [40, 60] m, azimuth deltas uniform in
    /// [-pi/4, pi/4] and elevation deltas in [-pi/6, pi/6] with the
    /// cumulative elevation clamped to [-pi/3, pi/3].
    pub fn generate_random(seed: u64, n_waypoints: usize) -> Result<Self> {
        if n_waypoints < 2 {
            return Err(Error::Config("path needs at least 2 waypoints".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut azimuth = rng.random_range(-PI..PI);
        let mut elevation = rng.random_range(-PI / 12.0..PI / 12.0);
        let mut waypoints = vec![Vector3::zeros()];
        for i in 1..n_waypoints {
            if i > 1 {
                azimuth = wrap_angle(azimuth + rng.random_range(-PI / 4.0..PI / 4.0));
                elevation = (elevation + rng.random_range(-PI / 6.0..PI / 6.0))
                    .clamp(-PI / 3.0, PI / 3.0);
            }
            let length = rng.random_range(40.0..60.0);
            let prev = waypoints[i - 1];
            waypoints.push(Vector3::new(
                prev.x + length * azimuth.cos() * elevation.cos(),
                prev.y + length * azimuth.sin() * elevation.cos(),
                prev.z - length * elevation.sin(),
            ));
        }
        Self::from_waypoints(waypoints)
    }

    /// The fixed test path shipped with the crate, used so evaluation
    /// simulations are identical across runs.
    pub fn default_test_path() -> Self {
        Self::parse_csv(include_str!("../data/test_path.csv"))
            .expect("shipped test path must parse")
    }

    /// Load waypoints from a CSV file with header `x,y,z`.
    pub fn from_csv(path: &FsPath) -> Result<Self> {
        Self::parse_csv(&std::fs::read_to_string(path)?)
    }

    fn parse_csv(text: &str) -> Result<Self> {
        let mut waypoints = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if lineno == 0 {
                if line != "x,y,z" {
                    return Err(Error::Config(format!(
                        "path file must start with header `x,y,z`, got `{line}`"
                    )));
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Config(format!(
                    "path file line {}: expected 3 fields",
                    lineno + 1
                )));
            }
            let mut coords = [0.0; 3];
            for (i, field) in fields.iter().enumerate() {
                coords[i] = field.trim().parse().map_err(|_| {
                    Error::Config(format!("path file line {}: bad number", lineno + 1))
                })?;
            }
            waypoints.push(Vector3::new(coords[0], coords[1], coords[2]));
        }
        Self::from_waypoints(waypoints)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,z\n");
        for wp in &self.waypoints {
            out.push_str(&format!("{:.9},{:.9},{:.9}\n", wp.x, wp.y, wp.z));
        }
        out
    }

    pub fn waypoints(&self) -> &[Vector3<f64>] {
        &self.waypoints
    }

    pub fn segment_count(&self) -> usize {
        self.lengths.len()
    }

    pub fn segment_azimuth(&self, segment: usize) -> f64 {
        self.azimuths[segment]
    }

    pub fn segment_elevation(&self, segment: usize) -> f64 {
        self.elevations[segment]
    }

    pub fn segment_length(&self, segment: usize) -> f64 {
        self.lengths[segment]
    }

    fn segment_tangent(&self, segment: usize) -> Vector3<f64> {
        (self.waypoints[segment + 1] - self.waypoints[segment]) / self.lengths[segment]
    }

    /// Tracking errors relative to the active segment. The closest point
    /// is the projection onto the segment with the along-track coordinate
    /// clamped to [0, length].
    pub fn tracking_errors(&self, position: &Vector3<f64>, segment: usize) -> TrackingError {
        let origin = self.waypoints[segment];
        let tangent = self.segment_tangent(segment);
        let s = (position - origin).dot(&tangent).clamp(0.0, self.lengths[segment]);
        let closest = origin + s * tangent;

        // Path-frame rotation: the body->NED matrix evaluated at
        // (0, upsilon_p, chi_p) maps path coordinates to NED, so its
        // transpose takes the NED offset into the path frame.
        let rot = rotation_body_to_ned(&EulerAngles {
            phi: 0.0,
            theta: self.elevations[segment],
            psi: self.azimuths[segment],
        });
        let eps = rot.transpose() * (position - closest);
        TrackingError {
            s,
            e: eps.y,
            h: eps.z,
            segment_index: segment,
        }
    }

    /// Advance the active segment when the vehicle enters the acceptance
    /// sphere of the next waypoint or runs past the segment end. Returns
    /// the updated index and whether the final waypoint was reached.
    pub fn maybe_switch_waypoint(
        &self,
        position: &Vector3<f64>,
        segment: usize,
    ) -> (usize, bool) {
        let mut segment = segment;
        loop {
            let next_wp = self.waypoints[segment + 1];
            let within_sphere = (position - next_wp).norm() <= ACCEPTANCE_RADIUS;
            let past_end = self.tracking_errors(position, segment).s
                >= self.lengths[segment] - 1e-12;
            if !(within_sphere || past_end) {
                return (segment, false);
            }
            if segment + 1 == self.segment_count() {
                return (segment, true);
            }
            segment += 1;
        }
    }
}

/// Desired course and elevation from the look-ahead steering law:
/// chi_d = chi_p + atan(-e / delta),
/// upsilon_d = upsilon_p + atan(h / sqrt(e^2 + delta^2)).
pub fn desired_angles(path: &Path, tracking: &TrackingError, lookahead: f64) -> (f64, f64) {
    let chi_p = path.segment_azimuth(tracking.segment_index);
    let ups_p = path.segment_elevation(tracking.segment_index);
    let chi_r = (-tracking.e / lookahead).atan();
    let ups_r = (tracking.h / (tracking.e * tracking.e + lookahead * lookahead).sqrt()).atan();
    (wrap_angle(chi_p + chi_r), wrap_angle(ups_p + ups_r))
}

/// Course and elevation of a NED velocity vector. Below `min_speed` the
/// direction is undefined and the previous value is held.
pub fn course_elevation_of_velocity(
    velocity_ned: &Vector3<f64>,
    previous: (f64, f64),
) -> (f64, f64) {
    let speed = velocity_ned.norm();
    if speed <= 1e-6 {
        return previous;
    }
    let course = velocity_ned.y.atan2(velocity_ned.x);
    let elevation = (-velocity_ned.z / speed).asin();
    (course, elevation)
}
