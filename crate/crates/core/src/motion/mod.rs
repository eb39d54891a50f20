//! Trajectories and planners: straight-line interpolation, jerk-limited
//! timing, pose hold on a moving base, ducking under obstacles and
//! reorientation about a fixed point.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ik::{middle_candidate, select_solution, solve_at, solve_full, IkCandidate, Sweep};
use crate::kinematics::{full_fk, KinematicsError};
use crate::model::{JointState, Pose, StructuralParams, TargetSpec};

mod line;
mod maneuvers;
pub mod scurve;

pub use line::{interpolate_line, time_parameterize, LineOptions};
pub use maneuvers::{
    plan_duck_under, plan_pose_hold, plan_reorient, DuckOptions, DuckPlan, HoldLimit, PoseHoldPlan,
    ReorientOptions,
};
pub use scurve::{scurve_profile, ProfileSample, ScurvePlan};

pub const TRAJECTORY_HEADER: &str = "t_s,a_mm,b_mm,theta1,theta2,theta3,theta4,x_mm,y_mm,z_mm";

/// Slack allowed on per-step velocity checks.
pub const VELOCITY_SLACK: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum MotionError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("waypoint {index} unreachable ({reason})")]
    WaypointUnreachable { index: usize, reason: String },
    #[error("reorientation step {step} unreachable ({reason})")]
    StepUnreachable { step: usize, reason: String },
    #[error("infeasible: {reason} (minimum achievable body height {min_height} mm)")]
    InfeasibleClearance { reason: String, min_height: f64 },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: malformed trajectory row {row}: {reason}")]
    Malformed { path: PathBuf, row: usize, reason: String },
}

impl MotionError {
    /// True for errors caused by the arm being unable to do what was asked,
    /// as opposed to malformed input.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            MotionError::WaypointUnreachable { .. }
                | MotionError::StepUnreachable { .. }
                | MotionError::InfeasibleClearance { .. }
                | MotionError::Infeasible(_)
                | MotionError::Kinematics(_)
        )
    }
}

/// Timestamped joint state with the tool pose it produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub q: JointState,
    pub tcp: Pose,
}

impl TrajectoryPoint {
    pub fn new(t: f64, q: JointState, p: &StructuralParams) -> Result<Self, KinematicsError> {
        Ok(TrajectoryPoint {
            t,
            q,
            tcp: full_fk(&q, p)?,
        })
    }
}

/// A broken trajectory invariant, reported by [`JointTrajectory::check`].
#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryViolation {
    NonIncreasingTime { index: usize },
    PoseMismatch { index: usize, error: f64 },
    Velocity { index: usize, axis: usize, rate: f64, limit: f64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct JointTrajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl JointTrajectory {
    pub fn new(points: Vec<TrajectoryPoint>) -> Self {
        JointTrajectory { points }
    }

    pub fn from_states(
        samples: impl IntoIterator<Item = (f64, JointState)>,
        p: &StructuralParams,
    ) -> Result<Self, KinematicsError> {
        let points = samples
            .into_iter()
            .map(|(t, q)| TrajectoryPoint::new(t, q, p))
            .collect::<Result<_, _>>()?;
        Ok(JointTrajectory { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn duration(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    pub fn states(&self) -> impl Iterator<Item = &JointState> {
        self.points.iter().map(|pt| &pt.q)
    }

    /// Joint state at time `t`, linear between samples and held outside.
    pub fn state_at(&self, t: f64) -> Option<JointState> {
        let first = self.points.first()?;
        let last = self.points.last()?;
        if t <= first.t {
            return Some(first.q);
        }
        if t >= last.t {
            return Some(last.q);
        }
        let idx = self.points.partition_point(|pt| pt.t <= t);
        let (lo, hi) = (&self.points[idx - 1], &self.points[idx]);
        let s = (t - lo.t) / (hi.t - lo.t);
        Some(lo.q.lerp(&hi.q, s))
    }

    /// Checks time ordering, pose consistency (1e-9) and per-step velocity
    /// limits (with [`VELOCITY_SLACK`]).
    pub fn check(&self, p: &StructuralParams) -> Result<(), TrajectoryViolation> {
        for (index, pt) in self.points.iter().enumerate() {
            let fk = full_fk(&pt.q, p).map_err(|_| TrajectoryViolation::PoseMismatch {
                index,
                error: f64::INFINITY,
            })?;
            let error = (fk.translation - pt.tcp.translation)
                .abs()
                .max()
                .max((fk.rotation - pt.tcp.rotation).abs().max());
            if error.is_nan() || error > 1e-9 {
                return Err(TrajectoryViolation::PoseMismatch { index, error });
            }
        }
        let limits = axis_velocity_limits(p);
        for (i, w) in self.points.windows(2).enumerate() {
            let index = i + 1;
            let dt = w[1].t - w[0].t;
            if dt.is_nan() || dt <= 0.0 {
                return Err(TrajectoryViolation::NonIncreasingTime { index });
            }
            let (x, y) = (w[0].q.to_array(), w[1].q.to_array());
            for axis in 0..6 {
                let delta = (y[axis] - x[axis]).abs();
                if delta > limits[axis] * dt + VELOCITY_SLACK {
                    return Err(TrajectoryViolation::Velocity {
                        index,
                        axis,
                        rate: delta / dt,
                        limit: limits[axis],
                    });
                }
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "{TRAJECTORY_HEADER}")?;
        for pt in &self.points {
            let q = &pt.q;
            let t = &pt.tcp.translation;
            writeln!(
                out,
                "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                pt.t, q.a, q.b, q.theta[0], q.theta[1], q.theta[2], q.theta[3], t.x, t.y, t.z
            )?;
        }
        Ok(())
    }

    pub fn export(&self, destination: &Path) -> Result<(), MotionError> {
        let io_err = |source| MotionError::Io {
            path: destination.to_path_buf(),
            source,
        };
        let mut out = BufWriter::new(File::create(destination).map_err(io_err)?);
        self.write_csv(&mut out).map_err(io_err)?;
        out.flush().map_err(io_err)
    }

    /// Reads a trajectory CSV; tool poses are recomputed from the joint
    /// columns.
    pub fn import(source: &Path, p: &StructuralParams) -> Result<Self, MotionError> {
        let malformed = |row: usize, reason: String| MotionError::Malformed {
            path: source.to_path_buf(),
            row,
            reason,
        };
        let mut reader = csv::Reader::from_path(source).map_err(|e| malformed(0, e.to_string()))?;
        let mut points = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| malformed(i + 1, e.to_string()))?;
            if record.len() < 7 {
                return Err(malformed(i + 1, format!("expected at least 7 fields, found {}", record.len())));
            }
            let mut v = [0.0; 7];
            for (slot, field) in v.iter_mut().zip(record.iter()) {
                *slot = field
                    .trim()
                    .parse()
                    .map_err(|e| malformed(i + 1, format!("{field:?}: {e}")))?;
            }
            let q = JointState::new(v[1], v[2], [v[3], v[4], v[5], v[6]]);
            points.push(TrajectoryPoint::new(v[0], q, p).map_err(|e| malformed(i + 1, e.to_string()))?);
        }
        Ok(JointTrajectory { points })
    }
}

/// Velocity bound of each axis `[a, b, θ1..θ4]`.
pub fn axis_velocity_limits(p: &StructuralParams) -> [f64; 6] {
    [
        p.v_max_slider,
        p.v_max_slider,
        p.v_max_joint,
        p.v_max_joint,
        p.v_max_joint,
        p.v_max_joint,
    ]
}

/// Assigns times to a sequence of states: at least `min_dt` apart and slow
/// enough that no axis exceeds its velocity limit.
pub(crate) fn paced_times(states: &[JointState], min_dt: f64, p: &StructuralParams) -> Vec<f64> {
    let limits = axis_velocity_limits(p);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(states.len());
    for (i, q) in states.iter().enumerate() {
        if i > 0 {
            let (x, y) = (states[i - 1].to_array(), q.to_array());
            let needed = (0..6)
                .map(|k| (y[k] - x[k]).abs() / limits[k])
                .fold(min_dt, f64::max);
            t += needed;
        }
        out.push(t);
    }
    out
}

/// Solves `target` and keeps the candidate nearest to `prev`. The sweep
/// prefers the previous branch and is topped up with the solutions at the
/// previous slider position, so a continuing path can stay put on the rail.
/// Without a previous state the middle of the feasible slider range is used.
pub(crate) fn solve_near(
    target: &TargetSpec,
    prev: Option<&IkCandidate>,
    sweep: Sweep,
    weights: &[f64; 6],
    p: &StructuralParams,
) -> Result<IkCandidate, String> {
    let sweep = match prev {
        Some(c) => sweep.preferring(c.branch),
        None => sweep,
    };
    let mut found = solve_full(target, p, sweep).map_err(|e| e.to_string())?;
    if let Some(c) = prev {
        if let Ok(extra) = solve_at(target, c.state.a, p) {
            found.candidates.extend(extra);
        }
    }
    if found.candidates.is_empty() {
        return Err(found.failure_summary());
    }
    match prev {
        Some(c) => select_solution(&found.candidates, &c.state, weights).map_err(|e| e.to_string()),
        None => middle_candidate(&found.candidates).map_err(|e| e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_and_check() {
        let p = StructuralParams::default();
        let q0 = JointState::new(100.0, 200.0, [0.1, 0.2, 0.3, 0.4]);
        let q1 = JointState::new(101.0, 200.0, [0.1, 0.2, 0.3, 0.4]);
        let traj = JointTrajectory::from_states([(0.0, q0), (0.1, q1)], &p).unwrap();
        assert!(traj.check(&p).is_ok());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        traj.export(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), TRAJECTORY_HEADER);
        let back = JointTrajectory::import(&path, &p).unwrap();
        assert_eq!(back, traj);
    }

    #[test]
    fn check_catches_violations() {
        let p = StructuralParams::default();
        let q0 = JointState::new(100.0, 200.0, [0.0; 4]);
        let fast = JointState::new(400.0, 200.0, [0.0; 4]);
        let traj = JointTrajectory::from_states([(0.0, q0), (0.1, fast)], &p).unwrap();
        assert!(matches!(traj.check(&p), Err(TrajectoryViolation::Velocity { axis: 0, .. })));
        let traj = JointTrajectory::from_states([(0.0, q0), (0.0, q0)], &p).unwrap();
        assert!(matches!(traj.check(&p), Err(TrajectoryViolation::NonIncreasingTime { index: 1 })));
        let mut traj = JointTrajectory::from_states([(0.0, q0)], &p).unwrap();
        traj.points[0].tcp.translation.x += 1e-6;
        assert!(matches!(traj.check(&p), Err(TrajectoryViolation::PoseMismatch { .. })));
    }

    #[test]
    fn state_at_interpolates_and_holds() {
        let p = StructuralParams::default();
        let q0 = JointState::new(100.0, 200.0, [0.0; 4]);
        let q1 = JointState::new(110.0, 200.0, [0.0; 4]);
        let traj = JointTrajectory::from_states([(1.0, q0), (2.0, q1)], &p).unwrap();
        assert_eq!(traj.state_at(0.0).unwrap().a, 100.0);
        assert_eq!(traj.state_at(1.5).unwrap().a, 105.0);
        assert_eq!(traj.state_at(9.0).unwrap().a, 110.0);
        assert!(JointTrajectory::default().state_at(0.0).is_none());
    }

    #[test]
    fn paced_times_respect_limits() {
        let p = StructuralParams::default();
        let states = [
            JointState::new(0.0, 100.0, [0.0; 4]),
            JointState::new(1500.0 * 0.5, 100.0, [0.0; 4]),
            JointState::new(750.0, 100.0, [0.0; 4]),
        ];
        let t = paced_times(&states, 0.01, &p);
        assert_eq!(t, vec![0.0, 0.5, 0.51]);
    }
}
