//! Discrete-time closed-loop simulation of the six axes.
//!
//! Each axis is a damped, saturated double integrator driven by an
//! acceleration command. The two sliders (slider 1 at `a`, slider 2 at
//! `a + b`) run segmented PID on their position error; the revolute joints
//! add a feedforward term that inverts the discrete plant along the
//! reference.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{full_fk, KinematicsError};
use crate::model::{AxisPlant, ConfigError, ControllerConfig, JointState, PidGains, PlantParams, StructuralParams};
use crate::motion::JointTrajectory;

pub const AXIS_NAMES: [&str; 6] = ["slider1", "slider2", "theta1", "theta2", "theta3", "theta4"];
pub const TRACKING_LOG_HEADER: &str = "t_s,axis,target,actual,command";

#[derive(Debug, Error)]
pub enum SimError {
    #[error("plan is empty")]
    EmptyPlan,
    #[error("log is empty")]
    EmptyLog,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("plant diverged at tick {tick} on axis {axis}")]
    Divergence { tick: usize, axis: &'static str },
    #[error("tick {tick}: {source}")]
    Kinematics {
        tick: usize,
        #[source]
        source: KinematicsError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// One simulated axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub position: f64,
    pub velocity: f64,
    pub limits: AxisPlant,
}

impl PlantState {
    pub fn at_rest(position: f64, limits: AxisPlant) -> Self {
        PlantState {
            position,
            velocity: 0.0,
            limits,
        }
    }
}

/// Semi-implicit Euler step: the clamped velocity is integrated into the
/// position.
pub fn plant_step(state: PlantState, command: f64, dt: f64) -> PlantState {
    let AxisPlant { v_max, a_max, damping } = state.limits;
    let accel = (command - damping * state.velocity).clamp(-a_max, a_max);
    let velocity = (state.velocity + accel * dt).clamp(-v_max, v_max);
    PlantState {
        position: state.position + velocity * dt,
        velocity,
        limits: state.limits,
    }
}

/// Index of the gain set for `|error|`. A value equal to a bound belongs to
/// the lower band and errors past the last bound use the last band.
pub fn segment_index(error: f64, bounds: &[f64]) -> usize {
    let e = error.abs();
    bounds
        .iter()
        .position(|&b| e <= b)
        .unwrap_or(bounds.len().saturating_sub(1))
}

/// Integrator and previous error of one PID loop.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: f64,
}

/// PID with the integral clamped so that `|ki * integral| <= windup_limit`.
pub fn pid_step(error: f64, state: PidState, gains: &PidGains, windup_limit: f64, dt: f64) -> (f64, PidState) {
    let mut integral = state.integral + error * dt;
    if gains.ki != 0.0 {
        let bound = windup_limit / gains.ki.abs();
        integral = integral.clamp(-bound, bound);
    }
    let command = gains.kp * error + gains.ki * integral + gains.kd * (error - state.prev_error) / dt;
    (
        command,
        PidState {
            integral,
            prev_error: error,
        },
    )
}

/// PID whose gains are picked by `|error|` against the segment bounds. The
/// integrator carries over unchanged when the band switches.
pub fn segmented_pid_step(error: f64, state: PidState, cfg: &ControllerConfig, dt: f64) -> (f64, PidState) {
    let gains = &cfg.gains[segment_index(error, &cfg.segment_bounds)];
    pid_step(error, state, gains, cfg.windup_limit, dt)
}

/// Knobs of [`run_tracking_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingOptions {
    /// Extra simulated time after the plan ends, s.
    pub tail: f64,
    /// Error band for the settling time, mm.
    pub settle_band: f64,
}

impl Default for TrackingOptions {
    fn default() -> Self {
        TrackingOptions {
            tail: 0.5,
            settle_band: 0.1,
        }
    }
}

/// Everything logged for one control tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickRecord {
    pub t: f64,
    /// Axis targets `[slider1, slider2, θ1..θ4]`.
    pub target: [f64; 6],
    pub actual: [f64; 6],
    pub command: [f64; 6],
    pub target_tcp: Vector3<f64>,
    pub actual_tcp: Vector3<f64>,
}

impl TickRecord {
    pub fn error(&self) -> f64 {
        (self.target_tcp - self.actual_tcp).norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingReport {
    pub log: Vec<TickRecord>,
    pub rmse: f64,
    pub max_error: f64,
    /// First time after which the tool error stays inside the band; `None`
    /// when the last tick is still outside.
    pub settling_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingSummary {
    pub rmse_mm: f64,
    pub max_error_mm: f64,
    pub settling_time_s: Option<f64>,
    pub ticks: usize,
}

impl TrackingReport {
    pub fn summary(&self) -> TrackingSummary {
        TrackingSummary {
            rmse_mm: self.rmse,
            max_error_mm: self.max_error,
            settling_time_s: self.settling_time,
            ticks: self.log.len(),
        }
    }

    pub fn write_log<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "{TRACKING_LOG_HEADER}")?;
        for rec in &self.log {
            for (axis, name) in AXIS_NAMES.iter().enumerate() {
                writeln!(
                    out,
                    "{:?},{},{:?},{:?},{:?}",
                    rec.t, name, rec.target[axis], rec.actual[axis], rec.command[axis]
                )?;
            }
        }
        Ok(())
    }

    pub fn export_log(&self, destination: &Path) -> Result<(), SimError> {
        let io_err = |source| SimError::Io {
            path: destination.to_path_buf(),
            source,
        };
        let mut out = BufWriter::new(File::create(destination).map_err(io_err)?);
        self.write_log(&mut out).map_err(io_err)?;
        out.flush().map_err(io_err)
    }
}

/// Root-mean-square distance over `(target, actual)` pairs.
pub fn compute_rmse(pairs: &[(Vector3<f64>, Vector3<f64>)]) -> Result<f64, SimError> {
    if pairs.is_empty() {
        return Err(SimError::EmptyLog);
    }
    let sum: f64 = pairs.iter().map(|(t, a)| (t - a).norm_squared()).sum();
    Ok((sum / pairs.len() as f64).sqrt())
}

/// Plant axes from a joint state.
pub fn axes_of(q: &JointState) -> [f64; 6] {
    [q.a, q.a + q.b, q.theta[0], q.theta[1], q.theta[2], q.theta[3]]
}

/// Joint state from plant axes.
pub fn state_of(axes: &[f64; 6]) -> JointState {
    JointState::new(axes[0], axes[1] - axes[0], [axes[2], axes[3], axes[4], axes[5]])
}

/// [`run_tracking_with`] using the default tail and settling band.
pub fn run_tracking(
    plan: &JointTrajectory,
    cfg: &ControllerConfig,
    plant: &PlantParams,
    p: &StructuralParams,
) -> Result<TrackingReport, SimError> {
    run_tracking_with(plan, cfg, plant, p, &TrackingOptions::default())
}

/// Runs the control loop at `cfg.loop_rate` from the plan's first state at
/// rest until `options.tail` after the plan ends. The reference is the plan
/// interpolated linearly in time and held after its last point.
pub fn run_tracking_with(
    plan: &JointTrajectory,
    cfg: &ControllerConfig,
    plant: &PlantParams,
    p: &StructuralParams,
    options: &TrackingOptions,
) -> Result<TrackingReport, SimError> {
    cfg.validate()?;
    plant.validate()?;
    let (first, last) = match (plan.points.first(), plan.points.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(SimError::EmptyPlan),
    };
    let dt = cfg.dt();
    let t0 = first.t;
    let horizon = last.t - t0 + options.tail.max(0.0);
    let ticks = (horizon / dt + 1e-9).floor() as usize + 1;

    let reference = |k: isize| -> [f64; 6] {
        let t = t0 + k.max(0) as f64 * dt;
        axes_of(&plan.state_at(t).expect("plan is non-empty"))
    };
    let limits = |axis: usize| if axis < 2 { plant.slider } else { plant.joint };

    let start = reference(0);
    let mut axes: Vec<PlantState> = (0..6).map(|i| PlantState::at_rest(start[i], limits(i))).collect();
    let mut pids = [PidState::default(); 6];
    let mut log = Vec::with_capacity(ticks);

    let (mut r_prev, mut r_now) = (reference(-1), reference(0));
    for tick in 0..ticks {
        let r_next = reference(tick as isize + 1);
        let mut target = [0.0; 6];
        let mut actual = [0.0; 6];
        let mut command = [0.0; 6];
        for axis in 0..6 {
            let state = axes[axis];
            if !(state.position.is_finite() && state.velocity.is_finite()) {
                return Err(SimError::Divergence {
                    tick,
                    axis: AXIS_NAMES[axis],
                });
            }
            let error = r_now[axis] - state.position;
            let (u, pid) = if axis < 2 {
                segmented_pid_step(error, pids[axis], cfg, dt)
            } else {
                let (fb, pid) = pid_step(error, pids[axis], &cfg.joint_gains, cfg.windup_limit, dt);
                let accel = (r_next[axis] - 2.0 * r_now[axis] + r_prev[axis]) / (dt * dt);
                let velocity = (r_now[axis] - r_prev[axis]) / dt;
                (fb + accel + state.limits.damping * velocity, pid)
            };
            pids[axis] = pid;
            target[axis] = r_now[axis];
            actual[axis] = state.position;
            command[axis] = u;
        }
        let target_tcp = full_fk(&state_of(&target), p)
            .map_err(|source| SimError::Kinematics { tick, source })?
            .translation;
        let actual_tcp = full_fk(&state_of(&actual), p)
            .map_err(|source| SimError::Kinematics { tick, source })?
            .translation;
        log.push(TickRecord {
            t: tick as f64 * dt,
            target,
            actual,
            command,
            target_tcp,
            actual_tcp,
        });
        for axis in 0..6 {
            axes[axis] = plant_step(axes[axis], command[axis], dt);
        }
        (r_prev, r_now) = (r_now, r_next);
    }

    let pairs: Vec<_> = log.iter().map(|r| (r.target_tcp, r.actual_tcp)).collect();
    let rmse = compute_rmse(&pairs)?;
    let max_error = log.iter().map(TickRecord::error).fold(0.0, f64::max);
    let settling_time = match log.iter().rposition(|r| r.error() > options.settle_band) {
        None => Some(0.0),
        Some(i) if i + 1 < log.len() => Some(log[i + 1].t),
        Some(_) => None,
    };
    Ok(TrackingReport {
        log,
        rmse,
        max_error,
        settling_time,
    })
}
