//! Whole-body maneuvers: holding the tool still on a moving base, splitting
//! the sliders to pass under an obstacle, and turning the wrist about a
//! fixed tool point.

use std::fmt;
use std::ops::Range;

use nalgebra::Vector3;

use crate::ik::{branch_of, default_weights, IkCandidate, Sweep, RESIDUAL_TOLERANCE};
use crate::kinematics::{body_height, full_fk, separation_for_body_height};
use crate::model::{validate_state, JointState, ProfileLimits, ScurveClasses, StructuralParams, TargetSpec};

use super::scurve::ScurvePlan;
use super::{paced_times, solve_near, JointTrajectory, MotionError, TrajectoryPoint};

/// What ended a pose-hold window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoldLimit {
    /// The requested duration elapsed.
    Duration,
    SliderMin,
    SliderMax,
    Rail,
}

impl fmt::Display for HoldLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HoldLimit::Duration => "duration",
            HoldLimit::SliderMin => "a_min",
            HoldLimit::SliderMax => "a_max",
            HoldLimit::Rail => "rail length",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseHoldPlan {
    /// Arm-frame states; empty when the window has zero length.
    pub trajectory: JointTrajectory,
    pub t_end: f64,
    pub limit: HoldLimit,
}

/// Keeps the world-frame tool pose fixed while the whole arm rides a base
/// moving at `base_velocity` mm/s along the rail axis.
///
/// The tool pose only translates along x when slider 1 alone moves, and it
/// is the only motion that does so while keeping the orientation: the
/// rotation fixes θ1 + θ2, θ3 and θ4, the held y then fixes θ1, and the held
/// z fixes b. The counter-motion is therefore `a(t) = a0 − v t` and the
/// window closes when slider 1 runs out of travel.
pub fn plan_pose_hold(
    initial: &JointState,
    base_velocity: f64,
    duration: f64,
    dt: f64,
    p: &StructuralParams,
) -> Result<PoseHoldPlan, MotionError> {
    let verdict = validate_state(initial, p);
    if !verdict.is_valid() {
        return Err(MotionError::InvalidState(format!("{:?}", verdict.violations)));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(MotionError::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    if !(duration.is_finite() && duration >= 0.0) || !base_velocity.is_finite() {
        return Err(MotionError::InvalidInput(format!(
            "duration {duration} and base velocity {base_velocity} must be finite, duration non-negative"
        )));
    }
    if base_velocity.abs() > p.v_max_slider {
        return Err(MotionError::Infeasible(format!(
            "base speed {} mm/s exceeds slider speed limit {} mm/s",
            base_velocity.abs(),
            p.v_max_slider
        )));
    }

    let (mut t_end, mut limit) = (duration, HoldLimit::Duration);
    if base_velocity > 0.0 {
        let t = (initial.a - p.a_min) / base_velocity;
        if t < t_end {
            (t_end, limit) = (t, HoldLimit::SliderMin);
        }
    } else if base_velocity < 0.0 {
        let speed = -base_velocity;
        let to_max = (p.a_max - initial.a) / speed;
        let to_rail = (p.rail_length - p.carriage_allowance - initial.b - initial.a) / speed;
        if to_max < t_end {
            (t_end, limit) = (to_max, HoldLimit::SliderMax);
        }
        if to_rail < t_end {
            (t_end, limit) = (to_rail, HoldLimit::Rail);
        }
    }
    let t_end = t_end.max(0.0);
    if t_end == 0.0 {
        return Ok(PoseHoldPlan {
            trajectory: JointTrajectory::default(),
            t_end,
            limit,
        });
    }

    let mut times: Vec<f64> = (0..)
        .map(|k| k as f64 * dt)
        .take_while(|&t| t <= t_end + 1e-12)
        .collect();
    let last = *times.last().unwrap();
    if t_end - last > 1e-9 {
        times.push(t_end);
    } else if let Some(l) = times.last_mut() {
        *l = l.min(t_end);
    }
    let trajectory = JointTrajectory::from_states(
        times.into_iter().map(|t| {
            let mut q = *initial;
            q.a = initial.a - base_velocity * t;
            (t, q)
        }),
        p,
    )?;
    Ok(PoseHoldPlan {
        trajectory,
        t_end,
        limit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuckOptions {
    /// Required gap between body height and clearance, mm.
    pub margin: f64,
    pub dt: f64,
    pub limits: ProfileLimits,
}

impl Default for DuckOptions {
    fn default() -> Self {
        DuckOptions {
            margin: 10.0,
            dt: 1.0 / 60.0,
            limits: ScurveClasses::default().slider,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DuckPlan {
    pub trajectory: JointTrajectory,
    /// Point index ranges of the split, traverse and rise phases.
    pub phases: [Range<usize>; 3],
    /// Separation held during the traverse.
    pub split_b: f64,
}

impl DuckPlan {
    pub fn traverse(&self) -> &[TrajectoryPoint] {
        &self.trajectory.points[self.phases[1].clone()]
    }
}

/// Split, traverse to `travel_target_a` under an obstacle at height
/// `clearance_z`, then rise back to the original separation. The serial
/// joints are held throughout.
pub fn plan_duck_under(
    current: &JointState,
    clearance_z: f64,
    travel_target_a: f64,
    p: &StructuralParams,
    options: &DuckOptions,
) -> Result<DuckPlan, MotionError> {
    let verdict = validate_state(current, p);
    if !verdict.is_valid() {
        return Err(MotionError::InvalidState(format!("{:?}", verdict.violations)));
    }
    if !(clearance_z.is_finite() && travel_target_a.is_finite() && options.margin >= 0.0) {
        return Err(MotionError::InvalidInput(format!(
            "clearance {clearance_z}, target a {travel_target_a} and margin {} must be finite",
            options.margin
        )));
    }
    let floor = p.h + p.e1 + p.stack_allowance;
    let ceiling = clearance_z - options.margin;
    if ceiling < floor {
        return Err(MotionError::InfeasibleClearance {
            reason: format!(
                "clearance {clearance_z} mm minus margin {} mm is below the lowest body height",
                options.margin
            ),
            min_height: floor,
        });
    }

    let split_b = if body_height(current, p) <= ceiling {
        current.b
    } else {
        let mut b = separation_for_body_height(ceiling, p)
            .ok_or_else(|| MotionError::InfeasibleClearance {
                reason: format!("no separation reaches body height {ceiling} mm"),
                min_height: floor,
            })?
            .min(p.split_limit());
        // Guard against rounding in the inversion.
        let mut probe = JointState { b, ..*current };
        while body_height(&probe, p) > ceiling && b < p.split_limit() {
            b = (b + 1e-9 * b.max(1.0)).min(p.split_limit());
            probe.b = b;
        }
        b.max(current.b)
    };
    if split_b > p.b_max {
        return Err(MotionError::InfeasibleClearance {
            reason: format!("required separation {split_b} mm exceeds b_max {} mm", p.b_max),
            min_height: body_height(&JointState { b: p.b_max, ..*current }, p),
        });
    }
    if travel_target_a < p.a_min || travel_target_a > p.a_max {
        return Err(MotionError::Infeasible(format!(
            "target a = {travel_target_a} mm outside [{}, {}]",
            p.a_min, p.a_max
        )));
    }
    let rail_room = p.rail_length - p.carriage_allowance;
    let furthest = current.a.max(travel_target_a);
    if furthest + split_b > rail_room {
        return Err(MotionError::Infeasible(format!(
            "split separation {split_b} mm at a = {furthest} mm overruns the rail"
        )));
    }

    let mut states = vec![(0.0, *current)];
    let mut phases: [Range<usize>; 3] = [0..0, 0..0, 0..0];
    let moves = [
        (1usize, split_b - current.b),
        (0usize, travel_target_a - current.a),
        (1usize, current.b - split_b),
    ];
    for (phase, (axis, delta)) in moves.into_iter().enumerate() {
        let start_index = states.len();
        let (t0, q0) = *states.last().unwrap();
        if delta != 0.0 {
            let samples = ScurvePlan::new(delta, &options.limits)?.sample(options.dt)?;
            for s in samples.iter().skip(1) {
                let mut q = q0;
                if axis == 0 {
                    q.a = q0.a + s.position;
                } else {
                    q.b = q0.b + s.position;
                }
                states.push((t0 + s.t, q));
            }
        }
        phases[phase] = start_index..states.len();
    }
    for (i, (_, q)) in states.iter().enumerate() {
        let verdict = validate_state(q, p);
        if !verdict.is_valid() {
            return Err(MotionError::Infeasible(format!(
                "sample {i} invalid: {:?}",
                verdict.violations
            )));
        }
    }
    Ok(DuckPlan {
        trajectory: JointTrajectory::from_states(states, p)?,
        phases,
        split_b,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReorientOptions {
    pub sweep: Sweep,
    pub weights: Option<[f64; 6]>,
    /// Smallest spacing between step timestamps, s.
    pub min_dt: f64,
}

impl Default for ReorientOptions {
    fn default() -> Self {
        ReorientOptions {
            sweep: Sweep::default(),
            weights: None,
            min_dt: 1.0 / 60.0,
        }
    }
}

/// Turns the wrist from q0's angles to the targets in `n_steps` states
/// (first one q0) while re-solving the rest of the arm so the tool point
/// stays at `about`.
pub fn plan_reorient(
    about: &Vector3<f64>,
    q0: &JointState,
    target_theta3: f64,
    target_theta4: f64,
    n_steps: usize,
    p: &StructuralParams,
    options: &ReorientOptions,
) -> Result<JointTrajectory, MotionError> {
    if n_steps < 2 {
        return Err(MotionError::InvalidInput(format!("need at least 2 steps, got {n_steps}")));
    }
    if !(options.min_dt.is_finite() && options.min_dt > 0.0) {
        return Err(MotionError::InvalidInput(format!("min_dt must be positive, got {}", options.min_dt)));
    }
    let verdict = validate_state(q0, p);
    if !verdict.is_valid() {
        return Err(MotionError::InvalidState(format!("{:?}", verdict.violations)));
    }
    let start = full_fk(q0, p)?.translation;
    let offset = (start - about).norm();
    if !(offset <= 1e-6) {
        return Err(MotionError::InvalidInput(format!(
            "initial tool point is {offset} mm away from the pivot"
        )));
    }
    let probe = TargetSpec::world(about.x, about.y, about.z, target_theta3, target_theta4);
    probe.check(p).map_err(MotionError::InvalidInput)?;

    let weights = options.weights.unwrap_or_else(|| default_weights(p));
    let (from3, from4) = (q0.theta[2], q0.theta[3]);
    let mut prev = IkCandidate {
        state: *q0,
        branch: branch_of(q0, p),
        position_error: offset,
    };
    let mut states = vec![*q0];
    for step in 1..n_steps {
        let s = step as f64 / (n_steps - 1) as f64;
        let theta3 = from3 + (target_theta3 - from3) * s;
        let theta4 = from4 + (target_theta4 - from4) * s;
        let target = TargetSpec::world(about.x, about.y, about.z, theta3, theta4);
        // Keeping everything but the wrist is the cheapest move when it works.
        let mut kept = prev.state;
        kept.theta[2] = theta3;
        kept.theta[3] = theta4;
        let kept_error = full_fk(&kept, p).map(|pose| (pose.translation - about).norm());
        prev = match kept_error {
            Ok(err) if err < RESIDUAL_TOLERANCE && validate_state(&kept, p).is_valid() => IkCandidate {
                state: kept,
                branch: prev.branch,
                position_error: err,
            },
            _ => solve_near(&target, Some(&prev), options.sweep, &weights, p)
                .map_err(|reason| MotionError::StepUnreachable { step, reason })?,
        };
        states.push(prev.state);
    }
    let times = paced_times(&states, options.min_dt, p);
    Ok(JointTrajectory::from_states(times.into_iter().zip(states), p)?)
}
