//! Straight-line Cartesian paths and their time parameterization.

use crate::ik::{branch_of, default_weights, IkCandidate, Sweep};
use crate::model::{JointState, ProfileLimits, ScurveClasses, StructuralParams, TargetSpec};

use super::scurve::ScurvePlan;
use super::{axis_velocity_limits, paced_times, solve_near, JointTrajectory, MotionError, TrajectoryPoint};

/// Knobs for [`interpolate_line`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineOptions {
    /// State the arm is in before the first waypoint. Without it the first
    /// waypoint sits mid-way along its feasible slider range.
    pub seed: Option<JointState>,
    pub weights: Option<[f64; 6]>,
    pub sweep: Sweep,
    /// Path-speed profile used to time the waypoints, mm.
    pub limits: ProfileLimits,
    /// Smallest spacing between waypoint timestamps, s.
    pub min_dt: f64,
}

impl Default for LineOptions {
    fn default() -> Self {
        LineOptions {
            seed: None,
            weights: None,
            sweep: Sweep::default(),
            limits: ScurveClasses::default().slider,
            min_dt: 1.0 / 60.0,
        }
    }
}

/// `n_points` waypoints evenly spaced from `start` to `end`, each solved
/// nearest to its predecessor, with the wrist angles interpolated.
pub fn interpolate_line(
    start: &TargetSpec,
    end: &TargetSpec,
    n_points: usize,
    p: &StructuralParams,
    options: &LineOptions,
) -> Result<JointTrajectory, MotionError> {
    if n_points < 2 {
        return Err(MotionError::InvalidInput(format!("need at least 2 points, got {n_points}")));
    }
    if !(options.min_dt.is_finite() && options.min_dt > 0.0) {
        return Err(MotionError::InvalidInput(format!("min_dt must be positive, got {}", options.min_dt)));
    }
    let weights = options.weights.unwrap_or_else(|| default_weights(p));
    let length = (end.position - start.position).norm();
    let profile = ScurvePlan::new(length, &options.limits)?;

    let mut states = Vec::with_capacity(n_points);
    let mut arc = Vec::with_capacity(n_points);
    let mut prev = None;
    for index in 0..n_points {
        let s = index as f64 / (n_points - 1) as f64;
        let target = TargetSpec {
            position: start.position + (end.position - start.position) * s,
            theta3: start.theta3 + (end.theta3 - start.theta3) * s,
            theta4: start.theta4 + (end.theta4 - start.theta4) * s,
            frame: start.frame,
        };
        let seed = match (&prev, options.seed) {
            (Some(c), _) => Some(*c),
            (None, Some(q)) => Some(seed_candidate(q, p)),
            (None, None) => None,
        };
        let chosen = solve_near(&target, seed.as_ref(), options.sweep, &weights, p)
            .map_err(|reason| MotionError::WaypointUnreachable { index, reason })?;
        states.push(chosen.state);
        arc.push(length * s);
        prev = Some(chosen);
    }

    let profile_times: Vec<f64> = arc.iter().map(|&s| time_at_distance(&profile, s)).collect();
    let paced = paced_times(&states, options.min_dt, p);
    let mut times = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let t = if i == 0 {
            0.0
        } else {
            let gap = paced[i] - paced[i - 1];
            (profile_times[i] - profile_times[i - 1]).max(gap) + times[i - 1]
        };
        times.push(t);
    }
    Ok(JointTrajectory::from_states(times.into_iter().zip(states), p)?)
}

fn seed_candidate(q: JointState, p: &StructuralParams) -> IkCandidate {
    IkCandidate {
        state: q,
        branch: branch_of(&q, p),
        position_error: 0.0,
    }
}

/// First time the profile covers `s`, by bisection.
fn time_at_distance(profile: &ScurvePlan, s: f64) -> f64 {
    let total = profile.distance().abs();
    if s <= 0.0 || total == 0.0 {
        return 0.0;
    }
    if s >= total {
        return profile.duration();
    }
    let (mut lo, mut hi) = (0.0, profile.duration());
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if profile.eval(mid).0.abs() < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Dense trajectory through `waypoints` sampled every `dt`.
///
/// Each segment gets a length that is the larger of its tool travel and its
/// joint travel rescaled so that moving at `limits.v_max` keeps every axis
/// under its own velocity limit. One S-curve runs over the summed length and
/// joints are interpolated linearly inside each segment.
pub fn time_parameterize(
    waypoints: &[JointState],
    limits: &ProfileLimits,
    dt: f64,
    p: &StructuralParams,
) -> Result<JointTrajectory, MotionError> {
    let Some(first) = waypoints.first() else {
        return Err(MotionError::InvalidInput("no waypoints".into()));
    };
    let axis_limits = axis_velocity_limits(p);
    let tcps = waypoints
        .iter()
        .map(|q| TrajectoryPoint::new(0.0, *q, p).map(|pt| pt.tcp.translation))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cumulative = vec![0.0];
    for (i, w) in waypoints.windows(2).enumerate() {
        let (x, y) = (w[0].to_array(), w[1].to_array());
        let joint = (0..6)
            .map(|k| (y[k] - x[k]).abs() * limits.v_max / axis_limits[k])
            .fold(0.0, f64::max);
        let seg = (tcps[i + 1] - tcps[i]).norm().max(joint);
        cumulative.push(cumulative[i] + seg);
    }
    let total = *cumulative.last().unwrap();
    let samples = ScurvePlan::new(total, limits)?.sample(dt)?;

    let mut points = Vec::with_capacity(samples.len());
    for sample in samples {
        let s = sample.position.clamp(0.0, total);
        let q = if total == 0.0 {
            *first
        } else {
            let seg = cumulative
                .partition_point(|&c| c <= s)
                .clamp(1, waypoints.len() - 1);
            let (c0, c1) = (cumulative[seg - 1], cumulative[seg]);
            let frac = if c1 > c0 { (s - c0) / (c1 - c0) } else { 1.0 };
            waypoints[seg - 1].lerp(&waypoints[seg], frac)
        };
        points.push(TrajectoryPoint::new(sample.t, q, p)?);
    }
    Ok(JointTrajectory::new(points))
}
