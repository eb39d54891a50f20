//! Closed-form inverse kinematics.
//!
//! The serial chain is solved in the horizontal plane of frame C as a
//! two-link problem (joint 2 link plus the wrist's in-plane offset), the
//! parallel base is solved from the required platform height, and the
//! redundancy along the rail is resolved by sweeping the slider position.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::kinematics::{distal_offset, full_fk, parallel_fk, serial_rise};
use crate::model::{validate_state, Frame, JointState, StructuralParams, TargetSpec};

/// Band within which cosines slightly outside [-1, 1] are clamped.
pub const COS_CLAMP_BAND: f64 = 1e-9;
/// Forward-kinematics residual below which a candidate is accepted, mm.
pub const RESIDUAL_TOLERANCE: f64 = 1e-6;

/// Elbow configuration of the planar two-link solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    /// Non-negative elbow angle.
    ElbowUp,
    ElbowDown,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::ElbowUp => f.write_str("elbow_up"),
            Branch::ElbowDown => f.write_str("elbow_down"),
        }
    }
}

/// Why a sweep point produced no candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IkFailure {
    ZUnreachable,
    SerialUnreachable,
    SliderLimit,
    SeparationLimit,
    RailLimit,
    JointLimit,
    Residual,
}

impl fmt::Display for IkFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IkFailure::ZUnreachable => "z unreachable",
            IkFailure::SerialUnreachable => "serial unreachable",
            IkFailure::SliderLimit => "slider limit",
            IkFailure::SeparationLimit => "separation limit",
            IkFailure::RailLimit => "rail limit",
            IkFailure::JointLimit => "joint limit",
            IkFailure::Residual => "residual",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IkError {
    #[error("invalid sweep ({start}, {end}, {step})")]
    InvalidSweep { start: f64, end: f64, step: f64 },
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("target is expressed in the base frame; convert it with TargetSpec::to_world first")]
    BaseFrameTarget,
    #[error("no solution: candidate list is empty")]
    NoSolution,
}

/// One `(θ1, θ2)` solution of the planar serial problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerialPair {
    pub theta1: f64,
    pub theta2: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkCandidate {
    pub state: JointState,
    pub branch: Branch,
    /// Distance between the forward-kinematics position and the target, mm.
    pub position_error: f64,
}

/// Slider positions visited by the redundancy sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub end: f64,
    pub step: f64,
    /// Branch kept at a sweep point when both are valid.
    pub prefer: Branch,
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep {
            start: 0.0,
            end: 800.0,
            step: 1.0,
            prefer: Branch::ElbowUp,
        }
    }
}

impl Sweep {
    pub fn new(start: f64, end: f64, step: f64) -> Self {
        Sweep {
            start,
            end,
            step,
            ..Sweep::default()
        }
    }

    pub fn preferring(self, prefer: Branch) -> Self {
        Sweep { prefer, ..self }
    }

    fn validate(&self) -> Result<(), IkError> {
        let ok = self.start.is_finite()
            && self.end.is_finite()
            && self.step.is_finite()
            && self.start < self.end
            && self.step > 0.0;
        if ok {
            Ok(())
        } else {
            Err(IkError::InvalidSweep {
                start: self.start,
                end: self.end,
                step: self.step,
            })
        }
    }

    /// Number of grid points, end inclusive.
    pub fn len(&self) -> usize {
        ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }
}

/// Candidates of a sweep plus per-reason failure counts for the sweep
/// points that produced none.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IkSolutions {
    pub candidates: Vec<IkCandidate>,
    pub failures: BTreeMap<IkFailure, usize>,
    pub sweep_points: usize,
}

impl IkSolutions {
    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Failure reasons by descending count, e.g. `"z unreachable: 801"`.
    pub fn failure_summary(&self) -> String {
        let mut entries: Vec<_> = self.failures.iter().collect();
        entries.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
        entries
            .iter()
            .map(|(reason, count)| format!("{reason}: {count}"))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Most frequent failure reason, if any sweep point failed.
    pub fn dominant_failure(&self) -> Option<IkFailure> {
        self.failures
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(r, _)| *r)
    }
}

/// Wraps an angle into (-π, π].
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

fn clamp_cos(c: f64) -> Option<f64> {
    if c.abs() > 1.0 + COS_CLAMP_BAND || c.is_nan() {
        None
    } else {
        Some(c.clamp(-1.0, 1.0))
    }
}

/// Solves `(θ1, θ2)` so the tool point lands on `(x, y)` in frame C for wrist
/// angle `theta3`. Pairs outside the θ1/θ2 limits are dropped.
///
/// The wrist contributes the in-plane offset `(d3 cosθ3 + d4 sinθ3,
/// d3 sinθ3 − d4 cosθ3)` to the second link, so the effective distal length
/// is `sqrt(d3² + d4²)` at an angular offset ψ(θ3); the elbow angle is
/// `θ2 + ψ` and the branch is its sign.
pub fn solve_serial(
    x: f64,
    y: f64,
    theta3: f64,
    p: &StructuralParams,
) -> Result<Vec<SerialPair>, IkFailure> {
    if !(x.is_finite() && y.is_finite() && theta3.is_finite()) {
        return Err(IkFailure::SerialUnreachable);
    }
    let (wx, wy) = distal_offset(theta3, p);
    let distal = wx.hypot(wy);
    let offset = wy.atan2(wx);
    let r2 = x * x + y * y;
    let r = r2.sqrt();

    let c_elbow = (r2 - p.d2 * p.d2 - distal * distal) / (2.0 * p.d2 * distal);
    let c_elbow = clamp_cos(c_elbow).ok_or(IkFailure::SerialUnreachable)?;
    let elbow = c_elbow.acos();

    let bearing = if r > 0.0 { y.atan2(x) } else { 0.0 };
    if r > 0.0 {
        // Base-triangle angle; checked in cosine form, evaluated with atan2.
        let c_phi = (p.d2 * p.d2 + r2 - distal * distal) / (2.0 * p.d2 * r);
        clamp_cos(c_phi).ok_or(IkFailure::SerialUnreachable)?;
    }

    let mut raw = Vec::with_capacity(2);
    for (elbow_angle, branch) in [(elbow, Branch::ElbowUp), (-elbow, Branch::ElbowDown)] {
        let phi = (distal * elbow_angle.sin().abs()).atan2(p.d2 + distal * elbow_angle.cos());
        let theta1 = match branch {
            Branch::ElbowUp => bearing - phi,
            Branch::ElbowDown => bearing + phi,
        };
        let pair = SerialPair {
            theta1: normalize_angle(theta1),
            theta2: normalize_angle(elbow_angle - offset),
            branch,
        };
        if raw.iter().any(|q: &SerialPair| {
            (q.theta1 - pair.theta1).abs() < 1e-12 && (q.theta2 - pair.theta2).abs() < 1e-12
        }) {
            continue;
        }
        raw.push(pair);
    }

    let within: Vec<SerialPair> = raw
        .into_iter()
        .filter(|pair| {
            p.theta_limits[0].contains(pair.theta1) && p.theta_limits[1].contains(pair.theta2)
        })
        .collect();
    if within.is_empty() {
        Err(IkFailure::JointLimit)
    } else {
        Ok(within)
    }
}

/// Separation that puts point C at height `z_platform`.
fn separation_for_platform_height(z_platform: f64, p: &StructuralParams) -> Result<f64, IkFailure> {
    let rise = z_platform - p.h - p.e1;
    if !rise.is_finite() || rise < -COS_CLAMP_BAND || rise > p.d1 + COS_CLAMP_BAND {
        return Err(IkFailure::ZUnreachable);
    }
    let rise = rise.clamp(0.0, p.d1);
    let half = ((p.d1 - rise) * (p.d1 + rise)).sqrt();
    Ok(2.0 * half - p.e3 + p.e2)
}

/// Solves the slider variables `(a, b)` that place point C at `(x, z)` in
/// frame A. `z` is the platform height, i.e. the tool height minus the
/// serial chain's vertical offset.
pub fn solve_parallel(x: f64, z: f64, p: &StructuralParams) -> Result<(f64, f64), IkFailure> {
    let b = separation_for_platform_height(z, p)?;
    let a = x - p.e3 / 2.0 - p.half_chord(b);
    if b < p.b_min || b > p.b_max {
        return Err(IkFailure::SeparationLimit);
    }
    if a < p.a_min || a > p.a_max {
        return Err(IkFailure::SliderLimit);
    }
    if a + b + p.carriage_allowance > p.rail_length {
        return Err(IkFailure::RailLimit);
    }
    Ok((a, b))
}

/// All candidates at a single slider position `a`, both branches.
pub fn solve_at(target: &TargetSpec, a: f64, p: &StructuralParams) -> Result<Vec<IkCandidate>, IkFailure> {
    let z_platform = target.position.z - serial_rise(target.theta3, target.theta4, p);
    let b = separation_for_platform_height(z_platform, p)?;
    if b < p.b_min || b > p.b_max {
        return Err(IkFailure::SeparationLimit);
    }
    if a < p.a_min || a > p.a_max {
        return Err(IkFailure::SliderLimit);
    }
    if a + b + p.carriage_allowance > p.rail_length {
        return Err(IkFailure::RailLimit);
    }
    let platform = parallel_fk(a, b, p).map_err(|_| IkFailure::ZUnreachable)?;
    let local = target.position - platform.translation;
    let pairs = solve_serial(local.x, local.y, target.theta3, p)?;

    let mut out = Vec::with_capacity(pairs.len());
    let mut last_failure = IkFailure::Residual;
    for pair in pairs {
        let state = JointState::new(a, b, [pair.theta1, pair.theta2, target.theta3, target.theta4]);
        if !validate_state(&state, p).is_valid() {
            last_failure = IkFailure::JointLimit;
            continue;
        }
        let Ok(pose) = full_fk(&state, p) else {
            continue;
        };
        let position_error = (pose.translation - target.position).norm();
        if position_error < RESIDUAL_TOLERANCE {
            out.push(IkCandidate {
                state,
                branch: pair.branch,
                position_error,
            });
        } else {
            last_failure = IkFailure::Residual;
        }
    }
    if out.is_empty() {
        Err(last_failure)
    } else {
        Ok(out)
    }
}

/// Sweeps slider 1 over the grid and returns, in ascending `a`, at most one
/// candidate per grid point (the preferred branch when both are valid).
pub fn solve_full(target: &TargetSpec, p: &StructuralParams, sweep: Sweep) -> Result<IkSolutions, IkError> {
    sweep.validate()?;
    if target.frame == Frame::Base {
        return Err(IkError::BaseFrameTarget);
    }
    target.check(p).map_err(IkError::InvalidTarget)?;

    let n = sweep.len();
    let outcomes: Vec<Result<IkCandidate, IkFailure>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut found = solve_at(target, sweep.value(k), p)?;
            let idx = found.iter().position(|c| c.branch == sweep.prefer).unwrap_or(0);
            Ok(found.swap_remove(idx))
        })
        .collect();

    let mut solutions = IkSolutions {
        sweep_points: n,
        ..IkSolutions::default()
    };
    for outcome in outcomes {
        match outcome {
            Ok(c) => solutions.candidates.push(c),
            Err(reason) => *solutions.failures.entry(reason).or_default() += 1,
        }
    }
    Ok(solutions)
}

/// Elbow branch a state sits on: the sign of `θ2 + ψ(θ3)`.
pub fn branch_of(q: &JointState, p: &StructuralParams) -> Branch {
    let (wx, wy) = distal_offset(q.theta[2], p);
    if normalize_angle(q.theta[1] + wy.atan2(wx)) >= 0.0 {
        Branch::ElbowUp
    } else {
        Branch::ElbowDown
    }
}

/// Per-axis weights `[a, b, θ1, θ2, θ3, θ4]`; angles scaled by `d2` so a
/// radian counts like the arc it sweeps at the end of link 2.
pub fn default_weights(p: &StructuralParams) -> [f64; 6] {
    [1.0, 1.0, p.d2, p.d2, p.d2, p.d2]
}

/// Weighted L1 displacement between two states.
pub fn weighted_distance(a: &JointState, b: &JointState, weights: &[f64; 6]) -> f64 {
    a.to_array()
        .iter()
        .zip(b.to_array())
        .zip(weights)
        .map(|((x, y), w)| w * (x - y).abs())
        .sum()
}

/// Candidate closest to `current`; ties go to the smaller `a`, then to
/// elbow-up.
pub fn select_solution(
    candidates: &[IkCandidate],
    current: &JointState,
    weights: &[f64; 6],
) -> Result<IkCandidate, IkError> {
    const TIE: f64 = 1e-9;
    let mut best: Option<(f64, &IkCandidate)> = None;
    for cand in candidates {
        let cost = weighted_distance(&cand.state, current, weights);
        let better = match best {
            None => true,
            Some((best_cost, incumbent)) => {
                if cost < best_cost - TIE {
                    true
                } else if cost <= best_cost + TIE {
                    (cand.state.a, cand.branch) < (incumbent.state.a, incumbent.branch)
                } else {
                    false
                }
            }
        };
        if better {
            best = Some((cost, cand));
        }
    }
    best.map(|(_, c)| *c).ok_or(IkError::NoSolution)
}

/// Pick used when there is no current state to stay near: the middle of
/// the candidate list, which keeps slider 1 away from both ends of its
/// feasible range.
pub fn middle_candidate(candidates: &[IkCandidate]) -> Result<IkCandidate, IkError> {
    candidates
        .get(candidates.len() / 2)
        .copied()
        .ok_or(IkError::NoSolution)
}

pub const CANDIDATE_HEADER: &str = "a_mm,b_mm,theta1,theta2,theta3,theta4,branch,position_error_mm";

pub fn write_candidates<W: Write>(candidates: &[IkCandidate], out: &mut W) -> io::Result<()> {
    writeln!(out, "{CANDIDATE_HEADER}")?;
    for c in candidates {
        let q = &c.state;
        writeln!(
            out,
            "{:?},{:?},{:?},{:?},{:?},{:?},{},{:?}",
            q.a, q.b, q.theta[0], q.theta[1], q.theta[2], q.theta[3], c.branch, c.position_error
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::serial_fk;
    use approx::assert_abs_diff_eq;

    fn defaults() -> StructuralParams {
        StructuralParams::default()
    }

    fn planar(theta1: f64, theta2: f64, theta3: f64, p: &StructuralParams) -> (f64, f64) {
        let t = serial_fk(&[theta1, theta2, theta3, 0.0], p).translation;
        (t.x, t.y)
    }

    #[test]
    fn zero_configuration_is_recovered() {
        let p = defaults();
        let (x, y) = planar(0.0, 0.0, 0.0, &p);
        let pairs = solve_serial(x, y, 0.0, &p).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!(pairs
            .iter()
            .any(|s| s.theta1.abs() < 1e-12 && s.theta2.abs() < 1e-12));
    }

    #[test]
    fn every_pair_reproduces_the_target() {
        let p = defaults();
        for &(t1, t2, t3) in &[(0.3, 1.1, 0.2), (-2.0, -0.4, -1.0), (2.9, 2.0, 1.4), (0.0, -2.5, 0.0)] {
            let (x, y) = planar(t1, t2, t3, &p);
            let pairs = solve_serial(x, y, t3, &p).unwrap();
            for pair in &pairs {
                let (xr, yr) = planar(pair.theta1, pair.theta2, t3, &p);
                assert_abs_diff_eq!(xr, x, epsilon = 1e-9);
                assert_abs_diff_eq!(yr, y, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn full_extension_collapses_to_one_pair() {
        let p = defaults();
        let (wx, wy) = distal_offset(0.0, &p);
        let reach = p.d2 + wx.hypot(wy);
        let pairs = solve_serial(reach, 0.0, 0.0, &p).unwrap();
        assert_eq!(pairs.len(), 1);
        let (x, y) = planar(pairs[0].theta1, pairs[0].theta2, 0.0, &p);
        assert_abs_diff_eq!(x, reach, epsilon = 1e-9);
        assert_abs_diff_eq!(y, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn beyond_reach_is_unreachable() {
        let p = defaults();
        let r = p.d2 + p.d3 + p.d4 + 1.0;
        assert_eq!(solve_serial(r, 0.0, 0.0, &p), Err(IkFailure::SerialUnreachable));
        let (wx, wy) = distal_offset(0.0, &p);
        let r = p.d2 + wx.hypot(wy) + 1e-3;
        assert_eq!(solve_serial(r, 0.0, 0.0, &p), Err(IkFailure::SerialUnreachable));
    }

    #[test]
    fn limits_filter_pairs() {
        let mut p = defaults();
        let (x, y) = planar(0.2, 1.0, 0.0, &p);
        p.theta_limits[1].max = 0.0;
        p.theta_limits[1].min = -0.5;
        // the elbow-up pair needs θ2 = 1.0; the mirrored pair lands elsewhere
        let result = solve_serial(x, y, 0.0, &p);
        if let Ok(pairs) = result {
            assert!(pairs.iter().all(|s| s.theta2 <= 0.0 && s.theta2 >= -0.5));
        } else {
            assert_eq!(result, Err(IkFailure::JointLimit));
        }
    }

    #[test]
    fn parallel_apex_and_split() {
        let p = defaults();
        let (_, b) = solve_parallel(400.0, p.max_platform_height(), &p).map_or((0.0, -1.0), |v| v);
        // apex separation 0 lies below b_min = 60
        assert_eq!(b, -1.0);
        assert_eq!(
            solve_parallel(400.0, p.max_platform_height(), &p),
            Err(IkFailure::SeparationLimit)
        );
        let mut open = defaults();
        open.b_min = 0.0;
        let (a, b) = solve_parallel(400.0, open.max_platform_height(), &open).unwrap();
        assert_abs_diff_eq!(b, open.e2 - open.e3, epsilon = 1e-12);
        assert_abs_diff_eq!(a, 400.0 - 30.0, epsilon = 1e-12);

        let (a, b) = solve_parallel(600.0, p.min_platform_height(), &p).unwrap();
        assert_abs_diff_eq!(a, 600.0 - 30.0 - p.d1, epsilon = 1e-9);
        assert_abs_diff_eq!(b, p.split_limit(), epsilon = 1e-9);
    }

    #[test]
    fn parallel_round_trip() {
        let p = defaults();
        let (a, b) = solve_parallel(500.0, 400.0, &p).unwrap();
        let pose = parallel_fk(a, b, &p).unwrap();
        assert_abs_diff_eq!(pose.translation.x, 500.0, epsilon = 1e-9);
        assert_abs_diff_eq!(pose.translation.z, 400.0, epsilon = 1e-9);
    }

    #[test]
    fn parallel_out_of_band() {
        let p = defaults();
        assert_eq!(solve_parallel(400.0, p.max_platform_height() + 1.0, &p), Err(IkFailure::ZUnreachable));
        assert_eq!(solve_parallel(400.0, p.min_platform_height() - 1.0, &p), Err(IkFailure::ZUnreachable));
        assert_eq!(solve_parallel(-500.0, 400.0, &p), Err(IkFailure::SliderLimit));
    }

    #[test]
    fn sweep_grid_size() {
        assert_eq!(Sweep::default().len(), 801);
        assert_eq!(Sweep::new(0.0, 10.0, 3.0).len(), 4);
        assert!(solve_full(&TargetSpec::world(400.0, 0.0, 300.0, 0.0, 0.0), &defaults(), Sweep::new(5.0, 5.0, 1.0)).is_err());
        assert!(solve_full(&TargetSpec::world(400.0, 0.0, 300.0, 0.0, 0.0), &defaults(), Sweep::new(0.0, 5.0, 0.0)).is_err());
    }

    #[test]
    fn target_above_ceiling_fails_everywhere() {
        let p = defaults();
        let target = TargetSpec::world(400.0, 0.0, p.max_platform_height() + 1.0, 0.0, 0.0);
        let sol = solve_full(&target, &p, Sweep::default()).unwrap();
        assert!(sol.is_empty());
        assert_eq!(sol.failures.get(&IkFailure::ZUnreachable), Some(&801));
        assert_eq!(sol.failures.len(), 1);
        assert_eq!(sol.failure_summary(), "z unreachable: 801");
    }

    #[test]
    fn base_frame_targets_are_refused() {
        let p = defaults();
        let mut target = TargetSpec::world(400.0, 0.0, 300.0, 0.0, 0.0);
        target.frame = Frame::Base;
        assert_eq!(solve_full(&target, &p, Sweep::default()), Err(IkError::BaseFrameTarget));
    }

    #[test]
    fn full_solve_recovers_grid_state() {
        let p = defaults();
        let q0 = JointState::new(250.0, 300.0, [0.4, 0.9, 0.3, -0.2]);
        let tcp = full_fk(&q0, &p).unwrap().translation;
        let target = TargetSpec::world(tcp.x, tcp.y, tcp.z, 0.3, -0.2);
        let sol = solve_full(&target, &p, Sweep::default()).unwrap();
        assert!(sol.candidates.len() <= 801);
        assert!(sol.candidates.windows(2).all(|w| w[0].state.a < w[1].state.a));
        let hit = sol
            .candidates
            .iter()
            .find(|c| (c.state.a - 250.0).abs() < 1e-12)
            .expect("grid point present");
        for (x, y) in hit.state.to_array().iter().zip(q0.to_array()) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-9);
        }
    }

    fn cand(a: f64, branch: Branch) -> IkCandidate {
        IkCandidate {
            state: JointState::new(a, 100.0, [0.0; 4]),
            branch,
            position_error: 0.0,
        }
    }

    #[test]
    fn selection_rules() {
        let w = [1.0; 6];
        let current = JointState::new(100.0, 100.0, [0.0; 4]);
        assert_eq!(select_solution(&[], &current, &w), Err(IkError::NoSolution));
        let single = cand(300.0, Branch::ElbowDown);
        assert_eq!(select_solution(&[single], &current, &w).unwrap(), single);
        let tie = [cand(110.0, Branch::ElbowUp), cand(90.0, Branch::ElbowUp)];
        assert_eq!(select_solution(&tie, &current, &w).unwrap().state.a, 90.0);
        let tie = [cand(90.0, Branch::ElbowDown), cand(90.0, Branch::ElbowUp)];
        assert_eq!(select_solution(&tie, &current, &w).unwrap().branch, Branch::ElbowUp);
    }

    #[test]
    fn normalize_into_half_open_interval() {
        assert_abs_diff_eq!(normalize_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(normalize_angle(-PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(normalize_angle(0.5), 0.5, epsilon = 1e-15);
    }
}
