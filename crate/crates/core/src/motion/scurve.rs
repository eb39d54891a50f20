//! Jerk-limited (seven phase) point-to-point profiles starting and ending at
//! rest.

use crate::model::ProfileLimits;

use super::MotionError;

/// One sample of a sampled profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub t: f64,
    pub position: f64,
    pub velocity: f64,
    pub acceleration: f64,
    pub jerk: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Phase {
    start: f64,
    duration: f64,
    jerk: f64,
    p0: f64,
    v0: f64,
    a0: f64,
}

/// Continuous-time jerk-limited move of a signed distance.
#[derive(Debug, Clone, PartialEq)]
pub struct ScurvePlan {
    distance: f64,
    phases: Vec<Phase>,
    duration: f64,
    peak_velocity: f64,
}

impl ScurvePlan {
    pub fn new(distance: f64, limits: &ProfileLimits) -> Result<ScurvePlan, MotionError> {
        if !limits.is_positive() {
            return Err(MotionError::InvalidInput(format!(
                "profile limits must be positive, got {limits:?}"
            )));
        }
        if !distance.is_finite() {
            return Err(MotionError::InvalidInput(format!("distance {distance} is not finite")));
        }
        let ProfileLimits { v_max, a_max, j_max } = *limits;
        let d = distance.abs();
        let sign = if distance < 0.0 { -1.0 } else { 1.0 };
        if d == 0.0 {
            return Ok(ScurvePlan {
                distance,
                phases: Vec::new(),
                duration: 0.0,
                peak_velocity: 0.0,
            });
        }

        // Accel-phase timing (jerk time, total accel time) for a peak speed v.
        let timing = |v: f64| -> (f64, f64) {
            if v * j_max >= a_max * a_max {
                (a_max / j_max, a_max / j_max + v / a_max)
            } else {
                let tj = (v / j_max).sqrt();
                (tj, 2.0 * tj)
            }
        };

        let (mut tj, mut ta) = timing(v_max);
        let mut v_peak = v_max;
        let mut cruise = 0.0;
        if v_max * ta <= d {
            cruise = (d - v_max * ta) / v_max;
        } else {
            // v_max is out of reach; the two ramps alone cover the distance.
            let v_tri = (d * j_max.sqrt() / 2.0).powf(2.0 / 3.0);
            v_peak = if v_tri * j_max <= a_max * a_max {
                v_tri
            } else {
                let k = a_max * a_max / j_max;
                (-k + (k * k + 4.0 * d * a_max).sqrt()) / 2.0
            };
            (tj, ta) = timing(v_peak);
        }
        let t_const = (ta - 2.0 * tj).max(0.0);

        let pattern = [
            (tj, j_max),
            (t_const, 0.0),
            (tj, -j_max),
            (cruise, 0.0),
            (tj, -j_max),
            (t_const, 0.0),
            (tj, j_max),
        ];
        let mut phases = Vec::with_capacity(7);
        let (mut t, mut p, mut v, mut a) = (0.0, 0.0, 0.0, 0.0);
        for (duration, jerk) in pattern {
            if duration <= 0.0 {
                continue;
            }
            let jerk = sign * jerk;
            phases.push(Phase {
                start: t,
                duration,
                jerk,
                p0: p,
                v0: v,
                a0: a,
            });
            let (np, nv, na) = advance(p, v, a, jerk, duration);
            p = np;
            v = nv;
            a = na;
            t += duration;
        }
        Ok(ScurvePlan {
            distance,
            phases,
            duration: t,
            peak_velocity: v_peak,
        })
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    /// Magnitude of the cruise (or apex) speed.
    pub fn peak_velocity(&self) -> f64 {
        self.peak_velocity
    }

    /// `(position, velocity, acceleration, jerk)` at time `t`, clamped to
    /// the profile's span.
    pub fn eval(&self, t: f64) -> (f64, f64, f64, f64) {
        if self.phases.is_empty() || t <= 0.0 {
            return (0.0, 0.0, 0.0, 0.0);
        }
        if t >= self.duration {
            return (self.distance, 0.0, 0.0, 0.0);
        }
        let idx = self
            .phases
            .partition_point(|ph| ph.start <= t)
            .saturating_sub(1);
        let ph = &self.phases[idx];
        let tau = (t - ph.start).min(ph.duration);
        let (p, v, a) = advance(ph.p0, ph.v0, ph.a0, ph.jerk, tau);
        (p, v, a, ph.jerk)
    }

    /// Samples at a fixed step `dt`. The time axis is stretched so that the
    /// last sample lands exactly on the end of the move; stretching by
    /// `k >= 1` scales velocity, acceleration and jerk by `1/k`, `1/k²` and
    /// `1/k³`, so every limit still holds.
    pub fn sample(&self, dt: f64) -> Result<Vec<ProfileSample>, MotionError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(MotionError::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        if self.phases.is_empty() {
            return Ok(vec![ProfileSample {
                t: 0.0,
                position: 0.0,
                velocity: 0.0,
                acceleration: 0.0,
                jerk: 0.0,
            }]);
        }
        let steps = ((self.duration / dt) - 1e-9).ceil().max(1.0) as usize;
        let stretch = steps as f64 * dt / self.duration;
        let mut out = Vec::with_capacity(steps + 1);
        for i in 0..=steps {
            let t = i as f64 * dt;
            let (p, v, a, j) = if i == steps {
                (self.distance, 0.0, 0.0, 0.0)
            } else {
                self.eval(t / stretch)
            };
            out.push(ProfileSample {
                t,
                position: p,
                velocity: v / stretch,
                acceleration: a / (stretch * stretch),
                jerk: j / (stretch * stretch * stretch),
            });
        }
        Ok(out)
    }
}

fn advance(p: f64, v: f64, a: f64, j: f64, t: f64) -> (f64, f64, f64) {
    (
        p + v * t + a * t * t / 2.0 + j * t * t * t / 6.0,
        v + a * t + j * t * t / 2.0,
        a + j * t,
    )
}

/// Jerk-limited rest-to-rest profile over `distance` (mm or rad) sampled
/// every `dt` seconds.
pub fn scurve_profile(distance: f64, limits: &ProfileLimits, dt: f64) -> Result<Vec<ProfileSample>, MotionError> {
    ScurvePlan::new(distance, limits)?.sample(dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LIMITS: ProfileLimits = ProfileLimits::new(100.0, 200.0, 1000.0);

    #[test]
    fn zero_distance_is_a_single_rest_sample() {
        let s = scurve_profile(0.0, &LIMITS, 0.01).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].position, 0.0);
        assert_eq!(s[0].velocity, 0.0);
    }

    #[test]
    fn rejects_bad_limits_and_step() {
        assert!(scurve_profile(1.0, &ProfileLimits::new(0.0, 1.0, 1.0), 0.01).is_err());
        assert!(scurve_profile(1.0, &ProfileLimits::new(1.0, -1.0, 1.0), 0.01).is_err());
        assert!(scurve_profile(1.0, &LIMITS, 0.0).is_err());
    }

    #[test]
    fn long_move_cruises_at_v_max() {
        let plan = ScurvePlan::new(1000.0, &LIMITS).unwrap();
        assert_eq!(plan.peak_velocity(), 100.0);
        // accel time = a/j + v/a = 0.2 + 0.5; cruise = (1000 - 100*0.7)/100
        assert!((plan.duration() - (2.0 * 0.7 + 9.3)).abs() < 1e-12);
        let (p, v, _, _) = plan.eval(5.0);
        assert!((v - 100.0).abs() < 1e-12);
        assert!((p - (35.0 + 100.0 * (5.0 - 0.7))).abs() < 1e-9);
    }

    #[test]
    fn short_move_has_triangular_acceleration() {
        let plan = ScurvePlan::new(1.0, &LIMITS).unwrap();
        assert!(plan.peak_velocity() < 100.0);
        let samples = plan.sample(1e-3).unwrap();
        let peak_a = samples.iter().map(|s| s.acceleration.abs()).fold(0.0, f64::max);
        assert!(peak_a < 200.0);
        // no constant-acceleration plateau: jerk is never zero mid-ramp
        let half = samples.len() / 4;
        assert!(samples[1..half].iter().all(|s| s.jerk != 0.0));
    }

    #[test]
    fn negative_distance_mirrors() {
        let fwd = scurve_profile(50.0, &LIMITS, 0.01).unwrap();
        let back = scurve_profile(-50.0, &LIMITS, 0.01).unwrap();
        assert_eq!(fwd.len(), back.len());
        for (f, b) in fwd.iter().zip(&back) {
            assert!((f.position + b.position).abs() < 1e-12);
            assert!((f.velocity + b.velocity).abs() < 1e-12);
        }
    }

    #[test]
    fn velocity_integrates_to_position() {
        let dt = 0.005;
        let s = scurve_profile(400.0, &LIMITS, dt).unwrap();
        let mut integral = 0.0;
        let duration = s.last().unwrap().t;
        // trapezoid error bound: T * dt² * max|v''| / 12
        let bound = duration * dt * dt * LIMITS.j_max / 12.0 + 1e-9;
        for w in s.windows(2) {
            integral += 0.5 * (w[0].velocity + w[1].velocity) * (w[1].t - w[0].t);
            assert!((integral - w[1].position).abs() <= bound, "{} vs {}", integral, w[1].position);
        }
    }
}
