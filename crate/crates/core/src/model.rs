//! Domain types shared by every other module: structural parameters, joint
//! states, poses, targets and controller configuration, together with the
//! JSON configuration document they are loaded from.
//!
//! All lengths are millimetres and all angles radians.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Errors raised while reading or validating a configuration document.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config validation error: {constraint} ({detail})")]
    Invalid {
        constraint: &'static str,
        detail: String,
    },
}

impl ConfigError {
    fn invalid(constraint: &'static str, detail: impl Into<String>) -> Self {
        ConfigError::Invalid {
            constraint,
            detail: detail.into(),
        }
    }
}

/// Closed interval `[min, max]` for one revolute joint, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointRange {
    pub min: f64,
    pub max: f64,
}

impl JointRange {
    pub const fn new(min: f64, max: f64) -> Self {
        JointRange { min, max }
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.min && value <= self.max
    }
}

/// Geometric constants of the arm plus joint, slider and dynamic limits.
///
/// `a` is the position of slider 1 on the rail and `b` the separation of the
/// two linkage attachment pins, so slider 2 sits at `a + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralParams {
    /// Linkage length of the parallel mechanism.
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    /// Lateral offset of point C from the rail axis.
    pub e4: f64,
    /// Slider block height.
    pub h: f64,
    pub rail_length: f64,
    /// Rail length consumed by the carriages beyond the pin separation.
    pub carriage_allowance: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub theta_limits: [JointRange; 4],
    /// mm/s
    pub v_max_slider: f64,
    /// rad/s
    pub v_max_joint: f64,
    /// Path acceleration limit, mm/s².
    pub accel_max: f64,
    /// Path jerk limit, mm/s³.
    pub jerk_max: f64,
    /// Height of the serial stack above point C used for clearance checks.
    pub stack_allowance: f64,
}

pub const DEFAULT_D1: f64 = 393.0;
pub const DEFAULT_D2: f64 = 160.0;
pub const DEFAULT_D3: f64 = 145.0;
pub const DEFAULT_D4: f64 = 118.0;
pub const DEFAULT_RAIL_LENGTH: f64 = 1212.0;
pub const DEFAULT_E1: f64 = 40.0;
pub const DEFAULT_E2: f64 = 60.0;
pub const DEFAULT_E3: f64 = 60.0;
pub const DEFAULT_E4: f64 = 0.0;
pub const DEFAULT_H: f64 = 50.0;

pub fn default_theta_limits() -> [JointRange; 4] {
    [
        JointRange::new(-PI, PI),
        JointRange::new(-2.62, 2.62),
        JointRange::new(-PI / 2.0, PI / 2.0),
        JointRange::new(-PI, PI),
    ]
}

impl Default for StructuralParams {
    fn default() -> Self {
        Self::with_links(DEFAULT_D1, DEFAULT_D2, DEFAULT_D3, DEFAULT_D4, DEFAULT_RAIL_LENGTH)
    }
}

impl StructuralParams {
    /// Builds parameters from link lengths and rail length, filling every
    /// other field with the toolkit defaults.
    pub fn with_links(d1: f64, d2: f64, d3: f64, d4: f64, rail_length: f64) -> Self {
        StructuralParams {
            d1,
            d2,
            d3,
            d4,
            e1: DEFAULT_E1,
            e2: DEFAULT_E2,
            e3: DEFAULT_E3,
            e4: DEFAULT_E4,
            h: DEFAULT_H,
            rail_length,
            carriage_allowance: 0.0,
            a_min: 0.0,
            a_max: 800.0,
            b_min: 60.0,
            b_max: 2.0 * d1 - DEFAULT_E3 + DEFAULT_E2,
            theta_limits: default_theta_limits(),
            v_max_slider: 1500.0,
            v_max_joint: PI,
            accel_max: 1000.0,
            jerk_max: 5000.0,
            stack_allowance: d2,
        }
    }

    /// Largest separation for which the linkage height is defined.
    pub fn split_limit(&self) -> f64 {
        2.0 * self.d1 - self.e3 + self.e2
    }

    /// Horizontal half-chord of the linkage for separation `b`.
    pub fn half_chord(&self, b: f64) -> f64 {
        (b + self.e3 - self.e2) / 2.0
    }

    /// Height of point C when the linkage is fully split.
    pub fn min_platform_height(&self) -> f64 {
        self.h + self.e1
    }

    /// Height of point C when the linkage stands upright.
    pub fn max_platform_height(&self) -> f64 {
        self.d1 + self.h + self.e1
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let all = [
            ("d1", self.d1),
            ("d2", self.d2),
            ("d3", self.d3),
            ("d4", self.d4),
            ("e1", self.e1),
            ("e2", self.e2),
            ("e3", self.e3),
            ("e4", self.e4),
            ("h", self.h),
            ("rail_length", self.rail_length),
            ("carriage_allowance", self.carriage_allowance),
            ("a_min", self.a_min),
            ("a_max", self.a_max),
            ("b_min", self.b_min),
            ("b_max", self.b_max),
            ("v_max_slider", self.v_max_slider),
            ("v_max_joint", self.v_max_joint),
            ("accel_max", self.accel_max),
            ("jerk_max", self.jerk_max),
            ("stack_allowance", self.stack_allowance),
        ];
        for (name, value) in all {
            if !value.is_finite() {
                return Err(ConfigError::invalid("finite values", format!("{name} = {value}")));
            }
        }
        for (name, value) in [
            ("d1", self.d1),
            ("d2", self.d2),
            ("d3", self.d3),
            ("d4", self.d4),
            ("rail_length", self.rail_length),
        ] {
            if value <= 0.0 {
                return Err(ConfigError::invalid(
                    "link lengths positive",
                    format!("{name} = {value}"),
                ));
            }
        }
        if self.a_min < 0.0 || self.a_min >= self.a_max {
            return Err(ConfigError::invalid(
                "a travel",
                format!("need 0 <= a_min < a_max, got [{}, {}]", self.a_min, self.a_max),
            ));
        }
        if self.b_min < 0.0 || self.b_min > self.b_max {
            return Err(ConfigError::invalid(
                "b travel",
                format!("need 0 <= b_min <= b_max, got [{}, {}]", self.b_min, self.b_max),
            ));
        }
        if self.b_max > self.split_limit() {
            return Err(ConfigError::invalid(
                "b_max exceeds sqrt domain",
                format!("b_max = {} > 2*d1 - e3 + e2 = {}", self.b_max, self.split_limit()),
            ));
        }
        if self.half_chord(self.b_min) < -self.d1 {
            return Err(ConfigError::invalid(
                "b_min below sqrt domain",
                format!("(b_min + e3 - e2)/2 = {} < -d1", self.half_chord(self.b_min)),
            ));
        }
        if self.carriage_allowance < 0.0 {
            return Err(ConfigError::invalid(
                "carriage allowance",
                format!("carriage_allowance = {} < 0", self.carriage_allowance),
            ));
        }
        // Both sliders must fit on the rail in at least the tightest layout;
        // wider layouts are checked per state.
        if self.a_min + self.b_min + self.carriage_allowance > self.rail_length {
            return Err(ConfigError::invalid(
                "sliders fit on rail",
                format!(
                    "a_min + b_min + carriage_allowance = {} > rail_length = {}",
                    self.a_min + self.b_min + self.carriage_allowance,
                    self.rail_length
                ),
            ));
        }
        for (i, range) in self.theta_limits.iter().enumerate() {
            if !(range.min.is_finite() && range.max.is_finite()) || range.min >= range.max {
                return Err(ConfigError::invalid(
                    "joint limits ordered",
                    format!("theta{} range [{}, {}]", i + 1, range.min, range.max),
                ));
            }
        }
        for (name, value) in [
            ("v_max_slider", self.v_max_slider),
            ("v_max_joint", self.v_max_joint),
            ("accel_max", self.accel_max),
            ("jerk_max", self.jerk_max),
        ] {
            if value <= 0.0 {
                return Err(ConfigError::invalid("dynamic limits positive", format!("{name} = {value}")));
            }
        }
        if self.stack_allowance < 0.0 {
            return Err(ConfigError::invalid(
                "stack allowance",
                format!("stack_allowance = {} < 0", self.stack_allowance),
            ));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON encoding, hex encoded.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("params always serialize");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// The six joint variables of the arm.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointState {
    /// Slider 1 position along the rail, mm.
    pub a: f64,
    /// Pin separation between the sliders, mm.
    pub b: f64,
    /// Revolute angles θ1..θ4, radians.
    pub theta: [f64; 4],
}

impl JointState {
    pub const AXES: usize = 6;

    pub fn new(a: f64, b: f64, theta: [f64; 4]) -> Self {
        JointState { a, b, theta }
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        JointState {
            a: v[0],
            b: v[1],
            theta: [v[2], v[3], v[4], v[5]],
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.a, self.b, self.theta[0], self.theta[1], self.theta[2], self.theta[3]]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Component-wise linear blend `self + (other - self) * s`.
    pub fn lerp(&self, other: &JointState, s: f64) -> JointState {
        let x = self.to_array();
        let y = other.to_array();
        let mut out = [0.0; 6];
        for i in 0..6 {
            out[i] = x[i] + (y[i] - x[i]) * s;
        }
        JointState::from_array(out)
    }
}

/// A single failed constraint reported by [`validate_state`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonFinite,
    SliderTravel { value: f64, min: f64, max: f64 },
    SeparationTravel { value: f64, min: f64, max: f64 },
    SqrtDomain { half_chord: f64, d1: f64 },
    RailOverrun { end: f64, rail_length: f64 },
    JointLimit { joint: usize, value: f64, range: JointRange },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite => write!(f, "non-finite joint value"),
            Violation::SliderTravel { value, min, max } => {
                write!(f, "a limit: {value} outside [{min}, {max}]")
            }
            Violation::SeparationTravel { value, min, max } => {
                write!(f, "b limit: {value} outside [{min}, {max}]")
            }
            Violation::SqrtDomain { half_chord, d1 } => {
                write!(f, "sqrt domain: |(b + e3 - e2)/2| = {} > d1 = {d1}", half_chord.abs())
            }
            Violation::RailOverrun { end, rail_length } => {
                write!(f, "rail: slider 2 reaches {end} > {rail_length}")
            }
            Violation::JointLimit { joint, value, range } => write!(
                f,
                "theta{} limit: {value} outside [{}, {}]",
                joint + 1,
                range.min,
                range.max
            ),
        }
    }
}

/// Outcome of [`validate_state`]; valid iff the violation list is empty.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateVerdict {
    pub violations: Vec<Violation>,
}

impl StateVerdict {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a joint state against every travel, rail and linkage constraint.
pub fn validate_state(q: &JointState, p: &StructuralParams) -> StateVerdict {
    let mut violations = Vec::new();
    if !q.is_finite() {
        violations.push(Violation::NonFinite);
        return StateVerdict { violations };
    }
    if q.a < p.a_min || q.a > p.a_max {
        violations.push(Violation::SliderTravel {
            value: q.a,
            min: p.a_min,
            max: p.a_max,
        });
    }
    if q.b < p.b_min || q.b > p.b_max {
        violations.push(Violation::SeparationTravel {
            value: q.b,
            min: p.b_min,
            max: p.b_max,
        });
    }
    let half = p.half_chord(q.b);
    if half.abs() > p.d1 {
        violations.push(Violation::SqrtDomain { half_chord: half, d1: p.d1 });
    }
    let end = q.a + q.b + p.carriage_allowance;
    if end > p.rail_length {
        violations.push(Violation::RailOverrun {
            end,
            rail_length: p.rail_length,
        });
    }
    for (joint, (&value, range)) in q.theta.iter().zip(p.theta_limits.iter()).enumerate() {
        if !range.contains(value) {
            violations.push(Violation::JointLimit {
                joint,
                value,
                range: *range,
            });
        }
    }
    StateVerdict { violations }
}

/// Rigid transform: orthonormal rotation plus translation in millimetres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Pose::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Pose { rotation, translation }
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Pose {
            rotation: Matrix3::identity(),
            translation: Vector3::new(x, y, z),
        }
    }

    /// `self * other`: express `other` (given in this pose's child frame) in
    /// this pose's parent frame.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn to_matrix4(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    pub fn from_matrix4(m: &Matrix4<f64>) -> Pose {
        Pose {
            rotation: m.fixed_view::<3, 3>(0, 0).into_owned(),
            translation: m.fixed_view::<3, 1>(0, 3).into_owned(),
        }
    }

    /// Rotation rows followed by the translation: 12 numbers.
    pub fn to_row_major12(&self) -> [f64; 12] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
            t.x,
            t.y,
            t.z,
        ]
    }

    /// Largest deviation of `RᵀR` from identity and of `det R` from one.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.rotation.transpose() * self.rotation - Matrix3::identity();
        let det = (self.rotation.determinant() - 1.0).abs();
        gram.abs().max().max(det)
    }

    pub fn is_finite(&self) -> bool {
        self.rotation.iter().all(|v| v.is_finite()) && self.translation.iter().all(|v| v.is_finite())
    }
}

/// Frame a target position is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Fixed frame at the rail origin.
    #[default]
    World,
    /// Frame at point C on the parallel platform.
    Base,
}

/// Position goal for the tool centre point with commanded wrist angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSpec {
    pub position: Vector3<f64>,
    pub theta3: f64,
    pub theta4: f64,
    pub frame: Frame,
}

impl TargetSpec {
    pub fn world(x: f64, y: f64, z: f64, theta3: f64, theta4: f64) -> Self {
        TargetSpec {
            position: Vector3::new(x, y, z),
            theta3,
            theta4,
            frame: Frame::World,
        }
    }

    pub fn with_position(&self, position: Vector3<f64>) -> Self {
        TargetSpec { position, ..*self }
    }

    /// Re-expresses a base-frame target in the world frame for the given
    /// parallel configuration. World targets are returned unchanged.
    pub fn to_world(&self, platform: &Pose) -> TargetSpec {
        match self.frame {
            Frame::World => *self,
            Frame::Base => TargetSpec {
                position: platform.rotation * self.position + platform.translation,
                frame: Frame::World,
                ..*self
            },
        }
    }

    /// Position finite and wrist angles inside the configured limits.
    pub fn check(&self, p: &StructuralParams) -> Result<(), String> {
        if !self.position.iter().all(|v| v.is_finite()) {
            return Err("target position is not finite".into());
        }
        if !p.theta_limits[2].contains(self.theta3) {
            return Err(format!("theta3 = {} outside limits", self.theta3));
        }
        if !p.theta_limits[3].contains(self.theta4) {
            return Err(format!("theta4 = {} outside limits", self.theta4));
        }
        Ok(())
    }
}

/// Gains of one PID stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidGains {
    pub const fn new(kp: f64, ki: f64, kd: f64) -> Self {
        PidGains { kp, ki, kd }
    }
}

/// Velocity, acceleration and jerk bounds for a jerk-limited profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileLimits {
    pub v_max: f64,
    pub a_max: f64,
    pub j_max: f64,
}

impl ProfileLimits {
    pub const fn new(v_max: f64, a_max: f64, j_max: f64) -> Self {
        ProfileLimits { v_max, a_max, j_max }
    }

    pub fn is_positive(&self) -> bool {
        [self.v_max, self.a_max, self.j_max]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScurveClasses {
    /// Slider axes and Cartesian paths, mm.
    pub slider: ProfileLimits,
    /// Revolute axes, rad.
    pub joint: ProfileLimits,
}

impl Default for ScurveClasses {
    fn default() -> Self {
        ScurveClasses {
            slider: ProfileLimits::new(150.0, 300.0, 1500.0),
            joint: ProfileLimits::new(1.0, 2.0, 10.0),
        }
    }
}

/// Segmented PID configuration and loop timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    /// Upper bounds of the error bands, mm; a value on a bound belongs to
    /// the lower band.
    pub segment_bounds: Vec<f64>,
    /// One gain set per band, slider axes. Commands are accelerations
    /// (mm/s² per mm of error). With kd = 50 the default plant stays stable
    /// at 60 Hz for kp up to at least 3600.
    pub gains: Vec<PidGains>,
    /// Feedback gains of the revolute axes, on top of profile feedforward.
    pub joint_gains: PidGains,
    /// Hz
    pub loop_rate: f64,
    /// Bound on `|ki * integral|`, command units.
    pub windup_limit: f64,
    pub scurve: ScurveClasses,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            segment_bounds: vec![10.0, 500.0, 1212.0],
            gains: vec![
                PidGains::new(900.0, 2000.0, 50.0),
                PidGains::new(400.0, 0.0, 40.0),
                PidGains::new(100.0, 0.0, 20.0),
            ],
            joint_gains: PidGains::new(400.0, 200.0, 35.0),
            loop_rate: 60.0,
            windup_limit: 5000.0,
            scurve: ScurveClasses::default(),
        }
    }
}

impl ControllerConfig {
    pub fn dt(&self) -> f64 {
        1.0 / self.loop_rate
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.segment_bounds.is_empty() {
            return Err(ConfigError::invalid("segments", "at least one breakpoint required"));
        }
        if self.segment_bounds.iter().any(|b| !b.is_finite() || *b <= 0.0) {
            return Err(ConfigError::invalid("segments", "breakpoints must be positive"));
        }
        if self.segment_bounds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::invalid(
                "segments strictly increasing",
                format!("{:?}", self.segment_bounds),
            ));
        }
        if self.gains.len() != self.segment_bounds.len() {
            return Err(ConfigError::invalid(
                "one gain set per segment",
                format!("{} segments, {} gain sets", self.segment_bounds.len(), self.gains.len()),
            ));
        }
        let all_gains = self.gains.iter().chain(std::iter::once(&self.joint_gains));
        for g in all_gains {
            if [g.kp, g.ki, g.kd].iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(ConfigError::invalid("gains non-negative", format!("{g:?}")));
            }
        }
        if !(self.loop_rate.is_finite() && self.loop_rate > 0.0) {
            return Err(ConfigError::invalid("loop_rate positive", format!("{}", self.loop_rate)));
        }
        if !(self.windup_limit.is_finite() && self.windup_limit >= 0.0) {
            return Err(ConfigError::invalid("windup_limit", format!("{}", self.windup_limit)));
        }
        if !self.scurve.slider.is_positive() || !self.scurve.joint.is_positive() {
            return Err(ConfigError::invalid("scurve limits positive", format!("{:?}", self.scurve)));
        }
        Ok(())
    }
}

/// Saturation and damping of one simulated axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisPlant {
    pub v_max: f64,
    pub a_max: f64,
    /// Viscous damping coefficient, 1/s.
    pub damping: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    pub slider: AxisPlant,
    pub joint: AxisPlant,
}

impl Default for PlantParams {
    fn default() -> Self {
        PlantParams {
            slider: AxisPlant {
                v_max: 1500.0,
                a_max: 5000.0,
                damping: 2.0,
            },
            joint: AxisPlant {
                v_max: PI,
                a_max: 20.0,
                damping: 2.0,
            },
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for axis in [self.slider, self.joint] {
            if !(axis.v_max > 0.0 && axis.a_max > 0.0 && axis.damping >= 0.0)
                || ![axis.v_max, axis.a_max, axis.damping].iter().all(|v| v.is_finite())
            {
                return Err(ConfigError::invalid("plant limits", format!("{axis:?}")));
            }
        }
        Ok(())
    }
}

/// Everything a configuration document carries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    pub params: StructuralParams,
    pub controller: ControllerConfig,
    pub plant: PlantParams,
}

impl Config {
    pub fn from_json(source: &str) -> Result<Config, ConfigError> {
        let doc: Document =
            serde_json::from_str(source).map_err(|e| ConfigError::Parse(e.to_string()))?;
        doc.into_config()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&Document::from_config(self)).expect("document always serializes")
    }
}

/// Parses and validates the structural part of a configuration document.
pub fn load_params(source: &str) -> Result<StructuralParams, ConfigError> {
    Config::from_json(source).map(|c| c.params)
}

/// Encodes parameters as a configuration document with default controller
/// and plant sections.
pub fn serialize_params(p: &StructuralParams) -> String {
    Config {
        params: p.clone(),
        ..Config::default()
    }
    .to_json()
}

// ---------------------------------------------------------------------------
// On-disk document layout.

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    links: LinksDoc,
    #[serde(default)]
    offsets: OffsetsDoc,
    rail: RailDoc,
    #[serde(default)]
    joints: JointsDoc,
    #[serde(default)]
    limits: LimitsDoc,
    #[serde(default)]
    body: BodyDoc,
    #[serde(default)]
    controller: ControllerDoc,
    #[serde(default)]
    plant: Option<PlantParams>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinksDoc {
    d1: f64,
    d2: f64,
    d3: f64,
    d4: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OffsetsDoc {
    e1: f64,
    e2: f64,
    e3: f64,
    e4: f64,
    h: f64,
}

impl Default for OffsetsDoc {
    fn default() -> Self {
        OffsetsDoc {
            e1: DEFAULT_E1,
            e2: DEFAULT_E2,
            e3: DEFAULT_E3,
            e4: DEFAULT_E4,
            h: DEFAULT_H,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RailDoc {
    length: f64,
    #[serde(default)]
    a_min: Option<f64>,
    #[serde(default)]
    a_max: Option<f64>,
    #[serde(default)]
    b_min: Option<f64>,
    #[serde(default)]
    b_max: Option<f64>,
    #[serde(default)]
    carriage_allowance: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct JointsDoc {
    theta1: [f64; 2],
    theta2: [f64; 2],
    theta3: [f64; 2],
    theta4: [f64; 2],
}

impl Default for JointsDoc {
    fn default() -> Self {
        let l = default_theta_limits();
        JointsDoc {
            theta1: [l[0].min, l[0].max],
            theta2: [l[1].min, l[1].max],
            theta3: [l[2].min, l[2].max],
            theta4: [l[3].min, l[3].max],
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct LimitsDoc {
    v_slider: f64,
    v_joint: f64,
    accel: f64,
    jerk: f64,
}

impl Default for LimitsDoc {
    fn default() -> Self {
        let p = StructuralParams::default();
        LimitsDoc {
            v_slider: p.v_max_slider,
            v_joint: p.v_max_joint,
            accel: p.accel_max,
            jerk: p.jerk_max,
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BodyDoc {
    #[serde(default)]
    stack_allowance: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ControllerDoc {
    segments: Vec<f64>,
    gains: Vec<PidGains>,
    joint_gains: PidGains,
    loop_rate: f64,
    windup_limit: f64,
    scurve: ScurveClasses,
}

impl Default for ControllerDoc {
    fn default() -> Self {
        let c = ControllerConfig::default();
        ControllerDoc {
            segments: c.segment_bounds,
            gains: c.gains,
            joint_gains: c.joint_gains,
            loop_rate: c.loop_rate,
            windup_limit: c.windup_limit,
            scurve: c.scurve,
        }
    }
}

impl Document {
    fn into_config(self) -> Result<Config, ConfigError> {
        let Document {
            links,
            offsets,
            rail,
            joints,
            limits,
            body,
            controller,
            plant,
        } = self;
        let split_limit = 2.0 * links.d1 - offsets.e3 + offsets.e2;
        let params = StructuralParams {
            d1: links.d1,
            d2: links.d2,
            d3: links.d3,
            d4: links.d4,
            e1: offsets.e1,
            e2: offsets.e2,
            e3: offsets.e3,
            e4: offsets.e4,
            h: offsets.h,
            rail_length: rail.length,
            carriage_allowance: rail.carriage_allowance.unwrap_or(0.0),
            a_min: rail.a_min.unwrap_or(0.0),
            a_max: rail.a_max.unwrap_or(800.0),
            b_min: rail.b_min.unwrap_or(60.0),
            b_max: rail.b_max.unwrap_or(split_limit),
            theta_limits: [
                JointRange::new(joints.theta1[0], joints.theta1[1]),
                JointRange::new(joints.theta2[0], joints.theta2[1]),
                JointRange::new(joints.theta3[0], joints.theta3[1]),
                JointRange::new(joints.theta4[0], joints.theta4[1]),
            ],
            v_max_slider: limits.v_slider,
            v_max_joint: limits.v_joint,
            accel_max: limits.accel,
            jerk_max: limits.jerk,
            stack_allowance: body.stack_allowance.unwrap_or(links.d2),
        };
        params.validate()?;
        let controller = ControllerConfig {
            segment_bounds: controller.segments,
            gains: controller.gains,
            joint_gains: controller.joint_gains,
            loop_rate: controller.loop_rate,
            windup_limit: controller.windup_limit,
            scurve: controller.scurve,
        };
        controller.validate()?;
        let plant = plant.unwrap_or_default();
        plant.validate()?;
        Ok(Config {
            params,
            controller,
            plant,
        })
    }

    fn from_config(c: &Config) -> Document {
        let p = &c.params;
        let t = &p.theta_limits;
        Document {
            links: LinksDoc {
                d1: p.d1,
                d2: p.d2,
                d3: p.d3,
                d4: p.d4,
            },
            offsets: OffsetsDoc {
                e1: p.e1,
                e2: p.e2,
                e3: p.e3,
                e4: p.e4,
                h: p.h,
            },
            rail: RailDoc {
                length: p.rail_length,
                a_min: Some(p.a_min),
                a_max: Some(p.a_max),
                b_min: Some(p.b_min),
                b_max: Some(p.b_max),
                carriage_allowance: Some(p.carriage_allowance),
            },
            joints: JointsDoc {
                theta1: [t[0].min, t[0].max],
                theta2: [t[1].min, t[1].max],
                theta3: [t[2].min, t[2].max],
                theta4: [t[3].min, t[3].max],
            },
            limits: LimitsDoc {
                v_slider: p.v_max_slider,
                v_joint: p.v_max_joint,
                accel: p.accel_max,
                jerk: p.jerk_max,
            },
            body: BodyDoc {
                stack_allowance: Some(p.stack_allowance),
            },
            controller: ControllerDoc {
                segments: c.controller.segment_bounds.clone(),
                gains: c.controller.gains.clone(),
                joint_gains: c.controller.joint_gains,
                loop_rate: c.controller.loop_rate,
                windup_limit: c.controller.windup_limit,
                scurve: c.controller.scurve,
            },
            plant: Some(c.plant),
        }
    }
}
