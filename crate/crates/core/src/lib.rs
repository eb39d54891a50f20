//! Kinematics, motion planning and closed-loop simulation for a hybrid
//! six-axis arm: a single-rail dual-slider parallel base carrying a
//! four-joint serial chain.

pub use nalgebra;

pub mod ik;
pub mod kinematics;
pub mod model;
pub mod motion;
pub mod simctl;
pub mod workspace;

pub use model::{
    load_params, validate_state, Config, ConfigError, ControllerConfig, JointState, PlantParams, Pose,
    StructuralParams, TargetSpec,
};
