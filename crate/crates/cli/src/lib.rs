//! Command-line front end. Every subcommand parses its flags, calls into
//! `hybrid_arm` and formats the result.
//!
//! Exit status: 0 on success, 1 when the arm cannot do what was asked
//! (unreachable target, infeasible maneuver), 2 for usage, configuration and
//! file errors.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use hybrid_arm::ik::{
    middle_candidate, select_solution, solve_full, weighted_distance, write_candidates, default_weights,
    IkSolutions, Sweep,
};
use hybrid_arm::kinematics::full_fk;
use hybrid_arm::nalgebra::Vector3;
use hybrid_arm::model::{validate_state, Config, JointState, TargetSpec};
use hybrid_arm::motion::{
    interpolate_line, plan_duck_under, plan_pose_hold, plan_reorient, time_parameterize, DuckOptions,
    JointTrajectory, LineOptions, MotionError, ReorientOptions,
};
use hybrid_arm::simctl::{run_tracking, SimError};
use hybrid_arm::workspace::{envelope, export_cloud, sample_workspace, voxel_volume, write_metadata, CloudMetadata};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Usage(_) | CliError::Config(_) => 2,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn motion_err(e: MotionError) -> CliError {
    if e.is_domain() {
        CliError::Domain(e.to_string())
    } else {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "hybrid-arm", about = "Kinematics, planning and simulation for a rail-mounted hybrid arm")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Read and print joint angles in degrees.
    #[arg(long)]
    deg: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tool pose for a joint state: 9 rotation entries (row-major), then x y z.
    Fk {
        #[command(flatten)]
        common: Common,
        /// a,b,theta1,theta2,theta3,theta4
        #[arg(long, allow_hyphen_values = true)]
        state: String,
    },
    /// Candidate joint states for a tool position.
    Ik {
        #[command(flatten)]
        common: Common,
        /// x,y,z in mm
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[arg(long, allow_hyphen_values = true)]
        theta3: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta4: f64,
        /// start,end,step of the slider-1 sweep in mm
        #[arg(long, allow_hyphen_values = true)]
        sweep: Option<String>,
        /// State to stay near when selecting a solution.
        #[arg(long, allow_hyphen_values = true)]
        current: Option<String>,
        /// Candidate CSV destination; printed when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo point cloud of the reachable workspace.
    Workspace {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Voxel edge for the volume estimate, mm.
        #[arg(long, default_value_t = 10.0)]
        voxel: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan a trajectory.
    Plan {
        #[command(subcommand)]
        kind: PlanKind,
    },
    /// Track a trajectory with the closed-loop simulation.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        traj: PathBuf,
        /// Tracking log CSV.
        #[arg(long)]
        out: PathBuf,
        /// Summary JSON; printed either way.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Overrides the configured loop rate, Hz.
        #[arg(long)]
        loop_rate: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
enum PlanKind {
    /// Straight tool path between two points.
    Line {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        theta3: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        theta4: f64,
        #[arg(long, default_value_t = 10)]
        points: usize,
        /// Arm state before the move.
        #[arg(long, allow_hyphen_values = true)]
        current: Option<String>,
        /// Emit only the waypoints instead of samples at the control rate.
        #[arg(long)]
        waypoints: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split, pass under an obstacle, rise.
    Duck {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        state: String,
        /// Obstacle underside height, mm.
        #[arg(long, allow_hyphen_values = true)]
        clearance: f64,
        /// Slider-1 position to travel to, mm.
        #[arg(long, allow_hyphen_values = true)]
        to_a: f64,
        #[arg(long, default_value_t = 10.0)]
        margin: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hold the tool pose while the base moves along the rail.
    Hold {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        state: String,
        /// Base speed along the rail, mm/s.
        #[arg(long, allow_hyphen_values = true)]
        velocity: f64,
        #[arg(long)]
        duration: f64,
        /// Sample period; the control period when omitted.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Turn the wrist about a fixed tool point.
    Reorient {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        state: String,
        #[arg(long, allow_hyphen_values = true)]
        theta3: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta4: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Pivot x,y,z; the tool point of --state when omitted.
        #[arg(long, allow_hyphen_values = true)]
        about: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: Option<&Path>) -> Result<Config, CliError> {
    match path {
        None => Ok(Config::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            Config::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }
}

fn parse_list<const N: usize>(flag: &str, text: &str) -> Result<[f64; N], CliError> {
    let values: Vec<f64> = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("--{flag} {text:?}: {e}")))?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| CliError::Usage(format!("--{flag} expects {N} comma-separated numbers, got {}", v.len())))
}

fn angle_in(value: f64, deg: bool) -> f64 {
    if deg {
        value.to_radians()
    } else {
        value
    }
}

fn angle_out(value: f64, deg: bool) -> f64 {
    if deg {
        value.to_degrees()
    } else {
        value
    }
}

fn parse_state(flag: &str, text: &str, deg: bool) -> Result<JointState, CliError> {
    let v = parse_list::<6>(flag, text)?;
    Ok(JointState::new(v[0], v[1], [2, 3, 4, 5].map(|i| angle_in(v[i], deg))))
}

fn format_state(q: &JointState, deg: bool) -> String {
    let mut s = format!("{},{}", q.a, q.b);
    for t in q.theta {
        let _ = write!(s, ",{}", angle_out(t, deg));
    }
    s
}

fn write_file(path: &Path, body: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    body(&mut buf).map_err(config_err)?;
    std::fs::write(path, buf).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn export_trajectory(traj: &JointTrajectory, path: &Path) -> Result<(), CliError> {
    traj.export(path).map_err(config_err)
}

/// Runs one command line (program name first) and writes its report to
/// `stdout`.
pub fn run<W: Write>(argv: &[String], stdout: &mut W) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                write!(stdout, "{e}").map_err(config_err)?;
                return Ok(());
            }
            return Err(CliError::Usage(e.to_string()));
        }
    };
    let mut out = String::new();
    match cli.command {
        Command::Fk { common, state } => {
            let cfg = load_config(common.config.as_deref())?;
            let q = parse_state("state", &state, common.deg)?;
            let pose = full_fk(&q, &cfg.params).map_err(|e| CliError::Domain(e.to_string()))?;
            let numbers: Vec<String> = pose.to_row_major12().iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", numbers.join(" ")).unwrap();
        }
        Command::Ik {
            common,
            target,
            theta3,
            theta4,
            sweep,
            current,
            out: dest,
        } => {
            let cfg = load_config(common.config.as_deref())?;
            let p = &cfg.params;
            let [x, y, z] = parse_list::<3>("target", &target)?;
            let spec = TargetSpec::world(x, y, z, angle_in(theta3, common.deg), angle_in(theta4, common.deg));
            let sweep = match sweep {
                Some(text) => {
                    let [s, e, step] = parse_list::<3>("sweep", &text)?;
                    Sweep::new(s, e, step)
                }
                None => Sweep::default(),
            };
            let solutions: IkSolutions = solve_full(&spec, p, sweep).map_err(|e| CliError::Usage(e.to_string()))?;
            if solutions.is_empty() {
                return Err(CliError::Domain(format!("no solution: {}", solutions.failure_summary())));
            }
            let selected = match current {
                Some(text) => {
                    let q = parse_state("current", &text, common.deg)?;
                    select_solution(&solutions.candidates, &q, &default_weights(p))
                }
                None => middle_candidate(&solutions.candidates),
            }
            .map_err(|e| CliError::Domain(e.to_string()))?;
            match dest {
                Some(path) => write_file(&path, |buf| write_candidates(&solutions.candidates, buf))?,
                None => {
                    let mut buf = Vec::new();
                    write_candidates(&solutions.candidates, &mut buf).map_err(config_err)?;
                    out.push_str(&String::from_utf8(buf).expect("ascii"));
                }
            }
            writeln!(
                out,
                "selected {} {} error_mm {} candidates {}",
                format_state(&selected.state, common.deg),
                selected.branch,
                selected.position_error,
                solutions.candidates.len()
            )
            .unwrap();
        }
        Command::Workspace {
            common,
            n,
            seed,
            voxel,
            out: dest,
        } => {
            let cfg = load_config(common.config.as_deref())?;
            let p = &cfg.params;
            let cloud = sample_workspace(p, n, seed).map_err(config_err)?;
            export_cloud(&cloud, &dest).map_err(config_err)?;
            let mut meta_path = dest.clone().into_os_string();
            meta_path.push(".meta.json");
            write_metadata(&CloudMetadata::new(&cloud, p), Path::new(&meta_path)).map_err(config_err)?;
            let env = envelope(&cloud).map_err(config_err)?;
            let volume = voxel_volume(&cloud, voxel).map_err(config_err)?;
            let span = env.span();
            writeln!(out, "points {}", cloud.points.len()).unwrap();
            writeln!(out, "min {} {} {}", env.min.x, env.min.y, env.min.z).unwrap();
            writeln!(out, "max {} {} {}", env.max.x, env.max.y, env.max.z).unwrap();
            writeln!(out, "span {} {} {}", span.x, span.y, span.z).unwrap();
            writeln!(out, "volume_mm3 {volume} voxel_mm {voxel}").unwrap();
        }
        Command::Plan { kind } => plan(kind, &mut out)?,
        Command::Simulate {
            common,
            traj,
            out: dest,
            summary,
            loop_rate,
        } => {
            let mut cfg = load_config(common.config.as_deref())?;
            if let Some(rate) = loop_rate {
                cfg.controller.loop_rate = rate;
            }
            let plan = JointTrajectory::import(&traj, &cfg.params).map_err(config_err)?;
            let report = run_tracking(&plan, &cfg.controller, &cfg.plant, &cfg.params).map_err(|e| match e {
                SimError::Divergence { .. } | SimError::Kinematics { .. } => {
                    CliError::Domain(e.to_string())
                }
                other => CliError::Usage(other.to_string()),
            })?;
            report.export_log(&dest).map_err(config_err)?;
            let json = serde_json::to_string_pretty(&report.summary()).expect("summary serializes");
            if let Some(path) = summary {
                std::fs::write(&path, format!("{json}\n"))
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            }
            writeln!(out, "{json}").unwrap();
        }
    }
    stdout.write_all(out.as_bytes()).map_err(config_err)
}

fn plan(kind: PlanKind, out: &mut String) -> Result<(), CliError> {
    match kind {
        PlanKind::Line {
            common,
            from,
            to,
            theta3,
            theta4,
            points,
            current,
            waypoints,
            out: dest,
        } => {
            let cfg = load_config(common.config.as_deref())?;
            let p = &cfg.params;
            let (t3, t4) = (angle_in(theta3, common.deg), angle_in(theta4, common.deg));
            let [x0, y0, z0] = parse_list::<3>("from", &from)?;
            let [x1, y1, z1] = parse_list::<3>("to", &to)?;
            let options = LineOptions {
                seed: current.map(|c| parse_state("current", &c, common.deg)).transpose()?,
                limits: cfg.controller.scurve.slider,
                min_dt: cfg.controller.dt(),
                ..LineOptions::default()
            };
            let sparse = interpolate_line(
                &TargetSpec::world(x0, y0, z0, t3, t4),
                &TargetSpec::world(x1, y1, z1, t3, t4),
                points,
                p,
                &options,
            )
            .map_err(motion_err)?;
            let traj = if waypoints {
                sparse
            } else {
                let states: Vec<JointState> = sparse.states().copied().collect();
                time_parameterize(&states, &cfg.controller.scurve.slider, cfg.controller.dt(), p)
                    .map_err(motion_err)?
            };
            export_trajectory(&traj, &dest)?;
            writeln!(out, "points {} duration_s {}", traj.len(), traj.duration()).unwrap();
        }
        PlanKind::Duck {
            common,
            state,
            clearance,
            to_a,
            margin,
            out: dest,
        } => {
            let cfg = load_config(common.config.as_deref())?;
            let q = parse_state("state", &state, common.deg)?;
            let options = DuckOptions {
                margin,
                dt: cfg.controller.dt(),
                limits: cfg.controller.scurve.slider,
            };
            let plan = plan_duck_under(&q, clearance, to_a, &cfg.params, &options).map_err(motion_err)?;
            export_trajectory(&plan.trajectory, &dest)?;
            writeln!(
                out,
                "points {} duration_s {} split_b_mm {} phases {}..{} {}..{} {}..{}",
                plan.trajectory.len(),
                plan.trajectory.duration(),
                plan.split_b,
                plan.phases[0].start,
                plan.phases[0].end,
                plan.phases[1].start,
                plan.phases[1].end,
                plan.phases[2].start,
                plan.phases[2].end
            )
            .unwrap();
        }
        PlanKind::Hold {
            common,
            state,
            velocity,
            duration,
            dt,
            out: dest,
        } => {
            let cfg = load_config(common.config.as_deref())?;
            let q = parse_state("state", &state, common.deg)?;
            let dt = dt.unwrap_or_else(|| cfg.controller.dt());
            let plan = plan_pose_hold(&q, velocity, duration, dt, &cfg.params).map_err(motion_err)?;
            export_trajectory(&plan.trajectory, &dest)?;
            writeln!(
                out,
                "points {} t_end_s {} limit {}",
                plan.trajectory.len(),
                plan.t_end,
                plan.limit
            )
            .unwrap();
        }
        PlanKind::Reorient {
            common,
            state,
            theta3,
            theta4,
            steps,
            about,
            out: dest,
        } => {
            let cfg = load_config(common.config.as_deref())?;
            let p = &cfg.params;
            let q = parse_state("state", &state, common.deg)?;
            let verdict = validate_state(&q, p);
            if !verdict.is_valid() {
                return Err(CliError::Usage(format!("--state invalid: {:?}", verdict.violations)));
            }
            let pivot = match about {
                Some(text) => nalgebra_vector(parse_list::<3>("about", &text)?),
                None => full_fk(&q, p).map_err(|e| CliError::Usage(e.to_string()))?.translation,
            };
            let options = ReorientOptions {
                min_dt: cfg.controller.dt(),
                ..ReorientOptions::default()
            };
            let traj = plan_reorient(
                &pivot,
                &q,
                angle_in(theta3, common.deg),
                angle_in(theta4, common.deg),
                steps,
                p,
                &options,
            )
            .map_err(motion_err)?;
            export_trajectory(&traj, &dest)?;
            let start = traj.points.first().map(|pt| pt.q).unwrap_or(q);
            let end = traj.points.last().map(|pt| pt.q).unwrap_or(q);
            writeln!(
                out,
                "points {} duration_s {} joint_travel {}",
                traj.len(),
                traj.duration(),
                weighted_distance(&start, &end, &default_weights(p))
            )
            .unwrap();
        }
    }
    Ok(())
}

fn nalgebra_vector(v: [f64; 3]) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

/// Runs `argv` against the process's stdout and stderr and returns the
/// exit status.
pub fn execute(argv: &[String]) -> i32 {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(argv, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string();
            if msg.starts_with("error:") {
                eprint!("{msg}");
            } else {
                eprintln!("error: {msg}");
            }
            e.exit_code()
        }
    }
}
