//! Monte Carlo workspace sampling, bounding envelopes, voxel volume and
//! point-cloud export.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::full_fk;
use crate::model::{validate_state, JointState, StructuralParams};

/// Identifier of the sampling stream recorded in cloud metadata.
pub const SAMPLER_ID: &str = "chacha8-stream-per-chunk-4096-v1";
const CHUNK: usize = 4096;
const MAX_DRAWS_PER_SAMPLE: usize = 10_000;

pub const CLOUD_HEADER: &str = "x_mm,y_mm,z_mm,a_mm,b_mm,theta1,theta2,theta3,theta4";

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("cloud is empty")]
    EmptyCloud,
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("voxel edge must be positive, got {0}")]
    BadVoxel(f64),
    #[error("joint limits admit no valid state (gave up after {0} draws)")]
    NoValidState(usize),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: malformed cloud row {row}: {reason}")]
    Malformed { path: PathBuf, row: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudPoint {
    pub position: Vector3<f64>,
    pub source: JointState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkspaceCloud {
    pub points: Vec<CloudPoint>,
    pub seed: u64,
    pub sample_count: usize,
}

impl WorkspaceCloud {
    pub fn from_points(points: Vec<CloudPoint>, seed: u64) -> Self {
        let sample_count = points.len();
        WorkspaceCloud {
            points,
            seed,
            sample_count,
        }
    }

    pub fn push(&mut self, point: CloudPoint) {
        self.points.push(point);
        self.sample_count = self.points.len();
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Sidecar describing how a cloud was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudMetadata {
    pub seed: u64,
    pub n: usize,
    pub algorithm: String,
    pub params_sha256: String,
}

impl CloudMetadata {
    pub fn new(cloud: &WorkspaceCloud, p: &StructuralParams) -> Self {
        CloudMetadata {
            seed: cloud.seed,
            n: cloud.sample_count,
            algorithm: SAMPLER_ID.to_string(),
            params_sha256: p.fingerprint(),
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

fn draw_state(rng: &mut ChaCha8Rng, p: &StructuralParams) -> Result<JointState, WorkspaceError> {
    // a and b are coupled by the rail length; reject layouts that overrun it.
    for _ in 0..MAX_DRAWS_PER_SAMPLE {
        let a = draw(rng, p.a_min, p.a_max);
        let b = draw(rng, p.b_min, p.b_max);
        let mut theta = [0.0; 4];
        for (t, range) in theta.iter_mut().zip(&p.theta_limits) {
            *t = draw(rng, range.min, range.max);
        }
        let q = JointState::new(a, b, theta);
        if validate_state(&q, p).is_valid() {
            return Ok(q);
        }
    }
    Err(WorkspaceError::NoValidState(MAX_DRAWS_PER_SAMPLE))
}

fn sample_chunk(p: &StructuralParams, seed: u64, chunk: usize, count: usize) -> Result<Vec<CloudPoint>, WorkspaceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let source = draw_state(&mut rng, p)?;
        let position = full_fk(&source, p)
            .expect("validated state has a defined pose")
            .translation;
        out.push(CloudPoint { position, source });
    }
    Ok(out)
}

/// Draws `n` joint states uniformly within all limits and maps each through
/// forward kinematics.
///
/// Sample `i` belongs to chunk `i / 4096`, and each chunk draws from its own
/// ChaCha8 stream of `seed`, so the result does not depend on how chunks are
/// scheduled across threads.
pub fn sample_workspace(p: &StructuralParams, n: usize, seed: u64) -> Result<WorkspaceCloud, WorkspaceError> {
    if n == 0 {
        return Err(WorkspaceError::NoSamples);
    }
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<CloudPoint>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(n - c * CHUNK);
            sample_chunk(p, seed, c, count)
        })
        .collect::<Result<_, _>>()?;
    let points: Vec<CloudPoint> = parts.into_iter().flatten().collect();
    Ok(WorkspaceCloud::from_points(points, seed))
}

/// Axis-aligned bounding box, mm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Envelope {
    pub fn span(&self) -> Vector3<f64> {
        self.max - self.min
    }

    pub fn contains(&self, point: &Vector3<f64>) -> bool {
        (0..3).all(|i| point[i] >= self.min[i] && point[i] <= self.max[i])
    }

    pub fn contains_box(&self, other: &Envelope) -> bool {
        self.contains(&other.min) && self.contains(&other.max)
    }
}

pub fn envelope(cloud: &WorkspaceCloud) -> Result<Envelope, WorkspaceError> {
    let first = cloud.points.first().ok_or(WorkspaceError::EmptyCloud)?.position;
    let (min, max) = cloud
        .points
        .iter()
        .fold((first, first), |(lo, hi), pt| (lo.inf(&pt.position), hi.sup(&pt.position)));
    Ok(Envelope { min, max })
}

/// Grid cell containing `position` for voxel edge `voxel`.
pub fn voxel_index(position: &Vector3<f64>, voxel: f64) -> [i64; 3] {
    [
        (position.x / voxel).floor() as i64,
        (position.y / voxel).floor() as i64,
        (position.z / voxel).floor() as i64,
    ]
}

/// Occupied-cell count times cell volume, mm³.
pub fn voxel_volume(cloud: &WorkspaceCloud, voxel: f64) -> Result<f64, WorkspaceError> {
    if !(voxel.is_finite() && voxel > 0.0) {
        return Err(WorkspaceError::BadVoxel(voxel));
    }
    if cloud.is_empty() {
        return Err(WorkspaceError::EmptyCloud);
    }
    let cells: HashSet<[i64; 3]> = cloud.points.iter().map(|pt| voxel_index(&pt.position, voxel)).collect();
    Ok(cells.len() as f64 * voxel.powi(3))
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> WorkspaceError + '_ {
    move |source| WorkspaceError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes the cloud as CSV, one row per point in sampling order.
pub fn write_cloud<W: Write>(cloud: &WorkspaceCloud, out: &mut W) -> io::Result<()> {
    writeln!(out, "{CLOUD_HEADER}")?;
    for pt in &cloud.points {
        let q = &pt.source;
        writeln!(
            out,
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            pt.position.x,
            pt.position.y,
            pt.position.z,
            q.a,
            q.b,
            q.theta[0],
            q.theta[1],
            q.theta[2],
            q.theta[3]
        )?;
    }
    Ok(())
}

pub fn export_cloud(cloud: &WorkspaceCloud, destination: &Path) -> Result<(), WorkspaceError> {
    let file = File::create(destination).map_err(io_err(destination))?;
    let mut out = BufWriter::new(file);
    write_cloud(cloud, &mut out).map_err(io_err(destination))?;
    out.flush().map_err(io_err(destination))
}

pub fn write_metadata(meta: &CloudMetadata, destination: &Path) -> Result<(), WorkspaceError> {
    let body = serde_json::to_string_pretty(meta).expect("metadata serializes");
    std::fs::write(destination, body + "\n").map_err(io_err(destination))
}

/// Reads a cloud written by [`export_cloud`]. The seed is not stored in the
/// CSV and is set to `seed`.
pub fn import_cloud(source: &Path, seed: u64) -> Result<WorkspaceCloud, WorkspaceError> {
    let mut reader = csv::Reader::from_path(source).map_err(|e| WorkspaceError::Malformed {
        path: source.to_path_buf(),
        row: 0,
        reason: e.to_string(),
    })?;
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let malformed = |reason: String| WorkspaceError::Malformed {
            path: source.to_path_buf(),
            row: i + 1,
            reason,
        };
        let record = record.map_err(|e| malformed(e.to_string()))?;
        if record.len() != 9 {
            return Err(malformed(format!("expected 9 fields, found {}", record.len())));
        }
        let mut v = [0.0; 9];
        for (slot, field) in v.iter_mut().zip(record.iter()) {
            *slot = field.trim().parse().map_err(|e| malformed(format!("{field:?}: {e}")))?;
        }
        points.push(CloudPoint {
            position: Vector3::new(v[0], v[1], v[2]),
            source: JointState::new(v[3], v[4], [v[5], v[6], v[7], v[8]]),
        });
    }
    Ok(WorkspaceCloud::from_points(points, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::JointRange;

    #[test]
    fn sample_count_and_determinism() {
        let p = StructuralParams::default();
        let a = sample_workspace(&p, 1000, 7).unwrap();
        let b = sample_workspace(&p, 1000, 7).unwrap();
        assert_eq!(a.points.len(), 1000);
        assert_eq!(a.sample_count, 1000);
        assert_eq!(a, b);
        let c = sample_workspace(&p, 1000, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn prefix_of_larger_run_matches_smaller_run() {
        let p = StructuralParams::default();
        let small = sample_workspace(&p, 5000, 3).unwrap();
        let large = sample_workspace(&p, 9000, 3).unwrap();
        assert_eq!(&large.points[..4096], &small.points[..4096]);
    }

    #[test]
    fn collapsed_limits_give_the_single_state() {
        let mut p = StructuralParams::default();
        p.a_min = 120.0;
        p.a_max = 120.0;
        p.b_min = 300.0;
        p.b_max = 300.0;
        let fixed = [0.1, -0.2, 0.3, -0.4];
        for (r, t) in p.theta_limits.iter_mut().zip(fixed) {
            *r = JointRange::new(t, t);
        }
        let cloud = sample_workspace(&p, 1, 1).unwrap();
        let q = JointState::new(120.0, 300.0, fixed);
        assert_eq!(cloud.points[0].source, q);
        assert_eq!(cloud.points[0].position, full_fk(&q, &p).unwrap().translation);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(matches!(
            sample_workspace(&StructuralParams::default(), 0, 1),
            Err(WorkspaceError::NoSamples)
        ));
    }

    fn point(x: f64, y: f64, z: f64) -> CloudPoint {
        CloudPoint {
            position: Vector3::new(x, y, z),
            source: JointState::default(),
        }
    }

    #[test]
    fn single_point_envelope_has_zero_extent() {
        let cloud = WorkspaceCloud::from_points(vec![point(1.0, -2.0, 3.0)], 0);
        let env = envelope(&cloud).unwrap();
        assert_eq!(env.min, env.max);
        assert_eq!(env.span(), Vector3::zeros());
        assert!(matches!(
            envelope(&WorkspaceCloud::from_points(vec![], 0)),
            Err(WorkspaceError::EmptyCloud)
        ));
    }

    #[test]
    fn one_cell_volume() {
        let cloud = WorkspaceCloud::from_points(vec![point(1.0, 1.0, 1.0), point(9.0, 2.0, 9.9), point(5.0, 5.0, 5.0)], 0);
        assert_eq!(voxel_volume(&cloud, 10.0).unwrap(), 1000.0);
        assert!(voxel_volume(&cloud, 0.0).is_err());
        assert!(voxel_volume(&WorkspaceCloud::from_points(vec![], 0), 1.0).is_err());
    }

    #[test]
    fn negative_coordinates_fall_in_their_own_cells() {
        let cloud = WorkspaceCloud::from_points(vec![point(-0.5, 0.5, 0.5), point(0.5, 0.5, 0.5)], 0);
        assert_eq!(voxel_volume(&cloud, 1.0).unwrap(), 2.0);
    }

    #[test]
    fn export_line_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cloud.csv");
        let cloud = WorkspaceCloud::from_points(vec![point(1.0, 2.0, 3.0); 3], 0);
        export_cloud(&cloud, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(text.lines().next().unwrap(), CLOUD_HEADER);

        export_cloud(&WorkspaceCloud::from_points(vec![], 0), &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{CLOUD_HEADER}\n"));
    }

    #[test]
    fn export_surfaces_the_path_on_failure() {
        let cloud = WorkspaceCloud::from_points(vec![], 0);
        let bad = Path::new("/nonexistent-dir/cloud.csv");
        let err = export_cloud(&cloud, bad).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/cloud.csv"));
    }

    #[test]
    fn export_import_round_trip() {
        let p = StructuralParams::default();
        let cloud = sample_workspace(&p, 200, 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cloud.csv");
        export_cloud(&cloud, &path).unwrap();
        let back = import_cloud(&path, 11).unwrap();
        assert_eq!(back.points.len(), 200);
        for (a, b) in cloud.points.iter().zip(&back.points) {
            assert!((a.position - b.position).norm() < 1e-9);
            let refk = full_fk(&b.source, &p).unwrap().translation;
            assert!((refk - b.position).norm() < 1e-9);
        }
    }

    #[test]
    fn metadata_records_seed_and_algorithm() {
        let p = StructuralParams::default();
        let cloud = sample_workspace(&p, 10, 99).unwrap();
        let meta = CloudMetadata::new(&cloud, &p);
        assert_eq!(meta.seed, 99);
        assert_eq!(meta.n, 10);
        assert_eq!(meta.algorithm, SAMPLER_ID);
        assert_eq!(meta.params_sha256.len(), 64);
    }
}
