//! Test oracles written without the library's transform code.
#![allow(dead_code)]

use hybrid_arm::model::{validate_state, JointState, StructuralParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type M4 = [[f64; 4]; 4];

fn mul(a: &M4, b: &M4) -> M4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn identity() -> M4 {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

fn rot_z(t: f64) -> M4 {
    let mut m = identity();
    m[0][0] = t.cos();
    m[0][1] = -t.sin();
    m[1][0] = t.sin();
    m[1][1] = t.cos();
    m
}

fn rot_x(t: f64) -> M4 {
    let mut m = identity();
    m[1][1] = t.cos();
    m[1][2] = -t.sin();
    m[2][1] = t.sin();
    m[2][2] = t.cos();
    m
}

fn trans(x: f64, y: f64, z: f64) -> M4 {
    let mut m = identity();
    m[0][3] = x;
    m[1][3] = y;
    m[2][3] = z;
    m
}

/// Standard DH link: `Rz(θ) Tz(d) Tx(a) Rx(α)`.
fn dh(theta: f64, d: f64, a: f64, alpha: f64) -> M4 {
    [rot_z(theta), trans(0.0, 0.0, d), trans(a, 0.0, 0.0), rot_x(alpha)]
        .iter()
        .fold(identity(), |acc, m| mul(&acc, m))
}

/// Tool pose in the rail frame built from elementary transforms: the
/// platform translation, then joint 1, link 2 along x before joint 2, and
/// two standard DH links with a quarter-turn twist for the wrist.
pub fn oracle_fk(q: &JointState, p: &StructuralParams) -> M4 {
    let half = (q.b + p.e3 - p.e2) / 2.0;
    let xc = p.e3 / 2.0 + q.a + half;
    let zc = (p.d1 * p.d1 - half * half).sqrt() + p.h + p.e1;
    let quarter = std::f64::consts::FRAC_PI_2;
    let chain = [
        trans(xc, p.e4, zc),
        dh(q.theta[0], 0.0, 0.0, 0.0),
        trans(p.d2, 0.0, 0.0),
        rot_z(q.theta[1]),
        dh(q.theta[2], 0.0, p.d3, quarter),
        dh(q.theta[3], p.d4, 0.0, quarter),
    ];
    chain.iter().fold(identity(), |acc, m| mul(&acc, m))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform valid state; `a` rounded to whole millimetres when `grid` is set.
pub fn random_valid_state(rng: &mut ChaCha8Rng, p: &StructuralParams, grid: bool) -> JointState {
    loop {
        let mut a = rng.random_range(p.a_min..=p.a_max);
        if grid {
            a = a.round();
        }
        let b = rng.random_range(p.b_min..=p.b_max);
        let mut theta = [0.0; 4];
        for (t, lim) in theta.iter_mut().zip(&p.theta_limits) {
            *t = rng.random_range(lim.min..=lim.max);
        }
        let q = JointState::new(a, b, theta);
        if validate_state(&q, p).is_valid() {
            return q;
        }
    }
}
