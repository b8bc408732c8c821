//! Shared fixtures for the integration suites: the bundled feedthrough
//! plant and a seeded generator of random well-posed systems.

#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{dmatrix, DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use feedkal::gaussian::seeded_rng;
use feedkal::DiscreteSystem;

/// RNG stream for fixture generation, distinct from the library's
/// simulation streams so fixtures never alias scenario draws.
pub const FIXTURE_STREAM: u64 = 101;

/// The bundled scalar plant with full process-noise feedthrough: one leaky
/// state, `y = (plant output, the disturbance itself)`, one measurement
/// that sees the disturbance directly.
pub fn feedthrough_system() -> DiscreteSystem {
    DiscreteSystem::new(
        dmatrix![0.99],
        DMatrix::zeros(1, 0),
        dmatrix![0.2],
        dmatrix![1.0; 0.0],
        DMatrix::zeros(2, 0),
        dmatrix![1.0; 1.0],
        dmatrix![1.0],
        DMatrix::zeros(1, 0),
        dmatrix![1.0],
        dmatrix![1.0],
        dmatrix![0.1],
        DMatrix::zeros(1, 1),
        0.1,
    )
    .expect("bundled system is well-posed")
}

pub fn feedthrough_json() -> PathBuf {
    concat!(env!("CARGO_MANIFEST_DIR"), "/systems/feedthrough.json").into()
}

pub fn feedthrough_continuous_json() -> PathBuf {
    concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/systems/feedthrough_continuous.json"
    )
    .into()
}

pub fn randn_mat(rng: &mut ChaCha12Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

pub fn randn_vec(rng: &mut ChaCha12Rng, len: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(len, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// A random PSD matrix `L L' + 1e-6 I`.
pub fn random_psd(rng: &mut ChaCha12Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let l = randn_mat(rng, n, n, scale);
    &l * l.transpose() + DMatrix::identity(n, n) * 1e-6
}

fn stable_a(rng: &mut ChaCha12Rng, nx: usize) -> DMatrix<f64> {
    let mut a = randn_mat(rng, nx, nx, 1.0);
    let rho = a
        .complex_eigenvalues()
        .iter()
        .fold(0.0_f64, |m, l| m.max(l.norm()));
    let target = 0.3 + 0.6 * rng.random::<f64>();
    if rho > 1e-9 {
        a *= target / rho;
    }
    a
}

/// Random admissible joint noise: `[[Q, N], [N', R]] = L L' + 0.05 I`,
/// so the joint is PD and `R` alone is PD.
fn joint_noise(
    rng: &mut ChaCha12Rng,
    nw: usize,
    nz: usize,
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let m = nw + nz;
    let l = randn_mat(rng, m, m, 0.5);
    let joint = &l * l.transpose() + DMatrix::identity(m, m) * 0.05;
    let q = joint.view((0, 0), (nw, nw)).into_owned();
    let n = joint.view((0, nw), (nw, nz)).into_owned();
    let r = joint.view((nw, nw), (nz, nz)).into_owned();
    (q, r, n)
}

/// A random stable system with generic dimensions, nonzero measurement
/// feedthrough `Hm`, and nonzero cross-covariance `N`.
pub fn random_system(seed: u64) -> DiscreteSystem {
    let mut rng = seeded_rng(seed, FIXTURE_STREAM);
    let nx = rng.random_range(1..=4);
    let nu = rng.random_range(0..=2);
    let nw = rng.random_range(1..=3);
    let ny = rng.random_range(1..=3);
    let nz = rng.random_range(1..=3);

    let a = stable_a(&mut rng, nx);
    let (q, r, n) = joint_noise(&mut rng, nw, nz);
    let sys = DiscreteSystem::new(
        a,
        randn_mat(&mut rng, nx, nu, 1.0),
        randn_mat(&mut rng, nx, nw, 0.8),
        randn_mat(&mut rng, ny, nx, 1.0),
        randn_mat(&mut rng, ny, nu, 0.5),
        randn_mat(&mut rng, ny, nw, 0.8),
        randn_mat(&mut rng, nz, nx, 1.0),
        randn_mat(&mut rng, nz, nu, 0.5),
        randn_mat(&mut rng, nz, nw, 0.8),
        q,
        r,
        n,
        0.1,
    )
    .expect("random fixture must validate");
    assert!(sys.hm.amax() > 0.0 && sys.n.amax() > 0.0);
    sys
}

/// The same system with the feedthrough terms removed (`Hm = 0`, `N = 0`):
/// the regime where the corrected and legacy updates must coincide.
pub fn without_feedthrough(sys: &DiscreteSystem) -> DiscreteSystem {
    DiscreteSystem::new(
        sys.a.clone(),
        sys.b.clone(),
        sys.g.clone(),
        sys.c.clone(),
        sys.d.clone(),
        sys.h.clone(),
        sys.cm.clone(),
        sys.dm.clone(),
        DMatrix::zeros(sys.nz(), sys.nw()),
        sys.q.clone(),
        sys.r.clone(),
        DMatrix::zeros(sys.nw(), sys.nz()),
        sys.dt,
    )
    .expect("stripped fixture must validate")
}

/// A random system whose estimated output IS the measured combination
/// (`C = Cm`, `D = Dm`, `H = Hm`) with uncorrelated noises (`N = 0`).
pub fn random_matched_output_system(seed: u64) -> DiscreteSystem {
    let base = random_system(seed);
    let nz = base.nz();
    DiscreteSystem::new(
        base.a.clone(),
        base.b.clone(),
        base.g.clone(),
        base.cm.clone(),
        base.dm.clone(),
        base.hm.clone(),
        base.cm.clone(),
        base.dm.clone(),
        base.hm.clone(),
        base.q.clone(),
        base.r.clone(),
        DMatrix::zeros(base.nw(), nz),
        base.dt,
    )
    .expect("matched-output fixture must validate")
}

pub fn zero_inputs(n: usize, nu: usize) -> Vec<DVector<f64>> {
    (0..n).map(|_| DVector::zeros(nu)).collect()
}
