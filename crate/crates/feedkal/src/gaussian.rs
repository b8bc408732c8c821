//! Joint-Gaussian conditioning and correlated noise sampling.
//!
//! Everything the filter does is an instance of one fact: if `(t1, t2)` are
//! jointly Gaussian, then conditionally on `t2 = z`
//!
//! ```text
//! E(t1 | z)   = m1 + P12 P22^-1 (z - m2)
//! Cov(t1 | z) = P11 - P12 P22^-1 P12'
//! ```
//!
//! This module owns that computation, the shared PSD factorization and solve
//! helpers built on it, and the sampler that draws correlated process and
//! measurement noise pairs for simulation.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Floor on the minimum eigenvalue of a symmetrized matrix for it to count as
/// positive semidefinite. Absorbs floating-point noise without letting
/// genuinely indefinite inputs through.
pub const PSD_TOL: f64 = 1e-10;

/// Relative eigenvalue bound for blocks that must be inverted: the smallest
/// eigenvalue must exceed `SOLVE_RTOL` times the largest magnitude, i.e. the
/// condition number must stay below `1 / SOLVE_RTOL`.
pub const SOLVE_RTOL: f64 = 1e-12;

/// Stream id used by [`sample_joint_noise`]; callers that need additional
/// independent draws for the same seed must use a different stream (see
/// [`seeded_rng`]).
pub const JOINT_NOISE_STREAM: u64 = 0;

/// Symmetric part `(M + M') / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (m + m.transpose())
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    symmetrize(m).symmetric_eigenvalues().min()
}

/// Whether the symmetric part of `m` is positive semidefinite within
/// [`PSD_TOL`].
pub fn is_psd(m: &DMatrix<f64>) -> bool {
    min_symmetric_eigenvalue(m) >= -PSD_TOL
}

/// Factor a symmetric positive-semidefinite matrix as `L L' = M`.
///
/// Cholesky is attempted first; when it fails (rank-deficient or merely
/// semidefinite input) the factor falls back to a symmetric
/// eigendecomposition with negative eigenvalues clamped to zero, so
/// covariances that are singular by construction still factor cleanly.
pub fn psd_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = symmetrize(m);
    if sym.nrows() == 0 {
        return Ok(sym);
    }
    let min_eig = sym.symmetric_eigenvalues().min();
    if min_eig < -PSD_TOL {
        return Err(Error::NotPsd {
            name: "psd_factor input".into(),
            min_eig,
        });
    }
    if let Some(chol) = sym.clone().cholesky() {
        return Ok(chol.l());
    }
    let eig = sym.symmetric_eigen();
    let mut l = eig.eigenvectors;
    for (j, lam) in eig.eigenvalues.iter().enumerate() {
        let scale = lam.max(0.0).sqrt();
        for i in 0..l.nrows() {
            l[(i, j)] *= scale;
        }
    }
    Ok(l)
}

/// Eigendecomposition-backed solver for the symmetric positive-definite
/// blocks the filter inverts (innovation covariances, the conditioning block
/// of a joint Gaussian).
///
/// Construction fails with [`Error::SingularInnovation`] when the block is
/// singular or its condition number exceeds `1 / SOLVE_RTOL`; every later
/// solve against the factor is then unconditionally safe.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    vecs: DMatrix<f64>,
    inv_vals: DVector<f64>,
}

impl SpdFactor {
    pub fn new(m: &DMatrix<f64>, block: &str) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::SingularInnovation {
                block: block.to_string(),
            });
        }
        let eig = symmetrize(m).symmetric_eigen();
        let max_mag = eig.eigenvalues.iter().fold(0.0_f64, |a, &l| a.max(l.abs()));
        let min = eig.eigenvalues.min();
        if !(min > max_mag * SOLVE_RTOL) {
            return Err(Error::SingularInnovation {
                block: block.to_string(),
            });
        }
        Ok(Self {
            vecs: eig.eigenvectors,
            inv_vals: eig.eigenvalues.map(|l| 1.0 / l),
        })
    }

    /// `M^-1 rhs` for a matrix right-hand side.
    pub fn solve_mat(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let mut y = self.vecs.transpose() * rhs;
        for (i, inv) in self.inv_vals.iter().enumerate() {
            let mut row = y.row_mut(i);
            row *= *inv;
        }
        &self.vecs * y
    }

    /// `M^-1 rhs` for a vector right-hand side.
    pub fn solve_vec(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut y = self.vecs.transpose() * rhs;
        for (i, inv) in self.inv_vals.iter().enumerate() {
            y[i] *= *inv;
        }
        &self.vecs * y
    }
}

/// A Gaussian distribution with explicit mean and covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl Gaussian {
    /// Builds a Gaussian after checking that `cov` is square, matches the
    /// mean's length, and is PSD within [`PSD_TOL`].
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != cov.ncols() || cov.nrows() != mean.len() {
            return Err(Error::Dimension(format!(
                "Gaussian mean has length {} but covariance is {}x{}",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        let min_eig = min_symmetric_eigenvalue(&cov);
        if min_eig < -PSD_TOL {
            return Err(Error::NotPsd {
                name: "Gaussian covariance".into(),
                min_eig,
            });
        }
        Ok(Self { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Partitioned representation of a joint Gaussian over `(t1, t2)`:
/// mean blocks `m1`, `m2` and covariance blocks `P11`, `P12`, `P22` with
/// `Cov(t1, t2) = P12`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPartition {
    pub mean1: DVector<f64>,
    pub mean2: DVector<f64>,
    pub p11: DMatrix<f64>,
    pub p12: DMatrix<f64>,
    pub p22: DMatrix<f64>,
}

impl JointPartition {
    /// Builds a partition after checking block dimensions and that the
    /// assembled joint covariance is PSD within [`PSD_TOL`].
    pub fn new(
        mean1: DVector<f64>,
        mean2: DVector<f64>,
        p11: DMatrix<f64>,
        p12: DMatrix<f64>,
        p22: DMatrix<f64>,
    ) -> Result<Self> {
        let (n1, n2) = (mean1.len(), mean2.len());
        let blocks_ok = p11.shape() == (n1, n1)
            && p12.shape() == (n1, n2)
            && p22.shape() == (n2, n2);
        if !blocks_ok {
            return Err(Error::Dimension(format!(
                "joint partition blocks do not match mean lengths ({n1}, {n2}): \
                 P11 is {}x{}, P12 is {}x{}, P22 is {}x{}",
                p11.nrows(),
                p11.ncols(),
                p12.nrows(),
                p12.ncols(),
                p22.nrows(),
                p22.ncols()
            )));
        }
        let part = Self {
            mean1,
            mean2,
            p11,
            p12,
            p22,
        };
        let min_eig = min_symmetric_eigenvalue(&part.assemble_cov());
        if min_eig < -PSD_TOL {
            return Err(Error::NotPsd {
                name: "joint covariance [[P11, P12], [P12', P22]]".into(),
                min_eig,
            });
        }
        Ok(part)
    }

    /// The assembled joint covariance `[[P11, P12], [P12', P22]]`.
    pub fn assemble_cov(&self) -> DMatrix<f64> {
        let (n1, n2) = (self.mean1.len(), self.mean2.len());
        let mut joint = DMatrix::zeros(n1 + n2, n1 + n2);
        joint.view_mut((0, 0), (n1, n1)).copy_from(&self.p11);
        joint.view_mut((0, n1), (n1, n2)).copy_from(&self.p12);
        joint
            .view_mut((n1, 0), (n2, n1))
            .copy_from(&self.p12.transpose());
        joint.view_mut((n1, n1), (n2, n2)).copy_from(&self.p22);
        joint
    }
}

/// Conditions the first block on an observation of the second:
/// returns the Gaussian of `t1 | t2 = z2`.
///
/// Fails with [`Error::SingularInnovation`] when `P22` is singular within
/// [`SOLVE_RTOL`].
pub fn condition(joint: &JointPartition, z2: &DVector<f64>) -> Result<Gaussian> {
    if z2.len() != joint.mean2.len() {
        return Err(Error::Dimension(format!(
            "observation has length {} but the conditioned block has length {}",
            z2.len(),
            joint.mean2.len()
        )));
    }
    if z2.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("observation z2".into()));
    }
    let factor = SpdFactor::new(&joint.p22, "P22")?;
    let mean = &joint.mean1 + &joint.p12 * factor.solve_vec(&(z2 - &joint.mean2));
    let cov = symmetrize(&(&joint.p11 - &joint.p12 * factor.solve_mat(&joint.p12.transpose())));
    Ok(Gaussian { mean, cov })
}

/// Deterministically seeded generator. Stream [`JOINT_NOISE_STREAM`] is
/// reserved for [`sample_joint_noise`]; callers that need further independent
/// reproducible draws for the same seed (e.g. disturbance-bias increments in
/// simulation) take a distinct stream id.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `count` correlated pairs `(w, v)` from the joint noise distribution
/// with covariance `[[Q, N], [N', R]]`.
///
/// Returns `(W, V)` where row `k` of `W` is the process-noise draw of step
/// `k` and row `k` of `V` the matching measurement-noise draw. Identical
/// seeds reproduce identical draws.
pub fn sample_joint_noise(
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    n: &DMatrix<f64>,
    count: usize,
    seed: u64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let nw = q.nrows();
    let nz = r.nrows();
    if q.ncols() != nw || r.ncols() != nz || n.shape() != (nw, nz) {
        return Err(Error::Dimension(format!(
            "joint noise blocks inconsistent: Q is {}x{}, R is {}x{}, N is {}x{}",
            q.nrows(),
            q.ncols(),
            r.nrows(),
            r.ncols(),
            n.nrows(),
            n.ncols()
        )));
    }
    let mut joint = DMatrix::zeros(nw + nz, nw + nz);
    joint.view_mut((0, 0), (nw, nw)).copy_from(q);
    joint.view_mut((0, nw), (nw, nz)).copy_from(n);
    joint.view_mut((nw, 0), (nz, nw)).copy_from(&n.transpose());
    joint.view_mut((nw, nw), (nz, nz)).copy_from(r);

    let min_eig = min_symmetric_eigenvalue(&joint);
    if min_eig < -PSD_TOL {
        return Err(Error::NotPsd {
            name: "joint noise covariance [[Q, N], [N', R]]".into(),
            min_eig,
        });
    }
    let l = psd_factor(&joint)?;

    let mut rng = seeded_rng(seed, JOINT_NOISE_STREAM);
    let mut w = DMatrix::zeros(count, nw);
    let mut v = DMatrix::zeros(count, nz);
    let mut eps = DVector::zeros(nw + nz);
    for k in 0..count {
        for e in eps.iter_mut() {
            *e = rng.sample(StandardNormal);
        }
        let draw = &l * &eps;
        for i in 0..nw {
            w[(k, i)] = draw[i];
        }
        for i in 0..nz {
            v[(k, i)] = draw[nw + i];
        }
    }
    Ok((w, v))
}
