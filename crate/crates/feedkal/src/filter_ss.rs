//! Steady-state covariance solver and the constant-gain filter built on it.
//!
//! For a detectable plant the prediction covariance of [`crate::filter_tv`]
//! converges; its limit `P*` is the fixed point of the covariance recursion
//! ([`crate::filter_tv::riccati_step`]). Freezing the gains at `P*` turns the
//! filter into a plain LTI system
//!
//! ```text
//! xp[n+1] = (A - M_AG Cm) xp[n] + M_AG z[n] + (B - M_AG Dm) u[n]
//! x_post  = (I - Kg Cm)  xp + Kg  z - Kg  Dm u
//! y_post  = (C - M_CH Cm) xp + M_CH z + (D - M_CH Dm) u     (corrected)
//! y_post  = (C - C Kg Cm) xp + C Kg z + (D - C Kg Dm) u     (legacy)
//! ```
//!
//! which is what gets deployed when per-step covariance updates are not worth
//! their cost. [`SteadyFilter::build`] precomputes those constant matrices.

use nalgebra::{DMatrix, DVector};

use crate::filter_tv::{self, EstimateFrame, GainSet, OutputMode};
use crate::gaussian;
use crate::model::DiscreteSystem;
use crate::{Error, Result};

/// Default absolute tolerance on the max-norm update for
/// [`solve_riccati_default`].
pub const DEFAULT_TOL: f64 = 1e-12;

/// Default iteration cap for [`solve_riccati_default`].
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Relative bound the fixed-point residual must satisfy for
/// [`SteadyFilter::build`] to accept a covariance as a steady state.
pub const RESIDUAL_RTOL: f64 = 1e-9;

/// A converged steady-state covariance with its convergence evidence.
#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    /// Fixed point of the prediction-covariance recursion.
    pub p_star: DMatrix<f64>,
    /// Max-norm residual `|f(P*) - P*|` at the returned solution.
    pub residual: f64,
    /// Iterations actually performed.
    pub iterations: usize,
}

/// Iterates the covariance recursion from `p0` until the max-norm update
/// falls below `tol`, failing with [`Error::RiccatiNotConverged`] at the
/// iteration cap.
pub fn solve_riccati(
    sys: &DiscreteSystem,
    p0: &DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<RiccatiSolution> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "Riccati tolerance must be positive and finite, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument(
            "Riccati iteration cap must be at least 1".into(),
        ));
    }
    if p0.shape() != (sys.nx(), sys.nx()) {
        return Err(Error::Dimension(format!(
            "P0 is {}x{}, expected {}x{}",
            p0.nrows(),
            p0.ncols(),
            sys.nx(),
            sys.nx()
        )));
    }
    let min_eig = gaussian::min_symmetric_eigenvalue(p0);
    if min_eig < -gaussian::PSD_TOL {
        return Err(Error::NotPsd {
            name: "Riccati seed P0".into(),
            min_eig,
        });
    }

    let mut p = gaussian::symmetrize(p0);
    let mut delta = f64::INFINITY;
    for iteration in 1..=max_iter {
        let next = filter_tv::riccati_step(sys, &p)?;
        delta = (&next - &p).amax();
        p = next;
        if delta <= tol {
            // Report the genuine fixed-point defect, not just the last step.
            let residual = (filter_tv::riccati_step(sys, &p)? - &p).amax();
            return Ok(RiccatiSolution {
                p_star: p,
                residual,
                iterations: iteration,
            });
        }
    }
    Err(Error::RiccatiNotConverged {
        iterations: max_iter,
        residual: delta,
    })
}

/// [`solve_riccati`] from `P0 = 0` with the default tolerance and cap.
pub fn solve_riccati_default(sys: &DiscreteSystem) -> Result<RiccatiSolution> {
    let nx = sys.nx();
    solve_riccati(sys, &DMatrix::zeros(nx, nx), DEFAULT_TOL, DEFAULT_MAX_ITER)
}

/// Constant-gain filter frozen at a steady-state covariance.
///
/// The public fields expose the solution (`p_star`, `gains`, the closed-loop
/// predictor matrix `a_cl`, its spectral radius, and the steady output
/// covariance `var_y`); the precomputed update matrices are internal to
/// [`step`](Self::step).
#[derive(Debug, Clone)]
pub struct SteadyFilter {
    pub system: DiscreteSystem,
    pub p_star: DMatrix<f64>,
    pub gains: GainSet,
    /// Closed-loop predictor matrix `A - M_AG Cm`.
    pub a_cl: DMatrix<f64>,
    /// Largest eigenvalue magnitude of `a_cl`; `< 1` iff the predictor is
    /// asymptotically stable.
    pub spectral_radius: f64,
    /// Posterior output covariance at the steady state.
    pub var_y: DMatrix<f64>,
    pred_u: DMatrix<f64>,
    xpost_x: DMatrix<f64>,
    xpost_u: DMatrix<f64>,
    ycorr_x: DMatrix<f64>,
    ycorr_u: DMatrix<f64>,
    yleg_x: DMatrix<f64>,
    yleg_z: DMatrix<f64>,
    yleg_u: DMatrix<f64>,
    wpost_x: DMatrix<f64>,
    wpost_u: DMatrix<f64>,
}

impl SteadyFilter {
    /// Precomputes the constant filter matrices at `p_star`.
    ///
    /// `p_star` must actually solve the fixed-point equation: the residual
    /// is checked against `RESIDUAL_RTOL * (1 + |P*|)` and a stale or
    /// hand-edited covariance is rejected with [`Error::ResidualTooLarge`].
    pub fn build(sys: &DiscreteSystem, p_star: &DMatrix<f64>) -> Result<Self> {
        let p = gaussian::symmetrize(p_star);
        let residual = (filter_tv::riccati_step(sys, &p)? - &p).amax();
        let bound = RESIDUAL_RTOL * (1.0 + p.amax());
        if residual > bound {
            return Err(Error::ResidualTooLarge { residual, bound });
        }

        let (gains, s_factor) = filter_tv::gains_with_factor(sys, &p)?;
        let var_y = filter_tv::output_posterior_cov(sys, &p, &s_factor);
        let a_cl = &sys.a - &gains.m_ag * &sys.cm;
        let spectral_radius = a_cl
            .complex_eigenvalues()
            .iter()
            .fold(0.0_f64, |acc, l| acc.max(l.norm()));

        let nx = sys.nx();
        let c_kg = &sys.c * &gains.kg;
        Ok(Self {
            pred_u: &sys.b - &gains.m_ag * &sys.dm,
            xpost_x: DMatrix::identity(nx, nx) - &gains.kg * &sys.cm,
            xpost_u: -(&gains.kg * &sys.dm),
            ycorr_x: &sys.c - &gains.m_ch * &sys.cm,
            ycorr_u: &sys.d - &gains.m_ch * &sys.dm,
            yleg_x: &sys.c - &c_kg * &sys.cm,
            yleg_u: &sys.d - &c_kg * &sys.dm,
            yleg_z: c_kg,
            wpost_x: -(&gains.kg2 * &sys.cm),
            wpost_u: -(&gains.kg2 * &sys.dm),
            system: sys.clone(),
            p_star: p,
            gains,
            a_cl,
            spectral_radius,
            var_y,
        })
    }

    /// One constant-gain update: absorbs `z` and `u` at the current predicted
    /// state, returning the estimates and the next predicted state.
    pub fn step(
        &self,
        x_pred: &DVector<f64>,
        z: &DVector<f64>,
        u: &DVector<f64>,
        mode: OutputMode,
    ) -> Result<(EstimateFrame, DVector<f64>)> {
        let sys = &self.system;
        if x_pred.len() != sys.nx() {
            return Err(Error::Dimension(format!(
                "predicted state has length {}, system expects {}",
                x_pred.len(),
                sys.nx()
            )));
        }
        if z.len() != sys.nz() {
            return Err(Error::Dimension(format!(
                "measurement has length {}, system expects {}",
                z.len(),
                sys.nz()
            )));
        }
        if u.len() != sys.nu() {
            return Err(Error::Dimension(format!(
                "input has length {}, system expects {}",
                u.len(),
                sys.nu()
            )));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("measurement z".into()));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("input u".into()));
        }

        let innovation = z - (&sys.cm * x_pred + &sys.dm * u);
        let x_post = &self.xpost_x * x_pred + &self.gains.kg * z + &self.xpost_u * u;
        let w_post = &self.wpost_x * x_pred + &self.gains.kg2 * z + &self.wpost_u * u;
        let y_post = match mode {
            OutputMode::Corrected => {
                &self.ycorr_x * x_pred + &self.gains.m_ch * z + &self.ycorr_u * u
            }
            OutputMode::Legacy => &self.yleg_x * x_pred + &self.yleg_z * z + &self.yleg_u * u,
        };
        let x_next = &self.a_cl * x_pred + &self.gains.m_ag * z + &self.pred_u * u;

        let frame = EstimateFrame {
            x_post,
            y_post,
            w_post,
            x_next: x_next.clone(),
            var_y: self.var_y.clone(),
            innovation,
            mode,
        };
        Ok((frame, x_next))
    }

    /// Runs the constant-gain filter over aligned measurement and input
    /// sequences from the predicted state `x0`.
    pub fn run(
        &self,
        x0: &DVector<f64>,
        zs: &[DVector<f64>],
        us: &[DVector<f64>],
        mode: OutputMode,
    ) -> Result<Vec<EstimateFrame>> {
        if zs.len() != us.len() {
            return Err(Error::LengthMismatch {
                expected: zs.len(),
                got: us.len(),
            });
        }
        let mut frames = Vec::with_capacity(zs.len());
        let mut x = x0.clone();
        for (z, u) in zs.iter().zip(us) {
            let (frame, next) = self.step(&x, z, u, mode)?;
            frames.push(frame);
            x = next;
        }
        Ok(frames)
    }
}
