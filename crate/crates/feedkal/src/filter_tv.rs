//! Time-varying filter: per-measurement gains, the combined measurement and
//! time update, and a batch runner.
//!
//! Each update conditions the joint Gaussian of `(x[n], w[n], x[n+1])` on
//! the current measurement `z[n]`. With the innovation
//! `nu = z - Cm x_prior - Dm u` and its covariance `S = Cm P Cm' + Rbar`:
//!
//! ```text
//! x_post = x_prior + Kg nu          Kg  = P Cm' S^-1
//! w_post = Kg2 nu                   Kg2 = (Q Hm' + N) S^-1
//! x_next = A x_prior + B u + M_AG nu,   M_AG = A Kg + G Kg2
//! ```
//!
//! The output estimate comes in two flavors selected by [`OutputMode`]:
//! the corrected update `y_post = C x_post + D u + H w_post` (equivalently
//! `C x_prior + D u + M_CH nu` with `M_CH = C Kg + H Kg2`), and the legacy
//! update `y_post = C x_post + D u` that ignores the reconstructed process
//! noise. The corrected form is minimum-variance whenever `Hm` or `N` is
//! nonzero; the legacy form is what most existing tooling computes and is
//! kept as the comparison baseline.

use nalgebra::{DMatrix, DVector};

use crate::gaussian::{self, SpdFactor};
use crate::model::DiscreteSystem;
use crate::{Error, Result};

/// Which output update an estimate reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputMode {
    /// `y_post = C x_post + D u + H w_post`: minimum-variance also under
    /// process-noise feedthrough (`Hm != 0`) or correlated noises (`N != 0`).
    Corrected,
    /// `y_post = C x_post + D u`: the traditional update, optimal only when
    /// `Hm = 0` and `N = 0`.
    Legacy,
}

/// Covariance recursion variant used by [`update_with_form`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceForm {
    /// Direct subtraction form of the recursion; cheapest, and exact in
    /// well-conditioned problems.
    Subtraction,
    /// Joseph-style rewrite as a sum of congruences,
    /// `P+ = Acl P Acl' + Gcl Q Gcl' + M R M' - Gcl N M' - M N' Gcl'`
    /// with `Acl = A - M_AG Cm`, `Gcl = G - M_AG Hm`, `M = M_AG`; costs more
    /// but keeps rounding from driving `P` indefinite in stiff problems.
    Joseph,
}

/// Prior state of the filter entering step `n`: the one-step prediction
/// `x[n] | z[0..n-1]` and its covariance.
#[derive(Debug, Clone)]
pub struct FilterState {
    pub x_prior: DVector<f64>,
    pub p_prior: DMatrix<f64>,
    /// Index of the measurement this state is about to absorb.
    pub step: usize,
}

impl FilterState {
    /// Builds an initial state (step 0), checking that `p_prior` is square,
    /// matches `x_prior`, and is PSD within tolerance.
    pub fn new(x_prior: DVector<f64>, p_prior: DMatrix<f64>) -> Result<Self> {
        if p_prior.nrows() != p_prior.ncols() || p_prior.nrows() != x_prior.len() {
            return Err(Error::Dimension(format!(
                "state has length {} but covariance is {}x{}",
                x_prior.len(),
                p_prior.nrows(),
                p_prior.ncols()
            )));
        }
        if x_prior.iter().any(|v| !v.is_finite()) || p_prior.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("initial filter state".into()));
        }
        let min_eig = gaussian::min_symmetric_eigenvalue(&p_prior);
        if min_eig < -gaussian::PSD_TOL {
            return Err(Error::NotPsd {
                name: "initial covariance P0".into(),
                min_eig,
            });
        }
        Ok(Self {
            x_prior,
            p_prior: gaussian::symmetrize(&p_prior),
            step: 0,
        })
    }
}

/// The gain matrices of one measurement update, all functions of the prior
/// covariance `P`.
#[derive(Debug, Clone)]
pub struct GainSet {
    /// State gain `P Cm' S^-1`.
    pub kg: DMatrix<f64>,
    /// Process-noise gain `(Q Hm' + N) S^-1`; exactly zero when `Hm = 0` and
    /// `N = 0`, which is why the traditional filter never sees this term.
    pub kg2: DMatrix<f64>,
    /// Predictor gain `A Kg + G Kg2`.
    pub m_ag: DMatrix<f64>,
    /// Corrected output gain `C Kg + H Kg2`.
    pub m_ch: DMatrix<f64>,
    /// Innovation covariance `Cm P Cm' + Rbar` (symmetric positive definite).
    pub s: DMatrix<f64>,
}

/// Everything one update reports about step `n` given `z[0..n]`.
#[derive(Debug, Clone)]
pub struct EstimateFrame {
    /// Filtered state `x[n] | z[0..n]`.
    pub x_post: DVector<f64>,
    /// Output estimate in the requested [`OutputMode`].
    pub y_post: DVector<f64>,
    /// Filtered process noise `w[n] | z[0..n]`; reported in both modes (the
    /// legacy mode merely declines to use it in `y_post`).
    pub w_post: DVector<f64>,
    /// One-step prediction `x[n+1] | z[0..n]`.
    pub x_next: DVector<f64>,
    /// Posterior covariance of the corrected output estimate.
    pub var_y: DMatrix<f64>,
    /// Innovation `z - Cm x_prior - Dm u` that produced this frame.
    pub innovation: DVector<f64>,
    /// Mode `y_post` was computed in.
    pub mode: OutputMode,
}

/// Computes the gain set for a prior covariance.
///
/// Fails with [`Error::SingularInnovation`] when `S = Cm P Cm' + Rbar` is
/// singular within the condition bound.
pub fn gains(sys: &DiscreteSystem, p_prior: &DMatrix<f64>) -> Result<GainSet> {
    gains_with_factor(sys, p_prior).map(|(g, _)| g)
}

pub(crate) fn gains_with_factor(
    sys: &DiscreteSystem,
    p_prior: &DMatrix<f64>,
) -> Result<(GainSet, SpdFactor)> {
    if p_prior.shape() != (sys.nx(), sys.nx()) {
        return Err(Error::Dimension(format!(
            "covariance is {}x{}, expected {}x{}",
            p_prior.nrows(),
            p_prior.ncols(),
            sys.nx(),
            sys.nx()
        )));
    }
    let s = &sys.cm * p_prior * sys.cm.transpose() + sys.rbar();
    let factor = SpdFactor::new(&s, "innovation covariance S")?;
    // Kg = P Cm' S^-1 and Kg2 = (Q Hm' + N) S^-1, formed by solving against
    // S from the left and transposing (P, Q, S symmetric).
    let kg = factor.solve_mat(&(&sys.cm * p_prior)).transpose();
    let kg2 = factor
        .solve_mat(&(&sys.hm * &sys.q + sys.n.transpose()))
        .transpose();
    let m_ag = &sys.a * &kg + &sys.g * &kg2;
    let m_ch = &sys.c * &kg + &sys.h * &kg2;
    Ok((
        GainSet {
            kg,
            kg2,
            m_ag,
            m_ch,
            s,
        },
        factor,
    ))
}

/// One step of the prediction-covariance recursion
/// `P+ = (A P A' + G Q G') - U S^-1 U'` with
/// `U = A P Cm' + G Q Hm' + G N` and `S = Cm P Cm' + Rbar`.
///
/// This is the map whose fixed point [`crate::filter_ss::solve_riccati`]
/// finds; the result is symmetrized.
pub fn riccati_step(sys: &DiscreteSystem, p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let s = &sys.cm * p * sys.cm.transpose() + sys.rbar();
    let factor = SpdFactor::new(&s, "innovation covariance S")?;
    let u = &sys.a * p * sys.cm.transpose()
        + &sys.g * &sys.q * sys.hm.transpose()
        + &sys.g * &sys.n;
    let open_loop = &sys.a * p * sys.a.transpose() + &sys.g * &sys.q * sys.g.transpose();
    Ok(gaussian::symmetrize(
        &(open_loop - &u * factor.solve_mat(&u.transpose())),
    ))
}

/// Posterior covariance of the corrected output estimate:
/// `(C P C' + H Q H') - Uy S^-1 Uy'` with `Uy = C P Cm' + H Q Hm' + H N`.
pub(crate) fn output_posterior_cov(
    sys: &DiscreteSystem,
    p: &DMatrix<f64>,
    s_factor: &SpdFactor,
) -> DMatrix<f64> {
    let uy = &sys.c * p * sys.cm.transpose()
        + &sys.h * &sys.q * sys.hm.transpose()
        + &sys.h * &sys.n;
    let prior = &sys.c * p * sys.c.transpose() + &sys.h * &sys.q * sys.h.transpose();
    gaussian::symmetrize(&(prior - &uy * s_factor.solve_mat(&uy.transpose())))
}

/// Absorbs measurement `z` with input `u`, producing the estimates of step
/// `n` and the prior state for step `n + 1`. Uses the subtraction-form
/// covariance recursion.
pub fn update(
    sys: &DiscreteSystem,
    state: &FilterState,
    z: &DVector<f64>,
    u: &DVector<f64>,
    mode: OutputMode,
) -> Result<(EstimateFrame, FilterState)> {
    update_with_form(sys, state, z, u, mode, CovarianceForm::Subtraction)
}

/// [`update`] with an explicit covariance recursion variant.
pub fn update_with_form(
    sys: &DiscreteSystem,
    state: &FilterState,
    z: &DVector<f64>,
    u: &DVector<f64>,
    mode: OutputMode,
    form: CovarianceForm,
) -> Result<(EstimateFrame, FilterState)> {
    if state.x_prior.len() != sys.nx() {
        return Err(Error::Dimension(format!(
            "filter state has length {}, system expects {}",
            state.x_prior.len(),
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
        return Err(Error::NonFinite(format!("measurement z at step {}", state.step)));
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("input u at step {}", state.step)));
    }

    let (gains, s_factor) = gains_with_factor(sys, &state.p_prior)?;

    let innovation = z - (&sys.cm * &state.x_prior + &sys.dm * u);
    let x_post = &state.x_prior + &gains.kg * &innovation;
    let w_post = &gains.kg2 * &innovation;
    let y_post = match mode {
        OutputMode::Corrected => &sys.c * &x_post + &sys.d * u + &sys.h * &w_post,
        OutputMode::Legacy => &sys.c * &x_post + &sys.d * u,
    };
    let x_next = &sys.a * &state.x_prior + &sys.b * u + &gains.m_ag * &innovation;

    let p_next = match form {
        CovarianceForm::Subtraction => riccati_step(sys, &state.p_prior)?,
        CovarianceForm::Joseph => {
            let a_cl = &sys.a - &gains.m_ag * &sys.cm;
            let g_cl = &sys.g - &gains.m_ag * &sys.hm;
            let cross = &g_cl * &sys.n * gains.m_ag.transpose();
            gaussian::symmetrize(
                &(&a_cl * &state.p_prior * a_cl.transpose()
                    + &g_cl * &sys.q * g_cl.transpose()
                    + &gains.m_ag * &sys.r * gains.m_ag.transpose()
                    - &cross
                    - cross.transpose()),
            )
        }
    };
    let var_y = output_posterior_cov(sys, &state.p_prior, &s_factor);

    let frame = EstimateFrame {
        x_post,
        y_post,
        w_post,
        x_next: x_next.clone(),
        var_y,
        innovation,
        mode,
    };
    let next = FilterState {
        x_prior: x_next,
        p_prior: p_next,
        step: state.step + 1,
    };
    Ok((frame, next))
}

/// Runs the filter over aligned measurement and input sequences.
pub fn run(
    sys: &DiscreteSystem,
    init: &FilterState,
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
    let mut state = init.clone();
    for (z, u) in zs.iter().zip(us) {
        let (frame, next) = update(sys, &state, z, u, mode)?;
        frames.push(frame);
        state = next;
    }
    Ok(frames)
}
