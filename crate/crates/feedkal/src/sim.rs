//! Truth-model simulation and estimator scoring.
//!
//! [`simulate`] rolls the plant forward under a [`Scenario`], drawing the
//! correlated noise pairs through [`crate::gaussian::sample_joint_noise`], and
//! returns the full [`Trajectory`] (including the noises themselves, so tests
//! and plots can compare reconstructed disturbances against truth).
//! [`evaluate`] scores a frame sequence against a trajectory after a burn-in.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::filter_tv::{EstimateFrame, OutputMode};
use crate::gaussian;
use crate::model::DiscreteSystem;
use crate::{Error, Result};

/// Stream id for the random-walk bias increments, distinct from the joint
/// noise stream so adding a bias never perturbs the white-noise draws of the
/// same seed.
pub const BIAS_STREAM: u64 = 1;

/// Steps dropped from the front of every error statistic so filter
/// transients do not pollute steady-state numbers.
pub const DEFAULT_BURN_IN: usize = 100;

/// Default standard deviation of one random-walk bias increment.
pub const DEFAULT_BIAS_STEP_STD: f64 = 0.01;

/// What disturbance acts on the plant during simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// White process noise exactly as the model assumes.
    Nominal,
    /// White process noise plus a slowly drifting bias (a random walk with
    /// per-step increment std [`Scenario::bias_step_std`]) added onto every
    /// component of `w`. The filter model is NOT told about the bias; this
    /// scenario probes how each estimator copes with an unmodeled
    /// disturbance, and is where reconstructing `w` visibly pays off.
    RandomWalkBias,
}

/// Deterministic input sequence applied during simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum InputProfile {
    /// `u[n] = 0` for all `n`.
    Zero,
    /// The same vector every step.
    Constant(DVector<f64>),
    /// An explicit per-step sequence; must be as long as the scenario.
    Sequence(Vec<DVector<f64>>),
}

impl InputProfile {
    fn materialize(&self, n_steps: usize, nu: usize) -> Result<Vec<DVector<f64>>> {
        match self {
            InputProfile::Zero => Ok(vec![DVector::zeros(nu); n_steps]),
            InputProfile::Constant(u) => {
                if u.len() != nu {
                    return Err(Error::Dimension(format!(
                        "constant input has length {}, system expects {}",
                        u.len(),
                        nu
                    )));
                }
                Ok(vec![u.clone(); n_steps])
            }
            InputProfile::Sequence(us) => {
                if us.len() != n_steps {
                    return Err(Error::LengthMismatch {
                        expected: n_steps,
                        got: us.len(),
                    });
                }
                if let Some(bad) = us.iter().find(|u| u.len() != nu) {
                    return Err(Error::Dimension(format!(
                        "input sequence entry has length {}, system expects {}",
                        bad.len(),
                        nu
                    )));
                }
                Ok(us.clone())
            }
        }
    }
}

/// A reproducible simulation request.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub n_steps: usize,
    /// Seed for every random draw of the run; equal seeds give bitwise-equal
    /// trajectories.
    pub seed: u64,
    /// Per-step increment std of the random-walk bias; ignored in
    /// [`ScenarioKind::Nominal`].
    pub bias_step_std: f64,
    pub u_profile: InputProfile,
}

impl Scenario {
    pub fn nominal(n_steps: usize, seed: u64) -> Self {
        Self {
            kind: ScenarioKind::Nominal,
            n_steps,
            seed,
            bias_step_std: 0.0,
            u_profile: InputProfile::Zero,
        }
    }

    pub fn random_walk_bias(n_steps: usize, seed: u64, bias_step_std: f64) -> Self {
        Self {
            kind: ScenarioKind::RandomWalkBias,
            n_steps,
            seed,
            bias_step_std,
            u_profile: InputProfile::Zero,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::InvalidArgument(
                "scenario must have at least one step".into(),
            ));
        }
        if !(self.bias_step_std >= 0.0 && self.bias_step_std.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bias step std must be finite and non-negative, got {}",
                self.bias_step_std
            )));
        }
        Ok(())
    }
}

/// Everything the truth model produced, step by step: states, outputs,
/// measurements, and the actual noises (after any bias) that drove them.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub x: Vec<DVector<f64>>,
    pub y_true: Vec<DVector<f64>>,
    pub z: Vec<DVector<f64>>,
    /// Process noise as applied to the plant (bias included in the
    /// random-walk scenario).
    pub w: Vec<DVector<f64>>,
    /// Measurement noise draws.
    pub v: Vec<DVector<f64>>,
    pub u: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Rolls the plant forward from `x[0] = 0` under the scenario.
pub fn simulate(sys: &DiscreteSystem, scenario: &Scenario) -> Result<Trajectory> {
    scenario.check()?;
    let n = scenario.n_steps;
    let (w_draws, v_draws) =
        gaussian::sample_joint_noise(&sys.q, &sys.r, &sys.n, n, scenario.seed)?;
    let us = scenario.u_profile.materialize(n, sys.nu())?;

    let mut bias_rng = gaussian::seeded_rng(scenario.seed, BIAS_STREAM);
    let mut bias = DVector::zeros(sys.nw());

    let mut traj = Trajectory {
        x: Vec::with_capacity(n),
        y_true: Vec::with_capacity(n),
        z: Vec::with_capacity(n),
        w: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
        u: us,
    };

    let mut x = DVector::zeros(sys.nx());
    for k in 0..n {
        let mut w = w_draws.row(k).transpose();
        if scenario.kind == ScenarioKind::RandomWalkBias {
            for b in bias.iter_mut() {
                *b += scenario.bias_step_std * bias_rng.sample::<f64, _>(StandardNormal);
            }
            w += &bias;
        }
        let v = v_draws.row(k).transpose();
        let u = &traj.u[k];

        let y = &sys.c * &x + &sys.d * u + &sys.h * &w;
        let z = &sys.cm * &x + &sys.dm * u + &sys.hm * &w + &v;
        let x_next = &sys.a * &x + &sys.b * u + &sys.g * &w;

        traj.y_true.push(y);
        traj.z.push(z);
        traj.w.push(w);
        traj.v.push(v);
        traj.x.push(x);
        x = x_next;
    }
    Ok(traj)
}

/// Error statistics of one estimator run against the truth, computed after a
/// burn-in.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStats {
    /// Per-output variance of `y_true - y_post` (mean removed, `m - 1`
    /// divisor over the `m` retained steps).
    pub y_err_var: DVector<f64>,
    /// Per-output root-mean-square of `y_true - y_post` (no mean removal).
    pub y_rms: DVector<f64>,
    /// Per-state root-mean-square of `x_true - x_post`.
    pub x_rms: DVector<f64>,
    /// Root-mean-square of `w_true - w_hat` pooled over all components,
    /// where `w_hat` is the frame's `w_post` for corrected-mode frames and
    /// zero for legacy-mode frames (the legacy estimator does not produce a
    /// usable disturbance estimate).
    pub w_rms: f64,
    /// Steps actually scored.
    pub steps_used: usize,
}

/// The disturbance estimate an estimator actually stands behind: `w_post`
/// for corrected-mode frames, zero for legacy-mode frames (whose output
/// update never reconstructs the noise). Used for both scoring and the
/// `w_hat` columns of exported runs.
pub fn disturbance_estimate(frame: &EstimateFrame) -> DVector<f64> {
    match frame.mode {
        OutputMode::Corrected => frame.w_post.clone(),
        OutputMode::Legacy => DVector::zeros(frame.w_post.len()),
    }
}

/// [`evaluate_with_burn_in`] at the default burn-in.
pub fn evaluate(traj: &Trajectory, frames: &[EstimateFrame]) -> Result<ErrorStats> {
    evaluate_with_burn_in(traj, frames, DEFAULT_BURN_IN)
}

/// Scores `frames` against `traj`, dropping the first `burn_in` steps.
///
/// At least two steps must survive the burn-in for the variance divisor
/// `m - 1` to make sense.
pub fn evaluate_with_burn_in(
    traj: &Trajectory,
    frames: &[EstimateFrame],
    burn_in: usize,
) -> Result<ErrorStats> {
    if frames.len() != traj.len() {
        return Err(Error::LengthMismatch {
            expected: traj.len(),
            got: frames.len(),
        });
    }
    let m = traj.len().saturating_sub(burn_in);
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "burn-in of {burn_in} leaves {m} of {} steps; need at least 2",
            traj.len()
        )));
    }

    let ny = traj.y_true[0].len();
    let nx = traj.x[0].len();
    let mf = m as f64;

    let mut y_sum = DVector::zeros(ny);
    let mut y_sq = DVector::zeros(ny);
    let mut x_sq = DVector::zeros(nx);
    let mut w_sq = 0.0;
    let mut w_count = 0usize;

    for (truth_idx, frame) in frames.iter().enumerate().skip(burn_in) {
        let ey = &traj.y_true[truth_idx] - &frame.y_post;
        y_sum += &ey;
        y_sq += ey.component_mul(&ey);
        let ex = &traj.x[truth_idx] - &frame.x_post;
        x_sq += ex.component_mul(&ex);
        let ew = &traj.w[truth_idx] - disturbance_estimate(frame);
        w_sq += ew.norm_squared();
        w_count += ew.len();
    }

    let y_mean = &y_sum / mf;
    // Sum of squared deviations from the mean via the shifted form
    // sum(e^2) - m * mean^2, guarded against cancellation at zero.
    let y_err_var = DVector::from_fn(ny, |i, _| {
        ((y_sq[i] - mf * y_mean[i] * y_mean[i]) / (mf - 1.0)).max(0.0)
    });
    let y_rms = y_sq.map(|s| (s / mf).sqrt());
    let x_rms = x_sq.map(|s| (s / mf).sqrt());
    let w_rms = (w_sq / w_count as f64).sqrt();

    Ok(ErrorStats {
        y_err_var,
        y_rms,
        x_rms,
        w_rms,
        steps_used: m,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;

    use super::*;
    use crate::filter_tv::{self, FilterState};
    use crate::testutil;

    #[test]
    fn simulation_is_reproducible_per_seed() {
        let sys = testutil::feedthrough_system();
        let sc = Scenario::nominal(64, 5);
        let t1 = simulate(&sys, &sc).unwrap();
        let t2 = simulate(&sys, &sc).unwrap();
        assert_eq!(t1.z, t2.z);
        assert_eq!(t1.x, t2.x);
        let t3 = simulate(&sys, &Scenario::nominal(64, 6)).unwrap();
        assert_ne!(t1.z, t3.z);
    }

    #[test]
    fn trajectory_satisfies_the_plant_equations() {
        let sys = testutil::two_state_system();
        let mut sc = Scenario::nominal(32, 9);
        sc.u_profile = InputProfile::Constant(dvector![0.4]);
        let t = simulate(&sys, &sc).unwrap();
        assert_eq!(t.len(), 32);
        for k in 0..t.len() {
            let y = &sys.c * &t.x[k] + &sys.d * &t.u[k] + &sys.h * &t.w[k];
            let z = &sys.cm * &t.x[k] + &sys.dm * &t.u[k] + &sys.hm * &t.w[k] + &t.v[k];
            assert_abs_diff_eq!(y, t.y_true[k], epsilon = 1e-13);
            assert_abs_diff_eq!(z, t.z[k], epsilon = 1e-13);
            if k + 1 < t.len() {
                let x_next = &sys.a * &t.x[k] + &sys.b * &t.u[k] + &sys.g * &t.w[k];
                assert_abs_diff_eq!(x_next, t.x[k + 1], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn bias_scenario_shares_white_noise_with_nominal() {
        // Same seed: the random-walk run must see exactly the same (w, v)
        // white draws, with the bias the only difference.
        let sys = testutil::feedthrough_system();
        let nominal = simulate(&sys, &Scenario::nominal(128, 11)).unwrap();
        let biased = simulate(&sys, &Scenario::random_walk_bias(128, 11, 0.05)).unwrap();
        assert_eq!(nominal.v, biased.v);
        // The difference w_biased - w_nominal is exactly the bias path: a
        // random walk whose per-step moves stay on the scale of the
        // increment std (0.05 here; 1.0 would be a 20-sigma jump).
        let mut prev = 0.0;
        for k in 0..128 {
            let bias = biased.w[k][0] - nominal.w[k][0];
            assert!((bias - prev).abs() < 1.0, "step {k}: {prev} -> {bias}");
            prev = bias;
        }
        assert!(prev != 0.0, "bias path never moved");
    }

    #[test]
    fn bias_scenario_with_zero_std_equals_nominal() {
        let sys = testutil::feedthrough_system();
        let nominal = simulate(&sys, &Scenario::nominal(64, 13)).unwrap();
        let biased = simulate(&sys, &Scenario::random_walk_bias(64, 13, 0.0)).unwrap();
        assert_eq!(nominal.z, biased.z);
        assert_eq!(nominal.w, biased.w);
    }

    #[test]
    fn evaluate_scores_perfect_frames_as_zero() {
        let sys = testutil::feedthrough_system();
        let sc = Scenario::nominal(150, 17);
        let traj = simulate(&sys, &sc).unwrap();
        // Fabricate frames that echo the truth exactly.
        let frames: Vec<EstimateFrame> = (0..traj.len())
            .map(|k| EstimateFrame {
                x_post: traj.x[k].clone(),
                y_post: traj.y_true[k].clone(),
                w_post: traj.w[k].clone(),
                x_next: traj.x[k].clone(),
                var_y: nalgebra::DMatrix::zeros(2, 2),
                innovation: dvector![0.0],
                mode: OutputMode::Corrected,
            })
            .collect();
        let stats = evaluate(&traj, &frames).unwrap();
        assert_abs_diff_eq!(stats.y_err_var.amax(), 0.0, epsilon = 1e-30);
        assert_abs_diff_eq!(stats.y_rms.amax(), 0.0, epsilon = 1e-30);
        assert_abs_diff_eq!(stats.x_rms.amax(), 0.0, epsilon = 1e-30);
        assert_abs_diff_eq!(stats.w_rms, 0.0, epsilon = 1e-30);
        assert_eq!(stats.steps_used, 50);
    }

    #[test]
    fn evaluate_uses_zero_disturbance_estimate_for_legacy_frames() {
        let sys = testutil::feedthrough_system();
        let sc = Scenario::nominal(300, 19);
        let traj = simulate(&sys, &sc).unwrap();
        let init = FilterState::new(dvector![0.0], nalgebra::dmatrix![1.0]).unwrap();
        let legacy =
            filter_tv::run(&sys, &init, &traj.z, &traj.u, OutputMode::Legacy).unwrap();
        let stats = evaluate(&traj, &legacy).unwrap();
        // With w_hat = 0 the disturbance error is w itself: RMS near sqrt(Q).
        assert_abs_diff_eq!(stats.w_rms, 1.0, epsilon = 0.15);
    }

    #[test]
    fn evaluate_rejects_short_runs_and_misaligned_frames() {
        let sys = testutil::feedthrough_system();
        let traj = simulate(&sys, &Scenario::nominal(50, 23)).unwrap();
        let err = evaluate(&traj, &[]).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { .. }), "{err:?}");

        let init = FilterState::new(dvector![0.0], nalgebra::dmatrix![1.0]).unwrap();
        let frames =
            filter_tv::run(&sys, &init, &traj.z, &traj.u, OutputMode::Corrected).unwrap();
        // 50 steps cannot survive a 100-step burn-in.
        let err = evaluate(&traj, &frames).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)), "{err:?}");
        // But an explicit smaller burn-in works.
        assert!(evaluate_with_burn_in(&traj, &frames, 10).is_ok());
    }

    #[test]
    fn simulate_rejects_empty_scenarios() {
        let sys = testutil::feedthrough_system();
        let err = simulate(&sys, &Scenario::nominal(0, 1)).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)), "{err:?}");
    }
}
