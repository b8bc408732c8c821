//! Solving the steady-state problem and inspecting the constant-gain filter.
//!
//! Loads the bundled feedthrough system from JSON, iterates the covariance
//! recursion to its fixed point, and prints everything the constant-gain
//! filter is made of: the two gains, the closed-loop predictor, and the
//! output error covariance the filter promises at steady state.
//!
//! Run with: `cargo run --example steady_state`

use feedkal::{filter_ss, load_system, LoadedSystem, SteadyFilter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/systems/feedthrough.json");
    let sys = match load_system(path.as_ref())? {
        LoadedSystem::Discrete(sys) => sys,
        LoadedSystem::Continuous { .. } => unreachable!("file is discrete"),
    };

    let sol = filter_ss::solve_riccati_default(&sys)?;
    println!(
        "fixed point found in {} iterations, residual {:.3e}",
        sol.iterations, sol.residual
    );
    println!("P* = {:.12e}", sol.p_star[(0, 0)]);

    let filter = SteadyFilter::build(&sys, &sol.p_star)?;
    println!("state gain Kg        = {:.8}", filter.gains.kg[(0, 0)]);
    println!("noise gain Kg2       = {:.8}", filter.gains.kg2[(0, 0)]);
    println!("predictor gain M_AG  = {:.8}", filter.gains.m_ag[(0, 0)]);
    println!("output gain M_CH     = ({:.8}, {:.8})",
        filter.gains.m_ch[(0, 0)], filter.gains.m_ch[(1, 0)]);
    println!(
        "closed-loop predictor A - M_AG Cm = {:.8} (spectral radius {:.6})",
        filter.a_cl[(0, 0)],
        filter.spectral_radius
    );
    assert!(filter.spectral_radius < 1.0, "estimator must be stable");

    // The first output row is measured through the same channel it shares
    // with the measurement, so its steady error variance lands far below the
    // measurement noise floor R = 0.1.
    println!("\nsteady output error covariance (corrected update):");
    println!("  var_y = {}", filter.var_y);
    println!(
        "  y1: {:.6} vs measurement noise R = {:.3}",
        filter.var_y[(0, 0)],
        sys.r[(0, 0)]
    );
    println!(
        "  y2 (the disturbance estimate): {:.6} vs raw disturbance power Q = {:.3}",
        filter.var_y[(1, 1)],
        sys.q[(0, 0)]
    );

    // Closed form for this scalar plant: with T = Cm P* Cm' + Hm Q Hm' the
    // first-row variance is T R / (T + R).
    let t = sol.p_star[(0, 0)] + sys.q[(0, 0)];
    let analytic = t * sys.r[(0, 0)] / (t + sys.r[(0, 0)]);
    println!(
        "  closed-form check for y1: {:.6} ({:.1e} apart)",
        analytic,
        (analytic - filter.var_y[(0, 0)]).abs()
    );
    Ok(())
}
