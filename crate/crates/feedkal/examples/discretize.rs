//! Discretizing a continuous-time plant: Euler vs. zero-order hold.
//!
//! Loads the continuous variant of the bundled feedthrough system, produces
//! discrete models at a few step sizes, and shows how the two methods drift
//! apart as the step grows. Also demonstrates what `validate` reports for a
//! deliberately broken model.
//!
//! Run with: `cargo run --example discretize`

use nalgebra::dmatrix;

use feedkal::{discretize, load_system, DiscretizationMethod, DiscreteSystem, LoadedSystem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/systems/feedthrough_continuous.json"
    );
    let loaded = load_system(path.as_ref())?;
    let (sys, default_dt) = match loaded {
        LoadedSystem::Continuous { system, default_dt } => (system, default_dt),
        LoadedSystem::Discrete(_) => unreachable!("file is marked continuous"),
    };

    println!("continuous plant: dx/dt = {:.2} x + {:.2} w", sys.a[(0, 0)], sys.g[(0, 0)]);
    println!("file suggests dt = {:?}\n", default_dt);

    println!("{:<8} {:<22} {:<22} {:<12}", "dt", "A_d (Euler)", "A_d (ZOH)", "|diff|");
    for dt in [0.01, 0.1, 0.5, 1.0] {
        let euler = discretize(&sys, dt, DiscretizationMethod::Euler)?;
        let zoh = discretize(&sys, dt, DiscretizationMethod::ZeroOrderHold)?;
        let ae = euler.a[(0, 0)];
        let az = zoh.a[(0, 0)];
        println!("{dt:<8} {ae:<22.12} {az:<22.12} {:<12.3e}", (ae - az).abs());
    }

    // ZOH of a scalar plant is exactly the matrix exponential.
    let dt = 0.1;
    let zoh = discretize(&sys, dt, DiscretizationMethod::ZeroOrderHold)?;
    let exact = (sys.a[(0, 0)] * dt).exp();
    println!(
        "\nZOH at dt = {dt} vs exact exp(a dt): {:.3e} apart",
        (zoh.a[(0, 0)] - exact).abs()
    );

    // Validation catches structural mistakes before any filtering runs.
    let mut broken = discretize(&sys, dt, DiscretizationMethod::Euler)?;
    broken.q = dmatrix![-1.0]; // a negative "covariance"
    let report = broken.validate();
    println!("\nvalidation of a model with Q = -1:");
    for issue in report.issues() {
        println!("  - {issue}");
    }
    assert!(!report.is_valid());

    // Constructor-level checking refuses the same model outright.
    let err = DiscreteSystem::new(
        broken.a.clone(),
        broken.b.clone(),
        broken.g.clone(),
        broken.c.clone(),
        broken.d.clone(),
        broken.h.clone(),
        broken.cm.clone(),
        broken.dm.clone(),
        broken.hm.clone(),
        broken.q.clone(),
        broken.r.clone(),
        broken.n.clone(),
        broken.dt,
    )
    .unwrap_err();
    println!("\nDiscreteSystem::new on the same model: {err}");
    Ok(())
}
