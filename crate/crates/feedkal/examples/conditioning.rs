//! Conditioning a joint Gaussian on an observed sub-vector.
//!
//! The filter's measurement update is exactly this operation, so the
//! standalone `condition` routine doubles as a reference oracle. Here a
//! two-dimensional disturbance `w` is jointly Gaussian with a scalar
//! measurement-style variable `v`; observing `v` shrinks the uncertainty
//! about `w` along the correlated direction. A Monte Carlo regression over
//! the same joint distribution confirms the closed-form answer.
//!
//! Run with: `cargo run --example conditioning`

use nalgebra::{dmatrix, dvector, DVector};

use feedkal::gaussian::{condition, sample_joint_noise, JointPartition};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Joint covariance [[Q, N], [N', R]] of (w, v).
    let q = dmatrix![1.0, 0.3; 0.3, 0.5];
    let r = dmatrix![2.0];
    let n = dmatrix![0.8; -0.2];

    let joint = JointPartition::new(
        dvector![0.0, 0.0], // prior mean of w
        dvector![0.0],      // prior mean of v
        q.clone(),
        n.clone(),
        r.clone(),
    )?;

    println!("prior cov of w:{}", q);
    for v_obs in [-2.0, 0.0, 1.5] {
        let post = condition(&joint, &dvector![v_obs])?;
        println!(
            "observed v = {v_obs:+.1}: E[w | v] = ({:+.4}, {:+.4})",
            post.mean[0], post.mean[1]
        );
    }
    // The posterior covariance does not depend on the observed value.
    let post = condition(&joint, &dvector![0.0])?;
    println!("posterior cov of w | v:{}", post.cov);

    // Monte Carlo cross-check: regress sampled w on sampled v. The slope
    // recovers N R^-1 and the residual covariance recovers the conditional
    // covariance above.
    let draws = 200_000;
    let (w, v) = sample_joint_noise(&q, &r, &n, draws, 7)?;
    let var_v = v.column(0).map(|x| x * x).sum() / draws as f64;
    let slope = DVector::from_fn(2, |i, _| {
        w.column(i).dot(&v.column(0)) / draws as f64 / var_v
    });
    let expected_slope = &n * dmatrix![1.0 / r[(0, 0)]];
    println!(
        "regression slope (sampled): ({:+.4}, {:+.4}); closed form N/R: ({:+.4}, {:+.4})",
        slope[0],
        slope[1],
        expected_slope[(0, 0)],
        expected_slope[(1, 0)]
    );

    let mut resid_var = [0.0; 2];
    for k in 0..draws {
        for i in 0..2 {
            let e = w[(k, i)] - slope[i] * v[(k, 0)];
            resid_var[i] += e * e;
        }
    }
    for r in &mut resid_var {
        *r /= draws as f64;
    }
    println!(
        "residual variances (sampled): ({:.4}, {:.4}); conditional diag: ({:.4}, {:.4})",
        resid_var[0],
        resid_var[1],
        post.cov[(0, 0)],
        post.cov[(1, 1)]
    );
    Ok(())
}
