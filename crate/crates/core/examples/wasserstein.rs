//! Exact and entropic optimal transport between small point clouds.
//!
//! ```text
//! cargo run --example wasserstein
//! ```

use diplr::ot::{emd, sinkhorn, SampleSet, SinkhornConfig};

fn main() -> diplr::Result<()> {
    let p = SampleSet::uniform(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]])?;
    let q = SampleSet::new(vec![vec![2.0, 0.0], vec![0.0, 2.0]], vec![0.5, 0.5])?;

    let exact = emd(&p, &q, 1.0)?;
    println!("exact W1 = {:.6}", exact.distance);
    println!("plan (rows sum to 1/3, columns to 1/2):");
    for i in 0..exact.plan.rows {
        let row: Vec<String> = (0..exact.plan.cols).map(|j| format!("{:.4}", exact.plan.get(i, j))).collect();
        println!("  {}", row.join("  "));
    }

    for eps in [1.0, 0.1, 0.01] {
        let cfg = SinkhornConfig {
            epsilon: eps,
            ..SinkhornConfig::default()
        };
        let out = sinkhorn(&p, &q, 1.0, &cfg)?;
        println!(
            "sinkhorn eps {eps:<5} value {:.6}  ({} iterations)",
            out.value, out.iterations
        );
    }

    let w2 = emd(&p, &q, 2.0)?;
    println!("exact W2 = {:.6}", w2.distance);
    Ok(())
}
