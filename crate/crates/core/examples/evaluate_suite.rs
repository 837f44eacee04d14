//! Zero-shot evaluation on the built-in test suite, plus the aggregate
//! statistics used to compare algorithms.
//!
//! ```text
//! cargo run --release --example evaluate_suite -- [checkpoint]
//! ```
//!
//! Without a checkpoint a freshly initialized policy is evaluated.

use std::path::Path;

use diplr::agent::{checkpoint, PolicyConfig, PolicyParams};
use diplr::env::EnvConfig;
use diplr::eval::{evaluate_policy, AggregateReport, EvalConfig, TestSuite};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> diplr::Result<()> {
    let env = EnvConfig::default();
    let policy = match std::env::args().nth(1) {
        Some(path) => checkpoint::load(Path::new(&path))?,
        None => PolicyParams::new(env.feature_len(), &PolicyConfig::default(), &mut ChaCha8Rng::seed_from_u64(0)),
    };
    let suite = TestSuite::standard();

    let mut runs = Vec::new();
    for stochastic in [false, true] {
        let cfg = EvalConfig {
            stochastic,
            ..EvalConfig::default()
        };
        let record = evaluate_policy(&policy, &suite, &cfg, &env, 0)?;
        println!("{} actions:", if stochastic { "sampled" } else { "greedy" });
        for l in &record.levels {
            println!("  {:<22} solved {:.2}  return {:.3}", l.level, l.solved_rate, l.mean_return);
        }
        println!("  IQM over levels {:.3}", record.iqm()?);
        if stochastic {
            for seed in 0..4 {
                runs.push(evaluate_policy(&policy, &suite, &cfg, &env, seed)?);
            }
        }
    }

    let report = AggregateReport::from_runs("sampled", &runs, 0.0, 1.0, 1.0)?;
    println!(
        "aggregate over {} sampled runs: IQM {:.3}, optimality gap {:.3}",
        report.runs, report.iqm, report.optimality_gap
    );
    Ok(())
}
