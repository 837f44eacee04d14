//! Run the teacher-student loop for one strategy and print a progress line
//! every 100 PPO updates, then the zero-shot result on the test suite.
//!
//! ```text
//! cargo run --release --example curriculum_run -- [strategy] [updates] [seed] [refresh_every]
//! ```

use diplr::curriculum::{Strategy, Trainer, TrainingSetup};
use diplr::eval::{evaluate_policy, EvalConfig, TestSuite};

fn main() -> diplr::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let strategy = args.first().and_then(|s| Strategy::parse(s)).unwrap_or(Strategy::Diplr);
    let updates: u64 = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(500);
    let seed: u64 = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(0);
    let refresh_every: u64 = args.get(3).and_then(|a| a.parse().ok()).unwrap_or(10);

    let mut setup = TrainingSetup {
        probe_every: 100,
        ..TrainingSetup::default()
    };
    setup.teacher.strategy = strategy;
    setup.teacher.refresh_every = refresh_every;

    let started = std::time::Instant::now();
    let mut trainer = Trainer::new(setup, seed)?;
    while trainer.policy_updates() < updates {
        let records = trainer.step_update()?;
        let r = records.last().expect("at least one iteration");
        if r.policy_updates % 100 == 0 {
            let pairwise = r
                .buffer_mean_pairwise_distance
                .map_or("-".to_string(), |d| format!("{d:.3}"));
            println!(
                "{strategy} update {:5}  iteration {:5}  env steps {:7}  return {:.3}  pairwise distance {pairwise}  {:.1}s",
                r.policy_updates,
                r.iteration,
                r.env_steps,
                r.mean_return,
                started.elapsed().as_secs_f64()
            );
        }
    }
    let record = evaluate_policy(
        trainer.policy(),
        &TestSuite::standard(),
        &EvalConfig::default(),
        &trainer.setup().env,
        0,
    )?;
    let sampled = evaluate_policy(
        trainer.policy(),
        &TestSuite::standard(),
        &EvalConfig {
            stochastic: true,
            ..EvalConfig::default()
        },
        &trainer.setup().env,
        0,
    )?;
    for (g, s) in record.levels.iter().zip(&sampled.levels) {
        println!("{:22} greedy {:.2}  sampled {:.2}", g.level, g.solved_rate, s.solved_rate);
    }
    println!("IQM over levels: {:.3}", record.iqm()?);
    Ok(())
}
