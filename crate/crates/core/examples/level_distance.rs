//! Compare levels by the Wasserstein distance between the state-action
//! occupancies a policy induces on them.
//!
//! ```text
//! cargo run --release --example level_distance
//! ```

use diplr::agent::{collect, occupancy_samples, GaeConfig, PolicyConfig, PolicyParams, RolloutBudget, RolloutMode};
use diplr::env::{EnvConfig, GridLevel};
use diplr::eval::TestSuite;
use diplr::ot::{level_distance, DistanceConfig, SampleSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn occupancy(policy: &PolicyParams, level: &GridLevel, env: &EnvConfig, seed: u64) -> diplr::Result<SampleSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let batch = collect(
        policy,
        level,
        "",
        env,
        &GaeConfig::default(),
        RolloutBudget::Episodes(4),
        RolloutMode::Score,
        &mut rng,
    )?;
    occupancy_samples(&batch)
}

fn main() -> diplr::Result<()> {
    let env = EnvConfig::default();
    let policy = PolicyParams::new(env.feature_len(), &PolicyConfig::default(), &mut ChaCha8Rng::seed_from_u64(0));
    let suite = TestSuite::standard();
    let cfg = DistanceConfig::default();

    let names: Vec<&str> = suite.names().collect();
    let samples: Vec<SampleSet> = suite
        .iter()
        .map(|(_, level)| occupancy(&policy, level, &env, 1))
        .collect::<diplr::Result<_>>()?;

    print!("{:>22}", "");
    for n in &names {
        print!(" {:>6}", &n[..n.len().min(6)]);
    }
    println!();
    for (i, a) in samples.iter().enumerate() {
        print!("{:>22}", names[i]);
        for b in &samples {
            print!(" {:6.3}", level_distance(a, b, &cfg)?);
        }
        println!();
    }
    Ok(())
}
