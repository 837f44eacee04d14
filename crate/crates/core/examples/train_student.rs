//! Train the student with plain PPO on one fixed empty room and report the
//! greedy solved rate as it learns.
//!
//! ```text
//! cargo run --release --example train_student -- [updates]
//! ```

use diplr::agent::{collect, ppo_update, GaeConfig, PolicyConfig, PolicyParams, PpoConfig, RolloutBudget, RolloutMode};
use diplr::env::{EnvConfig, GridLevel, Heading, Pos};
use diplr::eval::solved_rate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> diplr::Result<()> {
    let updates: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(300);
    let env = EnvConfig {
        width: 7,
        height: 7,
        ..EnvConfig::default()
    };
    let level = GridLevel::empty(7, 7, Pos::new(1, 1), Heading::East, Pos::new(5, 5))?;
    let gae = GaeConfig::default();
    let ppo = PpoConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut policy = PolicyParams::new(env.feature_len(), &PolicyConfig::default(), &mut rng);
    let t = std::time::Instant::now();
    for u in 1..=updates {
        let batch = collect(
            &policy,
            &level,
            "room",
            &env,
            &gae,
            RolloutBudget::Steps(ppo.rollout_steps),
            RolloutMode::Train,
            &mut rng,
        )?;
        let (next, loss) = ppo_update(&policy, &batch, &ppo, &gae, &mut rng)?;
        policy = next;
        if u % 10 == 0 {
            let rate = solved_rate(&policy, &level, 10, &env)?;
            println!(
                "update {u:4}  success {:.2}  greedy {:.2}  entropy {:.3}  value loss {:.4}  {:.1}s",
                batch.success_rate(),
                rate,
                loss.entropy,
                loss.value_loss,
                t.elapsed().as_secs_f64()
            );
        }
    }
    Ok(())
}
