//! Fill a level buffer, score it under a fresh policy, and show how the
//! replay distribution shifts between regret-only, mixed and
//! diversity-only prioritization.
//!
//! ```text
//! cargo run --release --example replay_buffer
//! ```

use diplr::agent::{GaeConfig, PolicyConfig, PolicyParams};
use diplr::curriculum::{
    replay_distribution, sample_index, score_level, try_insert, BufferEntry, LevelBuffer, Strategy, TeacherConfig,
};
use diplr::env::EnvConfig;
use diplr::levelgen::{random_level, GeneratorConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> diplr::Result<()> {
    let env = EnvConfig::default();
    let gae = GaeConfig::default();
    let gen = GeneratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let policy = PolicyParams::new(env.feature_len(), &PolicyConfig::default(), &mut rng);

    let base = TeacherConfig {
        buffer_size: 8,
        ..TeacherConfig::default()
    };
    let mut buffer = LevelBuffer::new(base.buffer_size);
    let mut id = 0;
    while !buffer.is_full() {
        let level = random_level(&gen, &mut rng)?;
        if buffer.contains_level(&level) {
            continue;
        }
        let mut entry = BufferEntry::new(id, level);
        id += 1;
        score_level(&mut entry, &policy, &env, &gae, base.scoring_episodes, 0, &mut rng)?;
        try_insert(&mut buffer, entry, &base, 0)?;
    }
    buffer.update_distance_scores(&base.distance)?;

    println!("{:>8} {:>8} {:>9} {:>7}", "level", "regret", "distance", "return");
    for e in buffer.entries() {
        println!("{:>8} {:8.4} {:9.4} {:7.3}", e.label(), e.regret_score, e.distance_score, e.mean_return);
    }

    let now = 5;
    for (strategy, label) in [(Strategy::Plr, "regret only"), (Strategy::Diplr, "mixed"), (Strategy::DiplrMinus, "diversity only")] {
        let cfg = TeacherConfig { strategy, ..base.clone() };
        let p = replay_distribution(&buffer, &cfg, now)?;
        let shown: Vec<String> = p.iter().map(|x| format!("{x:.3}")).collect();
        println!("{label:>15}: [{}]", shown.join(", "));
    }

    let p = replay_distribution(&buffer, &base, now)?;
    let mut counts = vec![0; p.len()];
    for _ in 0..10_000 {
        counts[sample_index(&p, &mut rng)] += 1;
    }
    println!("10000 mixed draws: {counts:?}");

    let candidate = random_level(&gen, &mut rng)?;
    let mut entry = BufferEntry::new(id, candidate);
    score_level(&mut entry, &policy, &env, &gae, base.scoring_episodes, now, &mut rng)?;
    let out = try_insert(&mut buffer, entry, &base, now)?;
    match out.evicted {
        Some(old) => println!("candidate inserted, evicting {}", old.label()),
        None => println!("candidate rejected (p = {:.3})", out.candidate_probability.unwrap_or(0.0)),
    }
    Ok(())
}
