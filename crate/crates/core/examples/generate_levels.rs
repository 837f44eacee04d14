//! Sample levels from the generator, mutate one, and report how often
//! random levels are solvable.
//!
//! ```text
//! cargo run --example generate_levels -- [block_budget] [count]
//! ```

use diplr::levelgen::{mutate_level_traced, random_level, serialize_level, GeneratorConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> diplr::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let block_budget = args.first().and_then(|a| a.parse().ok()).unwrap_or(15);
    let count: usize = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(1000);
    let cfg = GeneratorConfig {
        block_budget,
        ..GeneratorConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let level = random_level(&cfg, &mut rng)?;
    println!("a random level:\n{}", serialize_level(&level));
    let (mutated, edit) = mutate_level_traced(&level, &mut rng);
    println!("after {edit:?}:\n{}", serialize_level(&mutated));

    let mut solvable = 0;
    let mut walls = 0;
    let mut path = 0;
    for _ in 0..count {
        let l = random_level(&cfg, &mut rng)?;
        walls += l.wall_count();
        if let Some(d) = l.shortest_path_len() {
            solvable += 1;
            path += d;
        }
    }
    println!(
        "{count} levels with budget {block_budget}: {:.1}% solvable, {:.2} walls on average, mean shortest path {:.2}",
        100.0 * solvable as f64 / count as f64,
        walls as f64 / count as f64,
        path as f64 / solvable.max(1) as f64
    );
    Ok(())
}
