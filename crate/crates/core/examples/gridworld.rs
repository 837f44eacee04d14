//! Walk an agent through a small level by hand and print what it sees.
//!
//! ```text
//! cargo run --example gridworld
//! ```

use diplr::env::{encode_observation, observe, parse_level, reset, step, Action, CellKind, EnvConfig};

const LEVEL: &str = "dir: east
S..#.
.#.#.
.#...
...#G
";

fn show_view(view: &[CellKind], v: usize) {
    for row in view.chunks(v) {
        let line: String = row
            .iter()
            .map(|c| match c {
                CellKind::Empty => '.',
                CellKind::Wall => '#',
                CellKind::Goal => 'G',
            })
            .collect();
        println!("    {line}");
    }
}

fn main() -> diplr::Result<()> {
    let level = parse_level(LEVEL)?;
    let env = EnvConfig {
        max_steps: 20,
        ..EnvConfig::default()
    };
    let (mut state, obs) = reset(&level, &env)?;
    println!("start at {} facing {}, feature length {}", state.agent_pos, state.agent_dir.name(), encode_observation(&obs).len());
    show_view(&obs.view, obs.view_size);

    use Action::*;
    let plan = [Forward, Forward, TurnRight, Forward, Forward, TurnLeft, Forward, Forward, TurnRight, Forward];
    for action in plan {
        let out = step(&state, action, &level, &env)?;
        state = out.state;
        println!(
            "{action:?}: at {} facing {}, reward {:.3}{}",
            state.agent_pos,
            state.agent_dir.name(),
            out.reward,
            if out.done { ", done" } else { "" }
        );
        if out.done {
            break;
        }
    }
    let obs = observe(&state, &level, &env);
    println!("final view:");
    show_view(&obs.view, obs.view_size);
    Ok(())
}
