//! Acceptance suite. Each test prints one `PASS`/`FAIL` line straight to
//! stdout, so the lines show up even when the harness captures output.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use diplr::agent::{collect, episode_positive_value_loss, ppo_update, GaeConfig, PolicyConfig, PolicyParams, PpoConfig};
use diplr::agent::{RolloutBudget, RolloutMode};
use diplr::curriculum::{rank_prioritization, replay_probabilities, run_training, Strategy, TeacherConfig};
use diplr::env::{EnvConfig, GridLevel, Heading, Pos};
use diplr::eval::{evaluate_policy, solved_rate, EvalConfig, TestSuite};
use diplr::harness::ExperimentConfig;
use diplr::ot::{emd, SampleSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn report(n: u32, name: &str, outcome: Outcome) {
    let line = match &outcome {
        Ok(detail) => format!("PASS criterion {n:2} {name}: {detail}\n"),
        Err(detail) => format!("FAIL criterion {n:2} {name}: {detail}\n"),
    };
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    if let Err(detail) = outcome {
        panic!("criterion {n} failed: {detail}");
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn set_1d(xs: &[f64]) -> SampleSet {
    SampleSet::uniform(xs.iter().map(|&x| vec![x]).collect()).unwrap()
}

fn random_atoms(rng: &mut ChaCha8Rng, max: usize, lo: f64, hi: f64) -> Vec<f64> {
    let n = rng.random_range(1..=max);
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

#[test]
fn criterion_01_ot_exactness() {
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let start = Instant::now();
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let a = random_atoms(&mut rng, 16, -10.0, 10.0);
            let b = random_atoms(&mut rng, 16, -10.0, 10.0);
            let got = emd(&set_1d(&a), &set_1d(&b), 1.0).map_err(|e| e.to_string())?.distance;
            worst = worst.max((got - common::emd_1d_uniform(&a, &b)).abs());
        }
        let elapsed = start.elapsed();
        check(worst <= 1e-9, || format!("max error {worst:e}"))?;
        check(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
        Ok(format!("200 pairs, max |emd - oracle| = {worst:.1e}, {:.2}s", elapsed.as_secs_f64()))
    })();
    report(1, "OT exactness", outcome);
}

#[test]
fn criterion_02_ot_metric_properties() {
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut identity_hits = 0;
        let set = |rng: &mut ChaCha8Rng| -> Vec<[f64; 2]> {
            let n = rng.random_range(1..=6);
            // a coarse lattice so that equal multisets occur
            (0..n)
                .map(|_| [rng.random_range(-2..=2) as f64, rng.random_range(-2..=2) as f64])
                .collect()
        };
        let to_set = |pts: &[[f64; 2]]| SampleSet::uniform(pts.iter().map(|p| p.to_vec()).collect()).unwrap();
        let d = |a: &SampleSet, b: &SampleSet| emd(a, b, 1.0).map(|t| t.distance).map_err(|e| e.to_string());
        for t in 0..100 {
            let a = set(&mut rng);
            // every fourth triple reuses a permutation of the first set
            let b = if t % 4 == 0 {
                let mut p = a.clone();
                p.reverse();
                p
            } else {
                set(&mut rng)
            };
            let c = set(&mut rng);
            let (p, q, r) = (to_set(&a), to_set(&b), to_set(&c));
            let (pq, qp, qr, pr) = (d(&p, &q)?, d(&q, &p)?, d(&q, &r)?, d(&p, &r)?);
            check(pq == qp, || format!("triple {t}: asymmetric {pq} vs {qp}"))?;
            check(pq >= 0.0 && qr >= 0.0 && pr >= 0.0, || format!("triple {t}: negative distance"))?;
            check(pr <= pq + qr + 1e-9, || format!("triple {t}: triangle {pr} > {pq} + {qr}"))?;
            let mut sa = a.clone();
            let mut sb = b.clone();
            sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
            sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
            check((pq == 0.0) == (sa == sb), || format!("triple {t}: identity violated, d = {pq}"))?;
            identity_hits += usize::from(sa == sb);
        }
        Ok(format!("100 triples, {identity_hits} equal-multiset pairs at distance 0"))
    })();
    report(2, "OT metric properties", outcome);
}

#[test]
fn criterion_03_positive_value_loss_oracle() {
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut worst = 0.0f64;
        for i in 0..100 {
            let len = rng.random_range(1..=20);
            let td: Vec<f64> = (0..len).map(|_| rng.random_range(-2.0..2.0)).collect();
            let gl = [0.25, 0.5, 0.9][i % 3];
            worst = worst.max((episode_positive_value_loss(&td, gl) - common::brute_positive_value_loss(&td, gl)).abs());
            let negative: Vec<f64> = td.iter().map(|x| -x.abs()).collect();
            check(episode_positive_value_loss(&negative, gl) == 0.0, || format!("episode {i}: nonzero for δ ≤ 0"))?;
        }
        check(worst <= 1e-10, || format!("max error {worst:e}"))?;
        Ok(format!("100 episodes, max error {worst:.1e}, exact 0 on non-positive δ"))
    })();
    report(3, "positive value loss oracle", outcome);
}

#[test]
fn criterion_04_rank_prioritization() {
    let outcome = (|| {
        let p = rank_prioritization(&[3.0, 2.0, 1.0], 1.0).map_err(|e| e.to_string())?;
        let want = [6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0];
        check(p.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-12), || format!("got {p:?}"))?;
        let tie = rank_prioritization(&[0.3; 7], 1.0).map_err(|e| e.to_string())?;
        check(tie.iter().all(|&x| (x - 1.0 / 7.0).abs() <= 1e-15), || format!("ties gave {tie:?}"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for case in 0..100 {
            let n = rng.random_range(1..20);
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(-3..=3) as f64 * 0.5).collect();
            let beta = rng.random_range(0.2..4.0);
            let (scale, shift) = (rng.random_range(0.1..5.0), rng.random_range(-2.0..2.0));
            let mapped: Vec<f64> = scores.iter().map(|s: &f64| (scale * s + shift).tanh() + s.powi(3)).collect();
            let a = rank_prioritization(&scores, beta).map_err(|e| e.to_string())?;
            let b = rank_prioritization(&mapped, beta).map_err(|e| e.to_string())?;
            check(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-12), || format!("case {case} changed"))?;
        }
        Ok("[3,2,1] -> [6/11, 3/11, 2/11]; ties uniform; 100 monotone transforms invariant".into())
    })();
    report(4, "rank prioritization", outcome);
}

#[test]
fn criterion_05_mixture_endpoints() {
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for case in 0..50 {
            let n = rng.random_range(1..33);
            let regrets: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            let dists: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
            let ages: Vec<u64> = (0..n).map(|_| rng.random_range(0..40)).collect();
            let cfg = |rho| TeacherConfig {
                rho,
                staleness_coef: 0.0,
                ..TeacherConfig::default()
            };
            let err = |e: diplr::Error| e.to_string();
            let pd = rank_prioritization(&dists, 1.0).map_err(err)?;
            let pr = rank_prioritization(&regrets, 1.0).map_err(err)?;
            let at_one = replay_probabilities(&regrets, &dists, &ages, &cfg(1.0)).map_err(err)?;
            let at_zero = replay_probabilities(&regrets, &dists, &ages, &cfg(0.0)).map_err(err)?;
            check(at_one == pd, || format!("case {case}: rho = 1 differs from the diversity ranks"))?;
            check(at_zero == pr, || format!("case {case}: rho = 0 differs from the regret ranks"))?;
        }
        Ok("50 random buffers, both endpoints componentwise exact".into())
    })();
    report(5, "mixture endpoints", outcome);
}

#[test]
fn criterion_06_buffer_invariants() {
    let outcome = common::buffer_fuzz(10_000, 6).map(|s| {
        format!(
            "10000 operations: {} appends, {} evictions, {} rejections, {} duplicates refused",
            s.inserts, s.evictions, s.rejections, s.duplicates
        )
    });
    report(6, "buffer invariants", outcome);
}

#[test]
fn criterion_07_ppo_gradient_check() {
    let outcome = (|| {
        let worst = (0..20).map(common::ppo_gradient_relative_error).fold(0.0f64, f64::max);
        check(worst < 1e-4, || format!("max relative error {worst:e}"))?;
        Ok(format!("20 batches on a 37-parameter network, max relative error {worst:.1e}"))
    })();
    report(7, "PPO gradient check", outcome);
}

#[test]
fn criterion_08_smoke_convergence() {
    let outcome = (|| {
        let err = |e: diplr::Error| e.to_string();
        let env = EnvConfig {
            width: 7,
            height: 7,
            ..EnvConfig::default()
        };
        let level = GridLevel::empty(7, 7, Pos::new(0, 0), Heading::East, Pos::new(6, 6)).map_err(err)?;
        let gae = GaeConfig::default();
        let ppo = PpoConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut policy = PolicyParams::new(env.feature_len(), &PolicyConfig::default(), &mut rng);
        let start = Instant::now();
        for update in 1..=500 {
            let batch = collect(
                &policy,
                &level,
                "room",
                &env,
                &gae,
                RolloutBudget::Steps(ppo.rollout_steps),
                RolloutMode::Train,
                &mut rng,
            )
            .map_err(err)?;
            policy = ppo_update(&policy, &batch, &ppo, &gae, &mut rng).map_err(err)?.0;
            if update % 10 == 0 {
                let rate = solved_rate(&policy, &level, 20, &env).map_err(err)?;
                if rate >= 0.9 {
                    let elapsed = start.elapsed();
                    check(elapsed < Duration::from_secs(600), || format!("took {elapsed:?}"))?;
                    return Ok(format!(
                        "greedy solved rate {rate:.2} after {update} updates, {:.1}s",
                        elapsed.as_secs_f64()
                    ));
                }
            }
        }
        Err("greedy solved rate stayed below 0.9 for 500 updates".into())
    })();
    report(8, "smoke convergence", outcome);
}

#[test]
fn criterion_09_end_to_end_determinism() {
    let outcome = (|| {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        for strategy in Strategy::ALL {
            let mut logs = Vec::new();
            for rep in 0..2 {
                let out = dir.path().join(format!("{}_{rep}", strategy.name()));
                let status = std::process::Command::new(env!("CARGO_BIN_EXE_diplr"))
                    .args(["train", "--strategy", strategy.name(), "--seed", "9", "--total-updates", "50"])
                    .args(["--set", "teacher.buffer_size=8", "--set", "run.eval_every=25"])
                    .arg("--out")
                    .arg(&out)
                    .output()
                    .map_err(|e| e.to_string())?;
                check(status.status.success(), || {
                    format!("{strategy} run failed: {}", String::from_utf8_lossy(&status.stderr))
                })?;
                logs.push(std::fs::read(out.join("log.jsonl")).map_err(|e| e.to_string())?);
            }
            check(logs[0] == logs[1], || format!("{strategy} logs differ"))?;
            let last = String::from_utf8_lossy(&logs[0]).lines().last().unwrap_or("").to_string();
            check(last.contains("\"policy_updates\":50,"), || format!("{strategy} stopped early: {last}"))?;
        }
        Ok("5 strategies x 50 updates, JSONL logs bit-identical across reruns".into())
    })();
    report(9, "end-to-end determinism", outcome);
}

struct StudyRun {
    iqm: f64,
    probes: Vec<(u64, f64)>,
}

fn study_run(strategy: Strategy, seed: u64, updates: u64, probe_every: u64) -> Result<StudyRun, String> {
    let err = |e: diplr::Error| e.to_string();
    let mut cfg = ExperimentConfig::new(seed, updates);
    cfg.teacher.strategy = strategy;
    cfg.teacher.buffer_size = 32;
    cfg.teacher.refresh_every = 10;
    cfg.generator.block_budget = 15;
    cfg.run.eval_every = probe_every;
    cfg.validate().map_err(err)?;
    let (policy, records) = run_training(cfg.setup(), updates, seed).map_err(err)?;
    let record = evaluate_policy(&policy, &TestSuite::standard(), &EvalConfig::default(), &cfg.env, seed).map_err(err)?;
    let probes = records
        .iter()
        .filter_map(|r| r.buffer_mean_pairwise_distance.map(|d| (r.policy_updates, d)))
        .collect();
    Ok(StudyRun {
        iqm: record.iqm().map_err(err)?,
        probes,
    })
}

#[test]
fn criterion_10_directional_curriculum_study() {
    const SEEDS: u64 = 5;
    let outcome = (|| {
        let start = Instant::now();
        let strategies = [Strategy::Dr, Strategy::Plr, Strategy::Diplr, Strategy::DiplrMinus];
        let mut runs: Vec<Vec<StudyRun>> = Vec::new();
        for s in strategies {
            runs.push((0..SEEDS).map(|seed| study_run(s, seed, 2000, 250)).collect::<Result<_, _>>()?);
        }
        let iqms = |i: usize| runs[i].iter().map(|r| r.iqm).collect::<Vec<_>>();
        let (dr, plr, diplr) = (iqms(0), iqms(1), iqms(2));
        let wins = |other: &[f64]| diplr.iter().zip(other).filter(|(a, b)| a >= b).count();
        let (vs_dr, vs_plr) = (wins(&dr), wins(&plr));

        let mean_probe = |i: usize| -> Result<f64, String> {
            let all: Vec<&(u64, f64)> = runs[i].iter().flat_map(|r| &r.probes).collect();
            if all.is_empty() {
                return Err("no buffer distance probes recorded".into());
            }
            Ok(all.iter().map(|p| p.1).sum::<f64>() / all.len() as f64)
        };
        let matched = runs[1].iter().zip(&runs[3]).all(|(a, b)| {
            a.probes.iter().map(|p| p.0).collect::<Vec<_>>() == b.probes.iter().map(|p| p.0).collect::<Vec<_>>()
        });
        check(matched, || "probe updates differ between PLR and DIPLR-minus".into())?;
        let (d_plr, d_minus) = (mean_probe(1)?, mean_probe(3)?);

        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join("/");
        let detail = format!(
            "IQM per seed DIPLR {} DR {} PLR {} DIPLR- {}; (a) {vs_dr}/5 (b) {vs_plr}/5; \
             (c) buffer W1 DIPLR- {d_minus:.4} vs PLR {d_plr:.4}; {:.0}s",
            fmt(&diplr),
            fmt(&dr),
            fmt(&plr),
            fmt(&iqms(3)),
            start.elapsed().as_secs_f64()
        );
        let mut failed = Vec::new();
        if vs_dr < 4 {
            failed.push("(a)");
        }
        if vs_plr < 3 {
            failed.push("(b)");
        }
        if d_minus <= d_plr {
            failed.push("(c)");
        }
        if failed.is_empty() {
            Ok(detail)
        } else {
            Err(format!("{} not met: {detail}", failed.join(" ")))
        }
    })();
    report(10, "directional curriculum study", outcome);
}
