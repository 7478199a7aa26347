//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use blackwell_cli::{cmd_minmax, cmd_payoff_set, cmd_synth, cmd_verify, RunConfig, EXIT_OK, EXIT_VERIFY_FAIL};
use blackwell_core::equilibrium::{
    folk_equilibrium, jcl_preamble, lottery_automaton, lottery_players, punishments, synthesize_equilibrium,
    EquilibriumArtifact,
};
use blackwell_core::exact::{self, int, rat};
use blackwell_core::model::{Game, MixedAction, MixedProfile, Objective, PeriodicPlay, StrategyAutomaton};
use blackwell_core::stage::{matrix_game_solve_exact, stage_minmax, StageReward};
use blackwell_core::values::{blackwell_minmax, blackwell_minmax_all, closed_block_approximation, intersection_bound};
use blackwell_core::verify::{block_win_probability, exact_payoffs, verify_equilibrium};
use blackwell_core::{Error, Rational};

type Check = Result<String, String>;

fn games_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../games")
}

fn load(name: &str) -> Game {
    Game::from_json(&fs::read_to_string(games_dir().join(name)).unwrap()).unwrap()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn config(game: &str, out: &Path) -> RunConfig {
    RunConfig::new(games_dir().join(game), out)
}

fn four_outcomes_end_to_end() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = config("four_outcomes.json", dir.path());
    cmd_minmax(&cfg).map_err(|e| e.to_string())?;
    cmd_payoff_set(&cfg).map_err(|e| e.to_string())?;
    let minmax = read_json(&dir.path().join("minmax.json"))?;
    let values: Vec<&Value> = minmax["players"].as_array().unwrap().iter().map(|p| &p["exact"]).collect();
    ensure(values == [&Value::from("0"), &Value::from("0")], format!("minmax values {values:?}"))?;
    let set = read_json(&dir.path().join("payoff_set.json"))?;
    let mut vertices: Vec<Value> = set["hulls"][0]["vertices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["payoff"].clone())
        .collect();
    vertices.sort_by_key(|v| v.to_string());
    ensure(
        vertices == [serde_json::json!(["0", "0"]), serde_json::json!(["1", "1"])],
        format!("hull vertices {vertices:?}"),
    )?;
    let svg = fs::read_to_string(dir.path().join("payoff_set.svg")).map_err(|e| e.to_string())?;
    ensure(
        svg.contains(r#"class="hull" data-epsilon="0.1" data-x1="0" data-y1="0" data-x2="1" data-y2="1""#),
        "segment missing from the plot",
    )?;
    for (x, y) in [("-1", "4"), ("0", "0"), ("1", "1"), ("4", "-1")] {
        ensure(
            svg.contains(&format!(r#"class="feasible" data-x="{x}" data-y="{y}""#)),
            format!("feasible point ({x}, {y}) missing"),
        )?;
    }
    Ok("v = (0, 0), hull {(0,0), (1,1)}, segment and four feasible points drawn".into())
}

fn four_outcomes_negative() -> Check {
    let game = load("four_outcomes.json");
    let certs = blackwell_minmax_all(&game).map_err(|e| e.to_string())?;
    match folk_equilibrium(&game, certs.clone(), &[int(3), int(0)], 0.1) {
        Err(Error::TargetOutside { .. }) => {}
        other => return Err(format!("target (3,0) gave {:?}", other.map(|a| a.expected_payoffs))),
    }
    // (B,L) pays (4,-1), (T,L) pays (1,1).
    let plays = [PeriodicPlay::cycle(vec![6]), PeriodicPlay::cycle(vec![0])];
    let lottery = jcl_preamble(&[rat(3, 4), rat(1, 4)], 2).map_err(|e| e.to_string())?;
    ensure(lottery.achieved[0] >= rat(2, 3), "lottery mass on (4,-1) below 2/3")?;
    let automaton =
        lottery_automaton(&game, &lottery, &plays, &punishments(&certs)).map_err(|e| e.to_string())?;
    let artifact = EquilibriumArtifact {
        automaton,
        epsilon: 0.1,
        expected_payoffs: vec![rat(13, 4), rat(-1, 2)],
        certificates: certs,
        plays: plays.to_vec(),
        weights: lottery.achieved.clone(),
        rounds: 2,
        declared_gain_bound: 0.3,
        target_tolerance: None,
        deviation_gain: None,
    };
    let r = verify_equilibrium(&game, &artifact, 0.1).map_err(|e| e.to_string())?;
    let gain = r.deviations[1].gain;
    ensure(!r.pass, "hand-built profile passed verification")?;
    ensure(gain >= 2.0 / 3.0 - 0.05, format!("player 2 gain {gain}"))?;
    Ok(format!("target (3,0) rejected; mass 3/4 on (4,-1) fails with player 2 gain {gain}"))
}

fn pennies_pipeline() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = config("pennies_limsup.json", dir.path());
    cmd_synth(&cfg).map_err(|e| e.to_string())?;
    let game = load("pennies_limsup.json");
    let doc: blackwell_cli::ArtifactDoc =
        serde_json::from_value(read_json(&dir.path().join("automaton.json"))?).map_err(|e| e.to_string())?;
    let automaton = StrategyAutomaton::from_doc(&game, &doc.automaton).map_err(|e| e.to_string())?;
    let payoffs = exact_payoffs(&game, &automaton).map_err(|e| e.to_string())?;
    ensure(payoffs == [rat(1, 2), rat(1, 2)], format!("payoffs {payoffs:?}"))?;
    ensure(payoffs.iter().all(|p| *p >= rat(1, 2) - rat(1, 10)), "payoff below d - eps")?;
    cfg.epsilon = vec![0.2];
    cfg.reps = 100;
    let out = cmd_verify(&cfg).map_err(|e| e.to_string())?;
    ensure(out.code == EXIT_OK, out.message.clone())?;
    let v = read_json(&dir.path().join("verify.json"))?;
    let gain = v["max_gain"].as_f64().unwrap_or(f64::INFINITY);
    ensure(gain <= 0.2 + 1e-6, format!("max gain {gain}"))?;
    let methods: Vec<&Value> = v["deviations"].as_array().unwrap().iter().map(|d| &d["method"]).collect();
    ensure(methods.iter().all(|m| *m == "mdp_exact"), format!("methods {methods:?}"))?;
    Ok(format!("play pays (1/2, 1/2); verify at 0.2 passes with max gain {gain}"))
}

fn indicator_game(rows: usize, cols: usize, cells: &[Vec<(usize, usize)>; 2]) -> Game {
    let labels = |p: &str, k: usize| -> Vec<String> { (0..k).map(|a| format!("{p}{a}")).collect() };
    let set = |c: &[(usize, usize)]| -> Vec<Vec<String>> {
        c.iter().map(|&(a, b)| vec![format!("r{a}"), format!("c{b}")]).collect()
    };
    let spec = serde_json::json!({
        "players": ["1", "2"],
        "actions": {"1": labels("r", rows), "2": labels("c", cols)},
        "objectives": {
            "1": {"kind": "infinitely_often", "profiles": set(&cells[0])},
            "2": {"kind": "infinitely_often", "profiles": set(&cells[1])},
        },
        "payoff_bounds": {"1": [0, 1], "2": [0, 1]},
    });
    Game::from_json(&spec.to_string()).unwrap()
}

fn zero_one_law() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    for _ in 0..150 {
        let rows = rng.random_range(2..=3);
        let cols = rng.random_range(2..=3);
        let mut cells = [Vec::new(), Vec::new()];
        for a in 0..rows {
            for b in 0..cols {
                for c in cells.iter_mut() {
                    if rng.random_bool(0.4) {
                        c.push((a, b));
                    }
                }
            }
        }
        let game = indicator_game(rows, cols, &cells);
        for i in 0..2 {
            let (own, other) = if i == 0 { (rows, cols) } else { (cols, rows) };
            // Exact stage value by the LP on the player's own payoff matrix.
            let m: Vec<Vec<Rational>> = (0..own)
                .map(|a| {
                    (0..other)
                        .map(|b| {
                            let cell = if i == 0 { (a, b) } else { (b, a) };
                            if cells[i].contains(&cell) { int(1) } else { int(0) }
                        })
                        .collect()
                })
                .collect();
            let d = matrix_game_solve_exact(&m).map_err(|e| e.to_string())?.value;
            let Objective::InfinitelyOften { set } = game.objective(i) else { unreachable!() };
            let stage = stage_minmax(&game, &StageReward::indicator(&game, i, set)).map_err(|e| e.to_string())?;
            let cert = blackwell_minmax(&game, i).map_err(|e| e.to_string())?;
            if !stage.is_resolved() {
                continue;
            }
            let v = cert.exact.clone().ok_or("resolved bracket without a value")?;
            ensure(v.is_zero() || v.is_one(), format!("value {v} not 0 or 1"))?;
            ensure(v.is_one() == (exact::to_f64(&d) > 1e-6), format!("value {v} with d = {d}"))?;
            ensure((stage.value_lo - exact::to_f64(&d)).abs() < 1e-9, "stage bracket disagrees with the LP oracle")?;
            checked += 1;
        }
    }
    ensure(checked >= 100, format!("only {checked} resolved cases"))?;
    Ok(format!("{checked} values in {{0,1}} matching d > tau"))
}

fn block_approximation() -> Check {
    let game = load("pennies_io.json");
    let eps = 0.5;
    let schedule = closed_block_approximation(&game, 0, eps).map_err(|e| e.to_string())?;
    let first = schedule.block_length(0);
    let q = rat(3, 4);
    let pow = |k: u32| (0..k).fold(Rational::one(), |a, _| a * &q);
    ensure(pow(5) < rat(1, 4) && pow(4) >= rat(1, 4), "oracle for the block length")?;
    ensure(first == 5, format!("first block length {first}"))?;
    let Objective::InfinitelyOften { set } = game.objective(0) else { unreachable!() };
    let m: Vec<Vec<Rational>> = (0..2)
        .map(|a| (0..2).map(|b| if set.contains(game.profile_index(&[a, b])) { int(1) } else { int(0) }).collect())
        .collect();
    let sol = matrix_game_solve_exact(&m).map_err(|e| e.to_string())?;
    let cert = blackwell_minmax(&game, 0).map_err(|e| e.to_string())?;
    let response = MixedAction(sol.row.iter().map(exact::to_f64).collect());
    let profile = MixedProfile(vec![response, cert.punishment.player(1).clone()]);
    let est = block_win_probability(&game, &schedule, &profile, 5, 10_000, 17).map_err(|e| e.to_string())?;
    let bound = 1.0 - eps - 3.0 * est.std_err;
    ensure(est.mean >= bound, format!("P = {} < {bound}", est.mean))?;
    Ok(format!("first block 5; P(win in blocks 1..5) = {:.4} (SE {:.4})", est.mean, est.std_err))
}

fn intersection_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..10_000 {
        let size = rng.random_range(1..=10);
        let weights: Vec<u64> = (0..size).map(|_| rng.random_range(1..=20)).collect();
        let total: u64 = weights.iter().sum();
        let n = rng.random_range(1..=4);
        let events: Vec<Vec<bool>> = (0..n).map(|_| (0..size).map(|_| rng.random_bool(0.75)).collect()).collect();
        let mass = |f: &dyn Fn(usize) -> bool| -> u64 { (0..size).filter(|&w| f(w)).map(|w| weights[w]).sum() };
        let marginals: Vec<f64> = events.iter().map(|e| mass(&|w| e[w]) as f64 / total as f64).collect();
        let joint = mass(&|w| events.iter().all(|e| e[w]));
        // Integer form of the bound: total * (sum P - n + 1).
        let slack = events.iter().map(|e| mass(&|w| e[w]) as i128).sum::<i128>() - (n as i128 - 1) * total as i128;
        ensure(joint as i128 >= slack, format!("case {case}: joint mass {joint} below {slack}"))?;
        let bound = intersection_bound(&marginals).map_err(|e| e.to_string())?;
        ensure(joint as f64 / total as f64 >= bound - 1e-12, format!("case {case}: library bound {bound}"))?;
    }
    // Uniform space of n + 1 points, each event missing a different point.
    let n = 4;
    let marginals = vec![n as f64 / (n + 1) as f64; n];
    let bound = intersection_bound(&marginals).map_err(|e| e.to_string())?;
    ensure((bound - 1.0 / (n + 1) as f64).abs() < 1e-12, format!("tight instance bound {bound}"))?;
    Ok("10000 random spaces satisfy the bound; equality on the tight instance".into())
}

/// Exact state distribution after `steps` stages, masses over `16^(n * steps)`.
fn propagate(game: &Game, a: &StrategyAutomaton, steps: usize) -> Vec<u128> {
    let scale = |x: f64| -> u128 {
        let k = x * 16.0;
        assert_eq!(k.fract(), 0.0);
        k as u128
    };
    let mut dist = vec![0u128; a.n_states()];
    dist[a.initial] = 1;
    for _ in 0..steps {
        let mut next = vec![0u128; a.n_states()];
        for (s, &p) in dist.iter().enumerate().filter(|(_, &p)| p > 0) {
            for q in game.profiles() {
                let w: u128 = (0..game.n_players())
                    .map(|i| scale(a.emission[s].player(i).weights()[game.action_of(q, i)]))
                    .product();
                if w > 0 {
                    next[a.next(s, q)] += p * w;
                }
            }
        }
        dist = next;
    }
    dist
}

fn jcl_manipulation() -> Check {
    let game = load("four_outcomes.json");
    let certs = blackwell_minmax_all(&game).map_err(|e| e.to_string())?;
    let plays = [PeriodicPlay::cycle(vec![0]), PeriodicPlay::cycle(vec![4]), PeriodicPlay::cycle(vec![6])];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut runs = 0;
    for rounds in 1..=10 {
        let lottery = jcl_preamble(&[rat(2, 7), rat(3, 7), rat(2, 7)], rounds).map_err(|e| e.to_string())?;
        let a = lottery_automaton(&game, &lottery, &plays[..lottery.n_outcomes()], &punishments(&certs))
            .map_err(|e| e.to_string())?;
        let honest = propagate(&game, &a, rounds);
        let states: Vec<(usize, usize)> = (0..a.n_states())
            .filter_map(|s| {
                let l = &a.labels[s];
                l.starts_with("lottery").then(|| (s, l.strip_prefix("lottery:").map_or(0, str::len)))
            })
            .collect();
        for deviator in lottery_players(&game).map_err(|e| e.to_string())? {
            let k = game.n_actions(deviator);
            let deviate = |choose: &mut dyn FnMut(usize) -> MixedAction| {
                let mut b = a.clone();
                for &(s, depth) in &states {
                    b.emission[s].0[deviator] = choose(depth);
                }
                b
            };
            for pattern in 0u64..1 << rounds {
                let b = deviate(&mut |depth| MixedAction::pure(k, ((pattern >> depth) & 1) as usize));
                ensure(propagate(&game, &b, rounds) == honest, format!("R = {rounds}, bits {pattern:b}"))?;
                runs += 1;
            }
            for _ in 0..100 {
                let b = deviate(&mut |_| {
                    let c = rng.random_range(0..=16) as f64 / 16.0;
                    let mut w = vec![0.0; k];
                    w[0] = c;
                    w[1] = 1.0 - c;
                    MixedAction(w)
                });
                ensure(propagate(&game, &b, rounds) == honest, format!("R = {rounds}, random behaviour"))?;
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} deviations for R = 1..10 leave the outcome distribution unchanged"))
}

fn mass_inequality() -> Check {
    let eps = 0.1;
    let mut lines = Vec::new();
    let mut corpus: Vec<PathBuf> = fs::read_dir(games_dir())
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    corpus.sort();
    for path in corpus {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let game = load(&name);
        let mut artifacts = Vec::new();
        match synthesize_equilibrium(&game, eps) {
            Ok(a) => artifacts.push(a),
            Err(Error::Infeasible(_)) => {
                lines.push(format!("{name}: infeasible, no artifact"));
                continue;
            }
            Err(e) => return Err(format!("{name}: {e}")),
        }
        if name == "four_outcomes.json" {
            let certs = blackwell_minmax_all(&game).map_err(|e| e.to_string())?;
            artifacts.push(folk_equilibrium(&game, certs, &[rat(1, 3), rat(1, 3)], eps).map_err(|e| e.to_string())?);
        }
        for a in &artifacts {
            let r = verify_equilibrium(&game, a, 2.0 * eps).map_err(|e| e.to_string())?;
            let bound = game.n_players() as f64 * eps.cbrt();
            ensure(
                r.mass_check.mass_outside < bound,
                format!("{name}: mass {} >= {bound}", r.mass_check.mass_outside),
            )?;
            lines.push(format!("{name}: {}", r.mass_check.mass_outside));
        }
    }
    Ok(format!("mass outside below n eps^(1/3): {}", lines.join("; ")))
}

fn run_binary(args: &[&str], threads: &str) -> Result<i32, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_blackwell"))
        .args(args)
        .env("BLACKWELL_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    Ok(out.status.code().unwrap_or(-1))
}

fn determinism() -> Check {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for game in ["four_outcomes.json", "pennies_limsup.json", "pennies_io.json", "infeasible_horizon.json"] {
        let spec = games_dir().join(game);
        let spec = spec.to_str().unwrap();
        let mut dirs = Vec::new();
        for (k, threads) in ["1", "4", "1"].iter().enumerate() {
            let out = root.path().join(format!("{game}-{k}"));
            let out_s = out.to_str().unwrap();
            for cmd in ["minmax", "synth", "payoff-set"] {
                run_binary(&[cmd, "--spec", spec, "--out", out_s, "--seed", "3"], threads)?;
            }
            if out.join("automaton.json").exists() {
                let code = run_binary(
                    &["verify", "--spec", spec, "--out", out_s, "--seed", "3", "--reps", "200", "--epsilon", "0.2"],
                    threads,
                )?;
                ensure(code == EXIT_OK || code == EXIT_VERIFY_FAIL, format!("verify exit {code}"))?;
            }
            dirs.push(out);
        }
        let mut names: Vec<_> = fs::read_dir(&dirs[0]).map_err(|e| e.to_string())?.map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for name in names {
            let first = fs::read(dirs[0].join(&name)).map_err(|e| e.to_string())?;
            for d in &dirs[1..] {
                let other = fs::read(d.join(&name)).map_err(|e| e.to_string())?;
                ensure(first == other, format!("{game}/{} differs", name.to_string_lossy()))?;
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} output files byte-identical across reruns and thread counts"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Check); 9] = [
        ("four-outcome game end-to-end", Duration::from_secs(1), four_outcomes_end_to_end),
        ("four-outcome game negative test", Duration::from_secs(5), four_outcomes_negative),
        ("matching pennies pipeline", Duration::from_secs(10), pennies_pipeline),
        ("0-1 law", Duration::from_secs(30), zero_one_law),
        ("block approximation", Duration::from_secs(30), block_approximation),
        ("intersection bound", Duration::from_secs(10), intersection_suite),
        ("lottery manipulation-proofness", Duration::from_secs(10), jcl_manipulation),
        ("mass outside the IR set", Duration::from_secs(10), mass_inequality),
        ("determinism", Duration::from_secs(60), determinism),
    ];
    let mut failed = 0;
    for (k, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (status, detail) = match result {
            Ok(d) if elapsed <= *limit => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; took {elapsed:.2?}, limit {limit:?}")),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {} {status} {name} ({elapsed:.2?}): {detail}", k + 1);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
