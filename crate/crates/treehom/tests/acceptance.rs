//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use treehom::circular::{extract_witness, implication_check, verify_circular_n};
use treehom::construct::decompose;
use treehom::digraph::{compute_leveling, gg_height_check, gg_up_component, up_component, Digraph, Walk};
use treehom::exec::Exec;
use treehom::generate::{
    generate_tree, planted_instance, random_instance, random_path, random_pattern_free, random_tree, GenConfig,
    GenMode,
};
use treehom::hm::{build_hm_chain, verify_chain, ChainCheck};
use treehom::ladder::{brute_force_hm_search, ladder_hm_chain, ladder_no_shorter_chain, make_ladder, validate_trace};
use treehom::pattern::{detect_pattern, detect_pattern_with, oracle_detect_pattern};
use treehom::solver::{oracle_solve, solve};
use treehom::waves::{path_constructibility_check, wave_decompose};

const TREES: usize = 2000;
const TREE_MAX: usize = 60;
const SOLVER_PAIRS: usize = 1000;
const HM_TREES: usize = 500;
const PATHS: usize = 2000;
const DIGRAPHS: usize = 500;
const RECOGNIZE_BUDGET: Duration = Duration::from_secs(60);
const SOLVER_BUDGET: Duration = Duration::from_secs(120);
const LARGE_BUDGET: Duration = Duration::from_secs(10);
const MAX_SLOPE: f64 = 3.3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Seeded corpus alternating arbitrary and pattern-free generation.
fn tree_corpus() -> Vec<Digraph> {
    let mut rng = SplitMix64::seed_from_u64(0x7EE5);
    (0..TREES)
        .map(|i| {
            let mode = if i % 2 == 0 { GenMode::Arbitrary } else { GenMode::PatternFree };
            let n = if mode == GenMode::Arbitrary && i % 4 == 0 { rng.gen_range(1..=14) } else { rng.gen_range(1..=TREE_MAX) };
            generate_tree(&GenConfig::new(rng.gen(), n).mode(mode))
        })
        .collect()
}

fn recognizer_matches_oracle(corpus: &[Digraph]) -> Outcome {
    let start = Instant::now();
    let bad = Exec::Parallel
        .map_collect(corpus.len(), |i| {
            let t = &corpus[i];
            detect_pattern(t).unwrap().is_some() != oracle_detect_pattern(t).unwrap().is_some()
        })
        .into_iter()
        .filter(|&b| b)
        .count();
    let took = start.elapsed();
    outcome(
        bad == 0 && took < RECOGNIZE_BUDGET,
        format!("{} trees, {bad} mismatches, {:.2}s (budget {}s)", corpus.len(), took.as_secs_f64(), RECOGNIZE_BUDGET.as_secs()),
    )
}

fn decomposition_matches_recognizer(corpus: &[Digraph]) -> Outcome {
    let results = Exec::Parallel.map_collect(corpus.len(), |i| {
        let t = &corpus[i];
        let free = detect_pattern(t).unwrap().is_none();
        match decompose(t) {
            Ok(d) => {
                let mut got = d.realize().unwrap().original_arcs();
                got.sort_unstable();
                (free && got == t.sorted_arcs(), free)
            }
            Err(_) => (!free, free),
        }
    });
    let bad = results.iter().filter(|r| !r.0).count();
    let free = results.iter().filter(|r| r.1).count();
    outcome(bad == 0, format!("{} trees ({free} pattern-free), {bad} mismatches", corpus.len()))
}

fn solver_matches_oracle() -> Outcome {
    let densities = [0.2, 0.5, 1.0];
    let start = Instant::now();
    let results = Exec::Parallel.map_collect(SOLVER_PAIRS, |i| {
        let mut rng = SplitMix64::seed_from_u64(0x501E ^ (i as u64) << 20);
        let (t, d) = random_pattern_free(&GenConfig::new(rng.gen(), rng.gen_range(1..=30)));
        let cfg = GenConfig::new(rng.gen(), rng.gen_range(1..=40)).density(densities[i % 3]);
        let inst = if i % 2 == 0 { random_instance(&t, &cfg) } else { planted_instance(&t, &cfg).0 };
        let fast = solve(&d, &t, &inst).unwrap();
        let slow = oracle_solve(&t, &inst).unwrap().is_some();
        (fast == slow, slow)
    });
    let took = start.elapsed();
    let bad = results.iter().filter(|r| !r.0).count();
    let yes = results.iter().filter(|r| r.1).count();
    outcome(
        bad == 0 && took < SOLVER_BUDGET,
        format!(
            "{SOLVER_PAIRS} pairs ({yes} YES), {bad} mismatches, {:.2}s (budget {}s)",
            took.as_secs_f64(),
            SOLVER_BUDGET.as_secs()
        ),
    )
}

fn hm_chains_verify() -> Outcome {
    let failures: Vec<usize> = (0..HM_TREES)
        .filter(|&i| {
            let (t, d) = random_pattern_free(&GenConfig::new(0x4A11 + i as u64, 1 + i % 40));
            let chain = build_hm_chain(&d, &t).unwrap();
            verify_chain(&chain, &t, Exec::Parallel) != ChainCheck::Ok
        })
        .collect();
    outcome(failures.is_empty(), format!("{HM_TREES} trees, {} failures {failures:?}", failures.len()))
}

fn witnesses_verify(corpus: &[Digraph]) -> Outcome {
    let results = Exec::Parallel.map_collect(corpus.len(), |i| {
        let t = &corpus[i];
        match extract_witness(t) {
            Ok(Some(w)) => Some(verify_circular_n(&w, t) && implication_check(&w, t)),
            Ok(None) => None,
            Err(_) => Some(false),
        }
    });
    let fired = results.iter().flatten().count();
    let bad = results.iter().flatten().filter(|&&ok| !ok).count();
    outcome(bad == 0 && fired > 0, format!("{fired} pattern trees, {bad} failures"))
}

fn ladders_behave() -> Outcome {
    let mut failed = Vec::new();
    for n in 1..=8 {
        let g = make_ladder(n).unwrap();
        let chain_ok = verify_chain(&ladder_hm_chain(n).unwrap(), &g, Exec::Parallel) == ChainCheck::Ok;
        let trace = ladder_no_shorter_chain(n).unwrap();
        if !chain_ok || !trace.contradicts() || !validate_trace(&trace) {
            failed.push(n);
        }
    }
    let search = brute_force_hm_search(&make_ladder(1).unwrap(), 1);
    let none = matches!(search, Ok(None));
    outcome(
        failed.is_empty() && none,
        format!("n = 1..8, {} failures {failed:?}, length-1 search on ladder(1): {}", failed.len(), if none { "none" } else { "FOUND" }),
    )
}

fn path_sample(rng: &mut SplitMix64, i: usize) -> Walk {
    let n = rng.gen_range(1..=40);
    if i.is_multiple_of(2) {
        let g = random_path(&GenConfig::new(rng.gen(), n));
        return Walk::from_vertices(&g, &(0..n).collect::<Vec<_>>()).unwrap();
    }
    // long monotone runs make pattern-free paths common
    let bias = [0.6, 0.8, 0.9, 0.95][i / 2 % 4];
    let mut dir = rng.gen_bool(0.5);
    let forward: Vec<bool> = (1..n)
        .map(|_| {
            if !rng.gen_bool(bias) {
                dir = !dir;
            }
            dir
        })
        .collect();
    Walk::new((0..n).collect(), forward)
}

fn waves_match_recognizer() -> Outcome {
    let mut rng = SplitMix64::seed_from_u64(0x3A7E);
    let paths: Vec<Walk> = (0..PATHS).map(|i| path_sample(&mut rng, i)).collect();
    let mut bad = 0;
    let mut free = 0;
    for p in &paths {
        let pf = detect_pattern(&p.to_digraph()).unwrap().is_none();
        free += usize::from(pf);
        let d = wave_decompose(p);
        let round_trip = d.as_ref().map_or(true, |d| d.reassemble().as_ref() == Some(p));
        if d.is_ok() != pf || path_constructibility_check(p) != pf || !round_trip {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{PATHS} paths ({free} pattern-free), {bad} mismatches"))
}

fn time_detect(n: usize, reps: usize) -> Duration {
    let mut total = Duration::ZERO;
    for r in 0..reps {
        let t = random_pattern_free(&GenConfig::new(0x5CA1 + r as u64, n)).0;
        let start = Instant::now();
        let found = detect_pattern_with(&t, Exec::Sequential).unwrap();
        total += start.elapsed();
        assert!(found.is_none());
    }
    total / reps as u32
}

/// Least-squares slope of log(time) against log(n).
fn loglog_slope(points: &[(usize, Duration)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.as_secs_f64().ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

fn recognition_scales() -> Outcome {
    let big = time_detect(500, 1);
    let points: Vec<(usize, Duration)> = [100, 200, 400].iter().map(|&n| (n, time_detect(n, 3))).collect();
    let slope = loglog_slope(&points);
    let times: Vec<String> = points.iter().map(|(n, t)| format!("n={n} {:.3}s", t.as_secs_f64())).collect();
    outcome(
        big < LARGE_BUDGET && slope <= MAX_SLOPE,
        format!(
            "n=500 {:.3}s (budget {}s), {}, slope {slope:.2} (max {MAX_SLOPE})",
            big.as_secs_f64(),
            LARGE_BUDGET.as_secs(),
            times.join(", ")
        ),
    )
}

/// Random connected digraph on at most 12 vertices; leveled on even samples.
fn connected_digraph(rng: &mut SplitMix64, i: usize) -> Digraph {
    let n = rng.gen_range(1..=12);
    let mut g = random_tree(&GenConfig::new(rng.gen(), n));
    let lv = compute_leveling(&g).unwrap();
    for _ in 0..rng.gen_range(0..=n) {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let fits = i % 2 == 1 || lv.level[v] == lv.level[u] + 1;
        if u != v && fits && !g.has_arc(u, v) && !g.has_arc(v, u) {
            g.add_arc(u, v).unwrap();
        }
    }
    g
}

fn product_graph_agrees() -> Outcome {
    let mut rng = SplitMix64::seed_from_u64(0x6606);
    let mut bad = 0;
    let mut leveled = 0;
    for i in 0..DIGRAPHS {
        let g = connected_digraph(&mut rng, i);
        let ok = match compute_leveling(&g) {
            Ok(lv) => {
                leveled += 1;
                let h = lv.height;
                gg_height_check(&g, h)
                    && (h == 0 || !gg_height_check(&g, h - 1))
                    && (0..g.n()).all(|v| up_component(&g, &lv, v) == gg_up_component(&g, &lv, v))
            }
            Err(_) => (0..=g.n()).all(|d| !gg_height_check(&g, d)),
        };
        bad += usize::from(!ok);
    }
    outcome(bad == 0, format!("{DIGRAPHS} digraphs ({leveled} leveled), {bad} mismatches"))
}

fn main() -> ExitCode {
    let corpus = tree_corpus();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("recognizer matches oracle", Box::new(|| recognizer_matches_oracle(&corpus))),
        ("decomposition iff pattern-free", Box::new(|| decomposition_matches_recognizer(&corpus))),
        ("solver matches oracle", Box::new(solver_matches_oracle)),
        ("HM chains verify on pattern-free trees", Box::new(hm_chains_verify)),
        ("circular N witnesses verify", Box::new(|| witnesses_verify(&corpus))),
        ("ladder chains and traces", Box::new(ladders_behave)),
        ("waves iff pattern-free iff constructible", Box::new(waves_match_recognizer)),
        ("recognition runtime scaling", Box::new(recognition_scales)),
        ("product graph height and up-components", Box::new(product_graph_agrees)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!("{} #{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
