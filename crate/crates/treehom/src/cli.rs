//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde_json::{json, Value};

use crate::circular::{extract_witness, implication_check, verify_circular_n};
use crate::construct::{decompose, parse_derivation, Derivation};
use crate::digraph::{Digraph, Walk};
use crate::exec::Exec;
use crate::generate::{random_instance, random_pattern_free_tree, random_tree, GenConfig};
use crate::hm::{build_hm_chain, verify_chain, ChainCheck};
use crate::io::{parse_digraph, parse_instance, write_digraph, write_instance};
use crate::ladder::{brute_force_hm_search, ladder_hm_chain, ladder_no_shorter_chain, make_ladder, validate_trace};
use crate::pattern::{detect_pattern, oracle_detect_pattern, PatternKind};
use crate::solver::{oracle_solve, Solver};
use crate::waves::{walk_of_path, wave_decompose};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "treehom", version, about = "List homomorphism tools for oriented trees")]
pub struct Cli {
    /// Suppress diagnostics on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Emit one JSON object instead of text lines.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Search a tree for a Z6 or fuzzy N.
    Recognize { tree: PathBuf },
    /// Print a join derivation of a pattern-free tree.
    Decompose { tree: PathBuf },
    /// Decide a list homomorphism instance against a pattern-free tree.
    Solve {
        tree: PathBuf,
        instance: PathBuf,
        /// Derivation of the tree, as printed by `decompose`.
        #[arg(long)]
        derivation: Option<PathBuf>,
    },
    /// Search for a list homomorphism by backtracking.
    Oracle { tree: PathBuf, instance: PathBuf },
    /// Build and verify the length-3 conservative chain.
    Hm {
        tree: PathBuf,
        #[arg(long)]
        derivation: Option<PathBuf>,
    },
    /// Extract and verify a circular N.
    Witness { tree: PathBuf },
    /// Verify the ladder chain and replay the impossibility trace.
    Ladder { n: usize },
    /// Decompose an oriented path into waves.
    Wave { path: PathBuf },
    /// Generate a tree, pattern-free tree or instance.
    Gen {
        kind: GenKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        /// Template for `instance`; defaults to `gen pftree` with the same seed and n.
        #[arg(long)]
        tree: Option<PathBuf>,
    },
    /// Run the invariant battery on seeded samples.
    Crosscheck {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Tree,
    Pftree,
    Instance,
}

#[derive(Debug)]
pub struct Report {
    pub code: i32,
    pub lines: Vec<String>,
    pub json: Value,
    pub diagnostics: Vec<String>,
}

impl Report {
    fn new(code: i32, lines: Vec<String>, json: Value) -> Report {
        Report { code, lines, json, diagnostics: Vec::new() }
    }

    fn note(mut self, d: impl Into<String>) -> Report {
        self.diagnostics.push(d.into());
        self
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub msg: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, msg: msg.into() }
}

fn internal(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_INTERNAL, msg: msg.into() }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_digraph(path: &Path) -> Result<Digraph, Failure> {
    parse_digraph(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_tree(path: &Path) -> Result<Digraph, Failure> {
    let t = read_digraph(path)?;
    if !t.is_tree() {
        return Err(usage(format!("{}: not an oriented tree", path.display())));
    }
    Ok(t)
}

fn derivation_for(t: &Digraph, file: Option<&Path>) -> Result<Option<Derivation>, Failure> {
    match file {
        Some(p) => parse_derivation(&read(p)?).map(Some).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => Ok(decompose(t).ok()),
    }
}

fn ids(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn walk_json(w: &Walk) -> Value {
    json!({ "vertices": w.vertices, "forward": w.forward })
}

pub fn execute(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::Recognize { tree } => recognize(&read_tree(tree)?),
        Command::Decompose { tree } => {
            let t = read_tree(tree)?;
            match decompose(&t) {
                Ok(d) => Ok(Report::new(EXIT_OK, vec![d.to_string()], json!({ "derivation": d.to_string() }))),
                Err(e) => Ok(Report::new(EXIT_NEGATIVE, vec!["PATTERN".into()], json!({ "derivation": null }))
                    .note(e.to_string())),
            }
        }
        Command::Solve { tree, instance, derivation } => {
            let t = read_tree(tree)?;
            let inst = parse_instance(&read(instance)?, t.n()).map_err(|e| usage(format!("{}: {e}", instance.display())))?;
            let d = derivation_for(&t, derivation.as_deref())?
                .ok_or_else(|| usage("tree contains a pattern; use `oracle`"))?;
            let mut s = Solver::new(&d, &t).map_err(|e| usage(e.to_string()))?;
            let yes = s.solve(&inst).map_err(|e| usage(e.to_string()))?;
            let word = if yes { "YES" } else { "NO" };
            Ok(Report::new(if yes { EXIT_OK } else { EXIT_NEGATIVE }, vec![word.into()], json!({ "answer": yes })))
        }
        Command::Oracle { tree, instance } => {
            let t = read_tree(tree)?;
            let inst = parse_instance(&read(instance)?, t.n()).map_err(|e| usage(format!("{}: {e}", instance.display())))?;
            match oracle_solve(&t, &inst).map_err(|e| usage(e.to_string()))? {
                Some(h) => Ok(Report::new(EXIT_OK, vec![ids(&h)], json!({ "map": h }))),
                None => Ok(Report::new(EXIT_NEGATIVE, vec!["NO".into()], json!({ "map": null }))),
            }
        }
        Command::Hm { tree, derivation } => {
            let t = read_tree(tree)?;
            let Some(d) = derivation_for(&t, derivation.as_deref())? else {
                return Ok(Report::new(EXIT_NEGATIVE, vec!["PATTERN".into()], json!({ "chain": null })));
            };
            let chain = build_hm_chain(&d, &t).map_err(|e| usage(e.to_string()))?;
            match verify_chain(&chain, &t, Exec::default()) {
                ChainCheck::Ok => Ok(Report::new(EXIT_OK, vec!["HM3 OK".into()], json!({ "chain": "ok" }))),
                bad => Err(internal(format!("chain check failed: {bad:?}"))),
            }
        }
        Command::Witness { tree } => witness(&read_tree(tree)?),
        Command::Ladder { n } => ladder(*n),
        Command::Wave { path } => {
            let g = read_digraph(path)?;
            let w = walk_of_path(&g).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            match wave_decompose(&w) {
                Ok(d) => {
                    let lines = d.to_string().lines().map(String::from).collect();
                    let j = json!({
                        "reversed": d.reversed,
                        "u": walk_json(&d.u),
                        "a": walk_json(&d.a),
                        "v": walk_json(&d.v),
                    });
                    Ok(Report::new(EXIT_OK, lines, j))
                }
                Err(f) => Ok(Report::new(EXIT_NEGATIVE, vec!["PATTERN".into()], json!({ "decomposition": null }))
                    .note(format!("{f:?}"))),
            }
        }
        Command::Gen { kind, seed, n, density, tree } => {
            if *n == 0 {
                return Err(usage("--n must be at least 1"));
            }
            let cfg = GenConfig::new(*seed, *n).density(*density);
            let text = match kind {
                GenKind::Tree => write_digraph(&random_tree(&cfg)),
                GenKind::Pftree => write_digraph(&random_pattern_free_tree(&cfg)),
                GenKind::Instance => {
                    let t = match tree {
                        Some(p) => read_tree(p)?,
                        None => random_pattern_free_tree(&cfg),
                    };
                    write_instance(&random_instance(&t, &cfg))
                }
            };
            let lines = text.lines().map(String::from).collect();
            Ok(Report::new(EXIT_OK, lines, json!({ "text": text })))
        }
        Command::Crosscheck { samples, seed } => crosscheck(*samples, *seed),
    }
}

fn recognize(t: &Digraph) -> Result<Report, Failure> {
    let w = detect_pattern(t).map_err(|e| usage(e.to_string()))?;
    Ok(match w {
        None => Report::new(EXIT_OK, vec!["PATTERN-FREE".into()], json!({ "pattern": null })),
        Some(p) => {
            let kind = match p.kind {
                PatternKind::Z6 => "Z6",
                PatternKind::FuzzyN => "FUZZYN",
            };
            let (u, v) = p.pair();
            let lines = vec![format!("{kind} {}", ids(&p.markers)), format!("pair {u} {v}")];
            Report::new(EXIT_OK, lines, json!({ "pattern": kind, "markers": p.markers, "pair": [u, v] }))
        }
    })
}

fn witness(t: &Digraph) -> Result<Report, Failure> {
    let w = extract_witness(t).map_err(|e| internal(e.to_string()))?;
    let Some(w) = w else {
        return Ok(Report::new(EXIT_NEGATIVE, vec!["PATTERN-FREE".into()], json!({ "witness": null })));
    };
    if !(verify_circular_n(&w, t) && implication_check(&w, t)) {
        return Err(internal("extracted witness failed verification"));
    }
    let lines = vec![
        format!("X {}", ids(&w.x.vertices)),
        format!("Y {}", ids(&w.y.vertices)),
        format!("Z {}", ids(&w.z.vertices)),
        "VERIFIED".into(),
    ];
    let j = json!({ "x": walk_json(&w.x), "y": walk_json(&w.y), "z": walk_json(&w.z), "verified": true });
    Ok(Report::new(EXIT_OK, lines, j))
}

fn ladder(n: usize) -> Result<Report, Failure> {
    let h = make_ladder(n).map_err(|e| usage(e.to_string()))?;
    let name = |v: usize| if v <= n { format!("a{v}") } else { format!("b{}", v - n - 1) };
    let triple = |t: [usize; 3]| format!("{},{},{}", name(t[0]), name(t[1]), name(t[2]));
    let chain = ladder_hm_chain(n).map_err(|e| usage(e.to_string()))?;
    let check = verify_chain(&chain, &h, Exec::default());
    let mut lines = vec![format!("chain of length {}: {}", n + 1, if check == ChainCheck::Ok { "OK" } else { "FAIL" })];
    let trace = ladder_no_shorter_chain(n).map_err(|e| usage(e.to_string()))?;
    for s in &trace.steps {
        let arcs: Vec<String> = s.arcs.iter().map(|&(u, v)| format!("{}{}", name(u), name(v))).collect();
        lines.push(format!(
            "f{}({}) = {} forces f{}({}) = {} via {}",
            s.op,
            triple(s.premise_args),
            name(s.premise_value),
            s.op,
            triple(s.args),
            name(s.value),
            arcs.join(" ")
        ));
    }
    lines.push(format!(
        "contradiction: f{n}(a{n},a{n},b{n}) is forced to {} but must be {}",
        name(trace.forced),
        name(trace.required)
    ));
    let valid = validate_trace(&trace);
    lines.push(format!("no chain of length {n}: {}", if valid { "VERIFIED" } else { "FAIL" }));
    let mut searched = Value::Null;
    if let Ok(found) = brute_force_hm_search(&h, n) {
        lines.push(format!("search for length {n}: {}", if found.is_some() { "FOUND" } else { "none" }));
        searched = json!(found.is_some());
    }
    let j = json!({ "n": n, "chain_ok": check == ChainCheck::Ok, "trace_valid": valid, "search_found": searched });
    if check != ChainCheck::Ok || !valid || searched == json!(true) {
        return Err(internal(lines.join("\n")));
    }
    Ok(Report::new(EXIT_OK, lines, j))
}

/// Outcome of one crosscheck sample; `None` when every check passed.
fn crosscheck_sample(seed: u64) -> Option<String> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let n = rng.gen_range(1..=30);
    let cfg = GenConfig::new(rng.gen(), n);
    let t = if rng.gen_bool(0.5) { random_tree(&cfg) } else { random_pattern_free_tree(&cfg) };
    let fast = detect_pattern(&t).ok()?;
    let slow = oracle_detect_pattern(&t).ok()?;
    if fast.is_some() != slow.is_some() {
        return Some("recognizer disagrees with oracle".into());
    }
    match (decompose(&t), fast) {
        (Ok(d), None) => {
            let r = d.realize().ok()?;
            let mut got = r.original_arcs();
            got.sort_unstable();
            if got != t.sorted_arcs() {
                return Some("derivation does not realize the tree".into());
            }
            let chain = build_hm_chain(&d, &t).ok()?;
            if verify_chain(&chain, &t, Exec::Sequential) != ChainCheck::Ok {
                return Some("HM chain failed verification".into());
            }
            let density = [0.2, 0.5, 1.0][rng.gen_range(0..3)];
            let inst = random_instance(&t, &GenConfig::new(rng.gen(), rng.gen_range(1..=20)).density(density));
            let fast = Solver::new(&d, &t).and_then(|mut s| s.solve(&inst));
            let slow = oracle_solve(&t, &inst);
            match (fast, slow) {
                (Ok(a), Ok(b)) if a == b.is_some() => None,
                (a, b) => Some(format!("solver {a:?} vs oracle {:?}", b.map(|m| m.is_some()))),
            }
        }
        (Err(_), Some(_)) => match extract_witness(&t) {
            Ok(Some(w)) if verify_circular_n(&w, &t) && implication_check(&w, &t) => None,
            other => Some(format!("witness failed: {other:?}")),
        },
        (Ok(_), Some(_)) => Some("decomposed a tree with a pattern".into()),
        (Err(e), None) => Some(format!("decompose failed on a pattern-free tree: {e}")),
    }
}

fn crosscheck(samples: usize, seed: u64) -> Result<Report, Failure> {
    let mut base = SplitMix64::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..samples).map(|_| base.gen()).collect();
    let results = Exec::default().map_collect(samples, |i| crosscheck_sample(seeds[i]));
    let mut lines = Vec::new();
    let mut failed = Vec::new();
    for (i, r) in results.iter().enumerate() {
        if let Some(msg) = r {
            lines.push(format!("sample {i} (seed {}): {msg}", seeds[i]));
            failed.push(i);
        }
    }
    let ok = samples - failed.len();
    lines.push(format!("{ok}/{samples} OK"));
    let j = json!({ "samples": samples, "ok": ok, "failed": failed });
    let code = if failed.is_empty() { EXIT_OK } else { EXIT_INTERNAL };
    Ok(Report::new(code, lines, j))
}

/// Applies `TREEHOM_THREADS` to the worker pool, if set.
pub fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("TREEHOM_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("TREEHOM_THREADS: not a number: {v}"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

/// Parses `args`, runs the command and writes its report; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match execute(&cli) {
        Ok(r) => {
            if cli.json {
                let _ = writeln!(out, "{}", r.json);
            } else {
                for l in &r.lines {
                    let _ = writeln!(out, "{l}");
                }
            }
            if !cli.quiet {
                for d in &r.diagnostics {
                    let _ = writeln!(err, "{d}");
                }
            }
            r.code
        }
        Err(f) => {
            if !cli.quiet || f.code == EXIT_INTERNAL {
                let _ = writeln!(err, "error: {}", f.msg);
            }
            f.code
        }
    }
}
