use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use btfvs::cfvs::{pipeline_solve, CfvsError, ConstantsProfile, PipelineOptions};
use btfvs::dfvc::dfvc_solve;
use btfvs::graph::{BipartiteTournament, VertexSet};
use btfvs::harness::{self, BenchSolver, Fault, GenKind, GenSpec, SuiteConfig};
use btfvs::io::{self, InstanceFile, IoError};
use btfvs::msequence::m_sequence;
use btfvs::solvers::{
    approx4, approx_fvs, branch_solve_with, exact_min_fvs_with, oracle_min_fvs, verify_fvs, Approx,
    BranchOptions, Constraints, SolveResult, Status,
};
use btfvs::structure::{canonical_sequence, find_square, is_acyclic};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "btfvs",
    version,
    about = "Feedback vertex sets in bipartite tournaments"
)]
struct Cli {
    /// Seed for generators and the property suite.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for the search.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Pipeline constants: paper, toy or file:<path>.
    #[arg(long, global = true, default_value = "toy")]
    profile: String,
    /// Print results as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide FVS <= k by branching; without k, find a minimum FVS.
    Solve {
        file: PathBuf,
        #[arg(short)]
        k: Option<usize>,
        /// Stop after this many search nodes.
        #[arg(long)]
        node_limit: Option<u64>,
    },
    /// Exhaustive minimum FVS (small instances only).
    Oracle {
        file: PathBuf,
        #[arg(short)]
        k: Option<usize>,
    },
    /// Greedy square-deletion 4-approximation.
    Approx {
        file: PathBuf,
        #[arg(short)]
        k: Option<usize>,
    },
    /// Minimum FVS by budget iteration.
    Exact { file: PathBuf },
    /// Acyclicity, a square witness, the canonical sequence and optionally an M-sequence.
    Structure {
        file: PathBuf,
        /// Comma-separated labels of M.
        #[arg(long)]
        m: Option<String>,
    },
    /// Decide FVS <= k through the constrained-FVS reduction.
    Pipeline {
        file: PathBuf,
        #[arg(short)]
        k: Option<usize>,
        /// Write every intermediate family as JSON into this directory.
        #[arg(long)]
        emit_families: Option<PathBuf>,
        /// Write per-stage family sizes as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Report no instead of falling back to branching.
        #[arg(long)]
        no_fallback: bool,
    },
    /// Write generated instances named <kind>-<m>x<n>-<seed>.json.
    Gen {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(short)]
        m: usize,
        #[arg(short)]
        n: usize,
        /// FVS size planted by the planted kind.
        #[arg(long, default_value_t = 2)]
        k_plant: usize,
        /// Twin class size for the twins kind.
        #[arg(long, default_value_t = 2)]
        class_size: usize,
        /// Number of instances; seeds run from --seed upward.
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check that a vertex list is an FVS (of size <= k if given).
    Verify {
        file: PathBuf,
        /// Comma-separated labels.
        #[arg(long)]
        solution: String,
        #[arg(short)]
        k: Option<usize>,
    },
    /// Run the property suite.
    CheckLemmas {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Inject a deliberate fault, to see the suite catch it.
        #[arg(long, value_enum)]
        inject: Vec<FaultArg>,
    },
    /// Run solvers over every instance file in a directory.
    Bench {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "oracle,branch,exact,approx4"
        )]
        solvers: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a disjoint feedback vertex cover instance.
    Dfvc { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Uniform,
    Acyclic,
    Planted,
    Twins,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    InvertAcyclic,
    ShrinkApprox,
}

enum Fail {
    Usage(String),
    Invariant(String),
}

impl From<IoError> for Fail {
    fn from(e: IoError) -> Self {
        Fail::Usage(e.to_string())
    }
}

impl From<CfvsError> for Fail {
    fn from(e: CfvsError) -> Self {
        match e {
            CfvsError::InvalidProfile(_) => Fail::Usage(e.to_string()),
            other => Fail::Invariant(other.to_string()),
        }
    }
}

type Run = Result<bool, Fail>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Fail::Invariant(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> Run {
    match &cli.cmd {
        Cmd::Solve {
            file,
            k,
            node_limit,
        } => solve(cli, file, *k, *node_limit),
        Cmd::Oracle { file, k } => oracle(cli, file, *k),
        Cmd::Approx { file, k } => approx(cli, file, *k),
        Cmd::Exact { file } => {
            let f = io::read_instance(file)?;
            let t = &f.tournament;
            let s = exact_min_fvs_with(t, &branch_opts(cli, None));
            check_fvs(t, &s, None)?;
            emit(
                cli,
                json!({"status": "solution", "size": s.len(), "solution": io::vertex_labels(t, &s)}),
            );
            Ok(true)
        }
        Cmd::Structure { file, m } => structure(cli, file, m.as_deref()),
        Cmd::Pipeline {
            file,
            k,
            emit_families,
            trace,
            no_fallback,
        } => pipeline(
            cli,
            file,
            *k,
            emit_families.as_deref(),
            trace.as_deref(),
            *no_fallback,
        ),
        Cmd::Gen {
            kind,
            m,
            n,
            k_plant,
            class_size,
            count,
            out,
        } => {
            let kind = match kind {
                KindArg::Uniform => GenKind::UniformRandom,
                KindArg::Acyclic => GenKind::Acyclic,
                KindArg::Planted => GenKind::PlantedFvs { k: *k_plant },
                KindArg::Twins => GenKind::TwinHeavy {
                    class_size: *class_size,
                },
            };
            fs::create_dir_all(out).map_err(|e| Fail::Usage(format!("{}: {e}", out.display())))?;
            let mut written = Vec::new();
            for seed in cli.seed..cli.seed + count {
                let spec = GenSpec::new(*m, *n, kind.clone(), seed);
                let mut file = InstanceFile::new(harness::generate(&spec));
                if let GenKind::PlantedFvs { k } = kind {
                    file.k = Some(k);
                }
                file.metadata = Some(json!({ "generator": spec }));
                let path = out.join(format!("{}.json", spec.file_stem()));
                io::write_text(&path, &io::serialize_instance(&file))?;
                written.push(path.display().to_string());
            }
            emit(cli, json!({ "written": written }));
            Ok(true)
        }
        Cmd::Verify { file, solution, k } => {
            let f = io::read_instance(file)?;
            let t = &f.tournament;
            let s = io::parse_vertex_list(t, solution)?;
            let k = k.or(f.k);
            let fvs = verify_fvs(t, &s);
            let ok = fvs && k.is_none_or(|k| s.len() <= k);
            emit(
                cli,
                json!({"valid": ok, "fvs": fvs, "size": s.len(), "k": k}),
            );
            Ok(ok)
        }
        Cmd::CheckLemmas {
            config,
            out,
            inject,
        } => {
            let mut cfg = match config {
                Some(path) => serde_json::from_str::<SuiteConfig>(&read_text(path)?)
                    .map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?,
                None => SuiteConfig {
                    seed: cli.seed,
                    ..Default::default()
                },
            };
            cfg.faults.extend(inject.iter().map(|f| match f {
                FaultArg::InvertAcyclic => Fault::InvertAcyclic,
                FaultArg::ShrinkApprox => Fault::ShrinkApprox,
            }));
            let report = harness::run_lemma_suite(&cfg);
            let value = serde_json::to_value(&report).expect("report serializes");
            match out {
                Some(path) => io::write_text(path, &pretty(&value))?,
                None if cli.json => println!("{}", pretty(&value)),
                None => {}
            }
            if !cli.json {
                for p in &report.properties {
                    let tag = if p.empirical { " (empirical)" } else { "" };
                    let verdict = if p.passed() { "pass" } else { "FAIL" };
                    println!(
                        "{verdict} {}{tag}: {} cases, {} failures",
                        p.name, p.cases, p.failures
                    );
                }
            }
            if report.all_passed() {
                Ok(true)
            } else {
                Err(Fail::Invariant("property suite reported failures".into()))
            }
        }
        Cmd::Bench {
            corpus,
            solvers,
            out,
        } => bench(cli, corpus, solvers, out.as_deref()),
        Cmd::Dfvc { file } => {
            let inst = io::parse_dfvc(&read_text(file)?)?;
            let r = dfvc_solve(&inst).map_err(|e| Fail::Usage(e.to_string()))?;
            let sol = r
                .solution
                .as_ref()
                .map(|s| io::part_vertex_labels(&inst.graph, s));
            emit(
                cli,
                json!({
                    "status": if sol.is_some() { "solution" } else { "no_solution" },
                    "optimum": r.optimum,
                    "solution": sol,
                    "nodes": r.stats.nodes,
                }),
            );
            Ok(r.solution.is_some())
        }
    }
}

fn read_text(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

/// JSON with `--json`; otherwise one `key: value` line per field.
fn emit(cli: &Cli, v: Value) {
    if cli.json {
        println!("{v}");
        return;
    }
    if let Value::Object(map) = v {
        for (key, val) in map {
            match val {
                Value::String(s) => println!("{key}: {s}"),
                Value::Array(items) if items.iter().all(Value::is_string) => {
                    let parts: Vec<&str> = items.iter().filter_map(Value::as_str).collect();
                    println!("{key}: {}", parts.join(" "));
                }
                other => println!("{key}: {other}"),
            }
        }
    }
}

fn branch_opts(cli: &Cli, node_limit: Option<u64>) -> BranchOptions {
    BranchOptions {
        workers: cli.workers.max(1),
        node_limit,
        ..Default::default()
    }
}

fn check_fvs(t: &BipartiteTournament, s: &VertexSet, k: Option<usize>) -> Result<(), Fail> {
    if !verify_fvs(t, s) || k.is_some_and(|k| s.len() > k) {
        return Err(Fail::Invariant(format!(
            "solver returned an invalid FVS {s:?}"
        )));
    }
    Ok(())
}

fn report(cli: &Cli, t: &BipartiteTournament, r: &SolveResult, k: Option<usize>) -> Run {
    if let Some(s) = r.solution() {
        check_fvs(t, s, k)?;
    }
    emit(
        cli,
        json!({
            "status": r.status.name(),
            "k": k,
            "size": r.solution().map(|s| s.len()),
            "solution": r.solution().map(|s| io::vertex_labels(t, s)),
            "nodes": r.stats.nodes,
            "ms": r.stats.elapsed.as_secs_f64() * 1e3,
        }),
    );
    Ok(r.solution().is_some())
}

fn solve(cli: &Cli, file: &Path, k: Option<usize>, node_limit: Option<u64>) -> Run {
    let f = io::read_instance(file)?;
    let t = &f.tournament;
    let opts = branch_opts(cli, node_limit);
    match k.or(f.k) {
        Some(k) => {
            let r = branch_solve_with(t, &Constraints::with_budget(k), &opts)
                .map_err(|e| Fail::Usage(e.to_string()))?;
            report(cli, t, &r, Some(k))
        }
        None => {
            let s = exact_min_fvs_with(t, &opts);
            check_fvs(t, &s, None)?;
            emit(
                cli,
                json!({"status": "solution", "size": s.len(), "solution": io::vertex_labels(t, &s)}),
            );
            Ok(true)
        }
    }
}

fn oracle(cli: &Cli, file: &Path, k: Option<usize>) -> Run {
    let f = io::read_instance(file)?;
    let t = &f.tournament;
    let k = k.or(f.k);
    let c = Constraints::with_budget(k.unwrap_or(t.len()));
    let r = oracle_min_fvs(t, Some(&c)).map_err(|e| Fail::Usage(e.to_string()))?;
    report(cli, t, &r, k)
}

fn approx(cli: &Cli, file: &Path, k: Option<usize>) -> Run {
    let f = io::read_instance(file)?;
    let t = &f.tournament;
    let s = match k.or(f.k) {
        Some(k) => match approx4(t, k) {
            Approx::Fvs(s) => s,
            Approx::TooBig => {
                emit(
                    cli,
                    json!({"status": "no_solution", "k": k, "reason": "more than k disjoint squares"}),
                );
                return Ok(false);
            }
        },
        None => approx_fvs(t),
    };
    check_fvs(t, &s, None)?;
    emit(
        cli,
        json!({"status": "approximate", "size": s.len(), "solution": io::vertex_labels(t, &s)}),
    );
    Ok(true)
}

fn structure(cli: &Cli, file: &Path, m: Option<&str>) -> Run {
    let f = io::read_instance(file)?;
    let t = &f.tournament;
    let lab = |s: &VertexSet| io::vertex_labels(t, s);
    let mut out = serde_json::Map::new();
    out.insert("acyclic".into(), json!(is_acyclic(t)));
    if let Some(sq) = find_square(t, None) {
        let cycle: Vec<String> = sq.vertices().iter().map(|&v| t.label(v)).collect();
        out.insert("square".into(), json!(cycle));
    }
    if let Ok(seq) = canonical_sequence(t) {
        let sets: Vec<Vec<String>> = seq.sets.iter().map(lab).collect();
        out.insert("canonical_sequence".into(), json!(sets));
    }
    let mut ok = true;
    if let Some(m) = m {
        let m = io::parse_vertex_list(t, m)?;
        match m_sequence(t, &m) {
            Ok(seq) => {
                let blocks: Vec<Value> = seq
                    .blocks
                    .iter()
                    .map(|b| json!({"x": lab(&b.x), "y": lab(&b.y)}))
                    .collect();
                out.insert("m_sequence".into(), json!(blocks));
            }
            Err(e) => {
                out.insert("m_sequence_error".into(), json!(e.to_string()));
                ok = false;
            }
        }
    }
    emit(cli, Value::Object(out));
    Ok(ok)
}

fn pipeline(
    cli: &Cli,
    file: &Path,
    k: Option<usize>,
    families: Option<&Path>,
    trace: Option<&Path>,
    no_fallback: bool,
) -> Run {
    let f = io::read_instance(file)?;
    let t = &f.tournament;
    let k = k.or(f.k).ok_or_else(|| {
        Fail::Usage("pipeline needs a budget: pass -k or set k in the file".into())
    })?;
    let profile = ConstantsProfile::resolve(&cli.profile, k)?;
    let opts = PipelineOptions {
        workers: cli.workers.max(1),
        fallback: !no_fallback,
        collect_families: families.is_some(),
    };
    let out = pipeline_solve(t, k, &profile, &opts)?;
    for d in &out.diagnostics {
        eprintln!("note: {d}");
    }
    if let Some(path) = trace {
        let mut text = String::from("stage,inputs,outputs\n");
        for s in &out.trace {
            text.push_str(&format!("{},{},{}\n", s.stage, s.inputs, s.outputs));
        }
        io::write_text(path, &text)?;
    }
    if let Some(dir) = families {
        fs::create_dir_all(dir).map_err(|e| Fail::Usage(format!("{}: {e}", dir.display())))?;
        for (i, (stage, family)) in out.families.iter().enumerate() {
            let tournament = family
                .first()
                .map(|c| Value::Object(io::tournament_value(&c.tournament)));
            let v = json!({
                "stage": stage,
                "tournament": tournament,
                "instances": family.iter().map(io::cfvs_value).collect::<Vec<_>>(),
            });
            io::write_text(&dir.join(format!("{i:05}-{stage}.json")), &pretty(&v))?;
        }
    }
    if let Some(s) = out.result.solution() {
        check_fvs(t, s, Some(k))?;
    }
    emit(
        cli,
        json!({
            "status": out.result.status.name(),
            "via": out.via,
            "k": k,
            "size": out.result.solution().map(|s| s.len()),
            "solution": out.result.solution().map(|s| io::vertex_labels(t, s)),
            "nodes": out.result.stats.nodes,
            "ms": out.result.stats.elapsed.as_secs_f64() * 1e3,
            "trace": out.trace,
        }),
    );
    Ok(matches!(out.result.status, Status::Solution(_)))
}

fn bench(cli: &Cli, corpus: &Path, names: &[String], out: Option<&Path>) -> Run {
    let mut paths: Vec<PathBuf> = fs::read_dir(corpus)
        .map_err(|e| Fail::Usage(format!("{}: {e}", corpus.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut instances = Vec::new();
    for p in &paths {
        let f = io::read_instance(p).map_err(|e| Fail::Usage(format!("{}: {e}", p.display())))?;
        let name = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        instances.push((name, f.tournament));
    }
    let biggest = instances.iter().map(|(_, t)| t.len()).max().unwrap_or(0);
    let profile = ConstantsProfile::resolve(&cli.profile, biggest)?;
    let solvers = names
        .iter()
        .map(|n| {
            BenchSolver::parse(n, &profile)
                .ok_or_else(|| Fail::Usage(format!("unknown solver {n:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rep = harness::bench(&instances, &solvers).map_err(|e| Fail::Invariant(e.to_string()))?;
    match out {
        Some(path) => {
            let file = fs::File::create(path)
                .map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?;
            harness::write_csv(&rep.records, file).map_err(|e| Fail::Usage(e.to_string()))?;
        }
        None => harness::write_csv(&rep.records, std::io::stdout())
            .map_err(|e| Fail::Usage(e.to_string()))?,
    }
    if !rep.disagreements.is_empty() {
        return Err(Fail::Invariant(format!(
            "solvers disagree: {}",
            rep.disagreements.join("; ")
        )));
    }
    Ok(true)
}
