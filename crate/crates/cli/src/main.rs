//! Command-line harness: instance generation, solving, verification, sample
//! space construction and checking, experiment suites, and brute-force
//! cross-checks. All file formats are the JSON forms defined by the library.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use hmis::det::{find_mis_det, DetConstants};
use hmis::gen::{generate, InstanceKind};
use hmis::hypergraph::Hypergraph;
use hmis::rand_mis::{find_mis, Mode, RandConfig};
use hmis::spaces::{edge_pair_unions, SampleSpace, SpaceBudget};
use hmis::sparse::{choose_rank, dsbl, sbl};
use hmis::trace::{MetricsRecord, RunTrace};
use hmis::vset::VertexSet;

#[derive(Parser)]
#[command(name = "hmis", version, about = "Maximal independent set solvers for bounded-rank hypergraphs")]
struct Cli {
    /// Worker threads (0 keeps the library default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Exact rational arithmetic in the deterministic potential.
    #[arg(long, global = true)]
    exact_arith: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a hypergraph instance.
    Gen(GenArgs),
    /// Solve an instance and verify the output.
    Solve(SolveArgs),
    /// Verify a vertex set against an instance.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        set: PathBuf,
    },
    /// Build or check sample spaces.
    Space {
        #[command(subcommand)]
        cmd: SpaceCmd,
    },
    /// Run a suite of instances and emit metrics.
    Suite {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force cross-check of every solver on a small instance.
    Crosscheck {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    UniformRandom,
    PlantedSparse,
    WorstNested,
}

impl From<KindArg> for InstanceKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::UniformRandom => InstanceKind::UniformRandom,
            KindArg::PlantedSparse => InstanceKind::PlantedSparse,
            KindArg::WorstNested => InstanceKind::WorstNested,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    algo: AlgoArg,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// rand-pipeline schedule mode.
    #[arg(long, value_enum, default_value_t = ModeArg::Adaptive)]
    mode: ModeArg,
    /// Sample space for the deterministic pipeline: path to the packed
    /// binary; the JSON sidecar sits next to it.
    #[arg(long)]
    omega: Option<PathBuf>,
    /// Constants override file (JSON) for the deterministic pipeline.
    #[arg(long)]
    constants: Option<PathBuf>,
    /// Rank parameter for the sparse loops ("auto" derives it).
    #[arg(long, default_value = "auto")]
    r: String,
    /// Write the run trace (JSON lines) here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the solution set (JSON) here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record per-round migration totals and collapse counts in the trace
    /// (randomized pipeline; quadratic bookkeeping).
    #[arg(long)]
    instrument: bool,
    /// Use the cheap deterministic profile (smaller spaces and summand
    /// budgets; relaxes the independence certificate to per-edge sets).
    #[arg(long)]
    fast: bool,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum AlgoArg {
    Rand,
    Det,
    Sbl,
    Dsbl,
    Seq,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Adaptive,
    Theoretical,
    Sequential,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Adaptive => Mode::Adaptive,
            ModeArg::Theoretical => Mode::Theoretical,
            ModeArg::Sequential => Mode::Sequential,
        }
    }
}

#[derive(Subcommand)]
enum SpaceCmd {
    /// Construct a space and write its packed support plus sidecar.
    Build(SpaceBuildArgs),
    /// Verify a stored space's declared properties.
    Check {
        /// Packed binary path; sidecar is the same path with a .json
        /// extension.
        #[arg(long)]
        bin: PathBuf,
        /// Independence width to verify (defaults to the declared one).
        #[arg(long)]
        l: Option<usize>,
        /// Verify exact independence against this instance's edge pairs.
        #[arg(long)]
        constraints_from: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SpaceBuildArgs {
    /// cube | q1 | q2 | compose (q1 xor q2).
    #[arg(long)]
    kind: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Instance providing the exact-independence constraint family.
    #[arg(long)]
    constraints_from: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteConfig {
    instances: Vec<PathBuf>,
    algorithms: Vec<String>,
    #[serde(default)]
    seeds: Vec<u64>,
    #[serde(default)]
    constants: Option<DetConstants>,
    #[serde(default)]
    omega: Option<PathBuf>,
    #[serde(default)]
    r: Option<usize>,
    #[serde(default)]
    trace_dir: Option<PathBuf>,
    #[serde(default)]
    fast_det: bool,
    /// Record wall-clock times (off by default so reruns are byte-identical).
    #[serde(default)]
    record_wall_time: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .expect("rayon pool configured once");
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Gen(args) => {
            let g = generate(args.kind.into(), args.n, args.m, args.r, args.seed)?;
            let json = g.to_canonical_json();
            fs::write(&args.out, &json)?;
            println!(
                "wrote {} (n={}, m={}, r={}, fnv64={:016x})",
                args.out.display(),
                g.n(),
                g.num_edges(),
                g.rank(),
                fnv64(json.as_bytes())
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve(args) => solve(args, cli.exact_arith),
        Command::Verify { input, set } => {
            let g = load_graph(&input)?;
            let mis: Vec<u32> = serde_json::from_str(&fs::read_to_string(&set)?)?;
            let ok = g.verify_mis(&VertexSet::from(mis));
            println!("{}", if ok { "valid maximal independent set" } else { "INVALID" });
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Space { cmd } => space(cmd),
        Command::Suite { config, out } => suite(&config, out.as_deref(), cli.exact_arith),
        Command::Crosscheck { input, seeds } => crosscheck(&input, seeds),
    }
}

fn load_graph(path: &Path) -> Result<Hypergraph, Box<dyn std::error::Error>> {
    Ok(Hypergraph::from_json(&fs::read_to_string(path)?)?)
}

fn sidecar_of(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

fn rank_for(g: &Hypergraph, arg: &str) -> Result<usize, Box<dyn std::error::Error>> {
    if arg == "auto" {
        Ok(choose_rank(g.n(), g.num_edges()))
    } else {
        Ok(arg.parse::<usize>()?)
    }
}

fn solve(args: SolveArgs, exact: bool) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let g = load_graph(&args.input)?;
    let started = Instant::now();
    let (mis, trace) = match args.algo {
        AlgoArg::Rand => {
            let config = RandConfig {
                mode: args.mode.into(),
                instrument: args.instrument,
                ..Default::default()
            };
            find_mis(&g, args.seed, &config)?
        }
        AlgoArg::Seq => {
            let config = RandConfig { mode: Mode::Sequential, ..Default::default() };
            find_mis(&g, args.seed, &config)?
        }
        AlgoArg::Det => {
            let mut constants: DetConstants = match &args.constants {
                Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
                None if args.fast => DetConstants::fast(),
                None => DetConstants::default(),
            };
            constants.exact = exact;
            let omega = match &args.omega {
                Some(bin) => Some(SampleSpace::load(bin, &sidecar_of(bin))?),
                None => None,
            };
            let out = find_mis_det(&g, omega.as_ref(), &constants)?;
            (out.mis, out.trace)
        }
        AlgoArg::Sbl => {
            let r = rank_for(&g, &args.r)?;
            sbl(&g, r, args.seed, &RandConfig::default())?
        }
        AlgoArg::Dsbl => {
            let r = rank_for(&g, &args.r)?;
            let mut constants: DetConstants = match &args.constants {
                Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
                None => DetConstants::fast(),
            };
            constants.exact = exact;
            let out = dsbl(&g, r, &constants)?;
            (out.mis, out.trace)
        }
    };
    let verified = g.verify_mis(&mis);
    if let Some(path) = &args.trace {
        fs::write(path, trace.to_jsonl())?;
    }
    let set: Vec<u32> = mis.iter().collect();
    let json = serde_json::to_string(&set)?;
    if let Some(path) = &args.out {
        fs::write(path, &json)?;
    } else {
        println!("{json}");
    }
    eprintln!(
        "size={} verified={verified} rounds={} wall_ms={}",
        mis.len(),
        trace.rounds.len(),
        started.elapsed().as_millis()
    );
    Ok(if verified { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn space(cmd: SpaceCmd) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let budget = SpaceBudget::default();
    match cmd {
        SpaceCmd::Build(args) => {
            let constraints = match &args.constraints_from {
                Some(p) => edge_pair_unions(&load_graph(p)?),
                None => Vec::new(),
            };
            let space = match args.kind.as_str() {
                "cube" => SampleSpace::full_cube(args.n, &budget)?,
                "q1" => SampleSpace::build_q1(
                    args.n,
                    args.l.unwrap_or(3),
                    args.epsilon.unwrap_or_else(|| {
                        (-(args.l.unwrap_or(3) as f64 + 1.0)).exp2()
                    }),
                    &budget,
                )?,
                "q2" => SampleSpace::build_q2(args.n, &constraints, &budget)?,
                "compose" => {
                    let l = args.l.unwrap_or(3);
                    let eps = args.epsilon.unwrap_or_else(|| (-(l as f64 + 1.0)).exp2());
                    let a = SampleSpace::build_q1(args.n, l, eps, &budget)?;
                    let b = SampleSpace::build_q2(args.n, &constraints, &budget)?;
                    SampleSpace::xor_compose(&a, &b)?
                }
                other => return Err(format!("unknown space kind {other:?}").into()),
            };
            space.save(&args.out, &sidecar_of(&args.out))?;
            println!(
                "wrote {} ({} vectors of {} bits, {})",
                args.out.display(),
                space.support_len(),
                space.n_bits(),
                space.meta.construction
            );
            Ok(ExitCode::SUCCESS)
        }
        SpaceCmd::Check { bin, l, constraints_from } => {
            let space = SampleSpace::load(&bin, &sidecar_of(&bin))?;
            let mut ok = true;
            if let Some(width) = l.or(space.meta.l) {
                let report = space.verify_q1(width, &budget)?;
                println!(
                    "L-wise ceiling (w <= {width}): {} (max deviation {:.6e})",
                    if report.pass { "pass" } else { "FAIL" },
                    report.max_deviation
                );
                ok &= report.pass;
            }
            let constraints = match &constraints_from {
                Some(p) => edge_pair_unions(&load_graph(p)?),
                None => space.meta.constraints.clone(),
            };
            if !constraints.is_empty() {
                let pass = space.verify_q2(&constraints, &budget)?;
                println!(
                    "exact independence on {} constraint sets: {}",
                    constraints.len(),
                    if pass { "pass" } else { "FAIL" }
                );
                ok &= pass;
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn suite(
    config_path: &Path,
    out: Option<&Path>,
    exact: bool,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let config: SuiteConfig = serde_json::from_str(&fs::read_to_string(config_path)?)?;
    let seeds = if config.seeds.is_empty() { vec![0] } else { config.seeds.clone() };
    let mut det_constants = match &config.constants {
        Some(c) => c.clone(),
        None if config.fast_det => DetConstants::fast(),
        None => DetConstants::default(),
    };
    det_constants.exact = exact;
    let omega = match &config.omega {
        Some(bin) => Some(SampleSpace::load(bin, &sidecar_of(bin))?),
        None => None,
    };
    let mut lines = Vec::new();
    let mut all_ok = true;
    for inst in &config.instances {
        let g = load_graph(inst)?;
        let name = inst.display().to_string();
        for algo in &config.algorithms {
            let algo_seeds: &[u64] = match algo.as_str() {
                "det" | "dsbl" => &seeds[..1],
                _ => &seeds,
            };
            for &seed in algo_seeds {
                let started = Instant::now();
                let result: Result<(VertexSet, RunTrace, usize), hmis::SolveError> =
                    match algo.as_str() {
                        "rand" => find_mis(&g, seed, &RandConfig::default())
                            .map(|(m, t)| (m, t, 0)),
                        "seq" => find_mis(
                            &g,
                            seed,
                            &RandConfig { mode: Mode::Sequential, ..Default::default() },
                        )
                        .map(|(m, t)| (m, t, 0)),
                        "det" => find_mis_det(&g, omega.as_ref(), &det_constants)
                            .map(|o| (o.mis, o.trace, o.phi_violations)),
                        "sbl" => {
                            let r = config.r.unwrap_or_else(|| choose_rank(g.n(), g.num_edges()));
                            sbl(&g, r, seed, &RandConfig::default()).map(|(m, t)| (m, t, 0))
                        }
                        "dsbl" => {
                            let r = config.r.unwrap_or_else(|| choose_rank(g.n(), g.num_edges()));
                            dsbl(&g, r, &det_constants).map(|o| (o.mis, o.trace, 0))
                        }
                        other => {
                            return Err(format!("unknown algorithm {other:?}").into());
                        }
                    };
                let wall_ms = if config.record_wall_time { started.elapsed().as_millis() as u64 } else { 0 };
                let record = match result {
                    Ok((mis, trace, phi_violations)) => {
                        let verified = g.verify_mis(&mis);
                        all_ok &= verified;
                        if let Some(dir) = &config.trace_dir {
                            fs::create_dir_all(dir)?;
                            let fname =
                                format!("{}-{algo}-{seed}.jsonl", sanitized(&name));
                            fs::write(dir.join(fname), trace.to_jsonl())?;
                        }
                        MetricsRecord {
                            instance: name.clone(),
                            algorithm: algo.clone(),
                            seed: Some(seed),
                            rounds: trace.rounds.len(),
                            stages: trace.rounds.iter().map(|r| r.stages.len()).sum(),
                            wall_ms,
                            mis_size: mis.len(),
                            verified,
                            phi_violations,
                            envelope_violations: trace.warnings.len(),
                        }
                    }
                    Err(e) => {
                        all_ok = false;
                        eprintln!("{name} {algo} seed {seed}: {e}");
                        MetricsRecord {
                            instance: name.clone(),
                            algorithm: algo.clone(),
                            seed: Some(seed),
                            rounds: 0,
                            stages: 0,
                            wall_ms,
                            mis_size: 0,
                            verified: false,
                            phi_violations: 0,
                            envelope_violations: 0,
                        }
                    }
                };
                lines.push(serde_json::to_string(&record)?);
            }
        }
    }
    let body = lines.join("\n") + "\n";
    match out {
        Some(path) => fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn sanitized(name: &str) -> String {
    name.chars().map(|c| if c.is_alphanumeric() { c } else { '_' }).collect()
}

fn crosscheck(input: &Path, seeds: u64) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let g = load_graph(input)?;
    if g.n() > 10 {
        return Err("crosscheck enumerates exhaustively; needs n <= 10".into());
    }
    let family = g.enumerate_all_mis();
    println!("instance has {} maximal independent sets", family.len());
    let mut sizes: Vec<usize> = Vec::new();
    let mut ok = true;
    let mut check = |label: String, mis: VertexSet| {
        let member = family.contains(&mis);
        if !member {
            ok = false;
            println!("{label}: output NOT in the enumerated family");
        }
        sizes.push(mis.len());
    };
    for seed in 0..seeds {
        let (mis, _) = find_mis(&g, seed, &RandConfig::default())?;
        check(format!("rand seed {seed}"), mis);
        let r = choose_rank(g.n(), g.num_edges()).max(2);
        let (mis, _) = sbl(&g, r, seed, &RandConfig::default())?;
        check(format!("sbl seed {seed}"), mis);
    }
    let det_out = find_mis_det(&g, None, &DetConstants::default())?;
    check("det".into(), det_out.mis);
    let r = choose_rank(g.n(), g.num_edges()).max(2);
    let dsbl_out = dsbl(&g, r, &DetConstants::default())?;
    check("dsbl".into(), dsbl_out.mis);
    let (seq, _) = find_mis(&g, 0, &RandConfig { mode: Mode::Sequential, ..Default::default() })?;
    check("seq".into(), seq);
    sizes.sort_unstable();
    println!(
        "all outputs in family: {ok}; sizes range {}..={}",
        sizes.first().unwrap(),
        sizes.last().unwrap()
    );
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn fnv64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
