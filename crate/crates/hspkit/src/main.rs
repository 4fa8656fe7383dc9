//! `hspkit` command-line front end: single-instance solves, benchmark
//! suites, and the built-in verification battery.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hspkit::bench::{
    run_instance, run_suite, signatures_up_to, write_csv, write_json, Algorithm, SuiteConfig,
    SuiteMode,
};
use hspkit::group::{
    GroupElement, GroupSignature, DEFAULT_ENUMERATION_CAP, DEFAULT_SMALL_GROUP_CAP,
};
use hspkit::oracle::HspInstance;
use hspkit::solvers::find_pair;
use hspkit::verify::{
    check_lemma_scaling, count_subgroups_zpn, enumerate_subgroups, total_subgroups_zpn,
    AuditConfig,
};
use hspkit::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hspkit",
    about = "Deterministic hidden subgroup solvers over finite Abelian groups",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on one instance and print the record.
    Solve(SolveArgs),
    /// Run a suite of instances, audit bounds, and emit CSV/JSON records.
    Bench(BenchArgs),
    /// Run the built-in verification battery; nonzero exit on any failure.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Group signature, e.g. "2^3,5".
    #[arg(long)]
    group: Option<String>,
    /// Semicolon-separated generator strings, e.g. "(2,0);(0,1)".
    #[arg(long, default_value = "")]
    gens: String,
    /// Algorithm name.
    #[arg(long)]
    algo: String,
    /// Instance JSON file ({"sig": "...", "generators": [...]}) instead of
    /// --group/--gens.
    #[arg(long)]
    instance_file: Option<PathBuf>,
    /// Enumeration cap (overrides HSPKIT_CAP).
    #[arg(long)]
    cap: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-free signature list; repeat the flag for several groups.
    #[arg(long = "group", required = true)]
    groups: Vec<String>,
    /// Comma-separated algorithm names.
    #[arg(long, default_value = "decide-abelian,identify-abelian")]
    algo: String,
    /// Subgroup mode: all, random, trivial.
    #[arg(long, default_value = "all")]
    mode: String,
    /// Number of random subgroups per group (random mode).
    #[arg(long, default_value_t = 8)]
    count: u32,
    /// RNG seed (random mode).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Enumeration cap (overrides HSPKIT_CAP).
    #[arg(long)]
    cap: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct VerifyArgs {
    /// Enumeration cap (overrides HSPKIT_CAP).
    #[arg(long)]
    cap: Option<u64>,
}

/// Cap resolution: --cap flag, then HSPKIT_CAP, then the default.
fn resolve_cap(flag: Option<u64>) -> Result<u64> {
    if let Some(cap) = flag {
        return Ok(cap);
    }
    match std::env::var("HSPKIT_CAP") {
        Ok(text) => text
            .parse::<u64>()
            .map_err(|_| Error::Config(format!("HSPKIT_CAP is not an integer: {text}"))),
        Err(_) => Ok(DEFAULT_ENUMERATION_CAP),
    }
}

fn parse_gens(sig: &GroupSignature, text: &str) -> Result<Vec<GroupElement>> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| sig.parse_element(s))
        .collect()
}

fn emit(
    records: &[hspkit::bench::RunRecord],
    out: Option<&PathBuf>,
    format: OutputFormat,
) -> Result<()> {
    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    match format {
        OutputFormat::Csv => write_csv(records, &mut sink),
        OutputFormat::Json => write_json(records, &mut sink),
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let cap = resolve_cap(args.cap)?;
    let algo = Algorithm::parse(&args.algo)?;
    let instance = match (&args.instance_file, &args.group) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)?;
            HspInstance::from_json(&text, cap)?.0
        }
        (None, Some(group)) => {
            let sig = GroupSignature::parse(group)?;
            let gens = parse_gens(&sig, &args.gens)?;
            HspInstance::build(&sig, &gens, cap)?
        }
        (None, None) => {
            return Err(Error::Config(
                "either --group or --instance-file is required".to_string(),
            ))
        }
    };
    let record = run_instance("000000", &instance, algo, &AuditConfig::default(), cap)?;
    emit(&[record], args.out.as_ref(), args.format)
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let cap = resolve_cap(args.cap)?;
    let algorithms = args
        .algo
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Algorithm::parse)
        .collect::<Result<Vec<_>>>()?;
    let mode = match args.mode.as_str() {
        "all" => SuiteMode::AllSubgroups,
        "random" => SuiteMode::RandomSubgroups { count: args.count, seed: args.seed },
        "trivial" => SuiteMode::TrivialOnly,
        other => return Err(Error::Config(format!("unknown mode: {other}"))),
    };
    let config = SuiteConfig {
        signatures: args.groups.clone(),
        mode,
        algorithms,
        cap,
        small_group_cap: DEFAULT_SMALL_GROUP_CAP,
        audit: AuditConfig::default(),
        max_instances_per_signature: 0,
    };
    let (records, summary) = run_suite(&config)?;
    emit(&records, args.out.as_ref(), args.format)?;
    eprint!("{}", summary.render());
    Ok(())
}

struct Battery {
    passed: u64,
    failed: u64,
    skipped: u64,
    first_failure: Option<String>,
}

impl Battery {
    fn new() -> Self {
        Battery { passed: 0, failed: 0, skipped: 0, first_failure: None }
    }

    fn record(&mut self, outcome: Result<bool>, what: impl Fn() -> String) {
        match outcome {
            Ok(true) => self.passed += 1,
            Ok(false) => {
                self.failed += 1;
                if self.first_failure.is_none() {
                    self.first_failure = Some(what());
                }
            }
            Err(Error::CapExceeded { .. }) => self.skipped += 1,
            Err(e) => {
                self.failed += 1;
                if self.first_failure.is_none() {
                    self.first_failure = Some(format!("{}: {e}", what()));
                }
            }
        }
    }

    fn report(&self, name: &str) -> bool {
        print!(
            "{name}: {} passed, {} failed, {} skipped",
            self.passed, self.failed, self.skipped
        );
        if let Some(f) = &self.first_failure {
            print!(" (first failure: {f})");
        }
        println!();
        self.failed == 0
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let cap = resolve_cap(args.cap)?;
    let mut ok = true;

    // Promise battery: constructed instances are valid hiding functions.
    let mut battery = Battery::new();
    for text in signatures_up_to(&[2, 3, 5, 7], 64) {
        let sig = GroupSignature::parse(&text)?;
        match enumerate_subgroups(&sig, cap.min(DEFAULT_SMALL_GROUP_CAP)) {
            Ok(subs) => {
                for h in subs {
                    let outcome = HspInstance::build(&sig, h.elements(), cap)
                        .and_then(|inst| inst.verify_promise(cap));
                    battery.record(outcome, || format!("{text} H={}", h.canonical_string()));
                }
            }
            Err(Error::CapExceeded { .. }) => battery.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    ok &= battery.report("promise battery");

    // findPair battery: coverage and size bounds, checked structurally.
    let mut battery = Battery::new();
    for text in signatures_up_to(&[2, 3], 64) {
        let sig = GroupSignature::parse(&text)?;
        for v in all_exponent_vectors(&sig) {
            for r in 1..=3u64 {
                battery.record(check_find_pair(&sig, &v, r, cap), || {
                    format!("findPair({text}, v={:?}, r={r})", v.exps())
                });
            }
        }
    }
    ok &= battery.report("findPair battery");

    // Lemma battery: scaling witnesses in every Z_{p^k} up to 1024.
    let mut battery = Battery::new();
    for p in [2u64, 3, 5, 7] {
        let mut k = 1u32;
        while p.pow(k) <= 1024 {
            if p.pow(k) <= cap {
                battery.record(check_lemma_scaling(p, k).map(|()| true), || {
                    format!("lemma p={p} k={k}")
                });
            } else {
                battery.skipped += 1;
            }
            k += 1;
        }
    }
    ok &= battery.report("lemma battery");

    // Subgroup-count battery: Gaussian binomials vs enumeration.
    let mut battery = Battery::new();
    for (p, max_n) in [(2u64, 6u32), (3, 4), (5, 3), (7, 2)] {
        for n in 1..=max_n {
            let text = vec![p.to_string(); n as usize].join(",");
            let sig = GroupSignature::parse(&text)?;
            let outcome = enumerate_subgroups(&sig, cap.min(DEFAULT_SMALL_GROUP_CAP))
                .and_then(|subs| {
                    Ok(subs.len() as u128 == total_subgroups_zpn(p, n)?
                        && (0..=n).all(|k| {
                            let expect = count_subgroups_zpn(p, n, k).unwrap();
                            subs.iter()
                                .filter(|h| h.order() as u128 == (p as u128).pow(k))
                                .count() as u128
                                == expect
                        }))
                });
            battery.record(outcome, || format!("counts p={p} n={n}"));
        }
    }
    ok &= battery.report("subgroup-count battery");

    // Solver-vs-brute-force battery: exhaustive small suite.
    let mut battery = Battery::new();
    let config = SuiteConfig {
        signatures: signatures_up_to(&[2, 3, 5, 7], 48),
        mode: SuiteMode::AllSubgroups,
        algorithms: vec![
            Algorithm::DecideAbelian,
            Algorithm::IdentifyAbelian,
            Algorithm::BruteForce,
        ],
        cap,
        small_group_cap: DEFAULT_SMALL_GROUP_CAP,
        audit: AuditConfig::default(),
        max_instances_per_signature: 0,
    };
    // Cross-checks inside run_suite turn disagreement into hard errors.
    match run_suite(&config) {
        Ok((records, _)) => {
            for r in &records {
                battery.record(Ok(r.pass), || format!("{} {} on {}", r.id, r.algo, r.sig));
            }
        }
        Err(Error::CapExceeded { .. }) => battery.skipped += 1,
        Err(e) => {
            battery.failed += 1;
            battery.first_failure = Some(e.to_string());
        }
    }
    ok &= battery.report("solver-vs-brute-force battery");

    Ok(ok)
}

fn all_exponent_vectors(sig: &GroupSignature) -> Vec<hspkit::group::ExponentVector> {
    let mut out = vec![hspkit::group::ExponentVector::zero(sig)];
    for (i, f) in sig.factors().iter().enumerate() {
        let mut next = Vec::new();
        for v in &out {
            for j in 0..=f.exponent {
                let mut w = v.clone();
                w.set(i, j);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

fn check_find_pair(
    sig: &GroupSignature,
    v: &hspkit::group::ExponentVector,
    r: u64,
    cap: u64,
) -> Result<bool> {
    let pair = find_pair(sig, v, r, cap)?;
    let size = v.size(sig) as f64;
    let w1_bound = 2 * ((size * r as f64).sqrt().ceil() as usize);
    let w2_bound = ((size / r as f64).sqrt().ceil() as usize).max(1);
    if pair.w1.len() > w1_bound || pair.w2.len() > w2_bound {
        return Ok(false);
    }
    let mut diff = std::collections::HashSet::new();
    for x in &pair.w1 {
        for y in &pair.w2 {
            diff.insert(sig.sub(x, y));
        }
    }
    let reps = hspkit::group::representative_set_elements(sig, v, cap)?;
    Ok(reps.iter().all(|rep| diff.contains(rep)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(args) => cmd_solve(args).map(|()| true),
        Command::Bench(args) => cmd_bench(args).map(|()| true),
        Command::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
