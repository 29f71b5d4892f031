//! Command-line front end: identity verification, tabulation of the
//! arithmetic data, and the brute-force oracle runs that produce fixture
//! files. A thin shell over the library — every command's result equals
//! the corresponding library call's result.
//!
//! Exit statuses: 0 pass, 1 verification failure, 2 usage error,
//! 3 numeric/resource error.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::arith;
use crate::correspondence;
use crate::embeddings::{self, CountCache, GroupDescriptor};
use crate::quadforms::{self, QuadOrder};
use crate::selberg_transform::TestFunction;
use crate::trace_geometry::{EllipticOrders, FactorMode, GeometryConfig, TruncationBudget};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "tracelab",
    version,
    about = "Geometric sides of Selberg-type trace formulae and their β-weighted correspondence identities"
)]
struct Cli {
    /// Plain-text key=value configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Cap the worker thread count.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Directory for fixture files (TRACELAB_FIXTURES_DIR overrides the
    /// default ./fixtures; this flag overrides both).
    #[arg(long, global = true)]
    fixtures_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an identity verification; exit 0 iff it passes.
    Verify(VerifyArgs),
    /// Dump counts, class numbers, areas or exceptional representatives.
    Tabulate(TabulateArgs),
    /// Run a brute-force oracle and write fixture files.
    Oracle(OracleArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TheoremChoice {
    /// β-weighted Laplace geometric sides.
    #[value(name = "1")]
    One,
    /// β-weighted Hecke geometric sides (needs --prime).
    #[value(name = "2")]
    Two,
    /// Exact rational area identity.
    Area,
    /// Exact integer counting identities.
    Counting,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FactorModeChoice {
    AsPrinted,
    Standard,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EllipticOrdersChoice {
    /// m0 = 2, m1 = 3.
    Projective,
    /// m0 = 4, m1 = 6.
    Matrix,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    theorem: TheoremChoice,
    /// Quaternion discriminant d (squarefree, even number of primes).
    #[arg(long)]
    disc: u64,
    /// Hecke prime p not dividing d (theorem 2 only).
    #[arg(long)]
    prime: Option<u64>,
    /// Test function, e.g. gaussian:a=1.
    #[arg(long)]
    testfn: Option<String>,
    #[arg(long)]
    tmax: Option<i64>,
    #[arg(long)]
    kmax: Option<u32>,
    #[arg(long)]
    nmax: Option<u64>,
    #[arg(long)]
    quad_tol: Option<f64>,
    /// Identity tolerance (pass iff |lhs - rhs| <= max(tol, error budget)).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    factor_mode: Option<FactorModeChoice>,
    #[arg(long, value_enum)]
    elliptic_orders: Option<EllipticOrdersChoice>,
    /// Write the verdict (JSON) here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the itemized term logs of every geometric side as CSV.
    #[arg(long)]
    term_csv: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TabulateKind {
    Counts,
    Classnumbers,
    Areas,
    Reps,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct TabulateArgs {
    #[arg(value_enum)]
    kind: TabulateKind,
    /// Quaternion discriminant (counts for its groups, or areas).
    #[arg(long)]
    disc: Option<u64>,
    /// Hecke congruence level.
    #[arg(long)]
    level: Option<u64>,
    /// Hecke prime (reps; or counts with norm p).
    #[arg(long)]
    prime: Option<u64>,
    /// Trace range upper bound for counts.
    #[arg(long, default_value_t = 30)]
    tmax: i64,
    /// Discriminant range for classnumbers: low high (inclusive).
    #[arg(long, num_args = 2, allow_negative_numbers = true)]
    range: Option<Vec<i64>>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum OracleKind {
    Forms,
    Conjugacy,
    Transform,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(value_enum)]
    kind: OracleKind,
    /// Discriminant range for `forms`: low high (inclusive).
    #[arg(long, num_args = 2, allow_negative_numbers = true)]
    disc_range: Option<Vec<i64>>,
    /// Traces for `conjugacy` (repeatable).
    #[arg(long)]
    trace: Vec<i64>,
    #[arg(long, default_value_t = 1)]
    level: u64,
    #[arg(long, default_value_t = 60)]
    bound: u64,
    /// Test function for `transform`.
    #[arg(long)]
    testfn: Option<String>,
}

/// key=value configuration file; '#' starts a comment line.
fn load_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in fs::read_to_string(path)?.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("config line {} is not key=value", lineno + 1)))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn config_get<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| Error::Usage(format!("bad config value for {key}: {raw}"))),
    }
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            fs::write(path, content)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            if !content.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

/// 17 significant digits, for reproducible CSV and console output.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    if let Some(jobs) = cli.jobs {
        // ignore failure if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let config = match &cli.config {
        Some(path) => load_config(path)?,
        None => BTreeMap::new(),
    };
    let fixtures_dir = cli
        .fixtures_dir
        .clone()
        .or_else(|| std::env::var_os("TRACELAB_FIXTURES_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("fixtures"));
    match cli.command {
        Command::Verify(args) => cmd_verify(args, &config),
        Command::Tabulate(args) => cmd_tabulate(args),
        Command::Oracle(args) => cmd_oracle(args, &fixtures_dir),
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct VerifyEnvelope<T: Serialize> {
    kind: String,
    disc: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    prime: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    testfn: Option<String>,
    pass: bool,
    verdict: T,
}

fn cmd_verify(args: VerifyArgs, config: &BTreeMap<String, String>) -> Result<i32> {
    let d = args.disc;
    // validation shared by every identity kind
    let _ = GroupDescriptor::cocompact(d).map_err(|e| Error::Usage(e.to_string()))?;
    let tolerance = args.tol.or(config_get(config, "tol")?).unwrap_or(1e-8);

    match args.theorem {
        TheoremChoice::Area => {
            let verdict = correspondence::verify_area_identity(d)?;
            let pass = verdict.pass;
            let envelope = VerifyEnvelope {
                kind: "area".into(),
                disc: d,
                prime: None,
                testfn: None,
                pass,
                verdict,
            };
            write_output(&args.out, &to_json(&envelope)?)?;
            Ok(if pass { 0 } else { 1 })
        }
        TheoremChoice::Counting => {
            let t_max = args.tmax.or(config_get(config, "tmax")?).unwrap_or(30);
            let counts = CountCache::new();
            let verdicts = correspondence::verify_counting_identities(d, t_max, &counts)?;
            let pass = verdicts.iter().all(|v| v.pass);
            let envelope = VerifyEnvelope {
                kind: "counting".into(),
                disc: d,
                prime: None,
                testfn: None,
                pass,
                verdict: verdicts,
            };
            write_output(&args.out, &to_json(&envelope)?)?;
            Ok(if pass { 0 } else { 1 })
        }
        TheoremChoice::One | TheoremChoice::Two => {
            let spec = args
                .testfn
                .clone()
                .or(config_get(config, "testfn")?)
                .unwrap_or_else(|| "gaussian:a=1".to_string());
            let f = TestFunction::parse(&spec)?;
            let omega = arith::omega(d)?;
            let geometry = GeometryConfig {
                elliptic_orders: match args.elliptic_orders {
                    Some(EllipticOrdersChoice::Matrix) => EllipticOrders::MATRIX_GROUP,
                    _ => EllipticOrders::default(),
                },
                factor_mode: match args.factor_mode {
                    Some(FactorModeChoice::AsPrinted) => FactorMode::AsPrinted,
                    _ => FactorMode::StandardLogEps,
                },
            };
            let counts = CountCache::new();
            let (kind, verdict) = match args.theorem {
                TheoremChoice::One => {
                    let mut budget =
                        TruncationBudget::laplace_with_cap(&f, omega, tolerance / 10.0);
                    apply_budget_overrides(&mut budget, &args, config)?;
                    let v = correspondence::verify_theorem1(
                        d, &f, &budget, tolerance, &geometry, &counts,
                    )?;
                    ("theorem1".to_string(), v)
                }
                TheoremChoice::Two => {
                    let p = args
                        .prime
                        .ok_or_else(|| Error::Usage("--theorem 2 needs --prime".into()))?;
                    if !arith::is_prime(p) {
                        return Err(Error::Usage(format!("{p} is not prime")));
                    }
                    if d % p == 0 {
                        return Err(Error::Usage(format!(
                            "p = {p} divides d = {d}; theorem 2 needs p coprime to d"
                        )));
                    }
                    let mut budget =
                        TruncationBudget::hecke_with_cap(&f, p, omega, tolerance / 10.0);
                    apply_budget_overrides(&mut budget, &args, config)?;
                    let v = correspondence::verify_theorem2(
                        d, p, &f, &budget, tolerance, &geometry, &counts,
                    )?;
                    ("theorem2".to_string(), v)
                }
                _ => unreachable!(),
            };
            let pass = verdict.pass;
            if let Some(csv_path) = &args.term_csv {
                let mut csv = String::new();
                for (i, report) in verdict.breakdown.iter().enumerate() {
                    let table = report.term_log_csv();
                    csv.push_str(if i == 0 {
                        &table
                    } else {
                        table.split_once('\n').unwrap().1
                    });
                }
                write_output(&Some(csv_path.clone()), &csv)?;
            }
            eprintln!(
                "{kind} disc={d}{} {spec}: lhs={} rhs={} |diff|={} budget={} -> {}",
                args.prime.map(|p| format!(" p={p}")).unwrap_or_default(),
                fmt17(verdict.lhs),
                fmt17(verdict.rhs),
                fmt17(verdict.abs_diff),
                fmt17(verdict.error_budget),
                if pass { "PASS" } else { "FAIL" }
            );
            let envelope = VerifyEnvelope {
                kind,
                disc: d,
                prime: args.prime,
                testfn: Some(spec),
                pass,
                verdict,
            };
            write_output(&args.out, &to_json(&envelope)?)?;
            Ok(if pass { 0 } else { 1 })
        }
    }
}

fn apply_budget_overrides(
    budget: &mut TruncationBudget,
    args: &VerifyArgs,
    config: &BTreeMap<String, String>,
) -> Result<()> {
    if let Some(t) = args.tmax.or(config_get(config, "tmax")?) {
        budget.t_max = t;
    }
    if let Some(k) = args.kmax.or(config_get(config, "kmax")?) {
        budget.k_max = k;
    }
    if let Some(n) = args.nmax.or(config_get(config, "nmax")?) {
        budget.n_max = n;
    }
    if let Some(q) = args.quad_tol.or(config_get(config, "quad_tol")?) {
        budget.quad_tol = q;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// tabulate
// ---------------------------------------------------------------------------

fn cmd_tabulate(args: TabulateArgs) -> Result<i32> {
    match args.kind {
        TabulateKind::Reps => {
            let p = args
                .prime
                .ok_or_else(|| Error::Usage("tabulate reps needs --prime".into()))?;
            let m = args.level.unwrap_or(1);
            let reps = embeddings::exceptional_representatives(p, m)?;
            match args.format {
                OutputFormat::Json => write_output(&args.out, &to_json(&reps)?)?,
                OutputFormat::Csv => {
                    let mut csv = String::from("a,b,c,d,trace,det\n");
                    for g in &reps {
                        csv.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            g.a,
                            g.b,
                            g.c,
                            g.d,
                            g.trace(),
                            g.det()
                        ));
                    }
                    write_output(&args.out, &csv)?;
                }
            }
            Ok(0)
        }
        TabulateKind::Areas => {
            let d = args
                .disc
                .ok_or_else(|| Error::Usage("tabulate areas needs --disc".into()))?;
            let mut rows: Vec<(String, String, f64)> = Vec::new();
            let cocompact = GroupDescriptor::cocompact(d)?;
            let a = crate::trace_geometry::area(&cocompact)?;
            rows.push((cocompact.label(), format!("{}", a.coeff), a.value()));
            for m in arith::divisors(d)? {
                let g = GroupDescriptor::hecke(m)?;
                let a = crate::trace_geometry::area(&g)?;
                rows.push((g.label(), format!("{}", a.coeff), a.value()));
            }
            match args.format {
                OutputFormat::Json => {
                    #[derive(Serialize)]
                    struct Row {
                        group: String,
                        coeff_of_pi: String,
                        value: f64,
                    }
                    let rows: Vec<Row> = rows
                        .into_iter()
                        .map(|(group, coeff_of_pi, value)| Row {
                            group,
                            coeff_of_pi,
                            value,
                        })
                        .collect();
                    write_output(&args.out, &to_json(&rows)?)?;
                }
                OutputFormat::Csv => {
                    let mut csv = String::from("group,coeff_of_pi,value\n");
                    for (g, c, v) in rows {
                        csv.push_str(&format!("{g},{c},{}\n", fmt17(v)));
                    }
                    write_output(&args.out, &csv)?;
                }
            }
            Ok(0)
        }
        TabulateKind::Counts => {
            let n = args.prime.map(|p| p as i64).unwrap_or(1);
            let groups: Vec<GroupDescriptor> = if let Some(d) = args.disc {
                let mut gs = vec![GroupDescriptor::cocompact(d)?];
                for m in arith::divisors(d)? {
                    gs.push(GroupDescriptor::hecke(m)?);
                }
                gs
            } else {
                vec![GroupDescriptor::hecke(args.level.unwrap_or(1))?]
            };
            let counts = CountCache::new();
            let mut csv = String::from("group,t,n,E,Eprime\n");
            #[derive(Serialize)]
            struct Row {
                group: String,
                t: i64,
                n: i64,
                count: Option<u64>,
                primitive: Option<u64>,
            }
            let mut rows = Vec::new();
            for g in &groups {
                let table = embeddings::count_table(g, n, 0..=args.tmax, &counts)?;
                for (t, count) in table {
                    let primitive = if n == 1 && t >= 3 {
                        Some(counts.primitive_count(t, g)?)
                    } else {
                        None
                    };
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        g.label(),
                        t,
                        n,
                        count
                            .map(|c| c.to_string())
                            .unwrap_or_else(|| "exceptional".into()),
                        primitive.map(|c| c.to_string()).unwrap_or_default()
                    ));
                    rows.push(Row {
                        group: g.label(),
                        t,
                        n,
                        count,
                        primitive,
                    });
                }
            }
            match args.format {
                OutputFormat::Json => write_output(&args.out, &to_json(&rows)?)?,
                OutputFormat::Csv => write_output(&args.out, &csv)?,
            }
            Ok(0)
        }
        TabulateKind::Classnumbers => {
            let range = args
                .range
                .as_ref()
                .ok_or_else(|| Error::Usage("tabulate classnumbers needs --range lo hi".into()))?;
            let (lo, hi) = (range[0], range[1]);
            let mut csv = String::from("disc,h_wide,h_narrow\n");
            #[derive(Serialize)]
            struct Row {
                disc: i64,
                h_wide: u64,
                h_narrow: u64,
            }
            let mut rows = Vec::new();
            for disc in lo..=hi {
                if let Ok(order) = QuadOrder::from_disc(disc) {
                    let inv = quadforms::order_invariants(&order)?;
                    csv.push_str(&format!("{disc},{},{}\n", inv.h_wide, inv.h_narrow));
                    rows.push(Row {
                        disc,
                        h_wide: inv.h_wide,
                        h_narrow: inv.h_narrow,
                    });
                }
            }
            match args.format {
                OutputFormat::Json => write_output(&args.out, &to_json(&rows)?)?,
                OutputFormat::Csv => write_output(&args.out, &csv)?,
            }
            Ok(0)
        }
    }
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

fn cmd_oracle(args: OracleArgs, fixtures_dir: &Path) -> Result<i32> {
    fs::create_dir_all(fixtures_dir)?;
    match args.kind {
        OracleKind::Forms => {
            let range = args
                .disc_range
                .as_ref()
                .ok_or_else(|| Error::Usage("oracle forms needs --disc-range lo hi".into()))?;
            let (lo, hi) = (range[0], range[1]);
            #[derive(Serialize)]
            struct Entry {
                disc: i64,
                h_wide: u64,
                h_narrow: u64,
                unit: quadforms::UnitData,
            }
            #[derive(Serialize)]
            struct File {
                tool: String,
                disc_range: (i64, i64),
                entries: Vec<Entry>,
            }
            let mut entries = Vec::new();
            for disc in lo..=hi {
                if let Ok(order) = QuadOrder::from_disc(disc) {
                    let inv = quadforms::order_invariants(&order)?;
                    entries.push(Entry {
                        disc,
                        h_wide: inv.h_wide,
                        h_narrow: inv.h_narrow,
                        unit: inv.unit.clone(),
                    });
                }
            }
            let path = fixtures_dir.join("class_numbers.json");
            let file = File {
                tool: "tracelab oracle forms".into(),
                disc_range: (lo, hi),
                entries,
            };
            fs::write(&path, to_json(&file)? + "\n")?;
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
        OracleKind::Conjugacy => {
            let traces = if args.trace.is_empty() {
                vec![0, 1, 3, 4, 5, 6]
            } else {
                args.trace.clone()
            };
            #[derive(Serialize)]
            struct Entry {
                t: i64,
                n: i64,
                group: String,
                formula: Option<u64>,
                oracle: embeddings::OracleReport,
            }
            #[derive(Serialize)]
            struct File {
                tool: String,
                bound: u64,
                entries: Vec<Entry>,
            }
            let cache = CountCache::new();
            let group = GroupDescriptor::hecke(args.level)?;
            let mut entries = Vec::new();
            for &t in &traces {
                let formula = match cache.trace_count(t, 1, &group) {
                    Ok(v) => Some(v),
                    Err(Error::ExceptionalTrace { .. }) => None,
                    Err(e) => return Err(e),
                };
                let bound = args.bound.max(t.unsigned_abs() + 10);
                entries.push(Entry {
                    t,
                    n: 1,
                    group: group.label(),
                    formula,
                    oracle: embeddings::oracle_report(t, args.level, bound)?,
                });
            }
            let path = fixtures_dir.join("embedding_counts.json");
            let file = File {
                tool: "tracelab oracle conjugacy".into(),
                bound: args.bound,
                entries,
            };
            fs::write(&path, to_json(&file)? + "\n")?;
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
        OracleKind::Transform => {
            let spec = args.testfn.clone().unwrap_or_else(|| "gaussian:a=1".into());
            let f = TestFunction::parse(&spec)?;
            #[derive(Serialize)]
            struct Entry {
                u: f64,
                h_hat_closed: f64,
                h_hat_quadrature: f64,
                abs_diff: f64,
            }
            #[derive(Serialize)]
            struct File {
                tool: String,
                testfn: String,
                grid: Vec<Entry>,
                phi_at: Vec<(f64, f64)>,
            }
            let mut grid = Vec::new();
            let mut u = -20.0f64;
            while u <= 20.0 + 1e-9 {
                let closed = f.h_hat(u);
                let quad = f.h_hat_quadrature(u, 1e-12)?.value;
                grid.push(Entry {
                    u,
                    h_hat_closed: closed,
                    h_hat_quadrature: quad,
                    abs_diff: (closed - quad).abs(),
                });
                u += 2.5;
            }
            let mut phi_at = Vec::new();
            for x in [0.0, 1.0, 5.0] {
                phi_at.push((x, f.phi_from_q(x, 1e-11)?.value));
            }
            let path = fixtures_dir.join("transform.json");
            let file = File {
                tool: "tracelab oracle transform".into(),
                testfn: spec,
                grid,
                phi_at,
            };
            fs::write(&path, to_json(&file)? + "\n")?;
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
    }
}
