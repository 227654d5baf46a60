//! Command line interface; `main.rs` only parses arguments and calls [`run`].

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

use super::curve::{ApTable, CurveSpec};
use super::lmfdb::{Cache, HttpTransport, LmfdbClient, Normalization, OfflineTransport, DEFAULT_BASE_URL};
use super::schema::load_fixture;
use super::{write_atomic, IoError};
use crate::characters::IdealCharacter;
use crate::field_arith::{QuadField, QuadInt};
use crate::formal_series::{c_series_from_lambda, euler_product_inverse, extract_prime_relation, FormalSeries};
use crate::sato_tate::{
    histogram, histogram_csv, histogram_svg, ks_coefficient, ks_test, synth_eigen_series, KsReport,
    KS_DEFAULT_COEFFICIENT,
};
use crate::sign_pipeline::{EigenvalueSeries, SignProfile, SignTally, TALLY_CSV_HEADER};

#[derive(Parser, Debug)]
#[command(name = "shimura-signs", version, about = "Sign and Sato-Tate statistics of Shimura-lifted coefficients")]
pub struct Cli {
    /// Write the result to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the prime ideals of norm at most X.
    Primes {
        #[arg(long, default_value_t = 1)]
        d: u64,
        #[arg(long)]
        x: u64,
    },
    /// Evaluate chi = psi * eps_tau at the prime ideals of norm at most X.
    Char {
        #[arg(long, default_value_t = 1)]
        d: u64,
        /// Totally positive tau as `x` or `x,y`, meaning x + y w in the integral basis.
        #[arg(long)]
        tau: Option<String>,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        psi_file: Option<PathBuf>,
    },
    /// Tally the signs of lambda(tau, a^-1 P) for eigenvalue data.
    Signs(SignsArgs),
    /// Histogram and KS test of the Sato-Tate coordinates B(P).
    Stats(StatsArgs),
    /// Synthetic end-to-end run on semicircle-distributed eigenvalues.
    Simulate(SimulateArgs),
    /// Euler product round trips and prime relation residuals on random series.
    SeriesCheck(SeriesCheckArgs),
}

#[derive(Args, Debug)]
#[group(id = "source", required = true, multiple = false)]
pub struct SourceArgs {
    /// Built-in curve label or `a1,a2,a3,a4,a6`; base-changed when --d is not 1.
    #[arg(long, group = "source")]
    pub curve: Option<String>,
    /// Eigenvalue file in the JSON fixture format.
    #[arg(long, group = "source")]
    pub fixture: Option<PathBuf>,
    /// LMFDB label, e.g. 37.2.a.a or 2.2.5.1-31.1-a.
    #[arg(long, group = "source")]
    pub lmfdb: Option<String>,
}

#[derive(Args, Debug)]
pub struct FetchArgs {
    #[arg(long, default_value = DEFAULT_BASE_URL)]
    pub lmfdb_url: String,
    /// Use only cached LMFDB data.
    #[arg(long)]
    pub offline: bool,
    #[arg(long, value_enum, default_value_t = Normalization::Arithmetic)]
    pub normalization: Normalization,
}

#[derive(Args, Debug)]
pub struct SignsArgs {
    /// Field Q(sqrt d); defaults to the data's field, or 1 for curves.
    #[arg(long)]
    pub d: Option<u64>,
    #[arg(long)]
    pub tau: Option<String>,
    #[arg(long)]
    pub x: u64,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub fetch: FetchArgs,
    #[arg(long)]
    pub psi_file: Option<PathBuf>,
    /// Emit tallies at x/steps, 2x/steps, ..., x.
    #[arg(long, default_value_t = 1)]
    pub steps: u64,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(long)]
    pub d: Option<u64>,
    #[arg(long)]
    pub x: u64,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub fetch: FetchArgs,
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
    /// Also write an SVG histogram here.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// KS significance level; the default threshold is 1.63/sqrt(n).
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 5)]
    pub d: u64,
    #[arg(long)]
    pub x: u64,
    #[arg(long, default_value_t = 2)]
    pub k0: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "2")]
    pub tau: String,
    #[arg(long, default_value_t = 1)]
    pub steps: u64,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SeriesCheckArgs {
    #[arg(long, default_value_t = 5)]
    pub d: u64,
    #[arg(long, default_value = "2")]
    pub tau: String,
    /// Series cutoff.
    #[arg(long, default_value_t = 1000)]
    pub x: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub trials: u64,
}

/// Runs one command; `Ok(false)` means a declared check failed.
pub fn run(cli: &Cli) -> Result<bool, IoError> {
    let (text, ok) = match &cli.command {
        Command::Primes { d, x } => (primes(*d, *x, cli.format)?, true),
        Command::Char { d, tau, x, psi_file } => (character(*d, tau.as_deref(), *x, psi_file.as_ref(), cli.format)?, true),
        Command::Signs(args) => (signs(args, cli.format)?, true),
        Command::Stats(args) => stats(args, cli.format)?,
        Command::Simulate(args) => simulate(args, cli.format)?,
        Command::SeriesCheck(args) => series_check(args, cli.format)?,
    };
    match &cli.out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(ok)
}

fn field(d: u64) -> Result<QuadField, IoError> {
    Ok(QuadField::new(d)?)
}

/// `x` or `x,y` as `x + y w`.
pub fn parse_tau(field: &QuadField, s: &str) -> Result<QuadInt, IoError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<BigInt>().map_err(|_| IoError::Usage(format!("bad tau component {t:?}")));
    let tau = match parts.as_slice() {
        [x] => QuadInt::new(num(x)?, BigInt::from(0)),
        [x, y] if !field.is_rational() => QuadInt::new(num(x)?, num(y)?),
        _ => return Err(IoError::Usage(format!("tau must be `x` or `x,y` (not over Q), got {s:?}"))),
    };
    Ok(tau)
}

fn build_character(
    field: QuadField,
    tau: Option<&str>,
    psi_file: Option<&PathBuf>,
) -> Result<IdealCharacter, IoError> {
    let tau = tau.map(|t| parse_tau(&field, t)).transpose()?;
    let mut chi = IdealCharacter::new(field, tau)?;
    if let Some(path) = psi_file {
        let table = IdealCharacter::psi_table_from_json(&field, &std::fs::read_to_string(path)?)?;
        chi = chi.with_psi(table);
    }
    Ok(chi)
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn primes(d: u64, x: u64, format: Format) -> Result<String, IoError> {
    let k = field(d)?;
    let primes = k.prime_ideals_up_to(x);
    Ok(match format {
        Format::Csv => {
            let mut out = String::from("norm,rational_prime,splitting,root_label,label\n");
            for p in &primes {
                writeln!(out, "{},{},{:?},{},{p}", p.norm(), p.rational_prime(), p.splitting(), p.root_label()).unwrap();
            }
            out
        }
        Format::Json => json_text(&Value::Array(
            primes
                .iter()
                .map(|p| {
                    json!({"norm": p.norm(), "rational_prime": p.rational_prime(),
                        "splitting": p.splitting(), "root_label": p.root_label(), "label": p.to_string()})
                })
                .collect(),
        )),
    })
}

fn character(d: u64, tau: Option<&str>, x: u64, psi: Option<&PathBuf>, format: Format) -> Result<String, IoError> {
    let k = field(d)?;
    let chi = build_character(k, tau, psi)?;
    let rows: Vec<_> = k.prime_ideals_up_to(x).into_iter().map(|p| (p, chi.value(&p))).collect();
    Ok(match format {
        Format::Csv => {
            let mut out = String::from("norm,rational_prime,root_label,label,value\n");
            for (p, v) in &rows {
                writeln!(out, "{},{},{},{p},{v}", p.norm(), p.rational_prime(), p.root_label()).unwrap();
            }
            out
        }
        Format::Json => json_text(&Value::Array(
            rows.iter()
                .map(|(p, v)| json!({"norm": p.norm(), "rational_prime": p.rational_prime(),
                    "root_label": p.root_label(), "label": p.to_string(), "value": v}))
                .collect(),
        )),
    })
}

/// Loads eigenvalue data covering every prime of norm `<= x`.
fn load_source(source: &SourceArgs, fetch: &FetchArgs, d: Option<u64>, x: u64) -> Result<EigenvalueSeries, IoError> {
    let series = if let Some(spec) = &source.curve {
        let curve: CurveSpec = spec.parse()?;
        let k = field(d.unwrap_or(1))?;
        ApTable::compute(&curve, x).series_over(k, x)?
    } else if let Some(path) = &source.fixture {
        load_fixture(path)?
    } else if let Some(label) = &source.lmfdb {
        let cache = Cache::from_env();
        if fetch.offline {
            LmfdbClient::new(&fetch.lmfdb_url, cache, OfflineTransport, fetch.normalization).fetch(label)?
        } else {
            LmfdbClient::new(&fetch.lmfdb_url, cache, HttpTransport::new(), fetch.normalization).fetch(label)?
        }
    } else {
        return Err(IoError::Usage("one of --curve, --fixture, --lmfdb is required".into()));
    };
    if let Some(d) = d {
        if series.field().d() != d {
            return Err(IoError::Usage(format!("data is over Q(sqrt {}), not Q(sqrt {d})", series.field().d())));
        }
    }
    Ok(series)
}

fn step_points(x: u64, steps: u64) -> Vec<u64> {
    let steps = steps.max(1);
    (1..=steps).map(|i| (x as u128 * i as u128 / steps as u128) as u64).collect()
}

fn tally_text(tallies: &[SignTally], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = format!("{TALLY_CSV_HEADER}\n");
            for t in tallies {
                writeln!(out, "{}", t.csv_row()).unwrap();
            }
            out
        }
        Format::Json => json_text(&Value::Array(tallies.iter().map(SignTally::to_json).collect())),
    }
}

fn signs(args: &SignsArgs, format: Format) -> Result<String, IoError> {
    let series = load_source(&args.source, &args.fetch, args.d, args.x)?;
    let chi = build_character(*series.field(), args.tau.as_deref(), args.psi_file.as_ref())?;
    let profile = SignProfile::build(&series, &chi, args.x)?;
    let tallies: Vec<SignTally> = step_points(args.x, args.steps).into_iter().map(|x| profile.tally(x)).collect();
    Ok(tally_text(&tallies, format))
}

fn ks_for(samples: &[f64], alpha: Option<f64>) -> Result<KsReport, IoError> {
    let coefficient = alpha.map_or(KS_DEFAULT_COEFFICIENT, ks_coefficient);
    Ok(ks_test(samples, coefficient)?)
}

fn ks_json(r: &KsReport) -> Value {
    json!({"n": r.n, "statistic": r.statistic, "threshold": r.threshold, "pass": r.pass})
}

fn stats(args: &StatsArgs, format: Format) -> Result<(String, bool), IoError> {
    if args.bins == 0 {
        return Err(IoError::Usage("--bins must be positive".into()));
    }
    let series = load_source(&args.source, &args.fetch, args.d, args.x)?;
    let samples = series.sato_tate_samples(args.x);
    let ks = ks_for(&samples, args.alpha)?;
    let bins = histogram(&samples, args.bins);
    if let Some(path) = &args.svg {
        write_atomic(path, histogram_svg(&bins).as_bytes())?;
    }
    let text = match format {
        Format::Csv => {
            eprintln!("ks_n={} ks_statistic={} ks_threshold={} ks_pass={}", ks.n, ks.statistic, ks.threshold, ks.pass);
            histogram_csv(&bins)
        }
        Format::Json => json_text(&json!({"label": series.label(), "ks": ks_json(&ks), "bins": bins})),
    };
    Ok((text, ks.pass))
}

fn simulate(args: &SimulateArgs, format: Format) -> Result<(String, bool), IoError> {
    let k = field(args.d)?;
    let series = synth_eigen_series(k, args.x, args.k0, args.seed)?;
    let chi = build_character(k, Some(&args.tau), None)?;
    let profile = SignProfile::build(&series, &chi, args.x)?;
    let ks = ks_for(&series.sato_tate_samples(args.x), args.alpha)?;
    let tallies: Vec<SignTally> = step_points(args.x, args.steps).into_iter().map(|x| profile.tally(x)).collect();
    let text = match format {
        Format::Csv => {
            let mut out = format!("{TALLY_CSV_HEADER},ks_n,ks_statistic,ks_threshold,ks_pass\n");
            for t in &tallies {
                writeln!(out, "{},{},{},{},{}", t.csv_row(), ks.n, ks.statistic, ks.threshold, ks.pass).unwrap();
            }
            out
        }
        Format::Json => json_text(&json!({
            "seed": args.seed,
            "k0": args.k0,
            "tallies": tallies.iter().map(SignTally::to_json).collect::<Vec<_>>(),
            "ks": ks_json(&ks),
        })),
    };
    Ok((text, ks.pass))
}

/// A normalized series with about a quarter of the coefficients up to `cutoff` nonzero.
pub fn random_lambda_series(field: QuadField, cutoff: u64, rng: &mut impl Rng) -> FormalSeries {
    let mut s = FormalSeries::identity(field, cutoff);
    for m in field.ideals_up_to(cutoff).into_iter().skip(1) {
        if rng.random_ratio(1, 4) {
            let num = rng.random_range(1..=9) * if rng.random_bool(0.5) { 1 } else { -1 };
            let den = rng.random_range(1..=9);
            s.set(m, BigRational::new(BigInt::from(num), BigInt::from(den))).expect("within cutoff");
        }
    }
    s
}

fn series_check(args: &SeriesCheckArgs, format: Format) -> Result<(String, bool), IoError> {
    let k = field(args.d)?;
    let chi = build_character(k, Some(&args.tau), None)?;
    let inverse = euler_product_inverse(&chi, args.x);
    let good: Vec<_> = k.prime_ideals_up_to(args.x).into_iter().filter(|p| !chi.is_bad(p)).collect();
    let mut rows = Vec::new();
    for trial in 0..args.trials {
        let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
        rng.set_stream(trial);
        let lambda = random_lambda_series(k, args.x, &mut rng);
        let c = c_series_from_lambda(&lambda, &chi)?;
        let round_trip = c.mul(&inverse)? == lambda;
        let mut failures = 0u64;
        for p in &good {
            if extract_prime_relation(&c, &lambda, &chi, p)? != BigRational::from_integer(0.into()) {
                failures += 1;
            }
        }
        rows.push((trial, lambda.len(), round_trip, good.len(), failures));
    }
    let ok = rows.iter().all(|r| r.2 && r.4 == 0);
    let text = match format {
        Format::Csv => {
            let mut out = String::from("trial,terms,round_trip,primes_checked,relation_failures\n");
            for (t, n, rt, g, f) in &rows {
                writeln!(out, "{t},{n},{rt},{g},{f}").unwrap();
            }
            out
        }
        Format::Json => json_text(&Value::Array(
            rows.iter()
                .map(|(t, n, rt, g, f)| json!({"trial": t, "terms": n, "round_trip": rt,
                    "primes_checked": g, "relation_failures": f}))
                .collect(),
        )),
    };
    Ok((text, ok))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<bool, IoError> {
        let cli = Cli::try_parse_from(std::iter::once("shimura-signs").chain(args.iter().copied()))
            .map_err(|e| IoError::Usage(e.to_string()))?;
        run(&cli)
    }

    #[test]
    fn parses_subcommands() {
        assert!(Cli::try_parse_from(["s", "signs", "--x", "10"]).is_err(), "a source is required");
        assert!(Cli::try_parse_from(["s", "signs", "--x", "10", "--curve", "37a", "--fixture", "f"]).is_err());
        assert!(Cli::try_parse_from(["s", "simulate", "--x", "10", "--seed", "3"]).is_ok());
        assert!(Cli::try_parse_from(["s", "series-check", "--format", "json"]).is_ok());
    }

    #[test]
    fn tau_parsing() {
        let k = QuadField::new(5).unwrap();
        assert_eq!(parse_tau(&k, "2").unwrap(), QuadInt::integer(2));
        assert_eq!(parse_tau(&k, "1, 1").unwrap(), QuadInt::new(1.into(), 1.into()));
        assert!(parse_tau(&QuadField::rationals(), "1,1").is_err());
        assert!(parse_tau(&k, "two").is_err());
    }

    #[test]
    fn step_points_end_at_x() {
        assert_eq!(step_points(10, 3), vec![3, 6, 10]);
        assert_eq!(step_points(10, 0), vec![10]);
    }

    #[test]
    fn commands_write_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("p.csv");
        assert!(run_args(&["primes", "--d", "5", "--x", "11", "--out", out.to_str().unwrap()]).unwrap());
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(run_args(&["series-check", "--x", "200", "--trials", "2", "--out", out.to_str().unwrap()]).unwrap());
        assert!(std::fs::read_to_string(&out).unwrap().contains(",true,"));
    }
}
