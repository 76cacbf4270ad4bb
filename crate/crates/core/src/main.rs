use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use loclab::harness::{
    parse_number, reference_bounds, verify_suite, write_outputs, Config, Constants, Lab, SpectraRun, Summary,
};
use loclab::ladder::{build_ladder, KZeroReading};
use loclab::localization::{simulate_paths, write_spectra_csv, Replay};
use loclab::measures::parse_model;
use loclab::potentials::{build_potential, PotentialCertificateDoc};
use loclab::LoclabError;

#[derive(Parser)]
#[command(name = "loclab", version, about = "Stochastic localization lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate paths and write spectra.csv and replay.json.
    Simulate {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 100)]
        n_paths: usize,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        /// Comma-separated record times.
        #[arg(long)]
        t: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build and certify a test potential; prints or writes its JSON certificate.
    Potential {
        #[arg(long)]
        d0: f64,
        #[arg(long)]
        r0: String,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the time ladder and check its constants; prints JSON.
    Ladder {
        /// p itself.
        #[arg(long, conflicts_with = "log_p", required_unless_present = "log_p")]
        p: Option<f64>,
        /// ln p, for values of p beyond f64.
        #[arg(long)]
        log_p: Option<f64>,
        /// ln n.
        #[arg(long)]
        log_n: f64,
        #[arg(long)]
        c1: f64,
        #[arg(long, value_enum, default_value_t = Reading::FirstCrossing)]
        reading: Reading,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite; writes summary.json and report.txt.
    Verify {
        /// One of the suite names, or `all`.
        #[arg(long)]
        suite: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "loclab-out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n_paths: Option<usize>,
        #[arg(long)]
        h: Option<f64>,
        /// Comma-separated matrix times.
        #[arg(long)]
        t: Option<String>,
        /// Replaces the model list; repeat for several models.
        #[arg(long)]
        model: Vec<String>,
    },
    /// Estimate tails and trace moments of one model; prints JSON.
    Moments {
        #[arg(long)]
        model: String,
        #[arg(long)]
        t: String,
        #[arg(long, default_value = "1,2,3,4")]
        p: String,
        #[arg(long, default_value = "8/3")]
        threshold: String,
        #[arg(long, default_value_t = 1000)]
        n_paths: usize,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Key=value file supplying the reference constants.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render report.txt from a summary.json.
    Report {
        #[arg(long)]
        summary: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Reading {
    FirstCrossing,
    LiteralSup,
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<LoclabError> for Failure {
    fn from(e: LoclabError) -> Self {
        match e {
            LoclabError::Config(_)
            | LoclabError::UnknownSuite(_)
            | LoclabError::InvalidArgument(_)
            | LoclabError::ModelSpec(_)
            | LoclabError::MisalignedSchedule(_) => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn numbers(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| parse_number(x).ok_or_else(|| Failure::Usage(format!("bad number '{x}'"))))
        .collect()
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn simulate(model: &str, n_paths: usize, h: f64, t: &str, seed: u64, out: &Path) -> Outcome {
    let schedule = numbers(t)?;
    let m = parse_model(model, None)?;
    let paths = simulate_paths(&m, &schedule, h, seed, n_paths)?;
    fs::create_dir_all(out)?;
    let mut w = BufWriter::new(fs::File::create(out.join("spectra.csv"))?);
    write_spectra_csv(&mut w, &paths)?;
    w.flush()?;
    let replay = Replay { master_seed: seed, h, schedule, model_spec: model.to_string() };
    emit(&replay, Some(&out.join("replay.json")))?;
    Ok(true)
}

fn potential(d0: f64, r0: &str, grid: usize, out: Option<&Path>) -> Outcome {
    let r0 = numbers(r0)?.first().copied().ok_or_else(|| Failure::Usage("missing r0".into()))?;
    let pot = build_potential(d0, r0, grid)?;
    emit(&PotentialCertificateDoc::from(&pot), out)?;
    Ok(pot.certificate.pass)
}

fn ladder(ln_p: f64, ln_n: f64, c1: f64, reading: Reading, out: Option<&Path>) -> Outcome {
    let reading = match reading {
        Reading::FirstCrossing => KZeroReading::FirstCrossing,
        Reading::LiteralSup => KZeroReading::LiteralSup,
    };
    let built = build_ladder(ln_p, ln_n, c1, reading)?;
    let mut cfg = Config { ladder_ln_p: ln_p, ladder_ln_n: ln_n, ..Config::default() };
    cfg.constants.c1 = Some(c1);
    let suite = verify_suite("ladder", &Lab::new(cfg))?.remove(0);
    let rungs: Vec<Value> = built
        .t
        .iter()
        .zip(&built.log_t_abs)
        .enumerate()
        .map(|(k, (t, u))| serde_json::json!({ "k": k + 1, "t": t, "abs_log_t": u }))
        .collect();
    let doc = serde_json::json!({
        "branch": built.branch,
        "k0": built.k0,
        "ln_p": ln_p,
        "ln_n": ln_n,
        "C1": c1,
        "t_star": built.t_star,
        "t1_star": built.t1_star,
        "rungs": rungs,
        "s": built.s,
        "pass": suite.pass,
        "checks": suite.checks,
    });
    emit(&doc, out)?;
    Ok(suite.pass)
}

#[allow(clippy::too_many_arguments)]
fn verify(
    suite: &str,
    config: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
    n_paths: Option<usize>,
    h: Option<f64>,
    t: Option<&str>,
    models: Vec<String>,
) -> Outcome {
    let mut cfg = match config {
        Some(p) => Config::from_file(p)?,
        None => Config::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = n_paths {
        cfg.n_paths = n;
    }
    if let Some(h) = h {
        cfg.h = h;
    }
    if let Some(t) = t {
        cfg.times = numbers(t)?;
    }
    if !models.is_empty() {
        cfg.models = models;
    }
    cfg.validate()?;
    let lab = Lab::new(cfg);
    let reports = verify_suite(suite, &lab)?;
    let summary = Summary::build(&lab, reports)?;
    write_outputs(out, &summary)?;
    for s in &summary.suites {
        println!("{:<16} {}", s.suite, if s.pass { "PASS" } else { "FAIL" });
    }
    Ok(summary.pass)
}

#[allow(clippy::too_many_arguments)]
fn moments(
    model: &str,
    t: &str,
    p: &str,
    threshold: &str,
    n_paths: usize,
    h: f64,
    seed: u64,
    config: Option<&Path>,
    out: Option<&Path>,
) -> Outcome {
    let times = numbers(t)?;
    let ps = numbers(p)?;
    let threshold = numbers(threshold)?.first().copied().ok_or_else(|| Failure::Usage("missing threshold".into()))?;
    let constants = match config {
        Some(c) => Config::from_file(c)?.constants,
        None => Constants::default(),
    };
    let m = parse_model(model, None)?;
    let run = SpectraRun::simulate(&m, &times, h, seed, n_paths)?;
    let ln_n = (m.dim() as f64).ln();
    let mut rows = Vec::new();
    let mut ok = true;
    for &t in &times {
        let tail = run.tail(t, threshold)?;
        let mut moments = Vec::new();
        for &q in &ps {
            let e = run.trace_moment(t, q)?;
            let envelope = 2.0 * q * (6.0 * q).ln() + ln_n;
            let within = e.upper().ln() <= envelope;
            ok &= within;
            moments.push(serde_json::json!({
                "p": q,
                "estimate": e,
                "log_envelope_6p_2p_n": envelope,
                "within_envelope": within,
                "bounds": reference_bounds(t, ln_n, q, &constants),
            }));
        }
        rows.push(serde_json::json!({ "t": t, "tail": tail, "threshold": threshold, "moments": moments }));
    }
    emit(&serde_json::json!({ "model": model, "n_paths": n_paths, "h": h, "seed": seed, "rows": rows }), out)?;
    Ok(ok)
}

fn report(summary: &Path, out: Option<&Path>) -> Outcome {
    let v: Value = serde_json::from_str(&fs::read_to_string(summary)?)?;
    let str_of = |x: &Value| x.as_str().map(str::to_string).unwrap_or_else(|| x.to_string());
    let f = |x: &Value| x.as_f64().unwrap_or(f64::NAN);
    let verdict = |x: &Value| if x.as_bool().unwrap_or(false) { "PASS" } else { "FAIL" };
    let mut text = String::new();
    text.push_str("loclab verification report\n");
    let c = &v["config"];
    text.push_str(&format!("seed {}  paths {}  h {}\n", c["seed"], c["n_paths"], f(&c["h"])));
    text.push_str(&format!("overall: {}\n", verdict(&v["pass"])));
    for s in v["suites"].as_array().into_iter().flatten() {
        text.push_str(&format!("\n[{}] {}\n", str_of(&s["suite"]), verdict(&s["pass"])));
        for c in s["checks"].as_array().into_iter().flatten() {
            let tag = match (c["pass"].as_bool(), c["regime"].as_bool()) {
                (Some(true), _) => "ok  ",
                (_, Some(true)) => "rgme",
                _ => "FAIL",
            };
            text.push_str(&format!(
                "  {tag} {:<48} margin {:>12.4e}  {}\n",
                str_of(&c["name"]),
                f(&c["margin"]),
                str_of(&c["detail"])
            ));
        }
    }
    let estimates = v["estimates"].as_array().cloned().unwrap_or_default();
    if !estimates.is_empty() {
        text.push_str("\nestimates (mean +- stderr)\n");
        for e in &estimates {
            text.push_str(&format!(
                "  {:<28} t={:<6} {:<14} {:.6e} +- {:.2e}\n",
                str_of(&e["model"]),
                f(&e["t"]),
                str_of(&e["statistic"]),
                f(&e["estimate"]["mean"]),
                f(&e["estimate"]["stderr"])
            ));
        }
    }
    if let Some(c) = v["empirical_c_max"].as_f64() {
        text.push_str(&format!("\nlargest c with 2 exp(-c t^-1/2) n above all tail upper CIs: {c:.6}\n"));
    }
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(v["pass"].as_bool().unwrap_or(false))
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Simulate { model, n_paths, h, t, seed, out } => simulate(&model, n_paths, h, &t, seed, &out),
        Command::Potential { d0, r0, grid, out } => potential(d0, &r0, grid, out.as_deref()),
        Command::Ladder { p, log_p, log_n, c1, reading, out } => {
            let ln_p = match (p, log_p) {
                (_, Some(l)) => l,
                (Some(p), None) if p > 0.0 => p.ln(),
                _ => return Err(Failure::Usage("p must be positive".into())),
            };
            ladder(ln_p, log_n, c1, reading, out.as_deref())
        }
        Command::Verify { suite, config, out, seed, n_paths, h, t, model } => {
            verify(&suite, config.as_deref(), &out, seed, n_paths, h, t.as_deref(), model)
        }
        Command::Moments { model, t, p, threshold, n_paths, h, seed, config, out } => {
            moments(&model, &t, &p, &threshold, n_paths, h, seed, config.as_deref(), out.as_deref())
        }
        Command::Report { summary, out } => report(&summary, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(m)) => {
            eprintln!("loclab: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("loclab: {m}");
            ExitCode::from(2)
        }
    }
}
