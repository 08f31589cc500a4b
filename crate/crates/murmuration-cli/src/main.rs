//! Command-line front door: parameter parsing, orchestration, report
//! emission.
//!
//! Exit codes: 0 on success, 1 on validation failure (bad flags or
//! parameters out of regime), 2 on precision/truncation failure or when a
//! requested check finds residuals above tolerance.
//!
//! A plain `key=value` config file can stand in for flags (`--config`);
//! explicit flags win on conflict. `MURMURATION_THREADS` overrides the
//! thread count. Reports embed the fully resolved configuration, and the
//! fixed-order reductions in the library make report files byte-identical
//! across thread counts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use murmuration::arithcore::build_tables;
use murmuration::kernels::{make_profile, Weighting};
use murmuration::modforms::{eigen_data_batch, harmonic_weights};
use murmuration::murmur::{
    decorrelation_sum, l_series, l_series_euler, murmuration_report, nu_density,
    write_decorrelation_csv, Interval, DEFAULT_PRIME_CUT, DEFAULT_TERM_CUT,
};
use murmuration::petersson::{compare, write_csv as write_petersson_csv, PeterssonReport};
use murmuration::Error;

#[derive(Parser)]
#[command(name = "murmuration", version, about = "Murmuration experiment runner")]
struct Cli {
    /// key=value config file; explicit flags win on conflict
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// worker threads (MURMURATION_THREADS overrides)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// output file (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// output format for report files
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare both sides of the trace formula over a (k, p, b) grid
    PeterssonCheck(PeterssonArgs),
    /// Weight-sum identity residuals at one profile
    KernelCheck(KernelArgs),
    /// Kloosterman-prime decorrelation sums over a modulus range
    Decorrelate(DecorrelateArgs),
    /// Auxiliary L-series and the ν(E) density identity
    Density(DensityArgs),
    /// One full murmuration report
    Murmurate(MurmurateArgs),
    /// Sweep K and emit the deviation trend
    Scan(ScanArgs),
}

#[derive(Args, Serialize, Clone)]
struct PeterssonArgs {
    #[arg(long, id = "k-min")]
    k_min: Option<u32>,
    #[arg(long, id = "k-max")]
    k_max: Option<u32>,
    #[arg(long, id = "p-max")]
    p_max: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Serialize, Clone)]
struct KernelArgs {
    #[arg(long = "K")]
    k_center: Option<f64>,
    #[arg(long = "M")]
    width: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Serialize, Clone)]
struct DecorrelateArgs {
    #[arg(long, id = "c-min")]
    c_min: Option<u64>,
    #[arg(long, id = "c-max")]
    c_max: Option<u64>,
    #[arg(long)]
    x: Option<f64>,
    /// flag residuals above this value
    #[arg(long, id = "max-residual")]
    max_residual: Option<f64>,
}

#[derive(Args, Serialize, Clone)]
struct DensityArgs {
    #[arg(long = "A")]
    lo: Option<f64>,
    #[arg(long = "B")]
    hi: Option<f64>,
    #[arg(long, id = "q-cut")]
    q_cut: Option<u64>,
    #[arg(long, id = "t-cut")]
    t_cut: Option<u64>,
    #[arg(long, id = "quad-tol")]
    quad_tol: Option<f64>,
    /// comma-separated s values for the L-series comparison
    #[arg(long, id = "s-values")]
    s_values: Option<String>,
}

#[derive(Args, Serialize, Clone)]
struct MurmurateArgs {
    #[arg(long = "K")]
    k_center: Option<f64>,
    #[arg(long = "M")]
    width: Option<f64>,
    #[arg(long = "A")]
    lo: Option<f64>,
    #[arg(long = "B")]
    hi: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Serialize, Clone)]
struct ScanArgs {
    /// comma-separated list of K values
    #[arg(long, id = "K-list")]
    k_list: Option<String>,
    #[arg(long = "A")]
    lo: Option<f64>,
    #[arg(long = "B")]
    hi: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let threads = std::env::var("MURMURATION_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .or(cli.threads)
        .or_else(|| config_get(&config, "threads"));
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = cli
        .out
        .clone()
        .or_else(|| config.get("out").map(PathBuf::from));
    let format = cli
        .format
        .clone()
        .or_else(|| config.get("format").cloned())
        .unwrap_or_else(|| "csv".to_string());

    let result = match &cli.command {
        Command::PeterssonCheck(a) => run_petersson(merge_petersson(a, &config), &out),
        Command::KernelCheck(a) => run_kernel(merge_kernel(a, &config), &out),
        Command::Decorrelate(a) => run_decorrelate(merge_decorrelate(a, &config), &out),
        Command::Density(a) => run_density(merge_density(a, &config), &out),
        Command::Murmurate(a) => run_murmurate(merge_murmurate(a, &config), &out, &format),
        Command::Scan(a) => run_scan(merge_scan(a, &config), &out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(classify(&e))
        }
    }
}

fn classify(e: &Error) -> u8 {
    match e {
        Error::Parameter(_) | Error::Domain(_) => 1,
        _ => 2,
    }
}

fn load_config(path: Option<&std::path::Path>) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    let Some(path) = path else {
        return Ok(map);
    };
    let text = fs::read_to_string(path).map_err(|e| format!("config {path:?}: {e}"))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("config line {} is not key=value: {line}", lineno + 1));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn config_get<T: std::str::FromStr>(config: &BTreeMap<String, String>, key: &str) -> Option<T> {
    config.get(key).and_then(|v| v.parse().ok())
}

macro_rules! resolve {
    ($field:expr, $config:expr, $key:literal, $default:expr) => {
        $field.or_else(|| config_get($config, $key)).unwrap_or($default)
    };
}

struct PeterssonConfig {
    k_min: u32,
    k_max: u32,
    p_max: u64,
    tol: f64,
}

fn merge_petersson(a: &PeterssonArgs, c: &BTreeMap<String, String>) -> PeterssonConfig {
    PeterssonConfig {
        k_min: resolve!(a.k_min, c, "k-min", 12),
        k_max: resolve!(a.k_max, c, "k-max", 30),
        p_max: resolve!(a.p_max, c, "p-max", 97),
        tol: resolve!(a.tol, c, "tol", 1e-11),
    }
}

fn run_petersson(cfg: PeterssonConfig, out: &Option<PathBuf>) -> Result<ExitCode, Error> {
    let weights: Vec<u32> = (cfg.k_min..=cfg.k_max).filter(|k| k % 2 == 0).collect();
    let fit_max = murmuration::modforms::VALIDATION_PRIMES[2];
    let data = eigen_data_batch(&weights, cfg.p_max.max(fit_max))?;
    let mut reports: Vec<PeterssonReport> = Vec::new();
    let mut worst = 0.0f64;
    let mut all_ok = true;
    for d in data {
        if d.dim() == 0 {
            continue;
        }
        let d = harmonic_weights(d)?;
        for &p in d.primes().iter().filter(|&&p| p <= cfg.p_max) {
            for b in [0u8, 1] {
                let r = compare(&d, p, b, cfg.tol)?;
                let rel = r.residual / r.spectral.abs().max(1.0);
                worst = worst.max(rel);
                all_ok &= rel <= 1e-9;
                reports.push(r);
            }
        }
    }
    let mut text = format!(
        "# config: k-min={} k-max={} p-max={} tol={:e}\n",
        cfg.k_min, cfg.k_max, cfg.p_max, cfg.tol
    );
    let mut body = Vec::new();
    write_petersson_csv(&reports, &mut body)?;
    text.push_str(std::str::from_utf8(&body).expect("csv is utf-8"));
    emit(out, &text)?;
    eprintln!(
        "petersson-check: {} comparisons, worst relative residual {worst:.3e}",
        reports.len()
    );
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

struct KernelConfig {
    k_center: f64,
    width: f64,
    samples: usize,
}

fn merge_kernel(a: &KernelArgs, c: &BTreeMap<String, String>) -> KernelConfig {
    KernelConfig {
        k_center: resolve!(a.k_center, c, "K", 200.0),
        width: resolve!(a.width, c, "M", 40.0),
        samples: resolve!(a.samples, c, "samples", 10),
    }
}

fn run_kernel(cfg: KernelConfig, out: &Option<PathBuf>) -> Result<ExitCode, Error> {
    let profile = make_profile(cfg.k_center, cfg.width, 1024)?;
    let mut text = format!(
        "# config: K={} M={} samples={}\n",
        cfg.k_center, cfg.width, cfg.samples
    );
    text.push_str("x,class,lhs,rhs,residual_rel\n");
    let mut worst = 0.0f64;
    for i in 0..cfg.samples {
        let x = cfg.k_center * (0.5 + 1.5 * (i as f64 + 0.5) / cfg.samples as f64);
        let v1 = profile.v1(x)?;
        let v2 = profile.v2(x)?;
        let scale = v1.norm().max(v2.norm());
        for a in [0u8, 2] {
            let lhs = profile.weighted_bessel_sum(x, Weighting::Class(a))?;
            let sign = if a == 0 { -1.0 } else { 1.0 };
            let rhs = -0.5 * v2.im + sign * 0.5 * v1.re;
            let rel = (lhs - rhs).abs() / scale;
            worst = worst.max(rel);
            writeln!(text, "{x:.6},{a},{lhs:.17e},{rhs:.17e},{rel:.3e}").expect("string write");
        }
    }
    emit(out, &text)?;
    eprintln!("kernel-check: max residual {worst:.3e}");
    Ok(if worst <= 1e-6 { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

struct DecorrelateConfig {
    c_min: u64,
    c_max: u64,
    x: f64,
    max_residual: f64,
}

fn merge_decorrelate(a: &DecorrelateArgs, c: &BTreeMap<String, String>) -> DecorrelateConfig {
    DecorrelateConfig {
        c_min: resolve!(a.c_min, c, "c-min", 1),
        c_max: resolve!(a.c_max, c, "c-max", 30),
        x: resolve!(a.x, c, "x", 1e6),
        max_residual: resolve!(a.max_residual, c, "max-residual", 5.0),
    }
}

fn run_decorrelate(cfg: DecorrelateConfig, out: &Option<PathBuf>) -> Result<ExitCode, Error> {
    let table = build_tables(cfg.x as u64 + 1, cfg.c_max.max(64))?;
    let mut reports = Vec::new();
    let mut worst = 0.0f64;
    for c in cfg.c_min..=cfg.c_max {
        let r = decorrelation_sum(c, cfg.x, &table)?;
        worst = worst.max(r.normalized_residual);
        reports.push(r);
    }
    let mut text = format!(
        "# config: c-min={} c-max={} x={:e} max-residual={}\n",
        cfg.c_min, cfg.c_max, cfg.x, cfg.max_residual
    );
    let mut body = Vec::new();
    write_decorrelation_csv(&reports, &mut body)?;
    text.push_str(std::str::from_utf8(&body).expect("csv is utf-8"));
    emit(out, &text)?;
    eprintln!("decorrelate: worst normalized residual {worst:.3}");
    Ok(if worst <= cfg.max_residual {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

struct DensityConfig {
    lo: f64,
    hi: f64,
    q_cut: u64,
    t_cut: u64,
    quad_tol: f64,
    s_values: Vec<f64>,
}

fn merge_density(a: &DensityArgs, c: &BTreeMap<String, String>) -> DensityConfig {
    let s_raw = a
        .s_values
        .clone()
        .or_else(|| c.get("s-values").cloned())
        .unwrap_or_else(|| "0.5,1,2".to_string());
    DensityConfig {
        lo: resolve!(a.lo, c, "A", 1.0),
        hi: resolve!(a.hi, c, "B", 4.0),
        q_cut: resolve!(a.q_cut, c, "q-cut", 200_000),
        t_cut: resolve!(a.t_cut, c, "t-cut", 40_000),
        quad_tol: resolve!(a.quad_tol, c, "quad-tol", 1e-3),
        s_values: s_raw
            .split(',')
            .filter_map(|s| s.trim().parse().ok())
            .collect(),
    }
}

fn run_density(cfg: DensityConfig, out: &Option<PathBuf>) -> Result<ExitCode, Error> {
    let table = build_tables(DEFAULT_PRIME_CUT, DEFAULT_TERM_CUT)?;
    let mut text = format!(
        "# config: A={} B={} q-cut={} t-cut={} quad-tol={:e} s-values={:?}\n",
        cfg.lo, cfg.hi, cfg.q_cut, cfg.t_cut, cfg.quad_tol, cfg.s_values
    );
    text.push_str("quantity,value_a,value_b,relative_gap\n");
    let mut ok = true;
    for &s in &cfg.s_values {
        let v = l_series(s, DEFAULT_PRIME_CUT, DEFAULT_TERM_CUT, &table)?;
        let gap = (v.dirichlet - v.euler).abs() / v.euler.abs();
        ok &= gap <= 1e-3;
        writeln!(
            text,
            "L({s}),{:.12e},{:.12e},{gap:.3e}",
            v.dirichlet, v.euler
        )
        .expect("string write");
    }
    // residue probe s·L(s) -> 1
    let probe1 = 0.05 * l_series_euler(0.05, DEFAULT_PRIME_CUT, &table)?;
    let probe2 = 0.01 * l_series_euler(0.01, DEFAULT_PRIME_CUT, &table)?;
    let residue = (0.05 * probe2 - 0.01 * probe1) / 0.04;
    ok &= (residue - 1.0).abs() <= 0.02;
    writeln!(text, "residue_at_0,{residue:.12e},1.0,{:.3e}", (residue - 1.0).abs())
        .expect("string write");
    let nu = nu_density(cfg.lo, cfg.hi, cfg.q_cut, cfg.t_cut, cfg.quad_tol)?;
    let gap = (nu.rational_form - nu.cosine_form).abs() / nu.cosine_form.abs();
    ok &= gap <= 1e-4;
    writeln!(
        text,
        "nu([{}:{}]),{:.12e},{:.12e},{gap:.3e}",
        cfg.lo, cfg.hi, nu.rational_form, nu.cosine_form
    )
    .expect("string write");
    emit(out, &text)?;
    eprintln!("density: ν forms gap {gap:.3e}, residue probe {residue:.6}");
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

struct MurmurateConfig {
    k_center: f64,
    width: f64,
    lo: f64,
    hi: f64,
    tol: f64,
}

fn merge_murmurate(a: &MurmurateArgs, c: &BTreeMap<String, String>) -> MurmurateConfig {
    let k_center = resolve!(a.k_center, c, "K", 200.0);
    MurmurateConfig {
        k_center,
        width: resolve!(a.width, c, "M", k_center.sqrt().round()),
        lo: resolve!(a.lo, c, "A", 1.0),
        hi: resolve!(a.hi, c, "B", 2.0),
        tol: resolve!(a.tol, c, "tol", 1e-6),
    }
}

#[derive(Serialize)]
struct MurmurateOutput<'a> {
    config: BTreeMap<&'static str, f64>,
    report: &'a murmuration::murmur::MurmurationReport,
}

fn run_murmurate(
    cfg: MurmurateConfig,
    out: &Option<PathBuf>,
    format: &str,
) -> Result<ExitCode, Error> {
    let window = Interval::new(cfg.lo, cfg.hi)?;
    let report = murmuration_report(cfg.k_center, cfg.width, window, cfg.tol)?;
    let config: BTreeMap<&'static str, f64> = [
        ("K", cfg.k_center),
        ("M", cfg.width),
        ("A", cfg.lo),
        ("B", cfg.hi),
        ("tol", cfg.tol),
    ]
    .into_iter()
    .collect();
    let text = if format == "json" {
        let wrapped = MurmurateOutput {
            config,
            report: &report,
        };
        serde_json::to_string_pretty(&wrapped).expect("report serializes") + "\n"
    } else {
        let mut t = format!(
            "# config: K={} M={} A={} B={} tol={:e}\n",
            cfg.k_center, cfg.width, cfg.lo, cfg.hi, cfg.tol
        );
        t.push_str(
            "numerator_direct,numerator_kernel,numerator_mainterm,denominator,\
             denominator_diag,denominator_offdiag,ratio,predicted,normalized_ratio,deviation\n",
        );
        writeln!(
            t,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            report.numerator_direct,
            report.numerator_kernel,
            report.numerator_mainterm,
            report.denominator,
            report.denominator_diag,
            report.denominator_offdiag,
            report.ratio,
            report.predicted,
            report.normalized_ratio,
            report.deviation
        )
        .expect("string write");
        t
    };
    emit(out, &text)?;
    eprintln!(
        "murmurate: K·ratio = {:.6} vs 1/(√B+√A) = {:.6} (deviation {:.2}%)",
        report.normalized_ratio,
        1.0 / (cfg.hi.sqrt() + cfg.lo.sqrt()),
        100.0 * report.deviation
    );
    Ok(ExitCode::SUCCESS)
}

struct ScanConfig {
    k_list: Vec<f64>,
    lo: f64,
    hi: f64,
    tol: f64,
}

fn merge_scan(a: &ScanArgs, c: &BTreeMap<String, String>) -> ScanConfig {
    let raw = a
        .k_list
        .clone()
        .or_else(|| c.get("K-list").cloned())
        .unwrap_or_else(|| "100,200,400".to_string());
    ScanConfig {
        k_list: raw.split(',').filter_map(|s| s.trim().parse().ok()).collect(),
        lo: resolve!(a.lo, c, "A", 1.0),
        hi: resolve!(a.hi, c, "B", 2.0),
        tol: resolve!(a.tol, c, "tol", 1e-6),
    }
}

fn run_scan(cfg: ScanConfig, out: &Option<PathBuf>) -> Result<ExitCode, Error> {
    let window = Interval::new(cfg.lo, cfg.hi)?;
    let mut text = format!(
        "# config: K-list={:?} A={} B={} tol={:e} width-rule=round(sqrt(K))\n",
        cfg.k_list, cfg.lo, cfg.hi, cfg.tol
    );
    text.push_str("K,M,normalized_ratio,limit,deviation\n");
    for &k in &cfg.k_list {
        let width = k.sqrt().round();
        let report = murmuration_report(k, width, window, cfg.tol)?;
        writeln!(
            text,
            "{k},{width},{:.17e},{:.17e},{:.6e}",
            report.normalized_ratio,
            1.0 / (cfg.hi.sqrt() + cfg.lo.sqrt()),
            report.deviation
        )
        .expect("string write");
        eprintln!(
            "scan: K = {k}: K·ratio = {:.6}, deviation {:.2}%",
            report.normalized_ratio,
            100.0 * report.deviation
        );
    }
    emit(out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(Error::Io),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
