//! Command line interface.
//!
//! Four subcommands cover the pipeline: `rates` sweeps achievable rates over
//! SNR, `wyner` sweeps the linear cellular array over the inter-cell gain,
//! `ldpc` tabulates code thresholds, and `selftest` runs the fast invariant
//! suite. Every randomized command requires an explicit `--seed`; the same
//! seed and configuration always produce byte-identical output. Resolved
//! settings are embedded in the output as `# key = value` comment lines.
//!
//! Exit codes: 0 on success, 1 on a usage or runtime error, 2 when the
//! selftest finds a failing check.

use crate::channel::effective_noise_pmf;
use crate::coeffopt::best_equation;
use crate::lattice::Modulation;
use crate::ldpc::{
    bp_decode, check_merge, exit_threshold, ira_base, lift, ra_base, unit_scheme_family,
    BaseMatrix, DecodeOutcome, LiftedCode,
};
use crate::rate::{cof_benchmark_rate, computation_rate, db_to_linear, entropy_bits, NoiseModel};
use crate::selftest::{format_report, run_selftest, Faults};
use crate::wyner::{sweep, SimSettings, SWEEP_CSV_HEADER};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashMap;
use std::path::{Path, PathBuf};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_SELFTEST: u8 = 2;

/// Iterations given to the belief-propagation decoder in simulations.
const MAX_BP_ITER: usize = 200;
/// Frame errors after which a frame-error-rate estimate stops early.
const FER_ERROR_STOP: usize = 50;
/// Frames simulated per parallel batch.
const FER_CHUNK: usize = 32;

const DB_NOTE: &str = "All signal-to-noise ratios are powers in decibels: snr_db = 10 log10(snr). \
Grids are written start:end:step (inclusive) or as a single value.";

#[derive(Parser)]
#[command(
    name = "qcof",
    version,
    about = "Quantized compute-and-forward: rates, cellular sweeps, code thresholds",
    long_about = None,
    after_help = DB_NOTE,
    after_long_help = DB_NOTE
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Achievable-rate sweep over an SNR grid for fixed channel gains.
    Rates(RatesArgs),
    /// Cellular-array rate sweep over the inter-cell gain, optionally simulated.
    Wyner(WynerArgs),
    /// Decoding thresholds of the repeat-accumulate code families.
    Ldpc(LdpcArgs),
    /// Fast invariant suite; exits 2 when any check fails.
    Selftest(SelftestArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Seed for all randomized work (required by rates, wyner, and ldpc).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Read defaults from a "key = value" file; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RatesArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// SNR grid in dB, start:end:step or a single value [default: 0:40:2].
    #[arg(long = "snr-db")]
    snr_db: Option<String>,
    /// Comma separated channel gains [default: 1,0.75,-1.4142135623730951].
    #[arg(long)]
    h: Option<String>,
    /// Comma separated prime field sizes [default: 3,7,17,251].
    #[arg(long)]
    p: Option<String>,
    /// Noise model for the equivalent channel: gauss or exact [default: gauss].
    #[arg(long = "noise-model")]
    noise_model: Option<String>,
}

#[derive(Args)]
struct WynerArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Inter-cell gain grid, start:end:step or a single value [default: 0:1:0.1].
    #[arg(long)]
    gamma: Option<String>,
    /// SNR grid in dB [default: 15].
    #[arg(long = "snr-db")]
    snr_db: Option<String>,
    /// Comma separated prime field sizes [default: 7,251].
    #[arg(long)]
    p: Option<String>,
    /// Backhaul capacity in bits per symbol [default: 2].
    #[arg(long)]
    r0: Option<f64>,
    /// Power allocation columns: on, off, or both [default: both].
    #[arg(long)]
    pa: Option<String>,
    /// Relay noise model in the simulation: gauss or exact [default: gauss].
    #[arg(long = "noise-model")]
    noise_model: Option<String>,
    /// Also measure the frame error rate with lifted codes at each point.
    #[arg(long)]
    simulate: bool,
    /// Frame cap per simulated point [default: 100].
    #[arg(long)]
    frames: Option<usize>,
    /// Target blocklength of the simulated code [default: 16384].
    #[arg(long)]
    blocklength: Option<usize>,
    /// Number of cells in the simulated ring [default: 6].
    #[arg(long)]
    users: Option<usize>,
    /// Power split used by the simulated schedule, in [0, 1] [default: 1].
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Args)]
struct LdpcArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Code family: ra, ira, or both [default: both].
    #[arg(long)]
    base: Option<String>,
    /// Comma separated design rates as fractions [default: 1/2,2/3,4/5].
    #[arg(long)]
    rate: Option<String>,
    /// Comma separated prime field sizes [default: 7].
    #[arg(long)]
    p: Option<String>,
    /// Target blocklength of the lifted code [default: 16384].
    #[arg(long)]
    blocklength: Option<usize>,
    /// Also measure the frame error rate half a bit inside the threshold.
    #[arg(long)]
    simulate: bool,
    /// Frame cap per simulated row [default: 100].
    #[arg(long)]
    frames: Option<usize>,
}

#[derive(Args)]
struct SelftestArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Inject a fault to exercise the failure path (value: modulation-map).
    #[arg(long, hide = true)]
    fault: Option<String>,
}

/// Runs the CLI on a full argument vector (including the program name) and
/// returns the process exit code.
pub fn run_with_args(args: &[String]) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Rates(args) => cmd_rates(args),
        Command::Wyner(args) => cmd_wyner(args),
        Command::Ldpc(args) => cmd_ldpc(args),
        Command::Selftest(args) => cmd_selftest(args),
    };
    match outcome {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

// ---------------------------------------------------------------------------
// Configuration files and value parsing.

/// Key/value pairs read from a `--config` file.
struct FileConfig(HashMap<String, String>);

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self, String> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return Err(format!(
                        "config {} line {}: expected key = value",
                        path.display(),
                        lineno + 1
                    ));
                };
                let key = key.trim().replace('-', "_");
                map.insert(key, value.trim().to_string());
            }
        }
        Ok(FileConfig(map))
    }

    /// String value of a key, if present.
    fn text(&self, key: &str) -> Option<String> {
        self.0.get(key).cloned()
    }

    /// Parsed value of a key, if present.
    fn value<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| format!("config key {key}: {e}")),
        }
    }

    /// Boolean switch: absent means false.
    fn switch(&self, key: &str) -> Result<bool, String> {
        match self.0.get(key).map(String::as_str) {
            None => Ok(false),
            Some("true") | Some("1") | Some("on") => Ok(true),
            Some("false") | Some("0") | Some("off") => Ok(false),
            Some(other) => Err(format!("config key {key}: expected a boolean, got {other}")),
        }
    }
}

/// Parses "start:end:step" (inclusive) or a single value.
fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| -> Result<f64, String> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("not a number: {s}"))
    };
    match parts.len() {
        1 => Ok(vec![num(parts[0])?]),
        3 => {
            let start = num(parts[0])?;
            let end = num(parts[1])?;
            let step = num(parts[2])?;
            if step <= 0.0 {
                return Err(format!("grid step must be positive: {text}"));
            }
            if end < start {
                return Err(format!("grid end is below its start: {text}"));
            }
            let mut out = Vec::new();
            let mut k = 0usize;
            loop {
                let v = start + k as f64 * step;
                if v > end + step * 1e-9 {
                    break;
                }
                out.push(v);
                k += 1;
            }
            Ok(out)
        }
        _ => Err(format!("expected start:end:step or a single value: {text}")),
    }
}

/// Parses a comma separated list of numbers.
fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|e| format!("bad list entry {s}: {e}"))
        })
        .collect()
}

/// Parses a design rate written as "num/den".
fn parse_rate(text: &str) -> Result<(u32, u32), String> {
    let Some((num, den)) = text.split_once('/') else {
        return Err(format!("expected a fraction like 2/3: {text}"));
    };
    let num: u32 = num
        .trim()
        .parse()
        .map_err(|_| format!("bad rate numerator: {text}"))?;
    let den: u32 = den
        .trim()
        .parse()
        .map_err(|_| format!("bad rate denominator: {text}"))?;
    if num == 0 || den == 0 || num >= den {
        return Err(format!("rate must satisfy 0 < num < den: {text}"));
    }
    Ok((num, den))
}

fn parse_noise_model(text: &str) -> Result<NoiseModel, String> {
    match text {
        "gauss" => Ok(NoiseModel::Gaussian),
        "exact" => Ok(NoiseModel::Exact),
        other => Err(format!("noise model must be gauss or exact, got {other}")),
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn check_primes(ps: &[u64], min: u64) -> Result<(), String> {
    for &p in ps {
        if !is_prime(p) {
            return Err(format!("field size {p} is not prime"));
        }
        if p < min {
            return Err(format!("field size {p} is below the minimum {min}"));
        }
    }
    Ok(())
}

/// Flag value, else config value, else default.
fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn require_seed(flag: Option<u64>, cfg: &FileConfig) -> Result<u64, String> {
    match flag.or(cfg.value("seed")?) {
        Some(seed) => Ok(seed),
        None => Err("--seed is required (runs are reproducible, never clock-seeded)".into()),
    }
}

fn apply_jobs(flag: Option<usize>, cfg: &FileConfig) -> Result<Option<usize>, String> {
    let jobs = match flag.or(cfg.value("jobs")?) {
        None => return Ok(None),
        Some(j) => j,
    };
    if jobs == 0 {
        return Err("--jobs must be at least 1".into());
    }
    // Repeated initialization in one process is fine; keep the first pool.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global();
    Ok(Some(jobs))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
    }
}

/// Assembles comment lines, a header row, and data rows into a CSV document.
fn render_csv(comments: &[(&str, String)], header: &str, rows: &[String]) -> String {
    let mut out = String::new();
    for (key, value) in comments {
        out.push_str(&format!("# {key} = {value}\n"));
    }
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    out
}

fn join_f64(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:.6}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn join_u64(xs: &[u64]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn default_gains() -> Vec<f64> {
    vec![1.0, 0.75, -std::f64::consts::SQRT_2]
}

// ---------------------------------------------------------------------------
// rates

fn cmd_rates(args: RatesArgs) -> Result<u8, String> {
    let cfg = FileConfig::load(args.common.config.as_deref())?;
    let seed = require_seed(args.common.seed, &cfg)?;
    let jobs = apply_jobs(args.common.jobs, &cfg)?;

    let snr_grid = parse_grid(&pick(args.snr_db, cfg.text("snr_db"), "0:40:2".into()))?;
    let h = match pick(args.h, cfg.text("h"), String::new()).as_str() {
        "" => default_gains(),
        text => parse_list::<f64>(text)?,
    };
    if h.is_empty() || h.iter().all(|&x| x == 0.0) {
        return Err("channel gains must contain a nonzero entry".into());
    }
    let ps: Vec<u64> = match pick(args.p, cfg.text("p"), String::new()).as_str() {
        "" => vec![3, 7, 17, 251],
        text => parse_list(text)?,
    };
    check_primes(&ps, 2)?;
    let model_name = pick(args.noise_model, cfg.text("noise_model"), "gauss".into());
    let model = parse_noise_model(&model_name)?;

    let grid: Vec<(f64, u64)> = snr_grid
        .iter()
        .flat_map(|&snr_db| ps.iter().map(move |&p| (snr_db, p)))
        .collect();
    let rows: Vec<String> = grid
        .par_iter()
        .map(|&(snr_db, p)| {
            let snr = db_to_linear(snr_db);
            let point = computation_rate(&h, snr, p, model);
            let cof = cof_benchmark_rate(&h, snr);
            let a = point
                .equation
                .a
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(";");
            format!(
                "{:.6},{},{:.6},{:.6},{},{:.6}",
                snr_db, p, point.rate_bits, cof, a, point.equation.sigma2
            )
        })
        .collect();

    let mut comments = vec![
        ("command", "rates".to_string()),
        ("snr_db", join_f64(&snr_grid)),
        ("h", join_f64(&h)),
        ("p", join_u64(&ps)),
        ("noise_model", model_name),
        ("seed", seed.to_string()),
    ];
    if let Some(jobs) = jobs {
        comments.push(("jobs", jobs.to_string()));
    }
    let text = render_csv(
        &comments,
        "snr_db,p,rate_qcof,rate_cof,a,sigma_eps_sq",
        &rows,
    );
    write_output(args.common.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// wyner

/// Lifts `base` to roughly `blocklength` symbols, nudging the lift size until
/// the result keeps a back-substitution encoder (or is small enough for the
/// dense fallback).
fn build_sim_code(
    base: &BaseMatrix,
    p: u64,
    blocklength: usize,
    seed: u64,
) -> Result<LiftedCode, String> {
    let vars = base.vars();
    let z0 = (blocklength / vars).max(1);
    for z in z0..z0 + 12 {
        let Ok(code) = lift(base, p, z, seed) else {
            continue;
        };
        if code.has_fast_encoder() || code.n() * code.n_checks() <= 1 << 23 {
            return Ok(code);
        }
    }
    Err(format!(
        "no lift size near {z0} yields an encodable code over Z_{p}"
    ))
}

fn cmd_wyner(args: WynerArgs) -> Result<u8, String> {
    let cfg = FileConfig::load(args.common.config.as_deref())?;
    let seed = require_seed(args.common.seed, &cfg)?;
    let jobs = apply_jobs(args.common.jobs, &cfg)?;

    let gammas = parse_grid(&pick(args.gamma, cfg.text("gamma"), "0:1:0.1".into()))?;
    if gammas.iter().any(|&g| !(0.0..=1.0).contains(&g)) {
        return Err("inter-cell gains must lie in [0, 1]".into());
    }
    let snr_grid = parse_grid(&pick(args.snr_db, cfg.text("snr_db"), "15".into()))?;
    let ps: Vec<u64> = match pick(args.p, cfg.text("p"), String::new()).as_str() {
        "" => vec![7, 251],
        text => parse_list(text)?,
    };
    check_primes(&ps, 2)?;
    let r0 = pick(args.r0, cfg.value("r0")?, 2.0);
    if r0 < 0.0 {
        return Err("backhaul capacity r0 must be nonnegative".into());
    }
    let pa = pick(args.pa, cfg.text("pa"), "both".into());
    if !matches!(pa.as_str(), "on" | "off" | "both") {
        return Err(format!("--pa must be on, off, or both, got {pa}"));
    }
    let model_name = pick(args.noise_model, cfg.text("noise_model"), "gauss".into());
    let model = parse_noise_model(&model_name)?;
    let simulate = args.simulate || cfg.switch("simulate")?;
    let frames = pick(args.frames, cfg.value("frames")?, 100);
    let blocklength = pick(args.blocklength, cfg.value("blocklength")?, 16384);
    let users = pick(args.users, cfg.value("users")?, 6);
    let beta = pick(args.beta, cfg.value("beta")?, 1.0);
    if simulate {
        if frames == 0 {
            return Err("--frames must be at least 1".into());
        }
        if users < 3 {
            return Err("the simulated ring needs at least 3 cells".into());
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err("--beta must lie in [0, 1]".into());
        }
        check_primes(&ps, 3)?;
    }

    let base = ra_base(1, 2).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    for &p in &ps {
        let code = if simulate {
            let code = build_sim_code(&base, p, blocklength, seed)?;
            let rate_bits = code.k() as f64 / code.n() as f64 * (p as f64).log2();
            if rate_bits > r0 + 1e-9 {
                return Err(format!(
                    "code rate {rate_bits:.3} bits exceeds the backhaul capacity {r0}; \
                     raise --r0 or lower p"
                ));
            }
            Some(code)
        } else {
            None
        };
        for &snr_db in &snr_grid {
            let settings = code.as_ref().map(|code| SimSettings {
                code,
                users,
                beta,
                noise_model: model,
                max_frames: frames,
            });
            let mut points = sweep(&gammas, snr_db, p, r0, seed, settings.as_ref());
            if pa == "off" {
                for pt in &mut points {
                    pt.beta_star = 1.0;
                    pt.rate_qcof_pa = pt.rate_qcof;
                }
            }
            rows.extend(points.iter().map(|pt| pt.csv_row()));
        }
    }

    let mut comments = vec![
        ("command", "wyner".to_string()),
        ("gamma", join_f64(&gammas)),
        ("snr_db", join_f64(&snr_grid)),
        ("p", join_u64(&ps)),
        ("r0", format!("{r0:.6}")),
        ("pa", pa.clone()),
        ("noise_model", model_name),
        ("simulate", simulate.to_string()),
        ("seed", seed.to_string()),
    ];
    if simulate {
        comments.push(("frames", frames.to_string()));
        comments.push(("blocklength", blocklength.to_string()));
        comments.push(("users", users.to_string()));
        comments.push(("beta", format!("{beta:.6}")));
    }
    if let Some(jobs) = jobs {
        comments.push(("jobs", jobs.to_string()));
    }
    let text = render_csv(&comments, SWEEP_CSV_HEADER, &rows);
    write_output(args.common.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// ldpc

/// SNR (in dB) at which the reference three-user channel's best equation has
/// the given noise deviation in units of the coding lattice scale.
fn equivalent_snr_db(p: u64, sigma_norm: f64) -> f64 {
    let h = default_gains();
    let norm = |snr_db: f64| {
        let snr = db_to_linear(snr_db);
        let eq = best_equation(snr, &h);
        eq.sigma2.sqrt() / Modulation::new(p, snr).kappa()
    };
    let (mut lo, mut hi) = (-20.0, 80.0);
    if norm(lo) <= sigma_norm {
        return lo;
    }
    if norm(hi) >= sigma_norm {
        return hi;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if norm(mid) > sigma_norm {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Noise deviation whose equivalent channel leaves `margin_bits` of rate
/// headroom for a code of `rate_bits` bits per symbol over Z_p.
fn operating_sigma(p: u64, rate_bits: f64, margin_bits: f64) -> Result<f64, String> {
    let target = (p as f64).log2() - rate_bits - margin_bits;
    if target <= 0.0 {
        return Err(format!(
            "no room for a {margin_bits} bit margin below capacity at rate {rate_bits:.3}"
        ));
    }
    let family = unit_scheme_family(p);
    let entropy = |s: f64| entropy_bits(family(s).probs());
    let mut lo = 1e-4;
    let mut hi = 0.2;
    while entropy(hi) < target {
        hi *= 2.0;
        if hi > 1e4 {
            return Err("operating noise search failed to bracket the target".into());
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if entropy(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn mix_seed(seed: u64, frame: u64) -> u64 {
    // splitmix64 of the pair, so frames are independent and replayable.
    let mut x = seed ^ frame.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Frame error rate of a code on the discrete channel with the given noise
/// deviation; stops early once enough errors are seen.
fn code_fer(code: &LiftedCode, sigma: f64, seed: u64, max_frames: usize) -> (f64, usize) {
    let p = code.p();
    let field = code.field();
    let pmf = effective_noise_pmf(&Modulation::from_kappa(p, 1.0), sigma);
    let probs = pmf.probs().to_vec();
    let mut errors = 0usize;
    let mut frames = 0usize;
    while frames < max_frames && errors < FER_ERROR_STOP {
        let end = (frames + FER_CHUNK).min(max_frames);
        let batch: usize = (frames as u64..end as u64)
            .into_par_iter()
            .map(|f| {
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, f));
                let w: Vec<u64> = (0..code.k()).map(|_| rng.gen_range(0..p)).collect();
                let c = code.encode(&w);
                let r: Vec<u64> = c
                    .iter()
                    .map(|&ci| field.add(ci, pmf.sample(&mut rng)))
                    .collect();
                let wrong = match bp_decode(code, &r, &probs, MAX_BP_ITER) {
                    DecodeOutcome::Decoded { codeword, .. } => codeword != c,
                    DecodeOutcome::Failed { .. } => true,
                };
                usize::from(wrong)
            })
            .sum();
        errors += batch;
        frames = end;
    }
    (errors as f64 / frames as f64, frames)
}

fn family_base(family: &str, num: u32, den: u32) -> Result<BaseMatrix, String> {
    match family {
        "ra" => ra_base(num, den).map_err(|e| e.to_string()),
        "ira" => check_merge(&ira_base(), num, den).map_err(|e| e.to_string()),
        other => Err(format!("unknown code family {other}")),
    }
}

fn cmd_ldpc(args: LdpcArgs) -> Result<u8, String> {
    let cfg = FileConfig::load(args.common.config.as_deref())?;
    let seed = require_seed(args.common.seed, &cfg)?;
    let jobs = apply_jobs(args.common.jobs, &cfg)?;

    let base_name = pick(args.base, cfg.text("base"), "both".into());
    let families: Vec<&str> = match base_name.as_str() {
        "ra" => vec!["ra"],
        "ira" => vec!["ira"],
        "both" => vec!["ra", "ira"],
        other => return Err(format!("--base must be ra, ira, or both, got {other}")),
    };
    let rate_text = pick(args.rate, cfg.text("rate"), "1/2,2/3,4/5".into());
    let rates: Vec<(u32, u32)> = rate_text
        .split(',')
        .map(|s| parse_rate(s.trim()))
        .collect::<Result<_, _>>()?;
    let ps: Vec<u64> = match pick(args.p, cfg.text("p"), String::new()).as_str() {
        "" => vec![7],
        text => parse_list(text)?,
    };
    check_primes(&ps, 3)?;
    let blocklength = pick(args.blocklength, cfg.value("blocklength")?, 16384);
    let simulate = args.simulate || cfg.switch("simulate")?;
    let frames = pick(args.frames, cfg.value("frames")?, 100);
    if simulate && frames == 0 {
        return Err("--frames must be at least 1".into());
    }

    let mut rows = Vec::new();
    for &p in &ps {
        for family in &families {
            for &(num, den) in &rates {
                let base = family_base(family, num, den)?;
                let threshold = exit_threshold(&base, p, unit_scheme_family(p));
                let equiv = equivalent_snr_db(p, threshold);
                let (sigma_op, fer, sim_frames) = if simulate {
                    let rate_bits = num as f64 / den as f64 * (p as f64).log2();
                    let sigma = operating_sigma(p, rate_bits, 0.5)?;
                    let code = build_sim_code(&base, p, blocklength, seed)?;
                    let (fer, used) = code_fer(&code, sigma, seed, frames);
                    (
                        format!("{sigma:.6}"),
                        format!("{fer:.6}"),
                        used.to_string(),
                    )
                } else {
                    (String::new(), String::new(), String::new())
                };
                rows.push(format!(
                    "{family},{num}/{den},{p},{threshold:.6},{equiv:.6},{sigma_op},{fer},{sim_frames}"
                ));
            }
        }
    }

    let mut comments = vec![
        ("command", "ldpc".to_string()),
        ("base", base_name),
        ("rate", rate_text),
        ("p", join_u64(&ps)),
        ("blocklength", blocklength.to_string()),
        ("simulate", simulate.to_string()),
        ("seed", seed.to_string()),
    ];
    if simulate {
        comments.push(("frames", frames.to_string()));
    }
    if let Some(jobs) = jobs {
        comments.push(("jobs", jobs.to_string()));
    }
    let text = render_csv(
        &comments,
        "family,rate,p,threshold_sigma,equiv_snr_db,sigma_op,fer,frames",
        &rows,
    );
    write_output(args.common.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// selftest

fn cmd_selftest(args: SelftestArgs) -> Result<u8, String> {
    let cfg = FileConfig::load(args.common.config.as_deref())?;
    let _ = apply_jobs(args.common.jobs, &cfg)?;
    let fault = args.fault.or(cfg.text("fault"));
    let faults = match fault.as_deref() {
        None => Faults::default(),
        Some("modulation-map") => Faults {
            corrupt_modulation_map: true,
        },
        Some(other) => return Err(format!("unknown fault {other}")),
    };
    let results = run_selftest(faults);
    let report = format_report(&results);
    write_output(args.common.out.as_deref(), &report)?;
    if results.iter().all(|r| r.passed) {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_SELFTEST)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> u8 {
        let argv: Vec<String> = std::iter::once("qcof".to_string())
            .chain(args.iter().map(|s| s.to_string()))
            .collect();
        run_with_args(&argv)
    }

    #[test]
    fn grids_expand_inclusively() {
        assert_eq!(parse_grid("15").unwrap(), vec![15.0]);
        assert_eq!(parse_grid("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("10:20:5").unwrap(), vec![10.0, 15.0, 20.0]);
        // A step that does not divide the span still stops at the end.
        assert_eq!(parse_grid("0:1:0.4").unwrap(), vec![0.0, 0.4, 0.8]);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn rates_and_fractions_parse() {
        assert_eq!(parse_rate("2/3").unwrap(), (2, 3));
        assert!(parse_rate("3/2").is_err());
        assert!(parse_rate("0/3").is_err());
        assert!(parse_rate("12").is_err());
        assert_eq!(parse_list::<u64>("3, 7,251").unwrap(), vec![3, 7, 251]);
    }

    #[test]
    fn missing_seed_is_a_usage_error() {
        assert_eq!(run(&["rates", "--snr-db", "10", "--p", "7"]), 1);
    }

    #[test]
    fn help_and_bad_flags_use_the_documented_codes() {
        assert_eq!(run(&["--help"]), 0);
        assert_eq!(run(&["rates", "--no-such-flag"]), 1);
        assert_eq!(run(&["rates", "--seed", "1", "--p", "6"]), 1);
    }

    #[test]
    fn rates_csv_is_deterministic_and_complete() {
        let dir = tempfile::tempdir().unwrap();
        let out1 = dir.path().join("a.csv");
        let out2 = dir.path().join("b.csv");
        for out in [&out1, &out2] {
            let code = run(&[
                "rates",
                "--seed",
                "42",
                "--snr-db",
                "10:20:5",
                "--p",
                "7,17",
                "--out",
                out.to_str().unwrap(),
            ]);
            assert_eq!(code, 0);
        }
        let a = std::fs::read(&out1).unwrap();
        let b = std::fs::read(&out2).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("# command = rates\n"));
        assert!(text.contains("# seed = 42\n"));
        let data: Vec<&str> = text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .collect();
        assert_eq!(data[0], "snr_db,p,rate_qcof,rate_cof,a,sigma_eps_sq");
        // Three SNR points times two field sizes.
        assert_eq!(data.len(), 1 + 6);
        for row in &data[1..] {
            assert_eq!(row.split(',').count(), 6);
        }
    }

    #[test]
    fn config_file_fills_gaps_and_flags_override() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(
            &cfg,
            "# sweep setup\nseed = 5\nsnr-db = 10\np = 3,7 # two fields\n",
        )
        .unwrap();
        let out1 = dir.path().join("from_config.csv");
        let code = run(&[
            "rates",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out1.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&out1).unwrap();
        assert!(text.contains("# seed = 5\n"));
        assert!(text.contains("# p = 3,7\n"));

        // A flag beats the same key in the file.
        let out2 = dir.path().join("override.csv");
        let code = run(&[
            "rates",
            "--config",
            cfg.to_str().unwrap(),
            "--p",
            "17",
            "--out",
            out2.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&out2).unwrap();
        assert!(text.contains("# p = 17\n"));
    }

    #[test]
    fn wyner_rows_follow_the_pa_switch() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("wyner.csv");
        let code = run(&[
            "wyner",
            "--seed",
            "3",
            "--gamma",
            "0:0.4:0.2",
            "--p",
            "7",
            "--pa",
            "off",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&out).unwrap();
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0], SWEEP_CSV_HEADER);
        assert_eq!(data.len(), 1 + 3);
        for row in &data[1..] {
            let fields: Vec<&str> = row.split(',').collect();
            // With power allocation off, beta is pinned to 1 and the two
            // rate columns agree.
            assert_eq!(fields[4], "1.000000");
            assert_eq!(fields[5], fields[6]);
            // No simulation ran, so the fer field is empty.
            assert_eq!(fields[8], "");
        }
    }

    #[test]
    fn selftest_reports_and_exits_by_outcome() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("report.txt");
        assert_eq!(run(&["selftest", "--out", out.to_str().unwrap()]), 0);
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().count(), 8);
        assert!(text.lines().all(|l| l.starts_with("[PASS]")));

        assert_eq!(
            run(&[
                "selftest",
                "--fault",
                "modulation-map",
                "--out",
                out.to_str().unwrap()
            ]),
            2
        );
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.contains("[FAIL] combination-lemma"));
    }

    #[test]
    fn operating_sigma_leaves_the_stated_margin() {
        let p = 7u64;
        let rate_bits = 0.5 * (p as f64).log2();
        let sigma = operating_sigma(p, rate_bits, 0.5).unwrap();
        let family = unit_scheme_family(p);
        let h = entropy_bits(family(sigma).probs());
        let margin = (p as f64).log2() - h - rate_bits;
        assert!((margin - 0.5).abs() < 1e-6, "margin {margin}");
    }

    #[test]
    fn equivalent_snr_recovers_a_known_deviation() {
        // Forward map: normalized deviation at 20 dB; the inverse search
        // must land on an SNR whose deviation matches.
        let p = 7u64;
        let h = default_gains();
        let snr = db_to_linear(20.0);
        let eq = best_equation(snr, &h);
        let sigma = eq.sigma2.sqrt() / Modulation::new(p, snr).kappa();
        let back = equivalent_snr_db(p, sigma);
        let snr2 = db_to_linear(back);
        let eq2 = best_equation(snr2, &h);
        let sigma2 = eq2.sigma2.sqrt() / Modulation::new(p, snr2).kappa();
        assert!((sigma2 - sigma).abs() < 1e-6, "{sigma} vs {sigma2}");
    }
}
