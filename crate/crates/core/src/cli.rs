//! The `dbar` command line.
//!
//! Exit codes: 0 when every check passes, 1 on a condition or acceptance
//! failure, 2 on usage and parse errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::coupling::{CertifiedPair, Condition3, CoupledPair};
use crate::error::{Error, Result};
use crate::estimator::{estimate_dbar, geometric_weights, mk_cost, regen_statistics, sample_paths, MetricRow};
use crate::kernel::{check_order, continuity_rate, OrderVerdict};
use crate::regeneration::perfect_sample;
use crate::rng::TimeKeyedRandomness;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dbar", version, about = "Minimal d-bar coupling of ordered binary chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Verify ordering, continuity and the product condition.
    Check(Common),
    /// Write the cut points alpha_k and weights lambda_k.
    Decompose(Common),
    /// Perfectly sample one window of the coupled chain.
    Sample(Common),
    /// Estimate the mismatch rate against the closed-form distance.
    Estimate(Common),
    /// Regeneration rate, failed-trial geometry and memory-length law.
    RegenStats(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Window as M:N.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    window: Option<(i64, i64)>,
    #[arg(long)]
    kmax: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_window(s: &str) -> std::result::Result<(i64, i64), String> {
    let (m, n) = s.split_once(':').ok_or_else(|| format!("expected M:N, got {s:?}"))?;
    let m = m.trim().parse().map_err(|e| format!("bad window start {m:?}: {e}"))?;
    let n = n.trim().parse().map_err(|e| format!("bad window end {n:?}: {e}"))?;
    Ok((m, n))
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(r) = self.replicas {
            cfg.replicas = r;
        }
        if let Some(w) = self.window {
            cfg.window = w;
        }
        if let Some(k) = self.kmax {
            cfg.kmax = k;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Check(c) => c.load().and_then(|cfg| cmd_check(&cfg, out)),
        Command::Decompose(c) => c.load().and_then(|cfg| cmd_decompose(&cfg, out)),
        Command::Sample(c) => c.load().and_then(|cfg| cmd_sample(&cfg, out)),
        Command::Estimate(c) => c.load().and_then(|cfg| cmd_estimate(&cfg, out)),
        Command::RegenStats(c) => c.load().and_then(|cfg| cmd_regen_stats(&cfg, out)),
    };
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Config(_) | Error::InvalidProbability { .. } | Error::InvalidSpec(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn certified(cfg: &RunConfig) -> Result<CertifiedPair> {
    let (x, y) = cfg.specs()?;
    CoupledPair::new(x, y)?.certify(cfg.kmax, cfg.tolerance.condition3)
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_file(path: &Path, text: &str, out: &mut dyn Write) -> Result<()> {
    fs::write(path, text)?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}

/// `%.17g`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa), exp.abs())
    } else {
        strip_zeros(&format!("{x:.*}", (16 - exp) as usize)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn metric_csv(header: &str, rows: &[MetricRow]) -> String {
    let mut s = format!("{header}\nname,value,ci,theoretical,pass\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.name,
            fmt_g17(r.value),
            fmt_g17(r.ci),
            fmt_g17(r.theoretical),
            r.pass
        ));
    }
    s
}

fn cmd_check(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    let (x, y) = cfg.specs()?;
    let ordered = match check_order(&x, &y) {
        OrderVerdict::Ordered => {
            writeln!(out, "condition 1: satisfied (ordered)")?;
            true
        }
        OrderVerdict::Violated(w) => {
            writeln!(out, "condition 1: violated ({w})")?;
            false
        }
        OrderVerdict::Inconclusive(why) => {
            writeln!(out, "condition 1: inconclusive ({why})")?;
            false
        }
    };
    // every representable spec has beta(k) -> 0
    let beta = continuity_rate(&x, cfg.kmax).max(continuity_rate(&y, cfg.kmax));
    writeln!(out, "condition 2: satisfied (beta({}) <= {})", cfg.kmax, fmt_g17(beta))?;
    let product = if !ordered {
        writeln!(out, "condition 3: not checked")?;
        false
    } else {
        match CoupledPair::new(x, y) {
            Ok(pair) => match pair.check_condition3(cfg.kmax, cfg.tolerance.condition3) {
                Condition3::Satisfied { lower_bound, partial_product } => {
                    writeln!(
                        out,
                        "condition 3: satisfied (prod alpha_k >= {}, partial product to k = {}: {})",
                        fmt_g17(lower_bound),
                        cfg.kmax,
                        fmt_g17(partial_product)
                    )?;
                    true
                }
                Condition3::Failed(why) => {
                    writeln!(out, "condition 3: failed ({why})")?;
                    false
                }
                Condition3::Inconclusive(why) => {
                    writeln!(out, "condition 3: inconclusive ({why})")?;
                    false
                }
            },
            Err(e) => {
                writeln!(out, "condition 3: not checked ({e})")?;
                false
            }
        }
    };
    Ok(ordered && product)
}

fn cmd_decompose(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    let pair = certified(cfg)?;
    let mut csv = String::from("k,alpha_k,lambda_k,cumulative_mass\n");
    let mut complete = false;
    for k in 0..=cfg.kmax {
        let alpha = pair.alpha_global(k)?;
        let lambda = pair.lambda(k)?;
        csv.push_str(&format!("{k},{},{},{}\n", fmt_g17(alpha), fmt_g17(lambda), fmt_g17(alpha)));
        if alpha >= 1.0 - 1e-9 {
            complete = true;
            break;
        }
    }
    if !complete {
        let alpha = pair.alpha_global(cfg.kmax)?;
        csv.push_str(&format!("# truncated at k = {}, cumulative mass {}\n", cfg.kmax, fmt_g17(alpha)));
    }
    write_file(&out_dir(cfg)?.join("decompose.csv"), &csv, out)?;
    Ok(true)
}

fn cmd_sample(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    let pair = certified(cfg)?;
    let (m, n) = cfg.window;
    let path = perfect_sample(&pair, &TimeKeyedRandomness::new(cfg.seed), cfg.replica, m, n)?;
    let t0 = path.backtrack_time();
    let mut csv = format!("# seed={},replica={},window={m}:{n},T={t0}\nt,x_t,y_t,L_t,regen_flag\n", cfg.seed, cfg.replica);
    for t in m..=n {
        let i = (t - t0) as usize;
        let ab = path.symbols()[i];
        csv.push_str(&format!(
            "{t},{},{},{},{}\n",
            ab.x(),
            ab.y(),
            path.memory_lengths()[i],
            path.regen_flags()[i] as u8
        ));
    }
    write_file(&out_dir(cfg)?.join("sample.csv"), &csv, out)?;
    writeln!(out, "T[{m},{n}] = {t0}")?;
    Ok(true)
}

fn cmd_estimate(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    let pair = certified(cfg)?;
    let len = cfg.window_length();
    let report = estimate_dbar(&pair, cfg.replicas, len, cfg.seed)?;
    let mut rows = report.rows();
    let mk = mk_cost(&geometric_weights(len, len / 2, 0.5), &report)?;
    rows.push(MetricRow {
        name: "mk_cost".into(),
        value: mk.value,
        ci: 1.96 * mk.diff_std_error,
        theoretical: mk.empirical_mismatch,
        pass: mk.agrees(),
    });
    let pass = rows.iter().all(|r| r.pass);
    let header = format!("# seed={},replicas={},window_length={len}", cfg.seed, cfg.replicas);
    write_file(&out_dir(cfg)?.join("estimate.csv"), &metric_csv(&header, &rows), out)?;
    writeln!(out, "{}", if pass { "PASS" } else { "FAIL" })?;
    Ok(pass)
}

fn cmd_regen_stats(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    let pair = certified(cfg)?;
    let (m, n) = cfg.window;
    let paths = sample_paths(&pair, cfg.replicas, m, n, cfg.seed)?;
    let report = regen_statistics(&pair, &paths, cfg.truncation)?;
    let rows = report.rows();
    let pass = rows.iter().all(|r| r.pass);
    let header = format!("# seed={},replicas={},window={m}:{n},truncation={}", cfg.seed, cfg.replicas, cfg.truncation);
    write_file(&out_dir(cfg)?.join("regen_stats.csv"), &metric_csv(&header, &rows), out)?;
    writeln!(out, "{}", if pass { "PASS" } else { "FAIL" })?;
    Ok(pass)
}
