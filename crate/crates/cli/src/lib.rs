//! Command-line front end: sweeps, figure data, verification and optimisation.
//!
//! Exit codes: 0 success, 1 usage or runtime error, 2 verification failure.

pub mod format;
pub mod options;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Parser;
use conjchan::optimize::{threshold_curve, THRESHOLD_VARIANTS};
use conjchan::verify::{run_suite, VerifyOptions};
use conjchan::{
    evaluate, formula_mi, high_gain_limit, maximize_variance, optimal_variance, LogBase, SchemeId,
};
use rayon::prelude::*;
use rayon::ThreadPool;

use format::fmt_g;
use options::{Cli, Command, Figure, Flags};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

/// Gain at which the large-gain threshold constants are read off.
pub const FIT_GAIN: f64 = 1e3;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    let flags = cli.flags.resolve()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(flags.threads.unwrap_or(0))
        .build()
        .context("building thread pool")?;
    let pool = &pool;
    match cli.command {
        Command::Sweep => sweep(&flags, pool, stdout).map(|_| EXIT_OK),
        Command::Figure { name } => figure(name, &flags, pool, stdout).map(|_| EXIT_OK),
        Command::Verify => verify(&flags, pool, stdout),
        Command::Optimize => optimize(&flags, pool, stdout).map(|_| EXIT_OK),
    }
}

fn mi_label(base: LogBase) -> &'static str {
    match base {
        LogBase::Bits => "bits",
        LogBase::Nats => "nats",
    }
}

fn csv_writer<W: Write>(sink: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink)
}

/// Writes rows to `path`, or to `stdout` when no path is given.
fn emit(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    header: &[String],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    match path {
        Some(p) => fs::write(p, &buf).with_context(|| format!("writing {}", p.display())),
        None => stdout.write_all(&buf).context("writing output"),
    }
}

/// `(scheme, n, g)` triples sorted by scheme id, then `n`, then `g`.
fn grid_points(schemes: &[SchemeId], budgets: &[f64], gains: &[f64]) -> Vec<(SchemeId, f64, f64)> {
    let mut points = Vec::with_capacity(schemes.len() * budgets.len() * gains.len());
    for &id in schemes {
        for &n in budgets {
            for &g in gains {
                points.push((id, n, g));
            }
        }
    }
    points.sort_by(|a, b| {
        a.0.as_str()
            .cmp(b.0.as_str())
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
    });
    points.dedup();
    points
}

fn sweep(flags: &Flags, pool: &ThreadPool, stdout: &mut dyn Write) -> Result<()> {
    let base = flags.log_base();
    let schemes = flags.scheme_ids(&SchemeId::ALL)?;
    let budgets = flags.budget_grid(0.0, 10.0, 21)?;
    let gains = flags.gain_grid(&[1.0])?;

    let points = grid_points(&schemes, &budgets, &gains);

    let rows = pool.install(|| {
        points
            .par_iter()
            .map(|&(id, n, g)| -> Result<Vec<String>> {
                let engine = evaluate(id, n, g, None, base)?;
                let formula = formula_mi(id, n, g, base)?;
                Ok(vec![
                    id.to_string(),
                    fmt_g(n),
                    fmt_g(g),
                    fmt_g(engine),
                    fmt_g(formula),
                    fmt_g((engine - formula).abs()),
                ])
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let unit = mi_label(base);
    let header = [
        "scheme",
        "n",
        "g",
        &format!("mi_{unit}"),
        &format!("mi_formula_{unit}"),
        "abs_diff",
    ]
    .map(String::from);
    emit(flags.out.as_deref(), stdout, &header, &rows)
}

fn figure(name: Figure, flags: &Flags, pool: &ThreadPool, stdout: &mut dyn Write) -> Result<()> {
    let dir = flags.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let base = flags.log_base();
    let written = match name {
        Figure::Fig2 => {
            let columns = [
                SchemeId::Coh2dDouble,
                SchemeId::EprDisplaced,
                SchemeId::ConjCoherent,
                SchemeId::EprConjugate,
            ];
            let budgets = flags.budget_grid(0.0, 10.0, 101)?;
            let rows = pool.install(|| {
                budgets
                    .par_iter()
                    .map(|&n| -> Result<Vec<String>> {
                        let mut row = vec![fmt_g(n)];
                        for id in columns {
                            row.push(fmt_g(formula_mi(id, n, 1.0, base)?));
                        }
                        Ok(row)
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            let mut header = vec!["n".to_string()];
            header.extend(columns.iter().map(|id| id.to_string()));
            let path = dir.join("fig2.csv");
            emit(Some(&path), stdout, &header, &rows)?;
            vec![path]
        }
        Figure::Fig3 => {
            let budgets = flags.budget_grid(0.0, 10.0, 101)?;
            let rows = pool.install(|| {
                budgets
                    .par_iter()
                    .map(|&n| -> Result<Vec<String>> {
                        Ok(vec![
                            fmt_g(n),
                            fmt_g(formula_mi(SchemeId::Coh1dDouble, n, 1.0, base)?),
                            fmt_g(high_gain_limit(SchemeId::Coh1dDouble, n, base)?),
                            fmt_g(formula_mi(SchemeId::Sq1dDouble, n, 1.0, base)?),
                            fmt_g(high_gain_limit(SchemeId::Sq1dDouble, n, base)?),
                            fmt_g(formula_mi(SchemeId::Coh2dDouble, n, 1.0, base)?),
                            fmt_g(formula_mi(SchemeId::EprConjugate, n, 1.0, base)?),
                        ])
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            let header = [
                "n",
                "1d_coh_2_g1",
                "1d_coh_2_ginf",
                "1d_sq_2_g1",
                "1d_sq_2_ginf",
                "2d_coh_2",
                "epr_conj_2",
            ]
            .map(String::from);
            let path = dir.join("fig3.csv");
            emit(Some(&path), stdout, &header, &rows)?;
            vec![path]
        }
        Figure::FigA1 => {
            let default: Vec<f64> = (1..=100).map(f64::from).collect();
            let gains = flags.gain_grid(&default)?;
            let curves = pool.install(|| {
                THRESHOLD_VARIANTS
                    .par_iter()
                    .map(|&v| threshold_curve(v, &gains))
                    .collect::<conjchan::Result<Vec<_>>>()
            })?;
            let rows: Vec<Vec<String>> = gains
                .iter()
                .enumerate()
                .map(|(i, &g)| {
                    let mut row = vec![fmt_g(g)];
                    row.extend(
                        curves
                            .iter()
                            .map(|c| c.points[i].1.map(fmt_g).unwrap_or_default()),
                    );
                    row
                })
                .collect();
            let mut header = vec!["g".to_string()];
            header.extend(THRESHOLD_VARIANTS.iter().map(|id| id.to_string()));
            let path = dir.join("figA1.csv");
            emit(Some(&path), stdout, &header, &rows)?;

            let fit = THRESHOLD_VARIANTS
                .iter()
                .map(|&v| -> Result<Vec<String>> {
                    let c = threshold_curve(v, &[FIT_GAIN])?;
                    let n = c.points[0].1;
                    Ok(vec![
                        v.to_string(),
                        fmt_g(FIT_GAIN),
                        n.map(fmt_g).unwrap_or_default(),
                        c.asymptotic_constant.map(fmt_g).unwrap_or_default(),
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            let fit_path = dir.join("figA1_fit.csv");
            let header = ["variant", "g", "n_star", "constant"].map(String::from);
            emit(Some(&fit_path), stdout, &header, &fit)?;
            vec![path, fit_path]
        }
    };
    for p in written {
        writeln!(stdout, "wrote {}", p.display())?;
    }
    Ok(())
}

fn verify(flags: &Flags, pool: &ThreadPool, stdout: &mut dyn Write) -> Result<i32> {
    let defaults = VerifyOptions::default();
    let tolerance = flags.tolerance.unwrap_or(defaults.tolerance);
    if !(tolerance >= 0.0) {
        bail!("tolerance must be non-negative, got {tolerance}");
    }
    let opts = VerifyOptions {
        tolerance,
        samples: flags.samples.unwrap_or(defaults.samples),
        seed: flags.seed.unwrap_or(defaults.seed),
        commutator: if flags.corrupt_convention {
            2.0 * defaults.commutator
        } else {
            defaults.commutator
        },
        ..defaults
    };
    let results = pool.install(|| run_suite(&opts));
    for r in &results {
        writeln!(stdout, "{r}")?;
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    writeln!(
        stdout,
        "{} of {} checks passed",
        results.len() - failed,
        results.len()
    )?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_VERIFY })
}

fn optimize(flags: &Flags, pool: &ThreadPool, stdout: &mut dyn Write) -> Result<()> {
    let base = flags.log_base();
    let default: Vec<SchemeId> = SchemeId::ALL
        .into_iter()
        .filter(|id| id.free_variance().is_some())
        .collect();
    let schemes = flags.scheme_ids(&default)?;
    if let Some(id) = schemes.iter().find(|id| id.free_variance().is_none()) {
        bail!("scheme {id} has no free variance to optimise");
    }
    let budgets = flags.budget_grid(0.5, 5.0, 10)?;
    let gains = flags.gain_grid(&[1.0])?;
    if budgets.contains(&0.0) {
        bail!("optimisation needs a positive photon budget");
    }
    let points = grid_points(&schemes, &budgets, &gains);
    let rows = pool.install(|| {
        points
            .par_iter()
            .map(|&(id, n, g)| -> Result<Vec<String>> {
                let r = maximize_variance(id, n, g, conjchan::optimize::DEFAULT_LOG_TOL)?;
                let mi = match base {
                    LogBase::Bits => r.max_mi,
                    LogBase::Nats => r.max_mi * std::f64::consts::LN_2,
                };
                Ok(vec![
                    id.to_string(),
                    fmt_g(n),
                    fmt_g(g),
                    fmt_g(r.argmax),
                    fmt_g(optimal_variance(id, n, g)?),
                    fmt_g(mi),
                    r.iterations.to_string(),
                ])
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let header = [
        "scheme",
        "n",
        "g",
        "v_opt",
        "v_closed_form",
        &format!("mi_{}", mi_label(base)),
        "iterations",
    ]
    .map(String::from);
    emit(flags.out.as_deref(), stdout, &header, &rows)
}

/// Entry point for the binary.
pub fn main_with_env() -> i32 {
    let out = io::stdout();
    let err = io::stderr();
    run(std::env::args_os(), &mut out.lock(), &mut err.lock())
}
