//! `netequiv` command line: bounds for a network file, the three worked
//! scenarios, decoupling and validation. Results are CSV with a `#` header.
//!
//! Exit codes: 0 ok, 2 input error, 3 internal or numerical error (also a
//! failed closed-form check in `repro layered`).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod grid;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use grid::Grid;
use netequiv::assemble::SearchOptions;
use netequiv::decouple::decompose;
use netequiv::experiments::{self, c12_note, evaluate_bounds, layered_rows, multicast_row, relay_row, relay_search};
use netequiv::netmodel::{parse_network, NoisyNetwork};
use netequiv::Error;

#[derive(Parser)]
#[command(
    name = "netequiv",
    version,
    about = "Capacity bounds for noisy networks via noiseless bounding networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inner and outer bounds for every demand of a network file.
    Bounds {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Write the CSV here; the text report then goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate one of the worked scenarios.
    Repro {
        #[command(subcommand)]
        which: Repro,
    },
    /// Print the decoupled components of a network file.
    Decouple { file: PathBuf },
    /// Parse and check a network file.
    Validate { file: PathBuf },
}

#[derive(Subcommand)]
enum Repro {
    /// Gaussian relay channel, swept over the source-relay SNR.
    Relay {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        gamma_sd_db: f64,
        #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
        gamma_rd_db: f64,
        #[arg(long, default_value = "-10:30:1", allow_hyphen_values = true)]
        gamma_sr_db: Grid,
        #[arg(long, default_value = "0:1:0.1")]
        alpha_grid: Grid,
        /// Power-split resolution of the relay broadcast.
        #[arg(long, default_value_t = 1.0 / 256.0)]
        beta_step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Layered multiple-unicast network with n source/destination pairs.
    Layered {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        gamma_db: Grid,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-source multiple multicast with a q-ary side link.
    Multicast {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value = "-5:25:1", allow_hyphen_values = true)]
        p_db: Grid,
        /// Ladder spread relative to P, in dB.
        #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
        delta_ratio_db: f64,
        #[arg(long, default_value_t = 8)]
        q: u32,
        #[arg(long, default_value_t = 0.1)]
        xi: f64,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SearchArgs {
    /// MAC noise-split values for the outer bounds.
    #[arg(long, default_value = "0:1:0.1")]
    alpha_grid: Grid,
    /// Power-split resolution for broadcast layers.
    #[arg(long, default_value_t = 0.125)]
    beta_step: f64,
}

/// A failure tagged with the stage it happened in.
struct Failure {
    code: u8,
    stage: &'static str,
    message: String,
}

impl Failure {
    fn input(stage: &'static str, message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            stage,
            message: message.into(),
        }
    }

    fn internal(stage: &'static str, message: impl Into<String>) -> Failure {
        Failure {
            code: 3,
            stage,
            message: message.into(),
        }
    }

    fn from_core(stage: &'static str, e: Error) -> Failure {
        let code = if e.is_input_error() { 2 } else { 3 };
        Failure {
            code,
            stage,
            message: e.to_string(),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn search_options(alpha: Grid, beta_step: f64, base: SearchOptions) -> Outcome<SearchOptions> {
    alpha.check_within("alpha", 0.0, 1.0).map_err(|m| Failure::input("arguments", m))?;
    if !(beta_step > 0.0 && beta_step <= 1.0) {
        return Err(Failure::input("arguments", format!("beta step {beta_step} must lie in (0, 1]")));
    }
    let units = (1.0 / beta_step).round();
    if (units * beta_step - 1.0).abs() > 1e-9 {
        return Err(Failure::input("arguments", format!("beta step {beta_step} must divide 1")));
    }
    Ok(SearchOptions {
        alpha_grid: alpha.points(),
        beta_step,
        ..base
    })
}

fn read_network(path: &Path) -> Outcome<NoisyNetwork> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input("read", format!("{}: {e}", path.display())))?;
    parse_network(&text).map_err(|e| Failure::from_core("parse", e))
}

fn invocation() -> String {
    let mut parts = vec!["netequiv".to_string()];
    parts.extend(std::env::args().skip(1));
    parts.join(" ")
}

/// `#` header block followed by the serialized rows.
fn render_csv<R: Serialize>(notes: &[String], rows: &[R]) -> Outcome<String> {
    let mut out = format!("# netequiv {}\n# invocation: {}\n", env!("CARGO_PKG_VERSION"), invocation());
    for n in notes {
        let _ = writeln!(out, "# {n}");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Failure::internal("write", e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::internal("write", e.to_string()))?;
    out.push_str(&String::from_utf8_lossy(&bytes));
    Ok(out)
}

fn emit(text: &str, out: Option<&Path>) -> Outcome<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::internal("write", format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct BoundsRow<'a> {
    file: &'a str,
    alpha_grid: String,
    beta_step: f64,
    metric: &'a str,
    inner: f64,
    outer: f64,
    gap: f64,
    inner_params: &'a str,
    outer_params: &'a str,
}

fn cmd_bounds(file: &Path, search: &SearchArgs, out: Option<&Path>) -> Outcome<()> {
    let net = read_network(file)?;
    let opts = search_options(search.alpha_grid, search.beta_step, SearchOptions::default())?;
    let outcome = evaluate_bounds(&net, &opts).map_err(|e| Failure::from_core("bounds", e))?;
    let r = &outcome.report;
    let gaps = r.gaps();
    let file_name = file.display().to_string();
    let rows: Vec<BoundsRow> = (0..r.labels.len())
        .map(|k| BoundsRow {
            file: &file_name,
            alpha_grid: search.alpha_grid.to_string(),
            beta_step: search.beta_step,
            metric: &r.labels[k],
            inner: r.inner[k],
            outer: r.outer[k],
            gap: gaps[k],
            inner_params: &r.inner_params[k],
            outer_params: &r.outer_params[k],
        })
        .collect();
    emit(&render_csv(&[], &rows)?, out)?;

    let mut report = format!(
        "network {}: {} nodes, {} links, {} demands\n",
        file_name,
        net.nodes.len(),
        net.links.len(),
        net.demands.len()
    );
    for c in &outcome.components {
        let _ = writeln!(report, "  component {}", c.label());
    }
    let _ = writeln!(report, "upper grid points: {}", outcome.upper_points);
    for k in 0..r.labels.len() {
        let _ = writeln!(
            report,
            "{}: inner {:.6} outer {:.6} gap {:.6}\n  inner at {}\n  outer at {}",
            r.labels[k], r.inner[k], r.outer[k], gaps[k], r.inner_params[k], r.outer_params[k]
        );
    }
    if out.is_some() {
        print!("{report}");
    } else {
        eprint!("{report}");
    }
    Ok(())
}

fn cmd_relay(sd: f64, rd: f64, sr: Grid, alpha: Grid, beta_step: f64, out: Option<&Path>) -> Outcome<()> {
    let opts = search_options(alpha, beta_step, relay_search())?;
    let rows = sr
        .points()
        .par_iter()
        .map(|&db| relay_row(sd, rd, db, &opts))
        .collect::<netequiv::Result<Vec<_>>>()
        .map_err(|e| Failure::from_core("relay sweep", e))?;
    emit(&render_csv(&[], &rows)?, out)
}

fn cmd_layered(n: usize, gamma_db: Grid, search: &SearchArgs, out: Option<&Path>) -> Outcome<()> {
    if n < 2 {
        return Err(Failure::input("arguments", format!("n must be at least 2, got {n}")));
    }
    let opts = search_options(search.alpha_grid, search.beta_step, SearchOptions::default())?;
    let blocks = gamma_db
        .points()
        .par_iter()
        .map(|&g| layered_rows(n, g, &opts))
        .collect::<netequiv::Result<Vec<_>>>()
        .map_err(|e| Failure::from_core("layered sweep", e))?;
    let rows: Vec<_> = blocks.into_iter().flatten().collect();
    let note = format!("closed-form check tolerance {}", experiments::LAYERED_TOL);
    emit(&render_csv(&[note], &rows)?, out)?;
    let bad = rows.iter().filter(|r| r.check != "ok").count();
    if bad > 0 {
        return Err(Failure::internal(
            "closed-form check",
            format!("{bad} of {} rows differ from the closed forms", rows.len()),
        ));
    }
    Ok(())
}

fn cmd_multicast(n: usize, p_db: Grid, ratio_db: f64, q: u32, xi: f64, search: &SearchArgs, out: Option<&Path>) -> Outcome<()> {
    let opts = search_options(search.alpha_grid, search.beta_step, SearchOptions::default())?;
    let note = c12_note(q, xi).map_err(|e| Failure::from_core("arguments", e))?;
    let rows = p_db
        .points()
        .par_iter()
        .map(|&p| multicast_row(n, p, ratio_db, q, xi, &opts))
        .collect::<netequiv::Result<Vec<_>>>()
        .map_err(|e| Failure::from_core("multicast sweep", e))?;
    emit(&render_csv(&[note], &rows)?, out)
}

fn cmd_decouple(file: &Path) -> Outcome<()> {
    let net = read_network(file)?;
    let comps = decompose(&net).map_err(|e| Failure::from_core("decouple", e))?;
    for (k, c) in comps.iter().enumerate() {
        let mut parts = Vec::new();
        for &l in &c.links {
            let link = &net.links[l];
            let detail = match c.effective_snrs.get(&l) {
                Some(g) => format!("snr {g:.6}"),
                None => {
                    let cap = link.channel.capacity().map_err(|e| Failure::from_core("decouple", e))?;
                    format!("{} capacity {:.6}", link.channel.kind_name(), cap.bits())
                }
            };
            parts.push(format!("{}->{} {detail}", link.from, link.to));
        }
        println!("{k}: {}: {}", c.label(), parts.join(", "));
    }
    Ok(())
}

fn cmd_validate(file: &Path) -> Outcome<()> {
    let net = read_network(file)?;
    println!(
        "ok: {} nodes, {} links, {} demands",
        net.nodes.len(),
        net.links.len(),
        net.demands.len()
    );
    Ok(())
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Bounds { file, search, out } => cmd_bounds(&file, &search, out.as_deref()),
        Command::Decouple { file } => cmd_decouple(&file),
        Command::Validate { file } => cmd_validate(&file),
        Command::Repro { which } => match which {
            Repro::Relay {
                gamma_sd_db,
                gamma_rd_db,
                gamma_sr_db,
                alpha_grid,
                beta_step,
                out,
            } => cmd_relay(gamma_sd_db, gamma_rd_db, gamma_sr_db, alpha_grid, beta_step, out.as_deref()),
            Repro::Layered { n, gamma_db, search, out } => cmd_layered(n, gamma_db, &search, out.as_deref()),
            Repro::Multicast {
                n,
                p_db,
                delta_ratio_db,
                q,
                xi,
                search,
                out,
            } => cmd_multicast(n, p_db, delta_ratio_db, q, xi, &search, out.as_deref()),
        },
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error in {}: {}", f.stage, f.message);
            ExitCode::from(f.code)
        }
    }
}
