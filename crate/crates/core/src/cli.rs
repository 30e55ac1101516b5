//! Command-line front end: profile/index/inner-product/self-similar solves
//! with CSV or JSON output, plot emission, and the aggregate verification
//! pipeline.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Result;
use crate::export::{export_csv, export_json, export_plot, format_full, PlotStyle, Series};
use crate::index::{compute_index_function, report as index_report, OperatorKind, OperatorSpec};
use crate::innerprod::{compute_j_table, compute_k_table, Family};
use crate::report::{run_verify, RunConfig};
use crate::selfsim::{solve_selfsim, SelfSimilarParams};
use crate::vortex::{solve_vortex, SpinIndex};

#[derive(Parser)]
#[command(
    name = "vortexspec",
    about = "Spectral-property verification for spinning NLS solitons",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// winding number
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// truncation radius
    #[arg(long, default_value_t = 50.0)]
    rmax: f64,
    /// solver tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a vortex profile and report its invariants
    Vortex {
        #[command(flatten)]
        common: Common,
    },
    /// Compute the Sturm index functions and counts for L1 and L2
    Index {
        #[command(flatten)]
        common: Common,
        /// exponentially localized perturbation strength
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
    },
    /// Compute an inner-product table (K or J family)
    Innerprods {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "k")]
        family: FamilyArg,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
    },
    /// Solve a truncated self-similar profile
    Selfsim {
        #[command(flatten)]
        common: Common,
        /// self-similar rate parameter
        #[arg(long, default_value_t = 0.1)]
        b: f64,
        /// truncation margin
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
    },
    /// Run the full a-posteriori verification pipeline
    Verify {
        /// winding numbers, comma separated
        #[arg(long, value_delimiter = ',', default_value = "1")]
        m: Vec<u32>,
        #[arg(long, default_value_t = 50.0)]
        rmax: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        /// output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// also emit SVG plots
        #[arg(long)]
        plot: bool,
    },
    /// Emit a single figure as a deterministic SVG
    Plot {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "vortex")]
        kind: PlotKind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    K,
    J,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    /// radial profile R(r)
    Vortex,
    /// index functions of L1 and L2
    Index,
    /// running K-family inner products
    Kfuncs,
    /// running J-family inner products
    Jfuncs,
}

fn emit<T: Serialize>(
    common: &Common,
    value: &T,
    headers: &[&str],
    rows: &[Vec<f64>],
) -> Result<()> {
    match (common.format, &common.out) {
        (Format::Json, Some(path)) => export_json(path, value),
        (Format::Json, None) => {
            println!(
                "{}",
                serde_json::to_string_pretty(value).expect("report types serialize")
            );
            Ok(())
        }
        (Format::Csv, Some(path)) => export_csv(path, headers, rows),
        (Format::Csv, None) => {
            println!("{}", headers.join(","));
            for row in rows {
                let cells: Vec<String> = row.iter().map(|&x| format_full(x)).collect();
                println!("{}", cells.join(","));
            }
            Ok(())
        }
    }
}

fn cmd_vortex(common: &Common) -> Result<()> {
    let profile = solve_vortex(SpinIndex(common.m), common.rmax, common.tol)?;
    #[derive(Serialize)]
    struct Out {
        m: u32,
        r_max: f64,
        mass: f64,
        energy: f64,
        gradient_norm_sq: f64,
        peak: (f64, f64),
    }
    let value = Out {
        m: common.m,
        r_max: common.rmax,
        mass: crate::vortex::mass(&profile),
        energy: crate::vortex::energy(&profile),
        gradient_norm_sq: crate::vortex::gradient_norm_sq(&profile),
        peak: profile.peak(),
    };
    let sol = profile.solution();
    let rows: Vec<Vec<f64>> = (0..sol.mesh().len())
        .map(|k| {
            vec![
                sol.mesh()[k],
                sol.value_at_node(k, 0),
                sol.value_at_node(k, 1),
            ]
        })
        .collect();
    emit(common, &value, &["r", "r_tilde", "dr_tilde"], &rows)
}

fn index_functions(
    common: &Common,
    delta: f64,
) -> Result<Vec<(OperatorKind, crate::index::IndexFunction)>> {
    let profile = Arc::new(solve_vortex(SpinIndex(common.m), common.rmax, common.tol)?);
    [OperatorKind::L1, OperatorKind::L2]
        .into_iter()
        .map(|kind| {
            let op = OperatorSpec::new(kind, profile.clone(), delta)?;
            Ok((kind, compute_index_function(&op, common.rmax, common.tol)?))
        })
        .collect()
}

fn cmd_index(common: &Common, delta: f64) -> Result<()> {
    let functions = index_functions(common, delta)?;
    #[derive(Serialize)]
    struct Out {
        m: u32,
        delta: f64,
        l1: crate::index::IndexReport,
        l2: crate::index::IndexReport,
    }
    let value = Out {
        m: common.m,
        delta,
        l1: index_report(&functions[0].1)?,
        l2: index_report(&functions[1].1)?,
    };
    // both functions sampled on a common grid for the tabular format
    let mut rows = Vec::new();
    let mut r = 0.0;
    while r <= common.rmax {
        let mut row = vec![r];
        for (_, f) in &functions {
            row.push(f.solution.component(r, 0)?);
            row.push(f.solution.component(r, 1)?);
        }
        rows.push(row);
        r += 0.05;
    }
    emit(
        common,
        &value,
        &["r", "u_l1", "du_l1", "u_l2", "du_l2"],
        &rows,
    )
}

fn cmd_innerprods(common: &Common, family: FamilyArg, delta: f64) -> Result<()> {
    let profile = Arc::new(solve_vortex(SpinIndex(common.m), common.rmax, common.tol)?);
    let table = match family {
        FamilyArg::K => compute_k_table(&profile, delta, common.tol)?,
        FamilyArg::J => compute_j_table(&profile, delta, common.tol)?,
    };
    let rows: Vec<Vec<f64>> = table
        .running
        .iter()
        .map(|row| vec![row.r, row.v1, row.v2, row.v3_first, row.v3_second])
        .collect();
    emit(
        common,
        &table,
        &["r", "v1", "v2", "v3_first", "v3_second"],
        &rows,
    )
}

fn cmd_selfsim(common: &Common, b: f64, eta: f64) -> Result<()> {
    let params = SelfSimilarParams::new(SpinIndex(common.m), b, eta)?;
    let profile = solve_selfsim(params, common.tol)?;
    #[derive(Serialize)]
    struct Out {
        m: u32,
        b: f64,
        eta: f64,
        r_end: f64,
        mass: f64,
        energy: f64,
        residual_norms: crate::selfsim::ResidualNorms,
    }
    let value = Out {
        m: common.m,
        b,
        eta,
        r_end: profile.r_end(),
        mass: profile.mass,
        energy: profile.energy,
        residual_norms: profile.residual_norms,
    };
    let sol = &profile.solution;
    let rows: Vec<Vec<f64>> = (0..sol.mesh().len())
        .map(|k| {
            vec![
                sol.mesh()[k],
                sol.value_at_node(k, 0),
                sol.value_at_node(k, 1),
            ]
        })
        .collect();
    emit(common, &value, &["r", "p_tilde", "dp_tilde"], &rows)
}

fn cmd_plot(common: &Common, kind: PlotKind) -> Result<()> {
    let path = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("plot.svg"));
    let m = common.m;
    match kind {
        PlotKind::Vortex => {
            let profile = solve_vortex(SpinIndex(m), common.rmax, common.tol)?;
            let sol = profile.solution();
            let points: Vec<(f64, f64)> = (0..sol.mesh().len())
                .map(|k| (sol.mesh()[k], profile.physical(sol.mesh()[k]).unwrap()))
                .collect();
            export_plot(
                &path,
                &PlotStyle {
                    title: format!("vortex radial profile, m = {m}"),
                    x_label: "r".into(),
                    y_label: "R(r)".into(),
                },
                &[Series {
                    name: format!("m={m}"),
                    points,
                }],
            )
        }
        PlotKind::Index => {
            let functions = index_functions(common, 0.0)?;
            let series: Vec<Series> = functions
                .iter()
                .map(|(kind, f)| Series {
                    name: kind.to_string(),
                    points: (0..f.solution.mesh().len())
                        .map(|k| (f.solution.mesh()[k], f.solution.value_at_node(k, 0)))
                        .collect(),
                })
                .collect();
            export_plot(
                &path,
                &PlotStyle {
                    title: format!("index functions, m = {m}"),
                    x_label: "r".into(),
                    y_label: "u(r)".into(),
                },
                &series,
            )
        }
        PlotKind::Kfuncs | PlotKind::Jfuncs => {
            let profile = Arc::new(solve_vortex(SpinIndex(m), common.rmax, common.tol)?);
            let (table, stem) = match kind {
                PlotKind::Kfuncs => (compute_k_table(&profile, 0.0, common.tol)?, "k"),
                _ => (compute_j_table(&profile, 0.0, common.tol)?, "j"),
            };
            type Pick = fn(&crate::innerprod::RunningRow) -> f64;
            let series: Vec<Series> = [
                ("1", (|row| row.v1) as Pick),
                ("2", |row| row.v2),
                ("3", |row| row.v3_first),
            ]
            .into_iter()
            .map(|(idx, pick)| Series {
                name: format!("{stem}{idx}"),
                points: table.running.iter().map(|row| (row.r, pick(row))).collect(),
            })
            .collect();
            export_plot(
                &path,
                &PlotStyle {
                    title: format!(
                        "running {} inner products, m = {m}",
                        match table.family {
                            Family::K => "K",
                            Family::J => "J",
                        }
                    ),
                    x_label: "r".into(),
                    y_label: format!("{stem}_j(r)"),
                },
                &series,
            )
        }
    }
}

/// Entry point; returns the process exit code. 0 = success (and, for
/// `verify`, all non-informational checks passed), 1 = verification
/// failure, 2 = operational error.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let outcome: Result<i32> = match &cli.command {
        Command::Vortex { common } => cmd_vortex(common).map(|()| 0),
        Command::Index { common, delta } => cmd_index(common, *delta).map(|()| 0),
        Command::Innerprods {
            common,
            family,
            delta,
        } => cmd_innerprods(common, *family, *delta).map(|()| 0),
        Command::Selfsim { common, b, eta } => cmd_selfsim(common, *b, *eta).map(|()| 0),
        Command::Plot { common, kind } => cmd_plot(common, *kind).map(|()| 0),
        Command::Verify {
            m,
            rmax,
            tol,
            eta,
            out,
            plot,
        } => {
            let config = RunConfig {
                ms: m.clone(),
                r_max: *rmax,
                tol: *tol,
                deltas: Vec::new(),
                bs: Vec::new(),
                eta: *eta,
                out_dir: out.clone(),
                plots: *plot,
            };
            run_verify(&config).map(|report| {
                for spin in &report.per_m {
                    for check in &spin.checks {
                        println!(
                            "m={} {:<42} measured {:>12.4e} threshold {:>10.3e} {}",
                            spin.m,
                            check.name,
                            check.measured,
                            check.threshold,
                            if check.pass {
                                "pass"
                            } else if check.informational {
                                "info"
                            } else {
                                "FAIL"
                            }
                        );
                    }
                }
                if report.all_passed {
                    0
                } else {
                    1
                }
            })
        }
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
