//! Batch front end: every pipeline as a subcommand with JSON output.
//!
//! Exit codes: 0 on success, 1 on verification failure, 2 on input or
//! configuration errors. Identical configuration and input produce
//! byte-identical reports regardless of the worker count.

mod battery;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use coarse_ends::filtration::{build_end_system, induced_end_map, EndSystem};
use coarse_ends::maps::{homotopy_distance, CoarseMapSample};
use coarse_ends::nonscattering::nonscattering_witness;
use coarse_ends::sigma::{omega_map, sigma_report};
use coarse_ends::spaces::{self, SpaceRecipe};
use coarse_ends::symbolic::iota_report;
use coarse_ends::{Error, FiniteCoarseInstance, MetricKind, ScaleLadder};

#[derive(Parser)]
#[command(name = "coarse-ends")]
#[command(about = "Multi-scale end structure of metric spaces: annulus filtrations, escape chains, and symbolic certificates")]
#[command(version)]
struct Cli {
    /// Worker threads for grid cells (defaults to all cores)
    #[arg(long, global = true, env = "COARSE_ENDS_JOBS")]
    jobs: Option<usize>,

    /// Write the JSON report here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overwrite an existing output file
    #[arg(long, global = true)]
    force: bool,

    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Annulus component matrix, end threads, and the stabilization report
    Ends(InstanceArgs),
    /// Escape chains per scale, their classes, and the comparison map
    Sigma(InstanceArgs),
    /// Least scale connecting every ladder annulus
    Nonscattering(InstanceArgs),
    /// Verify chain schemas and gap certificates for a parametric space
    Hyper(HyperArgs),
    /// Map diagnostics: modulus, properness, homotopy distance, induced map
    Maps(MapsArgs),
    /// Run the built-in verification battery
    Suite,
}

#[derive(Args)]
struct InstanceArgs {
    /// Built-in recipe: line, grid2d, vase, flared_vase, squares, book,
    /// discrete_book
    #[arg(long, conflicts_with = "input")]
    recipe: Option<String>,

    /// Half-width for line and grid2d
    #[arg(long, alias = "N")]
    n: Option<u64>,

    /// Height for vase, flared_vase and books
    #[arg(long)]
    height: Option<u64>,

    /// Page count for books
    #[arg(long)]
    pages: Option<u32>,

    /// Truncation radius for squares and file inputs
    #[arg(long)]
    rho: Option<f64>,

    /// Input file: point-cloud CSV (`id,x1,...,xd`) or graph edge list
    #[arg(long)]
    input: Option<PathBuf>,

    /// Input format: cloud | graph
    #[arg(long, default_value = "cloud")]
    format: String,

    /// Cloud metric: euclidean | chebyshev
    #[arg(long, default_value = "euclidean")]
    metric: String,

    /// Basepoint id for file inputs
    #[arg(long)]
    basepoint: Option<String>,

    /// Explicit cut-off radii (comma separated, must start at 0)
    #[arg(long = "ladder-r", value_delimiter = ',', allow_hyphen_values = true)]
    ladder_r: Vec<f64>,

    /// Explicit entourage scales (comma separated, ascending)
    #[arg(long = "ladder-R", value_delimiter = ',')]
    ladder_scales: Vec<f64>,

    /// Escape shell margin as a fraction of the truncation radius
    #[arg(long, default_value_t = 0.1)]
    margin: f64,

    /// Stabilization window size
    #[arg(long, default_value_t = 3)]
    window: usize,

    /// Seeded coordinate jitter for robustness runs (cloud recipes)
    #[arg(long)]
    jitter: Option<f64>,

    /// Seed for the jitter
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Also write the plot-ready `r,R,count` matrix here
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct HyperArgs {
    /// Built-in descriptor: line, grid2d, vase, flared_vase
    #[arg(long, conflicts_with = "space")]
    recipe: Option<String>,

    /// Parametric space descriptor (JSON)
    #[arg(long, requires = "certs")]
    space: Option<PathBuf>,

    /// Certificate file (JSON: representatives, schemas, gaps)
    #[arg(long)]
    certs: Option<PathBuf>,
}

#[derive(Args)]
struct MapsArgs {
    #[command(flatten)]
    instance: InstanceArgs,

    /// Map sample: identity | shift:<dx> | scale:<c> | to-basepoint
    #[arg(long, default_value = "identity")]
    map: String,

    /// Optional second sample for the homotopy distance
    #[arg(long = "map-g")]
    map_g: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // ignore failure when a pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match run(&cli) {
        Ok(Outcome { report, verified }) => {
            if let Err(err) = emit(&cli, &report) {
                eprintln!("error: {}", err);
                return ExitCode::from(2);
            }
            if verified {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification failed; see the report for details");
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {}", err);
            ExitCode::from(exit_code_for(&err))
        }
    }
}

struct Outcome {
    report: Value,
    verified: bool,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::MapNotCoarse(_) | Error::CertificateConflict(_) => 1,
        _ => 2,
    }
}

fn emit(cli: &Cli, report: &Value) -> coarse_ends::Result<()> {
    match &cli.out {
        Some(path) => spaces::save_report(report, path, cli.force),
        None => {
            println!("{}", serde_json::to_string_pretty(report)?);
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> coarse_ends::Result<Outcome> {
    match &cli.command {
        Commands::Ends(args) => ends_command(args, cli.force),
        Commands::Sigma(args) => sigma_command(args),
        Commands::Nonscattering(args) => nonscattering_command(args),
        Commands::Hyper(args) => hyper_command(args),
        Commands::Maps(args) => maps_command(args),
        Commands::Suite => suite_command(),
    }
}

fn parse_metric(name: &str) -> coarse_ends::Result<MetricKind> {
    match name {
        "euclidean" => Ok(MetricKind::Euclidean),
        "chebyshev" => Ok(MetricKind::Chebyshev),
        other => Err(Error::InvalidRecipe(format!(
            "unknown metric `{}` (expected euclidean or chebyshev)",
            other
        ))),
    }
}

fn load_instance(args: &InstanceArgs) -> coarse_ends::Result<(FiniteCoarseInstance, String)> {
    if let Some(path) = &args.input {
        let basepoint = args.basepoint.as_deref().ok_or_else(|| {
            Error::InvalidRecipe("file inputs need --basepoint".into())
        })?;
        let rho = args.rho.ok_or_else(|| {
            Error::InvalidRecipe("file inputs need --rho (truncation radius)".into())
        })?;
        let inst = match args.format.as_str() {
            "cloud" => spaces::load_cloud_csv(path, parse_metric(&args.metric)?, basepoint, rho)?,
            "graph" => spaces::load_graph_edges(path, basepoint, rho)?,
            other => {
                return Err(Error::InvalidRecipe(format!(
                    "unknown format `{}` (expected cloud or graph)",
                    other
                )))
            }
        };
        return Ok((inst, path.display().to_string()));
    }
    let name = args.recipe.as_deref().unwrap_or("line");
    let recipe = SpaceRecipe::from_name(name, args.n, args.height, args.pages, args.rho)?;
    let inst = match args.jitter {
        Some(jitter) => recipe.generate_jittered(jitter, args.seed)?,
        None => recipe.generate()?,
    };
    Ok((inst, name.to_string()))
}

fn build_ladder(args: &InstanceArgs, rho_max: f64) -> coarse_ends::Result<ScaleLadder> {
    match (args.ladder_r.is_empty(), args.ladder_scales.is_empty()) {
        (true, true) => ScaleLadder::default_for(rho_max),
        (false, false) => {
            ScaleLadder::new(args.ladder_r.clone(), args.ladder_scales.clone(), rho_max)
        }
        (true, false) => ScaleLadder::new(
            ScaleLadder::default_for(rho_max)?.cutoffs().to_vec(),
            args.ladder_scales.clone(),
            rho_max,
        ),
        (false, true) => ScaleLadder::new(
            args.ladder_r.clone(),
            ScaleLadder::default_for(rho_max)?.scales().to_vec(),
            rho_max,
        ),
    }
}

fn instance_summary(inst: &FiniteCoarseInstance, source: &str) -> Value {
    json!({
        "source": source,
        "points": inst.len(),
        "dropped_by_truncation": inst.dropped_count(),
        "basepoint": inst.basepoint_id(),
        "truncation_radius": inst.rho_max(),
        "metric": inst.metric_kind(),
        "units": "input coordinate/edge-weight units",
    })
}

fn count_matrix(sys: &EndSystem) -> Value {
    let ladder = sys.ladder();
    let mut rows = Vec::new();
    for (i, &r) in ladder.cutoffs().iter().enumerate() {
        for (j, &scale) in ladder.scales().iter().enumerate() {
            rows.push(json!({"r": r, "R": scale, "count": sys.cell(i, j).count()}));
        }
    }
    Value::Array(rows)
}

fn write_count_csv(sys: &EndSystem, path: &PathBuf, force: bool) -> coarse_ends::Result<()> {
    if path.exists() && !force {
        return Err(Error::WouldOverwrite(path.display().to_string()));
    }
    let ladder = sys.ladder();
    let mut text = String::from("r,R,count\n");
    for (i, &r) in ladder.cutoffs().iter().enumerate() {
        for (j, &scale) in ladder.scales().iter().enumerate() {
            text.push_str(&format!("{},{},{}\n", r, scale, sys.cell(i, j).count()));
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn threads_json(sys: &EndSystem) -> Value {
    let inst = sys.instance();
    let per_scale: Vec<Value> = (0..sys.n_scales())
        .map(|j| {
            let threads = sys.threads(j);
            json!({
                "scale": sys.ladder().scales()[j],
                "count": threads.len(),
                "representatives": threads
                    .iter()
                    .map(|t| inst.id(t.rep))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    Value::Array(per_scale)
}

fn ends_command(args: &InstanceArgs, force: bool) -> coarse_ends::Result<Outcome> {
    let (inst, source) = load_instance(args)?;
    let ladder = build_ladder(args, inst.rho_max())?;
    let sys = build_end_system(&inst, &ladder);
    let stability = sys.stable_end_count(args.window)?;
    if let Some(csv) = &args.csv {
        write_count_csv(&sys, csv, force)?;
    }
    let report = json!({
        "command": "ends",
        "instance": instance_summary(&inst, &source),
        "ladder": { "cutoffs": ladder.cutoffs(), "scales": ladder.scales() },
        "counts": count_matrix(&sys),
        "threads": threads_json(&sys),
        "stability": stability,
    });
    Ok(Outcome { report, verified: true })
}

fn sigma_command(args: &InstanceArgs) -> coarse_ends::Result<Outcome> {
    let (inst, source) = load_instance(args)?;
    let ladder = build_ladder(args, inst.rho_max())?;
    let sys = build_end_system(&inst, &ladder);
    let report = sigma_report(&sys, args.margin)?;
    let omega = omega_map(&report, &sys);
    let chains: Vec<Value> = report
        .per_scale
        .iter()
        .map(|entry| {
            json!({
                "scale": entry.scale,
                "exists": entry.exists,
                "chain": entry.chain.as_ref().map(|c| {
                    c.points.iter().map(|&p| inst.id(p)).collect::<Vec<_>>()
                }),
                "threads_hit": entry.threads_hit,
                "classes_hit": entry.classes_hit,
            })
        })
        .collect();
    let classes: Vec<Value> = report
        .classes
        .iter()
        .enumerate()
        .map(|(i, class)| {
            json!({
                "class": i,
                "first_scale": class.first_scale,
                "terminal": inst.id(class.terminal),
                "thread": class.top_component,
            })
        })
        .collect();
    let value = json!({
        "command": "sigma",
        "instance": instance_summary(&inst, &source),
        "ladder": { "cutoffs": ladder.cutoffs(), "scales": ladder.scales() },
        "margin": report.margin,
        "shell_radius": report.shell_radius,
        "per_scale": chains,
        "classes": classes,
        "class_count": report.class_count(),
        "omega": { "pairs": omega.pairs, "injective": omega.injective, "surjective": omega.surjective },
    });
    Ok(Outcome { report: value, verified: true })
}

fn nonscattering_command(args: &InstanceArgs) -> coarse_ends::Result<Outcome> {
    let (inst, source) = load_instance(args)?;
    let ladder = build_ladder(args, inst.rho_max())?;
    let sys = build_end_system(&inst, &ladder);
    let witness = nonscattering_witness(&sys);
    let report = json!({
        "command": "nonscattering",
        "instance": instance_summary(&inst, &source),
        "ladder": { "cutoffs": ladder.cutoffs(), "scales": ladder.scales() },
        "witness": witness,
    });
    Ok(Outcome { report, verified: true })
}

fn hyper_command(args: &HyperArgs) -> coarse_ends::Result<Outcome> {
    let (space, certs) = match (&args.space, &args.recipe) {
        (Some(space_path), _) => {
            let certs_path = args.certs.as_ref().expect("clap enforces --certs");
            (
                spaces::load_parametric_space(space_path)?,
                spaces::load_certificates(certs_path)?,
            )
        }
        (None, recipe) => {
            let name = recipe.as_deref().unwrap_or("line");
            let recipe = SpaceRecipe::from_name(name, None, None, None, None)?;
            let space = recipe.parametric().ok_or_else(|| {
                Error::InvalidRecipe(format!(
                    "recipe `{}` has no parametric descriptor",
                    name
                ))
            })?;
            let certs = recipe.certificates().expect("descriptor recipes ship certificates");
            (space, certs)
        }
    };
    let report = iota_report(&space, &certs.representative_pairs(), &certs.schemas, &certs.gaps)?;
    let verified = report.complete
        && report.schema_results.iter().all(|r| r.verified)
        && report
            .gap_results
            .iter()
            .all(|r| r.verified_at_scale);
    let value = json!({
        "command": "hyper",
        "report": report,
    });
    Ok(Outcome { report: value, verified })
}

fn parse_map_sample<'a>(
    spec: &str,
    inst: &'a FiniteCoarseInstance,
) -> coarse_ends::Result<CoarseMapSample<'a>> {
    if spec == "identity" {
        return Ok(CoarseMapSample::identity(inst));
    }
    if spec == "to-basepoint" {
        let base = inst.basepoint();
        return CoarseMapSample::new(inst, inst, vec![base; inst.len()]);
    }
    let make = |f: Box<dyn Fn(&[f64]) -> Vec<f64>>| {
        CoarseMapSample::nearest_point_map(inst, inst, move |c| f(c))
    };
    if let Some(dx) = spec.strip_prefix("shift:") {
        let dx: f64 = dx.parse().map_err(|_| {
            Error::InvalidRecipe(format!("bad shift amount in `{}`", spec))
        })?;
        return make(Box::new(move |c: &[f64]| {
            let mut v = c.to_vec();
            v[0] += dx;
            v
        }));
    }
    if let Some(s) = spec.strip_prefix("scale:") {
        let s: f64 = s.parse().map_err(|_| {
            Error::InvalidRecipe(format!("bad scale factor in `{}`", spec))
        })?;
        return make(Box::new(move |c: &[f64]| c.iter().map(|x| x * s).collect()));
    }
    Err(Error::InvalidRecipe(format!(
        "unknown map `{}` (expected identity, shift:<dx>, scale:<c>, to-basepoint)",
        spec
    )))
}

fn maps_command(args: &MapsArgs) -> coarse_ends::Result<Outcome> {
    let (inst, source) = load_instance(&args.instance)?;
    let ladder = build_ladder(&args.instance, inst.rho_max())?;
    let f = parse_map_sample(&args.map, &inst)?;
    let modulus = f.bornologous_modulus(&ladder);
    let properness = f.properness_report_with_margin(&ladder, args.instance.margin);
    let homotopy = match &args.map_g {
        Some(spec) => {
            let g = parse_map_sample(spec, &inst)?;
            Some(homotopy_distance(&f, &g)?)
        }
        None => None,
    };
    let sys = build_end_system(&inst, &ladder);
    let induced = induced_end_map(&f, &sys, &sys);
    let (induced_json, verified) = match &induced {
        Ok(map) => {
            let cells: Vec<Value> = (0..sys.n_cutoffs())
                .flat_map(|i| {
                    let map = &map.cells;
                    (0..sys.n_scales()).map(move |j| match &map[i][j] {
                        Some(image) => json!({
                            "from": [i, j],
                            "to": image.cell,
                            "component_map": image.comp_map,
                        }),
                        None => json!({"from": [i, j], "to": null}),
                    })
                })
                .collect();
            (json!({"accepted": true, "cells": cells, "moduli": map.moduli}), true)
        }
        Err(err) => (json!({"accepted": false, "reason": err.to_string()}), false),
    };
    let report = json!({
        "command": "maps",
        "instance": instance_summary(&inst, &source),
        "map": args.map,
        "bornologous": { "per_scale": modulus.per_scale, "finite": modulus.is_finite() },
        "properness": {
            "per_cutoff": properness.per_cutoff,
            "proper_at_scale": properness.proper_at_scale,
            "shell_radius": properness.shell_radius,
        },
        "homotopy_distance": homotopy,
        "induced_end_map": induced_json,
    });
    Ok(Outcome { report, verified })
}

fn suite_command() -> coarse_ends::Result<Outcome> {
    let results = battery::run_battery();
    let verified = results.iter().all(|r| r.passed);
    for result in &results {
        println!(
            "criterion {}: {} — {}",
            result.id,
            if result.passed { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    let report = json!({
        "command": "suite",
        "criteria": results
            .iter()
            .map(|r| json!({"id": r.id, "name": r.name, "passed": r.passed, "detail": r.detail}))
            .collect::<Vec<_>>(),
        "passed": verified,
    });
    Ok(Outcome { report, verified })
}
