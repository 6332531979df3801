use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use downup::bench::{run_bench, GraphFamily};
use downup::densities::SubsetDensity;
use downup::exchange::{exchange_alpha, logconcavity_necessary_check};
use downup::graph::DEFAULT_ENUMERATION_CAP;
use downup::sampler::{sample_many_parallel, verify_samples};
use downup::walk::{chain_rng, exact_analysis, EXACT_CHECK_TOLERANCE};
use downup::{complement_inverse_density, graphic_basis_density, DppDensity, TableDensity, WalkConfig, WeightedGraph};
use serde_json::{json, Value};

use crate::{AnalyzeArgs, AnalyzeCheck, AnalyzeCommon, BenchArgs, SampleArgs, TreeFormat, VerifyArgs, WalkArgs};

pub struct Outcome {
    pub stdout: String,
    pub pass: bool,
}

impl Outcome {
    fn report(value: &Value, human: bool, pass: bool) -> Self {
        let stdout = if human {
            human_lines(value)
        } else {
            format!("{}\n", serde_json::to_string_pretty(value).expect("JSON values serialize"))
        };
        Outcome { stdout, pass }
    }
}

type CommandResult = Result<Outcome, String>;

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load_graph(path: &Path) -> Result<WeightedGraph, String> {
    WeightedGraph::parse(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn walk_config(args: &WalkArgs, steps: Option<usize>) -> Result<WalkConfig, String> {
    let config = WalkConfig {
        epsilon: args.epsilon,
        schedule_constant: args.constant,
        seed: args.seed,
        steps,
    };
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

pub fn sample(args: &SampleArgs) -> CommandResult {
    let g = load_graph(&args.graph)?;
    let config = walk_config(&args.walk, args.steps)?;
    let trees = sample_many_parallel(&g, &config, args.count as usize, args.jobs).map_err(|e| e.to_string())?;
    let mut stdout = String::new();
    for tree in &trees {
        let line = match args.format {
            TreeFormat::Ids => json!(tree.edge_ids()),
            TreeFormat::Endpoints => {
                let pairs: Vec<String> = tree
                    .edge_ids()
                    .iter()
                    .map(|&id| format!("{}-{}", g.edge(id).u, g.edge(id).v))
                    .collect();
                json!(pairs)
            }
        };
        let _ = writeln!(stdout, "{line}");
    }
    Ok(Outcome { stdout, pass: true })
}

pub fn verify(args: &VerifyArgs) -> CommandResult {
    let g = load_graph(&args.graph)?;
    if g.edge_count() > DEFAULT_ENUMERATION_CAP {
        return Err(format!(
            "verify enumerates every spanning tree and is capped at {DEFAULT_ENUMERATION_CAP} edges; graph has {}",
            g.edge_count()
        ));
    }
    let config = walk_config(&args.walk, None)?;
    let trees = sample_many_parallel(&g, &config, args.samples as usize, args.jobs).map_err(|e| e.to_string())?;
    let report = verify_samples(&g, &trees, config.epsilon).map_err(|e| e.to_string())?;
    let value = serde_json::to_value(&report).expect("report serializes");
    Ok(Outcome::report(&value, args.human, report.pass))
}

fn load_density(common: &AnalyzeCommon) -> Result<Box<dyn SubsetDensity + Sync>, String> {
    let input = &common.input;
    if let Some(path) = &input.graph {
        let g = load_graph(path)?;
        return Ok(if common.cographic {
            Box::new(complement_inverse_density(&g))
        } else {
            Box::new(graphic_basis_density(&g))
        });
    }
    if let Some(path) = &input.density {
        let d = TableDensity::from_json(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
        return Ok(Box::new(d));
    }
    if let Some(path) = &input.dpp {
        let d = DppDensity::from_json(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
        return Ok(Box::new(d));
    }
    Err("one of --graph, --density, --dpp is required".into())
}

pub fn analyze(args: &AnalyzeArgs) -> CommandResult {
    match &args.check {
        AnalyzeCheck::Exchange(common) => {
            let d = load_density(common)?;
            let report = exchange_alpha(&*d).map_err(|e| e.to_string())?;
            Ok(Outcome::report(&report.to_json(), common.human, true))
        }
        AnalyzeCheck::WalkExact { common, trials } => {
            let d = load_density(common)?;
            let a = exact_analysis(&*d, *trials, common.seed).map_err(|e| e.to_string())?;
            let stationary = a.stationarity_err <= EXACT_CHECK_TOLERANCE;
            let value = json!({
                "stationarity_err": a.stationarity_err,
                "reversibility_err": a.reversibility_err,
                "kl_contraction_pass": a.kl_contraction_pass,
                "worst_contraction_excess": a.worst_contraction_excess,
                "pinsker_pass": a.pinsker_pass,
                "worst_pinsker_excess": a.worst_pinsker_excess,
                "support_size": a.support_size,
                "k": a.subset_size,
                "distributions_tested": a.distributions_tested,
            });
            Ok(Outcome::report(
                &value,
                common.human,
                stationary && a.kl_contraction_pass && a.pinsker_pass,
            ))
        }
        AnalyzeCheck::Hessian { common, points } => {
            let d = load_density(common)?;
            let mut rng = chain_rng(common.seed, 0);
            let check = logconcavity_necessary_check(&*d, *points, &mut rng).map_err(|e| e.to_string())?;
            let value = serde_json::to_value(&check).expect("check serializes");
            Ok(Outcome::report(&value, common.human, check.pass))
        }
    }
}

pub fn bench(args: &BenchArgs) -> CommandResult {
    let family: GraphFamily = args.graph_family.parse()?;
    let config = walk_config(&args.walk, None)?;
    let rows = run_bench(&args.sizes, family, &config).map_err(|e| e.to_string())?;
    if args.human {
        let mut out = format!(
            "{:>10} {:>10} {:>12} {:>14} {:>16}\n",
            "n_edges", "n_vertices", "steps", "wall_seconds", "seconds_per_step"
        );
        for r in &rows {
            let _ = writeln!(
                out,
                "{:>10} {:>10} {:>12} {:>14.4} {:>16.3e}",
                r.n_edges, r.n_vertices, r.steps, r.wall_seconds, r.seconds_per_step
            );
        }
        return Ok(Outcome { stdout: out, pass: true });
    }
    let value = json!({
        "family": family.to_string(),
        "epsilon": config.epsilon,
        "constant": config.schedule_constant,
        "seed": config.seed,
        "rows": rows,
    });
    Ok(Outcome::report(&value, false, true))
}

fn human_lines(value: &Value) -> String {
    let mut out = String::new();
    match value {
        Value::Object(map) => {
            for (key, v) in map {
                let _ = writeln!(out, "{key}: {v}");
            }
        }
        other => {
            let _ = writeln!(out, "{other}");
        }
    }
    out
}
