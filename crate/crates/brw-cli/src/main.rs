use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use brw_core::critical::{bisect_local_survival, closed_form, Family};
use brw_core::experiments::{
    exp_boundary_counterexample, exp_comb, exp_finite_two_points, exp_lemma_countable,
    exp_line_extinction, exp_loop, exp_uncountable, solve_on_quotient, Verdict,
};
use brw_core::geometry::comb::{Comb, Singleton};
use brw_core::geometry::sets::{ColSet, CombSet, IndexSet};
use brw_core::geometry::tree::RegularTree;
use brw_core::geometry::variants::{HalfCombB, SplitComb, VLine};
use brw_core::model::{finite_quadratic_model, finite_subcritical_model, Model, ModelDoc};
use brw_core::montecarlo::{estimate_no_hit, SimConfig};
use brw_core::projection::{
    b_to_line, check_projection, comb_to_star, split_to_comb, tree_to_comb, ProjectionMap,
};
use brw_core::report::{q_table_csv, trial_csv, QRow, SolveRecord};
use brw_core::solver::SolveSettings;

#[derive(Parser)]
#[command(name = "brw", version, about = "Extinction-probability brackets for branching random walks on trees and combs")]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Commands {
    /// Solve certified brackets of an extinction probability on a model's
    /// quotient.
    Solve {
        #[arg(long)]
        model: Option<PathBuf>,
        /// tree / comb shortcut instead of a model file, e.g. "tree3" or "comb1".
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        lambda: Option<f64>,
        /// Target set, e.g. full, origin, T[y1], T[x2], V[1], teeth{0,2}.
        #[arg(long, default_value = "full")]
        set: String,
        #[arg(long, default_value_t = 20)]
        radius: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Monte Carlo no-hit or survival frequencies.
    Simulate {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value = "empty")]
        set: String,
        #[arg(long, default_value_t = 30)]
        horizon: u32,
        #[arg(long, default_value_t = 10_000)]
        trials: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Critical parameters: closed form and optional empirical bisection.
    Critical {
        /// tree3, tree4, comb1, ...
        #[arg(long, default_value = "tree3")]
        family: String,
        #[arg(long)]
        bisect: bool,
        #[arg(long, default_value_t = 25)]
        radius: u32,
        #[arg(long, default_value_t = 0.30)]
        lo: f64,
        #[arg(long, default_value_t = 0.45)]
        hi: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact rate-sum identity checks for the canonical projections.
    ProjectCheck {
        /// tree3-comb1 | comb1-singleton | b-vline | split-comb1 | all
        #[arg(long, default_value = "all")]
        map: String,
        #[arg(long, default_value_t = 20)]
        radius: u32,
        #[arg(long, default_value_t = 0.35)]
        lambda: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Named experiments.
    Experiment {
        /// lemma-countable | uncountable | line-extinction | loop | comb |
        /// boundary | finite-two-points
        name: String,
        #[arg(long, default_value_t = 0.35)]
        lambda: f64,
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40")]
        radii: Vec<u32>,
        #[arg(long, default_value_t = 3)]
        n_max: u32,
        #[arg(long, value_delimiter = ',')]
        i1: Option<Vec<u32>>,
        #[arg(long, value_delimiter = ',')]
        i2: Option<Vec<u32>>,
        #[arg(long)]
        tail1: Option<u32>,
        #[arg(long)]
        tail2: Option<u32>,
        #[arg(long, default_value_t = 1)]
        alpha: u32,
        #[arg(long, default_value_t = 4.0)]
        loop_rate: f64,
        #[arg(long, default_value_t = 100)]
        starts: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// quadratic | subcritical (built-in finite models) or a file path.
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(unresolved) => {
            if unresolved {
                eprintln!(
                    "unresolved verdicts: raise the radius schedule (--radii) or the sweep budget"
                );
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Commands::Solve {
            model,
            family,
            lambda,
            set,
            radius,
            out,
            format,
        } => {
            let doc = load_model(model.as_deref(), family.as_deref(), lambda)?;
            let set = parse_set(&set)?;
            let settings = SolveSettings::default();
            let bracket = solve_on_quotient(&doc, &set, radius, &settings)?;
            let record = SolveRecord::from_bracket(
                &bracket,
                &[brw_core::geometry::comb::CombVertex::origin()],
            );
            let row = QRow::from_bracket(&bracket, 0);
            match format {
                Format::Csv => {
                    emit(out.as_deref(), "solve.csv", &q_table_csv(&[row]))?;
                }
                Format::Json => {
                    let payload = json!({
                        "model": doc,
                        "record": record,
                        "timestamp": timestamp(),
                    });
                    emit(out.as_deref(), "solve.json", &serde_json::to_string_pretty(&payload)?)?;
                }
            }
            Ok(false)
        }
        Commands::Simulate {
            model,
            family,
            lambda,
            set,
            horizon,
            trials,
            seed,
            out,
        } => {
            let doc = load_model(model.as_deref(), family.as_deref(), lambda)?;
            let cfg = SimConfig::new(seed, trials, horizon);
            match doc.load()? {
                Model::Tree(tree) => {
                    let target = parse_tree_set(&set)?;
                    let est = estimate_no_hit(
                        &tree,
                        &brw_core::geometry::tree::TreeVertex::root(),
                        &target.to_target(),
                        horizon,
                        &cfg,
                    );
                    emit(out.as_deref(), "trials.csv", &trial_csv(&est.records))?;
                    let payload = json!({
                        "model": doc, "set": target.name(), "horizon": horizon,
                        "no_hit": est.no_hit, "hit": est.hit,
                        "censored": est.censored_unresolved,
                        "frequency": [est.frequency_lower, est.frequency_upper],
                        "rng": cfg.rng_name(), "seed": seed,
                        "timestamp": timestamp(),
                    });
                    emit(out.as_deref(), "simulate.json", &serde_json::to_string_pretty(&payload)?)?;
                }
                Model::Comb(comb) => {
                    let target = parse_set(&set)?;
                    let est = estimate_no_hit(
                        &comb,
                        &brw_core::geometry::comb::CombVertex::origin(),
                        &target.to_target(),
                        horizon,
                        &cfg,
                    );
                    emit(out.as_deref(), "trials.csv", &trial_csv(&est.records))?;
                    let payload = json!({
                        "model": doc, "set": target.name(), "horizon": horizon,
                        "no_hit": est.no_hit, "hit": est.hit,
                        "censored": est.censored_unresolved,
                        "frequency": [est.frequency_lower, est.frequency_upper],
                        "rng": cfg.rng_name(), "seed": seed,
                        "timestamp": timestamp(),
                    });
                    emit(out.as_deref(), "simulate.json", &serde_json::to_string_pretty(&payload)?)?;
                }
                Model::TreeLoop { .. } => bail!("simulate the loop model via family=tree with add_loop in code"),
                Model::Finite(_) => {
                    // survival frequency only for finite models
                    bail!("simulate expects a tree or comb model");
                }
            }
            Ok(false)
        }
        Commands::Critical {
            family,
            bisect,
            radius,
            lo,
            hi,
            out,
        } => {
            let fam = parse_family(&family)?;
            let mut pair = closed_form(fam)?;
            if bisect {
                let alpha = match fam {
                    Family::Tree(m) => m - 2,
                    Family::Comb(a) => a,
                };
                let rep = bisect_local_survival(alpha, lo, hi, radius, 12)?;
                pair.interval = Some(rep.interval);
                let payload = json!({
                    "closed_form": pair,
                    "bisection": rep,
                    "timestamp": timestamp(),
                });
                emit(out.as_deref(), "critical.json", &serde_json::to_string_pretty(&payload)?)?;
            } else {
                let payload = json!({ "closed_form": pair, "timestamp": timestamp() });
                emit(out.as_deref(), "critical.json", &serde_json::to_string_pretty(&payload)?)?;
            }
            Ok(false)
        }
        Commands::ProjectCheck {
            map,
            radius,
            lambda,
            out,
        } => {
            let mut reports = Vec::new();
            let names: Vec<&str> = if map == "all" {
                vec!["tree3-comb1", "comb1-singleton", "b-vline", "split-comb1"]
            } else {
                vec![map.as_str()]
            };
            for name in names {
                let rep = match name {
                    "tree3-comb1" => check_projection(
                        &ProjectionMap::new(
                            name,
                            RegularTree::new(3, lambda)?,
                            Comb::new(1, lambda)?,
                            tree_to_comb,
                        ),
                        radius,
                    )?,
                    "comb1-singleton" => check_projection(
                        &ProjectionMap::new(
                            name,
                            Comb::new(1, lambda)?,
                            Singleton::new(3.0, lambda),
                            comb_to_star,
                        ),
                        radius,
                    )?,
                    "b-vline" => check_projection(
                        &ProjectionMap::new(
                            name,
                            HalfCombB::new(1, lambda)?,
                            VLine::new(1, lambda)?,
                            b_to_line,
                        ),
                        radius,
                    )?,
                    "split-comb1" => check_projection(
                        &ProjectionMap::new(
                            name,
                            SplitComb::new(lambda)?,
                            Comb::new(1, lambda)?,
                            split_to_comb,
                        ),
                        radius,
                    )?,
                    other => bail!("unknown map {other}"),
                };
                reports.push(rep);
            }
            let payload = json!({ "reports": reports, "timestamp": timestamp() });
            emit(out.as_deref(), "projections.json", &serde_json::to_string_pretty(&payload)?)?;
            Ok(false)
        }
        Commands::Experiment {
            name,
            lambda,
            radii,
            n_max,
            i1,
            i2,
            tail1,
            tail2,
            alpha,
            loop_rate,
            starts,
            seed,
            model,
            out,
        } => {
            let settings = SolveSettings::default();
            let mk_index = |idx: &Option<Vec<u32>>, tail: Option<u32>, dflt: &[u32]| -> Result<IndexSet> {
                let mut s = IndexSet::from_indices(idx.as_deref().unwrap_or(dflt))
                    .map_err(|e| anyhow!("{e}"))?;
                if let Some(t) = tail {
                    s = s.with_tail(t);
                }
                Ok(s)
            };
            let mut unresolved = false;
            match name.as_str() {
                "lemma-countable" => {
                    let rep = exp_lemma_countable(3, lambda, n_max, &radii, &settings)?;
                    unresolved = !rep.all_certified;
                    emit(out.as_deref(), "lemma_countable.csv", &q_table_csv(&rep.rows))?;
                    emit_json(out.as_deref(), "lemma_countable.json", &rep)?;
                }
                "uncountable" => {
                    let rep = exp_uncountable(
                        3,
                        lambda,
                        mk_index(&i1, tail1, &[1])?,
                        mk_index(&i2, tail2, &[2])?,
                        &radii,
                        &settings,
                    )?;
                    unresolved = rep.verdict == Verdict::Unresolved;
                    emit(out.as_deref(), "uncountable.csv", &q_table_csv(&rep.rows))?;
                    emit_json(out.as_deref(), "uncountable.json", &rep)?;
                }
                "line-extinction" => {
                    let rep = exp_line_extinction(3, lambda, n_max.max(1), &radii, &settings)?;
                    unresolved = !rep.nondecreasing;
                    emit(out.as_deref(), "line_extinction.csv", &q_table_csv(&rep.rows))?;
                    emit_json(out.as_deref(), "line_extinction.json", &rep)?;
                }
                "loop" => {
                    let rep = exp_loop(3, lambda, loop_rate, &radii, &settings)?;
                    unresolved = rep.order_0_1 == Verdict::Unresolved
                        || rep.order_1_2 == Verdict::Unresolved;
                    emit(out.as_deref(), "loop.csv", &q_table_csv(&rep.rows))?;
                    emit_json(out.as_deref(), "loop.json", &rep)?;
                }
                "comb" => {
                    let rep = exp_comb(
                        lambda,
                        alpha,
                        mk_index(&i1, tail1, &[1])?,
                        mk_index(&i2, tail2, &[2])?,
                        &radii,
                        &settings,
                    )?;
                    unresolved = rep.verdict == Verdict::Unresolved || !rep.transport.overlap;
                    emit(out.as_deref(), "comb.csv", &q_table_csv(&rep.rows))?;
                    emit_json(out.as_deref(), "comb.json", &rep)?;
                }
                "boundary" => {
                    let rep = exp_boundary_counterexample(lambda, &radii, &settings)?;
                    unresolved = rep.verdict == Verdict::Unresolved;
                    emit(
                        out.as_deref(),
                        "boundary.csv",
                        &q_table_csv(&[rep.row_a.clone(), rep.row_b.clone()]),
                    )?;
                    emit_json(out.as_deref(), "boundary.json", &rep)?;
                }
                "finite-two-points" => {
                    let doc = match model.as_deref() {
                        None | Some("quadratic") => finite_quadratic_model(),
                        Some("subcritical") => finite_subcritical_model(),
                        Some(path) => read_model(Path::new(path))?,
                    };
                    let rep = exp_finite_two_points(&doc, starts, seed, &settings)?;
                    emit_json(out.as_deref(), "finite_two_points.json", &rep)?;
                }
                other => bail!("unknown experiment {other}"),
            }
            Ok(unresolved)
        }
    }
}

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn read_model(path: &Path) -> Result<ModelDoc> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading model {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

fn load_model(path: Option<&Path>, family: Option<&str>, lambda: Option<f64>) -> Result<ModelDoc> {
    if let Some(p) = path {
        let mut doc = read_model(p)?;
        if let Some(l) = lambda {
            doc.lambda = l;
        }
        return Ok(doc);
    }
    let fam = family.unwrap_or("tree3");
    let lambda = lambda.unwrap_or(0.35);
    Ok(match parse_family(fam)? {
        Family::Tree(m) => ModelDoc::tree(m, lambda),
        Family::Comb(a) => ModelDoc::comb(a, lambda),
    })
}

fn parse_family(s: &str) -> Result<Family> {
    if let Some(m) = s.strip_prefix("tree") {
        return Ok(Family::Tree(m.parse()?));
    }
    if let Some(a) = s.strip_prefix("comb") {
        return Ok(Family::Comb(a.parse()?));
    }
    bail!("unknown family {s} (expected treeM or combA)")
}

/// Parses a comb-quotient set name: full, empty, origin, axis, axis(<x>),
/// T[y<n>], T[x<i>], V[<i>], teeth{c1,c2,...}.
fn parse_set(s: &str) -> Result<CombSet> {
    let s = s.trim();
    Ok(match s {
        "full" => CombSet::Full,
        "empty" => CombSet::Empty,
        "origin" | "root" => CombSet::Origin,
        "axis" | "spine" => CombSet::Axis,
        _ => {
            if let Some(rest) = s.strip_prefix("axis(").and_then(|t| t.strip_suffix(')')) {
                CombSet::AxisPoint(rest.parse()?)
            } else if let Some(rest) = s.strip_prefix("T[y").and_then(|t| t.strip_suffix(']')) {
                let n: i64 = rest.parse()?;
                if n == 0 {
                    CombSet::Full
                } else if n > 0 {
                    CombSet::AxisFrom(n)
                } else {
                    CombSet::AxisTo(n)
                }
            } else if let Some(rest) = s.strip_prefix("T[x").and_then(|t| t.strip_suffix(']')) {
                let i: i64 = rest.parse()?;
                CombSet::Teeth(ColSet::finite(vec![i - 1]))
            } else if let Some(rest) = s.strip_prefix("V[").and_then(|t| t.strip_suffix(']')) {
                CombSet::VLines(ColSet::finite(vec![rest.parse()?]))
            } else if let Some(rest) = s.strip_prefix("teeth{").and_then(|t| t.strip_suffix('}')) {
                let cols = rest
                    .split(',')
                    .map(|c| c.trim().parse::<i64>())
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                CombSet::Teeth(ColSet::finite(cols))
            } else {
                bail!("cannot parse set {s}")
            }
        }
    })
}

fn parse_tree_set(s: &str) -> Result<brw_core::geometry::sets::TreeSet> {
    use brw_core::geometry::sets::TreeSet;
    let s = s.trim();
    Ok(match s {
        "full" => TreeSet::Full,
        "empty" => TreeSet::Empty,
        "origin" | "root" => TreeSet::Root,
        "spine" => TreeSet::Spine,
        _ => {
            if let Some(rest) = s.strip_prefix("T[y").and_then(|t| t.strip_suffix(']')) {
                TreeSet::SubtreeY(rest.parse()?)
            } else if let Some(rest) = s.strip_prefix("T[x").and_then(|t| t.strip_suffix(']')) {
                TreeSet::SubtreeX(rest.parse()?)
            } else {
                bail!("cannot parse tree set {s}")
            }
        }
    })
}

fn emit(out: Option<&Path>, file: &str, content: &str) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(file), content)?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn emit_json<T: serde::Serialize>(out: Option<&Path>, file: &str, value: &T) -> Result<()> {
    let payload = json!({
        "report": value,
        "timestamp": timestamp(),
    });
    emit(out, file, &serde_json::to_string_pretty(&payload)?)
}
