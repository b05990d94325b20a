//! Command implementations. Input problems surface as `Err` (exit 2);
//! successful runs return the stdout payload with the semantic exit code:
//! 0 found/true, 1 not-found/false, 3 map conflicts.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde_json::json;

use lfd_core::lattice::{
    advise, detect_conflicts, propagate, render_map, MapFormat, ParameterName,
};
use lfd_core::model::{derivation_distance, DerivationDistance, ProblemInstance};
use lfd_core::reduce::{
    gen_graph, reduce_to_batch, reduce_to_inc_hist_negative, reduce_to_inc_hist_positive,
    reduce_to_inc_nohist_negative, reduce_to_inc_nohist_positive, GraphModel, ReductionArtifact,
};
use lfd_core::solve::{solve, solve_min_t, SolveError, SolveStats, SolveStrategy, StrategyKind};

use crate::doc::{
    graph_from_doc, graph_to_doc, instance_to_doc, parse_document, policy_to_doc,
    results_from_doc, to_canonical_json, to_instance, GraphDocument, InstanceDocument,
    ResultsDocument,
};

pub struct CmdOutput {
    pub exit: i32,
    pub stdout: String,
}

impl CmdOutput {
    fn ok(stdout: String) -> Self {
        CmdOutput { exit: 0, stdout }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

/// Default seed: `LFD_SEED` from the environment, else 0.
pub fn default_seed(explicit: Option<u64>) -> Result<u64> {
    if let Some(seed) = explicit {
        return Ok(seed);
    }
    match std::env::var("LFD_SEED") {
        Ok(text) => text
            .parse()
            .map_err(|_| anyhow!("LFD_SEED must be an unsigned integer, got {text:?}")),
        Err(_) => Ok(0),
    }
}

fn stats_json(stats: &SolveStats) -> serde_json::Value {
    json!({
        "candidates": stats.candidates,
        "elapsed_ms": stats.elapsed.as_secs_f64() * 1e3,
    })
}

fn map_solve_err(e: SolveError) -> anyhow::Error {
    anyhow!("{e}")
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_solve(
    input: &Path,
    kind: StrategyKind,
    minimize_t: bool,
    restrict_features: bool,
    jobs: Option<usize>,
    t_max: Option<usize>,
) -> Result<CmdOutput> {
    let document: InstanceDocument = read_json(input)?;
    let inst = to_instance(&document)?;
    let strat = SolveStrategy {
        kind,
        restrict_features,
        check_preconditions: true,
        jobs: jobs
            .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
            .unwrap_or(1),
    };
    let (result, stats) = if minimize_t {
        let out = solve_min_t(&inst, &strat, t_max).map_err(map_solve_err)?;
        (out.result, out.stats)
    } else {
        let out = solve(&inst, &strat).map_err(map_solve_err)?;
        (out.result.map(|p| (p.clone(), p.len())), out.stats)
    };
    match result {
        Some((policy, t_used)) => {
            let payload = json!({
                "result": "policy",
                "policy": policy_to_doc(&policy),
                "t_used": t_used,
                "stats": stats_json(&stats),
            });
            Ok(CmdOutput::ok(format!("{payload}\n")))
        }
        None => {
            let payload = json!({
                "result": "bottom",
                "stats": stats_json(&stats),
            });
            Ok(CmdOutput {
                exit: 1,
                stdout: format!("{payload}\n"),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckWhat {
    Validity,
    Consistency,
    PolicyConsistency,
    Derivability,
}

pub fn cmd_check(input: &Path, what: CheckWhat) -> Result<CmdOutput> {
    let document: InstanceDocument = read_json(input)?;
    let parsed = parse_document(&document)?;
    let (holds, payload) = match what {
        CheckWhat::Validity => {
            let policy = parsed.policy.as_ref().context("validity needs a policy")?;
            let holds = policy.is_valid_for(&parsed.demonstrations);
            (holds, json!({ "result": holds }))
        }
        CheckWhat::Consistency => {
            let policy = parsed.policy.as_ref().context("consistency needs a policy")?;
            let holds = policy.consistent_with_all(&parsed.demonstrations);
            (holds, json!({ "result": holds }))
        }
        CheckWhat::PolicyConsistency => {
            let candidate = parsed
                .policy
                .as_ref()
                .context("policy-consistency needs a policy (the candidate)")?;
            let reference = parsed
                .policy2
                .as_ref()
                .context("policy-consistency needs policy2 (the reference)")?;
            let demo = parsed
                .d_new
                .as_ref()
                .context("policy-consistency needs d_new")?;
            let holds = candidate.consistent_modulo(reference, demo);
            (holds, json!({ "result": holds }))
        }
        CheckWhat::Derivability => {
            let old = parsed
                .policy
                .as_ref()
                .context("derivability needs a policy (the original)")?;
            let new = parsed
                .policy2
                .as_ref()
                .context("derivability needs policy2 (the derived)")?;
            let distance = derivation_distance(old, new);
            let holds = match parsed.limits.c {
                Some(c) => distance.is_within(c),
                None => distance.is_finite(),
            };
            let distance_json = match distance {
                DerivationDistance::Finite(d) => json!(d),
                DerivationDistance::Infinite => json!("infinity"),
            };
            (holds, json!({ "result": holds, "distance": distance_json }))
        }
    };
    Ok(CmdOutput {
        exit: if holds { 0 } else { 1 },
        stdout: format!("{payload}\n"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaArg {
    Bat,
    IncHistPos,
    IncHistNeg,
    IncNoHistPos,
    IncNoHistNeg,
}

pub fn cmd_reduce(graph_path: &Path, lemma: LemmaArg, k: usize, seed: Option<u64>) -> Result<CmdOutput> {
    let gdoc: GraphDocument = read_json(graph_path)?;
    let graph = graph_from_doc(&gdoc)?;
    let seed = default_seed(seed)?;
    let artifact: ReductionArtifact = match lemma {
        LemmaArg::Bat => reduce_to_batch(&graph, k),
        LemmaArg::IncHistPos => reduce_to_inc_hist_positive(&graph, k, seed),
        LemmaArg::IncHistNeg => reduce_to_inc_hist_negative(&graph, k, seed),
        LemmaArg::IncNoHistPos => reduce_to_inc_nohist_positive(&graph, k),
        LemmaArg::IncNoHistNeg => reduce_to_inc_nohist_negative(&graph, k),
    }
    .map_err(|e| anyhow!("{e}"))?;
    Ok(CmdOutput::ok(to_canonical_json(&instance_to_doc(
        &artifact.instance,
    ))))
}

pub enum ModelArg {
    Gnp { n: usize, edge_prob: f64 },
    Grid3 { rows: usize, cols: usize, keep_prob: f64 },
}

pub fn cmd_gen(model: ModelArg, seed: Option<u64>) -> Result<CmdOutput> {
    let seed = default_seed(seed)?;
    let model = match model {
        ModelArg::Gnp { n, edge_prob } => GraphModel::UniformRandom { n, edge_prob },
        ModelArg::Grid3 {
            rows,
            cols,
            keep_prob,
        } => GraphModel::GridSubgraph {
            rows,
            cols,
            keep_prob,
        },
    };
    let graph = gen_graph(&model, seed).map_err(|e| anyhow!("{e}"))?;
    Ok(CmdOutput::ok(to_canonical_json(&graph_to_doc(&graph))))
}

fn parse_param_list(text: &str) -> Vec<ParameterName> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(ParameterName::new)
        .collect()
}

/// Default grid split: the first half of the universe as rows, the rest as
/// columns.
fn default_split(universe: &[ParameterName]) -> (Vec<ParameterName>, Vec<ParameterName>) {
    let mid = universe.len().div_ceil(2);
    (universe[..mid].to_vec(), universe[mid..].to_vec())
}

pub fn cmd_map(
    results_path: &Path,
    rows: Option<&str>,
    cols: Option<&str>,
    format: MapFormat,
) -> Result<CmdOutput> {
    let rdoc: ResultsDocument = read_json(results_path)?;
    let (universe, results) = results_from_doc(&rdoc)?;
    let map = propagate(&results, &universe).map_err(|e| anyhow!("{e}"))?;
    let conflicts = detect_conflicts(&map);
    if !conflicts.is_empty() {
        let report = json!({
            "conflicts": conflicts
                .iter()
                .map(|(params, provenance)| {
                    json!({
                        "params": params.iter().map(|p| p.id()).collect::<Vec<_>>(),
                        "provenance": provenance,
                    })
                })
                .collect::<Vec<_>>(),
        });
        return Ok(CmdOutput {
            exit: 3,
            stdout: format!("{report}\n"),
        });
    }
    let (row_params, col_params) = match (rows, cols) {
        (Some(r), Some(c)) => (parse_param_list(r), parse_param_list(c)),
        (None, None) => default_split(&universe),
        (Some(r), None) => {
            let row_params = parse_param_list(r);
            let col_params = universe
                .iter()
                .filter(|p| !row_params.contains(p))
                .cloned()
                .collect();
            (row_params, col_params)
        }
        (None, Some(c)) => {
            let col_params = parse_param_list(c);
            let row_params = universe
                .iter()
                .filter(|p| !col_params.contains(p))
                .cloned()
                .collect();
            (row_params, col_params)
        }
    };
    let rendered =
        render_map(&map, &row_params, &col_params, format).map_err(|e| anyhow!("{e}"))?;
    Ok(CmdOutput::ok(rendered))
}

fn parse_thresholds(text: &str) -> Result<BTreeMap<ParameterName, u64>> {
    let mut thresholds = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .with_context(|| format!("threshold {part:?} must look like name=value"))?;
        let value: u64 = value
            .trim()
            .parse()
            .with_context(|| format!("threshold value in {part:?} must be an unsigned integer"))?;
        thresholds.insert(ParameterName::new(name.trim()), value);
    }
    if thresholds.is_empty() {
        bail!("no thresholds given");
    }
    Ok(thresholds)
}

pub fn cmd_advise(
    instance_path: &Path,
    results_path: &Path,
    thresholds: &str,
) -> Result<CmdOutput> {
    let document: InstanceDocument = read_json(instance_path)?;
    let inst: ProblemInstance = to_instance(&document)?;
    let rdoc: ResultsDocument = read_json(results_path)?;
    let (universe, results) = results_from_doc(&rdoc)?;
    let map = propagate(&results, &universe).map_err(|e| anyhow!("{e}"))?;
    let thresholds = parse_thresholds(thresholds)?;
    let report = advise(&inst, &map, &thresholds);
    let payload = json!({
        "parameters": report
            .values
            .iter()
            .map(|(name, value)| json!({ "name": name.id(), "value": value }))
            .collect::<Vec<_>>(),
        "small": report.small.iter().map(|p| p.id()).collect::<Vec<_>>(),
        "status": report.status.as_str(),
        "conjecture": report.conjecture.map(|c| c.as_str()),
        "provenance": report.provenance,
        "np_hard_note": report.np_hard_note,
    });
    Ok(CmdOutput::ok(format!("{payload}\n")))
}

/// Round-trips a document through the core types into canonical form.
pub fn canonicalize_instance(doc: &InstanceDocument) -> Result<InstanceDocument> {
    let inst = to_instance(doc)?;
    let mut canonical = instance_to_doc(&inst);
    canonical.policy2 = doc.policy2.clone();
    Ok(canonical)
}
