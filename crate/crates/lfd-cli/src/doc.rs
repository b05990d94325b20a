//! JSON document schemas and conversions to the core types.
//!
//! Canonical form sorts every list (features, actions, states, triggers,
//! transitions, demonstrations), so serializing any parsed-and-rebuilt
//! document is byte-stable.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use lfd_core::lattice::{Conjecture, ParamSetting, ParameterName, RawResult, ResultKind};
use lfd_core::model::{
    Action, DemoKind, Demonstration, EnvState, Feature, Policy, ProblemInstance, Spaces, Step,
    Transition, Variant,
};
use lfd_core::reduce::Graph;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub features: Vec<String>,
    pub actions: Vec<String>,
    /// `"batch"`, `"inc-hist"` or `"inc-nohist"`.
    pub problem: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub demonstrations: Vec<DemoDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyDoc>,
    /// Second policy for the pairwise checks: the reference policy for
    /// `policy-consistency`, the derived policy for `derivability`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy2: Option<PolicyDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_new: Option<DemoDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<LimitsDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoDoc {
    /// `"pos"` or `"neg"`.
    #[serde(rename = "type")]
    pub kind: String,
    pub steps: Vec<StepDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDoc {
    pub state: Vec<String>,
    pub action: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDoc {
    pub transitions: Vec<TransitionDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub trigger: Vec<String>,
    pub action: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultsDocument {
    pub universe: Vec<String>,
    pub results: Vec<RawResultDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawResultDoc {
    /// `"tractable"`, `"intractable"` or `"np-hard"`.
    pub kind: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjecture: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, ParamValueDoc>,
}

/// A parameter cell in a raw result: `"@"` for restricted-but-unbounded, or a
/// constant value the underlying construction fixes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValueDoc {
    Fixed(u64),
    Marker(String),
}

/// Canonical serialization: pretty-printed with a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("document serialization");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
// Parsing into core types
// ---------------------------------------------------------------------------

/// The parsed entities of an instance document, before problem-shape
/// validation.
pub struct ParsedDocument {
    pub problem: String,
    pub spaces: Spaces,
    pub demonstrations: Vec<Demonstration>,
    pub policy: Option<Policy>,
    pub policy2: Option<Policy>,
    pub d_new: Option<Demonstration>,
    pub limits: LimitsDoc,
}

pub fn parse_document(doc: &InstanceDocument) -> Result<ParsedDocument> {
    let features: Vec<Feature> = doc
        .features
        .iter()
        .map(|l| Feature::new(l.clone()).map_err(|e| anyhow!("{e}")))
        .collect::<Result<_>>()?;
    let actions: Vec<Action> = doc
        .actions
        .iter()
        .map(|l| Action::new(l.clone()).map_err(|e| anyhow!("{e}")))
        .collect::<Result<_>>()?;
    let spaces = Spaces::new(features, actions);

    let lookup_feature = |label: &str| -> Result<Feature> {
        let f = Feature::new(label.to_string()).map_err(|e| anyhow!("{e}"))?;
        if !spaces.features().contains(&f) {
            bail!("feature {label:?} is not declared");
        }
        Ok(f)
    };
    let lookup_action = |label: &str| -> Result<Action> {
        let a = Action::new(label.to_string()).map_err(|e| anyhow!("{e}"))?;
        if !spaces.actions().contains(&a) {
            bail!("action {label:?} is not declared");
        }
        Ok(a)
    };

    let parse_demo = |d: &DemoDoc| -> Result<Demonstration> {
        let kind = match d.kind.as_str() {
            "pos" => DemoKind::Positive,
            "neg" => DemoKind::Negative,
            other => bail!("demonstration type must be \"pos\" or \"neg\", got {other:?}"),
        };
        let steps = d
            .steps
            .iter()
            .map(|s| {
                let state = EnvState::new(
                    s.state
                        .iter()
                        .map(|l| lookup_feature(l))
                        .collect::<Result<Vec<_>>>()?,
                )
                .map_err(|e| anyhow!("{e}"))?;
                Ok(Step::new(state, lookup_action(&s.action)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Demonstration::new(kind, steps).map_err(|e| anyhow!("{e}"))
    };

    let parse_policy = |p: &PolicyDoc| -> Result<Policy> {
        let transitions = p
            .transitions
            .iter()
            .map(|t| {
                let trigger = t
                    .trigger
                    .iter()
                    .map(|l| lookup_feature(l))
                    .collect::<Result<Vec<_>>>()?;
                Transition::new(trigger, lookup_action(&t.action)?).map_err(|e| anyhow!("{e}"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Policy::new(transitions))
    };

    let demonstrations = doc
        .demonstrations
        .iter()
        .map(parse_demo)
        .collect::<Result<_>>()?;
    let policy = doc.policy.as_ref().map(parse_policy).transpose()?;
    let policy2 = doc.policy2.as_ref().map(parse_policy).transpose()?;
    let d_new = doc.d_new.as_ref().map(&parse_demo).transpose()?;
    Ok(ParsedDocument {
        problem: doc.problem.clone(),
        spaces,
        demonstrations,
        policy,
        policy2,
        d_new,
        limits: doc.limits.clone().unwrap_or_default(),
    })
}

/// Builds the problem instance a document describes.
pub fn to_instance(doc: &InstanceDocument) -> Result<ProblemInstance> {
    let parsed = parse_document(doc)?;
    let t = parsed.limits.t.context("limits.t is required")?;
    let f_t = parsed.limits.f_t.context("limits.f_t is required")?;
    let inst = match parsed.problem.as_str() {
        "batch" => ProblemInstance::batch(parsed.spaces, parsed.demonstrations, t, f_t)
            .map_err(|e| anyhow!("{e}"))?,
        "inc-hist" => {
            let policy = parsed.policy.context("inc-hist needs a policy")?;
            let d_new = parsed.d_new.context("inc-hist needs d_new")?;
            let c = parsed.limits.c.context("limits.c is required")?;
            ProblemInstance::inc_hist(
                parsed.spaces,
                parsed.demonstrations,
                policy,
                d_new,
                t,
                f_t,
                c,
            )
            .map_err(|e| anyhow!("{e}"))?
        }
        "inc-nohist" => {
            let policy = parsed.policy.context("inc-nohist needs a policy")?;
            let d_new = parsed.d_new.context("inc-nohist needs d_new")?;
            let c = parsed.limits.c.context("limits.c is required")?;
            ProblemInstance::inc_nohist(parsed.spaces, policy, d_new, t, f_t, c)
                .map_err(|e| anyhow!("{e}"))?
        }
        other => bail!("unknown problem {other:?} (expected batch, inc-hist or inc-nohist)"),
    };
    Ok(inst)
}

// ---------------------------------------------------------------------------
// Rendering core types back into documents
// ---------------------------------------------------------------------------

pub fn demo_to_doc(demo: &Demonstration) -> DemoDoc {
    DemoDoc {
        kind: match demo.kind() {
            DemoKind::Positive => "pos".into(),
            DemoKind::Negative => "neg".into(),
        },
        steps: demo
            .steps()
            .iter()
            .map(|s| StepDoc {
                state: s.state.features().iter().map(|f| f.label().into()).collect(),
                action: s.action.label().into(),
            })
            .collect(),
    }
}

pub fn policy_to_doc(policy: &Policy) -> PolicyDoc {
    PolicyDoc {
        transitions: policy
            .transitions()
            .iter()
            .map(|t| TransitionDoc {
                trigger: t.trigger().iter().map(|f| f.label().into()).collect(),
                action: t.action().label().into(),
            })
            .collect(),
    }
}

pub fn instance_to_doc(inst: &ProblemInstance) -> InstanceDocument {
    let (problem, demos, policy, d_new) = match inst.variant() {
        Variant::Batch { demos } => ("batch", demos.clone(), None, None),
        Variant::IncHist {
            demos,
            policy,
            d_new,
        } => ("inc-hist", demos.clone(), Some(policy), Some(d_new)),
        Variant::IncNoHist { policy, d_new } => {
            ("inc-nohist", Vec::new(), Some(policy), Some(d_new))
        }
    };
    let mut demos_sorted = demos;
    demos_sorted.sort();
    let demo_docs: Vec<DemoDoc> = demos_sorted.iter().map(demo_to_doc).collect();
    InstanceDocument {
        features: inst.spaces().features().iter().map(|f| f.label().into()).collect(),
        actions: inst.spaces().actions().iter().map(|a| a.label().into()).collect(),
        problem: problem.into(),
        demonstrations: demo_docs,
        policy: policy.map(policy_to_doc),
        policy2: None,
        d_new: d_new.map(demo_to_doc),
        limits: Some(LimitsDoc {
            t: Some(inst.t()),
            f_t: Some(inst.f_t()),
            c: inst.c(),
        }),
    }
}

pub fn graph_to_doc(graph: &Graph) -> GraphDocument {
    GraphDocument {
        n: graph.vertex_count(),
        edges: graph.edges().iter().map(|&(u, v)| [u, v]).collect(),
    }
}

pub fn graph_from_doc(doc: &GraphDocument) -> Result<Graph> {
    Graph::new(doc.n, doc.edges.iter().map(|e| (e[0], e[1]))).map_err(|e| anyhow!("{e}"))
}

pub fn results_from_doc(doc: &ResultsDocument) -> Result<(Vec<ParameterName>, Vec<RawResult>)> {
    let universe: Vec<ParameterName> = doc.universe.iter().map(ParameterName::new).collect();
    let results = doc
        .results
        .iter()
        .map(|r| {
            let kind = match r.kind.as_str() {
                "tractable" => ResultKind::Tractable,
                "intractable" => ResultKind::Intractable,
                "np-hard" => ResultKind::ClassicalNpHard,
                other => bail!("unknown result kind {other:?}"),
            };
            let conjecture = match r.conjecture.as_deref() {
                None => match kind {
                    ResultKind::ClassicalNpHard => Some(Conjecture::PNeqNp),
                    _ => None,
                },
                Some("P!=NP") => Some(Conjecture::PNeqNp),
                Some("FPT!=W[1]") => Some(Conjecture::FptNeqW1),
                Some(other) => bail!("unknown conjecture {other:?}"),
            };
            let params = r
                .params
                .iter()
                .map(|(name, value)| {
                    let setting = match value {
                        ParamValueDoc::Fixed(v) => ParamSetting::Fixed(*v),
                        ParamValueDoc::Marker(m) if m == "@" => ParamSetting::Unbounded,
                        ParamValueDoc::Marker(m) => {
                            bail!("parameter value must be \"@\" or a number, got {m:?}")
                        }
                    };
                    Ok((ParameterName::new(name), setting))
                })
                .collect::<Result<BTreeMap<_, _>>>()?;
            Ok(RawResult {
                kind,
                label: r.label.clone(),
                conjecture,
                params,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((universe, results))
}
