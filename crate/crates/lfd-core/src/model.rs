//! Domain entities and the decidable predicates over them.
//!
//! Everything in this module is immutable after construction and every
//! operation is pure, so values can be shared freely across threads.
//! Canonical ordering is used throughout: features and actions sort by label,
//! transitions by `(trigger, action)`, so all derived collections iterate in a
//! deterministic order.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::assignment;

/// Errors raised by constructors and predicate preconditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    /// A feature or action label was empty.
    EmptyLabel,
    /// An environment state carried no features.
    EmptyState,
    /// A transition trigger carried no features.
    EmptyTrigger,
    /// A demonstration carried no steps.
    EmptyDemonstration,
    /// A limit that must be a positive non-zero integer was zero.
    ZeroLimit(&'static str),
    /// A feature was used that is not part of the declared feature space.
    UnknownFeature(String),
    /// An action was used that is not part of the declared action space.
    UnknownAction(String),
    /// The new demonstration of an incremental instance already occurs in the
    /// history.
    NewDemonstrationInHistory,
    /// Merging requires every input demonstration to be positive with exactly
    /// one step.
    NotAPositiveSingleton,
    /// Merging requires at least one demonstration.
    NothingToMerge,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::EmptyLabel => write!(f, "labels must be non-empty"),
            ModelError::EmptyState => write!(f, "environment states must sense at least one feature"),
            ModelError::EmptyTrigger => write!(f, "transition triggers must be non-empty"),
            ModelError::EmptyDemonstration => write!(f, "demonstrations must have at least one step"),
            ModelError::ZeroLimit(name) => write!(f, "limit {name} must be a positive non-zero integer"),
            ModelError::UnknownFeature(l) => write!(f, "feature {l:?} is not in the declared feature space"),
            ModelError::UnknownAction(l) => write!(f, "action {l:?} is not in the declared action space"),
            ModelError::NewDemonstrationInHistory => {
                write!(f, "the new demonstration must not occur in the history")
            }
            ModelError::NotAPositiveSingleton => {
                write!(f, "merge requires positive single-step demonstrations")
            }
            ModelError::NothingToMerge => write!(f, "merge requires at least one demonstration"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ModelError {}

/// A sensed environmental feature, identified by its label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Feature(String);

impl Feature {
    pub fn new(label: impl Into<String>) -> Result<Self, ModelError> {
        let label = label.into();
        if label.is_empty() {
            return Err(ModelError::EmptyLabel);
        }
        Ok(Feature(label))
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An action a policy can produce, identified by its label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action(String);

impl Action {
    pub fn new(label: impl Into<String>) -> Result<Self, ModelError> {
        let label = label.into();
        if label.is_empty() {
            return Err(ModelError::EmptyLabel);
        }
        Ok(Action(label))
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The declared feature and action spaces an instance is built over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spaces {
    features: BTreeSet<Feature>,
    actions: BTreeSet<Action>,
}

impl Spaces {
    pub fn new(
        features: impl IntoIterator<Item = Feature>,
        actions: impl IntoIterator<Item = Action>,
    ) -> Self {
        Spaces {
            features: features.into_iter().collect(),
            actions: actions.into_iter().collect(),
        }
    }

    pub fn features(&self) -> &BTreeSet<Feature> {
        &self.features
    }

    pub fn actions(&self) -> &BTreeSet<Action> {
        &self.actions
    }
}

/// An environment state: the non-empty subset of features sensed as present.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EnvState(BTreeSet<Feature>);

impl EnvState {
    pub fn new(features: impl IntoIterator<Item = Feature>) -> Result<Self, ModelError> {
        let features: BTreeSet<Feature> = features.into_iter().collect();
        if features.is_empty() {
            return Err(ModelError::EmptyState);
        }
        Ok(EnvState(features))
    }

    pub fn features(&self) -> &BTreeSet<Feature> {
        &self.0
    }
}

/// Whether a demonstration prescribes or forbids its state/action pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DemoKind {
    Positive,
    Negative,
}

/// One observed environment-state / action pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub state: EnvState,
    pub action: Action,
}

impl Step {
    pub fn new(state: EnvState, action: Action) -> Self {
        Step { state, action }
    }
}

/// A typed, non-empty sequence of environment-state / action pairs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Demonstration {
    kind: DemoKind,
    steps: Vec<Step>,
}

impl Demonstration {
    pub fn new(kind: DemoKind, steps: Vec<Step>) -> Result<Self, ModelError> {
        if steps.is_empty() {
            return Err(ModelError::EmptyDemonstration);
        }
        Ok(Demonstration { kind, steps })
    }

    pub fn kind(&self) -> DemoKind {
        self.kind
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn is_positive(&self) -> bool {
        self.kind == DemoKind::Positive
    }
}

/// A transition `(trigger, action)`: fires on any state that contains every
/// trigger feature.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    trigger: BTreeSet<Feature>,
    action: Action,
}

impl Transition {
    pub fn new(
        trigger: impl IntoIterator<Item = Feature>,
        action: Action,
    ) -> Result<Self, ModelError> {
        let trigger: BTreeSet<Feature> = trigger.into_iter().collect();
        if trigger.is_empty() {
            return Err(ModelError::EmptyTrigger);
        }
        Ok(Transition { trigger, action })
    }

    pub fn trigger(&self) -> &BTreeSet<Feature> {
        &self.trigger
    }

    pub fn action(&self) -> &Action {
        &self.action
    }

    /// True iff this transition fires on `state`, i.e. the trigger is a subset
    /// of the sensed features.
    pub fn triggers_on(&self, state: &EnvState) -> bool {
        self.trigger.is_subset(state.features())
    }
}

/// A single-state transducer: an unordered set of transitions. Duplicate
/// transitions collapse on construction; the empty policy is allowed and
/// produces no action on any state.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Policy {
    transitions: BTreeSet<Transition>,
}

impl Policy {
    pub fn new(transitions: impl IntoIterator<Item = Transition>) -> Self {
        Policy {
            transitions: transitions.into_iter().collect(),
        }
    }

    pub fn empty() -> Self {
        Policy::default()
    }

    pub fn transitions(&self) -> &BTreeSet<Transition> {
        &self.transitions
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Maximum trigger size over all transitions (0 for the empty policy).
    pub fn max_trigger_size(&self) -> usize {
        self.transitions
            .iter()
            .map(|tr| tr.trigger.len())
            .max()
            .unwrap_or(0)
    }

    fn run_on_features(&self, features: &BTreeSet<Feature>) -> BTreeSet<Action> {
        self.transitions
            .iter()
            .filter(|tr| tr.trigger.is_subset(features))
            .map(|tr| tr.action.clone())
            .collect()
    }

    /// The set of actions produced on `state`: one per firing transition,
    /// collapsed as a set. Empty means the policy is not defined for `state`.
    pub fn run_on(&self, state: &EnvState) -> BTreeSet<Action> {
        self.run_on_features(state.features())
    }

    /// True iff on every state occurring in any step of any demonstration the
    /// firing transitions agree on at most one action.
    pub fn is_valid_for(&self, demos: &[Demonstration]) -> bool {
        demos
            .iter()
            .flat_map(|d| d.steps())
            .all(|step| self.run_on(&step.state).len() <= 1)
    }

    /// Demonstration consistency: on every positive step the policy produces
    /// exactly the demanded action, and on every negative step it never
    /// produces the forbidden one.
    pub fn consistent_with(&self, demo: &Demonstration) -> bool {
        demo.steps().iter().all(|step| {
            let produced = self.run_on(&step.state);
            match demo.kind() {
                DemoKind::Positive => produced.len() == 1 && produced.contains(&step.action),
                DemoKind::Negative => !produced.contains(&step.action),
            }
        })
    }

    pub fn consistent_with_all(&self, demos: &[Demonstration]) -> bool {
        demos.iter().all(|d| self.consistent_with(d))
    }

    /// Policy-policy consistency modulo a demonstration. `self` is the
    /// candidate that must replicate `reference` except where `demo` demands
    /// or forbids actions:
    ///
    /// 1. on every trigger set of `reference` that is not a subset of any
    ///    state in `demo`, candidate and reference produce the same action
    ///    set; and
    /// 2. on every step `(s, a)` of `demo`: if `demo` is positive the
    ///    candidate produces exactly `{a}`; if negative it either reproduces
    ///    the reference's action set on `s` (when that set excludes `a`) or
    ///    produces nothing.
    pub fn consistent_modulo(&self, reference: &Policy, demo: &Demonstration) -> bool {
        for tr in reference.transitions() {
            let shadowed = demo
                .steps()
                .iter()
                .any(|step| tr.trigger.is_subset(step.state.features()));
            if shadowed {
                continue;
            }
            if self.run_on_features(&tr.trigger) != reference.run_on_features(&tr.trigger) {
                return false;
            }
        }
        for step in demo.steps() {
            let produced = self.run_on(&step.state);
            let ok = match demo.kind() {
                DemoKind::Positive => produced.len() == 1 && produced.contains(&step.action),
                DemoKind::Negative => {
                    if produced.is_empty() {
                        true
                    } else {
                        let reference_run = reference.run_on(&step.state);
                        !reference_run.contains(&step.action) && produced == reference_run
                    }
                }
            };
            if !ok {
                return false;
            }
        }
        true
    }
}

/// Number of changes needed to derive one policy from another, or infinity
/// when no change sequence exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DerivationDistance {
    Finite(usize),
    Infinite,
}

impl DerivationDistance {
    pub fn is_within(&self, limit: usize) -> bool {
        match self {
            DerivationDistance::Finite(d) => *d <= limit,
            DerivationDistance::Infinite => false,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, DerivationDistance::Finite(_))
    }
}

impl fmt::Display for DerivationDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivationDistance::Finite(d) => write!(f, "{d}"),
            DerivationDistance::Infinite => write!(f, "infinity"),
        }
    }
}

/// Minimum number of changes (substitute a transition's trigger, substitute
/// its action, or delete a transition; no insertions) transforming `old` into
/// `new`.
///
/// Since insertions are not allowed the distance is infinite whenever `new`
/// has more transitions than `old`. Otherwise each transition of `new` must
/// arise from a distinct transition of `old` (0, 1, or 2 field substitutions)
/// and every unmatched old transition costs one deletion; the minimum is a
/// min-cost injective assignment.
pub fn derivation_distance(old: &Policy, new: &Policy) -> DerivationDistance {
    if new.len() > old.len() {
        return DerivationDistance::Infinite;
    }
    let olds: Vec<&Transition> = old.transitions().iter().collect();
    let news: Vec<&Transition> = new.transitions().iter().collect();
    let cost: Vec<Vec<u64>> = news
        .iter()
        .map(|n| {
            olds.iter()
                .map(|o| {
                    u64::from(n.trigger != o.trigger) + u64::from(n.action != o.action)
                })
                .collect()
        })
        .collect();
    let substitutions = assignment::min_cost_assignment(&cost) as usize;
    DerivationDistance::Finite(substitutions + (old.len() - new.len()))
}

/// Merges positive single-step demonstrations into one positive demonstration
/// whose steps are all input steps in canonical order. Consistency of any
/// policy is invariant under this merge (and under the reverse split).
pub fn merge_positive_singletons(demos: &[Demonstration]) -> Result<Demonstration, ModelError> {
    if demos.is_empty() {
        return Err(ModelError::NothingToMerge);
    }
    let mut steps = Vec::with_capacity(demos.len());
    for demo in demos {
        if demo.kind() != DemoKind::Positive || demo.steps().len() != 1 {
            return Err(ModelError::NotAPositiveSingleton);
        }
        steps.push(demo.steps()[0].clone());
    }
    steps.sort();
    Demonstration::new(DemoKind::Positive, steps)
}

/// The instance parameters: sizes of the spaces, shape of the demonstrations,
/// and whichever limits the instance carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParameterVector {
    /// Number of features in the declared feature space.
    pub features: usize,
    /// Number of actions in the declared action space.
    pub actions: usize,
    /// Number of demonstrations, counting the new one where present.
    pub demos: usize,
    /// Maximum number of steps in any demonstration.
    pub max_demo_len: usize,
    /// Maximum number of features in any demonstration state.
    pub max_state_size: usize,
    pub t: Option<usize>,
    pub f_t: Option<usize>,
    pub c: Option<usize>,
}

/// The three problem shapes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Variant {
    /// Infer a policy from a demonstration set alone.
    Batch { demos: Vec<Demonstration> },
    /// Revise a policy that is valid for and consistent with a retained
    /// history so it also covers a new demonstration.
    IncHist {
        demos: Vec<Demonstration>,
        policy: Policy,
        d_new: Demonstration,
    },
    /// Revise a policy against a new demonstration when the history is gone;
    /// the revision must stay consistent with the old policy modulo the new
    /// demonstration.
    IncNoHist { policy: Policy, d_new: Demonstration },
}

/// A fully validated problem instance: a variant plus the declared spaces and
/// the limits `t` (max transitions), `f_t` (max trigger size) and, for the
/// incremental variants, `c` (max changes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    spaces: Spaces,
    variant: Variant,
    t: usize,
    f_t: usize,
    c: Option<usize>,
}

impl ProblemInstance {
    pub fn batch(
        spaces: Spaces,
        demos: Vec<Demonstration>,
        t: usize,
        f_t: usize,
    ) -> Result<Self, ModelError> {
        let inst = ProblemInstance {
            spaces,
            variant: Variant::Batch { demos },
            t,
            f_t,
            c: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn inc_hist(
        spaces: Spaces,
        demos: Vec<Demonstration>,
        policy: Policy,
        d_new: Demonstration,
        t: usize,
        f_t: usize,
        c: usize,
    ) -> Result<Self, ModelError> {
        if demos.contains(&d_new) {
            return Err(ModelError::NewDemonstrationInHistory);
        }
        let inst = ProblemInstance {
            spaces,
            variant: Variant::IncHist {
                demos,
                policy,
                d_new,
            },
            t,
            f_t,
            c: Some(c),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn inc_nohist(
        spaces: Spaces,
        policy: Policy,
        d_new: Demonstration,
        t: usize,
        f_t: usize,
        c: usize,
    ) -> Result<Self, ModelError> {
        let inst = ProblemInstance {
            spaces,
            variant: Variant::IncNoHist { policy, d_new },
            t,
            f_t,
            c: Some(c),
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.t == 0 {
            return Err(ModelError::ZeroLimit("t"));
        }
        if self.f_t == 0 {
            return Err(ModelError::ZeroLimit("f_t"));
        }
        if self.c == Some(0) {
            return Err(ModelError::ZeroLimit("c"));
        }
        for demo in self.all_demos() {
            for step in demo.steps() {
                for feature in step.state.features() {
                    if !self.spaces.features.contains(feature) {
                        return Err(ModelError::UnknownFeature(feature.label().to_string()));
                    }
                }
                if !self.spaces.actions.contains(&step.action) {
                    return Err(ModelError::UnknownAction(step.action.label().to_string()));
                }
            }
        }
        if let Some(policy) = self.given_policy() {
            for tr in policy.transitions() {
                for feature in tr.trigger() {
                    if !self.spaces.features.contains(feature) {
                        return Err(ModelError::UnknownFeature(feature.label().to_string()));
                    }
                }
                if !self.spaces.actions.contains(tr.action()) {
                    return Err(ModelError::UnknownAction(tr.action().label().to_string()));
                }
            }
        }
        Ok(())
    }

    pub fn spaces(&self) -> &Spaces {
        &self.spaces
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn f_t(&self) -> usize {
        self.f_t
    }

    pub fn c(&self) -> Option<usize> {
        self.c
    }

    /// The same instance with a different transition limit.
    pub fn with_transition_limit(&self, t: usize) -> Result<Self, ModelError> {
        if t == 0 {
            return Err(ModelError::ZeroLimit("t"));
        }
        let mut inst = self.clone();
        inst.t = t;
        Ok(inst)
    }

    /// The demonstration history, when the variant carries one.
    pub fn demos(&self) -> &[Demonstration] {
        match &self.variant {
            Variant::Batch { demos } | Variant::IncHist { demos, .. } => demos,
            Variant::IncNoHist { .. } => &[],
        }
    }

    /// The given policy of the incremental variants.
    pub fn given_policy(&self) -> Option<&Policy> {
        match &self.variant {
            Variant::Batch { .. } => None,
            Variant::IncHist { policy, .. } | Variant::IncNoHist { policy, .. } => Some(policy),
        }
    }

    pub fn d_new(&self) -> Option<&Demonstration> {
        match &self.variant {
            Variant::Batch { .. } => None,
            Variant::IncHist { d_new, .. } | Variant::IncNoHist { d_new, .. } => Some(d_new),
        }
    }

    /// All demonstrations of the instance, the new one included.
    pub fn all_demos(&self) -> impl Iterator<Item = &Demonstration> {
        self.demos().iter().chain(self.d_new())
    }

    /// Extracts the instance parameters.
    pub fn parameters(&self) -> ParameterVector {
        let mut demos = 0;
        let mut max_demo_len = 0;
        let mut max_state_size = 0;
        for demo in self.all_demos() {
            demos += 1;
            max_demo_len = max_demo_len.max(demo.steps().len());
            for step in demo.steps() {
                max_state_size = max_state_size.max(step.state.features().len());
            }
        }
        ParameterVector {
            features: self.spaces.features.len(),
            actions: self.spaces.actions.len(),
            demos,
            max_demo_len,
            max_state_size,
            t: Some(self.t),
            f_t: Some(self.f_t),
            c: self.c,
        }
    }
}
