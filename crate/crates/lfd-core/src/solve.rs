//! Exact solvers for the batch and incremental inference problems.
//!
//! Two interchangeable strategies are provided. [`StrategyKind::ReferenceEnumeration`]
//! generates every policy with at most `t` transitions over the admissible
//! transition universe in canonical order and tests each one; it is the
//! fixed-parameter algorithm taken literally and serves as the ground truth.
//! [`StrategyKind::Backtracking`] searches the same space as a covering
//! problem with conflict, coverage and edit-budget pruning; it must never be
//! trusted without the reference-equivalence suite.
//!
//! Both strategies return the canonically least solution (fewest transitions,
//! then lexicographic by transition order), so the outcome is independent of
//! strategy, scheduling and worker count.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::time::Duration;

use crate::assignment;
#[cfg(debug_assertions)]
use crate::model::derivation_distance;
use crate::model::{
    Action, DemoKind, Demonstration, Feature, ModelError, Policy, ProblemInstance, Spaces,
    Transition, Variant,
};

/// How the search is carried out. Both kinds return identical outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    /// Generate-and-test over all policies with at most `t` transitions.
    ReferenceEnumeration,
    /// Pruned depth-first search over the same candidate space.
    Backtracking,
}

/// Solver configuration.
#[derive(Debug, Clone)]
pub struct SolveStrategy {
    pub kind: StrategyKind,
    /// Restrict transition triggers to features that occur in the instance's
    /// demonstrations (and given policy, for the history variant). Sound for
    /// the batch and with-history problems; rejected for the no-history
    /// problem, which has no demonstration set to restrict against.
    pub restrict_features: bool,
    /// Verify that the given policy of a with-history instance is valid for
    /// and consistent with its history before solving. On by default; turn
    /// off only for adversarial testing.
    pub check_preconditions: bool,
    /// Number of parallel workers; 1 means sequential. The returned outcome
    /// does not depend on this.
    pub jobs: usize,
}

impl Default for SolveStrategy {
    fn default() -> Self {
        SolveStrategy {
            kind: StrategyKind::Backtracking,
            restrict_features: false,
            check_preconditions: true,
            jobs: 1,
        }
    }
}

impl SolveStrategy {
    pub fn reference() -> Self {
        SolveStrategy {
            kind: StrategyKind::ReferenceEnumeration,
            ..SolveStrategy::default()
        }
    }

    pub fn backtracking() -> Self {
        SolveStrategy::default()
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs.max(1);
        self
    }

    pub fn with_restricted_features(mut self, on: bool) -> Self {
        self.restrict_features = on;
        self
    }
}

/// Search effort counters. `candidates` counts tested policies for the
/// reference strategy and visited search nodes for backtracking; it is
/// informational and may vary across runs when `jobs > 1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub candidates: u64,
    pub elapsed: Duration,
}

/// A solved instance: the canonically least solution, or `None` when no
/// policy satisfies the instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub result: Option<Policy>,
    pub stats: SolveStats,
}

/// Outcome of the minimal-transition-budget search: the policy together with
/// the smallest `t` for which the instance is solvable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinTOutcome {
    pub result: Option<(Policy, usize)>,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveError {
    Model(ModelError),
    /// The given policy of a with-history instance is not valid for or not
    /// consistent with its demonstration history.
    PolicyPrecondition,
    /// `restrict_features` was requested on an instance without a
    /// demonstration set.
    RestrictFeaturesUnavailable,
    /// Exact search interns feature sets into machine words and supports at
    /// most 64 relevant features.
    TooManyFeatures(usize),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Model(e) => write!(f, "malformed instance: {e}"),
            SolveError::PolicyPrecondition => {
                write!(f, "given policy is not valid for and consistent with the history")
            }
            SolveError::RestrictFeaturesUnavailable => {
                write!(f, "feature restriction needs a demonstration set to restrict against")
            }
            SolveError::TooManyFeatures(n) => {
                write!(f, "instance involves {n} features; exact search supports at most 64")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SolveError {}

impl From<ModelError> for SolveError {
    fn from(e: ModelError) -> Self {
        SolveError::Model(e)
    }
}

/// The feature set the universe is restricted to when
/// [`SolveStrategy::restrict_features`] is on; `None` for the no-history
/// variant, which has no demonstration set.
pub fn restricted_feature_set(inst: &ProblemInstance) -> Option<BTreeSet<Feature>> {
    match inst.variant() {
        Variant::Batch { .. } => {
            let mut set = BTreeSet::new();
            collect_demo_features(inst, &mut set);
            Some(set)
        }
        Variant::IncHist { policy, .. } => {
            let mut set = BTreeSet::new();
            collect_demo_features(inst, &mut set);
            for tr in policy.transitions() {
                set.extend(tr.trigger().iter().cloned());
            }
            Some(set)
        }
        Variant::IncNoHist { .. } => None,
    }
}

fn collect_demo_features(inst: &ProblemInstance, set: &mut BTreeSet<Feature>) {
    for demo in inst.all_demos() {
        for step in demo.steps() {
            set.extend(step.state.features().iter().cloned());
        }
    }
}

/// Solves an instance with the given strategy.
pub fn solve(inst: &ProblemInstance, strat: &SolveStrategy) -> Result<SolveOutcome, SolveError> {
    let clock = Clock::start();
    if strat.check_preconditions {
        if let Variant::IncHist { demos, policy, .. } = inst.variant() {
            if !policy.is_valid_for(demos) || !policy.consistent_with_all(demos) {
                return Err(SolveError::PolicyPrecondition);
            }
        }
    }
    let search = Search::compile(inst, strat)?;
    let jobs = strat.jobs.max(1);
    let (selection, candidates) = match strat.kind {
        StrategyKind::ReferenceEnumeration => search.run_reference(jobs),
        StrategyKind::Backtracking => search.run_backtracking(jobs),
    };
    let result = selection.map(|sel| search.materialize(&sel));
    #[cfg(debug_assertions)]
    if let Some(policy) = &result {
        debug_verify(inst, policy);
    }
    Ok(SolveOutcome {
        result,
        stats: SolveStats {
            candidates,
            elapsed: clock.elapsed(),
        },
    })
}

/// Finds the smallest transition budget `t` for which the instance is
/// solvable, trying `t = 1..=t_max`. Without an explicit cap, batch instances
/// default to the number of distinct demonstration states (more transitions
/// are never needed) and incremental instances to the size of the given
/// policy (no insertions are possible).
pub fn solve_min_t(
    inst: &ProblemInstance,
    strat: &SolveStrategy,
    t_max: Option<usize>,
) -> Result<MinTOutcome, SolveError> {
    let clock = Clock::start();
    let cap = t_max.unwrap_or_else(|| default_t_cap(inst));
    let mut candidates = 0u64;
    for t in 1..=cap {
        let trial = inst.with_transition_limit(t)?;
        let out = solve(&trial, strat)?;
        candidates += out.stats.candidates;
        if let Some(policy) = out.result {
            return Ok(MinTOutcome {
                result: Some((policy, t)),
                stats: SolveStats {
                    candidates,
                    elapsed: clock.elapsed(),
                },
            });
        }
    }
    Ok(MinTOutcome {
        result: None,
        stats: SolveStats {
            candidates,
            elapsed: clock.elapsed(),
        },
    })
}

/// Minimal-budget search over a bare demonstration set.
pub fn solve_batch_min_t(
    spaces: &Spaces,
    demos: &[Demonstration],
    f_t: usize,
    strat: &SolveStrategy,
    t_max: Option<usize>,
) -> Result<MinTOutcome, SolveError> {
    let inst = ProblemInstance::batch(spaces.clone(), demos.to_vec(), 1, f_t)?;
    solve_min_t(&inst, strat, t_max)
}

fn default_t_cap(inst: &ProblemInstance) -> usize {
    match inst.variant() {
        Variant::Batch { demos } => {
            let states: BTreeSet<_> = demos
                .iter()
                .flat_map(|d| d.steps())
                .map(|s| s.state.clone())
                .collect();
            states.len().max(1)
        }
        Variant::IncHist { policy, .. } | Variant::IncNoHist { policy, .. } => policy.len().max(1),
    }
}

#[cfg(debug_assertions)]
fn debug_verify(inst: &ProblemInstance, policy: &Policy) {
    assert!(policy.len() <= inst.t());
    assert!(policy.max_trigger_size() <= inst.f_t());
    match inst.variant() {
        Variant::Batch { demos } => {
            assert!(policy.is_valid_for(demos) && policy.consistent_with_all(demos));
        }
        Variant::IncHist { policy: given, .. } => {
            let all: Vec<Demonstration> = inst.all_demos().cloned().collect();
            assert!(policy.is_valid_for(&all) && policy.consistent_with_all(&all));
            assert!(derivation_distance(given, policy).is_within(inst.c().unwrap()));
        }
        Variant::IncNoHist { policy: given, d_new } => {
            assert!(policy.consistent_modulo(given, d_new));
            assert!(derivation_distance(given, policy).is_within(inst.c().unwrap()));
        }
    }
}

struct Clock(#[cfg(feature = "std")] std::time::Instant);

impl Clock {
    fn start() -> Self {
        Clock(
            #[cfg(feature = "std")]
            std::time::Instant::now(),
        )
    }

    fn elapsed(&self) -> Duration {
        #[cfg(feature = "std")]
        {
            self.0.elapsed()
        }
        #[cfg(not(feature = "std"))]
        {
            Duration::ZERO
        }
    }
}

// ---------------------------------------------------------------------------
// Interned search space
// ---------------------------------------------------------------------------

/// A candidate transition: trigger as a feature bitmask plus an action index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Cand {
    trigger: u64,
    action: usize,
}

fn fires(cand: &Cand, state: u64) -> bool {
    cand.trigger & !state == 0
}

fn cand_diff(a: &Cand, b: &Cand) -> u64 {
    u64::from(a.trigger != b.trigger) + u64::from(a.action != b.action)
}

/// Validity-and-consistency constraints, one row per distinct demonstration
/// state: the action demanded by positive steps and the actions forbidden by
/// negative steps.
struct ConsTable {
    states: Vec<u64>,
    required: Vec<Option<usize>>,
    forbidden: Vec<BTreeSet<usize>>,
    /// Set when the demonstrations contradict each other outright.
    infeasible: bool,
}

impl ConsTable {
    fn build<'a>(demos: impl Iterator<Item = &'a Demonstration>, intern: &Interner) -> ConsTable {
        let mut rows: BTreeMap<u64, (Option<usize>, BTreeSet<usize>)> = BTreeMap::new();
        let mut infeasible = false;
        for demo in demos {
            for step in demo.steps() {
                let mask = intern.state_mask(step.state.features());
                let action = intern.action_index(&step.action);
                let row = rows.entry(mask).or_default();
                match demo.kind() {
                    DemoKind::Positive => match row.0 {
                        None => row.0 = Some(action),
                        Some(r) if r != action => infeasible = true,
                        _ => {}
                    },
                    DemoKind::Negative => {
                        row.1.insert(action);
                    }
                }
            }
        }
        let mut states = Vec::with_capacity(rows.len());
        let mut required = Vec::with_capacity(rows.len());
        let mut forbidden = Vec::with_capacity(rows.len());
        for (mask, (req, forb)) in rows {
            if let Some(r) = req {
                if forb.contains(&r) {
                    infeasible = true;
                }
            }
            states.push(mask);
            required.push(req);
            forbidden.push(forb);
        }
        ConsTable {
            states,
            required,
            forbidden,
            infeasible,
        }
    }

    fn eval(&self, selection: &[Cand]) -> bool {
        if self.infeasible {
            return false;
        }
        for (i, &smask) in self.states.iter().enumerate() {
            let mut fired: Option<usize> = None;
            for cand in selection {
                if !fires(cand, smask) {
                    continue;
                }
                match fired {
                    None => fired = Some(cand.action),
                    Some(f) if f != cand.action => return false,
                    _ => {}
                }
            }
            match (self.required[i], fired) {
                (Some(r), Some(f)) if r != f => return false,
                (Some(_), None) => return false,
                (None, Some(f)) if self.forbidden[i].contains(&f) => return false,
                _ => {}
            }
        }
        true
    }
}

/// Modulo-consistency constraints for the no-history problem: one row per
/// constrained state, each listing the exact action sets the candidate may
/// produce there.
struct ModTable {
    states: Vec<u64>,
    allowed: Vec<Vec<Vec<usize>>>,
    /// Union of the allowed sets per state; firing anything outside it is a
    /// dead end.
    max_allowed: Vec<Vec<usize>>,
    /// Per state: does some allowed option permit producing nothing?
    may_stay_empty: Vec<bool>,
    infeasible: bool,
}

impl ModTable {
    fn build(reference: &[Cand], d_new: &Demonstration, intern: &Interner) -> ModTable {
        let ref_run = |mask: u64| -> Vec<usize> {
            reference
                .iter()
                .filter(|c| fires(c, mask))
                .map(|c| c.action)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        };
        let demo_states: Vec<u64> = d_new
            .steps()
            .iter()
            .map(|s| intern.state_mask(s.state.features()))
            .collect();

        let mut rows: BTreeMap<u64, Vec<Vec<usize>>> = BTreeMap::new();
        let mut constrain = |mask: u64, options: Vec<Vec<usize>>| match rows.entry(mask) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(options);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                e.get_mut().retain(|run| options.contains(run));
            }
        };

        // Replicate the reference on each of its own triggers, except those
        // shadowed by a demonstration state.
        let triggers: BTreeSet<u64> = reference.iter().map(|c| c.trigger).collect();
        for trigger in triggers {
            if demo_states.iter().any(|&s| trigger & !s == 0) {
                continue;
            }
            constrain(trigger, vec![ref_run(trigger)]);
        }
        // The demonstration steps themselves.
        for step in d_new.steps() {
            let mask = intern.state_mask(step.state.features());
            let action = intern.action_index(&step.action);
            let options = match d_new.kind() {
                DemoKind::Positive => vec![vec![action]],
                DemoKind::Negative => {
                    let run = ref_run(mask);
                    let mut options = vec![Vec::new()];
                    if !run.is_empty() && !run.contains(&action) {
                        options.push(run);
                    }
                    options
                }
            };
            constrain(mask, options);
        }

        let mut states = Vec::with_capacity(rows.len());
        let mut allowed = Vec::with_capacity(rows.len());
        let mut max_allowed = Vec::with_capacity(rows.len());
        let mut may_stay_empty = Vec::with_capacity(rows.len());
        let mut infeasible = false;
        for (mask, options) in rows {
            if options.is_empty() {
                infeasible = true;
            }
            let union: BTreeSet<usize> = options.iter().flatten().copied().collect();
            states.push(mask);
            may_stay_empty.push(options.iter().any(|o| o.is_empty()));
            allowed.push(options);
            max_allowed.push(union.into_iter().collect());
        }
        ModTable {
            states,
            allowed,
            max_allowed,
            may_stay_empty,
            infeasible,
        }
    }

    fn eval(&self, selection: &[Cand]) -> bool {
        if self.infeasible {
            return false;
        }
        for (i, &smask) in self.states.iter().enumerate() {
            let run: Vec<usize> = selection
                .iter()
                .filter(|c| fires(c, smask))
                .map(|c| c.action)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if !self.allowed[i].contains(&run) {
                return false;
            }
        }
        true
    }
}

enum Table {
    Cons(ConsTable),
    Modulo(ModTable),
}

impl Table {
    fn infeasible(&self) -> bool {
        match self {
            Table::Cons(t) => t.infeasible,
            Table::Modulo(t) => t.infeasible,
        }
    }
}

/// Edit-budget data for the incremental problems.
struct RefData {
    transitions: Vec<Cand>,
    c: usize,
}

impl RefData {
    fn distance_within(&self, selection: &[Cand]) -> bool {
        if selection.len() > self.transitions.len() {
            return false;
        }
        let deletions = self.transitions.len() - selection.len();
        if deletions > self.c {
            return false;
        }
        let cost: Vec<Vec<u64>> = selection
            .iter()
            .map(|s| self.transitions.iter().map(|o| cand_diff(s, o)).collect())
            .collect();
        assignment::min_cost_assignment(&cost) as usize + deletions <= self.c
    }
}

struct Interner {
    features: Vec<Feature>,
    actions: Vec<Action>,
}

impl Interner {
    fn feature_bit(&self, f: &Feature) -> u64 {
        let idx = self
            .features
            .binary_search(f)
            .expect("feature interned at compile time");
        1u64 << idx
    }

    fn state_mask(&self, features: &BTreeSet<Feature>) -> u64 {
        features
            .iter()
            .map(|f| self.feature_bit(f))
            .fold(0, |m, b| m | b)
    }

    fn action_index(&self, a: &Action) -> usize {
        self.actions
            .binary_search(a)
            .expect("action interned at compile time")
    }
}

struct Search {
    intern: Interner,
    /// Admissible transitions in canonical order.
    universe: Vec<Cand>,
    table: Table,
    reference: Option<RefData>,
    limit_t: usize,
    /// Per-universe-index lower bound on the edit cost of keeping that
    /// candidate; admissible prune for the incremental searches.
    rowmin: Vec<u64>,
    /// Per-table-state highest universe index that can still serve the state;
    /// used for coverage pruning.
    cover_last: Vec<Option<usize>>,
}

impl Search {
    fn compile(inst: &ProblemInstance, strat: &SolveStrategy) -> Result<Search, SolveError> {
        let allowed: BTreeSet<Feature> = if strat.restrict_features {
            restricted_feature_set(inst).ok_or(SolveError::RestrictFeaturesUnavailable)?
        } else {
            inst.spaces().features().clone()
        };
        // Features that can matter beyond the universe: demonstration states
        // and given-policy triggers.
        let mut relevant: BTreeSet<Feature> = allowed.clone();
        collect_demo_features(inst, &mut relevant);
        if let Some(policy) = inst.given_policy() {
            for tr in policy.transitions() {
                relevant.extend(tr.trigger().iter().cloned());
            }
        }
        if relevant.len() > 64 {
            return Err(SolveError::TooManyFeatures(relevant.len()));
        }
        let intern = Interner {
            features: relevant.into_iter().collect(),
            actions: inst.spaces().actions().iter().cloned().collect(),
        };

        let allowed_positions: Vec<usize> = allowed
            .iter()
            .map(|f| intern.features.binary_search(f).expect("allowed is interned"))
            .collect();
        let mut trigger_masks = Vec::new();
        lex_subsets(&allowed_positions, inst.f_t(), &mut trigger_masks);
        let mut universe = Vec::with_capacity(trigger_masks.len() * intern.actions.len());
        for mask in trigger_masks {
            for action in 0..intern.actions.len() {
                universe.push(Cand {
                    trigger: mask,
                    action,
                });
            }
        }

        let reference = inst.given_policy().map(|p| RefData {
            transitions: p
                .transitions()
                .iter()
                .map(|tr| Cand {
                    trigger: intern.state_mask(tr.trigger()),
                    action: intern.action_index(tr.action()),
                })
                .collect(),
            c: inst.c().unwrap_or(usize::MAX),
        });

        let table = match inst.variant() {
            Variant::Batch { .. } | Variant::IncHist { .. } => {
                Table::Cons(ConsTable::build(inst.all_demos(), &intern))
            }
            Variant::IncNoHist { d_new, .. } => Table::Modulo(ModTable::build(
                &reference
                    .as_ref()
                    .expect("no-history instances carry a policy")
                    .transitions,
                d_new,
                &intern,
            )),
        };

        // The backtracking batch search only ever needs transitions that can
        // satisfy some positive step: at the minimal solution size every
        // transition fires on a positive state with its demanded action.
        if strat.kind == StrategyKind::Backtracking
            && matches!(inst.variant(), Variant::Batch { .. })
        {
            if let Table::Cons(t) = &table {
                universe.retain(|cand| {
                    t.states
                        .iter()
                        .enumerate()
                        .any(|(i, &s)| t.required[i] == Some(cand.action) && fires(cand, s))
                });
            }
        }

        let rowmin = match &reference {
            Some(r) if !r.transitions.is_empty() => universe
                .iter()
                .map(|cand| {
                    r.transitions
                        .iter()
                        .map(|o| cand_diff(cand, o))
                        .min()
                        .expect("non-empty reference")
                })
                .collect(),
            _ => vec![0; universe.len()],
        };

        let cover_last = match &table {
            Table::Cons(t) => t
                .states
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    t.required[i].and_then(|r| {
                        universe
                            .iter()
                            .rposition(|cand| cand.action == r && fires(cand, s))
                    })
                })
                .collect(),
            Table::Modulo(t) => t
                .states
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    universe
                        .iter()
                        .rposition(|cand| fires(cand, s) && t.max_allowed[i].contains(&cand.action))
                })
                .collect(),
        };

        Ok(Search {
            intern,
            universe,
            table,
            reference,
            limit_t: inst.t(),
            rowmin,
            cover_last,
        })
    }

    fn materialize(&self, selection: &[Cand]) -> Policy {
        Policy::new(selection.iter().map(|cand| {
            let trigger = self
                .intern
                .features
                .iter()
                .enumerate()
                .filter(|(i, _)| cand.trigger & (1u64 << i) != 0)
                .map(|(_, f)| f.clone());
            Transition::new(trigger, self.intern.actions[cand.action].clone())
                .expect("universe triggers are non-empty")
        }))
    }

    fn accepts(&self, selection: &[Cand]) -> bool {
        let table_ok = match &self.table {
            Table::Cons(t) => t.eval(selection),
            Table::Modulo(t) => t.eval(selection),
        };
        table_ok
            && self
                .reference
                .as_ref()
                .is_none_or(|r| r.distance_within(selection))
    }

    // -- reference enumeration ----------------------------------------------

    fn run_reference(&self, jobs: usize) -> (Option<Vec<Cand>>, u64) {
        let mut total = 0u64;
        let hi = self.limit_t.min(self.universe.len());
        for size in 0..=hi {
            if size == 0 {
                total += 1;
                if self.accepts(&[]) {
                    return (Some(Vec::new()), total);
                }
                continue;
            }
            let (found, count) = run_branches(self.universe.len(), size, jobs, |first| {
                self.reference_branch(size, first)
            });
            total += count;
            if found.is_some() {
                return (found, total);
            }
        }
        (None, total)
    }

    fn reference_branch(&self, size: usize, first: usize) -> (Option<Vec<Cand>>, u64) {
        let mut selection = Vec::with_capacity(size);
        selection.push(self.universe[first]);
        let mut count = 0u64;
        let found = self.reference_rec(&mut selection, first + 1, size - 1, &mut count);
        (found.then_some(selection), count)
    }

    fn reference_rec(
        &self,
        selection: &mut Vec<Cand>,
        next: usize,
        remaining: usize,
        count: &mut u64,
    ) -> bool {
        if remaining == 0 {
            *count += 1;
            return self.accepts(selection);
        }
        for i in next..=self.universe.len() - remaining {
            selection.push(self.universe[i]);
            if self.reference_rec(selection, i + 1, remaining - 1, count) {
                return true;
            }
            selection.pop();
        }
        false
    }

    // -- backtracking ---------------------------------------------------------

    fn run_backtracking(&self, jobs: usize) -> (Option<Vec<Cand>>, u64) {
        if self.table.infeasible() {
            return (None, 0);
        }
        let (lo, hi) = match &self.reference {
            None => (0, self.limit_t.min(self.universe.len())),
            Some(r) => {
                let lo = r.transitions.len().saturating_sub(r.c);
                let hi = self
                    .limit_t
                    .min(r.transitions.len())
                    .min(self.universe.len());
                if lo > hi {
                    return (None, 0);
                }
                (lo, hi)
            }
        };
        let mut total = 0u64;
        for size in lo..=hi {
            if size == 0 {
                total += 1;
                if self.accepts(&[]) {
                    return (Some(Vec::new()), total);
                }
                continue;
            }
            let (found, count) = run_branches(self.universe.len(), size, jobs, |first| {
                let mut ctx = BacktrackCtx::new(self, size);
                let found = ctx.branch(first);
                (found, ctx.count)
            });
            total += count;
            if found.is_some() {
                return (found, total);
            }
        }
        (None, total)
    }
}

/// Enumerates non-empty subsets of `positions` with at most `max_size`
/// elements, in lexicographic order of their sorted element sequences.
fn lex_subsets(positions: &[usize], max_size: usize, out: &mut Vec<u64>) {
    fn rec(positions: &[usize], start: usize, left: usize, current: u64, out: &mut Vec<u64>) {
        for p in start..positions.len() {
            let mask = current | (1u64 << positions[p]);
            out.push(mask);
            if left > 1 {
                rec(positions, p + 1, left - 1, mask, out);
            }
        }
    }
    if max_size > 0 {
        rec(positions, 0, max_size, 0, out);
    }
}

/// Runs `branch(first)` for every admissible first choice and returns the
/// first hit in first-choice order, which is the canonical least because any
/// solution in branch `i` precedes every solution in branch `j > i`.
fn run_branches<F>(
    universe_len: usize,
    size: usize,
    jobs: usize,
    branch: F,
) -> (Option<Vec<Cand>>, u64)
where
    F: Fn(usize) -> (Option<Vec<Cand>>, u64) + Sync,
{
    debug_assert!(size >= 1 && size <= universe_len);
    let last_first = universe_len - size;
    #[cfg(feature = "parallel")]
    if jobs > 1 {
        use core::sync::atomic::{AtomicU64, Ordering};
        use rayon::iter::{IntoParallelIterator, ParallelIterator};
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            let counter = AtomicU64::new(0);
            let found = pool.install(|| {
                (0..=last_first)
                    .into_par_iter()
                    .filter_map(|first| {
                        let (r, c) = branch(first);
                        counter.fetch_add(c, Ordering::Relaxed);
                        r
                    })
                    .find_first(|_| true)
            });
            return (found, counter.load(Ordering::Relaxed));
        }
    }
    let _ = jobs;
    let mut total = 0u64;
    for first in 0..=last_first {
        let (found, count) = branch(first);
        total += count;
        if found.is_some() {
            return (found, total);
        }
    }
    (None, total)
}

/// One branch of the backtracking search: depth-first over universe indices
/// in increasing order, with constraint state updated incrementally and
/// rolled back on return.
struct BacktrackCtx<'a> {
    search: &'a Search,
    size: usize,
    chosen: Vec<usize>,
    count: u64,
    // consistency-table state
    fired: Vec<Option<usize>>,
    uncovered: usize,
    // modulo-table state
    runs: Vec<Vec<usize>>,
    unmet: usize,
    // edit-budget prune state
    rowmin_sum: u64,
}

impl<'a> BacktrackCtx<'a> {
    fn new(search: &'a Search, size: usize) -> Self {
        let (fired, uncovered, runs, unmet) = match &search.table {
            Table::Cons(t) => {
                let uncovered = t.required.iter().filter(|r| r.is_some()).count();
                (vec![None; t.states.len()], uncovered, Vec::new(), 0)
            }
            Table::Modulo(t) => {
                let unmet = t.may_stay_empty.iter().filter(|m| !**m).count();
                (Vec::new(), 0, vec![Vec::new(); t.states.len()], unmet)
            }
        };
        BacktrackCtx {
            search,
            size,
            chosen: Vec::with_capacity(size),
            count: 0,
            fired,
            uncovered,
            runs,
            unmet,
            rowmin_sum: 0,
        }
    }

    fn branch(&mut self, first: usize) -> Option<Vec<Cand>> {
        let undo = self.push(first)?;
        self.chosen.push(first);
        if self.dfs(first + 1, self.size - 1) {
            let search = self.search;
            return Some(self.chosen.iter().map(|&i| search.universe[i]).collect());
        }
        self.chosen.pop();
        self.pop(first, undo);
        None
    }

    fn dfs(&mut self, next: usize, remaining: usize) -> bool {
        if remaining == 0 {
            return self.leaf_ok();
        }
        if !self.coverage_reachable(next) {
            return false;
        }
        for i in next..=self.search.universe.len() - remaining {
            if let Some(undo) = self.push(i) {
                self.chosen.push(i);
                if self.dfs(i + 1, remaining - 1) {
                    return true;
                }
                self.chosen.pop();
                self.pop(i, undo);
            }
        }
        false
    }

    /// Every still-unserved state must be reachable by some candidate at or
    /// after `next`.
    fn coverage_reachable(&self, next: usize) -> bool {
        let search = self.search;
        match &search.table {
            Table::Cons(t) => {
                if self.uncovered == 0 {
                    return true;
                }
                (0..t.states.len()).all(|i| {
                    t.required[i].is_none()
                        || self.fired[i].is_some()
                        || matches!(search.cover_last[i], Some(last) if last >= next)
                })
            }
            Table::Modulo(t) => {
                if self.unmet == 0 {
                    return true;
                }
                (0..t.states.len()).all(|i| {
                    t.may_stay_empty[i]
                        || !self.runs[i].is_empty()
                        || matches!(search.cover_last[i], Some(last) if last >= next)
                })
            }
        }
    }

    /// Applies candidate `index`; returns the undo record, or `None` after
    /// rolling back if the candidate violates a constraint or busts the edit
    /// budget.
    fn push(&mut self, index: usize) -> Option<Vec<usize>> {
        self.count += 1;
        let search = self.search;
        let cand = search.universe[index];
        let mut touched = Vec::new();
        let ok = match &search.table {
            Table::Cons(t) => 'cons: {
                for (i, &smask) in t.states.iter().enumerate() {
                    if !fires(&cand, smask) {
                        continue;
                    }
                    match self.fired[i] {
                        None => {
                            if t.forbidden[i].contains(&cand.action)
                                || matches!(t.required[i], Some(r) if r != cand.action)
                            {
                                break 'cons false;
                            }
                            self.fired[i] = Some(cand.action);
                            if t.required[i].is_some() {
                                self.uncovered -= 1;
                            }
                            touched.push(i);
                        }
                        Some(f) if f != cand.action => break 'cons false,
                        _ => {}
                    }
                }
                true
            }
            Table::Modulo(t) => 'modulo: {
                for (i, &smask) in t.states.iter().enumerate() {
                    if !fires(&cand, smask) {
                        continue;
                    }
                    if !t.max_allowed[i].contains(&cand.action) {
                        break 'modulo false;
                    }
                    if let Err(pos) = self.runs[i].binary_search(&cand.action) {
                        if self.runs[i].is_empty() && !t.may_stay_empty[i] {
                            self.unmet -= 1;
                        }
                        self.runs[i].insert(pos, cand.action);
                        touched.push(i);
                    }
                }
                true
            }
        };
        if ok && search.reference.is_some() {
            self.rowmin_sum += search.rowmin[index];
            let deletions = search
                .reference
                .as_ref()
                .map_or(0, |r| (r.transitions.len() - self.size) as u64);
            let budget = search.reference.as_ref().map_or(u64::MAX, |r| r.c as u64);
            if self.rowmin_sum + deletions > budget {
                self.rowmin_sum -= search.rowmin[index];
                self.rollback(cand.action, &touched);
                return None;
            }
        }
        if ok {
            Some(touched)
        } else {
            self.rollback(cand.action, &touched);
            None
        }
    }

    fn rollback(&mut self, action: usize, touched: &[usize]) {
        let search = self.search;
        match &search.table {
            Table::Cons(t) => {
                for &i in touched {
                    self.fired[i] = None;
                    if t.required[i].is_some() {
                        self.uncovered += 1;
                    }
                }
            }
            Table::Modulo(t) => {
                for &i in touched {
                    if let Ok(pos) = self.runs[i].binary_search(&action) {
                        self.runs[i].remove(pos);
                    }
                    if self.runs[i].is_empty() && !t.may_stay_empty[i] {
                        self.unmet += 1;
                    }
                }
            }
        }
    }

    fn pop(&mut self, index: usize, undo: Vec<usize>) {
        let search = self.search;
        if search.reference.is_some() {
            self.rowmin_sum -= search.rowmin[index];
        }
        self.rollback(search.universe[index].action, &undo);
    }

    fn leaf_ok(&self) -> bool {
        let search = self.search;
        match &search.table {
            Table::Cons(_) => {
                if self.uncovered > 0 {
                    return false;
                }
            }
            Table::Modulo(t) => {
                for (i, options) in t.allowed.iter().enumerate() {
                    if !options.contains(&self.runs[i]) {
                        return false;
                    }
                }
            }
        }
        match &search.reference {
            None => true,
            Some(r) => {
                let selection: Vec<Cand> =
                    self.chosen.iter().map(|&i| search.universe[i]).collect();
                r.distance_within(&selection)
            }
        }
    }
}
