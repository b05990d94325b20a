//! A small worked scenario used across tests and fixtures: four weather
//! features, four clothing actions, four demonstrations and two policies with
//! known relationships between them.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{
    Action, DemoKind, Demonstration, EnvState, Feature, Policy, Spaces, Step, Transition,
};

/// The weather scenario entities.
///
/// Features: `f1` raining, `f2` cold, `f3` sunny, `f4` windy. Actions: `a1`
/// raincoat, `a2` sweater, `a3` sunglasses, `a4` wingsuit.
///
/// `demos[0]` (positive) pairs each single-feature state with its matching
/// action; `demos[1]` (negative) forbids mismatched pairs; `demos[2]`
/// (positive) uses two-feature states; `demos[3]` (positive) asks for `a2` on
/// `{f2}` and `a3` on `{f3}`.
///
/// `policy_one` maps each feature to its matching action. `policy_two` keeps
/// `f1 -> a1` but maps `f2 -> a4` and `f3 -> a2` and drops `f4`.
#[derive(Debug, Clone)]
pub struct WeatherSample {
    pub spaces: Spaces,
    pub demos: Vec<Demonstration>,
    pub policy_one: Policy,
    pub policy_two: Policy,
}

fn f(label: &str) -> Feature {
    Feature::new(label).expect("valid label")
}

fn a(label: &str) -> Action {
    Action::new(label).expect("valid label")
}

fn st(labels: &[&str]) -> EnvState {
    EnvState::new(labels.iter().map(|l| f(l))).expect("non-empty state")
}

fn tr(trigger: &[&str], action: &str) -> Transition {
    Transition::new(trigger.iter().map(|l| f(l)), a(action)).expect("non-empty trigger")
}

/// Builds the weather scenario.
pub fn weather() -> WeatherSample {
    let spaces = Spaces::new(
        ["f1", "f2", "f3", "f4"].map(f),
        ["a1", "a2", "a3", "a4"].map(a),
    );
    let demos = vec![
        Demonstration::new(
            DemoKind::Positive,
            vec![
                Step::new(st(&["f1"]), a("a1")),
                Step::new(st(&["f2"]), a("a2")),
                Step::new(st(&["f3"]), a("a3")),
                Step::new(st(&["f4"]), a("a4")),
            ],
        )
        .expect("non-empty"),
        Demonstration::new(
            DemoKind::Negative,
            vec![
                Step::new(st(&["f1"]), a("a2")),
                Step::new(st(&["f3"]), a("a1")),
            ],
        )
        .expect("non-empty"),
        Demonstration::new(
            DemoKind::Positive,
            vec![
                Step::new(st(&["f1", "f4"]), a("a1")),
                Step::new(st(&["f2", "f4"]), a("a4")),
                Step::new(st(&["f3"]), a("a2")),
            ],
        )
        .expect("non-empty"),
        Demonstration::new(
            DemoKind::Positive,
            vec![
                Step::new(st(&["f2"]), a("a2")),
                Step::new(st(&["f3"]), a("a3")),
            ],
        )
        .expect("non-empty"),
    ];
    let policy_one = Policy::new([
        tr(&["f1"], "a1"),
        tr(&["f2"], "a2"),
        tr(&["f3"], "a3"),
        tr(&["f4"], "a4"),
    ]);
    let policy_two = Policy::new([
        tr(&["f1"], "a1"),
        tr(&["f2"], "a4"),
        tr(&["f3"], "a2"),
    ]);
    WeatherSample {
        spaces,
        demos,
        policy_one,
        policy_two,
    }
}
