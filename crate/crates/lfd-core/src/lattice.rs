//! Intractability maps: raw (in)tractability facts over parameter sets,
//! closed under upward tractability and downward intractability propagation,
//! with conflict detection, grid rendering and instance advice.
//!
//! A tractable fact for parameter set `K` certifies every superset of `K`; an
//! intractable fact certifies every non-empty subset. Cells covered by
//! neither stay unknown; cells covered by both are conflicts. Intractable
//! cells carry the strongest conjecture among their contributors.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{ParameterVector, ProblemInstance};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeError {
    /// A result refers to a parameter outside the universe.
    UnknownParameter { label: String, parameter: String },
    /// Universe parameters must be distinct.
    DuplicateParameter(String),
    /// At most 16 parameters (the map is materialized over all subsets).
    UniverseTooLarge(usize),
    /// A raw result breaks the kind/conjecture rules.
    InvalidResult { label: String, reason: &'static str },
    /// Row and column parameters must split the universe exactly.
    InvalidSplit,
}

impl fmt::Display for LatticeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeError::UnknownParameter { label, parameter } => {
                write!(f, "result {label:?} refers to unknown parameter {parameter:?}")
            }
            LatticeError::DuplicateParameter(p) => write!(f, "duplicate parameter {p:?}"),
            LatticeError::UniverseTooLarge(n) => {
                write!(f, "universe of {n} parameters is too large to materialize")
            }
            LatticeError::InvalidResult { label, reason } => {
                write!(f, "invalid result {label:?}: {reason}")
            }
            LatticeError::InvalidSplit => {
                write!(f, "row and column parameters must partition the universe")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LatticeError {}

/// A parameter identifier, e.g. `t`, `f_t`, `F`, `A`, `nd`, `ld`, `feap`, `c`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParameterName(String);

impl ParameterName {
    pub fn new(id: impl Into<String>) -> Self {
        ParameterName(id.into())
    }

    pub fn id(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ParameterName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// How a parameter participates in a raw result: restricted but unbounded, or
/// fixed to a constant in the underlying construction. Constant values are
/// provenance only; closure works on the parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamSetting {
    Unbounded,
    Fixed(u64),
}

/// The complexity-theoretic assumption conditioning an intractability fact.
/// `P != NP` is the stronger assumption and wins when both apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conjecture {
    PNeqNp,
    FptNeqW1,
}

impl Conjecture {
    pub fn as_str(&self) -> &'static str {
        match self {
            Conjecture::PNeqNp => "P!=NP",
            Conjecture::FptNeqW1 => "FPT!=W[1]",
        }
    }

    fn strongest(a: Option<Conjecture>, b: Option<Conjecture>) -> Option<Conjecture> {
        match (a, b) {
            (Some(Conjecture::PNeqNp), _) | (_, Some(Conjecture::PNeqNp)) => {
                Some(Conjecture::PNeqNp)
            }
            (Some(Conjecture::FptNeqW1), _) | (_, Some(Conjecture::FptNeqW1)) => {
                Some(Conjecture::FptNeqW1)
            }
            (None, None) => None,
        }
    }
}

impl fmt::Display for Conjecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResultKind {
    Tractable,
    Intractable,
    /// Classical hardness of the unparameterized problem; applies to the
    /// empty parameter set only and renders the map's corner.
    ClassicalNpHard,
}

/// One published or computed fact about the problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RawResult {
    pub kind: ResultKind,
    pub label: String,
    pub conjecture: Option<Conjecture>,
    pub params: BTreeMap<ParameterName, ParamSetting>,
}

impl RawResult {
    pub fn tractable(
        label: impl Into<String>,
        params: impl IntoIterator<Item = (ParameterName, ParamSetting)>,
    ) -> Self {
        RawResult {
            kind: ResultKind::Tractable,
            label: label.into(),
            conjecture: None,
            params: params.into_iter().collect(),
        }
    }

    pub fn intractable(
        label: impl Into<String>,
        conjecture: Conjecture,
        params: impl IntoIterator<Item = (ParameterName, ParamSetting)>,
    ) -> Self {
        RawResult {
            kind: ResultKind::Intractable,
            label: label.into(),
            conjecture: Some(conjecture),
            params: params.into_iter().collect(),
        }
    }

    pub fn np_hard(label: impl Into<String>) -> Self {
        RawResult {
            kind: ResultKind::ClassicalNpHard,
            label: label.into(),
            conjecture: Some(Conjecture::PNeqNp),
            params: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Tractable,
    Intractable,
    Unknown,
    Conflict,
}

impl Status {
    pub fn symbol(&self) -> &'static str {
        match self {
            Status::Tractable => "\u{221a}", // √
            Status::Intractable => "X",
            Status::Unknown => "???",
            Status::Conflict => "!",
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Tractable => "tractable",
            Status::Intractable => "intractable",
            Status::Unknown => "unknown",
            Status::Conflict => "conflict",
        }
    }
}

/// The derived status of one parameter-set cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStatus {
    pub status: Status,
    /// Strongest conjecture among the intractable contributors.
    pub conjecture: Option<Conjecture>,
    /// Labels of the contributing raw results, in input order.
    pub provenance: Vec<String>,
}

impl CellStatus {
    fn unknown() -> Self {
        CellStatus {
            status: Status::Unknown,
            conjecture: None,
            provenance: Vec::new(),
        }
    }
}

/// The closed map: a status for every non-empty subset of the universe.
#[derive(Debug, Clone, PartialEq)]
pub struct IntractabilityMap {
    universe: Vec<ParameterName>,
    /// Indexed by subset bitmask over universe positions; index 0 is unused
    /// except for bookkeeping of the classical corner.
    cells: Vec<CellStatus>,
    np_hard: Vec<String>,
}

impl IntractabilityMap {
    pub fn universe(&self) -> &[ParameterName] {
        &self.universe
    }

    /// Labels of classical hardness results (non-empty iff the corner renders
    /// as NPh).
    pub fn np_hard_labels(&self) -> &[String] {
        &self.np_hard
    }

    pub fn cell_by_mask(&self, mask: usize) -> &CellStatus {
        &self.cells[mask]
    }

    /// Looks up the cell for a set of parameter names; `None` if any name is
    /// outside the universe or the set is empty.
    pub fn cell(&self, params: &[ParameterName]) -> Option<&CellStatus> {
        let mask = self.mask_of(params)?;
        if mask == 0 {
            return None;
        }
        Some(&self.cells[mask])
    }

    pub fn mask_of(&self, params: &[ParameterName]) -> Option<usize> {
        let mut mask = 0usize;
        for p in params {
            let pos = self.universe.iter().position(|u| u == p)?;
            mask |= 1 << pos;
        }
        Some(mask)
    }

    pub fn params_of_mask(&self, mask: usize) -> Vec<ParameterName> {
        self.universe
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, p)| p.clone())
            .collect()
    }

    /// All non-empty subsets in canonical order: by size, then
    /// lexicographically by universe position.
    pub fn masks_canonical(&self) -> Vec<usize> {
        subset_masks_canonical(&(0..self.universe.len()).collect::<Vec<_>>())
            .into_iter()
            .filter(|&m| m != 0)
            .collect()
    }
}

/// All subsets (including the empty one) of the given positions, ordered by
/// size then lexicographically by position sequence.
fn subset_masks_canonical(positions: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for size in 1..=positions.len() {
        rec(positions, 0, size, 0, &mut out);
    }
    fn rec(positions: &[usize], start: usize, left: usize, current: usize, out: &mut Vec<usize>) {
        if left == 0 {
            out.push(current);
            return;
        }
        for p in start..=positions.len() - left {
            rec(positions, p + 1, left - 1, current | (1 << positions[p]), out);
        }
    }
    out
}

/// Closes the raw results over the universe.
pub fn propagate(
    results: &[RawResult],
    universe: &[ParameterName],
) -> Result<IntractabilityMap, LatticeError> {
    let n = universe.len();
    if n > 16 {
        return Err(LatticeError::UniverseTooLarge(n));
    }
    for (i, p) in universe.iter().enumerate() {
        if universe[..i].contains(p) {
            return Err(LatticeError::DuplicateParameter(p.id().to_string()));
        }
    }

    let mut tract: Vec<Vec<String>> = vec![Vec::new(); 1 << n];
    let mut intract: Vec<Vec<String>> = vec![Vec::new(); 1 << n];
    let mut conjectures: Vec<Option<Conjecture>> = vec![None; 1 << n];
    let mut np_hard = Vec::new();

    for result in results {
        let mut mask = 0usize;
        for p in result.params.keys() {
            let pos = universe.iter().position(|u| u == p).ok_or_else(|| {
                LatticeError::UnknownParameter {
                    label: result.label.clone(),
                    parameter: p.id().to_string(),
                }
            })?;
            mask |= 1 << pos;
        }
        match result.kind {
            ResultKind::Tractable => {
                if result.conjecture.is_some() {
                    return Err(LatticeError::InvalidResult {
                        label: result.label.clone(),
                        reason: "tractable results are unconditional",
                    });
                }
                // every superset of the certified set
                let complement = !mask & ((1 << n) - 1);
                let mut extra = complement;
                loop {
                    tract[mask | extra].push(result.label.clone());
                    if extra == 0 {
                        break;
                    }
                    extra = (extra - 1) & complement;
                }
            }
            ResultKind::Intractable => {
                let conjecture = result.conjecture.ok_or(LatticeError::InvalidResult {
                    label: result.label.clone(),
                    reason: "intractable results need a conjecture",
                })?;
                // every non-empty subset of the certified set
                let mut sub = mask;
                loop {
                    if sub != 0 {
                        intract[sub].push(result.label.clone());
                        conjectures[sub] = Conjecture::strongest(conjectures[sub], Some(conjecture));
                    }
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & mask;
                }
            }
            ResultKind::ClassicalNpHard => {
                if !result.params.is_empty() {
                    return Err(LatticeError::InvalidResult {
                        label: result.label.clone(),
                        reason: "classical hardness applies to the empty parameter set only",
                    });
                }
                np_hard.push(result.label.clone());
            }
        }
    }

    let cells = (0..1usize << n)
        .map(|mask| {
            if mask == 0 {
                return CellStatus::unknown();
            }
            let t = &tract[mask];
            let i = &intract[mask];
            match (t.is_empty(), i.is_empty()) {
                (true, true) => CellStatus::unknown(),
                (false, true) => CellStatus {
                    status: Status::Tractable,
                    conjecture: None,
                    provenance: t.clone(),
                },
                (true, false) => CellStatus {
                    status: Status::Intractable,
                    conjecture: conjectures[mask],
                    provenance: i.clone(),
                },
                (false, false) => CellStatus {
                    status: Status::Conflict,
                    conjecture: conjectures[mask],
                    provenance: t.iter().chain(i.iter()).cloned().collect(),
                },
            }
        })
        .collect();

    Ok(IntractabilityMap {
        universe: universe.to_vec(),
        cells,
        np_hard,
    })
}

/// All conflict cells with their provenance.
pub fn detect_conflicts(map: &IntractabilityMap) -> Vec<(Vec<ParameterName>, Vec<String>)> {
    map.masks_canonical()
        .into_iter()
        .filter(|&m| map.cells[m].status == Status::Conflict)
        .map(|m| (map.params_of_mask(m), map.cells[m].provenance.clone()))
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StatusCounts {
    pub tractable: usize,
    pub intractable: usize,
    pub unknown: usize,
    pub conflict: usize,
}

pub fn count_statuses(map: &IntractabilityMap) -> StatusCounts {
    let mut counts = StatusCounts::default();
    for mask in map.masks_canonical() {
        match map.cells[mask].status {
            Status::Tractable => counts.tractable += 1,
            Status::Intractable => counts.intractable += 1,
            Status::Unknown => counts.unknown += 1,
            Status::Conflict => counts.conflict += 1,
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapFormat {
    Markdown,
    Csv,
    Json,
}

/// Renders the map as a grid: rows are subsets of `row_params`, columns are
/// subsets of `col_params` (each ordered by size then by the given parameter
/// order), and a cell shows the status of the union of its row and column
/// sets. The empty/empty corner renders as `NPh` when a classical hardness
/// result is present. Output is deterministic byte-for-byte.
pub fn render_map(
    map: &IntractabilityMap,
    row_params: &[ParameterName],
    col_params: &[ParameterName],
    format: MapFormat,
) -> Result<String, LatticeError> {
    let rows = split_positions(map, row_params)?;
    let cols = split_positions(map, col_params)?;
    for p in row_params {
        if col_params.contains(p) {
            return Err(LatticeError::InvalidSplit);
        }
    }
    if row_params.len() + col_params.len() != map.universe.len() {
        return Err(LatticeError::InvalidSplit);
    }

    let row_masks = subset_masks_canonical(&rows);
    let col_masks = subset_masks_canonical(&cols);
    let label = |mask: usize| -> String {
        if mask == 0 {
            "--".to_string()
        } else {
            let names: Vec<&str> = map
                .universe
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, p)| p.id())
                .collect();
            names.join(",")
        }
    };
    let cell_symbol = |mask: usize| -> &str {
        if mask == 0 {
            if map.np_hard.is_empty() {
                "???"
            } else {
                "NPh"
            }
        } else {
            map.cells[mask].status.symbol()
        }
    };

    match format {
        MapFormat::Markdown => {
            let mut out = String::new();
            out.push_str("| |");
            for &cm in &col_masks {
                out.push_str(&format_cell_md(&label(cm)));
            }
            out.push('\n');
            out.push_str("| --- |");
            for _ in &col_masks {
                out.push_str(" --- |");
            }
            out.push('\n');
            for &rm in &row_masks {
                out.push('|');
                out.push_str(&format_cell_md(&label(rm)));
                for &cm in &col_masks {
                    out.push_str(&format_cell_md(cell_symbol(rm | cm)));
                }
                out.push('\n');
            }
            Ok(out)
        }
        MapFormat::Csv => {
            let mut out = String::new();
            out.push_str("\"\"");
            for &cm in &col_masks {
                out.push(',');
                push_csv_quoted(&mut out, &label(cm));
            }
            out.push('\n');
            for &rm in &row_masks {
                push_csv_quoted(&mut out, &label(rm));
                for &cm in &col_masks {
                    out.push(',');
                    push_csv_quoted(&mut out, cell_symbol(rm | cm));
                }
                out.push('\n');
            }
            Ok(out)
        }
        MapFormat::Json => Ok(render_json(map)),
    }
}

fn format_cell_md(text: &str) -> String {
    let mut s = String::with_capacity(text.len() + 3);
    s.push(' ');
    s.push_str(text);
    s.push_str(" |");
    s
}

fn push_csv_quoted(out: &mut String, text: &str) {
    out.push('"');
    for ch in text.chars() {
        if ch == '"' {
            out.push('"');
        }
        out.push(ch);
    }
    out.push('"');
}

fn split_positions(
    map: &IntractabilityMap,
    params: &[ParameterName],
) -> Result<Vec<usize>, LatticeError> {
    let mut positions = Vec::with_capacity(params.len());
    for p in params {
        let pos = map
            .universe
            .iter()
            .position(|u| u == p)
            .ok_or(LatticeError::InvalidSplit)?;
        if positions.contains(&pos) {
            return Err(LatticeError::InvalidSplit);
        }
        positions.push(pos);
    }
    Ok(positions)
}

/// The full map as JSON: cells keyed by comma-joined parameter names in
/// canonical subset order.
fn render_json(map: &IntractabilityMap) -> String {
    let mut out = String::from("{\"universe\":[");
    for (i, p) in map.universe.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_json_string(&mut out, p.id());
    }
    out.push_str("],\"np_hard\":[");
    for (i, label) in map.np_hard.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_json_string(&mut out, label);
    }
    out.push_str("],\"cells\":{");
    let mut first = true;
    for mask in map.masks_canonical() {
        if !first {
            out.push(',');
        }
        first = false;
        let names: Vec<&str> = map
            .universe
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, p)| p.id())
            .collect();
        push_json_string(&mut out, &names.join(","));
        out.push_str(":{\"status\":");
        let cell = &map.cells[mask];
        push_json_string(&mut out, cell.status.as_str());
        out.push_str(",\"conjecture\":");
        match cell.conjecture {
            Some(c) => push_json_string(&mut out, c.as_str()),
            None => out.push_str("null"),
        }
        out.push_str(",\"provenance\":[");
        for (i, label) in cell.provenance.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            push_json_string(&mut out, label);
        }
        out.push_str("]}");
    }
    out.push_str("}}");
    out
}

fn push_json_string(out: &mut String, text: &str) {
    out.push('"');
    for ch in text.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                out.push_str(&alloc::format!("\\u{:04x}", c as u32));
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// What the map says about one concrete instance: the parameters below their
/// thresholds select a cell, whose status and provenance become the advice.
#[derive(Debug, Clone, PartialEq)]
pub struct AdviceReport {
    /// Parameter values of the instance, one entry per universe parameter
    /// (`None` when the instance does not carry that parameter).
    pub values: Vec<(ParameterName, Option<u64>)>,
    /// Universe parameters whose value is within the given threshold.
    pub small: Vec<ParameterName>,
    pub status: Status,
    pub conjecture: Option<Conjecture>,
    pub provenance: Vec<String>,
    /// True when no parameter is small and the problem is classically hard.
    pub np_hard_note: bool,
}

/// Looks up the instance's cell: extract parameters, keep those at or below
/// their thresholds, and read off the status of that parameter set.
pub fn advise(
    inst: &ProblemInstance,
    map: &IntractabilityMap,
    thresholds: &BTreeMap<ParameterName, u64>,
) -> AdviceReport {
    let params = inst.parameters();
    let mut values = Vec::new();
    let mut small = Vec::new();
    let mut mask = 0usize;
    for (pos, name) in map.universe.iter().enumerate() {
        let value = parameter_value(&params, name.id());
        if let (Some(v), Some(&limit)) = (value, thresholds.get(name)) {
            if v <= limit {
                small.push(name.clone());
                mask |= 1 << pos;
            }
        }
        values.push((name.clone(), value));
    }
    if mask == 0 {
        return AdviceReport {
            values,
            small,
            status: Status::Unknown,
            conjecture: None,
            provenance: Vec::new(),
            np_hard_note: !map.np_hard.is_empty(),
        };
    }
    let cell = &map.cells[mask];
    AdviceReport {
        values,
        small,
        status: cell.status,
        conjecture: cell.conjecture,
        provenance: cell.provenance.clone(),
        np_hard_note: false,
    }
}

fn parameter_value(params: &ParameterVector, id: &str) -> Option<u64> {
    match id {
        "F" => Some(params.features as u64),
        "A" => Some(params.actions as u64),
        "nd" => Some(params.demos as u64),
        "ld" => Some(params.max_demo_len as u64),
        "feap" => Some(params.max_state_size as u64),
        "t" => params.t.map(|v| v as u64),
        "f_t" => params.f_t.map(|v| v as u64),
        "c" => params.c.map(|v| v as u64),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(id: &str) -> ParameterName {
        ParameterName::new(id)
    }

    fn abcd_universe() -> Vec<ParameterName> {
        vec![p("A"), p("B"), p("C"), p("D")]
    }

    /// The four-parameter worked example: two intractability results, one
    /// tractability result, one classical hardness corner.
    fn abcd_results() -> Vec<RawResult> {
        vec![
            RawResult::np_hard("NPh"),
            RawResult::intractable(
                "R1",
                Conjecture::FptNeqW1,
                [
                    (p("A"), ParamSetting::Unbounded),
                    (p("C"), ParamSetting::Unbounded),
                    (p("D"), ParamSetting::Fixed(2)),
                ],
            ),
            RawResult::intractable(
                "R2",
                Conjecture::FptNeqW1,
                [
                    (p("B"), ParamSetting::Fixed(4)),
                    (p("C"), ParamSetting::Unbounded),
                ],
            ),
            RawResult::tractable(
                "R3",
                [
                    (p("A"), ParamSetting::Unbounded),
                    (p("B"), ParamSetting::Unbounded),
                ],
            ),
        ]
    }

    #[test]
    fn abcd_closure_statuses() {
        let map = propagate(&abcd_results(), &abcd_universe()).unwrap();
        let counts = count_statuses(&map);
        assert_eq!(
            (counts.tractable, counts.intractable, counts.unknown, counts.conflict),
            (4, 9, 2, 0)
        );
        assert_eq!(map.cell(&[p("A")]).unwrap().status, Status::Intractable);
        assert_eq!(map.cell(&[p("B"), p("D")]).unwrap().status, Status::Unknown);
        assert_eq!(
            map.cell(&[p("A"), p("B"), p("C"), p("D")]).unwrap().status,
            Status::Tractable
        );
        let r1_cell = map.cell(&[p("A"), p("C"), p("D")]).unwrap();
        assert_eq!(r1_cell.provenance, vec!["R1".to_string()]);
    }

    #[test]
    fn upward_closure_only_for_tractable() {
        let universe = vec![p("A"), p("B")];
        let results = vec![RawResult::tractable("T", [(p("A"), ParamSetting::Unbounded)])];
        let map = propagate(&results, &universe).unwrap();
        assert_eq!(map.cell(&[p("A")]).unwrap().status, Status::Tractable);
        assert_eq!(map.cell(&[p("A"), p("B")]).unwrap().status, Status::Tractable);
        assert_eq!(map.cell(&[p("B")]).unwrap().status, Status::Unknown);
    }

    #[test]
    fn conflicts_are_detected_with_provenance() {
        let universe = vec![p("A"), p("B")];
        let results = vec![
            RawResult::tractable("T", [(p("A"), ParamSetting::Unbounded)]),
            RawResult::intractable(
                "X",
                Conjecture::PNeqNp,
                [
                    (p("A"), ParamSetting::Unbounded),
                    (p("B"), ParamSetting::Unbounded),
                ],
            ),
        ];
        let map = propagate(&results, &universe).unwrap();
        let conflicts = detect_conflicts(&map);
        // both {A} and {A,B} are supersets of the tractable set and subsets
        // of the intractable one
        assert_eq!(conflicts.len(), 2);
        assert_eq!(conflicts[0].0, vec![p("A")]);
        assert_eq!(conflicts[0].1, vec!["T".to_string(), "X".to_string()]);
        assert_eq!(conflicts[1].0, vec![p("A"), p("B")]);
    }

    #[test]
    fn no_conflicts_in_the_worked_example() {
        let map = propagate(&abcd_results(), &abcd_universe()).unwrap();
        assert!(detect_conflicts(&map).is_empty());
    }

    #[test]
    fn empty_results_leave_everything_unknown() {
        let map = propagate(&[], &abcd_universe()).unwrap();
        let counts = count_statuses(&map);
        assert_eq!(counts.unknown, 15);
        assert_eq!(counts.tractable + counts.intractable + counts.conflict, 0);
        assert!(detect_conflicts(&map).is_empty());
    }

    #[test]
    fn closure_is_idempotent() {
        let map = propagate(&abcd_results(), &abcd_universe()).unwrap();
        // re-feed every determined cell as a raw result
        let mut results = Vec::new();
        for mask in map.masks_canonical() {
            let cell = map.cell_by_mask(mask);
            let params: Vec<(ParameterName, ParamSetting)> = map
                .params_of_mask(mask)
                .into_iter()
                .map(|p| (p, ParamSetting::Unbounded))
                .collect();
            match cell.status {
                Status::Tractable => results.push(RawResult::tractable("t", params)),
                Status::Intractable => results.push(RawResult::intractable(
                    "i",
                    cell.conjecture.unwrap(),
                    params,
                )),
                _ => {}
            }
        }
        let again = propagate(&results, &abcd_universe()).unwrap();
        for mask in map.masks_canonical() {
            assert_eq!(
                map.cell_by_mask(mask).status,
                again.cell_by_mask(mask).status,
                "cell {mask:#b}"
            );
        }
    }

    #[test]
    fn strongest_conjecture_wins() {
        let universe = vec![p("A"), p("B")];
        let results = vec![
            RawResult::intractable(
                "W",
                Conjecture::FptNeqW1,
                [(p("A"), ParamSetting::Unbounded), (p("B"), ParamSetting::Unbounded)],
            ),
            RawResult::intractable("N", Conjecture::PNeqNp, [(p("A"), ParamSetting::Unbounded)]),
        ];
        let map = propagate(&results, &universe).unwrap();
        let cell = map.cell(&[p("A")]).unwrap();
        assert_eq!(cell.conjecture, Some(Conjecture::PNeqNp));
        assert_eq!(cell.provenance, vec!["W".to_string(), "N".to_string()]);
        assert_eq!(
            map.cell(&[p("B")]).unwrap().conjecture,
            Some(Conjecture::FptNeqW1)
        );
    }

    #[test]
    fn rendering_the_worked_example_grid() {
        let map = propagate(&abcd_results(), &abcd_universe()).unwrap();
        let md = render_map(&map, &[p("A"), p("B")], &[p("C"), p("D")], MapFormat::Markdown)
            .unwrap();
        let expected = "\
| | -- | C | D | C,D |
| --- | --- | --- | --- | --- |
| -- | NPh | X | X | X |
| A | X | X | X | X |
| B | X | X | ??? | ??? |
| A,B | \u{221a} | \u{221a} | \u{221a} | \u{221a} |
";
        assert_eq!(md, expected);
        // byte-stable across runs
        let again = render_map(&map, &[p("A"), p("B")], &[p("C"), p("D")], MapFormat::Markdown)
            .unwrap();
        assert_eq!(md, again);
    }

    #[test]
    fn rendering_a_single_parameter_universe() {
        let universe = vec![p("A")];
        let map = propagate(&[], &universe).unwrap();
        let md = render_map(&map, &[p("A")], &[], MapFormat::Markdown).unwrap();
        let expected = "\
| | -- |
| --- | --- |
| -- | ??? |
| A | ??? |
";
        assert_eq!(md, expected);
    }

    #[test]
    fn csv_quotes_comma_labels() {
        let map = propagate(&abcd_results(), &abcd_universe()).unwrap();
        let csv = render_map(&map, &[p("A"), p("B")], &[p("C"), p("D")], MapFormat::Csv).unwrap();
        assert!(csv.starts_with("\"\",\"--\",\"C\",\"D\",\"C,D\"\n"));
        assert!(csv.contains("\"A,B\",\"\u{221a}\""));
    }

    #[test]
    fn json_rendering_contains_cells_in_canonical_order() {
        let map = propagate(&abcd_results(), &abcd_universe()).unwrap();
        let json = render_map(&map, &[p("A"), p("B")], &[p("C"), p("D")], MapFormat::Json).unwrap();
        let a = json.find("\"A\":{").unwrap();
        let d = json.find("\"D\":{").unwrap();
        let ab = json.find("\"A,B\":{").unwrap();
        assert!(a < d && d < ab);
        assert!(json.contains("\"np_hard\":[\"NPh\"]"));
        assert!(json.contains("\"conjecture\":\"FPT!=W[1]\""));
    }

    #[test]
    fn invalid_splits_are_rejected() {
        let map = propagate(&abcd_results(), &abcd_universe()).unwrap();
        assert_eq!(
            render_map(&map, &[p("A")], &[p("C"), p("D")], MapFormat::Markdown),
            Err(LatticeError::InvalidSplit)
        );
        assert_eq!(
            render_map(&map, &[p("A"), p("B"), p("C")], &[p("C"), p("D")], MapFormat::Markdown),
            Err(LatticeError::InvalidSplit)
        );
    }

    #[test]
    fn unknown_parameters_are_rejected() {
        let results = vec![RawResult::tractable("T", [(p("Z"), ParamSetting::Unbounded)])];
        assert!(matches!(
            propagate(&results, &abcd_universe()),
            Err(LatticeError::UnknownParameter { .. })
        ));
    }

    #[test]
    fn advice_follows_the_thresholds() {
        use crate::sample;
        let w = sample::weather();
        let inst = crate::model::ProblemInstance::batch(w.spaces, w.demos, 4, 1).unwrap();

        let universe = vec![p("t"), p("f_t"), p("F"), p("A"), p("nd"), p("ld"), p("feap")];
        let results = vec![
            RawResult::np_hard("A"),
            RawResult::tractable(
                "J",
                [(p("F"), ParamSetting::Unbounded), (p("A"), ParamSetting::Unbounded)],
            ),
            RawResult::intractable(
                "E(a)",
                Conjecture::FptNeqW1,
                [
                    (p("A"), ParamSetting::Fixed(1)),
                    (p("nd"), ParamSetting::Fixed(1)),
                    (p("t"), ParamSetting::Unbounded),
                    (p("f_t"), ParamSetting::Fixed(1)),
                ],
            ),
        ];
        let map = propagate(&results, &universe).unwrap();

        // thresholds that admit exactly F and A
        let thresholds: BTreeMap<ParameterName, u64> =
            [(p("F"), 5), (p("A"), 5)].into_iter().collect();
        let report = advise(&inst, &map, &thresholds);
        assert_eq!(report.small, vec![p("F"), p("A")]);
        assert_eq!(report.status, Status::Tractable);
        assert_eq!(report.provenance, vec!["J".to_string()]);

        // thresholds that admit A and f_t: subset of the intractable set
        let thresholds: BTreeMap<ParameterName, u64> =
            [(p("A"), 5), (p("f_t"), 5)].into_iter().collect();
        let report = advise(&inst, &map, &thresholds);
        assert_eq!(report.status, Status::Intractable);
        assert_eq!(report.conjecture, Some(Conjecture::FptNeqW1));

        // nothing small: unknown plus a classical-hardness note
        let report = advise(&inst, &map, &BTreeMap::new());
        assert_eq!(report.status, Status::Unknown);
        assert!(report.np_hard_note);
    }
}
