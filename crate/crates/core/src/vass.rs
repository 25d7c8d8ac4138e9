//! The VASS data model: integer vectors, transitions, configurations, paths
//! and the greedy short-cycle decomposition of paths.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Index of a control state within its [`Vass`], assigned in declaration order.
pub type StateId = usize;

/// A vector of `d` signed integers.
///
/// Updates live in `{-1, 0, 1}` and short-cycle effects are bounded by the
/// number of states, so `i64` entries never overflow on valid inputs; all
/// geometric work converts to exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntVector(pub Vec<i64>);

impl IntVector {
    pub fn zeros(dim: usize) -> Self {
        IntVector(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn add(&self, other: &IntVector) -> IntVector {
        debug_assert_eq!(self.dim(), other.dim());
        IntVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn add_assign(&mut self, other: &IntVector) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub fn neg(&self) -> IntVector {
        IntVector(self.0.iter().map(|a| -a).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }
}

impl From<Vec<i64>> for IntVector {
    fn from(v: Vec<i64>) -> Self {
        IntVector(v)
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub source: StateId,
    pub update: IntVector,
    pub target: StateId,
}

/// Unvalidated description of a VASS as produced by the input parsers.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RawVass {
    pub dimension: usize,
    pub states: Vec<RawState>,
    pub transitions: Vec<RawTransition>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawState {
    pub name: String,
    #[serde(skip)]
    pub line: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawTransition {
    pub source: String,
    pub update: Vec<i64>,
    pub target: String,
    #[serde(skip)]
    pub line: Option<usize>,
}

/// Where in the input an error was found, if known.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Line(pub Option<usize>);

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(l) => write!(f, "line {l}: "),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VassError {
    #[error("{line}dimension must be positive")]
    ZeroDimension { line: Line },
    #[error("{line}update has {found} entries, expected dimension {expected}")]
    DimensionMismatch {
        line: Line,
        expected: usize,
        found: usize,
    },
    #[error("{line}update entry {value} is not in {{-1,0,1}}")]
    UpdateOutOfRange { line: Line, value: i64 },
    #[error("{line}unknown state `{name}`")]
    UnknownState { line: Line, name: String },
    #[error("the state set is empty")]
    EmptyStateSet,
    #[error("{line}state `{name}` declared twice")]
    DuplicateState { line: Line, name: String },
    #[error("{line}duplicate transition {from} -> {to} {update}")]
    DuplicateTransition {
        line: Line,
        from: String,
        to: String,
        update: IntVector,
    },
}

impl VassError {
    /// Stable machine-readable code used in CLI diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            VassError::ZeroDimension { .. } => "ZeroDimension",
            VassError::DimensionMismatch { .. } => "DimensionMismatch",
            VassError::UpdateOutOfRange { .. } => "UpdateOutOfRange",
            VassError::UnknownState { .. } => "UnknownState",
            VassError::EmptyStateSet => "EmptyStateSet",
            VassError::DuplicateState { .. } => "DuplicateState",
            VassError::DuplicateTransition { .. } => "DuplicateTransition",
        }
    }
}

/// A validated `d`-dimensional VASS.
///
/// Transitions keep their declaration order; that order, together with the
/// state numbering, fixes every downstream tie-break.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vass {
    dimension: usize,
    states: Vec<String>,
    transitions: Vec<Transition>,
}

impl Vass {
    /// Validates a raw description, enforcing every structural invariant.
    pub fn validate(raw: &RawVass) -> Result<Vass, VassError> {
        if raw.dimension == 0 {
            return Err(VassError::ZeroDimension { line: Line(None) });
        }
        if raw.states.is_empty() {
            return Err(VassError::EmptyStateSet);
        }
        let mut states = Vec::with_capacity(raw.states.len());
        for s in &raw.states {
            if states.contains(&s.name) {
                return Err(VassError::DuplicateState {
                    line: Line(s.line),
                    name: s.name.clone(),
                });
            }
            states.push(s.name.clone());
        }
        let lookup = |name: &str, line: Option<usize>| {
            states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| VassError::UnknownState {
                    line: Line(line),
                    name: name.to_string(),
                })
        };
        let mut seen = HashSet::new();
        let mut transitions = Vec::with_capacity(raw.transitions.len());
        for t in &raw.transitions {
            let line = Line(t.line);
            if t.update.len() != raw.dimension {
                return Err(VassError::DimensionMismatch {
                    line,
                    expected: raw.dimension,
                    found: t.update.len(),
                });
            }
            if let Some(&value) = t.update.iter().find(|x| !(-1..=1).contains(*x)) {
                return Err(VassError::UpdateOutOfRange { line, value });
            }
            let source = lookup(&t.source, t.line)?;
            let target = lookup(&t.target, t.line)?;
            let tr = Transition {
                source,
                update: IntVector(t.update.clone()),
                target,
            };
            if !seen.insert(tr.clone()) {
                return Err(VassError::DuplicateTransition {
                    line,
                    from: t.source.clone(),
                    to: t.target.clone(),
                    update: tr.update,
                });
            }
            transitions.push(tr);
        }
        Ok(Vass {
            dimension: raw.dimension,
            states,
            transitions,
        })
    }

    /// Convenience constructor for code and tests: `(source, update, target)`.
    pub fn from_parts(
        dimension: usize,
        states: &[&str],
        transitions: &[(&str, &[i64], &str)],
    ) -> Result<Vass, VassError> {
        let raw = RawVass {
            dimension,
            states: states
                .iter()
                .map(|s| RawState {
                    name: s.to_string(),
                    line: None,
                })
                .collect(),
            transitions: transitions
                .iter()
                .map(|(s, u, t)| RawTransition {
                    source: s.to_string(),
                    update: u.to_vec(),
                    target: t.to_string(),
                    line: None,
                })
                .collect(),
        };
        Vass::validate(&raw)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.states[id]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Indices of transitions leaving `state`, in declaration order.
    pub fn outgoing(&self, state: StateId) -> impl Iterator<Item = usize> + '_ {
        self.transitions
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.source == state)
            .map(|(i, _)| i)
    }

    /// The sub-VASS on `states` (given in ascending id order) keeping exactly
    /// the transitions with both endpoints inside.
    pub fn restrict(&self, states: &[StateId]) -> Vass {
        let mut map = vec![None; self.states.len()];
        for (new, &old) in states.iter().enumerate() {
            map[old] = Some(new);
        }
        let transitions = self
            .transitions
            .iter()
            .filter_map(|t| {
                Some(Transition {
                    source: map[t.source]?,
                    update: t.update.clone(),
                    target: map[t.target]?,
                })
            })
            .collect();
        Vass {
            dimension: self.dimension,
            states: states.iter().map(|&s| self.states[s].clone()).collect(),
            transitions,
        }
    }

    /// Same states, only the transitions whose index satisfies `keep`.
    pub fn filter_transitions(&self, mut keep: impl FnMut(usize) -> bool) -> Vass {
        Vass {
            dimension: self.dimension,
            states: self.states.clone(),
            transitions: self
                .transitions
                .iter()
                .enumerate()
                .filter(|(i, _)| keep(*i))
                .map(|(_, t)| t.clone())
                .collect(),
        }
    }

    /// Transition rendered with state names, e.g. `q1 -> q2 [-1 0]`.
    pub fn render_transition(&self, t: &Transition) -> String {
        let upd: Vec<String> = t.update.0.iter().map(|x| x.to_string()).collect();
        format!(
            "{} -> {} [{}]",
            self.states[t.source],
            self.states[t.target],
            upd.join(" ")
        )
    }

    /// Canonical text: sorted states, sorted transitions, single spaces.
    pub fn canonical_text(&self) -> String {
        let mut states = self.states.clone();
        states.sort();
        let mut trans: Vec<String> = self
            .transitions
            .iter()
            .map(|t| self.render_transition(t))
            .collect();
        trans.sort();
        let mut out = format!("dim {}\nstates {}\n", self.dimension, states.join(" "));
        for t in trans {
            out.push_str(&t);
            out.push('\n');
        }
        out
    }

    /// Hex SHA-256 of [`Vass::canonical_text`].
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }

    /// Literal equality of state sets and transition sets, by name.
    pub fn same_structure(&self, other: &Vass) -> bool {
        self.canonical_text() == other.canonical_text()
    }

    /// Counter-example-free projection to the raw form (used by serializers).
    pub fn to_raw(&self) -> RawVass {
        RawVass {
            dimension: self.dimension,
            states: self
                .states
                .iter()
                .map(|s| RawState {
                    name: s.clone(),
                    line: None,
                })
                .collect(),
            transitions: self
                .transitions
                .iter()
                .map(|t| RawTransition {
                    source: self.states[t.source].clone(),
                    update: t.update.0.clone(),
                    target: self.states[t.target].clone(),
                    line: None,
                })
                .collect(),
        }
    }
}

/// A control state with a non-negative counter vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: StateId,
    pub counters: IntVector,
}

impl Configuration {
    /// Returns `None` if some counter is negative.
    pub fn new(state: StateId, counters: IntVector) -> Option<Self> {
        counters
            .0
            .iter()
            .all(|&c| c >= 0)
            .then_some(Configuration { state, counters })
    }

    /// The size of a configuration: its largest counter.
    pub fn size(&self) -> i64 {
        self.counters.0.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("path must contain at least one transition")]
    Empty,
    #[error("transition index {0} out of range")]
    NoSuchTransition(usize),
    #[error("transition {index} starts in state {found}, expected {expected}")]
    Disconnected {
        index: usize,
        expected: StateId,
        found: StateId,
    },
}

/// A finite path `p0, u1, p1, ..., un, pn`, stored as its start state and
/// the indices of the transitions it takes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    start: StateId,
    steps: Vec<usize>,
}

impl Path {
    pub fn new(vass: &Vass, start: StateId, steps: Vec<usize>) -> Result<Path, PathError> {
        let mut at = start;
        for &i in &steps {
            let t = vass
                .transitions()
                .get(i)
                .ok_or(PathError::NoSuchTransition(i))?;
            if t.source != at {
                return Err(PathError::Disconnected {
                    index: i,
                    expected: at,
                    found: t.source,
                });
            }
            at = t.target;
        }
        Ok(Path { start, steps })
    }

    /// Builds a non-empty path from transition indices, starting at the
    /// source of the first one.
    pub fn from_steps(vass: &Vass, steps: Vec<usize>) -> Result<Path, PathError> {
        let first = *steps.first().ok_or(PathError::Empty)?;
        let start = vass
            .transitions()
            .get(first)
            .ok_or(PathError::NoSuchTransition(first))?
            .source;
        Path::new(vass, start, steps)
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end(&self, vass: &Vass) -> StateId {
        self.steps
            .last()
            .map_or(self.start, |&i| vass.transitions()[i].target)
    }

    pub fn is_cycle(&self, vass: &Vass) -> bool {
        !self.steps.is_empty() && self.end(vass) == self.start
    }

    /// The visited states `p0, ..., pn`.
    pub fn states(&self, vass: &Vass) -> Vec<StateId> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(self.start);
        out.extend(self.steps.iter().map(|&i| vass.transitions()[i].target));
        out
    }

    pub fn render(&self, vass: &Vass) -> String {
        let mut s = vass.state_name(self.start).to_string();
        for &i in &self.steps {
            let t = &vass.transitions()[i];
            s.push_str(&format!(",{},{}", t.update, vass.state_name(t.target)));
        }
        s
    }
}

/// Sum of the updates along a path.
pub fn path_effect(vass: &Vass, path: &Path) -> IntVector {
    let mut eff = IntVector::zeros(vass.dimension());
    for &i in path.steps() {
        eff.add_assign(&vass.transitions()[i].update);
    }
    eff
}

/// Result of peeling short cycles off a path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub cycles: Vec<Path>,
    /// What is left once all cycles are removed; contains no short cycle.
    /// Its step list may be empty.
    pub residual: Path,
}

/// Greedy decomposition into short cycles: repeatedly remove the first
/// short cycle occurring in the path and continue on what remains.
///
/// The remaining prefix never repeats a state, so it is kept as a stack;
/// a state already on the stack closes the first short cycle.
pub fn decompose_short_cycles(vass: &Vass, path: &Path) -> Decomposition {
    let mut stack_states = vec![path.start()];
    let mut stack_steps: Vec<usize> = Vec::new();
    let mut cycles = Vec::new();
    for &i in path.steps() {
        let t = &vass.transitions()[i];
        stack_steps.push(i);
        if let Some(pos) = stack_states.iter().position(|&s| s == t.target) {
            let cycle_steps = stack_steps.split_off(pos);
            stack_states.truncate(pos + 1);
            cycles.push(Path {
                start: t.target,
                steps: cycle_steps,
            });
        } else {
            stack_states.push(t.target);
        }
    }
    Decomposition {
        cycles,
        residual: Path {
            start: path.start(),
            steps: stack_steps,
        },
    }
}
