//! The recursive polynomial-degree analysis.
//!
//! For a strongly connected VASS in category C with good normal `n`, the
//! neutral restriction keeps the transitions lying on some short cycle with
//! zero `n`-product. Its transition-bearing components are analyzed
//! recursively: none at all means linear time, a single component equal to
//! the input means non-termination, and otherwise the degree is one more
//! than the largest child degree.

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{classify, Category};
use crate::inc::compute_inc;
use crate::linear::{check_linear_scc, GrowthWitness, Linearity, SccLinearity, WlrCertificate, WlrEntry};
use crate::lp::{RatVector, Rational};
use crate::scc::{scc_decompose, state_set_label};
use crate::vass::{StateId, Vass};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("negative cycle under the supplied normal: it is not a good normal")]
    NegativeCycleDetected,
    #[error("recursion exceeded the depth budget")]
    DepthExceeded,
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

impl PolyError {
    pub fn code(&self) -> &'static str {
        match self {
            PolyError::NegativeCycleDetected => "NegativeCycleDetected",
            PolyError::DepthExceeded => "DepthExceeded",
            PolyError::Inconsistent(_) => "Internal",
        }
    }
}

/// Indices of the transitions `(q, u, q')` for which the least weight of a
/// path from `q'` back to `q`, with edge weight `-u.n`, equals `u.n`, i.e.
/// the transitions closing a cycle of zero `n`-product.
pub fn restriction_indices(vass: &Vass, normal: &RatVector) -> Result<Vec<usize>, PolyError> {
    let nq = vass.num_states();
    let weights: Vec<Rational> = vass.transitions().iter().map(|t| -normal.dot_int(&t.update)).collect();
    // dist[s][q] = least weight from s to q, None when unreachable
    let mut dist: Vec<Vec<Option<Rational>>> = Vec::with_capacity(nq);
    for s in 0..nq {
        let mut row: Vec<Option<Rational>> = vec![None; nq];
        row[s] = Some(Rational::zero());
        for round in 0..nq {
            let mut changed = false;
            for (t, w) in vass.transitions().iter().zip(&weights) {
                let Some(base) = row[t.source].clone() else { continue };
                let cand = base + w;
                if row[t.target].as_ref().is_none_or(|cur| cand < *cur) {
                    row[t.target] = Some(cand);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            // a relaxation in round |Q| means a negative cycle
            if round + 1 == nq {
                return Err(PolyError::NegativeCycleDetected);
            }
        }
        dist.push(row);
    }
    let mut keep = Vec::new();
    for (i, t) in vass.transitions().iter().enumerate() {
        if let Some(back) = &dist[t.target][t.source] {
            if *back == -&weights[i] {
                keep.push(i);
            }
        }
    }
    Ok(keep)
}

/// The neutral restriction `T_n`: same states, transitions from
/// [`restriction_indices`].
pub fn build_restriction(vass: &Vass, normal: &RatVector) -> Result<Vass, PolyError> {
    let keep = restriction_indices(vass, normal)?;
    Ok(vass.filter_transitions(|i| keep.binary_search(&i).is_ok()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    /// No cycles at all.
    Constant,
    /// Category A or B.
    NoPositiveNormal,
    /// Category D.
    SingularNormal,
    /// The neutral restriction has no cycles: linear.
    LinearBase,
    /// The neutral restriction is a single component equal to the input.
    Fixpoint,
    /// One plus the largest child degree, or inherited from a child that
    /// does not terminate or is in category D.
    Recursive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Constant,
    Degree(usize),
    NonTerminating,
    CategoryD,
}

/// One node per analyzed strongly connected sub-VASS.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationTree {
    pub states: Vec<String>,
    pub fingerprint: String,
    /// Category with its evidence; `None` when there are no cycles.
    pub category: Option<Category>,
    /// Rendered transitions of the neutral restriction (category C only).
    pub restriction: Vec<String>,
    pub rule: Rule,
    pub outcome: Outcome,
    pub children: Vec<DerivationTree>,
}

impl DerivationTree {
    pub fn label(&self) -> String {
        format!("{{{}}}", self.states.join(","))
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(DerivationTree::depth).max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NonTermReason {
    CategoryA,
    CategoryB,
    Fixpoint,
    /// Some sub-VASS further down the derivation does not terminate.
    Descendant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    NonTerminating(NonTermReason),
    ConstantBound,
    Linear(WlrEntry),
    Polynomial(usize),
    CategoryD,
}

impl Verdict {
    /// `Theta(n^2)`, `Theta(n)`, `NonTerminating`, ...
    pub fn render(&self) -> String {
        match self {
            Verdict::NonTerminating(_) => "NonTerminating".into(),
            Verdict::ConstantBound => "Constant".into(),
            Verdict::Linear(_) | Verdict::Polynomial(1) => "Theta(n)".into(),
            Verdict::Polynomial(k) => format!("Theta(n^{k})"),
            Verdict::CategoryD => "CategoryD".into(),
        }
    }
}

pub fn reason_of(tree: &DerivationTree) -> NonTermReason {
    match (&tree.rule, &tree.category) {
        (Rule::Fixpoint, _) => NonTermReason::Fixpoint,
        (Rule::NoPositiveNormal, Some(Category::A { .. })) => NonTermReason::CategoryA,
        (Rule::NoPositiveNormal, _) => NonTermReason::CategoryB,
        _ => NonTermReason::Descendant,
    }
}

fn node(vass: &Vass, depth_left: usize) -> Result<DerivationTree, PolyError> {
    if depth_left == 0 {
        return Err(PolyError::DepthExceeded);
    }
    let base = |category, restriction, rule, outcome, children| DerivationTree {
        states: vass.state_names().to_vec(),
        fingerprint: vass.fingerprint(),
        category,
        restriction,
        rule,
        outcome,
        children,
    };
    let inc = compute_inc(vass, false);
    if inc.is_empty() {
        return Ok(base(None, vec![], Rule::Constant, Outcome::Constant, vec![]));
    }
    let category = classify(&inc);
    let gn = match &category {
        Category::A { .. } | Category::B { .. } => {
            return Ok(base(Some(category), vec![], Rule::NoPositiveNormal, Outcome::NonTerminating, vec![]))
        }
        Category::D { .. } => {
            return Ok(base(Some(category), vec![], Rule::SingularNormal, Outcome::CategoryD, vec![]))
        }
        Category::C(gn) => gn.clone(),
    };
    let restricted = build_restriction(vass, &gn.normal)?;
    let restriction: Vec<String> = restricted.transitions().iter().map(|t| restricted.render_transition(t)).collect();
    let comps: Vec<_> = scc_decompose(&restricted).into_iter().filter(|c| c.has_transitions()).collect();
    if comps.is_empty() {
        return Ok(base(Some(category), restriction, Rule::LinearBase, Outcome::Degree(1), vec![]));
    }
    if comps.len() == 1 && comps[0].vass.same_structure(vass) {
        return Ok(base(Some(category), restriction, Rule::Fixpoint, Outcome::NonTerminating, vec![]));
    }
    let children = comps
        .iter()
        .map(|c| node(&c.vass, depth_left - 1))
        .collect::<Result<Vec<_>, _>>()?;
    let outcome = if children.iter().any(|c| c.outcome == Outcome::NonTerminating) {
        Outcome::NonTerminating
    } else if children.iter().any(|c| c.outcome == Outcome::CategoryD) {
        Outcome::CategoryD
    } else {
        let max = children
            .iter()
            .map(|c| match c.outcome {
                Outcome::Degree(k) => k,
                _ => 0,
            })
            .max()
            .unwrap_or(0);
        Outcome::Degree(1 + max)
    };
    if let Outcome::Degree(k) = outcome {
        if k > vass.dimension() {
            return Err(PolyError::Inconsistent(format!("degree {k} exceeds the dimension")));
        }
    }
    Ok(base(Some(category), restriction, Rule::Recursive, outcome, children))
}

/// Analyzes a strongly connected VASS. The returned verdict is never
/// `Linear`; degree one is reported as `Polynomial(1)`.
pub fn analyze_scc(vass: &Vass, depth_budget: usize) -> Result<(Verdict, DerivationTree), PolyError> {
    let tree = node(vass, depth_budget)?;
    let verdict = match tree.outcome {
        Outcome::Constant => Verdict::ConstantBound,
        Outcome::Degree(k) => Verdict::Polynomial(k),
        Outcome::NonTerminating => Verdict::NonTerminating(reason_of(&tree)),
        Outcome::CategoryD => Verdict::CategoryD,
    };
    Ok((verdict, tree))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SccAnalysis {
    /// States of the parent VASS, ascending.
    pub states: Vec<StateId>,
    pub label: String,
    pub verdict: Verdict,
    pub tree: DerivationTree,
    /// Present when the component has cycles but no WLR function.
    pub growth: Option<GrowthWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Analysis {
    /// In reverse topological order.
    pub sccs: Vec<SccAnalysis>,
    pub linearity: Linearity,
}

impl Analysis {
    pub fn overall(&self) -> String {
        summarize(self.sccs.iter().map(|s| s.tree.outcome))
    }
}

/// Summary over all components. Any non-terminating component makes the
/// whole VASS non-terminating; otherwise category D dominates, then the
/// largest degree. With several cyclic components the degrees are not
/// composed, so the largest one is only a lower bound.
pub fn summarize(outcomes: impl IntoIterator<Item = Outcome>) -> String {
    let outcomes: Vec<Outcome> = outcomes.into_iter().collect();
    if outcomes.contains(&Outcome::NonTerminating) {
        return "NonTerminating".into();
    }
    if outcomes.contains(&Outcome::CategoryD) {
        return "CategoryD".into();
    }
    let degrees: Vec<usize> = outcomes
        .iter()
        .filter_map(|o| match o {
            Outcome::Degree(k) => Some(*k),
            _ => None,
        })
        .collect();
    match degrees.iter().max() {
        None => "Constant".into(),
        Some(1) => "Theta(n)".into(),
        Some(&k) if degrees.len() == 1 => format!("Theta(n^{k})"),
        Some(&k) => format!("Omega(n^{k})"),
    }
}

/// Verdict text for a single component's outcome.
pub fn render_outcome(outcome: Outcome) -> String {
    match outcome {
        Outcome::Constant => "Constant".into(),
        Outcome::Degree(1) => "Theta(n)".into(),
        Outcome::Degree(k) => format!("Theta(n^{k})"),
        Outcome::NonTerminating => "NonTerminating".into(),
        Outcome::CategoryD => "CategoryD".into(),
    }
}

/// Per-component verdicts plus the global linearity answer.
pub fn analyze(vass: &Vass) -> Result<Analysis, PolyError> {
    let mut sccs = Vec::new();
    let mut entries = Vec::new();
    let mut not_linear = None;
    for comp in scc_decompose(vass) {
        let label = state_set_label(vass, &comp.states);
        let (mut verdict, tree) = analyze_scc(&comp.vass, vass.dimension() + 1)?;
        let mut growth = None;
        if comp.has_transitions() {
            let inc = compute_inc(&comp.vass, false);
            match check_linear_scc(&comp.vass, &inc) {
                SccLinearity::Linear(entry) => {
                    if verdict != Verdict::Polynomial(1) {
                        return Err(PolyError::Inconsistent(format!(
                            "{label} has a WLR function but verdict {}",
                            verdict.render()
                        )));
                    }
                    entries.push(entry.clone());
                    verdict = Verdict::Linear(entry);
                }
                SccLinearity::NotLinear(w) => {
                    if verdict == Verdict::Polynomial(1) {
                        return Err(PolyError::Inconsistent(format!("{label} is degree one without a WLR function")));
                    }
                    growth = w.clone();
                    if not_linear.is_none() {
                        not_linear = Some(Linearity::NotLinear {
                            blamed: label.clone(),
                            blamed_states: comp.vass.state_names().to_vec(),
                            witness: w,
                        });
                    }
                }
            }
        }
        sccs.push(SccAnalysis {
            states: comp.states,
            label,
            verdict,
            tree,
            growth,
        });
    }
    let linearity = not_linear.unwrap_or(Linearity::Linear(WlrCertificate { entries }));
    Ok(Analysis { sccs, linearity })
}
