//! Linear termination complexity via weighted linear ranking (WLR)
//! functions.
//!
//! A WLR function for a strongly connected VASS is a coefficient vector
//! `c >= 0` with a weight `h_q` per state such that every transition
//! `(p, u, q)` satisfies `h_p - h_q >= c.u + eps` for some `eps > 0`. Such a
//! function exists iff every short-cycle effect lies in an open half-space
//! with a positive normal, which is exactly linear complexity. The search
//! fixes `eps = 1`; the system is homogeneous, so nothing is lost.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::inc::{compute_inc, IncSet};
use crate::lp::{rat, Domain, LinearProgram, LpOutcome, RatVector, Rational, Relation};
use crate::scc::{scc_decompose, state_set_label};
use crate::vass::{IntVector, Vass};

/// A WLR function for one strongly connected component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WlrEntry {
    /// State names forming the component.
    pub states: Vec<String>,
    pub normal: RatVector,
    /// One weight per entry of `states`, same order.
    #[serde(with = "crate::lp::rational_text::vec")]
    pub weights: Vec<Rational>,
    #[serde(with = "crate::lp::rational_text")]
    pub epsilon: Rational,
}

impl WlrEntry {
    pub fn label(&self) -> String {
        format!("{{{}}}", self.states.join(","))
    }
}

/// Per-component WLR functions covering every component with transitions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WlrCertificate {
    pub entries: Vec<WlrEntry>,
}

/// Witness that no positive normal puts every cycle effect strictly below
/// zero: non-negative coefficients over `Inc`, summing to one, whose
/// combination is entrywise non-negative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthWitness {
    pub generators: Vec<IntVector>,
    #[serde(with = "crate::lp::rational_text::vec")]
    pub coefficients: Vec<Rational>,
}

impl GrowthWitness {
    pub fn verify(&self, inc: &IncSet) -> bool {
        if self.generators.len() != self.coefficients.len()
            || !self.generators.iter().all(|g| inc.contains(g))
            || self.coefficients.iter().any(Signed::is_negative)
        {
            return false;
        }
        let total: Rational = self.coefficients.iter().sum();
        let comb = crate::lp::combine(&self.generators, &self.coefficients);
        total.is_one() && comb.iter().all(|x| !x.is_negative())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SccLinearity {
    Linear(WlrEntry),
    NotLinear(Option<GrowthWitness>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Linearity {
    Linear(WlrCertificate),
    NotLinear {
        /// Label of the first component found without a WLR function.
        blamed: String,
        blamed_states: Vec<String>,
        witness: Option<GrowthWitness>,
    },
}

/// Decides linearity of a strongly connected VASS with at least one
/// transition by solving `{h_p - h_q - u.c >= 1, c >= 0}`.
pub fn check_linear_scc(vass: &Vass, inc: &IncSet) -> SccLinearity {
    let d = vass.dimension();
    let mut lp = LinearProgram::new();
    for i in 0..d {
        lp.add_var(format!("c{i}"), Domain::NonNegative);
    }
    for q in vass.state_names() {
        lp.add_var(format!("h_{q}"), Domain::Free);
    }
    for t in vass.transitions() {
        let mut terms: Vec<(usize, Rational)> = Vec::new();
        for (i, &u) in t.update.entries().iter().enumerate() {
            if u != 0 {
                terms.push((i, rat(-u)));
            }
        }
        if t.source != t.target {
            terms.push((d + t.source, Rational::one()));
            terms.push((d + t.target, -Rational::one()));
        }
        lp.add_constraint(&terms, Relation::Ge, Rational::one());
    }
    match lp.solve() {
        LpOutcome::Feasible(point) => SccLinearity::Linear(WlrEntry {
            states: vass.state_names().to_vec(),
            normal: RatVector(point.0[..d].to_vec()),
            weights: point.0[d..].to_vec(),
            epsilon: Rational::one(),
        }),
        _ => SccLinearity::NotLinear(growth_witness(inc)),
    }
}

/// Finds `a >= 0` with `sum a = 1` and `sum a_v v >= 0` over `Inc`.
pub fn growth_witness(inc: &IncSet) -> Option<GrowthWitness> {
    let generators = inc.to_vec();
    if generators.is_empty() {
        return None;
    }
    let mut lp = LinearProgram::new();
    for i in 0..generators.len() {
        lp.add_var(format!("a{i}"), Domain::NonNegative);
    }
    let all: Vec<(usize, Rational)> = (0..generators.len()).map(|i| (i, Rational::one())).collect();
    lp.add_constraint(&all, Relation::Eq, Rational::one());
    for k in 0..inc.dimension() {
        let terms: Vec<(usize, Rational)> = generators
            .iter()
            .enumerate()
            .filter(|(_, g)| g.entries()[k] != 0)
            .map(|(i, g)| (i, rat(g.entries()[k])))
            .collect();
        lp.add_constraint(&terms, Relation::Ge, Rational::zero());
    }
    let coefficients = lp.solve().point()?.0.clone();
    // keep only the support
    let (generators, coefficients): (Vec<_>, Vec<_>) = generators
        .into_iter()
        .zip(coefficients)
        .filter(|(_, c)| !c.is_zero())
        .unzip();
    let w = GrowthWitness {
        generators,
        coefficients,
    };
    w.verify(inc).then_some(w)
}

/// Linearity of an arbitrary VASS: linear iff every component with at least
/// one transition is. Components are visited in reverse topological order.
pub fn check_linear(vass: &Vass) -> Linearity {
    let mut entries = Vec::new();
    for comp in scc_decompose(vass) {
        if !comp.has_transitions() {
            continue;
        }
        let inc = compute_inc(&comp.vass, false);
        match check_linear_scc(&comp.vass, &inc) {
            SccLinearity::Linear(entry) => entries.push(entry),
            SccLinearity::NotLinear(witness) => {
                return Linearity::NotLinear {
                    blamed: state_set_label(vass, &comp.states),
                    blamed_states: comp.vass.state_names().to_vec(),
                    witness,
                }
            }
        }
    }
    Linearity::Linear(WlrCertificate { entries })
}

/// Exact check of one entry against the component it names.
pub fn verify_wlr_entry(component: &Vass, entry: &WlrEntry) -> Result<(), String> {
    if entry.states != component.state_names() {
        return Err(format!("entry {} does not match component states", entry.label()));
    }
    if entry.normal.dim() != component.dimension() {
        return Err(format!("entry {}: normal has wrong dimension", entry.label()));
    }
    if entry.weights.len() != entry.states.len() {
        return Err(format!("entry {}: one weight per state required", entry.label()));
    }
    if !entry.normal.all_nonnegative() {
        return Err(format!("entry {}: normal must be non-negative", entry.label()));
    }
    if !entry.epsilon.is_positive() {
        return Err(format!("entry {}: epsilon must be positive", entry.label()));
    }
    for t in component.transitions() {
        let lhs = &entry.weights[t.source] - &entry.weights[t.target];
        let rhs = entry.normal.dot_int(&t.update) + &entry.epsilon;
        if lhs < rhs {
            return Err(format!(
                "entry {}: ranking condition fails on {}",
                entry.label(),
                component.render_transition(t)
            ));
        }
    }
    Ok(())
}

/// Verifies a full certificate: every entry names a component of `vass`,
/// satisfies the ranking condition on all its transitions, and every
/// component with transitions is covered.
pub fn verify_wlr_detailed(vass: &Vass, cert: &WlrCertificate) -> Result<(), String> {
    let comps = scc_decompose(vass);
    for comp in comps.iter().filter(|c| c.has_transitions()) {
        let names = comp.vass.state_names();
        let entry = cert
            .entries
            .iter()
            .find(|e| e.states == names)
            .ok_or_else(|| format!("component {} is not covered", comp.label(vass)))?;
        verify_wlr_entry(&comp.vass, entry)?;
    }
    for e in &cert.entries {
        if !comps.iter().any(|c| c.vass.state_names() == e.states.as_slice()) {
            return Err(format!("entry {} is not a component", e.label()));
        }
    }
    Ok(())
}

pub fn verify_wlr(vass: &Vass, cert: &WlrCertificate) -> bool {
    verify_wlr_detailed(vass, cert).is_ok()
}
