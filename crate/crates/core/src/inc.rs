//! Effects of short cycles.
//!
//! `E[k][q][q']` holds the effects of all paths from `q` to `q'` of length
//! exactly `k`; the set of short-cycle effects is the union of the diagonal
//! entries for `k = 1..=|Q|`. Sets are ordered so that witness selection
//! and all output are deterministic.

use std::collections::{BTreeMap, BTreeSet};

use crate::vass::{path_effect, IntVector, Path, StateId, Vass};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncSet {
    dimension: usize,
    effects: BTreeSet<IntVector>,
    witnesses: Option<BTreeMap<IntVector, Path>>,
}

impl IncSet {
    pub fn from_effects(dimension: usize, effects: impl IntoIterator<Item = IntVector>) -> Self {
        IncSet {
            dimension,
            effects: effects.into_iter().collect(),
            witnesses: None,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn effects(&self) -> &BTreeSet<IntVector> {
        &self.effects
    }

    /// Effects in lexicographic order.
    pub fn to_vec(&self) -> Vec<IntVector> {
        self.effects.iter().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn contains(&self, v: &IntVector) -> bool {
        self.effects.contains(v)
    }

    pub fn witness(&self, effect: &IntVector) -> Option<&Path> {
        self.witnesses.as_ref()?.get(effect)
    }

    pub fn witnesses(&self) -> Option<&BTreeMap<IntVector, Path>> {
        self.witnesses.as_ref()
    }
}

/// Predecessor of an entry `(k, q', effect)`: the state before the last
/// step and the index of the transition taken.
type BackPtr = (StateId, usize);

pub fn compute_inc(vass: &Vass, want_witnesses: bool) -> IncSet {
    let nq = vass.num_states();
    let mut effects = BTreeSet::new();
    let mut witnesses = want_witnesses.then(BTreeMap::new);

    for source in 0..nq {
        // layers[k - 1][target] : effect -> back pointer
        let mut layers: Vec<Vec<BTreeMap<IntVector, BackPtr>>> = Vec::new();
        let mut first = vec![BTreeMap::new(); nq];
        for i in vass.outgoing(source) {
            let t = &vass.transitions()[i];
            first[t.target].entry(t.update.clone()).or_insert((source, i));
        }
        layers.push(first);

        for k in 1..=nq {
            let current = layers.last().expect("at least one layer");
            for eff in current[source].keys() {
                if effects.insert(eff.clone()) {
                    if let Some(w) = witnesses.as_mut() {
                        w.insert(eff.clone(), reconstruct(vass, &layers, source, eff));
                    }
                }
            }
            if k == nq {
                break;
            }
            let mut next = vec![BTreeMap::new(); nq];
            for (mid, entries) in current.iter().enumerate() {
                if entries.is_empty() {
                    continue;
                }
                for i in vass.outgoing(mid) {
                    let t = &vass.transitions()[i];
                    for eff in entries.keys() {
                        next[t.target]
                            .entry(eff.add(&t.update))
                            .or_insert((mid, i));
                    }
                }
            }
            if want_witnesses {
                layers.push(next);
            } else {
                layers[0] = next;
            }
        }
    }
    IncSet {
        dimension: vass.dimension(),
        effects,
        witnesses,
    }
}

fn reconstruct(
    vass: &Vass,
    layers: &[Vec<BTreeMap<IntVector, BackPtr>>],
    source: StateId,
    effect: &IntVector,
) -> Path {
    let mut steps = Vec::with_capacity(layers.len());
    let mut at = source;
    let mut eff = effect.clone();
    for layer in layers.iter().rev() {
        let &(prev, t) = layer[at]
            .get(&eff)
            .expect("back pointer chain is complete");
        steps.push(t);
        eff = IntVector(
            eff.entries()
                .iter()
                .zip(vass.transitions()[t].update.entries())
                .map(|(a, b)| a - b)
                .collect(),
        );
        at = prev;
    }
    steps.reverse();
    let path = Path::new(vass, source, steps).expect("witness is a path");
    debug_assert_eq!(&path_effect(vass, &path), effect);
    path
}
