//! Strongly connected components of the control graph (Tarjan).

use crate::vass::{StateId, Vass};

/// One strongly connected component together with the restricted VASS.
#[derive(Clone, Debug)]
pub struct Component {
    /// State ids of the parent VASS, ascending.
    pub states: Vec<StateId>,
    /// The parent restricted to `states`.
    pub vass: Vass,
}

impl Component {
    pub fn has_transitions(&self) -> bool {
        !self.vass.transitions().is_empty()
    }

    /// `{q1,q2}` using the parent's state names.
    pub fn label(&self, parent: &Vass) -> String {
        state_set_label(parent, &self.states)
    }
}

pub fn state_set_label(vass: &Vass, states: &[StateId]) -> String {
    let names: Vec<&str> = states.iter().map(|&s| vass.state_name(s)).collect();
    format!("{{{}}}", names.join(","))
}

/// SCCs of an arbitrary directed graph given as adjacency lists, in reverse
/// topological order (sink components first). Members of each component are
/// sorted ascending.
pub fn tarjan(adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = adjacency.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut out = Vec::new();
    // (node, position in its adjacency list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = adjacency[v].get(*pos) {
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out
}

pub fn adjacency(vass: &Vass) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); vass.num_states()];
    for t in vass.transitions() {
        if !adj[t.source].contains(&t.target) {
            adj[t.source].push(t.target);
        }
    }
    adj
}

/// SCCs in reverse topological order, each with its restricted VASS.
pub fn scc_decompose(vass: &Vass) -> Vec<Component> {
    tarjan(&adjacency(vass))
        .into_iter()
        .map(|states| {
            let restricted = vass.restrict(&states);
            Component {
                states,
                vass: restricted,
            }
        })
        .collect()
}

pub fn is_strongly_connected(vass: &Vass) -> bool {
    tarjan(&adjacency(vass)).len() == 1
}
