//! Exact brute-force semantics for small instances.
//!
//! `longest_run` is a memoized depth-first search over the configuration
//! graph restricted to strictly positive counters. A configuration that
//! recurs on the current branch, or that dominates an ancestor in the same
//! state, proves an infinite zero-avoiding run; otherwise the reachable
//! graph is acyclic and the memoized maxima are exact.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::vass::{Configuration, Vass};

/// Environment variable overriding [`Budget::max_expansions`].
pub const BUDGET_ENV: &str = "VASS_BUDGET_STEPS";

/// How many ancestors are compared for domination.
const DOMINATION_WINDOW: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Distinct memoized configurations.
    pub max_configs: usize,
    /// Total successor generations.
    pub max_expansions: u64,
    /// Longest search branch.
    pub max_depth: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_configs: 1_000_000,
            max_expansions: 10_000_000,
            max_depth: 1_000_000,
        }
    }
}

impl Budget {
    /// Defaults, with the expansion budget taken from [`BUDGET_ENV`] when it
    /// holds a positive integer.
    pub fn from_env() -> Budget {
        let mut b = Budget::default();
        if let Some(steps) = std::env::var(BUDGET_ENV).ok().and_then(|s| s.trim().parse::<u64>().ok()) {
            if steps > 0 {
                b.max_expansions = steps;
            }
        }
        b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RunLength {
    Finite(u64),
    Infinite,
    BudgetExceeded,
}

impl RunLength {
    pub fn status(&self) -> &'static str {
        match self {
            RunLength::Finite(_) => "exact",
            RunLength::Infinite => "infinite",
            RunLength::BudgetExceeded => "budget",
        }
    }

    pub fn finite(&self) -> Option<u64> {
        match self {
            RunLength::Finite(l) => Some(*l),
            _ => None,
        }
    }
}

/// Search statistics accumulated over an [`Oracle`]'s lifetime.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub visited: usize,
    pub expansions: u64,
}

/// A memo table bound to one VASS. Values stay valid across calls, so
/// several start configurations can share the work.
pub struct Oracle<'a> {
    vass: &'a Vass,
    budget: Budget,
    outgoing: Vec<Vec<usize>>,
    /// Key: counters followed by the state id.
    memo: HashMap<Vec<i64>, u64>,
    expansions: u64,
}

struct Frame {
    key: Vec<i64>,
    next: usize,
    best: u64,
}

impl<'a> Oracle<'a> {
    pub fn new(vass: &'a Vass, budget: Budget) -> Self {
        let outgoing = (0..vass.num_states()).map(|q| vass.outgoing(q).collect()).collect();
        Oracle {
            vass,
            budget,
            outgoing,
            memo: HashMap::new(),
            expansions: 0,
        }
    }

    pub fn stats(&self) -> Stats {
        Stats {
            visited: self.memo.len(),
            expansions: self.expansions,
        }
    }

    /// Length of the longest zero-avoiding computation from `start`.
    pub fn longest_run(&mut self, start: &Configuration) -> RunLength {
        let d = self.vass.dimension();
        if start.counters.entries().iter().any(|&c| c <= 0) {
            return RunLength::Finite(0);
        }
        let mut root = start.counters.entries().to_vec();
        root.push(start.state as i64);
        if let Some(&l) = self.memo.get(&root) {
            return RunLength::Finite(l);
        }
        let mut on_branch: HashSet<Vec<i64>> = HashSet::new();
        on_branch.insert(root.clone());
        let mut stack = vec![Frame {
            key: root,
            next: 0,
            best: 0,
        }];
        while let Some(top) = stack.last_mut() {
            let state = top.key[d] as usize;
            let mut succ = None;
            while let Some(&ti) = self.outgoing[state].get(top.next) {
                top.next += 1;
                let t = &self.vass.transitions()[ti];
                let mut key = Vec::with_capacity(d + 1);
                let mut positive = true;
                for (c, u) in top.key[..d].iter().zip(t.update.entries()) {
                    let x = c + u;
                    positive &= x > 0;
                    key.push(x);
                }
                if positive {
                    key.push(t.target as i64);
                    succ = Some(key);
                    break;
                }
            }
            let Some(key) = succ else {
                let done = stack.pop().expect("non-empty stack");
                on_branch.remove(&done.key);
                self.memo.insert(done.key, done.best);
                match stack.last_mut() {
                    Some(parent) => parent.best = parent.best.max(done.best + 1),
                    None => return RunLength::Finite(done.best),
                }
                continue;
            };
            self.expansions += 1;
            if self.expansions > self.budget.max_expansions {
                return RunLength::BudgetExceeded;
            }
            if let Some(&l) = self.memo.get(&key) {
                let top = stack.last_mut().expect("non-empty stack");
                top.best = top.best.max(l + 1);
                continue;
            }
            if on_branch.contains(&key) || dominates_ancestor(&stack, &key, d) {
                return RunLength::Infinite;
            }
            if self.memo.len() + stack.len() >= self.budget.max_configs || stack.len() >= self.budget.max_depth {
                return RunLength::BudgetExceeded;
            }
            on_branch.insert(key.clone());
            stack.push(Frame { key, next: 0, best: 0 });
        }
        unreachable!("the root frame returns")
    }
}

/// Repeating the path from a recent ancestor in the same state with
/// counters `<=` the new ones keeps all counters positive forever.
fn dominates_ancestor(stack: &[Frame], key: &[i64], d: usize) -> bool {
    stack
        .iter()
        .rev()
        .take(DOMINATION_WINDOW)
        .any(|f| f.key[d] == key[d] && f.key[..d].iter().zip(&key[..d]).all(|(a, b)| a <= b))
}

/// Convenience wrapper with a fresh memo table.
pub fn longest_run(vass: &Vass, start: &Configuration, budget: Budget) -> (RunLength, Stats) {
    let mut o = Oracle::new(vass, budget);
    let r = o.longest_run(start);
    (r, o.stats())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleEntry {
    pub n: u64,
    pub value: RunLength,
    pub visited: usize,
    pub expansions: u64,
    /// Whether every start vector with largest entry `n` was evaluated.
    pub swept: bool,
    /// With a full sweep: whether the all-`n` vector attains the maximum.
    pub all_n_is_max: Option<bool>,
}

/// Counter vectors with entries in `1..=n` and at least one entry `n`, in
/// lexicographic order.
fn size_n_vectors(d: usize, n: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![1i64; d];
    loop {
        if cur.contains(&n) {
            out.push(cur.clone());
        }
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n {
                cur[i] += 1;
                break;
            }
            cur[i] = 1;
        }
    }
}

/// `L(n)`: the maximum over every state with all counters `n`; for
/// `d <= 2` and `n <= 16` also over every start of size `n` with positive
/// entries, recording whether the all-`n` vector was the maximizer.
pub fn termination_complexity(vass: &Vass, n: u64, budget: Budget) -> OracleEntry {
    assert!(n >= 1, "sizes start at 1");
    let d = vass.dimension();
    let mut o = Oracle::new(vass, budget);
    let all_n = vec![n as i64; d];
    let swept = d <= 2 && n <= 16;
    let mut starts = vec![all_n.clone()];
    if swept {
        starts.extend(size_n_vectors(d, n as i64).into_iter().filter(|v| *v != all_n));
    }
    let mut best_all_n = 0u64;
    let mut best = 0u64;
    let mut value = None;
    'outer: for counters in &starts {
        for q in 0..vass.num_states() {
            let c = Configuration::new(q, counters.clone().into()).expect("positive counters");
            match o.longest_run(&c) {
                RunLength::Finite(l) => {
                    best = best.max(l);
                    if *counters == all_n {
                        best_all_n = best_all_n.max(l);
                    }
                }
                other => {
                    value = Some(other);
                    break 'outer;
                }
            }
        }
    }
    let stats = o.stats();
    let finite = value.is_none();
    OracleEntry {
        n,
        value: value.unwrap_or(RunLength::Finite(best)),
        visited: stats.visited,
        expansions: stats.expansions,
        swept: swept && finite,
        all_n_is_max: (swept && finite).then_some(best_all_n == best),
    }
}

/// `n,L,status` rows; `L` is empty unless the value is exact.
pub fn to_csv(entries: &[OracleEntry]) -> String {
    let mut out = String::from("n,L,status\n");
    for e in entries {
        let l = e.value.finite().map(|l| l.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", e.n, l, e.value.status()));
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FitError {
    #[error("need at least three samples with increasing n and positive values")]
    InsufficientSamples,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentFit {
    /// Least-squares slope of `ln L` against `ln n`.
    pub exponent: f64,
    /// `L(n_{i+1}) / L(n_i)` for consecutive samples.
    pub ratios: Vec<f64>,
}

impl fmt::Display for ExponentFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exponent {:.3}, ratios", self.exponent)?;
        for r in &self.ratios {
            write!(f, " {r:.3}")?;
        }
        Ok(())
    }
}

pub fn fit_exponent(samples: &[(u64, u64)]) -> Result<ExponentFit, FitError> {
    if samples.len() < 3
        || samples.iter().any(|&(n, l)| n == 0 || l == 0)
        || samples.windows(2).any(|w| w[0].0 >= w[1].0)
    {
        return Err(FitError::InsufficientSamples);
    }
    let xs: Vec<f64> = samples.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, l)| (l as f64).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let ratios = samples.windows(2).map(|w| w[1].1 as f64 / w[0].1 as f64).collect();
    Ok(ExponentFit {
        exponent: sxy / sxx,
        ratios,
    })
}
