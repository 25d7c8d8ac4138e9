//! Seeded generators and brute-force reference implementations shared by
//! the integration tests. Nothing here calls into the analyzer's own
//! algorithms, so agreement is meaningful.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vass_complexity::lp::{rat, Domain, LinearProgram, Relation};
use vass_complexity::{IntVector, Rational, Vass};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub const CORPUS: [&str; 5] = ["fig2a", "fig2b", "fig2c", "fig4", "fig5"];

pub fn corpus_path(name: &str) -> PathBuf {
    corpus_dir().join(format!("{name}.vass"))
}

pub fn load_corpus(name: &str) -> Vass {
    vass_complexity::format::read_vass(&corpus_path(name)).expect("corpus file parses")
}

/// Entries of `{-1,0,1}` in proportions `weights` (for -1, 0, 1).
fn random_update(rng: &mut ChaCha8Rng, d: usize, weights: [u32; 3]) -> Vec<i64> {
    let total: u32 = weights.iter().sum();
    (0..d)
        .map(|_| {
            let x = rng.gen_range(0..total);
            if x < weights[0] {
                -1
            } else if x < weights[0] + weights[1] {
                0
            } else {
                1
            }
        })
        .collect()
}

pub const UNIFORM: [u32; 3] = [1, 1, 1];
/// Favors decrements, so more of the generated systems terminate.
pub const DECREASING: [u32; 3] = [5, 3, 2];

/// Random VASS with `1..=max_states` states over `1..=max_dim` counters.
/// With `connected`, a Hamiltonian cycle is laid down first so the result
/// is strongly connected.
pub fn random_vass(rng: &mut ChaCha8Rng, max_states: usize, max_dim: usize, connected: bool) -> Vass {
    let q = rng.gen_range(1..=max_states);
    let d = rng.gen_range(1..=max_dim);
    random_vass_exact(rng, q, d, connected)
}

pub fn random_vass_exact(rng: &mut ChaCha8Rng, q: usize, d: usize, connected: bool) -> Vass {
    random_vass_weighted(rng, q, d, connected, UNIFORM)
}

/// Strongly connected two-counter VASS in which most states carry a
/// self-loop moving one unit between the counters and the edges between
/// states mostly decrement: the shape behind polynomial complexities above
/// linear.
pub fn random_transfer_vass(rng: &mut ChaCha8Rng, q: usize) -> Vass {
    const CROSS: [[i64; 2]; 8] = [[-1, 0], [0, -1], [-1, -1], [-1, 0], [0, -1], [-1, 1], [1, -1], [0, 0]];
    let names: Vec<String> = (0..q).map(|i| format!("q{i}")).collect();
    let mut edges: Vec<(usize, [i64; 2], usize)> = Vec::new();
    let mut push = |e: (usize, [i64; 2], usize)| {
        if !edges.contains(&e) {
            edges.push(e);
        }
    };
    for i in 0..q {
        if rng.gen_bool(0.8) {
            push((i, if rng.gen_bool(0.5) { [-1, 1] } else { [1, -1] }, i));
        }
        if q > 1 {
            push((i, *CROSS.choose(rng).unwrap(), (i + 1) % q));
        }
    }
    for _ in 0..rng.gen_range(0..=q) {
        push((rng.gen_range(0..q), *CROSS.choose(rng).unwrap(), rng.gen_range(0..q)));
    }
    let state_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let trans: Vec<(&str, &[i64], &str)> = edges
        .iter()
        .map(|(s, u, t)| (names[*s].as_str(), u.as_slice(), names[*t].as_str()))
        .collect();
    Vass::from_parts(2, &state_refs, &trans).expect("generated VASS is valid")
}

pub fn random_vass_weighted(rng: &mut ChaCha8Rng, q: usize, d: usize, connected: bool, weights: [u32; 3]) -> Vass {
    let names: Vec<String> = (0..q).map(|i| format!("q{i}")).collect();
    let mut seen: HashSet<(usize, Vec<i64>, usize)> = HashSet::new();
    let mut edges: Vec<(usize, Vec<i64>, usize)> = Vec::new();
    let mut push = |e: (usize, Vec<i64>, usize), edges: &mut Vec<_>| {
        if seen.insert(e.clone()) {
            edges.push(e);
        }
    };
    if connected {
        for i in 0..q {
            push((i, random_update(rng, d, weights), (i + 1) % q), &mut edges);
        }
    }
    let extra = rng.gen_range(if connected { 0 } else { 1 }..=q + 2);
    for _ in 0..extra {
        let s = rng.gen_range(0..q);
        let t = rng.gen_range(0..q);
        push((s, random_update(rng, d, weights), t), &mut edges);
    }
    let state_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let trans: Vec<(&str, &[i64], &str)> = edges
        .iter()
        .map(|(s, u, t)| (names[*s].as_str(), u.as_slice(), names[*t].as_str()))
        .collect();
    Vass::from_parts(d, &state_refs, &trans).expect("generated VASS is valid")
}

/// Every closed walk of length `1..=|Q|`, as transition index lists.
pub fn short_cycles(v: &Vass) -> Vec<Vec<usize>> {
    let q = v.num_states();
    let mut out = Vec::new();
    fn walk(v: &Vass, start: usize, at: usize, max: usize, steps: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if steps.len() == max {
            return;
        }
        for (i, t) in v.transitions().iter().enumerate() {
            if t.source != at {
                continue;
            }
            steps.push(i);
            if t.target == start {
                out.push(steps.clone());
            }
            walk(v, start, t.target, max, steps, out);
            steps.pop();
        }
    }
    for s in 0..q {
        walk(v, s, s, q, &mut Vec::new(), &mut out);
    }
    out
}

pub fn walk_effect(v: &Vass, steps: &[usize]) -> IntVector {
    let mut e = IntVector::zeros(v.dimension());
    for &i in steps {
        e.add_assign(&v.transitions()[i].update);
    }
    e
}

/// Effects of all short cycles by explicit enumeration.
pub fn brute_inc(v: &Vass) -> BTreeSet<IntVector> {
    short_cycles(v).iter().map(|c| walk_effect(v, c)).collect()
}

/// Transitions on some short cycle whose effect is orthogonal to `normal`.
pub fn brute_restriction(v: &Vass, normal: &[Rational]) -> BTreeSet<usize> {
    let mut keep = BTreeSet::new();
    for c in short_cycles(v) {
        let e = walk_effect(v, &c);
        if dot(normal, &e).is_zero() {
            keep.extend(c);
        }
    }
    keep
}

pub fn dot(a: &[Rational], v: &IntVector) -> Rational {
    a.iter().zip(v.entries()).map(|(x, &y)| x * rat(y)).sum()
}

/// Strongly connected components via the reachability closure; each
/// component is a sorted state list, components sorted by first state.
pub fn brute_sccs(v: &Vass) -> Vec<Vec<usize>> {
    let q = v.num_states();
    let mut reach = vec![vec![false; q]; q];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for t in v.transitions() {
        reach[t.source][t.target] = true;
    }
    for k in 0..q {
        for i in 0..q {
            for j in 0..q {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let mut done = vec![false; q];
    let mut out = Vec::new();
    for i in 0..q {
        if done[i] {
            continue;
        }
        let comp: Vec<usize> = (0..q).filter(|&j| reach[i][j] && reach[j][i]).collect();
        for &j in &comp {
            done[j] = true;
        }
        out.push(comp);
    }
    out
}

/// One row of a dense LP: `coeffs . x  rel  rhs`.
#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Row {
    pub fn holds(&self, x: &[Rational]) -> bool {
        let lhs: Rational = self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

/// Solves a square system exactly; `None` when singular.
pub fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col].clone();
        for x in a[col].iter_mut().skip(col) {
            *x = &*x / &p;
        }
        b[col] = &b[col] / &p;
        let pivot_row = a[col].clone();
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot_row).skip(col) {
                    *x -= &f * y;
                }
                let sub = &f * &b[col];
                b[r] -= sub;
            }
        }
    }
    Some(b)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// All vertices of `{x : rows}` in `vars` dimensions, found by making every
/// choice of `vars` rows tight. The polyhedron must be pointed.
pub fn vertices(rows: &[Row], vars: usize) -> Vec<Vec<Rational>> {
    let mut out = Vec::new();
    for pick in subsets(rows.len(), vars) {
        let a = pick.iter().map(|&i| rows[i].coeffs.clone()).collect();
        let b = pick.iter().map(|&i| rows[i].rhs.clone()).collect();
        if let Some(x) = solve_square(a, b) {
            if rows.iter().all(|r| r.holds(&x)) {
                out.push(x);
            }
        }
    }
    out
}

/// Maximum of `objective . x` over the vertices, `None` if there are none.
pub fn vertex_optimum(rows: &[Row], vars: usize, objective: &[Rational]) -> Option<Rational> {
    vertices(rows, vars)
        .iter()
        .map(|x| objective.iter().zip(x).map(|(a, b)| a * b).sum::<Rational>())
        .max()
}

/// Whether some `n >= 1` (entrywise) has `v . n <= -1` for all effects,
/// decided by vertex enumeration. The region lies in the positive orthant
/// so it is pointed, and non-empty exactly when it has a vertex.
pub fn strictly_decreasing_positive_normal(effects: &BTreeSet<IntVector>, d: usize) -> bool {
    let mut rows = Vec::new();
    for i in 0..d {
        let mut c = vec![rat(0); d];
        c[i] = rat(1);
        rows.push(Row {
            coeffs: c,
            relation: Relation::Ge,
            rhs: rat(1),
        });
    }
    for v in effects {
        rows.push(Row {
            coeffs: v.entries().iter().map(|&x| rat(x)).collect(),
            relation: Relation::Le,
            rhs: rat(-1),
        });
    }
    !vertices(&rows, d).is_empty()
}

/// Category letter of a two-counter effect set from candidate rays: the
/// boundary rays of the normal cone (and of its intersection with the
/// non-negative quadrant) are perpendicular to an effect or are axes.
pub fn category_2d(effects: &BTreeSet<IntVector>) -> char {
    let mut cand: Vec<[i64; 2]> = vec![[1, 0], [0, 1], [-1, 0], [0, -1]];
    for v in effects {
        let (a, b) = (v.entries()[0], v.entries()[1]);
        if a != 0 || b != 0 {
            cand.push([-b, a]);
            cand.push([b, -a]);
        }
    }
    let is_normal = |n: &[i64; 2]| effects.iter().all(|v| v.entries()[0] * n[0] + v.entries()[1] * n[1] <= 0);
    let normals: Vec<[i64; 2]> = cand.iter().copied().filter(is_normal).collect();
    if normals.is_empty() {
        return 'A';
    }
    let nonneg: Vec<[i64; 2]> = normals.iter().copied().filter(|n| n[0] >= 0 && n[1] >= 0).collect();
    if nonneg.is_empty() {
        return 'B';
    }
    let sum = nonneg.iter().fold([0, 0], |s, n| [s[0] + n[0], s[1] + n[1]]);
    if sum[0] > 0 && sum[1] > 0 {
        'C'
    } else {
        'D'
    }
}

/// A random bounded LP over non-negative variables: the first row caps the
/// sum of all variables, so the feasible region is a polytope.
pub fn random_bounded_lp(rng: &mut ChaCha8Rng) -> (Vec<Row>, Vec<Rational>) {
    let vars = rng.gen_range(1..=4);
    let ncons = rng.gen_range(1..=6);
    let mut rows = vec![Row {
        coeffs: (0..vars).map(|_| rat(rng.gen_range(1..=4))).collect(),
        relation: Relation::Le,
        rhs: rat(rng.gen_range(1..=20)),
    }];
    for _ in 1..ncons {
        let relation = match rng.gen_range(0..6) {
            0 => Relation::Eq,
            1 | 2 => Relation::Ge,
            _ => Relation::Le,
        };
        rows.push(Row {
            coeffs: (0..vars).map(|_| rat(rng.gen_range(-5..=5))).collect(),
            relation,
            rhs: rat(rng.gen_range(-10..=15)),
        });
    }
    let objective = (0..vars).map(|_| Rational::new(rng.gen_range(-6..=6).into(), rng.gen_range(1..=3).into())).collect();
    (rows, objective)
}

/// The same LP in the analyzer's representation.
pub fn to_program(rows: &[Row], objective: &[Rational]) -> LinearProgram {
    let vars = objective.len();
    let mut lp = LinearProgram::new();
    for i in 0..vars {
        lp.add_var(format!("x{i}"), Domain::NonNegative);
    }
    for r in rows {
        let terms: Vec<(usize, Rational)> = r.coeffs.iter().cloned().enumerate().collect();
        lp.add_constraint(&terms, r.relation, r.rhs.clone());
    }
    let terms: Vec<(usize, Rational)> = objective.iter().cloned().enumerate().collect();
    lp.maximize(&terms);
    lp
}

/// Rows of the LP including the non-negativity bounds.
pub fn with_bounds(rows: &[Row], vars: usize) -> Vec<Row> {
    let mut all = rows.to_vec();
    for i in 0..vars {
        let mut c = vec![Rational::zero(); vars];
        c[i] = Rational::one();
        all.push(Row {
            coeffs: c,
            relation: Relation::Ge,
            rhs: Rational::zero(),
        });
    }
    all
}

pub fn is_nonneg(x: &Rational) -> bool {
    !x.is_negative()
}
