//! Exact rational linear programming.
//!
//! A dense two-phase primal simplex over arbitrary-precision rationals with
//! Bland's rule. Free variables are split into a difference of two
//! non-negative columns, every row is brought to a non-negative right-hand
//! side, and phase one minimizes the sum of artificial variables.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::vass::IntVector;

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p` or `p/q`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let r = Rational::from_str(s.trim()).ok()?;
    Some(r)
}

/// Serde adapters writing rationals as `"p/q"` strings.
pub mod rational_text {
    use super::{parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).ok_or_else(|| D::Error::custom(format!("`{s}` is not a rational")))
    }

    pub mod vec {
        use super::super::{parse_rational, Rational};
        use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&r.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|s| parse_rational(s).ok_or_else(|| D::Error::custom(format!("`{s}` is not a rational"))))
                .collect()
        }
    }
}

/// A vector of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RatVector(#[serde(with = "rational_text::vec")] pub Vec<Rational>);

impl RatVector {
    pub fn zeros(dim: usize) -> Self {
        RatVector(vec![Rational::zero(); dim])
    }

    pub fn from_ints(v: &[i64]) -> Self {
        RatVector(v.iter().map(|&x| rat(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot_int(&self, v: &IntVector) -> Rational {
        debug_assert_eq!(self.dim(), v.dim());
        let mut acc = Rational::zero();
        for (a, &b) in self.0.iter().zip(v.entries()) {
            if b != 0 {
                acc += a * rat(b);
            }
        }
        acc
    }

    pub fn scale(&self, k: &Rational) -> RatVector {
        RatVector(self.0.iter().map(|x| x * k).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn all_positive(&self) -> bool {
        self.0.iter().all(Signed::is_positive)
    }

    pub fn all_nonnegative(&self) -> bool {
        self.0.iter().all(|x| !x.is_negative())
    }

    /// Parses `(a,b,...)` with rational entries.
    pub fn parse(s: &str) -> Option<RatVector> {
        let inner = s.trim().strip_prefix('(')?.strip_suffix(')')?;
        if inner.trim().is_empty() {
            return Some(RatVector(Vec::new()));
        }
        inner
            .split(',')
            .map(parse_rational)
            .collect::<Option<Vec<_>>>()
            .map(RatVector)
    }
}

impl fmt::Display for RatVector {
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

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Free,
    NonNegative,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: RatVector,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Objective {
    Feasibility,
    Maximize(RatVector),
    Minimize(RatVector),
}

/// A linear program over named variables.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    names: Vec<String>,
    domains: Vec<Domain>,
    constraints: Vec<Constraint>,
    objective: Objective,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: RatVector },
    Feasible(RatVector),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn point(&self) -> Option<&RatVector> {
        match self {
            LpOutcome::Optimal { point, .. } | LpOutcome::Feasible(point) => Some(point),
            _ => None,
        }
    }
}

impl Default for LinearProgram {
    fn default() -> Self {
        Self::new()
    }
}

impl LinearProgram {
    pub fn new() -> Self {
        LinearProgram {
            names: Vec::new(),
            domains: Vec::new(),
            constraints: Vec::new(),
            objective: Objective::Feasibility,
        }
    }

    /// Adds a variable and returns its column index. Existing constraint
    /// rows are padded with a zero coefficient.
    pub fn add_var(&mut self, name: impl Into<String>, domain: Domain) -> usize {
        self.names.push(name.into());
        self.domains.push(domain);
        for c in &mut self.constraints {
            c.coeffs.0.push(Rational::zero());
        }
        match &mut self.objective {
            Objective::Maximize(c) | Objective::Minimize(c) => c.0.push(Rational::zero()),
            Objective::Feasibility => {}
        }
        self.names.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn var_name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Adds `sum coeff_i * x_i  rel  rhs` from sparse `(var, coeff)` terms.
    pub fn add_constraint(&mut self, terms: &[(usize, Rational)], relation: Relation, rhs: Rational) {
        let mut coeffs = RatVector::zeros(self.num_vars());
        for (v, c) in terms {
            coeffs.0[*v] += c;
        }
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn add_row(&mut self, coeffs: RatVector, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.dim(), self.num_vars(), "constraint row length");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn maximize(&mut self, terms: &[(usize, Rational)]) {
        self.objective = Objective::Maximize(self.dense(terms));
    }

    pub fn minimize(&mut self, terms: &[(usize, Rational)]) {
        self.objective = Objective::Minimize(self.dense(terms));
    }

    fn dense(&self, terms: &[(usize, Rational)]) -> RatVector {
        let mut c = RatVector::zeros(self.num_vars());
        for (v, k) in terms {
            c.0[*v] += k;
        }
        c
    }

    /// Checks a point against every constraint and domain, exactly.
    pub fn satisfies(&self, point: &RatVector) -> bool {
        if point.dim() != self.num_vars() {
            return false;
        }
        let domains_ok = self
            .domains
            .iter()
            .zip(&point.0)
            .all(|(d, x)| *d == Domain::Free || !x.is_negative());
        domains_ok
            && self.constraints.iter().all(|c| {
                let lhs: Rational = c.coeffs.0.iter().zip(&point.0).map(|(a, x)| a * x).sum();
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                }
            })
    }

    pub fn objective_value(&self, point: &RatVector) -> Option<Rational> {
        match &self.objective {
            Objective::Feasibility => None,
            Objective::Maximize(c) | Objective::Minimize(c) => {
                Some(c.0.iter().zip(&point.0).map(|(a, x)| a * x).sum())
            }
        }
    }

    pub fn solve(&self) -> LpOutcome {
        solve(self)
    }
}

/// Dense simplex tableau in standard form `max c x, A x = b, x >= 0, b >= 0`.
struct Tableau {
    /// `rows[i][j]` for `j < ncols`, right-hand side in `rhs[i]`.
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    ncols: usize,
}

enum PhaseResult {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        if !p.is_one() {
            let inv = p.recip();
            for x in self.rows[r].iter_mut() {
                if !x.is_zero() {
                    *x *= &inv;
                }
            }
            self.rhs[r] *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][col].is_zero() {
                continue;
            }
            let f = self.rows[i][col].clone();
            for (x, p) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        self.basis[r] = col;
    }

    /// Reduced costs `c_j - c_B B^-1 A_j` for the current basis.
    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut red: Vec<Rational> = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, r) in red.iter_mut().enumerate() {
                let a = &self.rows[i][j];
                if !a.is_zero() {
                    *r -= cb * a;
                }
            }
        }
        red
    }

    /// Maximizes `cost` over columns allowed by `allowed`, Bland's rule.
    fn run(&mut self, cost: &[Rational], allowed: &dyn Fn(usize) -> bool) -> PhaseResult {
        loop {
            let red = self.reduced_costs(cost);
            let entering = (0..self.ncols).find(|&j| allowed(j) && red[j].is_positive());
            let Some(col) = entering else {
                return PhaseResult::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if a.is_positive() {
                    let ratio = &self.rhs[i] / a;
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, col),
                None => return PhaseResult::Unbounded,
            }
        }
    }
}

/// Solves `lp` exactly. Deterministic: the same program always yields the
/// same outcome and point.
pub fn solve(lp: &LinearProgram) -> LpOutcome {
    let n = lp.num_vars();
    // Column layout for structural variables: x_j = col_pos[j] - col_neg[j].
    let mut col_pos = Vec::with_capacity(n);
    let mut col_neg = Vec::with_capacity(n);
    let mut ncols = 0;
    for d in &lp.domains {
        col_pos.push(ncols);
        ncols += 1;
        if *d == Domain::Free {
            col_neg.push(Some(ncols));
            ncols += 1;
        } else {
            col_neg.push(None);
        }
    }
    let structural = ncols;

    let m = lp.constraints.len();
    // Sign-normalize each row so rhs >= 0, then decide slack/artificial.
    let mut row_data = Vec::with_capacity(m);
    for c in &lp.constraints {
        let flip = c.rhs.is_negative();
        let sign = if flip { -Rational::one() } else { Rational::one() };
        let rel = match (c.relation, flip) {
            (Relation::Eq, _) => Relation::Eq,
            (Relation::Le, false) | (Relation::Ge, true) => Relation::Le,
            (Relation::Ge, false) | (Relation::Le, true) => Relation::Ge,
        };
        row_data.push((c, sign, rel));
    }
    let slack_count = row_data.iter().filter(|(_, _, r)| *r != Relation::Eq).count();
    let art_count = row_data.iter().filter(|(_, _, r)| *r != Relation::Le).count();
    let slack_start = structural;
    let art_start = structural + slack_count;
    let total = art_start + art_count;

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (slack_start, art_start);
    for (c, sign, rel) in &row_data {
        let mut row = vec![Rational::zero(); total];
        for (j, a) in c.coeffs.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let v = a * sign;
            if let Some(neg) = col_neg[j] {
                row[neg] = -v.clone();
            }
            row[col_pos[j]] = v;
        }
        match rel {
            Relation::Le => {
                row[next_slack] = Rational::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -Rational::one();
                next_slack += 1;
                row[next_art] = Rational::one();
                basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = Rational::one();
                basis.push(next_art);
                next_art += 1;
            }
        }
        rows.push(row);
        rhs.push(&c.rhs * sign);
    }

    let mut tab = Tableau {
        rows,
        rhs,
        basis,
        ncols: total,
    };

    // Phase one: maximize -(sum of artificials).
    if art_count > 0 {
        let mut cost = vec![Rational::zero(); total];
        for c in cost.iter_mut().skip(art_start) {
            *c = -Rational::one();
        }
        tab.run(&cost, &|_| true);
        let infeasibility: Rational = tab
            .basis
            .iter()
            .zip(&tab.rhs)
            .filter(|(b, _)| **b >= art_start)
            .map(|(_, r)| r.clone())
            .sum();
        if infeasibility.is_positive() {
            return LpOutcome::Infeasible;
        }
        // Drive zero-valued artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= art_start {
                match (0..art_start).find(|&j| !tab.rows[i][j].is_zero()) {
                    Some(j) => {
                        tab.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.rhs.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    let (cost_struct, sense) = match &lp.objective {
        Objective::Feasibility => (None, 1),
        Objective::Maximize(c) => (Some(c), 1),
        Objective::Minimize(c) => (Some(c), -1),
    };
    let mut cost = vec![Rational::zero(); total];
    if let Some(c) = cost_struct {
        for (j, a) in c.0.iter().enumerate() {
            let v = if sense == 1 { a.clone() } else { -a.clone() };
            if let Some(neg) = col_neg[j] {
                cost[neg] = -v.clone();
            }
            cost[col_pos[j]] = v;
        }
    }
    let allowed = |j: usize| j < art_start;
    let result = if cost_struct.is_some() {
        tab.run(&cost, &allowed)
    } else {
        PhaseResult::Optimal
    };
    if let PhaseResult::Unbounded = result {
        return LpOutcome::Unbounded;
    }

    let mut values = vec![Rational::zero(); total];
    for (i, &b) in tab.basis.iter().enumerate() {
        values[b] = tab.rhs[i].clone();
    }
    let point = RatVector(
        (0..n)
            .map(|j| {
                let mut x = values[col_pos[j]].clone();
                if let Some(neg) = col_neg[j] {
                    x -= &values[neg];
                }
                x
            })
            .collect(),
    );
    debug_assert!(lp.satisfies(&point), "simplex returned an infeasible point");
    match lp.objective_value(&point) {
        None => LpOutcome::Feasible(point),
        Some(value) => LpOutcome::Optimal { value, point },
    }
}

/// Decides whether `target` is a non-negative combination of `generators`.
/// On success returns the coefficients, in generator order, already
/// verified to reproduce `target` exactly.
pub fn in_cone(target: &IntVector, generators: &[IntVector]) -> Option<Vec<Rational>> {
    let d = target.dim();
    if target.is_zero() {
        return Some(vec![Rational::zero(); generators.len()]);
    }
    let mut lp = LinearProgram::new();
    for i in 0..generators.len() {
        lp.add_var(format!("a{i}"), Domain::NonNegative);
    }
    for k in 0..d {
        let terms: Vec<(usize, Rational)> = generators
            .iter()
            .enumerate()
            .filter(|(_, g)| g.entries()[k] != 0)
            .map(|(i, g)| (i, rat(g.entries()[k])))
            .collect();
        lp.add_constraint(&terms, Relation::Eq, rat(target.entries()[k]));
    }
    let coeffs = lp.solve().point()?.0.clone();
    check_combination(target, generators, &coeffs).then_some(coeffs)
}

/// `sum coeffs[i] * generators[i] == target` with all coefficients >= 0.
pub fn check_combination(target: &IntVector, generators: &[IntVector], coeffs: &[Rational]) -> bool {
    let comb = combine(generators, coeffs);
    coeffs.len() == generators.len()
        && coeffs.iter().all(|c| !c.is_negative())
        && comb.len() == target.dim()
        && comb.iter().zip(target.entries()).all(|(a, &b)| *a == rat(b))
}

/// `sum coeffs[i] * generators[i]` as rationals.
pub fn combine(generators: &[IntVector], coeffs: &[Rational]) -> Vec<Rational> {
    let d = generators.first().map_or(0, IntVector::dim);
    let mut acc = vec![Rational::zero(); d];
    for (g, c) in generators.iter().zip(coeffs) {
        if c.is_zero() {
            continue;
        }
        for (a, &x) in acc.iter_mut().zip(g.entries()) {
            if x != 0 {
                *a += c * rat(x);
            }
        }
    }
    acc
}
