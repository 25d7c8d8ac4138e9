//! Geometry of short-cycle effects: normals, the four categories and good
//! normals.
//!
//! A normal is a nonzero `n` with `v.n <= 0` for every `v` in `Inc`. The
//! categories are, in the order they are decided here:
//!
//! * C: a strictly positive normal exists;
//! * D: a non-negative normal exists, but no strictly positive one;
//! * B: a normal exists, but none is non-negative;
//! * A: no normal exists.
//!
//! Every negative answer carries a dual witness (a non-negative combination
//! of effects), so each category can be re-checked with plain arithmetic
//! without re-running the optimizer.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inc::IncSet;
use crate::lp::{combine, in_cone, rat, Domain, LinearProgram, LpOutcome, RatVector, Rational, Relation};
use crate::vass::IntVector;

/// A non-negative combination `sum a_v v` over effects of `Inc`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Combination {
    pub generators: Vec<IntVector>,
    #[serde(with = "crate::lp::rational_text::vec")]
    pub coefficients: Vec<Rational>,
}

impl Combination {
    fn from_support(generators: &[IntVector], coefficients: &[Rational]) -> Combination {
        let (g, c): (Vec<_>, Vec<_>) = generators
            .iter()
            .zip(coefficients)
            .filter(|(_, c)| !c.is_zero())
            .map(|(g, c)| (g.clone(), c.clone()))
            .unzip();
        Combination {
            generators: g,
            coefficients: c,
        }
    }

    /// The combined vector, provided every generator is in `inc` and every
    /// coefficient is non-negative.
    pub fn value(&self, inc: &IncSet) -> Result<Vec<Rational>, String> {
        if self.generators.len() != self.coefficients.len() {
            return Err("combination: generator and coefficient counts differ".into());
        }
        if let Some(g) = self.generators.iter().find(|g| !inc.contains(g)) {
            return Err(format!("combination: {g} is not a cycle effect"));
        }
        if self.coefficients.iter().any(Signed::is_negative) {
            return Err("combination: negative coefficient".into());
        }
        if self.generators.is_empty() {
            return Ok(vec![Rational::zero(); inc.dimension()]);
        }
        Ok(combine(&self.generators, &self.coefficients))
    }
}

/// A strictly positive normal whose zero set on `Inc` is exactly the set of
/// effects whose negation lies in `cone(Inc)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodNormal {
    pub normal: RatVector,
    /// `{v in Inc | v.normal = 0}`, sorted.
    pub neutral_set: Vec<IntVector>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Category {
    /// No normal. Witnesses express `e_1, -e_1, ..., e_d, -e_d` (in that
    /// order) as non-negative combinations of effects, so `cone(Inc)` is
    /// the whole space.
    A { spanning: Vec<Combination> },
    /// A normal with a negative entry, and a combination of effects that is
    /// strictly positive in every coordinate (which rules out any
    /// non-negative normal).
    B { normal: RatVector, positive: Combination },
    C(GoodNormal),
    /// A non-negative normal, and a nonzero non-negative combination of
    /// effects (which rules out any strictly positive normal).
    D {
        normal: RatVector,
        nonnegative: Combination,
    },
}

impl Category {
    pub fn tag(&self) -> char {
        match self {
            Category::A { .. } => 'A',
            Category::B { .. } => 'B',
            Category::C(_) => 'C',
            Category::D { .. } => 'D',
        }
    }

    /// The normal carried as evidence, if any.
    pub fn normal(&self) -> Option<&RatVector> {
        match self {
            Category::A { .. } => None,
            Category::B { normal, .. } | Category::D { normal, .. } => Some(normal),
            Category::C(gn) => Some(&gn.normal),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("no good normal exists: the effects are not in category C")]
    NotCategoryC,
}

fn normal_vars(lp: &mut LinearProgram, d: usize, domain: Domain) {
    for i in 0..d {
        lp.add_var(format!("n{i}"), domain);
    }
}

fn product_terms(v: &IntVector) -> Vec<(usize, Rational)> {
    v.entries()
        .iter()
        .enumerate()
        .filter(|(_, &x)| x != 0)
        .map(|(i, &x)| (i, rat(x)))
        .collect()
}

fn covering_constraints(lp: &mut LinearProgram, effects: &[IntVector]) {
    for v in effects {
        lp.add_constraint(&product_terms(v), Relation::Le, Rational::zero());
    }
}

fn covers(inc: &IncSet, n: &RatVector) -> bool {
    inc.effects().iter().all(|v| !n.dot_int(v).is_positive())
}

/// A covering normal with `n_i = sign`, if one exists.
fn normal_with_fixed_entry(inc: &IncSet, i: usize, sign: i64, domain: Domain) -> Option<RatVector> {
    let mut lp = LinearProgram::new();
    normal_vars(&mut lp, inc.dimension(), domain);
    covering_constraints(&mut lp, &inc.to_vec());
    lp.add_constraint(&[(i, Rational::one())], Relation::Eq, rat(sign));
    let p = lp.solve().point()?.clone();
    debug_assert!(covers(inc, &p));
    Some(p)
}

/// Some nonzero normal, probing `n_i = +1` and `n_i = -1` for every `i`.
pub fn find_normal(inc: &IncSet) -> Option<RatVector> {
    (0..inc.dimension())
        .flat_map(|i| [(i, 1), (i, -1)])
        .find_map(|(i, s)| normal_with_fixed_entry(inc, i, s, Domain::Free))
}

/// Whether a nonzero `n` with `v.n <= 0` for all effects exists. An empty
/// effect set has every nonzero vector as a normal.
pub fn has_normal(inc: &IncSet) -> bool {
    inc.is_empty() || find_normal(inc).is_some()
}

pub fn find_nonnegative_normal(inc: &IncSet) -> Option<RatVector> {
    (0..inc.dimension()).find_map(|i| normal_with_fixed_entry(inc, i, 1, Domain::NonNegative))
}

/// `max eps` subject to `v.n <= 0`, `n >= eps`, `sum n = 1`; returns the
/// normal when the optimum is positive.
pub fn find_positive_normal(inc: &IncSet) -> Option<RatVector> {
    let d = inc.dimension();
    let mut lp = LinearProgram::new();
    normal_vars(&mut lp, d, Domain::NonNegative);
    let eps = lp.add_var("eps", Domain::Free);
    covering_constraints(&mut lp, &inc.to_vec());
    for i in 0..d {
        lp.add_constraint(&[(i, Rational::one()), (eps, -Rational::one())], Relation::Ge, Rational::zero());
    }
    let all: Vec<_> = (0..d).map(|i| (i, Rational::one())).collect();
    lp.add_constraint(&all, Relation::Eq, Rational::one());
    lp.maximize(&[(eps, Rational::one())]);
    match lp.solve() {
        LpOutcome::Optimal { value, point } if value.is_positive() => Some(RatVector(point.0[..d].to_vec())),
        _ => None,
    }
}

/// Non-negative `a` over the effects with `sum a_v v >= lower` coordinatewise
/// and, if `normalize`, `sum_i (sum a_v v)_i = 1`.
fn effect_combination(inc: &IncSet, lower: &Rational, normalize: bool) -> Option<Combination> {
    let gens = inc.to_vec();
    if gens.is_empty() {
        return None;
    }
    let d = inc.dimension();
    let mut lp = LinearProgram::new();
    for i in 0..gens.len() {
        lp.add_var(format!("a{i}"), Domain::NonNegative);
    }
    for k in 0..d {
        let terms: Vec<_> = gens
            .iter()
            .enumerate()
            .filter(|(_, g)| g.entries()[k] != 0)
            .map(|(i, g)| (i, rat(g.entries()[k])))
            .collect();
        lp.add_constraint(&terms, Relation::Ge, lower.clone());
    }
    if normalize {
        let terms: Vec<_> = gens
            .iter()
            .enumerate()
            .map(|(i, g)| (i, rat(g.entries().iter().sum())))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        lp.add_constraint(&terms, Relation::Eq, Rational::one());
    }
    let point = lp.solve().point()?.clone();
    Some(Combination::from_support(&gens, &point.0))
}

/// Unit vectors and their negations as cone combinations of the effects.
fn spanning_witnesses(inc: &IncSet) -> Vec<Combination> {
    let gens = inc.to_vec();
    let d = inc.dimension();
    let mut out = Vec::with_capacity(2 * d);
    for i in 0..d {
        for s in [1, -1] {
            let mut e = vec![0; d];
            e[i] = s;
            let target = IntVector(e);
            if let Some(coeffs) = in_cone(&target, &gens) {
                out.push(Combination::from_support(&gens, &coeffs));
            }
        }
    }
    out
}

/// Decides the category of a set of effects. An empty set is category C
/// with the uniform normal.
pub fn classify(inc: &IncSet) -> Category {
    if find_positive_normal(inc).is_some() {
        return Category::C(good_normal(inc).expect("a positive normal implies a good normal"));
    }
    if let Some(normal) = find_nonnegative_normal(inc) {
        let nonnegative = effect_combination(inc, &Rational::zero(), true)
            .expect("no positive normal implies a nonzero non-negative combination");
        return Category::D { normal, nonnegative };
    }
    let positive = effect_combination(inc, &Rational::one(), false)
        .expect("no non-negative normal implies a positive combination");
    if let Some(normal) = find_normal(inc) {
        return Category::B { normal, positive };
    }
    Category::A {
        spanning: spanning_witnesses(inc),
    }
}

/// The effects `v` with `-v` in `cone(Inc)`, sorted.
pub fn neutral_candidates(inc: &IncSet) -> Vec<IntVector> {
    let gens = inc.to_vec();
    gens.iter().filter(|v| in_cone(&v.neg(), &gens).is_some()).cloned().collect()
}

/// Computes a good normal: first the set `I` of effects whose negation is
/// a cone element, then `max eps` over `u.n = 0` for `u` in `I`,
/// `v.n <= -eps` otherwise, `n >= eps` and `sum n = 1`.
pub fn good_normal(inc: &IncSet) -> Result<GoodNormal, GeometryError> {
    let d = inc.dimension();
    let neutral = neutral_candidates(inc);
    let mut lp = LinearProgram::new();
    normal_vars(&mut lp, d, Domain::NonNegative);
    let eps = lp.add_var("eps", Domain::Free);
    for v in inc.effects() {
        let mut terms = product_terms(v);
        if neutral.contains(v) {
            lp.add_constraint(&terms, Relation::Eq, Rational::zero());
        } else {
            terms.push((eps, Rational::one()));
            lp.add_constraint(&terms, Relation::Le, Rational::zero());
        }
    }
    for i in 0..d {
        lp.add_constraint(&[(i, Rational::one()), (eps, -Rational::one())], Relation::Ge, Rational::zero());
    }
    let all: Vec<_> = (0..d).map(|i| (i, Rational::one())).collect();
    lp.add_constraint(&all, Relation::Eq, Rational::one());
    lp.maximize(&[(eps, Rational::one())]);
    match lp.solve() {
        LpOutcome::Optimal { value, point } if value.is_positive() => {
            let gn = GoodNormal {
                normal: RatVector(point.0[..d].to_vec()),
                neutral_set: neutral,
            };
            debug_assert!(verify_good_normal(inc, &gn).is_ok());
            Ok(gn)
        }
        _ => Err(GeometryError::NotCategoryC),
    }
}

/// Exact re-check of every good-normal invariant. Failures name the
/// violated invariant: `positivity`, `covering`, `neutral-cone` or
/// `neutral-set`.
///
/// Only effects with zero product need a cone query: if `-v` is a cone
/// element then `-v.n <= 0`, so a strictly negative product already proves
/// `-v` is outside the cone.
pub fn verify_good_normal(inc: &IncSet, gn: &GoodNormal) -> Result<(), String> {
    if gn.normal.dim() != inc.dimension() {
        return Err("dimension: normal has wrong length".into());
    }
    if !gn.normal.all_positive() {
        return Err(format!("positivity: normal {} is not strictly positive", gn.normal));
    }
    let gens = inc.to_vec();
    let mut zero_set = Vec::new();
    for v in &gens {
        let p = gn.normal.dot_int(v);
        if p.is_positive() {
            return Err(format!("covering: {v} has positive product {p}"));
        }
        if p.is_zero() {
            if in_cone(&v.neg(), &gens).is_none() {
                return Err(format!("neutral-cone: {v} has zero product but its negation is not in the cone"));
            }
            zero_set.push(v.clone());
        }
    }
    let mut claimed = gn.neutral_set.clone();
    claimed.sort();
    if claimed != zero_set {
        return Err("neutral-set: listed neutral effects differ from the zero-product effects".into());
    }
    Ok(())
}

/// Exact re-check of category evidence against `inc`.
pub fn verify_category(inc: &IncSet, cat: &Category) -> Result<(), String> {
    let d = inc.dimension();
    match cat {
        Category::C(gn) => verify_good_normal(inc, gn),
        Category::D { normal, nonnegative } => {
            if normal.dim() != d || normal.is_zero() || !normal.all_nonnegative() {
                return Err(format!("D: normal {normal} must be nonzero and non-negative"));
            }
            if !covers(inc, normal) {
                return Err(format!("covering: normal {normal} does not cover every effect"));
            }
            let w = nonnegative.value(inc)?;
            if w.iter().any(Signed::is_negative) || w.iter().all(Zero::is_zero) {
                return Err("D: combination must be nonzero and non-negative".into());
            }
            Ok(())
        }
        Category::B { normal, positive } => {
            if normal.dim() != d || !normal.0.iter().any(Signed::is_negative) {
                return Err(format!("B: normal {normal} must have a negative entry"));
            }
            if !covers(inc, normal) {
                return Err(format!("covering: normal {normal} does not cover every effect"));
            }
            let w = positive.value(inc)?;
            if !w.iter().all(Signed::is_positive) {
                return Err("B: combination must be strictly positive".into());
            }
            Ok(())
        }
        Category::A { spanning } => {
            if spanning.len() != 2 * d {
                return Err("A: need one witness per signed unit vector".into());
            }
            for (k, c) in spanning.iter().enumerate() {
                let w = c.value(inc)?;
                let (i, s) = (k / 2, if k % 2 == 0 { 1 } else { -1 });
                let ok = w.iter().enumerate().all(|(j, x)| *x == rat(if j == i { s } else { 0 }));
                if !ok {
                    return Err(format!("A: witness {k} does not produce a signed unit vector"));
                }
            }
            Ok(())
        }
    }
}
