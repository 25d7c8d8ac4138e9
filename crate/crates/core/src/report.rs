//! Analysis reports and their independent re-verification.
//!
//! A report binds per-component verdicts, derivation trees and certificates
//! to the SHA-256 fingerprint of the canonical VASS text. [`recheck`]
//! validates every embedded claim with exact arithmetic, cone-membership
//! queries and Bellman-Ford only; it never calls the optimizer directly.
//!
//! The text form (`.vassrep`) is line oriented. Components are numbered
//! from 1 in reverse topological order; derivation nodes are addressed by
//! dotted paths below their component (`1`, `1.1`, `1.2`, ...).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{verify_category, Category, Combination, GoodNormal};
use crate::inc::{compute_inc, IncSet};
use crate::linear::{verify_wlr_detailed, verify_wlr_entry, GrowthWitness, Linearity, WlrCertificate, WlrEntry};
use crate::lp::{parse_rational, RatVector, Rational};
use crate::poly::{reason_of, render_outcome, restriction_indices, summarize, Analysis, DerivationTree, NonTermReason, Outcome, Rule};
use crate::scc::scc_decompose;
use crate::vass::{IntVector, Vass};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinearSummary {
    Linear,
    NotLinear { blamed: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SccReport {
    pub states: Vec<String>,
    pub verdict: String,
    pub reason: Option<NonTermReason>,
    pub wlr: Option<WlrEntry>,
    pub growth: Option<GrowthWitness>,
    pub tree: DerivationTree,
}

impl SccReport {
    pub fn label(&self) -> String {
        format!("{{{}}}", self.states.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleRow {
    pub n: u64,
    pub length: Option<u64>,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub fingerprint: String,
    pub dimension: usize,
    pub verdict: String,
    pub linear: LinearSummary,
    pub sccs: Vec<SccReport>,
    pub oracle: Vec<OracleRow>,
}

pub fn build_report(vass: &Vass, analysis: &Analysis) -> AnalysisReport {
    let sccs = analysis
        .sccs
        .iter()
        .map(|s| SccReport {
            states: s.tree.states.clone(),
            verdict: s.verdict.render(),
            reason: match s.verdict {
                crate::poly::Verdict::NonTerminating(r) => Some(r),
                _ => None,
            },
            wlr: match &s.verdict {
                crate::poly::Verdict::Linear(e) => Some(e.clone()),
                _ => None,
            },
            growth: s.growth.clone(),
            tree: s.tree.clone(),
        })
        .collect();
    AnalysisReport {
        fingerprint: vass.fingerprint(),
        dimension: vass.dimension(),
        verdict: analysis.overall(),
        linear: match &analysis.linearity {
            Linearity::Linear(_) => LinearSummary::Linear,
            Linearity::NotLinear { blamed, .. } => LinearSummary::NotLinear { blamed: blamed.clone() },
        },
        sccs,
        oracle: Vec::new(),
    }
}

impl AnalysisReport {
    /// The WLR certificate assembled from the per-component entries.
    pub fn wlr_certificate(&self) -> WlrCertificate {
        WlrCertificate {
            entries: self.sccs.iter().filter_map(|s| s.wlr.clone()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    pub fn from_json(text: &str) -> Result<AnalysisReport, ReportError> {
        serde_json::from_str(text).map_err(|e| ReportError::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "vassrep {FORMAT_VERSION}");
        let _ = writeln!(out, "fingerprint {}", self.fingerprint);
        let _ = writeln!(out, "dim {}", self.dimension);
        let _ = writeln!(out, "verdict: {}", self.verdict);
        match &self.linear {
            LinearSummary::Linear => out.push_str("linear: yes\n"),
            LinearSummary::NotLinear { blamed } => {
                let _ = writeln!(out, "linear: no {blamed}");
            }
        }
        for (i, s) in self.sccs.iter().enumerate() {
            let id = (i + 1).to_string();
            let _ = writeln!(out, "scc {id} {}: {}", s.label(), s.verdict);
            if let Some(r) = s.reason {
                let _ = writeln!(out, "scc {id} reason: {r:?}");
            }
            if let Some(w) = &s.wlr {
                let _ = writeln!(
                    out,
                    "scc {id} wlr: normal={} eps={} weights={}",
                    w.normal,
                    w.epsilon,
                    RatVector(w.weights.clone())
                );
            }
            if let Some(g) = &s.growth {
                let _ = writeln!(out, "scc {id} growth: {}", render_combination(&g.generators, &g.coefficients));
            }
            write_node(&mut out, &id, &s.tree);
        }
        for r in &self.oracle {
            let l = r.length.map(|l| l.to_string()).unwrap_or_else(|| "-".into());
            let _ = writeln!(out, "oracle: n={} L={} status={}", r.n, l, r.status);
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<AnalysisReport, ReportError> {
        parse_text(text)
    }
}

fn render_outcome_field(o: Outcome) -> String {
    match o {
        Outcome::Constant => "constant".into(),
        Outcome::Degree(k) => format!("degree:{k}"),
        Outcome::NonTerminating => "nonterminating".into(),
        Outcome::CategoryD => "categoryD".into(),
    }
}

fn render_combination(gens: &[IntVector], coeffs: &[Rational]) -> String {
    if gens.is_empty() {
        return "0".into();
    }
    let parts: Vec<String> = gens.iter().zip(coeffs).map(|(g, c)| format!("{g}*{c}")).collect();
    parts.join("+")
}

fn render_category(c: &Category) -> String {
    match c {
        Category::C(gn) => {
            let neutral = if gn.neutral_set.is_empty() {
                "-".to_string()
            } else {
                gn.neutral_set.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
            };
            format!("C normal={} neutral={neutral}", gn.normal)
        }
        Category::D { normal, nonnegative } => format!(
            "D normal={normal} combination={}",
            render_combination(&nonnegative.generators, &nonnegative.coefficients)
        ),
        Category::B { normal, positive } => format!(
            "B normal={normal} combination={}",
            render_combination(&positive.generators, &positive.coefficients)
        ),
        Category::A { spanning } => {
            let parts: Vec<String> = spanning
                .iter()
                .map(|c| render_combination(&c.generators, &c.coefficients))
                .collect();
            format!("A spanning={}", parts.join("|"))
        }
    }
}

fn write_node(out: &mut String, id: &str, t: &DerivationTree) {
    let _ = writeln!(
        out,
        "node {id} {}: rule={:?} outcome={} fingerprint={}",
        t.label(),
        t.rule,
        render_outcome_field(t.outcome),
        t.fingerprint
    );
    if let Some(c) = &t.category {
        let _ = writeln!(out, "node {id} category: {}", render_category(c));
    }
    for r in &t.restriction {
        let _ = writeln!(out, "node {id} restrict: {r}");
    }
    for (i, c) in t.children.iter().enumerate() {
        write_node(out, &format!("{id}.{}", i + 1), c);
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReportError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("report fingerprint {report} does not match the input ({actual})")]
    FingerprintMismatch { report: String, actual: String },
}

impl ReportError {
    pub fn code(&self) -> &'static str {
        match self {
            ReportError::Parse { .. } => "ReportSyntax",
            ReportError::FingerprintMismatch { .. } => "FingerprintMismatch",
        }
    }
}

fn perr(line: usize, message: impl Into<String>) -> ReportError {
    ReportError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_label(s: &str, line: usize) -> Result<Vec<String>, ReportError> {
    let inner = s
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| perr(line, format!("`{s}` is not a state set")))?;
    if inner.is_empty() {
        return Ok(vec![]);
    }
    Ok(inner.split(',').map(str::to_string).collect())
}

pub fn parse_int_vector(s: &str) -> Option<IntVector> {
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    inner
        .split(',')
        .map(|x| x.trim().parse::<i64>().ok())
        .collect::<Option<Vec<_>>>()
        .map(IntVector)
}

fn parse_ratvec(s: &str, line: usize) -> Result<RatVector, ReportError> {
    RatVector::parse(s).ok_or_else(|| perr(line, format!("`{s}` is not a rational vector")))
}

fn parse_rat(s: &str, line: usize) -> Result<Rational, ReportError> {
    parse_rational(s).ok_or_else(|| perr(line, format!("`{s}` is not a rational")))
}

fn parse_combination(s: &str, line: usize) -> Result<Combination, ReportError> {
    let mut c = Combination {
        generators: vec![],
        coefficients: vec![],
    };
    if s == "0" {
        return Ok(c);
    }
    for part in s.split('+') {
        let (v, r) = part
            .split_once('*')
            .ok_or_else(|| perr(line, format!("`{part}` is not `vector*coefficient`")))?;
        c.generators
            .push(parse_int_vector(v).ok_or_else(|| perr(line, format!("`{v}` is not an integer vector")))?);
        c.coefficients.push(parse_rat(r, line)?);
    }
    Ok(c)
}

/// `key=value` fields of a whitespace separated tail.
fn fields(s: &str, line: usize) -> Result<BTreeMap<String, String>, ReportError> {
    s.split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| perr(line, format!("expected `key=value`, found `{kv}`")))
        })
        .collect()
}

fn field<'m>(m: &'m BTreeMap<String, String>, key: &str, line: usize) -> Result<&'m str, ReportError> {
    m.get(key)
        .map(String::as_str)
        .ok_or_else(|| perr(line, format!("missing field `{key}`")))
}

fn parse_category(s: &str, line: usize) -> Result<Category, ReportError> {
    let (tag, rest) = s.split_once(' ').ok_or_else(|| perr(line, "category needs evidence"))?;
    let f = fields(rest, line)?;
    Ok(match tag {
        "C" => {
            let neutral = field(&f, "neutral", line)?;
            let neutral_set = if neutral == "-" {
                vec![]
            } else {
                neutral
                    .split(';')
                    .map(|v| parse_int_vector(v).ok_or_else(|| perr(line, format!("`{v}` is not an integer vector"))))
                    .collect::<Result<_, _>>()?
            };
            Category::C(GoodNormal {
                normal: parse_ratvec(field(&f, "normal", line)?, line)?,
                neutral_set,
            })
        }
        "D" => Category::D {
            normal: parse_ratvec(field(&f, "normal", line)?, line)?,
            nonnegative: parse_combination(field(&f, "combination", line)?, line)?,
        },
        "B" => Category::B {
            normal: parse_ratvec(field(&f, "normal", line)?, line)?,
            positive: parse_combination(field(&f, "combination", line)?, line)?,
        },
        "A" => {
            let s = field(&f, "spanning", line)?;
            let spanning = if s.is_empty() {
                vec![]
            } else {
                s.split('|').map(|c| parse_combination(c, line)).collect::<Result<_, _>>()?
            };
            Category::A { spanning }
        }
        other => return Err(perr(line, format!("unknown category `{other}`"))),
    })
}

fn parse_rule(s: &str, line: usize) -> Result<Rule, ReportError> {
    Ok(match s {
        "Constant" => Rule::Constant,
        "NoPositiveNormal" => Rule::NoPositiveNormal,
        "SingularNormal" => Rule::SingularNormal,
        "LinearBase" => Rule::LinearBase,
        "Fixpoint" => Rule::Fixpoint,
        "Recursive" => Rule::Recursive,
        other => return Err(perr(line, format!("unknown rule `{other}`"))),
    })
}

fn parse_outcome(s: &str, line: usize) -> Result<Outcome, ReportError> {
    Ok(match s {
        "constant" => Outcome::Constant,
        "nonterminating" => Outcome::NonTerminating,
        "categoryD" => Outcome::CategoryD,
        _ => Outcome::Degree(
            s.strip_prefix("degree:")
                .and_then(|k| k.parse().ok())
                .ok_or_else(|| perr(line, format!("unknown outcome `{s}`")))?,
        ),
    })
}

fn parse_reason(s: &str, line: usize) -> Result<NonTermReason, ReportError> {
    Ok(match s {
        "CategoryA" => NonTermReason::CategoryA,
        "CategoryB" => NonTermReason::CategoryB,
        "Fixpoint" => NonTermReason::Fixpoint,
        "Descendant" => NonTermReason::Descendant,
        other => return Err(perr(line, format!("unknown reason `{other}`"))),
    })
}

/// Scratch record for a component while its lines are collected.
struct PendingScc {
    states: Vec<String>,
    verdict: String,
    reason: Option<NonTermReason>,
    wlr: Option<(RatVector, Rational, Vec<Rational>)>,
    growth: Option<GrowthWitness>,
}

fn parse_text(text: &str) -> Result<AnalysisReport, ReportError> {
    let mut fingerprint = None;
    let mut dimension = None;
    let mut verdict = None;
    let mut linear = None;
    let mut sccs: Vec<PendingScc> = Vec::new();
    // node path -> tree without children; assembled at the end
    let mut nodes: BTreeMap<Vec<usize>, DerivationTree> = BTreeMap::new();
    let mut oracle = Vec::new();
    let mut ended = false;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    match lines.next() {
        Some((_, l)) if l.trim() == format!("vassrep {FORMAT_VERSION}") => {}
        _ => return Err(perr(1, format!("expected `vassrep {FORMAT_VERSION}` header"))),
    }
    for (ln, raw) in lines {
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if ended {
            return Err(perr(ln, "content after `end`"));
        }
        let (head, rest) = l.split_once(' ').unwrap_or((l, ""));
        match head {
            "end" => ended = true,
            "fingerprint" => fingerprint = Some(rest.to_string()),
            "dim" => dimension = Some(rest.parse::<usize>().map_err(|_| perr(ln, "bad dimension"))?),
            "verdict:" => verdict = Some(rest.to_string()),
            "linear:" => {
                linear = Some(match rest.split_once(' ') {
                    None if rest == "yes" => LinearSummary::Linear,
                    Some(("no", blamed)) => LinearSummary::NotLinear {
                        blamed: blamed.to_string(),
                    },
                    _ => return Err(perr(ln, "expected `linear: yes` or `linear: no {..}`")),
                })
            }
            "oracle:" => {
                let f = fields(rest, ln)?;
                let n = field(&f, "n", ln)?.parse().map_err(|_| perr(ln, "bad n"))?;
                let l = field(&f, "L", ln)?;
                let length = if l == "-" {
                    None
                } else {
                    Some(l.parse().map_err(|_| perr(ln, "bad L"))?)
                };
                oracle.push(OracleRow {
                    n,
                    length,
                    status: field(&f, "status", ln)?.to_string(),
                });
            }
            "scc" => parse_scc_line(rest, ln, &mut sccs)?,
            "node" => parse_node_line(rest, ln, &mut nodes)?,
            other => return Err(perr(ln, format!("unknown record `{other}`"))),
        }
    }
    if !ended {
        return Err(perr(text.lines().count(), "missing `end`"));
    }
    let mut trees = assemble(nodes)?;
    if trees.len() != sccs.len() {
        return Err(perr(0, "every component needs exactly one root node"));
    }
    let sccs = sccs
        .into_iter()
        .zip(trees.drain(..))
        .map(|(p, tree)| SccReport {
            wlr: p.wlr.map(|(normal, epsilon, weights)| WlrEntry {
                states: p.states.clone(),
                normal,
                weights,
                epsilon,
            }),
            states: p.states,
            verdict: p.verdict,
            reason: p.reason,
            growth: p.growth,
            tree,
        })
        .collect();
    Ok(AnalysisReport {
        fingerprint: fingerprint.ok_or_else(|| perr(0, "missing fingerprint"))?,
        dimension: dimension.ok_or_else(|| perr(0, "missing dim"))?,
        verdict: verdict.ok_or_else(|| perr(0, "missing verdict"))?,
        linear: linear.ok_or_else(|| perr(0, "missing linear"))?,
        sccs,
        oracle,
    })
}

fn parse_id(s: &str, line: usize) -> Result<Vec<usize>, ReportError> {
    s.split('.')
        .map(|p| p.parse::<usize>().ok().filter(|&x| x >= 1))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| perr(line, format!("`{s}` is not a node id")))
}

fn parse_scc_line(rest: &str, ln: usize, sccs: &mut Vec<PendingScc>) -> Result<(), ReportError> {
    let (id, tail) = rest.split_once(' ').ok_or_else(|| perr(ln, "truncated scc record"))?;
    let id: usize = id.parse().map_err(|_| perr(ln, "bad scc id"))?;
    let (key, value) = tail.split_once(": ").ok_or_else(|| perr(ln, "expected `: `"))?;
    if key.starts_with('{') {
        if id != sccs.len() + 1 {
            return Err(perr(ln, "components must be numbered consecutively"));
        }
        sccs.push(PendingScc {
            states: parse_label(key, ln)?,
            verdict: value.to_string(),
            reason: None,
            wlr: None,
            growth: None,
        });
        return Ok(());
    }
    if id == 0 || id != sccs.len() {
        return Err(perr(ln, "record for an undeclared component"));
    }
    let p = &mut sccs[id - 1];
    match key {
        "reason" => p.reason = Some(parse_reason(value, ln)?),
        "wlr" => {
            let f = fields(value, ln)?;
            let weights = parse_ratvec(field(&f, "weights", ln)?, ln)?.0;
            p.wlr = Some((
                parse_ratvec(field(&f, "normal", ln)?, ln)?,
                parse_rat(field(&f, "eps", ln)?, ln)?,
                weights,
            ));
        }
        "growth" => {
            let c = parse_combination(value, ln)?;
            p.growth = Some(GrowthWitness {
                generators: c.generators,
                coefficients: c.coefficients,
            });
        }
        other => return Err(perr(ln, format!("unknown scc field `{other}`"))),
    }
    Ok(())
}

fn parse_node_line(
    rest: &str,
    ln: usize,
    nodes: &mut BTreeMap<Vec<usize>, DerivationTree>,
) -> Result<(), ReportError> {
    let (id, tail) = rest.split_once(' ').ok_or_else(|| perr(ln, "truncated node record"))?;
    let id = parse_id(id, ln)?;
    let (key, value) = tail.split_once(": ").ok_or_else(|| perr(ln, "expected `: `"))?;
    if key.starts_with('{') {
        let f = fields(value, ln)?;
        let t = DerivationTree {
            states: parse_label(key, ln)?,
            fingerprint: field(&f, "fingerprint", ln)?.to_string(),
            category: None,
            restriction: vec![],
            rule: parse_rule(field(&f, "rule", ln)?, ln)?,
            outcome: parse_outcome(field(&f, "outcome", ln)?, ln)?,
            children: vec![],
        };
        if nodes.insert(id, t).is_some() {
            return Err(perr(ln, "node declared twice"));
        }
        return Ok(());
    }
    let t = nodes.get_mut(&id).ok_or_else(|| perr(ln, "record for an undeclared node"))?;
    match key {
        "category" => t.category = Some(parse_category(value, ln)?),
        "restrict" => t.restriction.push(value.to_string()),
        other => return Err(perr(ln, format!("unknown node field `{other}`"))),
    }
    Ok(())
}

/// Rebuilds the forest from dotted paths; children must be numbered
/// consecutively from 1 under an existing parent.
fn assemble(nodes: BTreeMap<Vec<usize>, DerivationTree>) -> Result<Vec<DerivationTree>, ReportError> {
    fn take(
        prefix: &[usize],
        nodes: &mut BTreeMap<Vec<usize>, DerivationTree>,
    ) -> Option<DerivationTree> {
        let mut t = nodes.remove(prefix)?;
        let mut i = 1;
        loop {
            let mut child = prefix.to_vec();
            child.push(i);
            match take(&child, nodes) {
                Some(c) => t.children.push(c),
                None => break,
            }
            i += 1;
        }
        Some(t)
    }
    let mut nodes = nodes;
    let mut roots = Vec::new();
    let mut i = 1;
    while let Some(t) = take(&[i], &mut nodes) {
        roots.push(t);
        i += 1;
    }
    if let Some(orphan) = nodes.keys().next() {
        let id: Vec<String> = orphan.iter().map(|x| x.to_string()).collect();
        return Err(perr(0, format!("node {} has no parent", id.join("."))));
    }
    Ok(roots)
}

/// Re-verifies a report against `vass`. Returns the list of violated
/// invariants; an empty list means every claim checks out.
pub fn recheck(report: &AnalysisReport, vass: &Vass) -> Result<Vec<String>, ReportError> {
    let actual = vass.fingerprint();
    if report.fingerprint != actual {
        return Err(ReportError::FingerprintMismatch {
            report: report.fingerprint.clone(),
            actual,
        });
    }
    let mut failures = Vec::new();
    if report.dimension != vass.dimension() {
        failures.push("dimension: report dimension differs from the input".to_string());
    }
    let comps = scc_decompose(vass);
    if comps.len() != report.sccs.len() {
        failures.push(format!(
            "components: report lists {} components, input has {}",
            report.sccs.len(),
            comps.len()
        ));
        return Ok(failures);
    }
    for (comp, s) in comps.iter().zip(&report.sccs) {
        let label = s.label();
        if comp.vass.state_names() != s.states.as_slice() {
            failures.push(format!("components: {label} is not the expected component {}", comp.label(vass)));
            continue;
        }
        check_node(&comp.vass, &s.tree, &label, &mut failures);
        let expected = render_outcome(s.tree.outcome);
        if s.verdict != expected {
            failures.push(format!("verdict: {label} claims {} but its derivation gives {expected}", s.verdict));
        }
        let expected_reason = (s.tree.outcome == Outcome::NonTerminating).then(|| reason_of(&s.tree));
        if s.reason != expected_reason {
            failures.push(format!("verdict: {label} has an inconsistent non-termination reason"));
        }
        if !comp.has_transitions() {
            if s.wlr.is_some() || s.growth.is_some() {
                failures.push(format!("wlr: {label} has no cycles and needs no certificate"));
            }
            continue;
        }
        let inc = compute_inc(&comp.vass, false);
        let linear = s.tree.outcome == Outcome::Degree(1);
        match (&s.wlr, linear) {
            (Some(w), true) => {
                if let Err(e) = verify_wlr_entry(&comp.vass, w) {
                    failures.push(format!("wlr: {e}"));
                }
            }
            (None, true) => failures.push(format!("wlr: linear component {label} lacks a WLR certificate")),
            (Some(_), false) => failures.push(format!("wlr: non-linear component {label} carries a WLR certificate")),
            (None, false) => {}
        }
        match (&s.growth, linear) {
            (Some(g), false) => {
                if !g.verify(&inc) {
                    failures.push(format!("growth: witness for {label} is not a non-negative growth combination"));
                }
            }
            (None, false) => failures.push(format!("growth: non-linear component {label} lacks a growth witness")),
            (Some(_), true) => failures.push(format!("growth: linear component {label} carries a growth witness")),
            (None, true) => {}
        }
    }
    match &report.linear {
        LinearSummary::Linear => {
            if let Err(e) = verify_wlr_detailed(vass, &report.wlr_certificate()) {
                failures.push(format!("linear: {e}"));
            }
        }
        LinearSummary::NotLinear { blamed } => {
            let first_bad = report
                .sccs
                .iter()
                .find(|s| s.wlr.is_none() && s.tree.outcome != Outcome::Constant);
            if first_bad.map(SccReport::label).as_deref() != Some(blamed.as_str()) {
                failures.push(format!("linear: {blamed} is not the first non-linear component"));
            }
        }
    }
    let overall = summarize(report.sccs.iter().map(|s| s.tree.outcome));
    if report.verdict != overall {
        failures.push(format!("verdict: overall verdict {} should be {overall}", report.verdict));
    }
    Ok(failures)
}

fn check_node(v: &Vass, t: &DerivationTree, path: &str, failures: &mut Vec<String>) {
    let at = format!("node {path}");
    if t.states != v.state_names() {
        failures.push(format!("derivation: {at} names the wrong states"));
        return;
    }
    if t.fingerprint != v.fingerprint() {
        failures.push(format!("derivation: {at} fingerprint differs from its sub-VASS"));
    }
    let inc: IncSet = compute_inc(v, false);
    let expect = |ok: bool, what: &str, failures: &mut Vec<String>| {
        if !ok {
            failures.push(format!("derivation: {at} {what}"));
        }
    };
    let Some(cat) = &t.category else {
        expect(
            inc.is_empty() && t.rule == Rule::Constant && t.outcome == Outcome::Constant,
            "without category must be cycle-free and constant",
            failures,
        );
        expect(t.children.is_empty() && t.restriction.is_empty(), "constant node has no restriction", failures);
        return;
    };
    if inc.is_empty() {
        failures.push(format!("derivation: {at} has no cycles but claims a category"));
        return;
    }
    if let Err(e) = verify_category(&inc, cat) {
        failures.push(format!("{e} ({at})"));
        return;
    }
    let gn = match cat {
        Category::A { .. } | Category::B { .. } => {
            expect(
                t.rule == Rule::NoPositiveNormal && t.outcome == Outcome::NonTerminating && t.children.is_empty(),
                "in category A or B must be non-terminating",
                failures,
            );
            return;
        }
        Category::D { .. } => {
            expect(
                t.rule == Rule::SingularNormal && t.outcome == Outcome::CategoryD && t.children.is_empty(),
                "in category D must be flagged as such",
                failures,
            );
            return;
        }
        Category::C(gn) => gn,
    };
    let keep = match restriction_indices(v, &gn.normal) {
        Ok(k) => k,
        Err(e) => {
            failures.push(format!("restriction: {at}: {e}"));
            return;
        }
    };
    let restricted = v.filter_transitions(|i| keep.binary_search(&i).is_ok());
    let rendered: Vec<String> = restricted.transitions().iter().map(|x| restricted.render_transition(x)).collect();
    if rendered != t.restriction {
        failures.push(format!("restriction: {at} lists a transition set that differs from the neutral restriction"));
        return;
    }
    let comps: Vec<_> = scc_decompose(&restricted).into_iter().filter(|c| c.has_transitions()).collect();
    if comps.is_empty() {
        expect(
            t.rule == Rule::LinearBase && t.outcome == Outcome::Degree(1) && t.children.is_empty(),
            "with acyclic restriction must be linear",
            failures,
        );
        return;
    }
    if comps.len() == 1 && comps[0].vass.same_structure(v) {
        expect(
            t.rule == Rule::Fixpoint && t.outcome == Outcome::NonTerminating && t.children.is_empty(),
            "whose restriction is itself must be a non-terminating fixpoint",
            failures,
        );
        return;
    }
    if t.rule != Rule::Recursive || t.children.len() != comps.len() {
        failures.push(format!("derivation: {at} must recurse into {} components", comps.len()));
        return;
    }
    for (i, (c, child)) in comps.iter().zip(&t.children).enumerate() {
        check_node(&c.vass, child, &format!("{path}.{}", i + 1), failures);
    }
    let outcomes: Vec<Outcome> = t.children.iter().map(|c| c.outcome).collect();
    let expected = if outcomes.contains(&Outcome::NonTerminating) {
        Outcome::NonTerminating
    } else if outcomes.contains(&Outcome::CategoryD) {
        Outcome::CategoryD
    } else {
        let max = outcomes
            .iter()
            .map(|o| if let Outcome::Degree(k) = o { *k } else { 0 })
            .max()
            .unwrap_or(0);
        Outcome::Degree(max + 1)
    };
    expect(t.outcome == expected, "outcome does not follow from its children", failures);
    if let Outcome::Degree(k) = t.outcome {
        expect(k <= v.dimension(), "degree exceeds the dimension", failures);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::analyze;

    fn fig2a() -> Vass {
        Vass::from_parts(
            2,
            &["q1", "q2"],
            &[
                ("q1", &[-1, 1], "q1"),
                ("q1", &[0, 0], "q2"),
                ("q2", &[-1, 0], "q1"),
                ("q2", &[1, -1], "q2"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn fresh_report_rechecks() {
        let v = fig2a();
        let r = build_report(&v, &analyze(&v).unwrap());
        assert_eq!(recheck(&r, &v).unwrap(), Vec::<String>::new());
        let text = r.to_text();
        assert!(text.contains("verdict: Theta(n^2)\n"), "{text}");
        assert_eq!(AnalysisReport::from_text(&text).unwrap(), r);
        assert_eq!(AnalysisReport::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn zeroed_good_normal_entry_fails_positivity() {
        let v = fig2a();
        let mut r = build_report(&v, &analyze(&v).unwrap());
        let Some(Category::C(gn)) = &mut r.sccs[0].tree.category else { panic!() };
        gn.normal.0[0] = crate::lp::rat(0);
        let f = recheck(&r, &v).unwrap();
        assert!(f.iter().any(|m| m.starts_with("positivity")), "{f:?}");
    }

    #[test]
    fn extra_transition_is_a_fingerprint_mismatch() {
        let v = fig2a();
        let r = build_report(&v, &analyze(&v).unwrap());
        let w = Vass::from_parts(
            2,
            &["q1", "q2"],
            &[
                ("q1", &[-1, 1], "q1"),
                ("q1", &[0, 0], "q2"),
                ("q2", &[-1, 0], "q1"),
                ("q2", &[1, -1], "q2"),
                ("q2", &[0, 0], "q1"),
            ],
        )
        .unwrap();
        assert!(matches!(recheck(&r, &w), Err(ReportError::FingerprintMismatch { .. })));
    }
}
