//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the criteria execute sequentially and their timings
//! are not distorted by each other.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use vass_complexity::cli;
use vass_complexity::geometry::{good_normal, Category};
use vass_complexity::inc::compute_inc;
use vass_complexity::linear::{check_linear_scc, SccLinearity};
use vass_complexity::lp::{rat, LpOutcome};
use vass_complexity::oracle::{fit_exponent, termination_complexity, Budget, RunLength};
use vass_complexity::poly::{analyze, build_restriction, DerivationTree, NonTermReason, Outcome, Rule};
use vass_complexity::report::{build_report, recheck, AnalysisReport, LinearSummary};
use vass_complexity::{IntVector, Rational, Vass};

use common::*;

/// Per-file analysis time limit for the golden verdicts.
const GOLDEN_LIMIT: Duration = Duration::from_secs(1);
/// Time limits for the randomized Inc cross-check, the exponent fits and
/// the fig4 growth ratios.
const INC_LIMIT: Duration = Duration::from_secs(30);
const FIT_LIMIT: Duration = Duration::from_secs(60);
const EXP_LIMIT: Duration = Duration::from_secs(60);
/// Allowed deviation of a fitted exponent from the claimed degree.
const FIT_TOLERANCE: f64 = 0.5;
/// Accepted exponent window for fig2a.
const FIG2A_WINDOW: (f64, f64) = (1.6, 2.4);
/// Lower bound on consecutive ratios L(n+1)/L(n) for fig4.
const FIG4_MIN_RATIO: f64 = 1.8;
/// Lower bound on L(32)/L(8) for components without a WLR function.
const SUPERLINEAR_RATIO: f64 = 8.0;

type Criterion = (&'static str, fn() -> Check);

struct Check {
    pass: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Check {
    Check {
        pass: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Check {
    Check {
        pass: false,
        detail: detail.into(),
    }
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["vassc"];
    full.extend_from_slice(args);
    let code = cli::run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn golden_verdicts() -> Check {
    let expected = [
        ("fig2a", "Theta(n^2)"),
        ("fig2b", "NonTerminating"),
        ("fig2c", "Theta(n)"),
        ("fig4", "CategoryD"),
        ("fig5", "CategoryD"),
    ];
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, want) in expected {
        let v = load_corpus(name);
        let t = Instant::now();
        let a = analyze(&v).expect("analysis succeeds");
        let dt = t.elapsed();
        let got = a.overall();
        let mut good = got == want && dt < GOLDEN_LIMIT;
        if name == "fig2c" {
            good &= matches!(a.linearity, vass_complexity::linear::Linearity::Linear(_));
        }
        ok &= good;
        notes.push(format!("{name}={got} ({:.0} ms)", dt.as_secs_f64() * 1e3));
    }
    Check {
        pass: ok,
        detail: notes.join(", "),
    }
}

fn inc_exactness() -> Check {
    let path = corpus_path("fig2a");
    let (code, out, _) = run_cli(&["inc", path.to_str().unwrap()]);
    let got: BTreeSet<String> = out.lines().map(str::to_string).collect();
    let want: BTreeSet<String> = ["(-1,1)", "(-2,2)", "(1,-1)", "(2,-2)", "(-1,0)"].iter().map(|s| s.to_string()).collect();
    if code != 0 || got != want || out.lines().count() != 5 {
        return fail(format!("fig2a inc printed {got:?}"));
    }
    let mut r = rng(0x1c0);
    let t = Instant::now();
    let mut mismatches = 0;
    for _ in 0..200 {
        let v = random_vass(&mut r, 4, 2, false);
        if compute_inc(&v, false).effects() != &brute_inc(&v) {
            mismatches += 1;
        }
    }
    let dt = t.elapsed();
    let detail = format!("fig2a exact; 200 random, {mismatches} mismatches, {:.2} s", dt.as_secs_f64());
    if mismatches == 0 && dt < INC_LIMIT {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn restriction_exactness() -> Check {
    let v = load_corpus("fig2a");
    let inc = compute_inc(&v, false);
    let gn = match good_normal(&inc) {
        Ok(g) => g,
        Err(e) => return fail(format!("no good normal: {e}")),
    };
    let r = match build_restriction(&v, &gn.normal) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    let got: Vec<String> = r.transitions().iter().map(|t| r.render_transition(t)).collect();
    let want = vec!["q1 -> q1 [-1 1]".to_string(), "q2 -> q2 [1 -1]".to_string()];
    let effects: BTreeSet<IntVector> = r.transitions().iter().map(|t| t.update.clone()).collect();
    let want_effects: BTreeSet<IntVector> = [IntVector(vec![-1, 1]), IntVector(vec![1, -1])].into_iter().collect();
    let detail = format!("normal {}, restriction {:?}", gn.normal, got);
    if got == want && effects == want_effects {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn mutate_tree(t: &mut DerivationTree, pick: &mut dyn FnMut(&mut DerivationTree) -> bool) -> bool {
    if pick(t) {
        return true;
    }
    t.children.iter_mut().any(|c| mutate_tree(c, pick))
}

fn trees(t: &DerivationTree) -> Vec<&DerivationTree> {
    let mut out = vec![t];
    for c in &t.children {
        out.extend(trees(c));
    }
    out
}

/// Every single-field corruption applicable to `rep` that must make it
/// invalid, labelled.
fn corruptions(rep: &AnalysisReport) -> Vec<(String, AnalysisReport)> {
    let mut out: Vec<(String, AnalysisReport)> = Vec::new();
    let mut add = |label: String, f: &dyn Fn(&mut AnalysisReport)| {
        let mut m = rep.clone();
        f(&mut m);
        out.push((label, m));
    };
    add("fingerprint".into(), &|m| {
        let last = m.fingerprint.pop().unwrap();
        m.fingerprint.push(if last == '0' { '1' } else { '0' });
    });
    add("overall verdict".into(), &|m| {
        m.verdict = if m.verdict == "CategoryD" { "Theta(n)".into() } else { "CategoryD".into() };
    });
    add("linear summary".into(), &|m| {
        m.linear = match &m.linear {
            LinearSummary::Linear => LinearSummary::NotLinear {
                blamed: m.sccs[0].label(),
            },
            LinearSummary::NotLinear { .. } => LinearSummary::Linear,
        };
    });
    add("drop component".into(), &|m| {
        m.sccs.pop();
    });
    for (i, s) in rep.sccs.iter().enumerate() {
        add(format!("scc {i} verdict"), &|m| {
            let v = &mut m.sccs[i].verdict;
            *v = if v == "NonTerminating" { "Constant".into() } else { "NonTerminating".into() };
        });
        if let Some(reason) = s.reason {
            add(format!("scc {i} reason"), &move |m| {
                m.sccs[i].reason = Some(if reason == NonTermReason::CategoryA {
                    NonTermReason::CategoryB
                } else {
                    NonTermReason::CategoryA
                });
            });
        }
        if let Some(w) = &s.wlr {
            add(format!("scc {i} wlr epsilon zero"), &|m| m.sccs[i].wlr.as_mut().unwrap().epsilon = rat(0));
            add(format!("scc {i} wlr epsilon negative"), &|m| m.sccs[i].wlr.as_mut().unwrap().epsilon = rat(-1));
            for j in 0..w.normal.dim() {
                if !w.normal.0[j].is_zero() {
                    add(format!("scc {i} wlr normal {j} negated"), &|m| {
                        let n = &mut m.sccs[i].wlr.as_mut().unwrap().normal.0[j];
                        *n = -n.clone();
                    });
                }
            }
        }
        if let Some(g) = &s.growth {
            for j in 0..g.coefficients.len() {
                if g.coefficients[j].is_positive() {
                    add(format!("scc {i} growth coefficient {j} negated"), &|m| {
                        let c = &mut m.sccs[i].growth.as_mut().unwrap().coefficients[j];
                        *c = -c.clone();
                    });
                }
            }
        }
        for (k, node) in trees(&s.tree).into_iter().enumerate() {
            // Visit the k-th node in pre-order and apply `f` to it.
            let at = move |m: &mut AnalysisReport, f: &dyn Fn(&mut DerivationTree)| {
                let mut seen = 0;
                mutate_tree(&mut m.sccs[i].tree, &mut |t| {
                    if seen == k {
                        f(t);
                        return true;
                    }
                    seen += 1;
                    false
                });
            };
            add(format!("scc {i} node {k} outcome"), &|m| {
                at(m, &|t| {
                    t.outcome = match t.outcome {
                        Outcome::Degree(d) => Outcome::Degree(d + 1),
                        _ => Outcome::Degree(1),
                    }
                })
            });
            add(format!("scc {i} node {k} rule"), &|m| {
                at(m, &|t| t.rule = if t.rule == Rule::Recursive { Rule::LinearBase } else { Rule::Recursive })
            });
            if !node.restriction.is_empty() {
                add(format!("scc {i} node {k} restriction"), &|m| {
                    at(m, &|t| {
                        t.restriction.pop();
                    })
                });
            }
            match &node.category {
                Some(Category::C(gn)) => {
                    for j in 0..gn.normal.dim() {
                        add(format!("scc {i} node {k} good normal {j} zeroed"), &|m| {
                            at(m, &|t| {
                                if let Some(Category::C(g)) = &mut t.category {
                                    g.normal.0[j] = rat(0);
                                }
                            })
                        });
                    }
                    if !gn.neutral_set.is_empty() {
                        add(format!("scc {i} node {k} neutral set"), &|m| {
                            at(m, &|t| {
                                if let Some(Category::C(g)) = &mut t.category {
                                    g.neutral_set.pop();
                                }
                            })
                        });
                    }
                }
                Some(Category::D { .. }) => {
                    add(format!("scc {i} node {k} D combination"), &|m| {
                        at(m, &|t| {
                            if let Some(Category::D { nonnegative, .. }) = &mut t.category {
                                let c = &mut nonnegative.coefficients[0];
                                *c = -c.clone();
                            }
                        })
                    });
                    add(format!("scc {i} node {k} D normal"), &|m| {
                        at(m, &|t| {
                            if let Some(Category::D { normal, .. }) = &mut t.category {
                                *normal = normal.scale(&rat(-1));
                            }
                        })
                    });
                }
                Some(Category::B { .. }) => {
                    add(format!("scc {i} node {k} B combination"), &|m| {
                        at(m, &|t| {
                            if let Some(Category::B { positive, .. }) = &mut t.category {
                                let c = &mut positive.coefficients[0];
                                *c = -c.clone();
                            }
                        })
                    });
                }
                Some(Category::A { .. }) => {
                    add(format!("scc {i} node {k} A witness"), &|m| {
                        at(m, &|t| {
                            if let Some(Category::A { spanning }) = &mut t.category {
                                let c = &mut spanning[0].coefficients[0];
                                *c = -c.clone();
                            }
                        })
                    });
                }
                None => {}
            }
        }
    }
    out
}

/// Whether a report passes re-check, after a round trip through the text
/// format.
fn accepted(rep: &AnalysisReport, v: &Vass) -> Result<bool, String> {
    let parsed = AnalysisReport::from_text(&rep.to_text()).map_err(|e| e.to_string())?;
    Ok(matches!(recheck(&parsed, v), Ok(f) if f.is_empty()))
}

fn certificate_soundness() -> Check {
    let mut r = rng(0xce47);
    let mut instances: Vec<Vass> = CORPUS.iter().map(|n| load_corpus(n)).collect();
    for _ in 0..200 {
        let connected = r.gen_bool(0.5);
        instances.push(random_vass(&mut r, 4, 3, connected));
    }
    let mut reports = Vec::new();
    let mut rejected = Vec::new();
    for (i, v) in instances.iter().enumerate() {
        let rep = build_report(v, &analyze(v).expect("analysis succeeds"));
        let json_ok = AnalysisReport::from_json(&rep.to_json()).map(|p| p == rep).unwrap_or(false);
        if !json_ok || accepted(&rep, v) != Ok(true) {
            rejected.push(i);
        }
        reports.push(rep);
    }
    let mut survived = Vec::new();
    for trial in 0..100 {
        let i = r.gen_range(0..instances.len());
        let options = corruptions(&reports[i]);
        let (label, bad) = options.choose(&mut r).unwrap();
        // A corrupted report either fails to parse or fails re-check.
        if accepted(bad, &instances[i]) == Ok(true) {
            survived.push(format!("trial {trial}: instance {i} {label}"));
        }
    }
    let detail = format!(
        "{} certificates, {} rejected; 100 corruptions, {} accepted {:?}",
        reports.len(),
        rejected.len(),
        survived.len(),
        survived
    );
    if rejected.is_empty() && survived.is_empty() {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn nontermination_agreement() -> Check {
    const N: u64 = 16;
    let budget = Budget {
        max_configs: 1_000_000,
        max_expansions: 1_000_000,
        max_depth: 1_000_000,
    };
    let mut r = rng(0x5eed5);
    let mut instances: Vec<(String, Vass)> = CORPUS.iter().map(|n| (n.to_string(), load_corpus(n))).collect();
    for i in 0..100 {
        instances.push((format!("random {i}"), random_vass(&mut r, 3, 2, false)));
    }
    let (mut agree, mut infinite, mut inconclusive, mut skipped_d) = (0, 0, 0, 0);
    let mut disagreements = Vec::new();
    for (name, v) in &instances {
        let verdict = analyze(v).expect("analysis succeeds").overall();
        if verdict == "CategoryD" {
            skipped_d += 1;
            continue;
        }
        let e = termination_complexity(v, N, budget);
        if e.value == RunLength::BudgetExceeded {
            inconclusive += 1;
            continue;
        }
        if (verdict == "NonTerminating") == (e.value == RunLength::Infinite) {
            agree += 1;
            infinite += usize::from(e.value == RunLength::Infinite);
        } else {
            disagreements.push(format!("{name}: {verdict} vs {:?}", e.value));
        }
    }
    let detail = format!(
        "{agree} agree ({infinite} non-terminating), {} disagree {:?}, {inconclusive} over budget, {skipped_d} category D skipped",
        disagreements.len(),
        disagreements
    );
    if disagreements.is_empty() {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn theta_degree(verdict: &str) -> Option<usize> {
    match verdict {
        "Theta(n)" => Some(1),
        v => v.strip_prefix("Theta(n^")?.strip_suffix(')')?.parse().ok(),
    }
}

fn samples(v: &Vass, ns: &[u64], budget: Budget) -> Option<Vec<(u64, u64)>> {
    ns.iter()
        .map(|&n| termination_complexity(v, n, budget).value.finite().map(|l| (n, l)))
        .collect()
}

fn exponent_agreement() -> Check {
    let t = Instant::now();
    let budget = Budget::default();
    let sizes = [8, 16, 32];
    let fig2a = match samples(&load_corpus("fig2a"), &sizes, budget).map(|s| fit_exponent(&s)) {
        Some(Ok(f)) => f,
        other => return fail(format!("fig2a oracle unavailable: {other:?}")),
    };
    let fig2a_ok = fig2a.exponent >= FIG2A_WINDOW.0 && fig2a.exponent <= FIG2A_WINDOW.1;
    let mut r = rng(0xf17);
    let (mut checked, mut bad) = (0, Vec::new());
    let (mut seen, mut degrees) = (0, BTreeSet::new());
    for i in 0..150 {
        // Two generic systems for every transfer-heavy one.
        let v = if i % 3 == 2 {
            let q = r.gen_range(1..=3);
            random_transfer_vass(&mut r, q)
        } else {
            random_vass(&mut r, 3, 2, false)
        };
        seen += 1;
        let Some(k) = theta_degree(&analyze(&v).expect("analysis succeeds").overall()) else {
            continue;
        };
        let Some(s) = samples(&v, &sizes, budget) else { continue };
        let Ok(fit) = fit_exponent(&s) else { continue };
        checked += 1;
        degrees.insert(k);
        if (fit.exponent - k as f64).abs() > FIT_TOLERANCE {
            bad.push(format!("random {i}: degree {k}, {fit}"));
        }
    }
    let dt = t.elapsed();
    let detail = format!(
        "fig2a {}; {checked} of {seen} random instances fitted (degrees {degrees:?}), {} outside tolerance {:?}; {:.2} s",
        fig2a,
        bad.len(),
        bad,
        dt.as_secs_f64()
    );
    if fig2a_ok && bad.is_empty() && dt < FIT_LIMIT {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn exponential_witness() -> Check {
    let budget = Budget {
        max_configs: 10_000_000,
        max_expansions: 10_000_000,
        max_depth: 1_000_000,
    };
    let v = load_corpus("fig4");
    let t = Instant::now();
    let mut values = Vec::new();
    for n in 4..=9u64 {
        let e = termination_complexity(&v, n, budget);
        values.push((n, e.value));
        if e.value.finite().is_none() {
            break;
        }
    }
    let dt = t.elapsed();
    let mut ok = dt < EXP_LIMIT;
    let mut ratios = Vec::new();
    for n in 4..=8u64 {
        let at = |m: u64| values.iter().find(|(k, _)| *k == m).and_then(|(_, l)| l.finite());
        match (at(n), at(n + 1)) {
            (Some(a), Some(b)) => {
                let q = b as f64 / a as f64;
                ok &= q >= FIG4_MIN_RATIO;
                ratios.push(format!("L({})/L({n})={q:.2}", n + 1));
            }
            _ => {
                ok = false;
                ratios.push(format!("L({})/L({n}) unavailable", n + 1));
            }
        }
    }
    let shown: Vec<String> = values
        .iter()
        .map(|(n, l)| match l.finite() {
            Some(x) => format!("L({n})={x}"),
            None => format!("L({n})={}", l.status()),
        })
        .collect();
    let detail = format!("{}; {}; {:.2} s", shown.join(" "), ratios.join(" "), dt.as_secs_f64());
    if ok {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn linear_dichotomy() -> Check {
    let mut r = rng(0xd1c0);
    let budget = Budget::default();
    let (mut linear, mut nonlinear, mut growth_checked) = (0, 0, 0);
    let mut bad = Vec::new();
    for i in 0..200 {
        let q = r.gen_range(1..=4);
        // Alternate between generic systems and transfer-heavy ones, which
        // are where terminating non-linear components come from.
        let v = if i % 2 == 0 {
            let d = r.gen_range(1..=2);
            random_vass_weighted(&mut r, q, d, true, DECREASING)
        } else {
            random_transfer_vass(&mut r, q)
        };
        let inc = compute_inc(&v, false);
        let reference = strictly_decreasing_positive_normal(&brute_inc(&v), v.dimension());
        let claim = check_linear_scc(&v, &inc);
        let is_linear = matches!(claim, SccLinearity::Linear(_));
        if is_linear != reference {
            bad.push(format!("instance {i}: analyzer {is_linear}, reference {reference}"));
            continue;
        }
        if is_linear {
            linear += 1;
            continue;
        }
        nonlinear += 1;
        let (Some(a), Some(b)) = (
            termination_complexity(&v, 8, budget).value.finite(),
            termination_complexity(&v, 32, budget).value.finite(),
        ) else {
            continue;
        };
        growth_checked += 1;
        if a == 0 || (b as f64) < SUPERLINEAR_RATIO * a as f64 {
            bad.push(format!("instance {i}: L(8)={a}, L(32)={b}"));
        }
    }
    let detail = format!(
        "{linear} linear, {nonlinear} not linear ({growth_checked} growth-checked), {} failures {:?}",
        bad.len(),
        bad
    );
    if bad.is_empty() {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn lp_equivalence() -> Check {
    let mut r = rng(0x1b);
    let (mut optimal, mut infeasible) = (0, 0);
    let mut bad = Vec::new();
    for i in 0..500 {
        let (rows, objective) = random_bounded_lp(&mut r);
        let vars = objective.len();
        let reference: Option<Rational> = vertex_optimum(&with_bounds(&rows, vars), vars, &objective);
        let got = to_program(&rows, &objective).solve();
        let same = match (&got, &reference) {
            (LpOutcome::Optimal { value, point }, Some(best)) => {
                optimal += 1;
                value == best && rows.iter().all(|row| row.holds(&point.0)) && point.0.iter().all(is_nonneg)
            }
            (LpOutcome::Infeasible, None) => {
                infeasible += 1;
                true
            }
            _ => false,
        };
        if !same {
            bad.push(format!("lp {i}: simplex {got:?}, vertices {reference:?}"));
        }
    }
    let detail = format!("{optimal} optimal, {infeasible} infeasible, {} mismatches {:?}", bad.len(), bad);
    if bad.is_empty() {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn determinism() -> Check {
    let mut differing = Vec::new();
    for name in CORPUS {
        let p = corpus_path(name);
        let p = p.to_str().unwrap();
        for extra in [None, Some("--json")] {
            let mut args = vec!["analyze", p];
            args.extend(extra);
            let first = run_cli(&args);
            let second = run_cli(&args);
            if first.0 != 0 || first != second {
                differing.push(format!("{name} {}", extra.unwrap_or("text")));
            }
        }
    }
    let detail = format!("{} corpus files, text and JSON, {} differ {:?}", CORPUS.len(), differing.len(), differing);
    if differing.is_empty() {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("golden verdicts", golden_verdicts),
        ("inc exactness", inc_exactness),
        ("restriction exactness", restriction_exactness),
        ("certificate soundness", certificate_soundness),
        ("oracle agreement, non-termination", nontermination_agreement),
        ("oracle agreement, exponent", exponent_agreement),
        ("exponential witness", exponential_witness),
        ("linear dichotomy", linear_dichotomy),
        ("LP oracle equivalence", lp_equivalence),
        ("determinism", determinism),
    ];
    // `cargo test -- <filter>` style selection by criterion number.
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let o = f();
        println!("criterion {id:2} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
