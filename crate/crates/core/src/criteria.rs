//! Regime classification.
//!
//! Each extinction or non-extinction result is a checklist of hypotheses.
//! Every leaf keeps both sides of its comparison so a report can be read
//! without re-deriving anything. Results are named by the regime they cover:
//!
//! | id | outcome |
//! |----|---------|
//! | `nonnegative-exponents` | r1, r2 ≥ 0 |
//! | `x-nonnegative`, `y-nonnegative` | one exponent ≥ 0, the other in the interior |
//! | `strong-interaction` | interior, product above κ1κ2 |
//! | `critical-strong-drift` | product at κ1κ2, drift-dominant, balance above 1 |
//! | `critical-symmetric`, `critical-symmetric-balanced` | product at κ1κ2, matched diffusive exponents |
//! | `x-fast-decay`, `y-fast-decay` | one exponent at or below θ−1 |
//! | `weak-interaction-drift`, `weak-interaction-diffusive`, `weak-cross-diffusive` | product below κ1κ2 |
//! | `critical-weak-drift` | product at κ1κ2, drift-dominant, balance below 1 |
//!
//! The interior means θi − 1 < ri < 0 for both coordinates.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{derive_exponents_with_tol, DerivedParams, ModelParams};

/// Relative band inside which the two sides of a comparison count as equal.
pub const CRITICAL_BAND: f64 = 1e-12;

/// Channels whose shifted exponents differ by at most this much share the dominant rate.
pub const TIE_TOL: f64 = 1e-12;

pub const LARGE_EXPONENT_CAVEAT: &str = "drift-dominant extinction with active jump channels: \
     the supporting test-function bound uses a large-exponent estimate of the jump kernel that \
     fails near the boundary (see `ineq --lemma kvz-large-exponent-scan`); the verdict is transcribed as stated";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    NonExtinctionAS,
    ExtinctionPositiveProb,
    Undetermined,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NonExtinctionAS => "NonExtinctionAS",
            Verdict::ExtinctionPositiveProb => "ExtinctionPositiveProb",
            Verdict::Undetermined => "Undetermined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    NonExtinction,
    Extinction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rel {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Rel {
    fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
            Rel::Eq => "=",
            Rel::Ne => "!=",
        }
    }

    fn accepts(self, o: Ordering) -> bool {
        match self {
            Rel::Lt => o == Ordering::Less,
            Rel::Le => o != Ordering::Greater,
            Rel::Gt => o == Ordering::Greater,
            Rel::Ge => o != Ordering::Less,
            Rel::Eq => o == Ordering::Equal,
            Rel::Ne => o != Ordering::Equal,
        }
    }
}

/// A hypothesis: either a comparison (`lhs relation rhs`) or an `all`/`any` group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub label: String,
    pub holds: bool,
    pub relation: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<Condition>,
}

impl Condition {
    fn group(label: &str, relation: &'static str, holds: bool, parts: Vec<Condition>) -> Self {
        Condition {
            label: label.to_string(),
            holds,
            relation,
            lhs: None,
            rhs: None,
            parts,
        }
    }

    pub fn all(label: &str, parts: Vec<Condition>) -> Self {
        let holds = parts.iter().all(|c| c.holds);
        Self::group(label, "all", holds, parts)
    }

    pub fn any(label: &str, parts: Vec<Condition>) -> Self {
        let holds = parts.iter().any(|c| c.holds);
        Self::group(label, "any", holds, parts)
    }

    /// Depth-first search by label.
    pub fn find(&self, label: &str) -> Option<&Condition> {
        if self.label == label {
            return Some(self);
        }
        self.parts.iter().find_map(|c| c.find(label))
    }
}

/// Three-way comparison with the critical band. `None` when either side is NaN.
pub fn banded_order(a: f64, b: f64) -> Option<Ordering> {
    if a.is_nan() || b.is_nan() {
        return None;
    }
    if a == b || (a.is_finite() && b.is_finite() && (a - b).abs() <= CRITICAL_BAND * a.abs().max(b.abs())) {
        return Some(Ordering::Equal);
    }
    a.partial_cmp(&b)
}

#[derive(Default)]
struct Notes(BTreeSet<String>);

impl Notes {
    fn cmp(&mut self, label: &str, lhs: f64, rel: Rel, rhs: f64) -> Condition {
        let holds = match banded_order(lhs, rhs) {
            Some(o) => {
                let banded = o == Ordering::Equal && lhs != rhs;
                let strict = matches!(rel, Rel::Lt | Rel::Le | Rel::Gt | Rel::Ge);
                if (o == Ordering::Equal && strict) || (banded && !strict) {
                    self.0
                        .insert(format!("near-critical: {label} ({lhs:e} vs {rhs:e})"));
                }
                rel.accepts(o)
            }
            None => {
                self.0.insert(format!("undefined comparison: {label}"));
                false
            }
        };
        Condition {
            label: label.to_string(),
            holds,
            relation: rel.symbol(),
            lhs: Some(lhs),
            rhs: Some(rhs),
            parts: Vec::new(),
        }
    }
}

fn coord_name(coord: usize) -> &'static str {
    if coord == 1 {
        "x"
    } else {
        "y"
    }
}

/// Per-coordinate view so both sides of the system are written once.
struct Side {
    name: &'static str,
    r: f64,
    theta: f64,
    kappa: f64,
    other_r: f64,
    other_theta: f64,
    other_kappa: f64,
    drift: (f64, f64),
    noise_min: f64,
}

fn side(p: &ModelParams, dp: &DerivedParams, coord: usize) -> Side {
    let ch = p.channels(coord);
    let noise_min = ch[1..]
        .iter()
        .filter(|&&(b, _)| b != 0.0)
        .map(|&(_, e)| e)
        .fold(f64::INFINITY, f64::min);
    let (r, theta, kappa, other_r, other_theta, other_kappa) = if coord == 1 {
        (dp.r1, p.theta1, p.kappa1, dp.r2, p.theta2, p.kappa2)
    } else {
        (dp.r2, p.theta2, p.kappa2, dp.r1, p.theta1, p.kappa1)
    };
    Side {
        name: coord_name(coord),
        r,
        theta,
        kappa,
        other_r,
        other_theta,
        other_kappa,
        drift: ch[0],
        noise_min,
    }
}

fn interior(n: &mut Notes, s: &Side) -> Condition {
    Condition::all(
        &format!("{} interior", s.name),
        vec![
            n.cmp(
                &format!("r_{} > theta_{} - 1", s.name, s.name),
                s.r,
                Rel::Gt,
                s.theta - 1.0,
            ),
            n.cmp(&format!("r_{} < 0", s.name), s.r, Rel::Lt, 0.0),
        ],
    )
}

fn both_interior(n: &mut Notes, p: &ModelParams, dp: &DerivedParams) -> Vec<Condition> {
    vec![interior(n, &side(p, dp, 1)), interior(n, &side(p, dp, 2))]
}

/// Drift exponent against the fastest active noise channel, `r_i0 − 1` vs `min (r_ij − ϱ_ij)`.
fn drift_leads(n: &mut Notes, s: &Side, rel: Rel) -> Condition {
    let verb = if rel == Rel::Lt { "leads" } else { "does not lead" };
    n.cmp(&format!("{} drift {verb}", s.name), s.drift.1, rel, s.noise_min)
}

fn active(n: &mut Notes, label: &str, b: f64) -> Condition {
    n.cmp(label, b, Rel::Ne, 0.0)
}

/// The drift-dominance condition, split into its three alternatives.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftDominance {
    pub both: Condition,
    pub x_only: Condition,
    pub y_only: Condition,
}

impl DriftDominance {
    pub fn holds(&self) -> bool {
        self.both.holds || self.x_only.holds || self.y_only.holds
    }

    fn into_condition(self, label: &str) -> Condition {
        Condition::any(label, vec![self.both, self.x_only, self.y_only])
    }
}

pub fn drift_dominance(p: &ModelParams, dp: &DerivedParams) -> DriftDominance {
    drift_dominance_with(&mut Notes::default(), p, dp)
}

fn drift_dominance_with(n: &mut Notes, p: &ModelParams, dp: &DerivedParams) -> DriftDominance {
    let sx = side(p, dp, 1);
    let sy = side(p, dp, 2);
    let both = Condition::all(
        "drift dominant in both",
        vec![
            active(n, "b_x0 != 0", p.b10),
            active(n, "b_y0 != 0", p.b20),
            drift_leads(n, &sx, Rel::Lt),
            drift_leads(n, &sy, Rel::Lt),
        ],
    );
    let one = |n: &mut Notes, s: &Side, t: &Side, b_own: f64, b_other: f64| {
        let (own, other) = (s.name, t.name);
        Condition::all(
            &format!("drift dominant in {own} only"),
            vec![
                n.cmp(
                    &format!("(r_{own} + 1 - theta_{own}) / kappa_{own} < r_{own} / r_{other}"),
                    (s.r + 1.0 - s.theta) / s.kappa,
                    Rel::Lt,
                    s.r / t.r,
                ),
                Condition::any(
                    &format!("{own} drift case"),
                    vec![
                        Condition::all(
                            &format!("both drifts active, only {own} leads"),
                            vec![
                                active(n, &format!("b_{own}0 != 0"), b_own),
                                active(n, &format!("b_{other}0 != 0"), b_other),
                                drift_leads(n, s, Rel::Lt),
                                drift_leads(n, t, Rel::Ge),
                            ],
                        ),
                        Condition::all(
                            &format!("no {other} drift"),
                            vec![
                                n.cmp(&format!("b_{other}0 = 0"), b_other, Rel::Eq, 0.0),
                                active(n, &format!("b_{own}0 != 0"), b_own),
                                drift_leads(n, s, Rel::Lt),
                            ],
                        ),
                    ],
                ),
            ],
        )
    };
    let x_only = one(n, &sx, &sy, p.b10, p.b20);
    let y_only = one(n, &sy, &sx, p.b20, p.b10);
    DriftDominance { both, x_only, y_only }
}

/// The two test-function ratio alternatives. Both carry the interior
/// precondition and are false outside it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioConditions {
    pub ratio: Condition,
    pub offset: Condition,
}

impl RatioConditions {
    pub fn holds(&self) -> bool {
        self.ratio.holds || self.offset.holds
    }

    fn into_condition(self, label: &str) -> Condition {
        Condition::any(label, vec![self.ratio, self.offset])
    }
}

pub fn ratio_conditions(p: &ModelParams, dp: &DerivedParams) -> RatioConditions {
    ratio_conditions_with(&mut Notes::default(), p, dp)
}

fn ratio_conditions_with(n: &mut Notes, p: &ModelParams, dp: &DerivedParams) -> RatioConditions {
    let ratio_for = |n: &mut Notes, s: &Side| {
        // Written for the coordinate whose exponent sits in the numerator.
        let (r1, r2) = (s.r, s.other_r);
        let lhs = ((r1 + 1.0) / (r2 + 1.0)).max(r1 / r2);
        let rhs = s.other_kappa / (r2 + 1.0 - s.other_theta);
        n.cmp(&format!("ratio-{}", s.name), lhs, Rel::Lt, rhs)
    };
    let offset_for = |n: &mut Notes, s: &Side| {
        let lhs = (1.0 - s.theta) / (s.kappa - s.other_r);
        let rhs = (s.other_kappa / (s.other_r + 1.0 - s.other_theta))
            .min((s.other_kappa - s.r) / (1.0 - s.other_theta))
            .min(1.0 - s.theta)
            .min(2.0 - s.other_kappa);
        n.cmp(&format!("offset-{}", s.name), lhs, Rel::Lt, rhs)
    };
    let sx = side(p, dp, 1);
    let sy = side(p, dp, 2);
    let mut pre = both_interior(n, p, dp);
    let ratio = Condition::any("ratio", vec![ratio_for(n, &sx), ratio_for(n, &sy)]);
    let offset = Condition::any("offset", vec![offset_for(n, &sx), offset_for(n, &sy)]);
    let mut ratio_parts = pre.clone();
    ratio_parts.push(ratio);
    pre.push(offset);
    RatioConditions {
        ratio: Condition::all("ratio alternative", ratio_parts),
        offset: Condition::all("offset alternative", pre),
    }
}

/// Drift is active and no faster than the quickest noise channel: `r_i0 − 1 ≥ min (r_ij − ϱ_ij)`.
pub fn drift_recessive(p: &ModelParams, dp: &DerivedParams, coord: usize) -> Condition {
    drift_recessive_with(&mut Notes::default(), p, dp, coord)
}

fn drift_recessive_with(n: &mut Notes, p: &ModelParams, dp: &DerivedParams, coord: usize) -> Condition {
    let s = side(p, dp, coord);
    Condition::all(
        &format!("{} drift recessive", s.name),
        vec![
            active(n, &format!("b_{}0 != 0", s.name), s.drift.0),
            n.cmp(
                &format!("{} drift exponent >= fastest noise", s.name),
                s.drift.1,
                Rel::Ge,
                s.noise_min,
            ),
        ],
    )
}

fn product(n: &mut Notes, p: &ModelParams, dp: &DerivedParams, rel: Rel) -> Condition {
    let lhs = (dp.r1 + 1.0 - p.theta1) * (dp.r2 + 1.0 - p.theta2);
    let word = match rel {
        Rel::Gt => "above",
        Rel::Lt => "below",
        _ => "at",
    };
    n.cmp(
        &format!("(r_x + 1 - theta_x)(r_y + 1 - theta_y) {word} kappa_x kappa_y"),
        lhs,
        rel,
        p.kappa1 * p.kappa2,
    )
}

/// `(a1/b1)^{1/(r1+1−θ1)} (a2/b2)^{1/κ2}`, evaluated in logs.
pub fn balance(p: &ModelParams, dp: &DerivedParams) -> f64 {
    let l = (p.a1 / dp.b1).ln() / (dp.r1 + 1.0 - p.theta1) + (p.a2 / dp.b2).ln() / p.kappa2;
    l.exp()
}

fn balance_cmp(n: &mut Notes, p: &ModelParams, dp: &DerivedParams, rel: Rel) -> Condition {
    let word = match rel {
        Rel::Gt => "above",
        Rel::Lt => "below",
        _ => "at",
    };
    n.cmp(&format!("interaction balance {word} 1"), balance(p, dp), rel, 1.0)
}

/// A single result's hypotheses and whether all of them hold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checklist {
    pub id: &'static str,
    pub outcome: Outcome,
    pub matched: bool,
    pub hypotheses: Condition,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub verdict: Verdict,
    pub matched: Vec<&'static str>,
    pub derived: DerivedParams,
    pub checklists: Vec<Checklist>,
    pub notes: Vec<String>,
}

/// Every checklist id, in report order.
pub const RESULT_IDS: [&str; 13] = [
    "nonnegative-exponents",
    "x-nonnegative",
    "y-nonnegative",
    "strong-interaction",
    "critical-strong-drift",
    "critical-symmetric",
    "critical-symmetric-balanced",
    "x-fast-decay",
    "y-fast-decay",
    "weak-interaction-drift",
    "weak-interaction-diffusive",
    "weak-cross-diffusive",
    "critical-weak-drift",
];

/// Id of the same result with the coordinates exchanged.
pub fn mirror_id(id: &str) -> String {
    if let Some(rest) = id.strip_prefix("x-") {
        format!("y-{rest}")
    } else if let Some(rest) = id.strip_prefix("y-") {
        format!("x-{rest}")
    } else {
        id.to_string()
    }
}

impl RegimeReport {
    pub fn checklist(&self, id: &str) -> Option<&Checklist> {
        self.checklists.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned text rendering of every checklist.
    pub fn table(&self) -> String {
        fn num(v: Option<f64>) -> String {
            v.map(|v| format!("{v:.6e}")).unwrap_or_default()
        }
        fn walk(c: &Condition, depth: usize, out: &mut Vec<[String; 5]>) {
            let mark = if c.holds { "yes" } else { "no" };
            let label = format!("{}{}", "  ".repeat(depth), c.label);
            out.push([
                label,
                num(c.lhs),
                c.relation.to_string(),
                num(c.rhs),
                mark.to_string(),
            ]);
            for part in &c.parts {
                walk(part, depth + 1, out);
            }
        }
        let mut s = String::new();
        let _ = writeln!(s, "verdict: {}", self.verdict.as_str());
        let matched = if self.matched.is_empty() {
            "none".to_string()
        } else {
            self.matched.join(", ")
        };
        let _ = writeln!(s, "matched: {matched}");
        let _ = writeln!(
            s,
            "r1 = {:.6e}  r2 = {:.6e}  b1 = {:.6e}  b2 = {:.6e}",
            self.derived.r1, self.derived.r2, self.derived.b1, self.derived.b2
        );
        for c in &self.checklists {
            let outcome = match c.outcome {
                Outcome::NonExtinction => "non-extinction",
                Outcome::Extinction => "extinction",
            };
            let _ = writeln!(s, "\n[{}] {} matched={}", c.id, outcome, c.matched);
            let mut rows = Vec::new();
            walk(&c.hypotheses, 1, &mut rows);
            let widths: Vec<usize> = (0..5)
                .map(|k| rows.iter().map(|r| r[k].chars().count()).max().unwrap_or(0))
                .collect();
            for r in rows {
                let _ = writeln!(
                    s,
                    "{:<w0$}  {:>w1$}  {:<w2$}  {:>w3$}  {}",
                    r[0],
                    r[1],
                    r[2],
                    r[3],
                    r[4],
                    w0 = widths[0],
                    w1 = widths[1],
                    w2 = widths[2],
                    w3 = widths[3],
                );
            }
        }
        if !self.notes.is_empty() {
            let _ = writeln!(s, "\nnotes:");
            for note in &self.notes {
                let _ = writeln!(s, "  {note}");
            }
        }
        s
    }
}

/// Evaluates every result's hypotheses and returns the implied verdict.
///
/// Errors with `Internal` if an extinction and a non-extinction result both
/// match, which would mean a transcription bug.
pub fn classify(p: &ModelParams) -> Result<RegimeReport> {
    let p = p.validate()?;
    let dp = derive_exponents_with_tol(&p, TIE_TOL);
    let mut n = Notes::default();
    let sx = side(&p, &dp, 1);
    let sy = side(&p, &dp, 2);
    let mut lists: Vec<(&'static str, Outcome, Condition)> = Vec::new();

    let nonneg = |n: &mut Notes, s: &Side| n.cmp(&format!("r_{} >= 0", s.name), s.r, Rel::Ge, 0.0);

    lists.push((
        "nonnegative-exponents",
        Outcome::NonExtinction,
        Condition::all("hypotheses", vec![nonneg(&mut n, &sx), nonneg(&mut n, &sy)]),
    ));
    for (own, other, id) in [(&sx, &sy, "x-nonnegative"), (&sy, &sx, "y-nonnegative")] {
        let parts = vec![nonneg(&mut n, own), interior(&mut n, other)];
        lists.push((id, Outcome::NonExtinction, Condition::all("hypotheses", parts)));
    }

    let mut parts = both_interior(&mut n, &p, &dp);
    parts.push(product(&mut n, &p, &dp, Rel::Gt));
    lists.push((
        "strong-interaction",
        Outcome::NonExtinction,
        Condition::all("hypotheses", parts),
    ));

    let critical = |n: &mut Notes| {
        let mut parts = both_interior(n, &p, &dp);
        parts.push(product(n, &p, &dp, Rel::Eq));
        parts
    };

    let mut parts = critical(&mut n);
    parts.push(drift_dominance_with(&mut n, &p, &dp).both);
    parts.push(balance_cmp(&mut n, &p, &dp, Rel::Gt));
    lists.push((
        "critical-strong-drift",
        Outcome::NonExtinction,
        Condition::all("hypotheses", parts),
    ));

    // Matched diffusive exponents. The common-exponent equalities only involve
    // active channels; an inactive channel's exponent has no effect on the system.
    let symmetric = |n: &mut Notes| {
        let mut parts = critical(n);
        parts.push(n.cmp("b12 = 0", p.b12, Rel::Eq, 0.0));
        parts.push(n.cmp("b22 = 0", p.b22, Rel::Eq, 0.0));
        let common = p.r11 - 2.0;
        let mut eqs = Vec::new();
        for (b, e, label) in [
            (p.b10, p.r10 - 1.0, "r10 - 1 = r11 - 2"),
            (p.b20, p.r20 - 1.0, "r20 - 1 = r11 - 2"),
            (p.b21, p.r21 - 2.0, "r21 - 2 = r11 - 2"),
        ] {
            if b != 0.0 {
                eqs.push(n.cmp(label, e, Rel::Eq, common));
            }
        }
        parts.push(Condition::all("common exponent over active channels", eqs));
        parts.push(n.cmp("theta_x = theta_y", p.theta1, Rel::Eq, p.theta2));
        parts.push(n.cmp("kappa_x = kappa_y", p.kappa1, Rel::Eq, p.kappa2));
        parts
    };
    let mut parts = symmetric(&mut n);
    parts.push(n.cmp("a1 a2 >= b1 b2", p.a1 * p.a2, Rel::Ge, dp.b1 * dp.b2));
    lists.push((
        "critical-symmetric",
        Outcome::NonExtinction,
        Condition::all("hypotheses", parts),
    ));
    let mut parts = symmetric(&mut n);
    parts.push(balance_cmp(&mut n, &p, &dp, Rel::Eq));
    lists.push((
        "critical-symmetric-balanced",
        Outcome::NonExtinction,
        Condition::all("hypotheses", parts),
    ));

    for (s, id) in [(&sx, "x-fast-decay"), (&sy, "y-fast-decay")] {
        let parts = vec![
            n.cmp(
                &format!("r_{} <= theta_{} - 1", s.name, s.name),
                s.r,
                Rel::Le,
                s.theta - 1.0,
            ),
            n.cmp(&format!("r_{} < 0", s.name), s.r, Rel::Lt, 0.0),
        ];
        lists.push((id, Outcome::Extinction, Condition::all("hypotheses", parts)));
    }

    let mut parts = both_interior(&mut n, &p, &dp);
    parts.push(drift_dominance_with(&mut n, &p, &dp).into_condition("drift dominance"));
    parts.push(product(&mut n, &p, &dp, Rel::Lt));
    lists.push((
        "weak-interaction-drift",
        Outcome::Extinction,
        Condition::all("hypotheses", parts),
    ));

    let recessive = |n: &mut Notes| {
        let mut parts = both_interior(n, &p, &dp);
        parts.push(drift_recessive_with(n, &p, &dp, 1));
        parts.push(drift_recessive_with(n, &p, &dp, 2));
        parts
    };
    let mut parts = recessive(&mut n);
    parts.push(product(&mut n, &p, &dp, Rel::Lt));
    parts.push(ratio_conditions_with(&mut n, &p, &dp).into_condition("test-function ratios"));
    lists.push((
        "weak-interaction-diffusive",
        Outcome::Extinction,
        Condition::all("hypotheses", parts),
    ));

    let mut parts = recessive(&mut n);
    parts.push(n.cmp(
        "r_x + 1 - theta_x < kappa_y",
        sx.r + 1.0 - sx.theta,
        Rel::Lt,
        p.kappa2,
    ));
    parts.push(n.cmp(
        "r_y + 1 - theta_y < kappa_x",
        sy.r + 1.0 - sy.theta,
        Rel::Lt,
        p.kappa1,
    ));
    lists.push((
        "weak-cross-diffusive",
        Outcome::Extinction,
        Condition::all("hypotheses", parts),
    ));

    let mut parts = critical(&mut n);
    parts.push(drift_dominance_with(&mut n, &p, &dp).into_condition("drift dominance"));
    parts.push(balance_cmp(&mut n, &p, &dp, Rel::Lt));
    lists.push((
        "critical-weak-drift",
        Outcome::Extinction,
        Condition::all("hypotheses", parts),
    ));

    let checklists: Vec<Checklist> = lists
        .into_iter()
        .map(|(id, outcome, hypotheses)| Checklist {
            id,
            outcome,
            matched: hypotheses.holds,
            hypotheses,
        })
        .collect();
    let matched: Vec<&'static str> = checklists.iter().filter(|c| c.matched).map(|c| c.id).collect();
    let any_of = |o: Outcome| checklists.iter().any(|c| c.matched && c.outcome == o);
    let verdict = match (any_of(Outcome::NonExtinction), any_of(Outcome::Extinction)) {
        (true, true) => {
            return Err(Error::Internal(format!(
                "non-extinction and extinction results both match: {}",
                matched.join(", ")
            )))
        }
        (true, false) => Verdict::NonExtinctionAS,
        (false, true) => Verdict::ExtinctionPositiveProb,
        (false, false) => Verdict::Undetermined,
    };

    let jumps = p.b12 != 0.0 || p.b22 != 0.0;
    if jumps
        && matched
            .iter()
            .any(|id| matches!(*id, "weak-interaction-drift" | "critical-weak-drift"))
    {
        n.0.insert(LARGE_EXPONENT_CAVEAT.to_string());
    }

    Ok(RegimeReport {
        verdict,
        matched,
        derived: dp,
        checklists,
        notes: n.0.into_iter().collect(),
    })
}
