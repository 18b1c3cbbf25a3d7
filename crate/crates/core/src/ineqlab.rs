//! Numerical checks of the auxiliary inequalities: Young-type bounds, box
//! constants near the origin, the weight `δ0` in critical two-term
//! comparisons, and lower bounds for the integral of `K(v,z)`.
//!
//! Everything here is floating point on finite grids and clouds; a passing
//! report is evidence, not a certificate.

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generator::GridSpec;
use crate::model::{derive_exponents, ModelParams};
use crate::quadrature::{integrate, GaussLegendre, Tolerance};
use crate::stablejump::StableMeasure;

/// Relative slack below zero still counted as satisfied.
pub const MARGIN_SLACK: f64 = 1e-12;
/// Bisection and halving budget of the constant searches.
pub const MAX_SEARCH_ITER: usize = 60;
pub const CLOUD_LO: f64 = 1e-6;
pub const CLOUD_HI: f64 = 1e2;
pub const DEFAULT_SPLIT_DELTA: f64 = 8.0;
/// Exponents tried when looking for a passing large exponent.
pub const LARGE_EXPONENT_SCAN: [f64; 4] = [4.0, 8.0, 16.0, 32.0];
/// Tolerance on the equalities a lemma assumes.
const EQ_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IneqReport {
    pub lemma: String,
    /// Number of random trials, grid nodes or v values examined.
    pub trials: usize,
    pub satisfied: bool,
    /// Smallest relative margin `(lhs − rhs)/max(|lhs|, |rhs|)` seen.
    pub worst_margin: f64,
    pub witness: BTreeMap<String, f64>,
    /// The constant produced by a search, when there is one.
    pub constant: Option<f64>,
    pub details: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl IneqReport {
    fn new(lemma: &str) -> Self {
        IneqReport {
            lemma: lemma.to_string(),
            trials: 0,
            satisfied: true,
            worst_margin: f64::INFINITY,
            witness: BTreeMap::new(),
            constant: None,
            details: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn record(&mut self, margin: f64, point: &[(&str, f64)]) {
        self.trials += 1;
        // NaN margins count as failures.
        if !(margin >= self.worst_margin) {
            self.worst_margin = margin;
            self.witness = point.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        }
    }

    fn detail(&mut self, key: &str, value: f64) {
        self.details.insert(key.to_string(), value);
    }

    fn finish(mut self) -> Self {
        self.satisfied = self.satisfied && self.worst_margin >= -MARGIN_SLACK;
        self
    }
}

pub fn rel_margin(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs) / scale
    }
}

/// Log-uniform draw on `[lo, hi]`.
pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    (lo.ln() + u * (hi.ln() - lo.ln())).exp()
}

fn hypothesis(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Hypothesis(what.to_string()))
    }
}

fn precondition(ok: bool, what: String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(what))
    }
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= EQ_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Largest `c ∈ (0,1]` with `holds(c)`: halve from 1 to a first success, then
/// bisect in `log c`.
fn largest_box(holds: impl Fn(f64) -> bool) -> Result<f64> {
    if holds(1.0) {
        return Ok(1.0);
    }
    let mut hi = 1.0;
    let mut lo = None;
    for _ in 0..MAX_SEARCH_ITER {
        let c = 0.5 * hi;
        if holds(c) {
            lo = Some(c);
            break;
        }
        hi = c;
    }
    let Some(mut lo) = lo else {
        return Err(Error::Internal(format!(
            "no admissible box down to {hi:e} after {MAX_SEARCH_ITER} halvings"
        )));
    };
    for _ in 0..MAX_SEARCH_ITER {
        if hi / lo < 1.0 + 1e-9 {
            break;
        }
        let mid = (lo * hi).sqrt();
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Worst relative margin of `f` over the log grid on `(0,c]²`, with its node.
fn grid_worst(grid: GridSpec, c: f64, f: &impl Fn(f64, f64) -> (f64, f64)) -> (f64, f64, f64) {
    let axis = grid.nodes(c);
    let mut worst = (f64::INFINITY, c, c);
    for &x in &axis {
        for &y in &axis {
            let (lhs, rhs) = f(x, y);
            let m = rel_margin(lhs, rhs);
            if !(m >= worst.0) {
                worst = (m, x, y);
            }
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// Young-type inequalities

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum YoungVariant {
    /// `u+v ≥ p^{1/p}q^{1/q}u^{1/p}v^{1/q}` and `u/p+v/q ≥ u^{1/p}v^{1/q}`.
    Young,
    /// `x^p+y^p ≥ (x+y)^p` for `0<p≤1`.
    Subadditive,
    /// `x^p+y^p ≥ 2^{1−p}(x+y)^p` for `p>1`.
    PowerMean,
    /// A box `(0,c)²` on which `c1x^{p1}+c2y^{p2} ≥ c3x^{p3}y^{p4}`.
    LocalDomination,
}

impl YoungVariant {
    pub const ALL: [YoungVariant; 4] = [
        YoungVariant::Young,
        YoungVariant::Subadditive,
        YoungVariant::PowerMean,
        YoungVariant::LocalDomination,
    ];

    pub fn name(self) -> &'static str {
        match self {
            YoungVariant::Young => "young",
            YoungVariant::Subadditive => "subadditive",
            YoungVariant::PowerMean => "power-mean",
            YoungVariant::LocalDomination => "local-domination",
        }
    }
}

impl FromStr for YoungVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        YoungVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown inequality variant '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct YoungInputs {
    /// Fixed exponent; drawn per trial when absent.
    pub p: Option<f64>,
    /// `p1..p4` for the local domination variant.
    pub exponents: Option<[f64; 4]>,
    /// `c1..c3` for the local domination variant.
    pub coefficients: Option<[f64; 3]>,
}

/// Both sides of the two Young bounds at `(u, v, p)`.
pub fn young_sides(u: f64, v: f64, p: f64) -> [(f64, f64); 2] {
    let q = p / (p - 1.0);
    let mix = u.powf(1.0 / p) * v.powf(1.0 / q);
    [
        (u + v, p.powf(1.0 / p) * q.powf(1.0 / q) * mix),
        (u / p + v / q, mix),
    ]
}

pub fn young_check<R: Rng + ?Sized>(
    variant: YoungVariant,
    inputs: &YoungInputs,
    trials: usize,
    rng: &mut R,
) -> Result<IneqReport> {
    let mut rep = IneqReport::new(variant.name());
    let draw_p = |rng: &mut R, lo: f64, width: f64| lo + width * (1.0 - rng.random::<f64>());
    match variant {
        YoungVariant::Young => {
            if let Some(p) = inputs.p {
                precondition(p > 1.0 && p.is_finite(), format!("need p > 1, got {p}"))?;
            }
            for _ in 0..trials {
                let p = inputs.p.unwrap_or_else(|| draw_p(rng, 1.0, 19.0));
                let u = log_uniform(rng, CLOUD_LO, CLOUD_HI);
                let v = log_uniform(rng, CLOUD_LO, CLOUD_HI);
                let m = young_sides(u, v, p)
                    .iter()
                    .map(|&(l, r)| rel_margin(l, r))
                    .fold(f64::INFINITY, f64::min);
                rep.record(m, &[("u", u), ("v", v), ("p", p)]);
            }
        }
        YoungVariant::Subadditive | YoungVariant::PowerMean => {
            let le1 = variant == YoungVariant::Subadditive;
            if let Some(p) = inputs.p {
                let ok = if le1 {
                    p > 0.0 && p <= 1.0
                } else {
                    p > 1.0 && p.is_finite()
                };
                precondition(
                    ok,
                    format!("exponent {p} outside the range of '{}'", variant.name()),
                )?;
            }
            for _ in 0..trials {
                let p = inputs.p.unwrap_or_else(|| {
                    if le1 {
                        draw_p(rng, 0.0, 1.0)
                    } else {
                        draw_p(rng, 1.0, 4.0)
                    }
                });
                let x = log_uniform(rng, CLOUD_LO, CLOUD_HI);
                let y = log_uniform(rng, CLOUD_LO, CLOUD_HI);
                let lhs = x.powf(p) + y.powf(p);
                let factor = if le1 { 1.0 } else { 2f64.powf(1.0 - p) };
                let rhs = factor * (x + y).powf(p);
                rep.record(rel_margin(lhs, rhs), &[("x", x), ("y", y), ("p", p)]);
            }
        }
        YoungVariant::LocalDomination => {
            let (Some(ps), Some(cs)) = (inputs.exponents, inputs.coefficients) else {
                return Err(Error::Precondition(
                    "local domination needs four exponents and three coefficients".to_string(),
                ));
            };
            precondition(
                ps.iter().chain(cs.iter()).all(|&t| t > 0.0 && t.is_finite()),
                "exponents and coefficients must be positive".to_string(),
            )?;
            let ratio = ps[2] / ps[0] + ps[3] / ps[1];
            precondition(ratio > 1.0, format!("need p3/p1 + p4/p2 > 1, got {ratio}"))?;
            let sides = |x: f64, y: f64| {
                (
                    cs[0] * x.powf(ps[0]) + cs[1] * y.powf(ps[1]),
                    cs[2] * x.powf(ps[2]) * y.powf(ps[3]),
                )
            };
            let grid = GridSpec::default();
            let c = largest_box(|c| grid_worst(grid, c, &sides).0 >= -MARGIN_SLACK)?;
            let (m, x, y) = grid_worst(grid, c, &sides);
            rep.trials = grid.n * grid.n;
            rep.worst_margin = m;
            rep.witness = [("x".to_string(), x), ("y".to_string(), y)].into();
            for _ in 0..trials {
                let x = log_uniform(rng, c * 1e-6, c);
                let y = log_uniform(rng, c * 1e-6, c);
                let (l, r) = sides(x, y);
                rep.record(rel_margin(l, r), &[("x", x), ("y", y)]);
            }
            rep.constant = Some(c);
            rep.detail("exponent_ratio", ratio);
        }
    }
    Ok(rep.finish())
}

// ---------------------------------------------------------------------------
// Box constants

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoxLemma {
    /// The two cross terms beat `C·m^δ·y^{r2−ρ2}` on `(0,1/m]²`.
    CrossTerms,
    /// `c1x^{r1+ρ1}+c2y^{r2+ρ2}` beats both interaction terms on `(0,c]²`.
    PowersOverInteraction,
}

impl BoxLemma {
    pub fn name(self) -> &'static str {
        match self {
            BoxLemma::CrossTerms => "cross-terms",
            BoxLemma::PowersOverInteraction => "powers-over-interaction",
        }
    }
}

impl FromStr for BoxLemma {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [BoxLemma::CrossTerms, BoxLemma::PowersOverInteraction]
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown box inequality '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxExponents {
    pub r1: f64,
    pub r2: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub rho1: f64,
    pub rho2: f64,
}

/// Exponents and constant of the cross-term bound: with
/// `P = 1+ρ1+κ2−θ1`, `p = P/(1+ρ1−θ1)`, `q = P/κ2`, it reads
/// `y^{θ2−1−ρ2}x^{κ2} + x^{θ1−1−ρ1}y^{κ1} ≥ p^{1/p}q^{1/q} y^{r2−ρ2−δ}`
/// for all `x, y > 0`, where `δ = (r2+1−θ2) − (1+ρ2+κ1−θ2)/q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossTermConstants {
    pub p: f64,
    pub q: f64,
    pub delta: f64,
    pub c: f64,
}

pub fn cross_term_constants(e: &BoxExponents) -> Result<CrossTermConstants> {
    let top = e.theta1.max(e.theta2);
    hypothesis(e.r2 > e.theta2 - 1.0, "needs r2 > theta2 - 1")?;
    hypothesis(
        e.rho1 > top && e.rho2 > top,
        "needs rho1, rho2 > max(theta1, theta2)",
    )?;
    let big_p = 1.0 + e.rho1 + e.kappa2 - e.theta1;
    let big_q = 1.0 + e.rho2 + e.kappa1 - e.theta2;
    hypothesis(
        (e.r2 + 1.0 - e.theta2) / e.kappa2 > big_q / big_p,
        "needs (r2+1-theta2)/kappa2 > (1+rho2+kappa1-theta2)/(1+rho1+kappa2-theta1)",
    )?;
    let p = big_p / (1.0 + e.rho1 - e.theta1);
    let q = big_p / e.kappa2;
    Ok(CrossTermConstants {
        p,
        q,
        delta: (e.r2 + 1.0 - e.theta2) - big_q / q,
        c: p.powf(1.0 / p) * q.powf(1.0 / q),
    })
}

/// For `PowersOverInteraction`, `coefficients` are `c1..c4`. For
/// `CrossTerms`, an optional single coefficient replaces the constant on the
/// right-hand side; the box is then the largest `c` with the bound holding
/// for `m = 1/c`.
pub fn find_box_constant(lemma: BoxLemma, e: &BoxExponents, coefficients: &[f64]) -> Result<IneqReport> {
    let mut rep = IneqReport::new(lemma.name());
    let grid = GridSpec::default();
    match lemma {
        BoxLemma::PowersOverInteraction => {
            hypothesis(
                e.theta1 - 1.0 < e.r1 && e.r1 < 0.0 && e.theta2 - 1.0 < e.r2 && e.r2 < 0.0,
                "needs theta_i - 1 < r_i < 0",
            )?;
            hypothesis(e.rho1 >= 1.0 && e.rho2 >= 1.0, "needs rho1, rho2 >= 1")?;
            let mid = (e.r1 + e.rho1) / (e.r2 + e.rho2);
            let lo = (e.r1 + 1.0 - e.theta1) / e.kappa1;
            let hi = e.kappa2 / (e.r2 + 1.0 - e.theta2);
            hypothesis(
                lo < mid && mid < hi,
                &format!("needs {lo} < (r1+rho1)/(r2+rho2) = {mid} < {hi}"),
            )?;
            let &[c1, c2, c3, c4] = coefficients else {
                return Err(Error::Precondition(format!(
                    "expected four coefficients, got {}",
                    coefficients.len()
                )));
            };
            precondition(
                coefficients.iter().all(|&t| t > 0.0 && t.is_finite()),
                "coefficients must be positive".to_string(),
            )?;
            let sides = |x: f64, y: f64| {
                (
                    c1 * x.powf(e.r1 + e.rho1) + c2 * y.powf(e.r2 + e.rho2),
                    c3 * x.powf(e.theta1 - 1.0 + e.rho1) * y.powf(e.kappa1)
                        + c4 * y.powf(e.theta2 - 1.0 + e.rho2) * x.powf(e.kappa2),
                )
            };
            let c = largest_box(|c| grid_worst(grid, c, &sides).0 >= -MARGIN_SLACK)?;
            let (m, x, y) = grid_worst(grid, c, &sides);
            rep.trials = grid.n * grid.n;
            rep.worst_margin = m;
            rep.witness = [("x".to_string(), x), ("y".to_string(), y)].into();
            rep.constant = Some(c);
        }
        BoxLemma::CrossTerms => {
            let k = cross_term_constants(e)?;
            rep.detail("p", k.p);
            rep.detail("q", k.q);
            rep.detail("delta", k.delta);
            rep.detail("proof_constant", k.c);
            let lhs = |x: f64, y: f64| {
                y.powf(e.theta2 - 1.0 - e.rho2) * x.powf(e.kappa2)
                    + x.powf(e.theta1 - 1.0 - e.rho1) * y.powf(e.kappa1)
            };
            // The pointwise form behind the lemma, over the whole cloud range.
            let wide = GridSpec {
                n: grid.n,
                lo_factor: CLOUD_LO / CLOUD_HI,
            };
            let global = |x: f64, y: f64| (lhs(x, y), k.c * y.powf(e.r2 - e.rho2 - k.delta));
            let (gm, gx, gy) = grid_worst(wide, CLOUD_HI, &global);
            rep.record(gm, &[("x", gx), ("y", gy)]);
            let target = match coefficients {
                [] => k.c,
                [t] if *t > 0.0 => *t,
                _ => {
                    return Err(Error::Precondition(
                        "cross-terms takes at most one positive coefficient".to_string(),
                    ))
                }
            };
            let boxed =
                |c: f64| move |x: f64, y: f64| (lhs(x, y), target * c.powf(-k.delta) * y.powf(e.r2 - e.rho2));
            let c = largest_box(|c| grid_worst(grid, c, &boxed(c)).0 >= -MARGIN_SLACK)?;
            let (m, x, y) = grid_worst(grid, c, &boxed(c));
            rep.trials = grid.n * grid.n * 2;
            if m < rep.worst_margin {
                rep.worst_margin = m;
                rep.witness = [("x".to_string(), x), ("y".to_string(), y)].into();
            }
            rep.constant = Some(c);
            rep.detail("rhs_constant", target);
        }
    }
    Ok(rep.finish())
}

// ---------------------------------------------------------------------------
// Weights in critical two-term comparisons

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaLemma {
    /// Symmetric critical case with equal exponents:
    /// `δ0 a1 y^s + a2 x^s ≥ δ0 b1 x^κ y^{1−θ} + b2 y^κ x^{1−θ}`, `s = 1+κ−θ`.
    SymmetricCritical,
    /// Interaction beats the damped boundary terms on the critical surface
    /// (extinction side, strict).
    CriticalExtinction,
    /// Interaction beats the boundary terms on the critical surface when the
    /// coefficient product is at least 1.
    CriticalSurvival,
}

impl DeltaLemma {
    pub fn name(self) -> &'static str {
        match self {
            DeltaLemma::SymmetricCritical => "symmetric-critical",
            DeltaLemma::CriticalExtinction => "critical-extinction",
            DeltaLemma::CriticalSurvival => "critical-survival",
        }
    }
}

impl FromStr for DeltaLemma {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            DeltaLemma::SymmetricCritical,
            DeltaLemma::CriticalExtinction,
            DeltaLemma::CriticalSurvival,
        ]
        .into_iter()
        .find(|v| v.name() == s)
        .ok_or_else(|| Error::Config(format!("unknown weight inequality '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaAux {
    /// Exponent of the first coordinate; the second is solved from the
    /// critical balance.
    pub rho1: f64,
    /// Outer exponent (critical-extinction only).
    pub rho: f64,
    /// Damping `ε0 ∈ (0,1)` (critical-extinction only).
    pub eps0: f64,
}

impl Default for DeltaAux {
    fn default() -> Self {
        DeltaAux {
            rho1: 2.0,
            rho: 0.1,
            eps0: 0.1,
        }
    }
}

/// Admissible interval for `δ0` and the two sides of the conclusion.
struct Sandwich {
    lower: f64,
    upper: f64,
    strict: bool,
    rho2: f64,
    sides: Box<dyn Fn(f64, f64, f64) -> (f64, f64)>,
}

fn sandwich(lemma: DeltaLemma, p: &ModelParams, aux: &DeltaAux) -> Result<Sandwich> {
    let dp = derive_exponents(p);
    let (r1, r2, b1, b2) = (dp.r1, dp.r2, dp.b1, dp.b2);
    let (a1, a2) = (p.a1, p.a2);
    let (t1, t2, k1, k2) = (p.theta1, p.theta2, p.kappa1, p.kappa2);
    let e1 = r1 + 1.0 - t1;
    let e2 = r2 + 1.0 - t2;
    hypothesis(e1 > 0.0 && e2 > 0.0, "needs r_i > theta_i - 1")?;
    hypothesis(
        near(e1 * e2, k1 * k2),
        "needs (r1+1-theta1)(r2+1-theta2) = kappa1 kappa2",
    )?;
    match lemma {
        DeltaLemma::SymmetricCritical => {
            hypothesis(p.b12 == 0.0 && p.b22 == 0.0, "needs b12 = b22 = 0")?;
            hypothesis(
                near(t1, t2) && near(k1, k2),
                "needs theta1 = theta2 and kappa1 = kappa2",
            )?;
            // Active drift and diffusion channels share one shifted exponent.
            let shifted: Vec<f64> = [
                (p.b10, p.r10 - 1.0),
                (p.b11, p.r11 - 2.0),
                (p.b20, p.r20 - 1.0),
                (p.b21, p.r21 - 2.0),
            ]
            .into_iter()
            .filter(|&(b, _)| b != 0.0)
            .map(|(_, r)| r)
            .collect();
            hypothesis(
                shifted.iter().all(|&r| near(r, shifted[0])),
                "needs r10-1 = r11-2 = r20-1 = r21-2 over active channels",
            )?;
            hypothesis(r1 < 0.0, "needs r < 0")?;
            let (t, k) = (t1, k1);
            let s = 1.0 + k - t;
            let pp = s / (1.0 - t);
            let q = s / k;
            let lower = b2.powf(q) / (a1 * a2.powf(q / pp));
            let upper = a1.powf(q / pp) * a2 / b1.powf(q);
            Ok(Sandwich {
                lower,
                upper,
                strict: false,
                rho2: f64::NAN,
                sides: Box::new(move |d, x, y| {
                    (
                        d * a1 * y.powf(s) + a2 * x.powf(s),
                        d * b1 * x.powf(k) * y.powf(1.0 - t) + b2 * y.powf(k) * x.powf(1.0 - t),
                    )
                }),
            })
        }
        DeltaLemma::CriticalSurvival => {
            let product = (a1 / b1).powf(1.0 / e1) * (a2 / b2).powf(1.0 / k2);
            hypothesis(
                product >= 1.0,
                "needs (a1/b1)^(1/(r1+1-theta1)) (a2/b2)^(1/kappa2) >= 1",
            )?;
            let rho1 = aux.rho1;
            let big_p = 1.0 + rho1 + k2 - t1;
            let rho2 = k1 * big_p / e1 - 1.0 - k1 + t2;
            let top = t1.max(t2);
            hypothesis(
                rho1 > top && rho2 > top,
                &format!("needs rho1, rho2 > max(theta1, theta2); solved rho2 = {rho2}"),
            )?;
            let big_q = 1.0 + rho2 + k1 - t2;
            let p1 = big_q / (1.0 + rho2 - t2);
            let q1 = big_q / k1;
            let p2 = big_p / k2;
            let q2 = big_p / (1.0 + rho1 - t1);
            let (a1r, a2r, b1r, b2r) = (a1 * rho1, a2 * rho2, b1 * rho1, b2 * rho2);
            let lower = b2r.powf(p2) / ((a1r * p2 / q1) * a2r.powf(p2 / q2));
            let upper = a1r.powf(q1 / p1) * (a2r * q1 / p2) / b1r.powf(q1);
            Ok(Sandwich {
                lower,
                upper,
                strict: false,
                rho2,
                sides: Box::new(move |d, x, y| {
                    (
                        a1r * d * x.powf(t1 - 1.0 - rho1) * y.powf(k1)
                            + a2r * x.powf(k2) * y.powf(t2 - 1.0 - rho2),
                        b1r * d * x.powf(r1 - rho1) + b2r * y.powf(r2 - rho2),
                    )
                }),
            })
        }
        DeltaLemma::CriticalExtinction => {
            hypothesis(r1 < 0.0 && r2 < 0.0, "needs r1, r2 < 0")?;
            let (rho1, rho, eps0) = (aux.rho1, aux.rho, aux.eps0);
            hypothesis(eps0 > 0.0 && eps0 < 1.0, "needs eps0 in (0,1)")?;
            let rho2 = k1 * (r1 + rho1) / e1 - r2;
            hypothesis(
                rho1 > 1.0 && rho2 > 1.0,
                &format!("needs rho1, rho2 > 1; solved rho2 = {rho2}"),
            )?;
            hypothesis(
                rho > 0.0 && rho < (1.0 / rho1).min(1.0 / rho2),
                "needs 0 < rho < min(1/rho1, 1/rho2)",
            )?;
            let damped =
                (a1 / ((1.0 - eps0) * b1)).powf(1.0 / e1) * (a2 / ((1.0 - eps0) * b2)).powf(1.0 / k2);
            hypothesis(damped < 1.0, "needs the eps0-damped coefficient product < 1")?;
            let bt1 = (1.0 - eps0) * (1.0 - rho1 * rho) * b1;
            let bt2 = (1.0 - eps0) * (1.0 - rho2 * rho) * b2;
            let tilde = (a1 / bt1).powf(1.0 / e1) * (a2 / bt2).powf(1.0 / k2);
            hypothesis(tilde < 1.0, "needs the fully damped coefficient product < 1")?;
            let p1 = (r1 + rho1) / (t1 - 1.0 + rho1);
            let q1 = (r2 + rho2) / k1;
            let p2 = (r1 + rho1) / k2;
            let q2 = (r2 + rho2) / (t2 - 1.0 + rho2);
            let (bb1, bb2, a1r, a2r) = (bt1 * rho1, bt2 * rho2, a1 * rho1, a2 * rho2);
            let lower = a2r.powf(p2) / (bb2.powf(p2 / q2) * bb1 * p2 / q1);
            let upper = bb1.powf(q1 / p1) * bb2 * q1 / p2 / a1r.powf(q1);
            Ok(Sandwich {
                lower,
                upper,
                strict: true,
                rho2,
                sides: Box::new(move |d, x, y| {
                    (
                        d * bb1 * x.powf(r1 + rho1) + bb2 * y.powf(r2 + rho2),
                        d * a1r * x.powf(t1 + rho1 - 1.0) * y.powf(k1)
                            + a2r * y.powf(t2 + rho2 - 1.0) * x.powf(k2),
                    )
                }),
            })
        }
    }
}

/// Computes the admissible `δ0` interval from the hypotheses, takes its
/// midpoint and checks the conclusion at `cloud` log-uniform points of
/// `[CLOUD_LO, CLOUD_HI]²`.
pub fn find_delta0<R: Rng + ?Sized>(
    lemma: DeltaLemma,
    p: &ModelParams,
    aux: &DeltaAux,
    cloud: usize,
    rng: &mut R,
) -> Result<IneqReport> {
    let p = p.validate()?;
    let sw = sandwich(lemma, &p, aux)?;
    let empty = if sw.strict {
        !(sw.lower < sw.upper)
    } else {
        !(sw.lower <= sw.upper * (1.0 + EQ_TOL))
    };
    if empty {
        return Err(Error::Hypothesis(format!(
            "empty interval for the weight: lower {} > upper {}",
            sw.lower, sw.upper
        )));
    }
    let d = 0.5 * (sw.lower + sw.upper);
    let mut rep = IneqReport::new(lemma.name());
    rep.constant = Some(d);
    rep.detail("lower", sw.lower);
    rep.detail("upper", sw.upper);
    if sw.rho2.is_finite() {
        rep.detail("rho2", sw.rho2);
    }
    for _ in 0..cloud {
        let x = log_uniform(rng, CLOUD_LO, CLOUD_HI);
        let y = log_uniform(rng, CLOUD_LO, CLOUD_HI);
        let (l, r) = (sw.sides)(d, x, y);
        rep.record(rel_margin(l, r), &[("x", x), ("y", y)]);
    }
    if sw.strict {
        rep.notes.push(
            "conclusion is strict; margins at round-off level are not distinguished from 0".to_string(),
        );
    }
    Ok(rep.finish())
}

/// Conclusion margin of `lemma` at one point for an arbitrary weight.
pub fn delta0_margin(
    lemma: DeltaLemma,
    p: &ModelParams,
    aux: &DeltaAux,
    d: f64,
    x: f64,
    y: f64,
) -> Result<f64> {
    let sw = sandwich(lemma, p, aux)?;
    let (l, r) = (sw.sides)(d, x, y);
    Ok(rel_margin(l, r))
}

// ---------------------------------------------------------------------------
// K(v,z) = −(v[(1+z)^{ρ1}−1]+1)^ρ + 1 + zvρρ1

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `ln(v[(1+z)^{ρ1}−1]+1)` without overflow.
fn ln_inner(v: f64, z: f64, rho1: f64) -> f64 {
    if v >= 1.0 {
        return rho1 * z.ln_1p();
    }
    let a = v.ln() + rho1 * z.ln_1p();
    let b = (1.0 - v).ln();
    a.max(b) + (-(a - b).abs()).exp().ln_1p()
}

pub fn kvz(v: f64, z: f64, rho1: f64, rho: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let lz = rho1 * z.ln_1p();
    // Small arguments go through expm1/ln_1p to keep the O(z²) remainder.
    let l = if lz < 40.0 {
        (v * lz.exp_m1()).ln_1p()
    } else {
        ln_inner(v, z, rho1)
    };
    -(rho * l).exp_m1() + z * v * rho * rho1
}

/// `∂²K/∂z²`.
pub fn kvz_zz(v: f64, z: f64, rho1: f64, rho: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let l = ln_inner(v, z, rho1);
    let lz = z.ln_1p();
    rho * (1.0 - rho) * rho1 * rho1 * v * v * ((2.0 * rho1 - 2.0) * lz + (rho - 2.0) * l).exp()
        - rho * rho1 * (rho1 - 1.0) * v * ((rho1 - 2.0) * lz + (rho - 1.0) * l).exp()
}

pub const KVZ_REL_TOL: f64 = 1e-9;

/// `∫_0^∞ K(v,z) μ(dz)`.
pub fn kvz_integral(m: &StableMeasure, rho1: f64, rho: f64, v: f64) -> Result<f64> {
    if v == 0.0 {
        return Ok(0.0);
    }
    m.integrate(
        |z| kvz(v, z, rho1, rho),
        |z| kvz_zz(v, z, rho1, rho),
        1.0,
        KVZ_REL_TOL,
    )
}

/// Exponent of `(1+z)` in the small-jump constant. The bound
/// `∫_0^1(1+zu)^{ρ1−2}(1−u)du ≤ (1+z)^{ρ1−2}` needs `ρ1 ≥ 2`; below that the
/// cruder `(1+z)^{ρ1−1}` is used.
pub fn small_jump_exponent(rho1: f64) -> f64 {
    if rho1 >= 2.0 {
        rho1 - 2.0
    } else {
        rho1 - 1.0
    }
}

/// The pair `(∫_0^δ z²(1+z)^e μ(dz), ∫_δ^∞ z² μ(dz) ∫_0^1 (1+uz)^{ρρ1−2} du)`
/// with `e = small_jump_exponent(ρ1)`.
pub fn split_constants(m: &StableMeasure, rho1: f64, rho: f64, delta: f64) -> Result<(f64, f64)> {
    precondition(
        delta > 0.0 && delta.is_finite(),
        format!("split point must be positive, got {delta}"),
    )?;
    let alpha = m.alpha;
    let tol = Tolerance::rel(1e-11);
    let e = small_jump_exponent(rho1);
    // z = δ s^k turns z^{1−α} dz into δ^{2−α}/(2−α) ds.
    let k = 1.0 / (2.0 - alpha);
    let near = integrate(|s: f64| (e * (delta * s.powf(k)).ln_1p()).exp(), 0.0, 1.0, tol)?;
    let d1 = m.c_norm * delta.powf(2.0 - alpha) / (2.0 - alpha) * near.value;
    // Inner integral in closed form; z = δ s^{−1/(α−1)} turns z^{−α} dz into δ^{1−α}/(α−1) ds.
    let a = rho * rho1 - 1.0;
    let inner = |z: f64| {
        if a == 0.0 {
            z.ln_1p()
        } else {
            ((a * z.ln_1p()).exp() - 1.0) / a
        }
    };
    let far = integrate(
        |s: f64| {
            let z = delta * s.powf(-1.0 / (alpha - 1.0));
            if z.is_finite() {
                inner(z)
            } else {
                -1.0 / a
            }
        },
        0.0,
        1.0,
        tol,
    )?;
    let d2 = m.c_norm * delta.powf(1.0 - alpha) / (alpha - 1.0) * far.value;
    Ok((d1, d2))
}

/// `∫_0^1 z² μ(dz) ∫_0^1 (1+zu)^{ρρ1−2}(1−u) du`.
fn near_curvature_constant(m: &StableMeasure, rho1: f64, rho: f64) -> Result<f64> {
    let gl = GaussLegendre::new(20);
    let k = 1.0 / (2.0 - m.alpha);
    let a = rho * rho1 - 2.0;
    let est = integrate(
        |s: f64| {
            let z = s.powf(k);
            gl.integrate(|u| (1.0 + z * u).powf(a) * (1.0 - u))
        },
        0.0,
        1.0,
        Tolerance::rel(1e-11),
    )?;
    Ok(m.c_norm * k * est.value)
}

/// `∫_0^∞ f(w) dw` for `f` integrable at both ends, via `w ↦ 1/w` on `[1,∞)`.
fn half_line(f: impl Fn(f64) -> f64) -> Result<f64> {
    let tol = Tolerance::rel(1e-10);
    let a = integrate(&f, 0.0, 1.0, tol)?;
    let b = integrate(
        |t: f64| if t == 0.0 { 0.0 } else { f(1.0 / t) / (t * t) },
        0.0,
        1.0,
        tol,
    )?;
    Ok(a.value + b.value)
}

/// Sign-determining bracket for small `v` when `ρ = ρ̃/ρ1`:
/// `ρ(1−ρ)ρ1² J1 − ρρ1(ρ1−1) J2` with `Jk = ∫ w^{1−α} H̄k(w) dw`,
/// `H̄1(w) = w^{2ρ1−2}(w^{ρ1}+1)^{ρ−2}`, `H̄2(w) = w^{ρ1−2}(w^{ρ1}+1)^{ρ−1}`.
/// Returns the bracket divided by the sum of its two terms.
///
/// Substituting `t = w^{ρ1}` turns both `Jk` into beta integrals with
/// `J1 = J2 (1−α/ρ1)/(1−ρ)`, so the normalized bracket is
/// `(1−α)/(2ρ1−α−1)`: negative for every `ρ1`. See
/// `large_exponent_bracket_closed`.
pub fn large_exponent_bracket(m: &StableMeasure, rho1: f64, rho_tilde: f64) -> Result<f64> {
    let rho = rho_tilde / rho1;
    let alpha = m.alpha;
    let lnh = |w: f64, a: f64, b: f64| {
        let t = w.ln();
        ((1.0 - alpha + a) * t + b * softplus(rho1 * t)).exp()
    };
    let j1 = half_line(|w| {
        if w == 0.0 {
            0.0
        } else {
            lnh(w, 2.0 * rho1 - 2.0, rho - 2.0)
        }
    })?;
    let j2 = half_line(|w| {
        if w == 0.0 {
            0.0
        } else {
            lnh(w, rho1 - 2.0, rho - 1.0)
        }
    })?;
    let t1 = rho * (1.0 - rho) * rho1 * rho1 * j1;
    let t2 = rho * rho1 * (rho1 - 1.0) * j2;
    Ok((t1 - t2) / (t1 + t2))
}

/// Closed form of `large_exponent_bracket`; it does not depend on `ρ̃`.
pub fn large_exponent_bracket_closed(alpha: f64, rho1: f64) -> f64 {
    (1.0 - alpha) / (2.0 * rho1 - alpha - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KvzMode {
    /// Large `ρ1` with `ρρ1 < 1` fixed. A finite linear constant can only close
    /// the bound near `v = 0` if the limiting bracket is positive; the report
    /// records the bracket and fails otherwise.
    LargeExponent,
    /// Any `ρ1 > 1`, `0 < ρρ1 < 1`, with jumps split at `delta`.
    Split { delta: f64 },
}

pub fn kvz_bounds_check(
    m: &StableMeasure,
    rho1: f64,
    rho: f64,
    v_grid: &[f64],
    mode: KvzMode,
) -> Result<IneqReport> {
    precondition(
        v_grid.iter().all(|&v| (0.0..=1.0).contains(&v)),
        "v values must lie in [0,1]".to_string(),
    )?;
    let rr = rho * rho1;
    precondition(
        rho1 > 1.0 && rr > 0.0 && rr < 1.0,
        format!("needs rho1 > 1 and 0 < rho*rho1 < 1, got {rho1}, {rho}"),
    )?;
    let lhs: Vec<f64> = v_grid
        .iter()
        .map(|&v| kvz_integral(m, rho1, rho, v))
        .collect::<Result<_>>()?;
    match mode {
        KvzMode::Split { delta } => {
            let mut rep = IneqReport::new("kvz-split");
            let c = m.c_rho(rr)?;
            let (d1, d2) = split_constants(m, rho1, rho, delta)?;
            rep.detail("delta", delta);
            rep.detail("d_small", d1);
            rep.detail("d_large", d2);
            rep.detail("c_rho", c);
            for (&v, &l) in v_grid.iter().zip(&lhs) {
                let rhs =
                    rr * (1.0 - rr) * c * v * v - rr * (rho1 - 1.0) * (v * (1.0 - v) * d1 + d2 * v.powf(rho));
                rep.record(rel_margin(l, rhs), &[("v", v), ("lhs", l), ("rhs", rhs)]);
            }
            Ok(rep.finish())
        }
        KvzMode::LargeExponent => {
            let mut rep = IneqReport::new("kvz-large-exponent");
            precondition(rho1 >= 2.0, format!("needs rho1 >= 2, got {rho1}"))?;
            let bracket = large_exponent_bracket(m, rho1, rr)?;
            rep.record(bracket, &[("rho1", rho1)]);
            let d1 = near_curvature_constant(m, rho1, rho)?;
            let quad = rho * (1.0 - rho) * rho1 * rho1;
            let lin = rho * rho1 * (rho1 - 1.0);
            // Smallest linear constant making the bound hold at every grid v.
            let d_lin = v_grid
                .iter()
                .zip(&lhs)
                .filter(|(&v, _)| v > 0.0)
                .map(|(&v, &l)| (quad * v * v * d1 - l) / (lin * v))
                .fold(0.0, f64::max);
            rep.detail("bracket", bracket);
            rep.detail("d_quadratic", d1);
            rep.detail("d_linear", d_lin);
            // The linear constant needed below the grid.
            if let Some(v0) = v_grid.iter().copied().filter(|&v| v > 0.0).reduce(f64::min) {
                let v = v0 * 1e-4;
                let l = kvz_integral(m, rho1, rho, v)?;
                rep.detail("probe_v", v);
                rep.detail("d_linear_at_probe", (quad * v * v * d1 - l) / (lin * v));
            }
            rep.constant = Some(d_lin);
            for (&v, &l) in v_grid.iter().zip(&lhs) {
                let rhs = quad * v * v * d1 - lin * v * d_lin;
                rep.record(rel_margin(l, rhs), &[("v", v), ("lhs", l), ("rhs", rhs)]);
            }
            if !(bracket > 0.0) {
                rep.satisfied = false;
                rep.notes.push(format!(
                    "limiting bracket is {bracket:.6} at rho1 = {rho1}: the integral of K behaves like \
                     -C v^(alpha/rho1) as v -> 0, so no finite linear constant closes the bound near v = 0"
                ));
            }
            Ok(rep.finish())
        }
    }
}

/// Runs the large-exponent check for `ρ1 ∈ LARGE_EXPONENT_SCAN` with
/// `ρ = ρ̃/ρ1` and reports the smallest passing `ρ1`.
pub fn large_exponent_scan(m: &StableMeasure, rho_tilde: f64, v_grid: &[f64]) -> Result<IneqReport> {
    let mut rep = IneqReport::new("kvz-large-exponent-scan");
    for rho1 in LARGE_EXPONENT_SCAN {
        let r = kvz_bounds_check(m, rho1, rho_tilde / rho1, v_grid, KvzMode::LargeExponent)?;
        rep.detail(&format!("bracket_{rho1}"), r.details["bracket"]);
        if r.satisfied && rep.constant.is_none() {
            rep.constant = Some(rho1);
            rep.worst_margin = r.worst_margin;
            rep.witness = r.witness;
        }
        rep.trials += r.trials;
    }
    if rep.constant.is_none() {
        rep.satisfied = false;
        rep.notes.push("no exponent in the scan passed".to_string());
    } else {
        rep.notes
            .push("the smallest passing exponent of a finite scan, not the true threshold".to_string());
    }
    Ok(rep.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::path_rng;

    #[test]
    fn young_examples() {
        let [(l, r), _] = young_sides(4.0, 9.0, 2.0);
        assert_eq!(l, 13.0);
        assert!((r - 12.0).abs() < 1e-14);
        let mut rng = path_rng(1, 0);
        let inputs = YoungInputs {
            p: Some(0.5),
            ..Default::default()
        };
        let rep = young_check(YoungVariant::Subadditive, &inputs, 10, &mut rng).unwrap();
        assert!(rep.satisfied);
        let bad = YoungInputs {
            p: Some(1.5),
            ..Default::default()
        };
        assert!(young_check(YoungVariant::Subadditive, &bad, 10, &mut rng).is_err());
    }

    #[test]
    fn local_domination_box() {
        let inputs = YoungInputs {
            p: None,
            exponents: Some([1.0, 1.0, 0.75, 0.75]),
            coefficients: Some([1.0, 1.0, 1.0]),
        };
        let rep = young_check(YoungVariant::LocalDomination, &inputs, 1000, &mut path_rng(2, 0)).unwrap();
        assert!(rep.satisfied, "{rep:?}");
        let c = rep.constant.unwrap();
        assert!(c > 0.0 && c <= 1.0);
        // x = y = t: 2t ≥ t^{1.5} holds for t ≤ 4, so the unit box passes.
        assert_eq!(c, 1.0);
        let tight = YoungInputs {
            coefficients: Some([1.0, 1.0, 50.0]),
            ..inputs
        };
        let rep = young_check(YoungVariant::LocalDomination, &tight, 100, &mut path_rng(2, 1)).unwrap();
        let c = rep.constant.unwrap();
        // 2t ≥ 50 t^{1.5} ⇔ t ≤ 1/625 on the diagonal.
        assert!(c < 1.0 / 625.0 * 1.01, "{c}");
        assert!(rep.satisfied);
    }

    fn box_exponents(kappa: f64) -> BoxExponents {
        BoxExponents {
            r1: -0.3,
            r2: -0.3,
            theta1: 0.0,
            theta2: 0.0,
            kappa1: kappa,
            kappa2: kappa,
            rho1: 2.0,
            rho2: 2.0,
        }
    }

    #[test]
    fn powers_over_interaction() {
        let e = box_exponents(0.8);
        let rep = find_box_constant(BoxLemma::PowersOverInteraction, &e, &[1.0; 4]).unwrap();
        assert!(rep.satisfied);
        let c = rep.constant.unwrap();
        assert!(c > 0.0);
        let weaker = find_box_constant(BoxLemma::PowersOverInteraction, &e, &[1.0, 1.0, 0.1, 0.1]).unwrap();
        assert!(weaker.constant.unwrap() >= c);
        let err = find_box_constant(BoxLemma::PowersOverInteraction, &box_exponents(0.5), &[1.0; 4]);
        assert!(matches!(err, Err(Error::Hypothesis(_))));
    }

    #[test]
    fn cross_terms() {
        let e = BoxExponents {
            kappa1: 0.5,
            kappa2: 0.5,
            ..box_exponents(0.5)
        };
        let k = cross_term_constants(&e).unwrap();
        assert!(k.delta > 0.0 && k.p > 1.0 && k.q > 1.0);
        assert!((1.0 / k.p + 1.0 / k.q - 1.0).abs() < 1e-15);
        let rep = find_box_constant(BoxLemma::CrossTerms, &e, &[]).unwrap();
        assert!(rep.satisfied, "{rep:?}");
        assert_eq!(rep.constant, Some(1.0));
    }

    fn critical_symmetric() -> ModelParams {
        // θ = 0, κ = 0.5, r = κ + θ − 1 = −0.5 through drift and diffusion.
        ModelParams {
            a1: 1.0,
            a2: 1.0,
            theta1: 0.0,
            theta2: 0.0,
            kappa1: 0.5,
            kappa2: 0.5,
            b10: 0.5,
            b11: 0.5,
            b12: 0.0,
            b20: 0.5,
            b21: 0.5,
            b22: 0.0,
            r10: 0.5,
            r11: 1.5,
            r12: 0.0,
            r20: 0.5,
            r21: 1.5,
            r22: 0.0,
            alpha1: 1.5,
            alpha2: 1.5,
        }
    }

    #[test]
    fn symmetric_critical_weight() {
        let p = critical_symmetric();
        let rep = find_delta0(
            DeltaLemma::SymmetricCritical,
            &p,
            &DeltaAux::default(),
            2000,
            &mut path_rng(3, 0),
        )
        .unwrap();
        assert!(rep.satisfied, "{rep:?}");
        // a1a2 = b1b2: the interval is the single point 1, and any other
        // weight fails next to the diagonal.
        assert!((rep.constant.unwrap() - 1.0).abs() < 1e-12);
        let aux = DeltaAux::default();
        for d in [0.9, 1.1] {
            let m = [0.98, 1.02]
                .iter()
                .map(|&t| delta0_margin(DeltaLemma::SymmetricCritical, &p, &aux, d, 1.0, t).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(m < 0.0, "{d}");
        }
        let mut q = p;
        q.a1 = 0.5;
        let err = find_delta0(
            DeltaLemma::SymmetricCritical,
            &q,
            &DeltaAux::default(),
            10,
            &mut path_rng(3, 0),
        );
        assert!(matches!(err, Err(Error::Hypothesis(_))));
    }

    #[test]
    fn critical_survival_weight() {
        let mut p = critical_symmetric();
        p.a1 = 2.0;
        let rep = find_delta0(
            DeltaLemma::CriticalSurvival,
            &p,
            &DeltaAux::default(),
            2000,
            &mut path_rng(4, 0),
        )
        .unwrap();
        assert!(rep.satisfied, "{rep:?}");
    }

    #[test]
    fn critical_extinction_weight() {
        let mut p = critical_symmetric();
        (p.a1, p.a2) = (0.2, 0.2);
        let aux = DeltaAux {
            rho1: 2.0,
            rho: 0.1,
            eps0: 0.1,
        };
        let rep = find_delta0(
            DeltaLemma::CriticalExtinction,
            &p,
            &aux,
            2000,
            &mut path_rng(5, 0),
        )
        .unwrap();
        assert!(rep.satisfied, "{rep:?}");
        let mut q = p;
        (q.a1, q.a2) = (2.0, 2.0);
        assert!(find_delta0(DeltaLemma::CriticalExtinction, &q, &aux, 10, &mut path_rng(5, 0)).is_err());
    }

    #[test]
    fn kvz_basics() {
        assert_eq!(kvz(0.0, 3.0, 2.0, 0.25), 0.0);
        // Second derivative against central differences.
        for &(v, z) in &[(0.3, 0.2), (0.9, 1.5), (0.05, 4.0)] {
            let h = 1e-4;
            let fd =
                (kvz(v, z + h, 2.0, 0.25) - 2.0 * kvz(v, z, 2.0, 0.25) + kvz(v, z - h, 2.0, 0.25)) / (h * h);
            let exact = kvz_zz(v, z, 2.0, 0.25);
            assert!(
                (fd - exact).abs() < 1e-5 * exact.abs().max(1.0),
                "{v} {z}: {fd} {exact}"
            );
        }
        assert!(kvz(0.5, 1e300, 32.0, 0.01).is_finite());
    }

    #[test]
    fn split_constants_by_direct_quadrature() {
        let m = StableMeasure::new(1.5).unwrap();
        let (d1, d2) = split_constants(&m, 2.0, 0.25, 1.0).unwrap();
        // ρ1 = 2: ∫_0^1 z² μ(dz) = c/(2−α).
        assert!((d1 - m.c_norm / 0.5).abs() < 1e-10 * d1);
        let direct = integrate(
            |z: f64| m.density(z) * z * z * (((1.0 + z).powf(-0.5) - 1.0) / (-0.5 * z)),
            1.0,
            1e6,
            Tolerance::rel(1e-11),
        )
        .unwrap()
        .value;
        // Tail beyond 1e6 behaves like 2c z^{−α}.
        let tail = 2.0 * m.c_norm * 1e6f64.powf(-0.5) / 0.5;
        assert!(
            (d2 - direct - tail).abs() < 1e-3 * d2,
            "{d2} vs {}",
            direct + tail
        );
    }

    #[test]
    fn kvz_integral_by_direct_quadrature() {
        let m = StableMeasure::new(1.5).unwrap();
        for &(rho1, rho, v) in &[(2.0, 0.25, 0.5), (8.0, 0.0625, 0.01), (4.0, 0.1, 0.9)] {
            let a = kvz_integral(&m, rho1, rho, v).unwrap();
            // z = s^{-2} maps (0,∞) onto (0,∞); split at s = 1 and fold both halves to (0,1].
            let f = |z: f64| {
                if !z.is_finite() {
                    0.0
                } else {
                    kvz(v, z, rho1, rho) * m.density(z)
                }
            };
            // Below z0 only the quadratic Taylor term of K matters.
            let z0: f64 = 1e-6;
            let k2 = rho * (1.0 - rho) * rho1 * rho1 * v * v - rho * rho1 * (rho1 - 1.0) * v;
            let head = m.c_norm * 0.5 * k2 * z0.powf(0.5) / 0.5;
            let tol = Tolerance::rel(1e-9);
            let near = head
                + integrate(|s: f64| f(s * s) * 2.0 * s, z0.sqrt(), 1.0, tol)
                    .unwrap()
                    .value;
            let far = integrate(
                |t: f64| {
                    if t == 0.0 {
                        0.0
                    } else {
                        f(1.0 / (t * t)) * 2.0 / (t * t * t)
                    }
                },
                0.0,
                1.0,
                tol,
            )
            .unwrap()
            .value;
            assert!(
                (a - near - far).abs() < 1e-6 * a.abs(),
                "{rho1} {v}: {a} vs {}",
                near + far
            );
        }
    }

    #[test]
    fn large_exponent_bracket_matches_beta_identity() {
        let m = StableMeasure::new(1.5).unwrap();
        for rho1 in LARGE_EXPONENT_SCAN {
            for rt in [0.3, 0.5, 0.9] {
                let q = large_exponent_bracket(&m, rho1, rt).unwrap();
                let c = large_exponent_bracket_closed(1.5, rho1);
                assert!((q - c).abs() < 1e-8 * c.abs(), "{rho1} {rt}: {q} vs {c}");
            }
        }
        let grid: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        let rep = large_exponent_scan(&m, 0.5, &grid).unwrap();
        assert!(!rep.satisfied);
        assert!(rep.constant.is_none());
    }

    #[test]
    fn kvz_split_bound_example() {
        let m = StableMeasure::new(1.5).unwrap();
        let rep = kvz_bounds_check(&m, 2.0, 0.25, &[0.0, 0.5], KvzMode::Split { delta: 1.0 }).unwrap();
        assert!(rep.satisfied, "{rep:?}");
    }
}
