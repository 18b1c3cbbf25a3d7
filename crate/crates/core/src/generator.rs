//! The generator of the two-type system applied to Lyapunov test functions,
//! by closed forms where they exist and by quadrature otherwise, and grid
//! certification of the drift inequalities `𝓛g ≤ Cg` and `𝓛g ≥ dg`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derive_exponents, ModelParams};
use crate::quadrature::Tolerance;
use crate::stablejump::StableMeasure;

/// Relative tolerance used for generator K-integrals.
pub const K_REL_TOL: f64 = 1e-7;

/// Candidate test functions. Families built as `−ĥ^ρ` take values in
/// `(−∞, 0]` and are turned into nonnegative functions by `ShiftedCap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TestFunction {
    /// `x^{-ρ1} + y^{-ρ2}`.
    PowerInverse { rho1: f64, rho2: f64 },
    /// `δ0 x^{-ρ1} + y^{-ρ2}`.
    PowerInverseWeighted { delta0: f64, rho1: f64, rho2: f64 },
    /// `(δ0+1) ln n − δ0 ln x − ln y`, defined on `(0,n)²` only.
    LogType { delta0: f64, n: f64 },
    /// `v − x^ρ − y`.
    LinearCap { v: f64, rho: f64 },
    /// `−(δ0 x^{ρ1} + y^{ρ2})^ρ`.
    NegPowerSum {
        rho1: f64,
        rho2: f64,
        rho: f64,
        delta0: f64,
    },
    /// `−(x^{ρ1} + h̃(y))^ρ`.
    SmoothedY { rho1: f64, rho: f64, eps: f64 },
    /// `−((x + y^δ)^{ρ1} + h̃(y))^ρ`.
    SmoothedXY {
        rho1: f64,
        rho: f64,
        eps: f64,
        delta: f64,
    },
    /// `−(ĥ1(x) + ĥ2(y))^ρ` where `ĥi(s) = s^{1−θi}` for `θi > 0` and `h̃(s)` for `θi = 0`.
    ThetaFamily {
        theta1: f64,
        theta2: f64,
        rho: f64,
        eps: f64,
    },
    /// `min(|h(c,0)|, |h(0,c)|) + h(x,y)`.
    ShiftedCap { c: f64, inner: Box<TestFunction> },
    /// `constant + Σ weight·term`.
    Combination {
        constant: f64,
        terms: Vec<(f64, TestFunction)>,
    },
}

/// Value and the partials the generator needs (it has no mixed term).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Eval {
    pub g: f64,
    pub gx: f64,
    pub gy: f64,
    pub gxx: f64,
    pub gyy: f64,
}

/// `h̃(y) = y − y^{1+ε}(1+y)^{-ε}/(1+ε)` with its first two derivatives.
pub fn htilde(y: f64, eps: f64) -> (f64, f64, f64) {
    if y == 0.0 {
        return (0.0, 1.0, f64::NEG_INFINITY);
    }
    let r = y / (1.0 + y);
    let re = r.powf(eps);
    let value = y - y * re / (1.0 + eps);
    let d1 = 1.0 - re + eps / (1.0 + eps) * r * re;
    let d2 = -eps * re / (y * (1.0 + y) * (1.0 + y));
    (value, d1, d2)
}

/// Largest `c0 = 2^{-k}` such that on a log grid of `(0, 2c0]`
/// `h̃ ≥ y/2`, `h̃' ∈ [1/2, 1]` and `−h̃'' ≥ (ε/2) y^{ε−1}`.
pub fn htilde_radius(eps: f64) -> Option<f64> {
    let holds = |y: f64| {
        let (h, d1, d2) = htilde(y, eps);
        h >= 0.5 * y && (0.5..=1.0).contains(&d1) && -d2 >= 0.5 * eps * y.powf(eps - 1.0)
    };
    (0..60)
        .map(|k| 2f64.powi(-k))
        .find(|&c0| (0..400).all(|i| holds(2.0 * c0 * 10f64.powf(-12.0 * i as f64 / 399.0))))
}

/// Composition `h = −ĥ^ρ` from the parts of `ĥ`.
fn neg_power_of(hat: Eval, rho: f64) -> Eval {
    let p1 = hat.g.powf(rho - 1.0);
    let p2 = hat.g.powf(rho - 2.0);
    Eval {
        g: -hat.g.powf(rho),
        gx: -rho * p1 * hat.gx,
        gy: -rho * p1 * hat.gy,
        gxx: -rho * (rho - 1.0) * p2 * hat.gx * hat.gx - rho * p1 * hat.gxx,
        gyy: -rho * (rho - 1.0) * p2 * hat.gy * hat.gy - rho * p1 * hat.gyy,
    }
}

/// `(s^e, e s^{e−1}, e(e−1) s^{e−2})`.
fn power_parts(s: f64, e: f64) -> (f64, f64, f64) {
    (s.powf(e), e * s.powf(e - 1.0), e * (e - 1.0) * s.powf(e - 2.0))
}

fn theta_part(s: f64, theta: f64, eps: f64) -> (f64, f64, f64) {
    if theta > 0.0 {
        power_parts(s, 1.0 - theta)
    } else {
        htilde(s, eps)
    }
}

fn domain<T>(msg: String) -> Result<T> {
    Err(Error::Domain(msg))
}

fn in_open_unit(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

impl TestFunction {
    pub fn validate(&self) -> Result<()> {
        use TestFunction::*;
        let ok = match self {
            PowerInverse { rho1, rho2 } => *rho1 > 0.0 && *rho2 > 0.0,
            PowerInverseWeighted { delta0, rho1, rho2 } => *delta0 > 0.0 && *rho1 > 0.0 && *rho2 > 0.0,
            LogType { delta0, n } => *delta0 > 0.0 && *n > 0.0,
            LinearCap { v, rho } => *v > 0.0 && in_open_unit(*rho),
            NegPowerSum {
                rho1,
                rho2,
                rho,
                delta0,
            } => *rho1 >= 1.0 && *rho2 >= 1.0 && in_open_unit(*rho) && *delta0 > 0.0,
            SmoothedY { rho1, rho, eps } => *rho1 > 1.0 && in_open_unit(*rho) && in_open_unit(*eps),
            SmoothedXY {
                rho1,
                rho,
                eps,
                delta,
            } => in_open_unit(*rho1) && in_open_unit(*rho) && in_open_unit(*eps) && *delta > 1.0,
            ThetaFamily {
                theta1,
                theta2,
                rho,
                eps,
            } => {
                (0.0..1.0).contains(theta1)
                    && (0.0..1.0).contains(theta2)
                    && in_open_unit(*rho)
                    && in_open_unit(*eps)
            }
            ShiftedCap { c, inner } => {
                inner.validate()?;
                *c > 0.0
            }
            Combination { constant, terms } => {
                for (_, t) in terms {
                    t.validate()?;
                }
                constant.is_finite() && terms.iter().all(|(w, _)| w.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            domain(format!("invalid test-function parameters: {self:?}"))
        }
    }

    /// Value and partials at an interior point.
    pub fn eval(&self, x: f64, y: f64) -> Result<Eval> {
        if !(x > 0.0 && y > 0.0) {
            return domain(format!("test functions are evaluated on (0,∞)², got ({x}, {y})"));
        }
        self.eval_closure(x, y)
    }

    /// Value on the closed quadrant, using the continuous extension to the axes
    /// where one exists.
    pub fn value_at(&self, x: f64, y: f64) -> Result<f64> {
        if !(x >= 0.0 && y >= 0.0) {
            return domain(format!("negative argument ({x}, {y})"));
        }
        let v = self.eval_closure(x, y)?.g;
        if v.is_finite() {
            Ok(v)
        } else {
            domain(format!("{self:?} is unbounded at ({x}, {y})"))
        }
    }

    fn eval_closure(&self, x: f64, y: f64) -> Result<Eval> {
        use TestFunction::*;
        Ok(match self {
            PowerInverse { rho1, rho2 } => {
                let (a, ax, axx) = power_parts(x, -rho1);
                let (b, by, byy) = power_parts(y, -rho2);
                Eval {
                    g: a + b,
                    gx: ax,
                    gy: by,
                    gxx: axx,
                    gyy: byy,
                }
            }
            PowerInverseWeighted { delta0, rho1, rho2 } => {
                let (a, ax, axx) = power_parts(x, -rho1);
                let (b, by, byy) = power_parts(y, -rho2);
                Eval {
                    g: delta0 * a + b,
                    gx: delta0 * ax,
                    gy: by,
                    gxx: delta0 * axx,
                    gyy: byy,
                }
            }
            LogType { delta0, n } => {
                if !(x > 0.0 && x < *n && y > 0.0 && y < *n) {
                    return domain(format!("LogType is defined on (0,{n})², got ({x}, {y})"));
                }
                Eval {
                    g: (delta0 + 1.0) * n.ln() - delta0 * x.ln() - y.ln(),
                    gx: -delta0 / x,
                    gy: -1.0 / y,
                    gxx: delta0 / (x * x),
                    gyy: 1.0 / (y * y),
                }
            }
            LinearCap { v, rho } => {
                let (a, ax, axx) = power_parts(x, *rho);
                Eval {
                    g: v - a - y,
                    gx: -ax,
                    gy: -1.0,
                    gxx: -axx,
                    gyy: 0.0,
                }
            }
            NegPowerSum {
                rho1,
                rho2,
                rho,
                delta0,
            } => {
                let (a, ax, axx) = power_parts(x, *rho1);
                let (b, by, byy) = power_parts(y, *rho2);
                let hat = Eval {
                    g: delta0 * a + b,
                    gx: delta0 * ax,
                    gy: by,
                    gxx: delta0 * axx,
                    gyy: byy,
                };
                neg_power_of(hat, *rho)
            }
            SmoothedY { rho1, rho, eps } => {
                let (a, ax, axx) = power_parts(x, *rho1);
                let (b, by, byy) = htilde(y, *eps);
                let hat = Eval {
                    g: a + b,
                    gx: ax,
                    gy: by,
                    gxx: axx,
                    gyy: byy,
                };
                neg_power_of(hat, *rho)
            }
            SmoothedXY {
                rho1,
                rho,
                eps,
                delta,
            } => {
                let (w, wy, wyy) = power_parts(y, *delta);
                let (a, a1, a2) = power_parts(x + w, *rho1);
                let (b, by, byy) = htilde(y, *eps);
                let hat = Eval {
                    g: a + b,
                    gx: a1,
                    gy: a1 * wy + by,
                    gxx: a2,
                    gyy: a2 * wy * wy + a1 * wyy + byy,
                };
                neg_power_of(hat, *rho)
            }
            ThetaFamily {
                theta1,
                theta2,
                rho,
                eps,
            } => {
                let (a, ax, axx) = theta_part(x, *theta1, *eps);
                let (b, by, byy) = theta_part(y, *theta2, *eps);
                let hat = Eval {
                    g: a + b,
                    gx: ax,
                    gy: by,
                    gxx: axx,
                    gyy: byy,
                };
                neg_power_of(hat, *rho)
            }
            ShiftedCap { c, inner } => {
                let shift = inner.value_at(*c, 0.0)?.abs().min(inner.value_at(0.0, *c)?.abs());
                let mut e = inner.eval_closure(x, y)?;
                e.g += shift;
                e
            }
            Combination { constant, terms } => {
                let mut e = Eval {
                    g: *constant,
                    ..Eval::default()
                };
                for (w, t) in terms {
                    let t = t.eval_closure(x, y)?;
                    e.g += w * t.g;
                    e.gx += w * t.gx;
                    e.gy += w * t.gy;
                    e.gxx += w * t.gxx;
                    e.gyy += w * t.gyy;
                }
                e
            }
        })
    }

    /// Exponent `β` with `|g| = O(s^β)` as the given coordinate `s → ∞`.
    pub fn growth(&self, coord: usize) -> f64 {
        use TestFunction::*;
        let pick = |a: f64, b: f64| if coord == 1 { a } else { b };
        match self {
            PowerInverse { .. } | PowerInverseWeighted { .. } => 0.0,
            LogType { .. } => 0.0,
            LinearCap { rho, .. } => pick(*rho, 1.0),
            NegPowerSum { rho1, rho2, rho, .. } => pick(rho * rho1, rho * rho2),
            SmoothedY { rho1, rho, .. } => pick(rho * rho1, *rho),
            SmoothedXY { rho1, rho, delta, .. } => pick(rho * rho1, (rho * rho1 * delta).max(*rho)),
            ThetaFamily {
                theta1, theta2, rho, ..
            } => pick(rho * (1.0 - theta1), rho * (1.0 - theta2)),
            ShiftedCap { inner, .. } => inner.growth(coord),
            Combination { terms, .. } => terms.iter().map(|(_, t)| t.growth(coord)).fold(0.0, f64::max),
        }
    }

    /// The same function with the coordinates exchanged, when the family is
    /// closed under that exchange.
    pub fn swapped(&self) -> Option<TestFunction> {
        use TestFunction::*;
        Some(match self {
            PowerInverse { rho1, rho2 } => PowerInverse {
                rho1: *rho2,
                rho2: *rho1,
            },
            NegPowerSum {
                rho1,
                rho2,
                rho,
                delta0,
            } if *delta0 == 1.0 => NegPowerSum {
                rho1: *rho2,
                rho2: *rho1,
                rho: *rho,
                delta0: 1.0,
            },
            ThetaFamily {
                theta1,
                theta2,
                rho,
                eps,
            } => ThetaFamily {
                theta1: *theta2,
                theta2: *theta1,
                rho: *rho,
                eps: *eps,
            },
            ShiftedCap { c, inner } => ShiftedCap {
                c: *c,
                inner: Box::new(inner.swapped()?),
            },
            Combination { constant, terms } => Combination {
                constant: *constant,
                terms: terms
                    .iter()
                    .map(|(w, t)| t.swapped().map(|t| (*w, t)))
                    .collect::<Option<Vec<_>>>()?,
            },
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerSign {
    /// `g(x) = x^{-ρ}`.
    NegPower,
    /// `g(x) = x^{ρ}`.
    PosPower,
}

/// `∫ [g(x+z) − g(x) − g'(x) z] μ(dz)` for a pure power `g`.
pub fn k_integral_closed_power(m: &StableMeasure, rho: f64, x: f64, sign: PowerSign) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("x must be positive, got {x}"));
    }
    match sign {
        PowerSign::NegPower => {
            if !(rho > 0.0) {
                return domain(format!("negative power needs rho > 0, got {rho}"));
            }
            Ok(m.c_rho(-rho)? * rho * (rho + 1.0) * x.powf(-m.alpha - rho))
        }
        PowerSign::PosPower => {
            if !(rho > 0.0 && rho < m.alpha) || rho == 1.0 {
                return domain(format!(
                    "positive power needs 0 < rho < {} and rho != 1, got {rho}",
                    m.alpha
                ));
            }
            Ok(rho * (rho - 1.0) * m.c_rho(rho)? * x.powf(rho - m.alpha))
        }
    }
}

/// `∫ K_z g μ(dz)` in the given coordinate by quadrature. The integral is
/// computed at unit scale, `∫K_z g μ(dz) = s^{-α} ∫[g(s+sw) − g(s) − g'(s)sw] μ(dw)`
/// with `s` the coordinate value.
pub fn k_integral_numeric(tf: &TestFunction, x: f64, y: f64, coord: usize, m: &StableMeasure) -> Result<f64> {
    k_integral_numeric_tol(tf, x, y, coord, m, K_REL_TOL)
}

pub fn k_integral_numeric_tol(
    tf: &TestFunction,
    x: f64,
    y: f64,
    coord: usize,
    m: &StableMeasure,
    rel: f64,
) -> Result<f64> {
    if let TestFunction::LogType { n, .. } = tf {
        return domain(format!(
            "LogType is only defined on (0,{n})²; jumps leave the box"
        ));
    }
    let base = tf.eval(x, y)?;
    let s = if coord == 1 { x } else { y };
    let slope = if coord == 1 { base.gx } else { base.gy };
    let at = |w: f64| {
        if coord == 1 {
            (x + x * w, y)
        } else {
            (x, y + y * w)
        }
    };
    let value = |w: f64| -> f64 {
        let (px, py) = at(w);
        match tf.eval(px, py) {
            Ok(e) => e.g - base.g - slope * s * w,
            Err(_) => f64::NAN,
        }
    };
    let second = |w: f64| -> f64 {
        let (px, py) = at(w);
        match tf.eval(px, py) {
            Ok(e) => s * s * if coord == 1 { e.gxx } else { e.gyy },
            Err(_) => f64::NAN,
        }
    };
    // Cancellation leaves noise of order ulp(|g| + |s·slope|) when K vanishes.
    let tol = Tolerance {
        abs: 64.0 * f64::EPSILON * (base.g.abs() + (s * slope).abs()),
        ..Tolerance::rel(rel)
    };
    let scaled = m.integrate_tol(value, second, tf.growth(coord), tol)?;
    Ok(s.powf(-m.alpha) * scaled)
}

/// Closed-form K-integral for families built from pure powers.
pub fn k_integral_closed(tf: &TestFunction, x: f64, y: f64, coord: usize, m: &StableMeasure) -> Result<f64> {
    use PowerSign::*;
    use TestFunction::*;
    let s = if coord == 1 { x } else { y };
    // K annihilates affine functions; x^1 contributes nothing.
    let pos = |rho: f64| {
        if rho == 1.0 {
            Ok(0.0)
        } else {
            k_integral_closed_power(m, rho, s, PosPower)
        }
    };
    match tf {
        PowerInverse { rho1, rho2 } => {
            k_integral_closed_power(m, if coord == 1 { *rho1 } else { *rho2 }, s, NegPower)
        }
        PowerInverseWeighted { delta0, rho1, rho2 } => {
            if coord == 1 {
                Ok(delta0 * k_integral_closed_power(m, *rho1, s, NegPower)?)
            } else {
                k_integral_closed_power(m, *rho2, s, NegPower)
            }
        }
        LogType { n, .. } => domain(format!(
            "LogType is only defined on (0,{n})²; jumps leave the box"
        )),
        LinearCap { rho, .. } => {
            if coord == 1 {
                Ok(-pos(*rho)?)
            } else {
                Ok(0.0)
            }
        }
        NegPowerSum {
            rho1,
            rho2,
            rho,
            delta0,
        } if *rho == 1.0 => {
            if coord == 1 {
                Ok(-delta0 * pos(*rho1)?)
            } else {
                Ok(-pos(*rho2)?)
            }
        }
        ShiftedCap { inner, .. } => k_integral_closed(inner, x, y, coord, m),
        Combination { terms, .. } => {
            let mut total = 0.0;
            for (w, t) in terms {
                total += w * k_integral_closed(t, x, y, coord, m)?;
            }
            Ok(total)
        }
        _ => domain(format!("no closed-form jump term for {tf:?}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Closed,
    Numeric,
}

/// The generator split into its eight contributions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GeneratorTerms {
    pub interaction_x: f64,
    pub interaction_y: f64,
    pub drift_x: f64,
    pub drift_y: f64,
    pub diffusion_x: f64,
    pub diffusion_y: f64,
    pub jump_x: f64,
    pub jump_y: f64,
}

impl GeneratorTerms {
    pub fn total(&self) -> f64 {
        self.interaction_x
            + self.interaction_y
            + self.drift_x
            + self.drift_y
            + self.diffusion_x
            + self.diffusion_y
            + self.jump_x
            + self.jump_y
    }
}

/// Jump measures for both coordinates, built once per parameter set.
#[derive(Debug, Clone)]
pub struct Measures {
    pub m1: StableMeasure,
    pub m2: StableMeasure,
}

impl Measures {
    pub fn new(p: &ModelParams) -> Result<Self> {
        Ok(Measures {
            m1: StableMeasure::new(p.alpha1)?,
            m2: StableMeasure::new(p.alpha2)?,
        })
    }
}

/// Each term of `𝓛g(x,y)`. The diffusion terms carry the weight `b_{i1}`,
/// matching the generator's linear dependence on all `b_{ij}`.
pub fn generator_terms(
    tf: &TestFunction,
    x: f64,
    y: f64,
    p: &ModelParams,
    ms: &Measures,
    mode: Mode,
) -> Result<GeneratorTerms> {
    let e = tf.eval(x, y)?;
    let k = |coord: usize, m: &StableMeasure| match mode {
        Mode::Closed => k_integral_closed(tf, x, y, coord, m),
        Mode::Numeric => k_integral_numeric(tf, x, y, coord, m),
    };
    Ok(GeneratorTerms {
        interaction_x: p.a1 * x.powf(p.theta1) * y.powf(p.kappa1) * e.gx,
        interaction_y: p.a2 * y.powf(p.theta2) * x.powf(p.kappa2) * e.gy,
        drift_x: -p.b10 * x.powf(p.r10) * e.gx,
        drift_y: -p.b20 * y.powf(p.r20) * e.gy,
        diffusion_x: p.b11 * x.powf(p.r11) * e.gxx,
        diffusion_y: p.b21 * y.powf(p.r21) * e.gyy,
        jump_x: if p.b12 != 0.0 {
            p.b12 * x.powf(p.r12) * k(1, &ms.m1)?
        } else {
            0.0
        },
        jump_y: if p.b22 != 0.0 {
            p.b22 * y.powf(p.r22) * k(2, &ms.m2)?
        } else {
            0.0
        },
    })
}

pub fn apply_generator(tf: &TestFunction, x: f64, y: f64, p: &ModelParams, mode: Mode) -> Result<f64> {
    let ms = Measures::new(p)?;
    Ok(generator_terms(tf, x, y, p, &ms, mode)?.total())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// `𝓛g ≤ C g`.
    Upper,
    /// `𝓛g ≥ d g`.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    /// The grid spans `[c·lo_factor, c]` in each coordinate.
    pub lo_factor: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n: 64,
            lo_factor: 1e-6,
        }
    }
}

impl GridSpec {
    pub fn nodes(&self, c: f64) -> Vec<f64> {
        let n = self.n.max(2);
        let lo = (c * self.lo_factor).ln();
        let hi = c.ln();
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    c
                } else {
                    (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridInfo {
    pub n_x: usize,
    pub n_y: usize,
    pub lo: f64,
    pub hi: f64,
    pub direction: Direction,
    pub mode: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub satisfied: bool,
    /// Upper: the least `C` with `𝓛g ≤ Cg` on the grid. Lower: the largest `d`
    /// with `𝓛g ≥ dg` at nodes where `g > 0`.
    pub constant: f64,
    /// Node attaining the constant, or the first node violating the bound.
    pub witness: Witness,
    pub grid: GridInfo,
}

/// Grid check of a drift inequality on `(0,c]²`. Violations are reported in
/// the returned report rather than as errors.
pub fn verify_drift_bound(
    tf: &TestFunction,
    p: &ModelParams,
    c: f64,
    grid: GridSpec,
    direction: Direction,
    mode: Mode,
) -> Result<BoundReport> {
    tf.validate()?;
    let ms = Measures::new(p)?;
    let axis = grid.nodes(c);
    let points: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&x| axis.iter().map(move |&y| (x, y)))
        .collect();
    let evals: Vec<(f64, f64, f64, f64)> = points
        .par_iter()
        .map(|&(x, y)| {
            let g = tf.eval(x, y)?.g;
            let lg = generator_terms(tf, x, y, p, &ms, mode)?.total();
            Ok((x, y, g, lg))
        })
        .collect::<Result<_>>()?;
    let info = GridInfo {
        n_x: axis.len(),
        n_y: axis.len(),
        lo: axis[0],
        hi: c,
        direction,
        mode,
    };
    let report = |satisfied, constant, (x, y, g, lg): (f64, f64, f64, f64)| BoundReport {
        satisfied,
        constant,
        witness: Witness {
            x,
            y,
            lhs: lg,
            rhs: constant * g,
        },
        grid: info,
    };

    if let Some(&bad) = evals.iter().find(|e| !e.3.is_finite() || !e.2.is_finite()) {
        return Ok(report(false, f64::NAN, bad));
    }
    match direction {
        Direction::Upper => {
            if let Some(&bad) = evals.iter().find(|e| e.2 <= 0.0) {
                return Ok(report(false, f64::NAN, bad));
            }
            let best = evals
                .iter()
                .copied()
                .max_by(|a, b| (a.3 / a.2).total_cmp(&(b.3 / b.2)))
                .expect("grid is non-empty");
            Ok(report(true, best.3 / best.2, best))
        }
        Direction::Lower => {
            let best = evals
                .iter()
                .copied()
                .filter(|e| e.2 > 0.0)
                .min_by(|a, b| (a.3 / a.2).total_cmp(&(b.3 / b.2)));
            let Some(best) = best else {
                return Ok(report(false, f64::NAN, evals[0]));
            };
            let d = best.3 / best.2;
            if !(d > 0.0) {
                return Ok(report(false, d, best));
            }
            if let Some(&bad) = evals.iter().find(|e| e.2 <= 0.0 && e.3 < d * e.2) {
                return Ok(report(false, d, bad));
            }
            Ok(report(true, d, best))
        }
    }
}

/// Radius `v` and rate `d` for the capped linear test function `v − x^ρ − y`
/// when the first coordinate is strongly subcritical (`r1 ≤ θ1−1`, `r1 < 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapRadius {
    pub v: f64,
    pub d: f64,
    pub rho: f64,
}

/// Scans `v = 2^{-k}` for the two sufficient conditions
/// `½ b1(1−ρ)min(1,c(ρ)) x^{r1+1−θ1} ≥ a1 y^{κ1}` and
/// `½ b1 ρ(1−ρ)min(1,c(ρ)) x^{ρ+r1} − a2 ≥ d v` on `(0,v]²`, both of which
/// are tightest at `x = y = v`.
pub fn extinction_cap_radius(p: &ModelParams, rho: f64) -> Result<CapRadius> {
    let dp = derive_exponents(p);
    if !(dp.r1 <= p.theta1 - 1.0 && dp.r1 < 0.0) {
        return Err(Error::Hypothesis(format!(
            "needs r1 <= theta1 - 1 and r1 < 0, got r1 = {}",
            dp.r1
        )));
    }
    if !(rho > 0.0 && rho < 1f64.min(-dp.r1)) {
        return Err(Error::Precondition(format!(
            "rho must lie in (0, min(1, -r1)) = (0, {}), got {rho}",
            1f64.min(-dp.r1)
        )));
    }
    let c1 = StableMeasure::new(p.alpha1)?.c_rho(rho)?;
    let base = 0.5 * dp.b1 * (1.0 - rho) * c1.min(1.0);
    for k in 0..60 {
        let v = 2f64.powi(-k);
        let first = base * v.powf(dp.r1 + 1.0 - p.theta1) - p.a1 * v.powf(p.kappa1);
        let second = base * rho * v.powf(rho + dp.r1) - p.a2;
        if first >= 0.0 && second > 0.0 {
            return Ok(CapRadius {
                v,
                d: second / v,
                rho,
            });
        }
    }
    Err(Error::Hypothesis(
        "no admissible radius down to 2^-59".to_string(),
    ))
}
