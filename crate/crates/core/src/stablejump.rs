//! The spectrally positive α-stable Lévy measure `μ(dz) = c z^{-1-α} dz`,
//! its truncated moments, integration against it, and sampling of the
//! compensated jump increment over one time step.

use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, GaussLegendrePair, Tolerance};

/// Number of equal-probability cells in the per-band sampling table.
const CELLS: usize = 256;

/// Above this expected jump count per increment, jumps are drawn band by band.
pub const BAND_SAMPLING_THRESHOLD: f64 = 64.0;

/// Cap on the expected number of individually drawn jumps per increment.
/// Beyond it the cutoff is raised until the count fits, and the jumps below
/// the raised cutoff join the Gaussian part.
pub const MAX_EXACT_JUMPS: f64 = 1_048_576.0;

/// Jumps in a dyadic band `[e·2^j, e·2^{j+1})` are `e·2^j·V` with `V` on `[1,2)`
/// of density ∝ `v^{-1-α}`; this table samples `V` by picking one of `CELLS`
/// equal-probability cells and rejection-sampling inside it.
#[derive(Debug)]
struct BandTable {
    /// `(left edge, width, density ratio right/left)` per cell.
    cells: Vec<(f64, f64, f64)>,
}

impl BandTable {
    fn new(alpha: f64) -> Self {
        let mass = 1.0 - 2f64.powf(-alpha);
        let mut cuts: Vec<f64> = (0..=CELLS)
            .map(|i| (1.0 - mass * i as f64 / CELLS as f64).powf(-1.0 / alpha))
            .collect();
        cuts[0] = 1.0;
        cuts[CELLS] = 2.0;
        let cells = cuts
            .windows(2)
            .map(|w| (w[0], w[1] - w[0], (w[1] / w[0]).powf(-1.0 - alpha)))
            .collect();
        BandTable { cells }
    }

    /// One 64-bit draw per attempt: 8 bits pick the cell, 27 bits place the
    /// point inside it (at bin midpoints) and 29 bits drive the acceptance
    /// test. The law is exact up to the 2^-27 placement grid within a cell.
    #[inline]
    fn sample<R: RngCore + ?Sized>(&self, alpha: f64, rng: &mut R) -> f64 {
        const POS: f64 = 1.0 / (1u64 << 27) as f64;
        const ACC: f64 = 1.0 / (1u64 << 29) as f64;
        let w = rng.next_u64();
        let (lo, width, squeeze) = self.cells[(w >> 56) as usize];
        let mut bits = w;
        loop {
            let pos = (((bits >> 29) & ((1 << 27) - 1)) as f64 + 0.5) * POS;
            let accept = (bits & ((1 << 29) - 1)) as f64 * ACC;
            let v = lo + width * pos;
            if accept < squeeze || accept < (v / lo).powf(-1.0 - alpha) {
                return v;
            }
            bits = rng.next_u64();
        }
    }
}

#[derive(Debug, Clone)]
pub struct StableMeasure {
    pub alpha: f64,
    pub c_norm: f64,
    table: Arc<BandTable>,
}

/// Small-jump truncation used by the per-step jump sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffScheme {
    pub eps_jump: f64,
    /// Replace the discarded jumps below `eps_jump` by a Gaussian of equal variance.
    pub gaussian_smalljump: bool,
}

impl Default for CutoffScheme {
    fn default() -> Self {
        CutoffScheme {
            eps_jump: 1e-3,
            gaussian_smalljump: true,
        }
    }
}

impl CutoffScheme {
    pub fn new(eps_jump: f64, gaussian_smalljump: bool) -> Result<Self> {
        if !(eps_jump > 0.0 && eps_jump.is_finite()) {
            return Err(Error::Domain(format!(
                "eps_jump must be positive, got {eps_jump}"
            )));
        }
        Ok(CutoffScheme {
            eps_jump,
            gaussian_smalljump,
        })
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "truncation level must be positive, got {eps}"
        )))
    }
}

/// `Γ(a)Γ(b)/(Γ(c)Γ(d))`-style ratios for positive arguments without overflow.
fn gamma_ratio(num: f64, den1: f64, den2: f64) -> f64 {
    if num < 150.0 && den1 < 150.0 && den2 < 150.0 {
        gamma(num) / (gamma(den1) * gamma(den2))
    } else {
        (ln_gamma(num) - ln_gamma(den1) - ln_gamma(den2)).exp()
    }
}

impl StableMeasure {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::Domain(format!("alpha must lie in (1,2), got {alpha}")));
        }
        let c_norm = alpha * (alpha - 1.0) / (gamma(alpha) * gamma(2.0 - alpha));
        Ok(StableMeasure {
            alpha,
            c_norm,
            table: Arc::new(BandTable::new(alpha)),
        })
    }

    pub fn density(&self, z: f64) -> f64 {
        if z > 0.0 {
            self.c_norm * z.powf(-1.0 - self.alpha)
        } else {
            0.0
        }
    }

    /// `μ([eps, ∞))`.
    pub fn tail_mass(&self, eps: f64) -> Result<f64> {
        check_eps(eps)?;
        Ok(self.c_norm * eps.powf(-self.alpha) / self.alpha)
    }

    /// `∫_eps^∞ z μ(dz)`.
    pub fn mean_above(&self, eps: f64) -> Result<f64> {
        check_eps(eps)?;
        Ok(self.c_norm * eps.powf(1.0 - self.alpha) / (self.alpha - 1.0))
    }

    /// `∫_0^eps z² μ(dz)`.
    pub fn var_below(&self, eps: f64) -> Result<f64> {
        check_eps(eps)?;
        Ok(self.c_norm * eps.powf(2.0 - self.alpha) / (2.0 - self.alpha))
    }

    /// `Γ(α−ρ)/(Γ(α)Γ(2−ρ))`, which equals `∫[(1+z)^ρ−1−ρz]μ(dz) / (ρ(ρ−1))`
    /// for ρ ∉ {0, 1}.
    pub fn c_rho(&self, rho: f64) -> Result<f64> {
        if !rho.is_finite() || rho >= self.alpha {
            return Err(Error::Domain(format!(
                "c(rho) needs rho < alpha = {}, got {rho}",
                self.alpha
            )));
        }
        if self.alpha - rho < 1e-6 {
            return Err(Error::Domain(format!(
                "rho = {rho} is within 1e-6 of the pole at alpha"
            )));
        }
        Ok(gamma_ratio(self.alpha - rho, self.alpha, 2.0 - rho))
    }

    /// Quadrature of `∫[(1+z)^ρ−1−ρz]μ(dz) / (ρ(ρ−1))`, the integral form of `c_rho`.
    pub fn c_rho_numeric(&self, rho: f64, rel: f64) -> Result<f64> {
        if rho >= self.alpha {
            return Err(Error::Domain(format!("integral diverges for rho = {rho}")));
        }
        // The ρ(ρ−1) factor is divided out analytically so ρ ∈ {0,1} also works.
        let far = |z: f64| {
            if rho == 0.0 {
                ((1.0 + z).ln() - z) / -1.0
            } else if rho == 1.0 {
                (1.0 + z) * (1.0 + z).ln() - z
            } else {
                ((1.0 + z).powf(rho) - 1.0 - rho * z) / (rho * (rho - 1.0))
            }
        };
        let near = |z: f64| (1.0 + z).powf(rho - 2.0);
        self.integrate(far, near, rho.max(1.0), rel)
    }

    /// `ψ(u) = ∫(e^{-uz}−1+uz)μ(dz) = u^α/Γ(α)`.
    pub fn laplace_exponent(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        u.powf(self.alpha) / gamma(self.alpha)
    }

    pub fn laplace_exponent_numeric(&self, u: f64, rel: f64) -> Result<f64> {
        if u == 0.0 {
            return Ok(0.0);
        }
        let far = |z: f64| (-u * z).exp_m1() + u * z;
        let near = |z: f64| u * u * (-u * z).exp();
        self.integrate(far, near, 1.0, rel)
    }

    /// `∫_0^∞ G(z) μ(dz)` for a `G` with `G(0) = G'(0) = 0`.
    ///
    /// `g` evaluates `G` (used on `[1,∞)`), `g2` evaluates `G''` (used on
    /// `(0,1]` through `G(z)/z² = ∫_0^1 G''(zu)(1−u)du`), and `growth` is an
    /// exponent `β < α` with `|G(z)| = O(z^β)` at infinity.
    pub fn integrate<F, F2>(&self, g: F, g2: F2, growth: f64, rel: f64) -> Result<f64>
    where
        F: Fn(f64) -> f64,
        F2: Fn(f64) -> f64,
    {
        self.integrate_tol(g, g2, growth, Tolerance::rel(rel))
    }

    /// As `integrate`, with an explicit tolerance; `tol.abs` applies to each of
    /// the two transformed pieces and lets integrals that vanish terminate.
    pub fn integrate_tol<F, F2>(&self, g: F, g2: F2, growth: f64, tol: Tolerance) -> Result<f64>
    where
        F: Fn(f64) -> f64,
        F2: Fn(f64) -> f64,
    {
        let alpha = self.alpha;
        let beta = growth.max(1.0);
        if beta >= alpha {
            return Err(Error::Domain(format!(
                "integrand growth z^{growth} is not integrable against the alpha = {alpha} tail"
            )));
        }
        let inner = GaussLegendrePair::default();

        // z = s^k on (0,1]: z² μ(dz) becomes c·k ds.
        let k = 1.0 / (2.0 - alpha);
        let near = integrate(
            |s: f64| {
                let z = s.powf(k);
                inner.integrate(&|u: f64| g2(z * u) * (1.0 - u), 0.0, 1.0, tol.rel)
            },
            0.0,
            1.0,
            tol,
        )?;

        // z = s^{-p} on [1,∞): μ(dz) becomes c·p·s^{pα−1} ds.
        let p = 1.0 / (alpha - beta);
        let far = integrate(
            |s: f64| {
                let z = s.powf(-p);
                if !z.is_finite() {
                    return 0.0;
                }
                g(z) * s.powf(p * alpha - 1.0)
            },
            0.0,
            1.0,
            tol,
        )?;
        Ok(self.c_norm * (k * near.value + p * far.value))
    }

    /// `x^{-α} ∫ G(zx) μ(dz)`: the same integral after rescaling the jump
    /// variable, so it agrees with `integrate` for every `x > 0`.
    pub fn integrate_rescaled<F, F2>(&self, g: F, g2: F2, growth: f64, x: f64, rel: f64) -> Result<f64>
    where
        F: Fn(f64) -> f64,
        F2: Fn(f64) -> f64,
    {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Domain(format!(
                "rescaling factor must be positive, got {x}"
            )));
        }
        let v = self.integrate(|z| g(z * x), |z| x * x * g2(z * x), growth, rel)?;
        Ok(x.powf(-self.alpha) * v)
    }

    /// Exact Laplace exponent of the truncated scheme at unit intensity, i.e.
    /// `log E[e^{-u ΔJ}] / (λ dt)`; it differs from `ψ(u)` only through the
    /// treatment of jumps below `eps`.
    pub fn scheme_laplace_exponent(&self, u: f64, scheme: CutoffScheme) -> Result<f64> {
        let eps = scheme.eps_jump;
        check_eps(eps)?;
        let ue = u * eps;
        if ue > 30.0 {
            return Err(Error::Domain(format!("u·eps = {ue} too large for the series")));
        }
        // ∫_0^eps (e^{-uz}−1+uz) μ(dz) = c Σ_{k≥2} (−u)^k ε^{k−α} / (k! (k−α)).
        let mut below = 0.0;
        let mut term = 1.0; // (−uε)^k / k!
        for k in 1..400 {
            term *= -ue / k as f64;
            if k < 2 {
                continue;
            }
            let add = term / (k as f64 - self.alpha);
            below += add;
            if add.abs() <= 1e-18 * below.abs() {
                break;
            }
        }
        let below = self.c_norm * eps.powf(-self.alpha) * below;
        let mut psi = self.laplace_exponent(u) - below;
        if scheme.gaussian_smalljump {
            psi += 0.5 * u * u * self.var_below(eps)?;
        }
        Ok(psi)
    }

    /// Inverse-CDF map `U ↦ eps·U^{-1/α}` of the normalized tail on `[eps, ∞)`.
    pub fn tail_quantile(&self, eps: f64, u: f64) -> f64 {
        eps * u.powf(-1.0 / self.alpha)
    }

    pub fn sample_tail<R: Rng + ?Sized>(&self, eps: f64, rng: &mut R) -> f64 {
        // 1 − U lies in (0, 1], so the lower endpoint is attainable and ∞ is not.
        let u = 1.0 - rng.random::<f64>();
        self.tail_quantile(eps, u)
    }

    /// Sum of the jumps of size ≥ `eps` of a Poisson random measure with
    /// intensity `mass · (μ restricted to [eps,∞), normalized)`.
    fn sum_jumps<R: Rng + ?Sized>(&self, eps: f64, mass: f64, rng: &mut R) -> f64 {
        if mass <= 0.0 {
            return 0.0;
        }
        if mass < BAND_SAMPLING_THRESHOLD {
            let k = poisson(mass, rng);
            return (0..k).map(|_| self.sample_tail(eps, rng)).sum();
        }
        // Poisson splitting into dyadic bands; band j carries mass·2^{-jα}(1−2^{-α}).
        let q = 2f64.powf(-self.alpha);
        let bands = ((mass / 8.0).log2() / self.alpha).ceil().max(1.0) as i32;
        let mut total = 0.0;
        let mut band_mass = mass * (1.0 - q);
        let mut lower = eps;
        for _ in 0..bands {
            let k = poisson(band_mass, rng);
            let mut s = 0.0;
            for _ in 0..k {
                s += self.table.sample(self.alpha, rng);
            }
            total += lower * s;
            band_mass *= q;
            lower *= 2.0;
        }
        let rest = mass * q.powi(bands);
        let k = poisson(rest, rng);
        for _ in 0..k {
            total += self.sample_tail(lower, rng);
        }
        total
    }

    /// One-step compensated jump increment with frozen intensity `λ·μ`.
    pub fn sample_compensated_increment<R: Rng + ?Sized>(
        &self,
        lambda: f64,
        dt: f64,
        scheme: CutoffScheme,
        rng: &mut R,
    ) -> Result<f64> {
        if !(dt > 0.0) {
            return Err(Error::Domain(format!("dt must be positive, got {dt}")));
        }
        if !(lambda >= 0.0) {
            return Err(Error::Domain(format!("lambda must be nonnegative, got {lambda}")));
        }
        if lambda == 0.0 {
            return Ok(0.0);
        }
        let eps = scheme.eps_jump;
        let rate = lambda * dt;
        let mass = rate * self.tail_mass(eps)?;
        // The tail mass scales as eps^{-α}, so this cutoff carries MAX_EXACT_JUMPS.
        let cut = if mass > MAX_EXACT_JUMPS {
            eps * (mass / MAX_EXACT_JUMPS).powf(1.0 / self.alpha)
        } else {
            eps
        };
        if !cut.is_finite() {
            return Err(Error::Domain(format!(
                "jump intensity {lambda} is too large to sample"
            )));
        }
        let mut inc = self.sum_jumps(cut, rate * self.tail_mass(cut)?, rng);
        inc -= rate * self.mean_above(cut)?;
        let small = if scheme.gaussian_smalljump {
            self.var_below(cut)?
        } else {
            self.var_below(cut)? - self.var_below(eps)?
        };
        if scheme.gaussian_smalljump || cut > eps {
            let z: f64 = StandardNormal.sample(rng);
            inc += (rate * small).sqrt() * z;
        }
        Ok(inc)
    }
}

/// Empirical `E[e^{-u ΔJ}]` of sampled increments against `exp(λ dt ψ(u))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplaceCheck {
    pub u: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub analytic: f64,
    /// Exact transform of the truncated scheme.
    pub scheme: f64,
    /// `|scheme − analytic|`, the bias the truncation is allowed.
    pub slack: f64,
    pub pass: bool,
}

/// Draws `n` increments from one stream and compares their Laplace transform
/// at each `u` with the analytic value, allowing 3 standard errors plus the
/// truncation slack.
pub fn laplace_transform_check<R: Rng + ?Sized>(
    m: &StableMeasure,
    lambda: f64,
    dt: f64,
    scheme: CutoffScheme,
    us: &[f64],
    n: usize,
    rng: &mut R,
) -> Result<Vec<LaplaceCheck>> {
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 samples, got {n}")));
    }
    let draws = (0..n)
        .map(|_| m.sample_compensated_increment(lambda, dt, scheme, rng))
        .collect::<Result<Vec<f64>>>()?;
    us.iter()
        .map(|&u| {
            let vals: Vec<f64> = draws.iter().map(|d| (-u * d).exp()).collect();
            let mean = vals.iter().sum::<f64>() / n as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let std_error = (var / n as f64).sqrt();
            let analytic = (dt * lambda * m.laplace_exponent(u)).exp();
            let scheme = (dt * lambda * m.scheme_laplace_exponent(u, scheme)?).exp();
            let slack = (scheme - analytic).abs();
            Ok(LaplaceCheck {
                u,
                empirical: mean,
                std_error,
                analytic,
                scheme,
                slack,
                pass: (mean - analytic).abs() <= 3.0 * std_error + slack,
            })
        })
        .collect()
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("finite positive Poisson mean");
    d.sample(rng) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::path_rng;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn moments_at_unit_cutoff() {
        let m = StableMeasure::new(1.5).unwrap();
        assert!(rel(m.c_norm, 1.5 / PI) < 1e-14);
        assert!(rel(m.tail_mass(1.0).unwrap(), 1.0 / PI) < 1e-14);
        assert!(rel(m.tail_mass(0.01).unwrap(), 1000.0 / PI) < 1e-13);
        assert!(rel(m.mean_above(1.0).unwrap(), 3.0 / PI) < 1e-14);
        assert!(rel(m.var_below(1.0).unwrap(), 3.0 / PI) < 1e-14);
        assert!(m.tail_mass(0.0).is_err());
        assert!(m.var_below(-1.0).is_err());
        assert!(m.var_below(1e-12).unwrap() < 1e-5);
        let mut last = f64::INFINITY;
        for e in [1.0, 10.0, 1e3, 1e6] {
            let t = m.tail_mass(e).unwrap();
            assert!(t < last);
            last = t;
        }
    }

    #[test]
    fn rescaled_integral_of_log_moment() {
        // ∫(z − ln(1+z)) μ(dz) = c(0) = 1 for every α.
        let m = StableMeasure::new(1.3).unwrap();
        let g = |z: f64| z - z.ln_1p();
        let g2 = |z: f64| 1.0 / ((1.0 + z) * (1.0 + z));
        for x in [0.01, 1.0, 50.0] {
            let v = m.integrate_rescaled(g, g2, 1.0, x, 1e-11).unwrap();
            assert!(rel(v, 1.0) < 1e-8, "x={x} v={v}");
        }
        assert!(m.integrate_rescaled(g, g2, 1.0, 0.0, 1e-9).is_err());
    }

    #[test]
    fn c_rho_values_and_guards() {
        for a in [1.2, 1.5, 1.8] {
            let m = StableMeasure::new(a).unwrap();
            assert!((m.c_rho(0.0).unwrap() - 1.0).abs() < 1e-14);
        }
        let m = StableMeasure::new(1.5).unwrap();
        assert!(rel(m.c_rho(-1.0).unwrap(), 0.75) < 1e-14);
        assert!(rel(m.c_rho(0.5).unwrap(), 4.0 / PI) < 1e-14);
        assert!(m.c_rho(1.5).is_err());
        assert!(m.c_rho(1.5 - 1e-7).is_err());
        assert!(m.c_rho(-300.0).unwrap().is_finite());
    }

    #[test]
    fn c_rho_quadrature_at_integer_rho() {
        let m = StableMeasure::new(1.5).unwrap();
        for rho in [0.0, 1.0] {
            let q = m.c_rho_numeric(rho, 1e-11).unwrap();
            assert!(rel(q, m.c_rho(rho).unwrap()) < 1e-8, "rho {rho}: {q}");
        }
    }

    #[test]
    fn laplace_exponent_values() {
        let m = StableMeasure::new(1.5).unwrap();
        assert_eq!(m.laplace_exponent(0.0), 0.0);
        assert!(rel(m.laplace_exponent(1.0), 2.0 / PI.sqrt()) < 1e-14);
        assert!(rel(m.laplace_exponent(2.0), 2f64.powf(1.5) * 2.0 / PI.sqrt()) < 1e-14);
    }

    #[test]
    fn scheme_exponent_matches_quadrature_of_truncated_integral() {
        let m = StableMeasure::new(1.5).unwrap();
        let scheme = CutoffScheme::new(0.5, false).unwrap();
        // ∫_{0.5}^∞ (e^{-uz}−1+uz) μ(dz) by direct quadrature.
        let u = 2.0;
        let direct = integrate(
            |s: f64| {
                let z = 0.5 / s;
                ((-u * z).exp_m1() + u * z) * m.density(z) * 0.5 / (s * s)
            },
            0.0,
            1.0,
            Tolerance::rel(1e-12),
        )
        .unwrap()
        .value;
        let series = m.scheme_laplace_exponent(u, scheme).unwrap();
        assert!(rel(series, direct) < 1e-10, "{series} vs {direct}");
    }

    #[test]
    fn tail_sampler() {
        let m = StableMeasure::new(1.5).unwrap();
        assert_eq!(m.tail_quantile(0.3, 1.0), 0.3);
        assert!(rel(m.tail_quantile(1.0, 0.5), 2f64.powf(2.0 / 3.0)) < 1e-15);
        let mut rng = path_rng(1, 0);
        let n = 200_000;
        let mut above = 0;
        for _ in 0..n {
            let z = m.sample_tail(0.1, &mut rng);
            assert!(z >= 0.1);
            if z > 0.2 {
                above += 1;
            }
        }
        let p = 2f64.powf(-1.5);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((above as f64 / n as f64 - p).abs() < 4.0 * se);
    }

    #[test]
    fn band_table_matches_band_law() {
        // P(V < v) = (1 − v^{-α})/(1 − 2^{-α}) on [1,2).
        let alpha = 1.3;
        let table = BandTable::new(alpha);
        let mut rng = path_rng(5, 5);
        let n = 400_000;
        let probes = [1.05, 1.2, 1.5, 1.8];
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let v = table.sample(alpha, &mut rng);
            assert!((1.0..=2.0).contains(&v));
            for (c, &p) in counts.iter_mut().zip(&probes) {
                if v < p {
                    *c += 1;
                }
            }
        }
        for (c, &p) in counts.iter().zip(&probes) {
            let expect = (1.0 - p.powf(-alpha)) / (1.0 - 2f64.powf(-alpha));
            let se = (expect * (1.0 - expect) / n as f64).sqrt();
            assert!((*c as f64 / n as f64 - expect).abs() < 4.0 * se, "probe {p}");
        }
    }

    #[test]
    fn increment_guards_and_zero_intensity() {
        let m = StableMeasure::new(1.5).unwrap();
        let mut rng = path_rng(2, 0);
        let s = CutoffScheme::default();
        assert_eq!(
            m.sample_compensated_increment(0.0, 0.1, s, &mut rng).unwrap(),
            0.0
        );
        assert!(m.sample_compensated_increment(1.0, 0.0, s, &mut rng).is_err());
        assert!(m.sample_compensated_increment(-1.0, 0.1, s, &mut rng).is_err());
    }

    #[test]
    fn increment_is_centered() {
        let m = StableMeasure::new(1.5).unwrap();
        for gaussian in [true, false] {
            let s = CutoffScheme::new(1e-3, gaussian).unwrap();
            let mut rng = path_rng(3, gaussian as u64);
            let n = 100_000;
            let xs: Vec<f64> = (0..n)
                .map(|_| m.sample_compensated_increment(1.0, 0.1, s, &mut rng).unwrap())
                .collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            // The variance is infinite; a rare huge jump inflates mean and SE together.
            let sd = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (sd / n as f64).sqrt();
            assert!(mean.abs() < 3.0 * se, "gaussian={gaussian}: mean {mean}, se {se}");
        }
    }
}
