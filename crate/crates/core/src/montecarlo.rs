//! Parallel path ensembles, extinction frequencies with Wilson intervals, and
//! parameter sweeps that put the classifier verdict next to the estimate.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::{classify, Verdict};
use crate::error::{Error, Result};
use crate::model::{ModelParams, PARAM_KEYS};
use crate::rng::path_rng;
use crate::simulator::{PathOutcome, SimConfig, Simulator, Status, THRESHOLD_CAVEAT};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Simulation keys a sweep may vary besides the model coefficients.
pub const SIM_KEYS: [&str; 7] = [
    "dt",
    "t_max",
    "eps_extinct",
    "cap_explode",
    "eps_jump",
    "x0",
    "y0",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McConfig {
    pub n_paths: u64,
    pub sim: SimConfig,
    /// Thread cap; `None` uses every available core.
    pub workers: Option<usize>,
    pub x0: f64,
    pub y0: f64,
}

impl McConfig {
    pub fn validate(self) -> Result<Self> {
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        self.sim.validate()?;
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub n_paths: u64,
    pub n_extinct: u64,
    pub n_extinct_x: u64,
    pub n_extinct_y: u64,
    pub n_exploded: u64,
    pub n_survived: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_t_extinct: Option<f64>,
    pub caveat: &'static str,
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64) -> (f64, f64) {
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

/// Summarizes outcomes in path order.
pub fn aggregate(outcomes: &[PathOutcome]) -> McEstimate {
    let count = |s: Status| outcomes.iter().filter(|o| o.status == s).count() as u64;
    let n_extinct_x = count(Status::ExtinctX);
    let n_extinct_y = count(Status::ExtinctY);
    let n_extinct = n_extinct_x + n_extinct_y;
    let n = outcomes.len() as u64;
    let t_sum: f64 = outcomes
        .iter()
        .filter(|o| o.status.is_extinct())
        .map(|o| o.t_end)
        .sum();
    let (ci_lo, ci_hi) = wilson(n_extinct, n);
    McEstimate {
        n_paths: n,
        n_extinct,
        n_extinct_x,
        n_extinct_y,
        n_exploded: count(Status::Exploded),
        n_survived: count(Status::Survived),
        p_hat: n_extinct as f64 / n as f64,
        ci_lo,
        ci_hi,
        mean_t_extinct: (n_extinct > 0).then(|| t_sum / n_extinct as f64),
        caveat: THRESHOLD_CAVEAT,
    }
}

/// Runs every path and returns outcomes indexed by path id. Path `k` always
/// uses stream `k`, so the result does not depend on the worker count.
pub fn run_paths(p: &ModelParams, cfg: &McConfig) -> Result<Vec<PathOutcome>> {
    let cfg = cfg.validate()?;
    let sim = Simulator::new(*p, cfg.sim)?;
    let job = || {
        (0..cfg.n_paths)
            .into_par_iter()
            .map(|k| {
                let mut rng = path_rng(cfg.sim.seed, k);
                sim.simulate_path(cfg.x0, cfg.y0, &mut rng)
            })
            .collect::<Result<Vec<_>>>()
    };
    match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
            .install(job),
        None => job(),
    }
}

pub fn estimate_extinction_prob(p: &ModelParams, cfg: &McConfig) -> Result<McEstimate> {
    Ok(aggregate(&run_paths(p, cfg)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Lin,
    Log,
}

/// One sweep dimension, written `name=from:to:steps[:lin|log]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub scale: Scale,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| {
            Error::Config(format!(
                "axis '{s}': {why} (expected name=from:to:steps[:lin|log])"
            ))
        };
        let (name, spec) = s.split_once('=').ok_or_else(|| bad("missing '='"))?;
        let name = name.trim();
        if !PARAM_KEYS.contains(&name) && !SIM_KEYS.contains(&name) {
            return Err(bad("unknown parameter"));
        }
        let fields: Vec<&str> = spec.split(':').collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(bad("wrong number of fields"));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("bad number"));
        let (from, to) = (num(fields[0])?, num(fields[1])?);
        let steps: usize = fields[2].trim().parse().map_err(|_| bad("bad step count"))?;
        let scale = match fields.get(3).map(|t| t.trim()) {
            None | Some("lin") => Scale::Lin,
            Some("log") => Scale::Log,
            Some(_) => return Err(bad("scale must be lin or log")),
        };
        if steps == 0 || !from.is_finite() || !to.is_finite() {
            return Err(bad("need finite bounds and at least one step"));
        }
        if scale == Scale::Log && !(from > 0.0 && to > 0.0) {
            return Err(bad("log scale needs positive bounds"));
        }
        Ok(Axis {
            name: name.to_string(),
            from,
            to,
            steps,
            scale,
        })
    }
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let t = i as f64 / last;
                match self.scale {
                    Scale::Lin => self.from + (self.to - self.from) * t,
                    Scale::Log => (self.from.ln() + (self.to / self.from).ln() * t).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub values: Vec<f64>,
    pub verdict: Option<Verdict>,
    pub estimate: Option<McEstimate>,
    /// Why the grid point was skipped.
    pub invalid: Option<String>,
}

fn apply(p: &mut ModelParams, cfg: &mut McConfig, name: &str, v: f64) -> Result<()> {
    match name {
        "dt" => cfg.sim.dt = v,
        "t_max" => cfg.sim.t_max = v,
        "eps_extinct" => cfg.sim.eps_extinct = v,
        "cap_explode" => cfg.sim.cap_explode = v,
        "eps_jump" => cfg.sim.cutoff.eps_jump = v,
        "x0" => cfg.x0 = v,
        "y0" => cfg.y0 = v,
        _ => *p = p.with(name, v)?,
    }
    Ok(())
}

/// Evaluates the estimate and the verdict at every point of a one- or
/// two-axis grid, first axis outermost. Points that fail validation are kept
/// as flagged rows. Every point reuses the configured seed.
pub fn sweep(base: &ModelParams, axes: &[Axis], cfg: &McConfig) -> Result<Vec<SweepRow>> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::Config(format!(
            "sweep takes one or two axes, got {}",
            axes.len()
        )));
    }
    if axes.len() == 2 && axes[0].name == axes[1].name {
        return Err(Error::Config(format!("axis '{}' given twice", axes[0].name)));
    }
    let grid: Vec<Vec<f64>> = match axes {
        [a] => a.values().into_iter().map(|v| vec![v]).collect(),
        [a, b] => {
            let bv = b.values();
            a.values()
                .into_iter()
                .flat_map(|u| bv.iter().map(move |&v| vec![u, v]))
                .collect()
        }
        _ => unreachable!(),
    };
    let mut rows = Vec::with_capacity(grid.len());
    for values in grid {
        let (mut p, mut c) = (*base, *cfg);
        for (axis, &v) in axes.iter().zip(&values) {
            apply(&mut p, &mut c, &axis.name, v)?;
        }
        let checked = p.validate().and_then(|p| c.validate().map(|c| (p, c)));
        let row = match checked {
            Ok((p, c)) => {
                let verdict = classify(&p)?.verdict;
                match estimate_extinction_prob(&p, &c) {
                    Ok(est) => SweepRow {
                        values,
                        verdict: Some(verdict),
                        estimate: Some(est),
                        invalid: None,
                    },
                    Err(e @ (Error::Internal(_) | Error::QuadratureFailure(_))) => return Err(e),
                    Err(e) => SweepRow {
                        values,
                        verdict: Some(verdict),
                        estimate: None,
                        invalid: Some(e.to_string()),
                    },
                }
            }
            Err(e) => SweepRow {
                values,
                verdict: None,
                estimate: None,
                invalid: Some(e.to_string()),
            },
        };
        rows.push(row);
    }
    Ok(rows)
}

/// `%.9g`-style rendering.
pub fn sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.8e}");
    let (mant, e) = s.split_once('e').expect("exponent form");
    let e: i32 = e.parse().expect("exponent");
    if (-5..9).contains(&e) {
        let decimals = (8 - e).max(0) as usize;
        let fixed = format!("{v:.decimals$}");
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}e{e}")
    }
}

pub fn sweep_header(axes: &[Axis]) -> String {
    let names: Vec<&str> = axes.iter().map(|a| a.name.as_str()).collect();
    format!(
        "{},verdict,n_paths,n_extinct,n_exploded,n_survived,p_hat,ci_lo,ci_hi,mean_t_extinct",
        names.join(",")
    )
}

/// CSV table with one line per grid point. Skipped points carry the verdict
/// `Invalid` and empty estimate fields.
pub fn sweep_csv(axes: &[Axis], rows: &[SweepRow]) -> String {
    let mut out = sweep_header(axes);
    out.push('\n');
    for row in rows {
        let vals: Vec<String> = row.values.iter().map(|&v| sig9(v)).collect();
        let verdict = match (&row.invalid, row.verdict) {
            (Some(_), _) | (None, None) => "Invalid",
            (None, Some(v)) => v.as_str(),
        };
        let _ = write!(out, "{},{verdict}", vals.join(","));
        match &row.estimate {
            Some(e) => {
                let _ = write!(
                    out,
                    ",{},{},{},{},{},{},{},{}",
                    e.n_paths,
                    e.n_extinct,
                    e.n_exploded,
                    e.n_survived,
                    sig9(e.p_hat),
                    sig9(e.ci_lo),
                    sig9(e.ci_hi),
                    e.mean_t_extinct.map(sig9).unwrap_or_default()
                );
            }
            None => out.push_str(",,,,,,,,"),
        }
        out.push('\n');
    }
    out
}
