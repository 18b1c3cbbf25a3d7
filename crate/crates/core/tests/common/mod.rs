//! Fixtures shared by the integration tests and the acceptance gate.
#![allow(dead_code)]

use csbp_lab::criteria::Verdict;
use csbp_lab::model::ModelParams;
use rand::Rng;

/// Diffusion-only channels with zero shifted exponents, θ = 0, κ = 0.5.
pub fn diffusive() -> ModelParams {
    ModelParams {
        a1: 1.0,
        a2: 1.0,
        theta1: 0.0,
        theta2: 0.0,
        kappa1: 0.5,
        kappa2: 0.5,
        b10: 0.0,
        b11: 1.0,
        b12: 0.0,
        b20: 0.0,
        b21: 1.0,
        b22: 0.0,
        r10: 0.0,
        r11: 2.0,
        r12: 0.0,
        r20: 0.0,
        r21: 2.0,
        r22: 0.0,
        alpha1: 1.5,
        alpha2: 1.5,
    }
}

pub struct Fixture {
    pub name: &'static str,
    pub params: ModelParams,
    pub verdict: Verdict,
    pub matched: &'static [&'static str],
}

/// Hand-checked classifier regression cases. Each comment gives the arithmetic.
pub fn classifier_fixtures() -> Vec<Fixture> {
    let d = diffusive();
    let drift_critical = ModelParams {
        // r = 0.5 − 1 = −0.5 through the drift, diffusion exponent 0; (0.5)(0.5) = κ1κ2.
        b10: 1.0,
        b20: 1.0,
        r10: 0.5,
        r20: 0.5,
        ..d
    };
    let symmetric = ModelParams {
        // Drift and diffusion tie at −0.5, so b1 = b2 = 2.
        b10: 1.0,
        b20: 1.0,
        r10: 0.5,
        r20: 0.5,
        r11: 1.5,
        r21: 1.5,
        ..d
    };
    use Verdict::*;
    vec![
        Fixture {
            name: "both exponents positive",
            params: ModelParams {
                r11: 2.5,
                r21: 2.5,
                ..d
            },
            verdict: NonExtinctionAS,
            matched: &["nonnegative-exponents"],
        },
        Fixture {
            name: "x nonnegative, y interior",
            params: ModelParams {
                r11: 2.5,
                r21: 1.7,
                ..d
            },
            verdict: NonExtinctionAS,
            matched: &["x-nonnegative"],
        },
        Fixture {
            name: "y nonnegative, x interior",
            params: ModelParams {
                r11: 1.7,
                r21: 2.0,
                ..d
            },
            verdict: NonExtinctionAS,
            matched: &["y-nonnegative"],
        },
        Fixture {
            // 0.49 > 0.25
            name: "strong interaction",
            params: ModelParams {
                r11: 1.7,
                r21: 1.7,
                ..d
            },
            verdict: NonExtinctionAS,
            matched: &["strong-interaction"],
        },
        Fixture {
            // r1 = 1.2 − 1.5 = −0.3 from jumps alone, 0.49 > 0.25
            name: "strong interaction with jump-driven x",
            params: ModelParams {
                b11: 0.0,
                b12: 1.0,
                r12: 1.2,
                r21: 1.7,
                ..d
            },
            verdict: NonExtinctionAS,
            matched: &["strong-interaction"],
        },
        Fixture {
            // balance (2·2)^{1/0.5} = 16 > 1
            name: "critical, drift dominant, strong balance",
            params: ModelParams {
                a1: 2.0,
                a2: 2.0,
                ..drift_critical
            },
            verdict: NonExtinctionAS,
            matched: &["critical-strong-drift"],
        },
        Fixture {
            // a1a2 = 9 ≥ b1b2 = 4
            name: "critical symmetric diffusive",
            params: ModelParams {
                a1: 3.0,
                a2: 3.0,
                ..symmetric
            },
            verdict: NonExtinctionAS,
            matched: &["critical-symmetric"],
        },
        Fixture {
            // a1a2 = b1b2 = 4, balance exactly 1
            name: "critical symmetric at balance",
            params: ModelParams {
                a1: 2.0,
                a2: 2.0,
                ..symmetric
            },
            verdict: NonExtinctionAS,
            matched: &["critical-symmetric", "critical-symmetric-balanced"],
        },
        Fixture {
            // r1 = −0.5 ≤ θ1 − 1 = −0.2
            name: "x fast decay",
            params: ModelParams {
                theta1: 0.8,
                r11: 1.5,
                r21: 2.5,
                ..d
            },
            verdict: ExtinctionPositiveProb,
            matched: &["x-fast-decay"],
        },
        Fixture {
            name: "y fast decay",
            params: ModelParams {
                theta2: 0.8,
                r21: 1.5,
                r11: 2.5,
                ..d
            },
            verdict: ExtinctionPositiveProb,
            matched: &["y-fast-decay"],
        },
        Fixture {
            // r = −0.3 via drift, 0.49 < 0.64, both drifts lead
            name: "weak interaction, both drifts dominant",
            params: ModelParams {
                kappa1: 0.8,
                kappa2: 0.8,
                b10: 1.0,
                b20: 1.0,
                r10: 0.7,
                r20: 0.7,
                ..d
            },
            verdict: ExtinctionPositiveProb,
            matched: &["weak-interaction-drift"],
        },
        Fixture {
            // r1 = −0.7 via drift, r2 = −0.2, no y drift; 0.3/0.8 < 3.5 and 0.24 < 0.64
            name: "weak interaction, x drift dominant alone",
            params: ModelParams {
                kappa1: 0.8,
                kappa2: 0.8,
                b10: 1.0,
                r10: 0.3,
                r21: 1.8,
                ..d
            },
            verdict: ExtinctionPositiveProb,
            matched: &["weak-interaction-drift"],
        },
        Fixture {
            // r = −0.3 via diffusion, drifts at 0; 0.49 < 0.6; ratio-y: 1 < 1/0.7
            name: "weak interaction, diffusive",
            params: ModelParams {
                kappa1: 1.0,
                kappa2: 0.6,
                b10: 1.0,
                b20: 1.0,
                r10: 1.0,
                r20: 1.0,
                r11: 1.7,
                r21: 1.7,
                ..d
            },
            verdict: ExtinctionPositiveProb,
            matched: &["weak-interaction-diffusive"],
        },
        Fixture {
            // 0.45 < 0.6 and 0.55 < 0.6; every ratio and offset alternative fails
            name: "weak cross terms, diffusive",
            params: ModelParams {
                theta1: 0.4,
                theta2: 0.2,
                kappa1: 0.6,
                kappa2: 0.6,
                b10: 1.0,
                b20: 1.0,
                r10: 2.0,
                r20: 2.0,
                r11: 1.85,
                r21: 1.75,
                ..d
            },
            verdict: ExtinctionPositiveProb,
            matched: &["weak-cross-diffusive"],
        },
        Fixture {
            // κ = 0.8, r = −0.3 via diffusion with recessive drifts: both diffusive results
            name: "weak interaction, symmetric diffusive",
            params: ModelParams {
                kappa1: 0.8,
                kappa2: 0.8,
                b10: 1.0,
                b20: 1.0,
                r10: 1.0,
                r20: 1.0,
                r11: 1.7,
                r21: 1.7,
                ..d
            },
            verdict: ExtinctionPositiveProb,
            matched: &["weak-interaction-diffusive", "weak-cross-diffusive"],
        },
        Fixture {
            // balance (0.25)^2 < 1
            name: "critical, drift dominant, weak balance",
            params: ModelParams {
                a1: 0.5,
                a2: 0.5,
                ..drift_critical
            },
            verdict: ExtinctionPositiveProb,
            matched: &["critical-weak-drift"],
        },
        Fixture {
            // 0.49 < 0.64 but no drift at all: no result applies
            name: "weak interaction without drift",
            params: ModelParams {
                kappa1: 0.8,
                kappa2: 0.8,
                r11: 1.7,
                r21: 1.7,
                ..d
            },
            verdict: Undetermined,
            matched: &[],
        },
    ]
}

fn pick<R: Rng + ?Sized>(rng: &mut R, values: &[f64]) -> f64 {
    values[rng.random_range(0..values.len())]
}

/// Random valid parameters biased toward ties, inactive channels and the
/// critical surface, where transcription errors would show up.
pub fn random_params<R: Rng + ?Sized>(rng: &mut R) -> ModelParams {
    let coef = |rng: &mut R| {
        if rng.random_bool(0.3) {
            0.0
        } else {
            pick(rng, &[0.25, 0.5, 1.0, 2.0, 4.0]) * rng.random_range(0.5..1.5)
        }
    };
    let expo = |rng: &mut R| {
        if rng.random_bool(0.5) {
            pick(rng, &[0.0, 0.3, 0.5, 0.7, 1.0, 1.2, 1.5, 1.7, 2.0, 2.5, 3.0])
        } else {
            rng.random_range(0.0..3.5)
        }
    };
    let mut p = ModelParams {
        a1: rng.random_range(0.1..4.0),
        a2: rng.random_range(0.1..4.0),
        theta1: pick(rng, &[0.0, 0.0, 0.2, 0.5, 0.8, 1.0, 1.3]),
        theta2: pick(rng, &[0.0, 0.0, 0.2, 0.5, 0.8, 1.0, 1.3]),
        kappa1: pick(rng, &[0.2, 0.5, 0.6, 0.8, 1.0, 1.5]),
        kappa2: pick(rng, &[0.2, 0.5, 0.6, 0.8, 1.0, 1.5]),
        b10: coef(rng),
        b11: coef(rng),
        b12: coef(rng),
        b20: coef(rng),
        b21: coef(rng),
        b22: coef(rng),
        r10: expo(rng),
        r11: expo(rng),
        r12: expo(rng),
        r20: expo(rng),
        r21: expo(rng),
        r22: expo(rng),
        alpha1: pick(rng, &[1.2, 1.5, 1.8]),
        alpha2: pick(rng, &[1.2, 1.5, 1.8]),
    };
    if p.b11 + p.b12 == 0.0 {
        p.b11 = 1.0;
    }
    if p.b21 + p.b22 == 0.0 {
        p.b22 = 1.0;
    }
    if rng.random_bool(0.25) {
        // Land on the critical surface by solving for κ2.
        let dp = csbp_lab::model::derive_exponents(&p);
        let k2 = (dp.r1 + 1.0 - p.theta1) * (dp.r2 + 1.0 - p.theta2) / p.kappa1;
        if k2 > 0.0 {
            p.kappa2 = k2;
        }
    }
    p
}

/// r1 = r2 = 0 through geometric-type diffusion: every path should stay away from 0.
pub fn mc_nonnegative() -> ModelParams {
    diffusive()
}

/// X decays through a dominant drift: r1 = 0.1 − 1 = −0.9 ≤ θ1 − 1 = −0.8,
/// with a weak interaction (a1 = 0.1, κ1 = 2) and a diffusive Y at r2 = 0.
pub fn mc_fast_decay() -> ModelParams {
    ModelParams {
        a1: 0.1,
        theta1: 0.2,
        kappa1: 2.0,
        b10: 2.0,
        r10: 0.1,
        ..diffusive()
    }
}

pub fn mc_config(n_paths: u64, seed: u64, workers: Option<usize>) -> csbp_lab::montecarlo::McConfig {
    csbp_lab::montecarlo::McConfig {
        n_paths,
        sim: csbp_lab::simulator::SimConfig {
            dt: 1e-3,
            t_max: 5.0,
            eps_extinct: 1e-8,
            seed,
            ..Default::default()
        },
        workers,
        x0: 1.0,
        y0: 1.0,
    }
}
