//! Coefficients of the two-type system, their validation, and the dominant
//! boundary exponents that every downstream decision is based on.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of the coupled SDE system.
///
/// The X equation reads
/// `dX = a1 X^θ1 Y^κ1 dt − b10 X^r10 dt + b11 √(2 X^r11) dB1 + (jumps of intensity b12 X^r12 · μ1)`,
/// and the Y equation is the mirror image with indices swapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub a1: f64,
    pub a2: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub b10: f64,
    pub b11: f64,
    pub b12: f64,
    pub b20: f64,
    pub b21: f64,
    pub b22: f64,
    pub r10: f64,
    pub r11: f64,
    pub r12: f64,
    pub r20: f64,
    pub r21: f64,
    pub r22: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

/// Parameter names in file order.
pub const PARAM_KEYS: [&str; 20] = [
    "a1", "a2", "theta1", "theta2", "kappa1", "kappa2", "b10", "b11", "b12", "b20", "b21", "b22", "r10",
    "r11", "r12", "r20", "r21", "r22", "alpha1", "alpha2",
];

/// Offsets subtracted from the channel exponents: drift 1, diffusion 2, jumps α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Varrho {
    pub drift: f64,
    pub diffusion: f64,
    pub jump1: f64,
    pub jump2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    pub r1: f64,
    pub r2: f64,
    pub b1: f64,
    pub b2: f64,
    pub varrho: Varrho,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
}

impl State {
    pub fn new(x: f64, y: f64) -> Self {
        State { x, y }
    }
}

impl ModelParams {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Load(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Parses a flat JSON object; a missing or unknown key is reported by name.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Load(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }

    pub fn validate(self) -> Result<Self> {
        let fail = |what: &str| Err(Error::ConstraintViolation(what.to_string()));
        for (name, v) in PARAM_KEYS.iter().zip(self.values()) {
            if !v.is_finite() {
                return fail(&format!("{name} finite"));
            }
        }
        if !(self.a1 > 0.0) {
            return fail("a1>0");
        }
        if !(self.a2 > 0.0) {
            return fail("a2>0");
        }
        if !(self.kappa1 > 0.0) {
            return fail("kappa1>0");
        }
        if !(self.kappa2 > 0.0) {
            return fail("kappa2>0");
        }
        let nonneg = [
            ("theta1", self.theta1),
            ("theta2", self.theta2),
            ("b10", self.b10),
            ("b11", self.b11),
            ("b12", self.b12),
            ("b20", self.b20),
            ("b21", self.b21),
            ("b22", self.b22),
            ("r10", self.r10),
            ("r11", self.r11),
            ("r12", self.r12),
            ("r20", self.r20),
            ("r21", self.r21),
            ("r22", self.r22),
        ];
        for (name, v) in nonneg {
            if v < 0.0 {
                return fail(&format!("{name}>=0"));
            }
        }
        if !(self.b11 + self.b12 > 0.0) {
            return fail("b11+b12>0");
        }
        if !(self.b21 + self.b22 > 0.0) {
            return fail("b21+b22>0");
        }
        if !(self.alpha1 > 1.0 && self.alpha1 < 2.0) {
            return fail("alpha1 in (1,2)");
        }
        if !(self.alpha2 > 1.0 && self.alpha2 < 2.0) {
            return fail("alpha2 in (1,2)");
        }
        Ok(self)
    }

    pub fn values(&self) -> [f64; 20] {
        [
            self.a1,
            self.a2,
            self.theta1,
            self.theta2,
            self.kappa1,
            self.kappa2,
            self.b10,
            self.b11,
            self.b12,
            self.b20,
            self.b21,
            self.b22,
            self.r10,
            self.r11,
            self.r12,
            self.r20,
            self.r21,
            self.r22,
            self.alpha1,
            self.alpha2,
        ]
    }

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "a1" => &mut self.a1,
            "a2" => &mut self.a2,
            "theta1" => &mut self.theta1,
            "theta2" => &mut self.theta2,
            "kappa1" => &mut self.kappa1,
            "kappa2" => &mut self.kappa2,
            "b10" => &mut self.b10,
            "b11" => &mut self.b11,
            "b12" => &mut self.b12,
            "b20" => &mut self.b20,
            "b21" => &mut self.b21,
            "b22" => &mut self.b22,
            "r10" => &mut self.r10,
            "r11" => &mut self.r11,
            "r12" => &mut self.r12,
            "r20" => &mut self.r20,
            "r21" => &mut self.r21,
            "r22" => &mut self.r22,
            "alpha1" => &mut self.alpha1,
            "alpha2" => &mut self.alpha2,
            _ => return None,
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        let mut copy = *self;
        copy.slot(name).map(|v| *v)
    }

    /// Returns a copy with one named coefficient replaced (not re-validated).
    pub fn with(&self, name: &str, value: f64) -> Result<Self> {
        let mut copy = *self;
        match copy.slot(name) {
            Some(v) => *v = value,
            None => return Err(Error::Config(format!("unknown parameter '{name}'"))),
        }
        Ok(copy)
    }

    /// Exchanges the roles of the two coordinates.
    pub fn swapped(&self) -> Self {
        ModelParams {
            a1: self.a2,
            a2: self.a1,
            theta1: self.theta2,
            theta2: self.theta1,
            kappa1: self.kappa2,
            kappa2: self.kappa1,
            b10: self.b20,
            b11: self.b21,
            b12: self.b22,
            b20: self.b10,
            b21: self.b11,
            b22: self.b12,
            r10: self.r20,
            r11: self.r21,
            r12: self.r22,
            r20: self.r10,
            r21: self.r11,
            r22: self.r12,
            alpha1: self.alpha2,
            alpha2: self.alpha1,
        }
    }

    /// `(b, r − ϱ)` for the drift, diffusion and jump channels of coordinate 1 or 2.
    pub fn channels(&self, coord: usize) -> [(f64, f64); 3] {
        match coord {
            1 => [
                (self.b10, self.r10 - 1.0),
                (self.b11, self.r11 - 2.0),
                (self.b12, self.r12 - self.alpha1),
            ],
            _ => [
                (self.b20, self.r20 - 1.0),
                (self.b21, self.r21 - 2.0),
                (self.b22, self.r22 - self.alpha2),
            ],
        }
    }
}

/// Dominant exponents with exact tie detection.
pub fn derive_exponents(p: &ModelParams) -> DerivedParams {
    derive_exponents_with_tol(p, 0.0)
}

/// Channels whose shifted exponent is within `tie_tol` of the minimum are summed into `b_i`.
pub fn derive_exponents_with_tol(p: &ModelParams, tie_tol: f64) -> DerivedParams {
    let dominant = |coord: usize| {
        let active: Vec<(f64, f64)> = p.channels(coord).into_iter().filter(|&(b, _)| b != 0.0).collect();
        let r = active.iter().map(|&(_, e)| e).fold(f64::INFINITY, f64::min);
        let b = active
            .iter()
            .filter(|&&(_, e)| e - r <= tie_tol)
            .map(|&(b, _)| b)
            .sum::<f64>();
        (r, b)
    };
    let (r1, b1) = dominant(1);
    let (r2, b2) = dominant(2);
    DerivedParams {
        r1,
        r2,
        b1,
        b2,
        varrho: Varrho {
            drift: 1.0,
            diffusion: 2.0,
            jump1: p.alpha1,
            jump2: p.alpha2,
        },
    }
}

/// Interaction (growth) rates `a1 x^θ1 y^κ1` and `a2 y^θ2 x^κ2`.
pub fn interaction(s: State, p: &ModelParams) -> (f64, f64) {
    (
        p.a1 * s.x.powf(p.theta1) * s.y.powf(p.kappa1),
        p.a2 * s.y.powf(p.theta2) * s.x.powf(p.kappa2),
    )
}

/// Linear-drift decrement rates `b10 x^r10` and `b20 y^r20`.
pub fn drift_decrement(s: State, p: &ModelParams) -> (f64, f64) {
    (p.b10 * s.x.powf(p.r10), p.b20 * s.y.powf(p.r20))
}

pub fn drift(s: State, p: &ModelParams) -> (f64, f64) {
    let (gx, gy) = interaction(s, p);
    let (dx, dy) = drift_decrement(s, p);
    (gx - dx, gy - dy)
}

pub fn diffusion_coeff(s: State, p: &ModelParams) -> (f64, f64) {
    (
        p.b11 * (2.0 * s.x.powf(p.r11)).sqrt(),
        p.b21 * (2.0 * s.y.powf(p.r21)).sqrt(),
    )
}

pub fn jump_scale(s: State, p: &ModelParams) -> (f64, f64) {
    (p.b12 * s.x.powf(p.r12), p.b22 * s.y.powf(p.r22))
}

#[cfg(test)]
pub(crate) fn base_params() -> ModelParams {
    ModelParams {
        a1: 1.0,
        a2: 1.0,
        theta1: 0.0,
        theta2: 0.0,
        kappa1: 1.0,
        kappa2: 1.0,
        b10: 0.0,
        b11: 1.0,
        b12: 0.0,
        b20: 0.0,
        b21: 0.0,
        b22: 1.0,
        r10: 0.0,
        r11: 2.0,
        r12: 0.0,
        r20: 0.0,
        r21: 0.0,
        r22: 1.5,
        alpha1: 1.5,
        alpha2: 1.5,
    }
}
