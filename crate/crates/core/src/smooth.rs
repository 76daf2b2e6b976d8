//! The radial cut-off profile `ψ` and the rising step `η` used by the twist.
//!
//! Both are built from the classical transition `S(u) = s(u) / (s(u) + s(1-u))`
//! with `s(u) = exp(-k/u)` for `u > 0` and `0` otherwise. `S` is smooth, equals
//! `0` for `u <= 0` and `1` for `u >= 1`, and is monotone in between.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmoothError {
    #[error("radius must be non-negative, got {0}")]
    NegativeRadius(f64),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
}

fn s(u: f64, k: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-k / u).exp()
    }
}

/// `S(u)` on the real line.
pub fn smooth_step(u: f64, k: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = s(u, k);
    let b = s(1.0 - u, k);
    a / (a + b)
}

/// `S'(u)`.
pub fn smooth_step_prime(u: f64, k: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let v = 1.0 - u;
    let a = s(u, k);
    let b = s(v, k);
    let denom = a + b;
    a * b * (k / (u * u) + k / (v * v)) / (denom * denom)
}

/// The cut-off `ψ`: identically `1` on `[0, plateau_end]`, identically `0` on
/// `[support_end, ∞)`, smooth and non-increasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub plateau_end: f64,
    pub support_end: f64,
    pub steepness: f64,
}

impl Default for BumpProfile {
    fn default() -> Self {
        BumpProfile { plateau_end: 1.0 / 3.0, support_end: 0.6, steepness: 1.0 }
    }
}

impl BumpProfile {
    pub fn new(plateau_end: f64, support_end: f64, steepness: f64) -> Result<Self, SmoothError> {
        let p = BumpProfile { plateau_end, support_end, steepness };
        p.validate()?;
        Ok(p)
    }

    /// The plateau must cover the inner region `r <= 1/3` and the support must
    /// stay strictly below `2/3`.
    pub fn validate(&self) -> Result<(), SmoothError> {
        let bad = |m: String| Err(SmoothError::InvalidProfile(m));
        if !(self.plateau_end.is_finite() && self.support_end.is_finite()) {
            return bad("non-finite radii".into());
        }
        if self.plateau_end < 1.0 / 3.0 {
            return bad(format!("plateau_end {} below 1/3", self.plateau_end));
        }
        if self.plateau_end >= self.support_end {
            return bad(format!(
                "plateau_end {} must be below support_end {}",
                self.plateau_end, self.support_end
            ));
        }
        if self.support_end >= 2.0 / 3.0 {
            return bad(format!("support_end {} must be below 2/3", self.support_end));
        }
        if !(self.steepness > 0.0 && self.steepness.is_finite()) {
            return bad(format!("steepness {} must be positive", self.steepness));
        }
        Ok(())
    }

    fn width(&self) -> f64 {
        self.support_end - self.plateau_end
    }

    /// `ψ(r)` without the domain check.
    pub fn value(&self, r: f64) -> f64 {
        if r <= self.plateau_end {
            return 1.0;
        }
        if r >= self.support_end {
            return 0.0;
        }
        smooth_step((self.support_end - r) / self.width(), self.steepness)
    }

    /// `ψ'(r)` without the domain check.
    pub fn derivative(&self, r: f64) -> f64 {
        if r <= self.plateau_end || r >= self.support_end {
            return 0.0;
        }
        -smooth_step_prime((self.support_end - r) / self.width(), self.steepness) / self.width()
    }
}

pub fn psi(profile: &BumpProfile, r: f64) -> Result<f64, SmoothError> {
    if r < 0.0 || r.is_nan() {
        return Err(SmoothError::NegativeRadius(r));
    }
    Ok(profile.value(r))
}

pub fn psi_prime(profile: &BumpProfile, r: f64) -> Result<f64, SmoothError> {
    if r < 0.0 || r.is_nan() {
        return Err(SmoothError::NegativeRadius(r));
    }
    Ok(profile.derivative(r))
}

/// The rising step `η: [0,1] -> [0,1]` of the collar twist; constant `0` on
/// `[0, rise_start]` and constant `1` on `[rise_end, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwistProfile {
    pub rise_start: f64,
    pub rise_end: f64,
    pub steepness: f64,
}

impl Default for TwistProfile {
    fn default() -> Self {
        TwistProfile { rise_start: 0.1, rise_end: 0.9, steepness: 1.0 }
    }
}

impl TwistProfile {
    pub fn validate(&self) -> Result<(), SmoothError> {
        if !(0.0 < self.rise_start && self.rise_start < self.rise_end && self.rise_end < 1.0) {
            return Err(SmoothError::InvalidProfile(format!(
                "twist rise [{}, {}] must sit strictly inside (0, 1)",
                self.rise_start, self.rise_end
            )));
        }
        if !(self.steepness > 0.0 && self.steepness.is_finite()) {
            return Err(SmoothError::InvalidProfile("steepness must be positive".into()));
        }
        Ok(())
    }

    pub fn value(&self, u: f64) -> f64 {
        smooth_step((u - self.rise_start) / (self.rise_end - self.rise_start), self.steepness)
    }

    pub fn derivative(&self, u: f64) -> f64 {
        let w = self.rise_end - self.rise_start;
        smooth_step_prime((u - self.rise_start) / w, self.steepness) / w
    }
}
