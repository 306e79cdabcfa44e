//! Feedback nonlinearities.
//!
//! The model needs two inhibitory feedbacks (`f1`, `f2`: strictly decreasing,
//! values in `(0, 1]`, `f(0) = 1`) and one activating feedback (`f3`: strictly
//! increasing, values in `[0, 1)`, `f(0) = 0`). Hill functions are the shipped
//! implementation; anything else can be plugged in through [`Feedback`].

use std::fmt;

use crate::roots::{bisect, expand_upper};
use crate::ModelError;

/// Direction of a feedback: inhibitory feedbacks decrease, activating ones increase.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Decreasing,
    Increasing,
}

/// A smooth, bounded, strictly monotone feedback function on `[0, ∞)`.
pub trait Feedback: Send + Sync + fmt::Debug {
    /// Value at `u`. Callers must pass `u >= 0`; implementations may clamp.
    fn value(&self, u: f64) -> f64;

    /// First derivative at `u >= 0`.
    fn derivative(&self, u: f64) -> f64;

    fn monotonicity(&self) -> Monotonicity;

    /// Open/closed value range `(inf, sup)` over `[0, ∞)`.
    fn range(&self) -> (f64, f64);

    /// Inverse function. The default brackets the preimage by doubling and
    /// bisects to 1e-12 relative.
    fn inverse(&self, y: f64) -> Result<f64, ModelError> {
        let (lo, hi) = self.range();
        let inside = match self.monotonicity() {
            Monotonicity::Decreasing => y > lo && y <= hi,
            Monotonicity::Increasing => y >= lo && y < hi,
        };
        if !inside {
            return Err(ModelError::Domain {
                what: "feedback inverse",
                value: y,
                bound: format!("value must lie in the feedback range ({lo}, {hi})"),
            });
        }
        if self.value(0.0) == y {
            return Ok(0.0);
        }
        let g = |u: f64| self.value(u) - y;
        let upper = expand_upper(&g, 1.0, 200).ok_or(ModelError::Domain {
            what: "feedback inverse",
            value: y,
            bound: "no bracket found".into(),
        })?;
        Ok(bisect(&g, 0.0, upper, 1e-12 * upper.max(1e-300), 400).unwrap_or(upper))
    }

    /// Checked evaluation: rejects negative or non-finite arguments.
    fn eval(&self, u: f64) -> Result<f64, ModelError> {
        check_argument(u)?;
        Ok(self.value(u))
    }

    /// Checked derivative.
    fn eval_derivative(&self, u: f64) -> Result<f64, ModelError> {
        check_argument(u)?;
        Ok(self.derivative(u))
    }
}

fn check_argument(u: f64) -> Result<(), ModelError> {
    if u.is_finite() && u >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::Domain {
            what: "feedback argument",
            value: u,
            bound: "must be a finite concentration >= 0".into(),
        })
    }
}

/// Hill function `1 - depth * s(u)` (decreasing) or `s(u)` (increasing), with
/// `s(u) = u^n / (c^n + u^n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hill {
    pub depth: f64,
    pub exponent: f64,
    pub half_saturation: f64,
    pub monotonicity: Monotonicity,
}

impl Hill {
    pub fn inhibitory(depth: f64, exponent: f64, half_saturation: f64) -> Self {
        Hill {
            depth,
            exponent,
            half_saturation,
            monotonicity: Monotonicity::Decreasing,
        }
    }

    pub fn activating(exponent: f64, half_saturation: f64) -> Self {
        Hill {
            depth: 1.0,
            exponent,
            half_saturation,
            monotonicity: Monotonicity::Increasing,
        }
    }

    /// Saturating part `u^n / (c^n + u^n)`.
    fn saturation(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let r = (self.half_saturation / u).powf(self.exponent);
        1.0 / (1.0 + r)
    }

    /// `d/du u^n / (c^n + u^n) = (n / c) r^(n-1) / (1 + r^n)^2` with `r = u / c`.
    fn saturation_slope(&self, u: f64) -> f64 {
        let u = u.max(0.0);
        let n = self.exponent;
        let c = self.half_saturation;
        let r = u / c;
        let rn = r.powf(n);
        if !rn.is_finite() {
            return 0.0;
        }
        n / c * r.powf(n - 1.0) / ((1.0 + rn) * (1.0 + rn))
    }
}

impl Feedback for Hill {
    fn value(&self, u: f64) -> f64 {
        let s = self.saturation(u);
        match self.monotonicity {
            Monotonicity::Decreasing => 1.0 - self.depth * s,
            Monotonicity::Increasing => self.depth * s,
        }
    }

    fn derivative(&self, u: f64) -> f64 {
        let ds = self.saturation_slope(u);
        match self.monotonicity {
            Monotonicity::Decreasing => -self.depth * ds,
            Monotonicity::Increasing => self.depth * ds,
        }
    }

    fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    fn range(&self) -> (f64, f64) {
        match self.monotonicity {
            Monotonicity::Decreasing => (1.0 - self.depth, 1.0),
            Monotonicity::Increasing => (0.0, self.depth),
        }
    }

    fn inverse(&self, y: f64) -> Result<f64, ModelError> {
        let (lo, hi) = self.range();
        // fraction of the saturating part that produces y
        let s = match self.monotonicity {
            Monotonicity::Decreasing if y > lo && y <= hi => (1.0 - y) / self.depth,
            Monotonicity::Increasing if y >= lo && y < hi => y / self.depth,
            _ => {
                return Err(ModelError::Domain {
                    what: "feedback inverse",
                    value: y,
                    bound: format!("value must lie in the feedback range ({lo}, {hi}]"),
                })
            }
        };
        if s <= 0.0 {
            return Ok(0.0);
        }
        Ok(self.half_saturation * (s / (1.0 - s)).powf(1.0 / self.exponent))
    }
}
