//! Delay kernels for the five feedback/feedforward pathways.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel {pathway}: {reason}")]
    Invalid {
        pathway: &'static str,
        reason: String,
    },
    #[error("all pathways must use the same kernel family")]
    MixedFamilies,
    #[error("Gamma kernels must share one scale theta (found {0} and {1})")]
    NonSharedTheta(f64, f64),
    #[error("kernels violate the composite-delay constraint: {0}")]
    Constraint(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Dirac,
    Gamma,
}

/// A normalized delay kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelSpec {
    /// Discrete delay `x(t - tau)`.
    Dirac { tau: f64 },
    /// Erlang density of integer order (0 = no delay) and scale `theta`.
    Gamma { order: u32, theta: f64 },
}

impl KernelSpec {
    pub fn family(&self) -> KernelFamily {
        match self {
            KernelSpec::Dirac { .. } => KernelFamily::Dirac,
            KernelSpec::Gamma { .. } => KernelFamily::Gamma,
        }
    }

    /// Average delay in minutes.
    pub fn mean_delay(&self) -> f64 {
        match *self {
            KernelSpec::Dirac { tau } => tau,
            KernelSpec::Gamma { order, theta } => order as f64 * theta,
        }
    }

    fn validate(&self, pathway: &'static str) -> Result<(), KernelError> {
        let bad = |reason: &str| KernelError::Invalid {
            pathway,
            reason: reason.into(),
        };
        match *self {
            KernelSpec::Dirac { tau } if !(tau.is_finite() && tau >= 0.0) => {
                Err(bad("tau must be finite and >= 0"))
            }
            KernelSpec::Gamma { theta, .. } if !(theta.is_finite() && theta > 0.0) => {
                Err(bad("theta must be finite and > 0"))
            }
            _ => Ok(()),
        }
    }
}

/// The parameter along which Hopf crossings are computed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BifurcationParameter {
    /// Total discrete delay around the loop.
    Dirac { tau: f64 },
    /// Total Gamma order and shared scale.
    Gamma { order: u32, theta: f64 },
}

/// Kernels `h1, h2, h31, h32, h34`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathwayKernels {
    /// CRH → ACTH.
    pub h1: KernelSpec,
    /// ACTH → cortisol.
    pub h2: KernelSpec,
    /// Cortisol → hypothalamus.
    pub h31: KernelSpec,
    /// Cortisol → pituitary (via GR).
    pub h32: KernelSpec,
    /// Cortisol → GR self-upregulation.
    pub h34: KernelSpec,
}

pub const PATHWAYS: [&str; 5] = ["h1", "h2", "h31", "h32", "h34"];

impl PathwayKernels {
    pub fn dirac(tau1: f64, tau2: f64, tau31: f64, tau32: f64, tau34: f64) -> Self {
        let d = |tau| KernelSpec::Dirac { tau };
        PathwayKernels {
            h1: d(tau1),
            h2: d(tau2),
            h31: d(tau31),
            h32: d(tau32),
            h34: d(tau34),
        }
    }

    /// Gamma kernels with a shared scale; orders are `[p1, p2, p31, p32, p34]`.
    pub fn gamma(theta: f64, orders: [u32; 5]) -> Self {
        let g = |order| KernelSpec::Gamma { order, theta };
        PathwayKernels {
            h1: g(orders[0]),
            h2: g(orders[1]),
            h31: g(orders[2]),
            h32: g(orders[3]),
            h34: g(orders[4]),
        }
    }

    pub fn all(&self) -> [(&'static str, &KernelSpec); 5] {
        [
            ("h1", &self.h1),
            ("h2", &self.h2),
            ("h31", &self.h31),
            ("h32", &self.h32),
            ("h34", &self.h34),
        ]
    }

    /// Checks each kernel and that the family (and for Gamma, the scale) is shared.
    pub fn validate(&self) -> Result<KernelFamily, KernelError> {
        for (name, k) in self.all() {
            k.validate(name)?;
        }
        let family = self.h1.family();
        if self.all().iter().any(|(_, k)| k.family() != family) {
            return Err(KernelError::MixedFamilies);
        }
        if family == KernelFamily::Gamma {
            self.shared_theta()?;
        }
        Ok(family)
    }

    fn shared_theta(&self) -> Result<f64, KernelError> {
        let mut theta = None;
        for (_, k) in self.all() {
            if let KernelSpec::Gamma { theta: t, .. } = *k {
                match theta {
                    None => theta = Some(t),
                    Some(s) if s != t => return Err(KernelError::NonSharedTheta(s, t)),
                    _ => {}
                }
            }
        }
        theta.ok_or(KernelError::MixedFamilies)
    }

    /// Largest discrete delay (0 for Gamma kernels).
    pub fn max_dirac_delay(&self) -> f64 {
        self.all()
            .iter()
            .filter_map(|(_, k)| match k {
                KernelSpec::Dirac { tau } => Some(*tau),
                _ => None,
            })
            .fold(0.0, f64::max)
    }

    /// Total average delay along the ACTH → cortisol → pituitary loop.
    pub fn total_delay(&self) -> f64 {
        self.h2.mean_delay() + self.h32.mean_delay()
    }

    /// Checks `h32 = h34 = h1 * h31` in the sense of average delays (Dirac)
    /// or orders (Gamma) and returns the bifurcation parameter.
    pub fn bifurcation_parameter(&self) -> Result<BifurcationParameter, KernelError> {
        match self.validate()? {
            KernelFamily::Dirac => {
                let t = |k: &KernelSpec| k.mean_delay();
                let a = t(&self.h2) + t(&self.h32);
                let b = t(&self.h2) + t(&self.h34);
                let c = t(&self.h1) + t(&self.h2) + t(&self.h31);
                let scale = a.abs().max(1.0);
                if (a - b).abs() > 1e-9 * scale || (a - c).abs() > 1e-9 * scale {
                    return Err(KernelError::Constraint(format!(
                        "tau2+tau32 = {a}, tau2+tau34 = {b}, tau1+tau2+tau31 = {c}"
                    )));
                }
                if a <= 0.0 {
                    return Err(KernelError::Constraint("total delay must be > 0".into()));
                }
                Ok(BifurcationParameter::Dirac { tau: a })
            }
            KernelFamily::Gamma => {
                let p = |k: &KernelSpec| match *k {
                    KernelSpec::Gamma { order, .. } => order,
                    _ => 0,
                };
                let a = p(&self.h2) + p(&self.h32);
                let b = p(&self.h2) + p(&self.h34);
                let c = p(&self.h1) + p(&self.h2) + p(&self.h31);
                if a != b || a != c {
                    return Err(KernelError::Constraint(format!(
                        "p2+p32 = {a}, p2+p34 = {b}, p1+p2+p31 = {c}"
                    )));
                }
                if a < 2 {
                    return Err(KernelError::Constraint("total order must be >= 2".into()));
                }
                Ok(BifurcationParameter::Gamma {
                    order: a,
                    theta: self.shared_theta()?,
                })
            }
        }
    }

    /// Dirac kernels with every delay multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let s = |k: KernelSpec| match k {
            KernelSpec::Dirac { tau } => KernelSpec::Dirac { tau: tau * factor },
            other => other,
        };
        PathwayKernels {
            h1: s(self.h1),
            h2: s(self.h2),
            h31: s(self.h31),
            h32: s(self.h32),
            h34: s(self.h34),
        }
    }

    /// Gamma kernels with the shared scale replaced.
    pub fn with_theta(&self, theta: f64) -> Self {
        let s = |k: KernelSpec| match k {
            KernelSpec::Gamma { order, .. } => KernelSpec::Gamma { order, theta },
            other => other,
        };
        PathwayKernels {
            h1: s(self.h1),
            h2: s(self.h2),
            h31: s(self.h31),
            h32: s(self.h32),
            h34: s(self.h34),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_constraint() {
        let k = PathwayKernels::dirac(0.0, 30.0, 20.0, 20.0, 20.0);
        assert_eq!(
            k.bifurcation_parameter().unwrap(),
            BifurcationParameter::Dirac { tau: 50.0 }
        );
        let bad = PathwayKernels::dirac(0.0, 30.0, 20.0, 25.0, 20.0);
        assert!(matches!(
            bad.bifurcation_parameter(),
            Err(KernelError::Constraint(_))
        ));
        assert_eq!(k.scaled(0.4).total_delay(), 20.0);
    }

    #[test]
    fn gamma_constraint_and_theta() {
        let k = PathwayKernels::gamma(19.0, [0, 2, 2, 2, 2]);
        assert_eq!(
            k.bifurcation_parameter().unwrap(),
            BifurcationParameter::Gamma {
                order: 4,
                theta: 19.0
            }
        );
        assert_eq!(k.total_delay(), 76.0);
        let mut mixed = k;
        mixed.h31 = KernelSpec::Gamma {
            order: 2,
            theta: 10.0,
        };
        assert_eq!(
            mixed.validate(),
            Err(KernelError::NonSharedTheta(19.0, 10.0))
        );
        mixed.h31 = KernelSpec::Dirac { tau: 3.0 };
        assert_eq!(mixed.validate(), Err(KernelError::MixedFamilies));
        assert_eq!(k.with_theta(12.0).h2.mean_delay(), 24.0);
    }

    #[test]
    fn rejects_negative_delay() {
        let k = PathwayKernels::dirac(-1.0, 30.0, 20.0, 20.0, 20.0);
        assert!(matches!(
            k.validate(),
            Err(KernelError::Invalid { pathway: "h1", .. })
        ));
    }
}
