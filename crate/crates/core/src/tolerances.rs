//! Numerical tolerances and resolutions. Every threshold used by the solvers
//! and classifiers lives here so a run can echo the full set it used.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Uniform grid size for the equilibrium sign-change scan.
    pub equilibrium_grid_points: usize,
    /// Relative margin kept away from both ends of the feasible interval.
    pub equilibrium_margin: f64,
    /// Bisection stopping width relative to the upper feasible bound.
    pub equilibrium_xtol: f64,
    /// |residual| below which a grid point without sign change counts as a tangency.
    pub tangency_residual: f64,
    /// Relative bracket width for the unit-modulus frequency.
    pub omega_rel_tol: f64,
    /// Grid size for the Gamma crossing scan over (0, ω0).
    pub gamma_grid_points: usize,
    /// Maximum characteristic-equation residual accepted at a crossing.
    pub crossing_residual: f64,
    /// Agreement required between the atan2 and arccos forms of τ_p.
    pub arccos_agreement: f64,
    /// Negative values below -slack count as positivity violations.
    pub positivity_slack: f64,
    /// Absolute slack for the invariant-box check.
    pub box_slack: f64,
    /// Leading fraction of a trajectory discarded before cycle analysis.
    pub transient_fraction: f64,
    /// Minimum number of x3 maxima for a limit cycle.
    pub cycle_min_peaks: usize,
    /// Maximum coefficient of variation of inter-peak spacing.
    pub cycle_period_cv: f64,
    /// Noise floor and prominence threshold, relative to the channel mean.
    pub noise_floor_rel: f64,
    /// Drop in log peak-to-peak amplitude across the analysis window that
    /// marks an oscillation as damped.
    pub envelope_decay: f64,
    /// Relative perturbation used for "near equilibrium" initial histories.
    pub neighborhood_perturbation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            equilibrium_grid_points: 10_000,
            equilibrium_margin: 1e-9,
            equilibrium_xtol: 1e-12,
            tangency_residual: 1e-8,
            omega_rel_tol: 1e-12,
            gamma_grid_points: 10_000,
            crossing_residual: 1e-7,
            arccos_agreement: 1e-9,
            positivity_slack: 1e-9,
            box_slack: 1e-6,
            transient_fraction: 0.2,
            cycle_min_peaks: 4,
            cycle_period_cv: 0.05,
            noise_floor_rel: 1e-4,
            envelope_decay: 0.02,
            neighborhood_perturbation: 0.01,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ToleranceError {
    #[error("unknown tolerance '{0}'")]
    Unknown(String),
    #[error("tolerance '{name}': cannot parse '{value}'")]
    Parse { name: String, value: String },
}

impl Tolerances {
    /// Overrides one tolerance by name from its textual value.
    pub fn set(&mut self, name: &str, value: &str) -> Result<(), ToleranceError> {
        fn parse<T: std::str::FromStr>(name: &str, value: &str) -> Result<T, ToleranceError> {
            value.trim().parse().map_err(|_| ToleranceError::Parse {
                name: name.to_string(),
                value: value.to_string(),
            })
        }
        match name {
            "equilibrium_grid_points" => self.equilibrium_grid_points = parse(name, value)?,
            "equilibrium_margin" => self.equilibrium_margin = parse(name, value)?,
            "equilibrium_xtol" => self.equilibrium_xtol = parse(name, value)?,
            "tangency_residual" => self.tangency_residual = parse(name, value)?,
            "omega_rel_tol" => self.omega_rel_tol = parse(name, value)?,
            "gamma_grid_points" => self.gamma_grid_points = parse(name, value)?,
            "crossing_residual" => self.crossing_residual = parse(name, value)?,
            "arccos_agreement" => self.arccos_agreement = parse(name, value)?,
            "positivity_slack" => self.positivity_slack = parse(name, value)?,
            "box_slack" => self.box_slack = parse(name, value)?,
            "transient_fraction" => self.transient_fraction = parse(name, value)?,
            "cycle_min_peaks" => self.cycle_min_peaks = parse(name, value)?,
            "cycle_period_cv" => self.cycle_period_cv = parse(name, value)?,
            "noise_floor_rel" => self.noise_floor_rel = parse(name, value)?,
            "envelope_decay" => self.envelope_decay = parse(name, value)?,
            "neighborhood_perturbation" => self.neighborhood_perturbation = parse(name, value)?,
            _ => return Err(ToleranceError::Unknown(name.to_string())),
        }
        Ok(())
    }

    /// All tolerances as `(name, value)` text pairs.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            (
                "equilibrium_grid_points",
                self.equilibrium_grid_points.to_string(),
            ),
            ("equilibrium_margin", self.equilibrium_margin.to_string()),
            ("equilibrium_xtol", self.equilibrium_xtol.to_string()),
            ("tangency_residual", self.tangency_residual.to_string()),
            ("omega_rel_tol", self.omega_rel_tol.to_string()),
            ("gamma_grid_points", self.gamma_grid_points.to_string()),
            ("crossing_residual", self.crossing_residual.to_string()),
            ("arccos_agreement", self.arccos_agreement.to_string()),
            ("positivity_slack", self.positivity_slack.to_string()),
            ("box_slack", self.box_slack.to_string()),
            ("transient_fraction", self.transient_fraction.to_string()),
            ("cycle_min_peaks", self.cycle_min_peaks.to_string()),
            ("cycle_period_cv", self.cycle_period_cv.to_string()),
            ("noise_floor_rel", self.noise_floor_rel.to_string()),
            ("envelope_decay", self.envelope_decay.to_string()),
            (
                "neighborhood_perturbation",
                self.neighborhood_perturbation.to_string(),
            ),
        ]
    }
}
