//! The five subcommands. Each writes a CSV table and a text report into the
//! output directory, both carrying the manifest header, and prints the report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hpa_core::equilibria::EquilibriumError;
use hpa_core::kernel::{BifurcationParameter, KernelFamily};
use hpa_core::sim::Monitor;
use hpa_core::spectral::{
    dirac_critical_delays, eigen_oracle_nondelayed, gamma_critical_theta, stability_report,
    Crossing,
};
use hpa_core::sweep::{onsets, run_sweep, SweepParameter, SweepSpec};
use hpa_core::{
    detect_cycle, find_equilibria, integrate, EquilibriumSet, InitialHistory, Model,
    ScenarioConfig, State,
};

use crate::config::{Initial, Resolved};
use crate::error::CliError;
use crate::manifest::Manifest;
use crate::plot::LinePlot;
use crate::table::{num, opt_num, write_csv};

const CHANNELS: [&str; 4] = ["x1 (CRH)", "x2 (ACTH)", "x3 (cortisol)", "x4 (GR)"];
/// Events listed individually in a simulation report.
const LISTED_EVENTS: usize = 10;

/// Everything a command needs besides its own arguments.
pub struct Session {
    pub resolved: Resolved,
    pub config_source: String,
    pub command_line: String,
    pub out: PathBuf,
}

impl Session {
    fn header(&self, outputs: &[&str]) -> String {
        Manifest {
            command: self.command_line.clone(),
            config_source: self.config_source.clone(),
            resolved: self.resolved.clone(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
        .header()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn model(&self) -> Result<Model, CliError> {
        Model::new(self.resolved.params.clone())
            .map_err(|e| CliError::Config(format!("[params] {e}")))
    }

    fn equilibria(&self, model: &Model) -> Result<EquilibriumSet, CliError> {
        find_equilibria(model, &self.resolved.tolerances).map_err(|e| match e {
            EquilibriumError::GridTooSmall(_) => CliError::Config(e.to_string()),
            other => CliError::Domain(other.to_string()),
        })
    }

    fn monitor(&self) -> Monitor {
        Monitor {
            positivity_slack: self.resolved.tolerances.positivity_slack,
            box_slack: self.resolved.tolerances.box_slack,
        }
    }

    fn history(&self, set: &EquilibriumSet) -> Result<State, CliError> {
        let default_pert = self.resolved.tolerances.neighborhood_perturbation;
        let history = match &self.resolved.initial {
            None => set.highest().state.map(|v| v * (1.0 + default_pert)),
            Some(Initial { state: Some(s), .. }) => *s,
            Some(Initial {
                near: Some(label),
                perturbation,
                ..
            }) => InitialHistory::Near {
                label: label.clone(),
                perturbation: perturbation.unwrap_or(default_pert),
            }
            .resolve(set)
            .ok_or_else(|| {
                let known: Vec<&str> = set.equilibria.iter().map(|e| e.label.as_str()).collect();
                CliError::Config(format!(
                    "[initial] no equilibrium '{label}' (found: {})",
                    known.join(", ")
                ))
            })?,
            Some(_) => return Err(CliError::Config("[initial] needs state or near".into())),
        };
        if history.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(CliError::Config(format!(
                "[initial] history must be finite and >= 0, got {history:?}"
            )));
        }
        Ok(history)
    }

    /// Prints the report and stores it as `<name>.txt` behind the header.
    fn finish(&self, name: &str, header: &str, report: &str) -> Result<(), CliError> {
        print!("{report}");
        std::fs::write(
            self.path(&format!("{name}.txt")),
            format!("{header}{report}"),
        )?;
        Ok(())
    }
}

fn fmt_state(x: &State) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:.6}")).collect();
    format!("({})", parts.join(", "))
}

pub fn equilibria(s: &Session) -> Result<(), CliError> {
    let model = s.model()?;
    let set = s.equilibria(&model)?;
    let tol = &s.resolved.tolerances;
    let bounds = model.invariant_box();
    let header = s.header(&["equilibria.csv", "equilibria.txt"]);

    let rows: Vec<Vec<String>> = set
        .equilibria
        .iter()
        .map(|e| {
            let mut row = vec![e.label.clone(), num(e.x0)];
            row.extend(e.state.iter().map(|&v| num(v)));
            row.extend([num(e.a), num(e.b), num(e.w4tilde)]);
            row
        })
        .collect();
    write_csv(
        &s.path("equilibria.csv"),
        &header,
        &["label", "x0", "x1", "x2", "x3", "x4", "a", "b", "w4tilde"],
        &rows,
        &[],
    )?;

    let p = model.params();
    let mut r = String::new();
    writeln!(
        r,
        "{} equilibria on x0 in ({:.6e}, {:.6e})",
        set.equilibria.len(),
        set.domain.0,
        set.domain.1
    )
    .unwrap();
    writeln!(r, "invariant box upper corner {}", fmt_state(&bounds.upper)).unwrap();
    for e in set.equilibria.iter().rev() {
        let inside = bounds.contains(&e.state, tol.box_slack);
        writeln!(
            r,
            "  {:<3} x = {}  a = {:.6e}  b = {:.6e}  w4tilde = {:.6e}  {}",
            e.label,
            fmt_state(&e.state),
            e.a,
            e.b,
            e.w4tilde,
            if inside { "inside box" } else { "OUTSIDE box" }
        )
        .unwrap();
    }
    for x in &set.degenerate {
        writeln!(r, "  possible double root near x0 = {x:.6e} (not analysed)").unwrap();
    }
    writeln!(r, "k3 = {:.6e} 1/min (w3 * mean x3 / mean x2)", p.k3).unwrap();
    let warnings = p.validate().map_err(|e| CliError::Config(e.to_string()))?;
    for w in warnings {
        writeln!(r, "warning: {w}").unwrap();
    }
    s.finish("equilibria", &header, &r)
}

pub fn stability(s: &Session) -> Result<(), CliError> {
    let model = s.model()?;
    let set = s.equilibria(&model)?;
    let header = s.header(&["stability.csv", "stability.txt"]);
    let verdict = |b: bool| if b { "stable" } else { "unstable" };

    let mut rows = Vec::new();
    let mut disagreements = Vec::new();
    let mut r = String::new();
    for e in set.equilibria.iter().rev() {
        let rep = stability_report(e, &model);
        let eig = eigen_oracle_nondelayed(e, &model);
        let oracle_stable = eig.iter().all(|z| z.re < 0.0);
        if oracle_stable != rep.nondelayed_stable {
            disagreements.push(e.label.clone());
        }
        let flag = |b: bool| if b { "true" } else { "false" }.to_string();
        let mut row = vec![
            e.label.clone(),
            flag(rep.i0),
            flag(rep.i1),
            flag(rep.i2),
            flag(rep.i3),
            flag(rep.i3bar),
        ];
        row.extend(rep.c.iter().map(|&c| num(c)));
        row.push(num(rep.discriminant));
        row.push(verdict(rep.nondelayed_stable).into());
        row.push(verdict(oracle_stable).into());
        row.push(flag(rep.sufficient_conditions));
        row.push(flag(rep.delay_independent_stable));
        for z in &eig {
            row.push(num(z.re));
            row.push(num(z.im));
        }
        rows.push(row);

        writeln!(
            r,
            "{:<3} I0={} I1={} I2={} I3={} I3bar={}  routh-hurwitz: {}  eigenvalues: {}{}",
            e.label,
            rep.i0,
            rep.i1,
            rep.i2,
            rep.i3,
            rep.i3bar,
            verdict(rep.nondelayed_stable),
            verdict(oracle_stable),
            if rep.delay_independent_stable {
                "  stable for all delays"
            } else {
                ""
            }
        )
        .unwrap();
        let ev: Vec<String> = eig
            .iter()
            .map(|z| format!("{:.4e}{:+.4e}i", z.re, z.im))
            .collect();
        writeln!(
            r,
            "    c = [{:.6e}, {:.6e}, {:.6e}, {:.6e}]  disc = {:.6e}",
            rep.c[0], rep.c[1], rep.c[2], rep.c[3], rep.discriminant
        )
        .unwrap();
        writeln!(r, "    eigenvalues {}", ev.join(", ")).unwrap();
    }
    write_csv(
        &s.path("stability.csv"),
        &header,
        &[
            "label",
            "i0",
            "i1",
            "i2",
            "i3",
            "i3bar",
            "c1",
            "c2",
            "c3",
            "c4",
            "discriminant",
            "routh_hurwitz",
            "eigen_oracle",
            "sufficient_conditions",
            "delay_independent_stable",
            "ev1_re",
            "ev1_im",
            "ev2_re",
            "ev2_im",
            "ev3_re",
            "ev3_im",
            "ev4_re",
            "ev4_im",
        ],
        &rows,
        &[],
    )?;
    s.finish("stability", &header, &r)?;
    if disagreements.is_empty() {
        Ok(())
    } else {
        Err(CliError::SelfCheck(format!(
            "Routh-Hurwitz and eigenvalue verdicts disagree for {}",
            disagreements.join(", ")
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum KernelKind {
    Dirac,
    Gamma,
}

/// Kernel family and Gamma order, defaulting to the configured kernels.
fn hopf_kernel(s: &Session, kind: Option<KernelKind>, order: Option<u32>) -> (KernelKind, u32) {
    let configured = s
        .resolved
        .kernels
        .and_then(|k| k.bifurcation_parameter().ok());
    let kind = kind.unwrap_or(match configured {
        Some(BifurcationParameter::Gamma { .. }) => KernelKind::Gamma,
        _ => KernelKind::Dirac,
    });
    let order = order.unwrap_or(match configured {
        Some(BifurcationParameter::Gamma { order, .. }) => order,
        _ => 4,
    });
    (kind, order)
}

pub fn hopf(
    s: &Session,
    kind: Option<KernelKind>,
    order: Option<u32>,
    pmax: usize,
) -> Result<(), CliError> {
    let model = s.model()?;
    let set = s.equilibria(&model)?;
    let tol = &s.resolved.tolerances;
    let (kind, order) = hopf_kernel(s, kind, order);
    let header = s.header(&["hopf.csv", "hopf.txt"]);
    let configured = s
        .resolved
        .kernels
        .and_then(|k| k.bifurcation_parameter().ok());

    let mut columns: Vec<String> = vec!["label".into(), "status".into(), "omega0".into()];
    match kind {
        KernelKind::Dirac => {
            columns.extend(["q_re", "q_im"].map(String::from));
            columns.extend((0..=pmax).map(|p| format!("tau_{p}")));
        }
        KernelKind::Gamma => {
            columns.extend(["order", "omega", "theta", "total_delay"].map(String::from));
        }
    }
    columns.push("residual".into());

    let mut rows = Vec::new();
    let mut r = String::new();
    match kind {
        KernelKind::Dirac => {
            writeln!(r, "Dirac kernels, critical total delays tau_0..tau_{pmax}").unwrap()
        }
        KernelKind::Gamma => writeln!(
            r,
            "Gamma kernels of total order {order}, critical scale theta"
        )
        .unwrap(),
    }
    for e in set.equilibria.iter().rev() {
        let result = match kind {
            KernelKind::Dirac => dirac_critical_delays(e, &model, pmax, tol),
            KernelKind::Gamma => gamma_critical_theta(e, &model, order, tol),
        };
        let mut row = vec![e.label.clone()];
        match result {
            Ok(h) => {
                row.push("ok".into());
                row.push(num(h.omega0));
                match &h.crossing {
                    Crossing::Dirac(d) => {
                        row.extend([num(d.q.re), num(d.q.im)]);
                        row.extend(d.taus.iter().map(|&t| num(t)));
                        let taus: Vec<String> = d.taus.iter().map(|t| format!("{t:.6}")).collect();
                        writeln!(
                            r,
                            "  {:<3} omega0 = {:.6e}  tau = {}  residual = {:.2e}",
                            e.label,
                            h.omega0,
                            taus.join(", "),
                            d.residual
                        )
                        .unwrap();
                    }
                    Crossing::Gamma(g) => {
                        row.extend([
                            g.order.to_string(),
                            num(g.omega),
                            num(g.theta),
                            num(g.total_delay),
                        ]);
                        writeln!(
                            r,
                            "  {:<3} omega0 = {:.6e}  omega = {:.6e}  theta = {:.6}  total delay = {:.6}  residual = {:.2e}",
                            e.label, h.omega0, g.omega, g.theta, g.total_delay, g.residual
                        )
                        .unwrap();
                    }
                }
                row.push(num(h.residual()));
                match (kind, configured) {
                    (KernelKind::Dirac, Some(BifurcationParameter::Dirac { tau })) => {
                        writeln!(
                            r,
                            "      configured total delay {tau}: {}",
                            if h.is_stable_at(tau) {
                                "stable"
                            } else {
                                "past the first crossing"
                            }
                        )
                        .unwrap();
                    }
                    (KernelKind::Gamma, Some(BifurcationParameter::Gamma { order: o, theta }))
                        if o == order =>
                    {
                        writeln!(
                            r,
                            "      configured theta {theta}: {}",
                            if h.is_stable_at(theta) {
                                "stable"
                            } else {
                                "past the first crossing"
                            }
                        )
                        .unwrap();
                    }
                    _ => {}
                }
            }
            Err(err) => {
                row.push(err.to_string());
                row.resize(columns.len(), String::new());
                writeln!(r, "  {:<3} {err}", e.label).unwrap();
            }
        }
        rows.push(row);
    }
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    write_csv(&s.path("hopf.csv"), &header, &columns, &rows, &[])?;
    s.finish("hopf", &header, &r)
}

fn scenario(s: &Session, model: Model, history: State) -> Result<ScenarioConfig, CliError> {
    let i = s.resolved.integration;
    Ok(ScenarioConfig {
        model,
        kernels: s.resolved.kernels()?,
        history,
        t_end: i.t_end,
        stride: i.stride,
        step: i.step,
    })
}

pub fn simulate(s: &Session, plot: bool) -> Result<(), CliError> {
    let model = s.model()?;
    let set = s.equilibria(&model)?;
    let history = s.history(&set)?;
    let cfg = scenario(s, model, history)?;
    let tr = integrate(&cfg, &s.monitor()).map_err(|e| CliError::Config(e.to_string()))?;
    let rep = detect_cycle(&tr, Some(&set), &s.resolved.tolerances);

    let mut outputs = vec!["trajectory.csv", "simulate.txt"];
    const SVGS: [&str; 5] = ["x1.svg", "x2.svg", "x3.svg", "x4.svg", "phase_x1_x3.svg"];
    if plot {
        outputs.extend(SVGS);
    }
    let header = s.header(&outputs);

    let mut r = String::new();
    writeln!(
        r,
        "history {}  t_end = {}  step = {}",
        fmt_state(&history),
        cfg.t_end,
        cfg.step
    )
    .unwrap();
    writeln!(r, "class: {}", rep.class).unwrap();
    if let Some(p) = rep.period {
        writeln!(
            r,
            "period: {p:.6} min (cv {})",
            rep.period_cv.map_or("-".into(), |c| format!("{c:.3e}"))
        )
        .unwrap();
    }
    if let Some(rate) = rep.envelope_rate {
        writeln!(r, "envelope rate: {rate:.3e} 1/min").unwrap();
    }
    writeln!(r, "peaks: {}", rep.peak_count).unwrap();
    writeln!(r, "min: {}", fmt_state(&rep.min)).unwrap();
    writeln!(r, "max: {}", fmt_state(&rep.max)).unwrap();
    if let Some(l) = &rep.limit {
        writeln!(r, "limit: {}", fmt_state(l)).unwrap();
    }
    if let Some((label, d)) = &rep.matched {
        writeln!(
            r,
            "nearest equilibrium: {label} (relative distance {d:.3e})"
        )
        .unwrap();
    }
    writeln!(r, "invariant events: {}", tr.event_count).unwrap();
    for ev in tr.events.iter().take(LISTED_EVENTS) {
        writeln!(
            r,
            "  t = {:.3} {:?} x{} = {:.6e}",
            ev.t,
            ev.kind,
            ev.channel + 1,
            ev.value
        )
        .unwrap();
    }

    let rows: Vec<Vec<String>> = tr
        .times
        .iter()
        .zip(&tr.states)
        .map(|(t, x)| {
            let mut row = vec![num(*t)];
            row.extend(x.iter().map(|&v| num(v)));
            row
        })
        .collect();
    let footer: Vec<String> = r.lines().map(String::from).collect();
    write_csv(
        &s.path("trajectory.csv"),
        &header,
        &["t", "x1", "x2", "x3", "x4"],
        &rows,
        &footer,
    )?;

    if plot {
        let channels: Vec<Vec<f64>> = (0..4).map(|c| tr.channel(c)).collect();
        for (c, name) in SVGS[..4].iter().enumerate() {
            LinePlot {
                title: CHANNELS[c],
                x_label: "t (min)",
                y_label: CHANNELS[c],
                x: &tr.times,
                y: &channels[c],
            }
            .save(&s.path(name))?;
        }
        LinePlot {
            title: "phase plane",
            x_label: CHANNELS[0],
            y_label: CHANNELS[2],
            x: &channels[0],
            y: &channels[2],
        }
        .save(&s.path(SVGS[4]))?;
    }
    s.finish("simulate", &header, &r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    Tau,
    Theta,
}

pub fn sweep(
    s: &Session,
    param: Option<SweepParam>,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<(), CliError> {
    let model = s.model()?;
    let set = s.equilibria(&model)?;
    let tol = &s.resolved.tolerances;
    let base = scenario(s, model.clone(), set.highest().state)?;
    let family = base
        .kernels
        .validate()
        .map_err(|e| CliError::Config(format!("[kernels] {e}")))?;
    let parameter = match param.unwrap_or(match family {
        KernelFamily::Dirac => SweepParam::Tau,
        KernelFamily::Gamma => SweepParam::Theta,
    }) {
        SweepParam::Tau => SweepParameter::Tau,
        SweepParam::Theta => SweepParameter::Theta,
    };
    let spec = SweepSpec {
        parameter,
        from,
        to,
        steps,
    };
    let rows = run_sweep(&base, &set, &spec, tol).map_err(|e| CliError::Config(e.to_string()))?;
    let header = s.header(&["sweep.csv", "sweep.txt"]);

    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            vec![
                num(row.value),
                row.branch.clone(),
                row.class.to_string(),
                opt_num(row.period),
                num(row.x3_min),
                num(row.x3_max),
                row.matched.clone().unwrap_or_default(),
            ]
        })
        .collect();
    write_csv(
        &s.path("sweep.csv"),
        &header,
        &[
            "value", "branch", "class", "period", "x3_min", "x3_max", "matched",
        ],
        &table,
        &[],
    )?;

    let mut r = String::new();
    writeln!(
        r,
        "sweep of {} over [{from}, {to}] in {steps} points",
        parameter.as_str()
    )
    .unwrap();
    let bif = base.kernels.bifurcation_parameter().ok();
    let mut branches: Vec<&str> = Vec::new();
    for row in &rows {
        if !branches.contains(&row.branch.as_str()) {
            branches.push(&row.branch);
        }
    }
    for label in branches {
        let eq = set.get(label).expect("sweep branches are equilibria");
        let predicted = match (parameter, bif) {
            (SweepParameter::Tau, _) => dirac_critical_delays(eq, &model, 0, tol).ok(),
            (SweepParameter::Theta, Some(BifurcationParameter::Gamma { order, .. })) => {
                gamma_critical_theta(eq, &model, order, tol).ok()
            }
            _ => None,
        };
        let found = onsets(&rows, label);
        let found: Vec<String> = found.iter().map(|(a, b)| format!("({a}, {b}]")).collect();
        writeln!(
            r,
            "  branch {label:<3} onset of oscillation in {}  predicted {}",
            if found.is_empty() {
                "none".to_string()
            } else {
                found.join(", ")
            },
            predicted.map_or("-".into(), |h| format!("{:.6}", h.critical_value()))
        )
        .unwrap();
    }
    s.finish("sweep", &header, &r)
}

/// Creates the output directory if needed.
pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(CliError::Io)
}
