//! Parameter sweeps: one independent simulation per value.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::Regime;
use crate::diagnostics::CurvatureMode;
use crate::error::{Error, Result};
use crate::pipeline::{self, Simulation};
use crate::problem::BeamProblem;
use crate::stepper::Resolution;

/// Environment variable capping the number of concurrent runs.
pub const THREADS_ENV: &str = "BEAMSTAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepParameter {
    #[serde(rename = "k_r")]
    RotationalSpring,
    #[serde(rename = "k_a")]
    RotationalDamper,
    #[serde(rename = "k_d")]
    TranslationalSpring,
    #[serde(rename = "k_v")]
    TranslationalDamper,
    /// Multiplies the distributed damping field.
    #[serde(rename = "mu_scale")]
    DampingScale,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 5] = [
        SweepParameter::RotationalSpring,
        SweepParameter::RotationalDamper,
        SweepParameter::TranslationalSpring,
        SweepParameter::TranslationalDamper,
        SweepParameter::DampingScale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::RotationalSpring => "k_r",
            SweepParameter::RotationalDamper => "k_a",
            SweepParameter::TranslationalSpring => "k_d",
            SweepParameter::TranslationalDamper => "k_v",
            SweepParameter::DampingScale => "mu_scale",
        }
    }

    /// Copy of `problem` with this parameter set to `value`.
    pub fn apply(self, problem: &BeamProblem, value: f64) -> Result<BeamProblem> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::InvalidArgument(format!("{} must be a nonnegative number, got {value}", self.name())));
        }
        let mut p = problem.clone();
        let k = &mut p.boundary;
        match self {
            SweepParameter::RotationalSpring => k.k_r = value,
            SweepParameter::RotationalDamper => k.k_a = value,
            SweepParameter::TranslationalSpring => k.k_d = value,
            SweepParameter::TranslationalDamper => k.k_v = value,
            SweepParameter::DampingScale => p.mu = p.mu.scaled(value),
        }
        Ok(p)
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParameter::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            Error::InvalidArgument(format!("unknown sweep parameter `{s}` (expected k_r, k_a, k_d, k_v or mu_scale)"))
        })
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub lambda_max: Option<f64>,
    pub lambda: Option<f64>,
    pub m_d: Option<f64>,
    pub sigma: Option<f64>,
    pub regime: Option<Regime>,
    pub initial_energy: f64,
    /// Energy at the last interior grid time.
    pub final_energy: f64,
    pub j_mu: f64,
    pub j_a: f64,
    pub j_v: f64,
    pub violations: Option<usize>,
}

impl SweepRow {
    fn from_simulation(value: f64, sim: &Simulation) -> Self {
        let (beta0, beta1) = crate::bounds::beta_constants(&sim.trace.problem);
        let e = &sim.energy;
        let last = |v: &[f64]| v.last().copied().unwrap_or(0.0);
        let b = sim.bound.as_ref().ok();
        SweepRow {
            value,
            beta0,
            beta1,
            lambda_max: b.map(|b| b.lambda_max),
            lambda: b.map(|b| b.lambda),
            m_d: b.map(|b| b.m_d),
            sigma: b.map(|b| b.sigma),
            regime: b.map(|b| b.regime),
            initial_energy: e.initial_energy,
            final_energy: last(&e.energy),
            j_mu: last(&e.j_mu),
            j_a: last(&e.j_a),
            j_v: last(&e.j_v),
            violations: b.and_then(|b| b.envelope.as_ref()).map(|r| r.violations()),
        }
    }

    /// `E(t_end) / E(0)`, or 0 for a rest state.
    pub fn energy_ratio(&self) -> f64 {
        if self.initial_energy == 0.0 {
            0.0
        } else {
            self.final_energy / self.initial_energy
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(
            out,
            "{},beta0,beta1,lambda_max,lambda,M_d,sigma,regime,E0,E_end,E_ratio,j_mu,j_a,j_v,violations",
            self.parameter
        )?;
        let opt = |v: Option<f64>| v.map(|v| format!("{v:?}")).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                out,
                "{:?},{:?},{:?},{},{},{},{},{},{:?},{:?},{:?},{:?},{:?},{:?},{}",
                r.value,
                r.beta0,
                r.beta1,
                opt(r.lambda_max),
                opt(r.lambda),
                opt(r.m_d),
                opt(r.sigma),
                r.regime.map(|g| g.to_string()).unwrap_or_default(),
                r.initial_energy,
                r.final_energy,
                r.energy_ratio(),
                r.j_mu,
                r.j_a,
                r.j_v,
                r.violations.map(|v| v.to_string()).unwrap_or_default()
            )?;
        }
        Ok(())
    }
}

/// Worker count from `BEAMSTAB_THREADS`; `None` when unset.
pub fn thread_limit() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got `{s}`"))),
        },
    }
}

/// Runs `f` on a pool with at most `threads` workers (rayon's default when `None`).
pub fn with_thread_limit<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// One simulation per value, run concurrently; rows come back in input order.
/// Every value is checked before any run starts.
pub fn sweep(
    problem: &BeamProblem,
    parameter: SweepParameter,
    values: &[f64],
    resolution: &Resolution,
    mode: CurvatureMode,
    threads: Option<usize>,
) -> Result<SweepReport> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one value".into()));
    }
    let problems = values.iter().map(|&v| parameter.apply(problem, v)).collect::<Result<Vec<_>>>()?;
    let rows = with_thread_limit(threads, || {
        problems
            .par_iter()
            .zip(values.par_iter())
            .map(|(p, &v)| {
                let sim = pipeline::simulate(p, resolution, None, mode)?;
                Ok(SweepRow::from_simulation(v, &sim))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(SweepReport { parameter, rows })
}
