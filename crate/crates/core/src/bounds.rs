//! Explicit decay constants and envelope checks.
//!
//! With `β₀ = l²/2 · sqrt(ρ₁/r₀)` and `β₁ ≥ β₀`, the auxiliary functional is
//! bracketed by `-β₀ E ≤ J ≤ β₁ E`. For a penalty `λ` in the admissible window
//! the energy then obeys `E(t) ≤ M_d exp(-σ t) E(0)` with
//! `M_d = (1 + β₁λ)/(1 - β₀λ)` and `σ = 2λ/(1 + β₁λ)`.

use std::fmt;

use serde::Serialize;

use crate::diagnostics::EnergyTrace;
use crate::error::{Error, Result};
use crate::problem::BeamProblem;
use crate::stepper::SolutionTrace;

/// Default penalty as a fraction of the window's upper end.
pub const DEFAULT_LAMBDA_FRACTION: f64 = 0.99;

/// Absolute part of the envelope tolerance, relative to `E(0)`.
pub const ENVELOPE_ROUNDOFF: f64 = 1e-8;
/// Discretization slack of the envelope tolerance, relative to `E(0)`.
pub const ENVELOPE_SLACK: f64 = 1e-3;

/// Which decay result supplies the constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// Distributed damping `μ₀ > 0`, general bracket.
    #[serde(rename = "theorem1")]
    DistributedDamping,
    /// Distributed damping with no end dampers (`k_a = k_v = 0`), tighter `β₁`.
    #[serde(rename = "theorem1_special_4_1")]
    DistributedDampingOnly,
    /// No distributed damping, constant coefficients, end dampers only; the
    /// window depends on the computed solution.
    #[serde(rename = "theorem2")]
    EndDampersOnly,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::DistributedDamping => "theorem1",
            Regime::DistributedDampingOnly => "theorem1_special_4_1",
            Regime::EndDampersOnly => "theorem2",
        })
    }
}

/// `(β₀, β₁)` for the problem. When `k_a = k_v = 0` the tighter bracket
/// `1 + l² μ₁ / (4 sqrt(ρ₁ r₀))` is used.
pub fn beta_constants(problem: &BeamProblem) -> (f64, f64) {
    let b = problem.material_bounds();
    let (rho1, r0, mu1) = (b.rho.1, b.r.0, b.mu.1);
    let l = problem.length;
    let k = &problem.boundary;
    let beta0 = l * l / 2.0 * (rho1 / r0).sqrt();
    let s = (rho1 * r0).sqrt();
    let bracket = if k.k_a == 0.0 && k.k_v == 0.0 {
        1.0 + l * l / (4.0 * s) * mu1
    } else {
        1.0 + (l * l / 2.0 * mu1 + 2.0 / l * k.k_a + l * k.k_v) / s
    };
    (beta0, beta0 * bracket)
}

/// Upper end of the admissible penalty window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaWindow {
    pub lambda_max: f64,
    pub regime: Regime,
    /// Infimum/supremum over the time grid stand in for the continuum ones.
    pub grid_proxy: bool,
}

/// Window for the penalty `λ`.
///
/// With `μ₀ > 0` it is `min(1/β₀, μ₀/(2ρ₁))`. With `μ ≡ 0`, constant
/// coefficients and end dampers it is
/// `min(1/β₀, inf_t [k_a² u_xt(l)² + k_v² u_t(l)²] / (2 m sup_t ∫u_t²))`,
/// evaluated on the trace's interior grid times.
pub fn lambda_window(problem: &BeamProblem, trace: Option<&SolutionTrace>) -> Result<LambdaWindow> {
    let b = problem.material_bounds();
    let k = &problem.boundary;
    let (beta0, _) = beta_constants(problem);
    let (mu0, mu1, rho1) = (b.mu.0, b.mu.1, b.rho.1);

    if mu0 > 0.0 {
        let regime = if k.k_a == 0.0 && k.k_v == 0.0 {
            Regime::DistributedDampingOnly
        } else {
            Regime::DistributedDamping
        };
        return Ok(LambdaWindow {
            lambda_max: (1.0 / beta0).min(mu0 / (2.0 * rho1)),
            regime,
            grid_proxy: false,
        });
    }
    if k.k_a + k.k_v + mu0 <= 0.0 {
        return Err(Error::NoAdmissibleLambda("k_a+k_v+μ₀>0 fails: the system has no damping".into()));
    }
    if mu1 != 0.0 {
        return Err(Error::NoAdmissibleLambda(
            "μ vanishes somewhere without vanishing identically; neither window applies".into(),
        ));
    }
    if !(problem.rho.is_constant() && problem.r.is_constant()) {
        return Err(Error::NoAdmissibleLambda(
            "end-damper window requires constant density and rigidity".into(),
        ));
    }
    let trace = trace.ok_or_else(|| {
        Error::NoAdmissibleLambda("end-damper window depends on the solution; a trace is required".into())
    })?;

    let m = b.rho.0;
    let system = &trace.system;
    let mut inf_tip = f64::INFINITY;
    let mut sup_norm: f64 = 0.0;
    for j in 1..trace.levels() - 1 {
        let v = trace.velocity_at(j);
        let (vt, vxt) = system.end_values(&v);
        if vt * vt + vxt * vxt == 0.0 {
            return Err(Error::VelocityConditionFails { time: trace.grid.time(j) });
        }
        inf_tip = inf_tip.min(k.k_a * k.k_a * vxt * vxt + k.k_v * k.k_v * vt * vt);
        sup_norm = sup_norm.max(system.mass.quad_form(&v) / m);
    }
    let quotient = inf_tip / (2.0 * m * sup_norm);
    Ok(LambdaWindow { lambda_max: (1.0 / beta0).min(quotient), regime: Regime::EndDampersOnly, grid_proxy: true })
}

/// `(M_d, σ)` for a penalty `0 < λ < 1/β₀`.
pub fn decay_estimate(beta0: f64, beta1: f64, lambda: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0) || beta0 * lambda >= 1.0 {
        return Err(Error::LambdaOutOfWindow { lambda, lambda_max: 1.0 / beta0 });
    }
    let m_d = (1.0 + beta1 * lambda) / (1.0 - beta0 * lambda);
    let sigma = 2.0 * lambda / (1.0 + beta1 * lambda);
    Ok((m_d, sigma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub lambda: f64,
    #[serde(rename = "M_d")]
    pub m_d: f64,
    pub sigma: f64,
}

/// `points` penalties evenly spaced inside the open interval `(0, lambda_max)`.
pub fn scan_lambda(beta0: f64, beta1: f64, lambda_max: f64, points: usize) -> Result<Vec<ScanRow>> {
    if points < 2 {
        return Err(Error::InvalidArgument(format!("scan needs at least 2 points, got {points}")));
    }
    (1..=points)
        .map(|i| {
            let lambda = lambda_max * i as f64 / (points + 1) as f64;
            let (m_d, sigma) = decay_estimate(beta0, beta1, lambda)?;
            Ok(ScanRow { lambda, m_d, sigma })
        })
        .collect()
}

/// All decay constants for one problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayBound {
    pub beta0: f64,
    pub beta1: f64,
    pub lambda_max: f64,
    pub lambda: f64,
    #[serde(rename = "M_d")]
    pub m_d: f64,
    pub sigma: f64,
    pub regime: Regime,
    pub grid_proxy: bool,
}

impl DecayBound {
    /// Constants with `λ = 0.99 λ_max` unless overridden.
    pub fn compute(problem: &BeamProblem, trace: Option<&SolutionTrace>, lambda: Option<f64>) -> Result<Self> {
        let (beta0, beta1) = beta_constants(problem);
        let window = lambda_window(problem, trace)?;
        let lambda = match lambda {
            Some(l) if !(l > 0.0 && l < window.lambda_max) => {
                return Err(Error::LambdaOutOfWindow { lambda: l, lambda_max: window.lambda_max })
            }
            Some(l) => l,
            None => DEFAULT_LAMBDA_FRACTION * window.lambda_max,
        };
        let (m_d, sigma) = decay_estimate(beta0, beta1, lambda)?;
        Ok(Self {
            beta0,
            beta1,
            lambda_max: window.lambda_max,
            lambda,
            m_d,
            sigma,
            regime: window.regime,
            grid_proxy: window.grid_proxy,
        })
    }
}

/// Worst margin and violation bookkeeping for one inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Margin {
    /// `min_t (bound - value)`; negative means the bound is exceeded.
    pub worst: f64,
    pub worst_time: f64,
    pub violations: usize,
    pub first_violation: Option<f64>,
}

impl Margin {
    fn new() -> Self {
        Self { worst: f64::INFINITY, worst_time: f64::NAN, violations: 0, first_violation: None }
    }

    fn record(&mut self, t: f64, margin: f64, tol: f64) {
        if margin < self.worst {
            self.worst = margin;
            self.worst_time = t;
        }
        if margin < -tol {
            self.violations += 1;
            self.first_violation.get_or_insert(t);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    /// `J ≤ β₁ E`
    pub upper: Margin,
    /// `J ≥ -β₀ E`
    pub lower: Margin,
    /// `E(t) ≤ M_d exp(-σt) E(0)`
    pub decay: Margin,
    pub tolerance: f64,
    pub slack: f64,
    /// Forced runs are outside the scope of the estimate.
    pub informational: bool,
}

impl EnvelopeReport {
    pub fn violations(&self) -> usize {
        self.upper.violations + self.lower.violations + self.decay.violations
    }

    pub fn first_violation(&self) -> Option<f64> {
        [self.upper.first_violation, self.lower.first_violation, self.decay.first_violation]
            .into_iter()
            .flatten()
            .reduce(f64::min)
    }
}

pub fn verify_envelopes(energy: &EnergyTrace, bound: &DecayBound) -> EnvelopeReport {
    let e0 = energy.initial_energy;
    let slack = ENVELOPE_SLACK * e0;
    let tol = ENVELOPE_ROUNDOFF * e0 + slack;
    let mut report = EnvelopeReport {
        upper: Margin::new(),
        lower: Margin::new(),
        decay: Margin::new(),
        tolerance: tol,
        slack,
        informational: energy.forced,
    };
    for i in 0..energy.len() {
        let (t, e, j) = (energy.times[i], energy.energy[i], energy.aux[i]);
        report.upper.record(t, bound.beta1 * e - j, tol);
        report.lower.record(t, j + bound.beta0 * e, tol);
        report.decay.record(t, bound.m_d * (-bound.sigma * t).exp() * e0 - e, tol);
    }
    report
}

/// Serialized bound report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub beta0: f64,
    pub beta1: f64,
    pub lambda_max: f64,
    pub lambda: f64,
    #[serde(rename = "M_d")]
    pub m_d: f64,
    pub sigma: f64,
    pub regime: Regime,
    pub grid_proxy: bool,
    pub scan: Vec<ScanRow>,
    pub envelope: Option<EnvelopeReport>,
}

/// Rows in the scan attached to every report.
pub const REPORT_SCAN_POINTS: usize = 20;

impl BoundReport {
    pub fn new(bound: &DecayBound, envelope: Option<EnvelopeReport>) -> Result<Self> {
        Ok(Self {
            beta0: bound.beta0,
            beta1: bound.beta1,
            lambda_max: bound.lambda_max,
            lambda: bound.lambda,
            m_d: bound.m_d,
            sigma: bound.sigma,
            regime: bound.regime,
            grid_proxy: bound.grid_proxy,
            scan: scan_lambda(bound.beta0, bound.beta1, bound.lambda_max, REPORT_SCAN_POINTS)?,
            envelope,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}
