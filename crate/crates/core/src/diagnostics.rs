//! Energy, auxiliary and Lyapunov functionals plus cumulative dissipation,
//! computed from a solution trace with centered time differences.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};
use crate::fem::{ElementRule, SemiDiscreteSystem};
use crate::problem::BeamProblem;
use crate::stepper::SolutionTrace;

/// How the curvature `u_xx` entering the bending energy is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvatureMode {
    /// Centered differences of the nodal slopes, linear between nodes.
    Paper,
    /// Second derivative of the Hermite interpolant.
    #[default]
    Basis,
}

impl FromStr for CurvatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(CurvatureMode::Paper),
            "basis" => Ok(CurvatureMode::Basis),
            other => Err(Error::InvalidArgument(format!("unknown curvature mode `{other}` (paper|basis)"))),
        }
    }
}

impl fmt::Display for CurvatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurvatureMode::Paper => "paper",
            CurvatureMode::Basis => "basis",
        })
    }
}

/// Centered DOF velocity `(U^{j+1} - U^{j-1}) / (2 h_t)` at an interior level `j`
/// (0-based, `1 <= j <= N-2`).
pub fn time_derivative(trace: &SolutionTrace, j: usize) -> Result<Vec<f64>> {
    if j == 0 || j + 1 >= trace.levels() {
        return Err(Error::InvalidArgument(format!(
            "centered time derivative needs an interior level, got {j} of {}",
            trace.levels()
        )));
    }
    Ok(trace.velocity_at(j))
}

/// `x -> u_xx(x, t_j)` in one of the two modes.
#[derive(Debug, Clone)]
pub enum CurvatureField<'a> {
    Basis { system: &'a SemiDiscreteSystem, dofs: &'a [f64] },
    Paper { h: f64, nodal: Vec<f64> },
}

impl CurvatureField<'_> {
    pub fn new<'a>(system: &'a SemiDiscreteSystem, dofs: &'a [f64], mode: CurvatureMode) -> CurvatureField<'a> {
        match mode {
            CurvatureMode::Basis => CurvatureField::Basis { system, dofs },
            CurvatureMode::Paper => CurvatureField::Paper { h: system.mesh.h(), nodal: nodal_curvature(system, dofs) },
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            CurvatureField::Basis { system, dofs } => Ok(system.evaluate(dofs, x)?.2),
            CurvatureField::Paper { h, nodal } => {
                let l = *h * (nodal.len() - 1) as f64;
                if !(x >= 0.0 && x <= l * (1.0 + 1e-14)) {
                    return Err(Error::OutOfDomain(format!("x = {x} not in [0, {l}]")));
                }
                let e = ((x / h).floor() as usize).min(nodal.len() - 2);
                let xi = (x / h - e as f64).clamp(0.0, 1.0);
                Ok((1.0 - xi) * nodal[e] + xi * nodal[e + 1])
            }
        }
    }

    /// Value at local coordinate `xi` of element `e`.
    fn at(&self, e: usize, xi: f64, sh: &[crate::fem::ShapeValue; 4], local: &[f64; 4]) -> f64 {
        match self {
            CurvatureField::Basis { .. } => local.iter().zip(sh).map(|(v, s)| v * s.dxx).sum(),
            CurvatureField::Paper { nodal, .. } => (1.0 - xi) * nodal[e] + xi * nodal[e + 1],
        }
    }
}

/// Curvature at mesh nodes from centered differences of the nodal slopes;
/// second-order one-sided differences at the two ends.
pub fn nodal_curvature(system: &SemiDiscreteSystem, dofs: &[f64]) -> Vec<f64> {
    let m = system.mesh.node_count();
    let h = system.mesh.h();
    let slope: Vec<f64> = (0..m)
        .map(|i| system.dof_map.node_dofs(i).map_or(0.0, |[_, th]| dofs[th]))
        .collect();
    (0..m)
        .map(|i| {
            if i == 0 {
                (-3.0 * slope[0] + 4.0 * slope[1] - slope[2]) / (2.0 * h)
            } else if i == m - 1 {
                (3.0 * slope[i] - 4.0 * slope[i - 1] + slope[i - 2]) / (2.0 * h)
            } else {
                (slope[i + 1] - slope[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

pub fn curvature_field<'a>(trace: &'a SolutionTrace, j: usize, mode: CurvatureMode) -> Result<CurvatureField<'a>> {
    let dofs = trace
        .dofs
        .get(j)
        .ok_or_else(|| Error::InvalidArgument(format!("level {j} out of range")))?;
    Ok(CurvatureField::new(&trace.system, dofs, mode))
}

/// Coefficients sampled at every Gauss point of the mesh.
struct QuadratureTable {
    weights: Vec<f64>,
    rho: Vec<f64>,
    mu: Vec<f64>,
    r: Vec<f64>,
}

impl QuadratureTable {
    fn new(problem: &BeamProblem, system: &SemiDiscreteSystem) -> Self {
        let h = system.mesh.h();
        let rule = &system.rule;
        let mut t = QuadratureTable { weights: vec![], rho: vec![], mu: vec![], r: vec![] };
        for e in 0..system.mesh.element_count() {
            let x0 = system.mesh.nodes()[e];
            for (&xi, &w) in rule.points.iter().zip(&rule.weights) {
                let x = x0 + xi * h;
                t.weights.push(w * h);
                t.rho.push(problem.rho.eval(x));
                t.mu.push(problem.mu.eval(x));
                t.r.push(problem.r.eval(x));
            }
        }
        t
    }
}

/// Per-level spatial integrals.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct LevelIntegrals {
    kinetic: f64,  // ∫ρ v²
    bending: f64,  // ∫r w²
    cross: f64,    // ∫ρ u v
    mu_disp: f64,  // ∫μ u²
    mu_vel: f64,   // ∫μ v²
}

fn level_integrals(
    system: &SemiDiscreteSystem,
    table: &QuadratureTable,
    u: &[f64],
    v: &[f64],
    mode: CurvatureMode,
) -> LevelIntegrals {
    let rule: &ElementRule = &system.rule;
    let curv = CurvatureField::new(system, u, mode);
    let mut out = LevelIntegrals::default();
    let mut q = 0;
    for e in 0..system.mesh.element_count() {
        let lu = system.element_values(u, e);
        let lv = system.element_values(v, e);
        for (&xi, sh) in rule.points.iter().zip(&rule.shapes) {
            let (mut uu, mut vv) = (0.0, 0.0);
            for k in 0..4 {
                uu += lu[k] * sh[k].value;
                vv += lv[k] * sh[k].value;
            }
            let w = curv.at(e, xi, sh, &lu);
            let wt = table.weights[q];
            out.kinetic += wt * table.rho[q] * vv * vv;
            out.bending += wt * table.r[q] * w * w;
            out.cross += wt * table.rho[q] * uu * vv;
            out.mu_disp += wt * table.mu[q] * uu * uu;
            out.mu_vel += wt * table.mu[q] * vv * vv;
            q += 1;
        }
    }
    out
}

/// Energy-type functionals on the interior grid times `t_1 .. t_{N-2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    /// Total energy: kinetic + bending + end-spring energy.
    pub energy: Vec<f64>,
    /// Auxiliary functional `∫ρ u u_t + ½∫μ u² + ½k_a u_x(l)² + ½k_v u(l)²`.
    pub aux: Vec<f64>,
    /// `E + λ J` when a penalty was supplied.
    pub lyapunov: Option<Vec<f64>>,
    pub lambda: Option<f64>,
    /// Cumulative `∫∫μ u_t²`, `k_a ∫u_xt(l)²`, `k_v ∫u_t(l)²` from `t = 0`.
    pub j_mu: Vec<f64>,
    pub j_a: Vec<f64>,
    pub j_v: Vec<f64>,
    /// `E(0) - E(t) - (j_mu + j_a + j_v)`.
    pub residual: Vec<f64>,
    /// `∫ρ u_t²` at each time.
    pub kinetic: Vec<f64>,
    /// Initial energy from the analytic initial data.
    pub initial_energy: f64,
    /// Auxiliary functional from the analytic initial data.
    pub initial_aux: f64,
    pub forced: bool,
    pub mode: CurvatureMode,
}

/// Initial energy and auxiliary functional evaluated from the analytic
/// initial data (not the interpolant).
pub fn initial_functionals(problem: &BeamProblem, elements: usize) -> (f64, f64) {
    let (pts, wts) = crate::fem::gauss_legendre(10);
    let h = problem.length / elements as f64;
    let (mut e, mut j) = (0.0, 0.0);
    for el in 0..elements {
        for (&xi, &w) in pts.iter().zip(&wts) {
            let x = (el as f64 + xi) * h;
            let (u, _, uxx) = problem.initial.u0.eval(x);
            let v = problem.initial.u1.value(x);
            let wt = w * h;
            let rho = problem.rho.eval(x);
            e += 0.5 * wt * (rho * v * v + problem.r.eval(x) * uxx * uxx);
            j += wt * (rho * u * v + 0.5 * problem.mu.eval(x) * u * u);
        }
    }
    let (u, ux, _) = problem.initial.u0.eval(problem.length);
    let k = &problem.boundary;
    e += 0.5 * k.k_r * ux * ux + 0.5 * k.k_d * u * u;
    j += 0.5 * k.k_a * ux * ux + 0.5 * k.k_v * u * u;
    (e, j)
}

pub fn energy(trace: &SolutionTrace, lambda: Option<f64>, mode: CurvatureMode) -> Result<EnergyTrace> {
    if let Some(l) = lambda {
        let window = bounds::lambda_window(&trace.problem, Some(trace))?;
        if !(l > 0.0 && l < window.lambda_max) {
            return Err(Error::LambdaOutOfWindow { lambda: l, lambda_max: window.lambda_max });
        }
    }
    let problem = &trace.problem;
    let system = &trace.system;
    let k = problem.boundary;
    let table = QuadratureTable::new(problem, system);
    let n_levels = trace.levels();
    let h_t = trace.grid.step();
    let (e0, j0) = initial_functionals(problem, system.mesh.element_count());

    let dissipation = |v: &[f64], mu_vel: f64| {
        let (vt, vxt) = system.end_values(v);
        [mu_vel, k.k_a * vxt * vxt, k.k_v * vt * vt]
    };

    let v0 = &trace.initial_velocity;
    let first = level_integrals(system, &table, &trace.dofs[0], v0, mode);
    let mut prev_rate = dissipation(v0, first.mu_vel);
    let mut cumulative = [0.0; 3];

    let interior = n_levels.saturating_sub(2);
    let mut out = EnergyTrace {
        times: Vec::with_capacity(interior),
        energy: Vec::with_capacity(interior),
        aux: Vec::with_capacity(interior),
        lyapunov: lambda.map(|_| Vec::with_capacity(interior)),
        lambda,
        j_mu: Vec::with_capacity(interior),
        j_a: Vec::with_capacity(interior),
        j_v: Vec::with_capacity(interior),
        residual: Vec::with_capacity(interior),
        kinetic: Vec::with_capacity(interior),
        initial_energy: e0,
        initial_aux: j0,
        forced: problem.is_forced(),
        mode,
    };

    for j in 1..n_levels - 1 {
        let u = &trace.dofs[j];
        let v = trace.velocity_at(j);
        let li = level_integrals(system, &table, u, &v, mode);
        let (ul, uxl) = system.end_values(u);

        let e = 0.5 * (li.kinetic + li.bending) + 0.5 * k.k_r * uxl * uxl + 0.5 * k.k_d * ul * ul;
        let aux = li.cross + 0.5 * li.mu_disp + 0.5 * k.k_a * uxl * uxl + 0.5 * k.k_v * ul * ul;

        let rate = dissipation(&v, li.mu_vel);
        for c in 0..3 {
            cumulative[c] += 0.5 * h_t * (prev_rate[c] + rate[c]);
        }
        prev_rate = rate;

        out.times.push(trace.grid.time(j));
        out.energy.push(e);
        out.aux.push(aux);
        if let (Some(ly), Some(l)) = (out.lyapunov.as_mut(), lambda) {
            ly.push(e + l * aux);
        }
        out.j_mu.push(cumulative[0]);
        out.j_a.push(cumulative[1]);
        out.j_v.push(cumulative[2]);
        out.residual.push(e0 - e - cumulative.iter().sum::<f64>());
        out.kinetic.push(li.kinetic);
    }
    Ok(out)
}

/// Largest `|E(0) - E(t) - Σ j(t)|` over the interior grid. Refuses forced runs,
/// where the identity does not hold.
pub fn identity_residual(trace: &EnergyTrace) -> Result<f64> {
    if trace.forced {
        return Err(Error::ForcedSystem);
    }
    Ok(trace.residual.iter().fold(0.0, |m, r| m.max(r.abs())))
}

impl EnergyTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest one-step energy increase `max_j (E_{j+1} - E_j)` (negative when strictly decreasing).
    pub fn max_energy_increase(&self) -> f64 {
        self.energy.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV `t,E,J,L,j_mu,j_a,j_v,residual`; `L` is empty without a penalty.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "t,E,J,L,j_mu,j_a,j_v,residual")?;
        for i in 0..self.len() {
            let l = self.lyapunov.as_ref().map(|l| format!("{:?}", l[i])).unwrap_or_default();
            writeln!(
                out,
                "{:?},{:?},{:?},{},{:?},{:?},{:?},{:?}",
                self.times[i],
                self.energy[i],
                self.aux[i],
                l,
                self.j_mu[i],
                self.j_a[i],
                self.j_v[i],
                self.residual[i]
            )?;
        }
        Ok(())
    }
}
