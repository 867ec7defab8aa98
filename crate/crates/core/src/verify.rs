//! Manufactured-solution errors and refinement studies.

use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::{self, CurvatureMode};
use crate::error::{Error, Result};
use crate::fem::gauss_legendre;
use crate::problem::{BeamProblem, ExactSolution};
use crate::stepper::{self, Resolution, SolutionTrace, TimeStepRule};

/// Gauss points per element used for error integrals.
const ERROR_QUAD_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ErrorNorms {
    /// Largest pointwise error over the grid levels and quadrature points.
    pub max: f64,
    /// `L²(0,T; L²(0,l))` error, trapezoidal in time.
    pub l2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    pub nodes: usize,
    pub time_step: f64,
    pub u: ErrorNorms,
    pub u_x: ErrorNorms,
    pub u_t: ErrorNorms,
    pub u_xx: ErrorNorms,
    /// Largest nodal displacement error over all levels.
    pub nodal_max: f64,
}

impl ErrorReport {
    pub const CSV_HEADER: &'static str =
        "nodes,dt,u_max,u_l2,u_x_max,u_x_l2,u_t_max,u_t_l2,u_xx_max,u_xx_l2,nodal_max";

    pub fn csv_row(&self) -> String {
        let f = [
            self.u.max,
            self.u.l2,
            self.u_x.max,
            self.u_x.l2,
            self.u_t.max,
            self.u_t.l2,
            self.u_xx.max,
            self.u_xx.l2,
            self.nodal_max,
        ];
        let cols: Vec<String> = f.iter().map(|v| format!("{v:?}")).collect();
        format!("{},{:?},{}", self.nodes, self.time_step, cols.join(","))
    }
}

/// Largest `|U(x_i, t_j) - u(x_i, t_j)|` over nodes and levels.
pub fn nodal_max_error(trace: &SolutionTrace, exact: &ExactSolution) -> f64 {
    let mesh = &trace.system.mesh;
    let mut worst: f64 = 0.0;
    for (j, dofs) in trace.dofs.iter().enumerate() {
        let t = trace.grid.time(j);
        for (node, &x) in mesh.nodes().iter().enumerate() {
            let u = trace.system.dof_map.node_dofs(node).map_or(0.0, |[w, _]| dofs[w]);
            worst = worst.max((u - exact.eval(x, t).u).abs());
        }
    }
    worst
}

/// Errors of `u`, `u_x`, `u_t`, `u_xx` against an exact solution at every level.
pub fn error_report(trace: &SolutionTrace, exact: &ExactSolution) -> Result<ErrorReport> {
    let system = &trace.system;
    let mesh = &system.mesh;
    let h = mesh.h();
    let (pts, wts) = gauss_legendre(ERROR_QUAD_POINTS);
    let levels = trace.levels();
    let ht = trace.grid.step();

    let mut max = [0.0f64; 4];
    let mut sq = [0.0f64; 4];
    for j in 0..levels {
        let t = trace.grid.time(j);
        let dofs = &trace.dofs[j];
        let vel = trace.velocity_at(j);
        let tw = if j == 0 || j + 1 == levels { 0.5 * ht } else { ht };
        for e in 0..mesh.element_count() {
            for (&xi, &w) in pts.iter().zip(&wts) {
                let x = (e as f64 + xi) * h;
                let (u, ux, uxx) = system.evaluate(dofs, x)?;
                let (ut, _, _) = system.evaluate(&vel, x)?;
                let ex = exact.eval(x, t);
                let d = [u - ex.u, ux - ex.u_x, ut - ex.u_t, uxx - ex.u_xx];
                for k in 0..4 {
                    max[k] = max[k].max(d[k].abs());
                    sq[k] += tw * w * h * d[k] * d[k];
                }
            }
        }
    }
    let norms = |k: usize| ErrorNorms { max: max[k], l2: sq[k].sqrt() };
    Ok(ErrorReport {
        nodes: mesh.node_count(),
        time_step: ht,
        u: norms(0),
        u_x: norms(1),
        u_t: norms(2),
        u_xx: norms(3),
        nodal_max: nodal_max_error(trace, exact),
    })
}

/// Runs the problem and compares against its exact solution.
pub fn verify(problem: &BeamProblem, exact: &ExactSolution, resolution: &Resolution) -> Result<ErrorReport> {
    let trace = stepper::run_at(problem, resolution)?;
    error_report(&trace, exact)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    /// Halve `h_t` at a fixed mesh; error is the nodal max error.
    Temporal,
    /// Halve `h_x` at a fixed step; error is the nodal max error.
    Spatial,
    /// Halve both; error is the largest energy-identity residual.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudyRow {
    pub nodes: usize,
    pub time_step: f64,
    pub error: f64,
    /// `log2(e_{i-1}/e_i)`; absent on the first row.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub kind: StudyKind,
    pub rows: Vec<StudyRow>,
}

impl ConvergenceTable {
    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.order).collect()
    }

    pub fn last_order(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.order)
    }

    /// Least-squares slope of `log e` against `log` of the refined parameter.
    pub fn fitted_order(&self) -> f64 {
        let n = self.rows.len() as f64;
        let xs: Vec<f64> = (0..self.rows.len()).map(|i| -(i as f64) * 2f64.ln()).collect();
        let ys: Vec<f64> = self.rows.iter().map(|r| r.error.ln()).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        sxy / sxx
    }

    pub fn write_csv(&self, mut out: impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "level,nodes,dt,error,order")?;
        for (i, r) in self.rows.iter().enumerate() {
            let order = r.order.map(|o| format!("{o:?}")).unwrap_or_default();
            writeln!(out, "{i},{},{:?},{:?},{order}", r.nodes, r.time_step, r.error)?;
        }
        Ok(())
    }
}

/// Node count after halving the element size `k` times.
pub fn refined_nodes(nodes: usize, k: u32) -> usize {
    (nodes - 1) * 2usize.pow(k) + 1
}

/// Refinement study over `levels` resolutions starting from `base`. A
/// ratio-type time step is frozen at its base value for the spatial study.
pub fn convergence(
    problem: &BeamProblem,
    exact: Option<&ExactSolution>,
    kind: StudyKind,
    base: &Resolution,
    levels: usize,
    mode: CurvatureMode,
) -> Result<ConvergenceTable> {
    if levels < 2 {
        return Err(Error::InvalidArgument(format!("a refinement study needs at least 2 levels, got {levels}")));
    }
    let exact = match kind {
        StudyKind::Identity => {
            if problem.is_forced() {
                return Err(Error::ForcedSystem);
            }
            None
        }
        _ => Some(exact.ok_or(Error::NoExactSolution)?),
    };
    let base_step = base.grid(problem)?.step();
    let resolutions: Vec<Resolution> = (0..levels as u32)
        .map(|k| {
            let scale = 0.5f64.powi(k as i32);
            match kind {
                StudyKind::Temporal => Resolution::new(base.nodes, TimeStepRule::Fixed(base_step * scale)),
                StudyKind::Spatial => Resolution::new(refined_nodes(base.nodes, k), TimeStepRule::Fixed(base_step)),
                StudyKind::Identity => {
                    Resolution::new(refined_nodes(base.nodes, k), TimeStepRule::Fixed(base_step * scale))
                }
            }
        })
        .collect();

    let results: Vec<Result<(usize, f64, f64)>> = resolutions
        .par_iter()
        .map(|res| {
            let trace = stepper::run_at(problem, res)?;
            let error = match &exact {
                Some(ex) => nodal_max_error(&trace, ex),
                None => diagnostics::identity_residual(&diagnostics::energy(&trace, None, mode)?)?,
            };
            Ok((res.nodes, trace.grid.step(), error))
        })
        .collect();

    let mut rows: Vec<StudyRow> = Vec::with_capacity(levels);
    for r in results {
        let (nodes, time_step, error) = r?;
        let order = rows.last().map(|p: &StudyRow| (p.error / error).log2());
        rows.push(StudyRow { nodes, time_step, error, order });
    }
    Ok(ConvergenceTable { kind, rows })
}
