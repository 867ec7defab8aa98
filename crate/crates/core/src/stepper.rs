//! Time discretization: three-level backward differences with a trapezoidal start.

use std::io::Write;

use crate::banded::{BandedCholesky, BandedSymmetricMatrix};
use crate::error::{Error, Result};
use crate::fem::{self, Mesh, SemiDiscreteSystem};
use crate::problem::{BeamProblem, FieldSample};

/// The three-step second-difference stencil needs at least four levels.
pub const MIN_TIME_LEVELS: usize = 4;

/// Uniform grid `t_j = j * step`, `j = 0..count`, with `t_{count-1} = T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    step: f64,
    count: usize,
    final_time: f64,
}

impl TimeGrid {
    pub fn new(final_time: f64, count: usize) -> Result<Self> {
        if count < MIN_TIME_LEVELS {
            return Err(Error::InvalidArgument(format!(
                "time grid needs at least {MIN_TIME_LEVELS} levels, got {count}"
            )));
        }
        if !(final_time > 0.0 && final_time.is_finite()) {
            return Err(Error::InvalidArgument(format!("final time must be positive, got {final_time}")));
        }
        Ok(Self { step: final_time / (count - 1) as f64, count, final_time })
    }

    /// Finest uniform grid whose step does not exceed `target_step`.
    pub fn with_max_step(final_time: f64, target_step: f64) -> Result<Self> {
        if !(target_step > 0.0 && target_step.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {target_step}")));
        }
        let intervals = (final_time / target_step - 1e-9).ceil().max(1.0) as usize;
        Self::new(final_time, (intervals + 1).max(MIN_TIME_LEVELS))
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn time(&self, j: usize) -> f64 {
        if j + 1 == self.count {
            self.final_time
        } else {
            j as f64 * self.step
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|j| self.time(j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStepRule {
    /// Absolute step (upper bound; the grid step divides `T` evenly).
    Fixed(f64),
    /// `h_t = h_x / ratio`.
    Ratio(f64),
}

/// Mesh node count plus time-step rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    pub nodes: usize,
    pub time_step: TimeStepRule,
}

impl Resolution {
    pub fn new(nodes: usize, time_step: TimeStepRule) -> Self {
        Self { nodes, time_step }
    }

    pub fn mesh(&self, problem: &BeamProblem) -> Result<Mesh> {
        Mesh::uniform(problem.length, self.nodes)
    }

    pub fn grid(&self, problem: &BeamProblem) -> Result<TimeGrid> {
        let step = match self.time_step {
            TimeStepRule::Fixed(h) => h,
            TimeStepRule::Ratio(r) if r > 0.0 => problem.length / (self.nodes.max(2) - 1) as f64 / r,
            TimeStepRule::Ratio(r) => {
                return Err(Error::InvalidArgument(format!("step ratio must be positive, got {r}")))
            }
        };
        TimeGrid::with_max_step(problem.final_time, step)
    }
}

/// Factored backward-difference iteration for `M U'' + C U' + K U = f`.
///
/// Each step solves
/// `(2/h² M + 3/(2h) C + K) U^j = f(t_j) + M(5U^{j-1} - 4U^{j-2} + U^{j-3})/h² + C(4U^{j-1} - U^{j-2})/(2h)`.
#[derive(Debug, Clone)]
pub struct Integrator {
    h: f64,
    mass: BandedSymmetricMatrix,
    damping: BandedSymmetricMatrix,
    factor: BandedCholesky,
}

impl Integrator {
    pub fn new(
        mass: &BandedSymmetricMatrix,
        damping: &BandedSymmetricMatrix,
        stiffness: &BandedSymmetricMatrix,
        h: f64,
    ) -> Result<Self> {
        let a = BandedSymmetricMatrix::combination(&[
            (2.0 / (h * h), mass),
            (1.5 / h, damping),
            (1.0, stiffness),
        ]);
        let factor = BandedCholesky::factor(&a, "time-step iteration")?;
        Ok(Self { h, mass: mass.clone(), damping: damping.clone(), factor })
    }

    /// Next level from `[U^{j-1}, U^{j-2}, U^{j-3}]` and the load at `t_j`.
    pub fn step(&self, history: [&[f64]; 3], load: &[f64]) -> Vec<f64> {
        let [u1, u2, u3] = history;
        let h = self.h;
        let accel: Vec<f64> = (0..u1.len())
            .map(|i| (5.0 * u1[i] - 4.0 * u2[i] + u3[i]) / (h * h))
            .collect();
        let vel: Vec<f64> = (0..u1.len()).map(|i| (4.0 * u1[i] - u2[i]) / (2.0 * h)).collect();
        let ma = self.mass.mul_vec(&accel);
        let cv = self.damping.mul_vec(&vel);
        let mut rhs: Vec<f64> = load.iter().zip(ma).zip(cv).map(|((f, a), c)| f + a + c).collect();
        self.factor.solve_in_place(&mut rhs);
        rhs
    }
}

/// First three levels plus the initial velocity and acceleration DOFs.
#[derive(Debug, Clone, PartialEq)]
pub struct StartupLevels {
    pub levels: [Vec<f64>; 3],
    pub velocity: Vec<f64>,
    pub acceleration: Vec<f64>,
}

/// Two trapezoidal-rule steps on the first-order form `U' = V`, `M V' = f - C V - K U`,
/// starting from `(u0, v0)` with `M a0 = f(0) - C v0 - K u0`.
pub fn trapezoidal_start(
    mass: &BandedSymmetricMatrix,
    damping: &BandedSymmetricMatrix,
    stiffness: &BandedSymmetricMatrix,
    h: f64,
    u0: Vec<f64>,
    v0: Vec<f64>,
    load: impl Fn(f64) -> Vec<f64>,
) -> Result<StartupLevels> {
    let n = u0.len();
    let mass_factor = BandedCholesky::factor(mass, "mass")?;
    let s = BandedSymmetricMatrix::combination(&[(4.0 / (h * h), mass), (2.0 / h, damping), (1.0, stiffness)]);
    let s_factor = BandedCholesky::factor(&s, "startup")?;

    let cv = damping.mul_vec(&v0);
    let ku = stiffness.mul_vec(&u0);
    let f0 = load(0.0);
    let a0 = mass_factor.solve(&(0..n).map(|i| f0[i] - cv[i] - ku[i]).collect::<Vec<_>>());

    // (4/h² M + 2/h C + K) U⁺ = f⁺ + M(4U/h² + 4V/h + a) + C(2U/h + V)
    let advance = |u: &[f64], v: &[f64], a: &[f64], t_next: f64| {
        let mvec: Vec<f64> = (0..n).map(|i| 4.0 * u[i] / (h * h) + 4.0 * v[i] / h + a[i]).collect();
        let cvec: Vec<f64> = (0..n).map(|i| 2.0 * u[i] / h + v[i]).collect();
        let fm = mass.mul_vec(&mvec);
        let fc = damping.mul_vec(&cvec);
        let fl = load(t_next);
        let mut rhs: Vec<f64> = (0..n).map(|i| fl[i] + fm[i] + fc[i]).collect();
        s_factor.solve_in_place(&mut rhs);
        let v_next: Vec<f64> = (0..n).map(|i| 2.0 * (rhs[i] - u[i]) / h - v[i]).collect();
        let a_next: Vec<f64> = (0..n).map(|i| 2.0 * (v_next[i] - v[i]) / h - a[i]).collect();
        (rhs, v_next, a_next)
    };

    let (u1, v1, a1) = advance(&u0, &v0, &a0, h);
    let (u2, _, _) = advance(&u1, &v1, &a1, 2.0 * h);
    Ok(StartupLevels { levels: [u0, u1, u2], velocity: v0, acceleration: a0 })
}

pub fn startup(system: &SemiDiscreteSystem, problem: &BeamProblem, grid: &TimeGrid) -> Result<StartupLevels> {
    let u0 = system.interpolate(|x| {
        let (v, d, _) = problem.initial.u0.eval(x);
        (v, d)
    });
    let v0 = system.interpolate(|x| {
        let (v, d, _) = problem.initial.u1.eval(x);
        (v, d)
    });
    trapezoidal_start(
        &system.mass,
        &system.damping,
        &system.stiffness,
        grid.step(),
        u0,
        v0,
        |t| system.load(t),
    )
}

/// DOF vectors at every grid time together with the system that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrace {
    pub grid: TimeGrid,
    pub dofs: Vec<Vec<f64>>,
    /// Interpolant of the initial velocity.
    pub initial_velocity: Vec<f64>,
    pub system: SemiDiscreteSystem,
    pub problem: BeamProblem,
}

pub fn run(problem: &BeamProblem, mesh: &Mesh, grid: &TimeGrid) -> Result<SolutionTrace> {
    problem.validate().into_result()?;
    if (mesh.length() - problem.length).abs() > 1e-12 * problem.length {
        return Err(Error::InvalidArgument(format!(
            "mesh spans [0, {}] but the beam has length {}",
            mesh.length(),
            problem.length
        )));
    }
    let system = fem::assemble(problem, mesh, fem::MIN_QUAD_POINTS)?;
    let integrator = Integrator::new(&system.mass, &system.damping, &system.stiffness, grid.step())?;
    let start = startup(&system, problem, grid)?;

    let mut dofs = Vec::with_capacity(grid.count());
    dofs.extend(start.levels.iter().cloned());
    for j in 3..grid.count() {
        let next = integrator.step([&dofs[j - 1], &dofs[j - 2], &dofs[j - 3]], &system.load(grid.time(j)));
        dofs.push(next);
    }
    Ok(SolutionTrace { grid: *grid, dofs, initial_velocity: start.velocity, system, problem: problem.clone() })
}

pub fn run_at(problem: &BeamProblem, resolution: &Resolution) -> Result<SolutionTrace> {
    let mesh = resolution.mesh(problem)?;
    let grid = resolution.grid(problem)?;
    run(problem, &mesh, &grid)
}

impl SolutionTrace {
    pub fn levels(&self) -> usize {
        self.dofs.len()
    }

    /// DOF velocity at level `j`: centered difference at interior levels, the
    /// initial-velocity interpolant at `j = 0`, and the backward three-point
    /// quotient at the last level.
    pub fn velocity_at(&self, j: usize) -> Vec<f64> {
        let h = self.grid.step();
        let last = self.levels() - 1;
        if j == 0 {
            self.initial_velocity.clone()
        } else if j == last {
            let (a, b, c) = (&self.dofs[j], &self.dofs[j - 1], &self.dofs[j - 2]);
            (0..a.len()).map(|i| (3.0 * a[i] - 4.0 * b[i] + c[i]) / (2.0 * h)).collect()
        } else {
            let (a, b) = (&self.dofs[j + 1], &self.dofs[j - 1]);
            (0..a.len()).map(|i| (a[i] - b[i]) / (2.0 * h)).collect()
        }
    }

    /// Space-time evaluation with linear blending between time levels. `u_t`
    /// uses [`Self::velocity_at`] at grid times and the slope of the linear
    /// blend in between.
    pub fn interpolate(&self, x: f64, t: f64) -> Result<FieldSample> {
        let big_t = self.grid.final_time();
        if !(t >= 0.0 && t <= big_t) {
            return Err(Error::OutOfDomain(format!("t = {t} not in [0, {big_t}]")));
        }
        let h = self.grid.step();
        let s = t / h;
        let nearest = s.round();
        if (s - nearest).abs() < 1e-9 {
            let j = (nearest as usize).min(self.levels() - 1);
            let (u, u_x, u_xx) = self.system.evaluate(&self.dofs[j], x)?;
            let (u_t, _, _) = self.system.evaluate(&self.velocity_at(j), x)?;
            return Ok(FieldSample { u, u_x, u_xx, u_t });
        }
        let j = (s.floor() as usize).min(self.levels() - 2);
        let (t0, t1) = (self.grid.time(j), self.grid.time(j + 1));
        let (a0, a1) = ((t1 - t) / (t1 - t0), (t - t0) / (t1 - t0));
        let lo = self.system.evaluate(&self.dofs[j], x)?;
        let hi = self.system.evaluate(&self.dofs[j + 1], x)?;
        Ok(FieldSample {
            u: a0 * lo.0 + a1 * hi.0,
            u_x: a0 * lo.1 + a1 * hi.1,
            u_xx: a0 * lo.2 + a1 * hi.2,
            u_t: (hi.0 - lo.0) / (t1 - t0),
        })
    }

    /// CSV `t,node,u,u_x`, one row per node per written level. Every
    /// `decimation`-th level is written, plus the final one.
    pub fn write_csv(&self, mut out: impl Write, decimation: usize) -> std::io::Result<()> {
        let step = decimation.max(1);
        writeln!(out, "t,node,u,u_x")?;
        let last = self.levels() - 1;
        for j in (0..self.levels()).filter(|&j| j % step == 0 || j == last) {
            let t = self.grid.time(j);
            for node in 0..self.system.mesh.node_count() {
                let (u, ux) = match self.system.dof_map.node_dofs(node) {
                    Some([w, th]) => (self.dofs[j][w], self.dofs[j][th]),
                    None => (0.0, 0.0),
                };
                writeln!(out, "{t:?},{node},{u:?},{ux:?}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Preset;

    #[test]
    fn grid_hits_final_time() {
        let g = TimeGrid::with_max_step(1.5, 1.0 / 1600.0).unwrap();
        assert_eq!(g.count(), 2401);
        assert_eq!(g.time(2400), 1.5);
        assert!((g.step() - 1.0 / 1600.0).abs() < 1e-18);
        assert!(TimeGrid::new(1.0, 3).is_err());
        assert_eq!(TimeGrid::with_max_step(1.0, 10.0).unwrap().count(), MIN_TIME_LEVELS);
    }

    #[test]
    fn ratio_rule() {
        let p = Preset::TestNe1.problem();
        let g = Resolution::new(41, TimeStepRule::Ratio(40.0)).grid(&p).unwrap();
        assert_eq!(g.count(), 2401);
    }

    #[test]
    fn zero_history_zero_load() {
        let p = Preset::CantileverSpring.problem();
        let sys = fem::assemble(&p, &Mesh::uniform(1.0, 6).unwrap(), 4).unwrap();
        let it = Integrator::new(&sys.mass, &sys.damping, &sys.stiffness, 0.01).unwrap();
        let z = vec![0.0; sys.dofs()];
        assert_eq!(it.step([&z, &z, &z], &z), z);
    }

    #[test]
    fn rest_state_startup_is_zero() {
        let mut p = Preset::CantileverSpring.problem();
        p.initial.u0 = crate::problem::SpatialFunction::Polynomial(vec![0.0]);
        let mesh = Mesh::uniform(1.0, 6).unwrap();
        let sys = fem::assemble(&p, &mesh, 4).unwrap();
        let grid = TimeGrid::new(1.0, 11).unwrap();
        let s = startup(&sys, &p, &grid).unwrap();
        for l in &s.levels {
            assert!(l.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn ne1_startup_interpolates_initial_data() {
        let p = Preset::TestNe1.problem();
        let mesh = Mesh::uniform(1.0, 5).unwrap();
        let sys = fem::assemble(&p, &mesh, 4).unwrap();
        let s = startup(&sys, &p, &TimeGrid::new(1.5, 20).unwrap()).unwrap();
        for &x in &[0.25, 0.6, 1.0] {
            let (u, ..) = sys.evaluate(&s.levels[0], x).unwrap();
            let (v, ..) = sys.evaluate(&s.velocity, x).unwrap();
            assert!((u - x * x).abs() < 1e-14);
            assert!((v + 2.0 * x * x).abs() < 1e-14);
        }
    }

    #[test]
    fn interpolate_rejects_out_of_domain() {
        let p = Preset::TestNe1.problem();
        let trace = run(&p, &Mesh::uniform(1.0, 5).unwrap(), &TimeGrid::new(1.5, 16).unwrap()).unwrap();
        assert!(trace.interpolate(0.5, 1.6).is_err());
        assert!(trace.interpolate(1.2, 0.5).is_err());
    }

    #[test]
    fn run_rejects_invalid_problem() {
        let mut p = Preset::TestNe1.problem();
        p.r = crate::problem::CoefficientField::Constant(-1.0);
        let err = run(&p, &Mesh::uniform(1.0, 5).unwrap(), &TimeGrid::new(1.5, 16).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn csv_layout() {
        let p = Preset::TestNe1.problem();
        let trace = run(&p, &Mesh::uniform(1.0, 3).unwrap(), &TimeGrid::new(1.5, 7).unwrap()).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf, 4).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,node,u,u_x");
        // levels 0, 4 and the last (6), three nodes each
        assert_eq!(lines.len(), 1 + 3 * 3);
        assert!(lines[1].starts_with("0.0,0,"));
        assert!(lines.last().unwrap().starts_with("1.5,2,"));
    }
}
