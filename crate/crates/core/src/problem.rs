//! Beam problem definition: coefficients, boundary springs and dampers,
//! boundary forcing, initial data, validation and the built-in presets.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;

/// Spatially varying coefficient (density, external damping or flexural rigidity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum CoefficientField {
    Constant(f64),
    /// Ascending coefficients in `x`.
    Polynomial(Vec<f64>),
    /// `(x, value)` nodes, linearly interpolated.
    Table(Vec<[f64; 2]>),
}

impl CoefficientField {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            CoefficientField::Constant(c) => *c,
            CoefficientField::Polynomial(c) => poly::eval(c, x),
            CoefficientField::Table(t) => table_eval(t, x).0,
        }
    }

    /// Structural check: the field can be evaluated everywhere on `[0, length]`.
    pub fn check(&self, length: f64) -> std::result::Result<(), String> {
        match self {
            CoefficientField::Constant(c) if !c.is_finite() => Err("constant is not finite".into()),
            CoefficientField::Constant(_) => Ok(()),
            CoefficientField::Polynomial(c) if c.is_empty() => Err("polynomial has no coefficients".into()),
            CoefficientField::Polynomial(c) if c.iter().any(|v| !v.is_finite()) => {
                Err("polynomial coefficient is not finite".into())
            }
            CoefficientField::Polynomial(_) => Ok(()),
            CoefficientField::Table(t) => check_table(t, 0.0, length),
        }
    }

    /// (inf, sup) over `[0, length]`. Exact for constants and polynomials;
    /// for tables the extrema of the interpolant are attained at nodes.
    pub fn bounds(&self, length: f64) -> (f64, f64) {
        match self {
            CoefficientField::Constant(c) => (*c, *c),
            CoefficientField::Polynomial(c) => poly::range_on(c, 0.0, length),
            CoefficientField::Table(t) => {
                let ends = [self.eval(0.0), self.eval(length)];
                t.iter()
                    .filter(|p| p[0] > 0.0 && p[0] < length)
                    .map(|p| p[1])
                    .chain(ends)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
            }
        }
    }

    /// Polynomial degree, or `None` for piecewise-linear tables.
    pub fn polynomial_degree(&self) -> Option<usize> {
        match self {
            CoefficientField::Constant(_) => Some(0),
            CoefficientField::Polynomial(c) => Some(poly::degree(c).unwrap_or(0)),
            CoefficientField::Table(_) => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            CoefficientField::Constant(_) => true,
            CoefficientField::Polynomial(c) => poly::degree(c).unwrap_or(0) == 0,
            CoefficientField::Table(t) => t.windows(2).all(|w| w[0][1] == w[1][1]),
        }
    }

    pub fn scaled(&self, factor: f64) -> CoefficientField {
        match self {
            CoefficientField::Constant(c) => CoefficientField::Constant(c * factor),
            CoefficientField::Polynomial(c) => {
                CoefficientField::Polynomial(c.iter().map(|v| v * factor).collect())
            }
            CoefficientField::Table(t) => {
                CoefficientField::Table(t.iter().map(|p| [p[0], p[1] * factor]).collect())
            }
        }
    }
}

/// Linear interpolation on a sorted table: (value, slope). Constant extension
/// outside the node range.
fn table_eval(t: &[[f64; 2]], x: f64) -> (f64, f64) {
    match t {
        [] => (f64::NAN, f64::NAN),
        [only] => (only[1], 0.0),
        _ => {
            if x <= t[0][0] {
                return (t[0][1], 0.0);
            }
            if x >= t[t.len() - 1][0] {
                return (t[t.len() - 1][1], 0.0);
            }
            let k = t.partition_point(|p| p[0] <= x).clamp(1, t.len() - 1);
            let (a, b) = (t[k - 1], t[k]);
            let slope = (b[1] - a[1]) / (b[0] - a[0]);
            (a[1] + slope * (x - a[0]), slope)
        }
    }
}

fn check_table(t: &[[f64; 2]], lo: f64, hi: f64) -> std::result::Result<(), String> {
    if t.len() < 2 {
        return Err("table needs at least two nodes".into());
    }
    if t.iter().flatten().any(|v| !v.is_finite()) {
        return Err("table entry is not finite".into());
    }
    if t.windows(2).any(|w| w[1][0] <= w[0][0]) {
        return Err("table abscissae must be strictly increasing".into());
    }
    let eps = 1e-12 * (1.0 + hi.abs());
    if t[0][0] > lo + eps || t[t.len() - 1][0] < hi - eps {
        return Err(format!("table does not cover [{lo}, {hi}]"));
    }
    Ok(())
}

/// Spring and damper constants at the free end `x = l`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryParams {
    /// Rotational spring.
    pub k_r: f64,
    /// Displacement spring.
    pub k_d: f64,
    /// Angular damper.
    pub k_a: f64,
    /// Velocity damper.
    pub k_v: f64,
}

/// Scalar function of time.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum TimeFunction {
    #[default]
    Zero,
    /// `a * exp(b t)`
    Exponential { a: f64, b: f64 },
    Table(Vec<[f64; 2]>),
}

impl TimeFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFunction::Zero => 0.0,
            TimeFunction::Exponential { a, b } => a * (b * t).exp(),
            TimeFunction::Table(tab) => table_eval(tab, t).0,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            TimeFunction::Zero => true,
            TimeFunction::Exponential { a, .. } => *a == 0.0,
            TimeFunction::Table(tab) => tab.iter().all(|p| p[1] == 0.0),
        }
    }

    fn check(&self, final_time: f64) -> std::result::Result<(), String> {
        match self {
            TimeFunction::Zero => Ok(()),
            TimeFunction::Exponential { a, b } if !(a.is_finite() && b.is_finite()) => {
                Err("exponential parameters must be finite".into())
            }
            TimeFunction::Exponential { .. } => Ok(()),
            TimeFunction::Table(tab) => check_table(tab, 0.0, final_time),
        }
    }
}

/// Inhomogeneous end loads. With forcing, the end conditions read
/// `-(r u_xx)(l) = k_r u_x + k_a u_xt + g_M` and
/// `(r u_xx)_x(l) = k_d u + k_v u_t + g_Q`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryForcing {
    #[serde(rename = "g_M")]
    pub moment: TimeFunction,
    #[serde(rename = "g_Q")]
    pub shear: TimeFunction,
}

impl BoundaryForcing {
    pub fn is_zero(&self) -> bool {
        self.moment.is_zero() && self.shear.is_zero()
    }
}

/// Initial displacement or velocity profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum SpatialFunction {
    Polynomial(Vec<f64>),
    Table(Vec<[f64; 2]>),
}

impl SpatialFunction {
    /// (value, first derivative, second derivative).
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        match self {
            SpatialFunction::Polynomial(c) => {
                let d1 = poly::derivative(c);
                let d2 = poly::derivative(&d1);
                (poly::eval(c, x), poly::eval(&d1, x), poly::eval(&d2, x))
            }
            SpatialFunction::Table(t) => {
                let (v, s) = table_eval(t, x);
                (v, s, 0.0)
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    fn check(&self, length: f64) -> std::result::Result<(), String> {
        match self {
            SpatialFunction::Polynomial(c) if c.iter().any(|v| !v.is_finite()) => {
                Err("polynomial coefficient is not finite".into())
            }
            SpatialFunction::Polynomial(_) => Ok(()),
            SpatialFunction::Table(t) => check_table(t, 0.0, length),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub u0: SpatialFunction,
    pub u1: SpatialFunction,
}

/// Complete beam problem instance (SI units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamProblem {
    pub length: f64,
    pub final_time: f64,
    pub rho: CoefficientField,
    pub mu: CoefficientField,
    pub r: CoefficientField,
    pub boundary: BoundaryParams,
    #[serde(default)]
    pub forcing: BoundaryForcing,
    pub initial: InitialData,
}

/// Infima and suprema of the three coefficient fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialBounds {
    pub rho: (f64, f64),
    pub mu: (f64, f64),
    pub r: (f64, f64),
}

impl BeamProblem {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn material_bounds(&self) -> MaterialBounds {
        MaterialBounds {
            rho: self.rho.bounds(self.length),
            mu: self.mu.bounds(self.length),
            r: self.r.bounds(self.length),
        }
    }

    /// `k_a + k_v + mu_0 > 0`: some dissipation is present.
    pub fn is_damped(&self) -> bool {
        self.boundary.k_a + self.boundary.k_v + self.material_bounds().mu.0 > 0.0
    }

    pub fn is_forced(&self) -> bool {
        !self.forcing.is_zero()
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    /// The field cannot be evaluated or is malformed.
    Structural,
    /// A coefficient or constant condition is violated.
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.issues.iter().any(|i| i.severity != Severity::Warning)
    }

    pub fn has_structural_errors(&self) -> bool {
        self.issues.iter().any(|i| i.severity == Severity::Structural)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    /// `Err` when any non-warning issue is present.
    pub fn into_result(self) -> Result<ValidationReport> {
        if self.has_errors() {
            Err(Error::Validation(self))
        } else {
            Ok(self)
        }
    }

    fn push(&mut self, severity: Severity, field: &str, message: impl Into<String>) {
        self.issues.push(Issue { severity, field: field.to_string(), message: message.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return writeln!(f, "ok");
        }
        for i in &self.issues {
            let tag = match i.severity {
                Severity::Structural => "STRUCTURAL",
                Severity::Error => "ERROR",
                Severity::Warning => "WARNING",
            };
            writeln!(f, "{tag} [{}]: {}", i.field, i.message)?;
        }
        Ok(())
    }
}

pub fn validate(problem: &BeamProblem) -> ValidationReport {
    let mut report = ValidationReport::default();
    let l = problem.length;

    if !(l.is_finite() && l > 0.0) {
        report.push(Severity::Structural, "length", "length must be positive and finite");
        return report;
    }
    if !(problem.final_time.is_finite() && problem.final_time > 0.0) {
        report.push(Severity::Structural, "final_time", "final time must be positive and finite");
    }

    let mut coefficients_ok = true;
    for (name, field) in [("rho", &problem.rho), ("mu", &problem.mu), ("r", &problem.r)] {
        if let Err(msg) = field.check(l) {
            report.push(Severity::Structural, name, msg);
            coefficients_ok = false;
        }
    }

    let mut mu0 = 0.0;
    if coefficients_ok {
        let b = problem.material_bounds();
        if !(b.rho.0 > 0.0) {
            report.push(Severity::Error, "rho", format!("ρ₀ > 0 fails (inf ρ = {})", b.rho.0));
        }
        if !(b.r.0 > 0.0) {
            report.push(Severity::Error, "r", format!("r₀ > 0 fails (inf r = {})", b.r.0));
        }
        if !(b.mu.0 >= 0.0) {
            report.push(Severity::Error, "mu", format!("μ₀ ≥ 0 fails (inf μ = {})", b.mu.0));
        }
        mu0 = b.mu.0;
    }

    let k = &problem.boundary;
    for (name, v) in [("k_r", k.k_r), ("k_d", k.k_d), ("k_a", k.k_a), ("k_v", k.k_v)] {
        if !v.is_finite() {
            report.push(Severity::Structural, &format!("boundary.{name}"), "value is not finite");
        } else if v < 0.0 {
            report.push(Severity::Error, &format!("boundary.{name}"), format!("{name} ≥ 0 fails ({v})"));
        }
    }

    if problem.final_time.is_finite() && problem.final_time > 0.0 {
        for (name, g) in [("forcing.g_M", &problem.forcing.moment), ("forcing.g_Q", &problem.forcing.shear)] {
            if let Err(msg) = g.check(problem.final_time) {
                report.push(Severity::Structural, name, msg);
            }
        }
    }

    let init = &problem.initial;
    match init.u0.check(l) {
        Err(msg) => report.push(Severity::Structural, "initial.u0", msg),
        Ok(()) => {
            if matches!(init.u0, SpatialFunction::Table(_)) {
                report.push(
                    Severity::Structural,
                    "initial.u0",
                    "u0 needs two derivatives; use a polynomial",
                );
            } else {
                let (v, d, _) = init.u0.eval(0.0);
                if v.abs() > 1e-12 || d.abs() > 1e-12 {
                    report.push(
                        Severity::Error,
                        "initial.u0",
                        format!("clamped compatibility u0(0) = u0'(0) = 0 fails ({v}, {d})"),
                    );
                }
            }
        }
    }
    if let Err(msg) = init.u1.check(l) {
        report.push(Severity::Structural, "initial.u1", msg);
    }

    if coefficients_ok && !(k.k_a + k.k_v + mu0 > 0.0) {
        report.push(
            Severity::Warning,
            "damping",
            "k_a+k_v+μ₀>0 fails: no dissipation, the decay estimate does not apply",
        );
    }
    report
}

/// Separable exact solution `u(x, t) = p(x) exp(rate t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub shape: Vec<f64>,
    pub rate: f64,
}

/// Exact values of the fields at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldSample {
    pub u: f64,
    pub u_x: f64,
    pub u_xx: f64,
    pub u_t: f64,
}

impl ExactSolution {
    pub fn eval(&self, x: f64, t: f64) -> FieldSample {
        let e = (self.rate * t).exp();
        let d1 = poly::derivative(&self.shape);
        let d2 = poly::derivative(&d1);
        let p = poly::eval(&self.shape, x);
        FieldSample {
            u: p * e,
            u_x: poly::eval(&d1, x) * e,
            u_xx: poly::eval(&d2, x) * e,
            u_t: self.rate * p * e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    CantileverFree,
    CantileverSpring,
    CantileverDampers,
    MastConstant,
    TestNe1,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::CantileverFree,
        Preset::CantileverSpring,
        Preset::CantileverDampers,
        Preset::MastConstant,
        Preset::TestNe1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::CantileverFree => "cantilever_free",
            Preset::CantileverSpring => "cantilever_spring",
            Preset::CantileverDampers => "cantilever_dampers",
            Preset::MastConstant => "mast_constant",
            Preset::TestNe1 => "test_NE1",
        }
    }

    pub fn problem(self) -> BeamProblem {
        match self {
            // Free end, distributed damping only. u0 has zero moment and
            // shear at x = 1.
            Preset::CantileverFree => BeamProblem {
                length: 1.0,
                final_time: 2.0,
                rho: CoefficientField::Constant(1.0),
                mu: CoefficientField::Constant(2.0),
                r: CoefficientField::Constant(1.0),
                boundary: BoundaryParams::default(),
                forcing: BoundaryForcing::default(),
                initial: InitialData {
                    u0: SpatialFunction::Polynomial(vec![0.0, 0.0, 1.0, -2.0 / 3.0, 1.0 / 6.0]),
                    u1: SpatialFunction::Polynomial(vec![0.0]),
                },
            },
            // Springs, no dampers. u0 satisfies -u'' = u', u''' = u at x = 1.
            Preset::CantileverSpring => BeamProblem {
                length: 1.0,
                final_time: 2.0,
                rho: CoefficientField::Constant(1.0),
                mu: CoefficientField::Constant(1.0),
                r: CoefficientField::Constant(1.0),
                boundary: BoundaryParams { k_r: 1.0, k_d: 1.0, k_a: 0.0, k_v: 0.0 },
                forcing: BoundaryForcing::default(),
                initial: InitialData {
                    u0: SpatialFunction::Polynomial(vec![0.0, 0.0, 1.0, -108.0 / 127.0, 29.0 / 127.0]),
                    u1: SpatialFunction::Polynomial(vec![0.0]),
                },
            },
            Preset::CantileverDampers => BeamProblem {
                mu: CoefficientField::Constant(1.0),
                ..mast(1.0, 1.0, 1.0, 1.0)
            },
            Preset::MastConstant => mast(1.0, 1.0, 1.0, 1.0),
            Preset::TestNe1 => BeamProblem {
                length: 1.0,
                final_time: 1.5,
                rho: CoefficientField::Constant(1.0),
                mu: CoefficientField::Constant(2.0),
                r: CoefficientField::Polynomial(vec![1.0, 1.0]),
                boundary: BoundaryParams { k_r: 6.0, k_d: 4.0, k_a: 3.0, k_v: 2.0 },
                forcing: BoundaryForcing {
                    moment: TimeFunction::Exponential { a: -4.0, b: -2.0 },
                    shear: TimeFunction::Exponential { a: 2.0, b: -2.0 },
                },
                initial: InitialData {
                    u0: SpatialFunction::Polynomial(vec![0.0, 0.0, 1.0]),
                    u1: SpatialFunction::Polynomial(vec![0.0, 0.0, -2.0]),
                },
            },
        }
    }

    pub fn exact_solution(self) -> Option<ExactSolution> {
        match self {
            Preset::TestNe1 => Some(ExactSolution { shape: vec![0.0, 0.0, 1.0], rate: -2.0 }),
            _ => None,
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn preset(name: &str) -> Result<BeamProblem> {
    Ok(name.parse::<Preset>()?.problem())
}

/// Undamped constant-coefficient beam `m u_tt + EI u_xxxx = 0` with rate
/// feedback at the tip (no springs). The initial state satisfies the end
/// conditions at `t = 0` for unit constants.
pub fn mast(m: f64, ei: f64, k_a: f64, k_v: f64) -> BeamProblem {
    BeamProblem {
        length: 1.0,
        final_time: 2.0,
        rho: CoefficientField::Constant(m),
        mu: CoefficientField::Constant(0.0),
        r: CoefficientField::Constant(ei),
        boundary: BoundaryParams { k_r: 0.0, k_d: 0.0, k_a, k_v },
        forcing: BoundaryForcing::default(),
        initial: InitialData {
            u0: SpatialFunction::Polynomial(vec![0.0, 0.0, -1.5, 1.0 / 6.0]),
            u1: SpatialFunction::Polynomial(vec![0.0, 0.0, 1.0]),
        },
    }
}
