//! Hermite cubic finite elements on a uniform mesh of `[0, l]`, clamped at `x = 0`.

use std::io::Write;

use crate::banded::BandedSymmetricMatrix;
use crate::error::{Error, Result};
use crate::problem::{BeamProblem, BoundaryForcing, CoefficientField};

/// Cubic Hermite elements couple at most two neighbouring nodes (4 DOFs).
pub const HALF_BANDWIDTH: usize = 3;

/// Smallest Gauss rule accepted by [`assemble`].
pub const MIN_QUAD_POINTS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
    h: f64,
}

impl Mesh {
    pub fn uniform(length: f64, node_count: usize) -> Result<Self> {
        if node_count < 3 {
            return Err(Error::InvalidArgument(format!("mesh needs at least 3 nodes, got {node_count}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidArgument(format!("mesh length must be positive, got {length}")));
        }
        let h = length / (node_count - 1) as f64;
        let mut nodes: Vec<f64> = (0..node_count).map(|i| i as f64 * h).collect();
        nodes[node_count - 1] = length;
        Ok(Self { nodes, h })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn length(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Element containing `x` and the local coordinate in `[0, 1]`. At interior
    /// nodes the element on the left is chosen.
    pub fn locate(&self, x: f64) -> Result<(usize, f64)> {
        let l = self.length();
        if !(x >= 0.0 && x <= l) {
            return Err(Error::OutOfDomain(format!("x = {x} not in [0, {l}]")));
        }
        let s = x / self.h;
        let nearest = s.round();
        let e = if (s - nearest).abs() < 1e-12 {
            (nearest as usize).saturating_sub(1)
        } else {
            s.floor() as usize
        }
        .min(self.element_count() - 1);
        let xi = ((x - self.nodes[e]) / self.h).clamp(0.0, 1.0);
        Ok((e, xi))
    }
}

/// Node-to-DOF numbering. Node 0 is clamped and carries no free DOFs; node
/// `i >= 1` owns displacement `2(i-1)` and rotation `2(i-1)+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofMap {
    node_count: usize,
}

impl DofMap {
    pub fn new(node_count: usize) -> Self {
        Self { node_count }
    }

    pub fn free_dofs(&self) -> usize {
        2 * (self.node_count - 1)
    }

    pub fn node_dofs(&self, node: usize) -> Option<[usize; 2]> {
        (node >= 1 && node < self.node_count).then(|| [2 * (node - 1), 2 * (node - 1) + 1])
    }

    /// Global indices of the four local DOFs of element `e`; `None` for clamped ones.
    pub fn element_dofs(&self, e: usize) -> [Option<usize>; 4] {
        let a = self.node_dofs(e);
        let b = self.node_dofs(e + 1);
        [a.map(|d| d[0]), a.map(|d| d[1]), b.map(|d| d[0]), b.map(|d| d[1])]
    }

    pub fn end_displacement(&self) -> usize {
        self.free_dofs() - 2
    }

    pub fn end_rotation(&self) -> usize {
        self.free_dofs() - 1
    }
}

/// Value and physical derivatives of one shape function.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShapeValue {
    pub value: f64,
    pub dx: f64,
    pub dxx: f64,
}

/// Cubic Hermite shape functions at local coordinate `xi` on an element of
/// length `h`, ordered (left value, left slope, right value, right slope).
/// The slope functions are scaled by `h` so rotation DOFs are physical slopes.
pub fn hermite_shapes(xi: f64, h: f64) -> [ShapeValue; 4] {
    let (x2, x3) = (xi * xi, xi * xi * xi);
    let (ih, ih2) = (1.0 / h, 1.0 / (h * h));
    [
        ShapeValue {
            value: 1.0 - 3.0 * x2 + 2.0 * x3,
            dx: (-6.0 * xi + 6.0 * x2) * ih,
            dxx: (-6.0 + 12.0 * xi) * ih2,
        },
        ShapeValue {
            value: h * (xi - 2.0 * x2 + x3),
            dx: 1.0 - 4.0 * xi + 3.0 * x2,
            dxx: (-4.0 + 6.0 * xi) * ih,
        },
        ShapeValue {
            value: 3.0 * x2 - 2.0 * x3,
            dx: (6.0 * xi - 6.0 * x2) * ih,
            dxx: (6.0 - 12.0 * xi) * ih2,
        },
        ShapeValue {
            value: h * (-x2 + x3),
            dx: -2.0 * xi + 3.0 * x2,
            dxx: (-2.0 + 6.0 * xi) * ih,
        },
    ]
}

/// Gauss-Legendre rule mapped to `[0, 1]`: (points, weights).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut pts = vec![0.0; n];
    let mut wts = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and its derivative
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        pts[i] = 0.5 * (1.0 - z);
        pts[n - 1 - i] = 0.5 * (1.0 + z);
        wts[i] = 0.5 * w;
        wts[n - 1 - i] = 0.5 * w;
    }
    (pts, wts)
}

/// Gauss rule with shape functions tabulated at its points.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub shapes: Vec<[ShapeValue; 4]>,
}

impl ElementRule {
    pub fn new(n: usize, h: f64) -> Self {
        let (points, weights) = gauss_legendre(n);
        let shapes = points.iter().map(|&xi| hermite_shapes(xi, h)).collect();
        Self { points, weights, shapes }
    }
}

/// Which derivative pair an element integral couples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    /// `∫ c ψ_a ψ_b`
    Values,
    /// `∫ c ψ_a'' ψ_b''`
    Curvatures,
}

/// Local 4x4 matrix of `∫ c(x) ψ_a ψ_b` or `∫ c(x) ψ_a'' ψ_b''` over `[x0, x0 + h]`.
pub fn element_matrix(coef: &CoefficientField, x0: f64, h: f64, rule: &ElementRule, pairing: Pairing) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for ((&xi, &w), sh) in rule.points.iter().zip(&rule.weights).zip(&rule.shapes) {
        let c = coef.eval(x0 + xi * h) * w * h;
        let f = |s: &ShapeValue| match pairing {
            Pairing::Values => s.value,
            Pairing::Curvatures => s.dxx,
        };
        for a in 0..4 {
            let ca = c * f(&sh[a]);
            for b in 0..4 {
                m[a][b] += ca * f(&sh[b]);
            }
        }
    }
    m
}

/// Mass, damping and stiffness matrices of the clamped beam plus the end load.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiDiscreteSystem {
    pub mass: BandedSymmetricMatrix,
    pub damping: BandedSymmetricMatrix,
    pub stiffness: BandedSymmetricMatrix,
    pub dof_map: DofMap,
    pub mesh: Mesh,
    pub forcing: BoundaryForcing,
    /// Gauss rule used for assembly, reused by post-processing.
    pub rule: ElementRule,
}

/// Gauss points needed to integrate `∫ρψψ`, `∫μψψ` and `∫rψ''ψ''` exactly for
/// polynomial coefficients; `requested` for tables.
pub fn quadrature_points(problem: &BeamProblem, requested: usize) -> usize {
    let value_deg = [&problem.rho, &problem.mu]
        .iter()
        .filter_map(|c| c.polynomial_degree())
        .max()
        .unwrap_or(0);
    let curv_deg = problem.r.polynomial_degree().unwrap_or(0);
    // n-point Gauss is exact through degree 2n-1
    let need = ((6 + value_deg + 1 + 1) / 2).max((2 + curv_deg + 1 + 1) / 2);
    requested.max(need)
}

pub fn assemble(problem: &BeamProblem, mesh: &Mesh, quad_points: usize) -> Result<SemiDiscreteSystem> {
    if quad_points < MIN_QUAD_POINTS {
        return Err(Error::InvalidArgument(format!(
            "{quad_points} quadrature points under-integrate cubic products (need at least {MIN_QUAD_POINTS})"
        )));
    }
    let dof_map = DofMap::new(mesh.node_count());
    let n = dof_map.free_dofs();
    let h = mesh.h();
    let rule = ElementRule::new(quadrature_points(problem, quad_points), h);

    let mut mass = BandedSymmetricMatrix::zeros(n, HALF_BANDWIDTH);
    let mut damping = BandedSymmetricMatrix::zeros(n, HALF_BANDWIDTH);
    let mut stiffness = BandedSymmetricMatrix::zeros(n, HALF_BANDWIDTH);

    for e in 0..mesh.element_count() {
        let x0 = mesh.nodes()[e];
        let dofs = dof_map.element_dofs(e);
        let me = element_matrix(&problem.rho, x0, h, &rule, Pairing::Values);
        let ce = element_matrix(&problem.mu, x0, h, &rule, Pairing::Values);
        let ke = element_matrix(&problem.r, x0, h, &rule, Pairing::Curvatures);
        for a in 0..4 {
            let Some(ga) = dofs[a] else { continue };
            // lower triangle only: add() fills the symmetric pair
            for b in 0..=a {
                let Some(gb) = dofs[b] else { continue };
                if a == b {
                    mass.add(ga, ga, me[a][a]);
                    damping.add(ga, ga, ce[a][a]);
                    stiffness.add(ga, ga, ke[a][a]);
                } else {
                    mass.add(ga, gb, me[a][b]);
                    damping.add(ga, gb, ce[a][b]);
                    stiffness.add(ga, gb, ke[a][b]);
                }
            }
        }
    }

    let k = &problem.boundary;
    let (w, th) = (dof_map.end_displacement(), dof_map.end_rotation());
    damping.add(w, w, k.k_v);
    damping.add(th, th, k.k_a);
    stiffness.add(w, w, k.k_d);
    stiffness.add(th, th, k.k_r);

    Ok(SemiDiscreteSystem {
        mass,
        damping,
        stiffness,
        dof_map,
        mesh: mesh.clone(),
        forcing: problem.forcing.clone(),
        rule,
    })
}

impl SemiDiscreteSystem {
    pub fn dofs(&self) -> usize {
        self.dof_map.free_dofs()
    }

    /// Right-hand side at time `t`: the end moment and shear enter with the
    /// signs produced by integrating the bending term by parts.
    pub fn load(&self, t: f64) -> Vec<f64> {
        let mut f = vec![0.0; self.dofs()];
        f[self.dof_map.end_displacement()] = -self.forcing.shear.eval(t);
        f[self.dof_map.end_rotation()] = -self.forcing.moment.eval(t);
        f
    }

    /// Local DOF values of element `e` (zeros at the clamped node).
    pub fn element_values(&self, dofs: &[f64], e: usize) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, g) in out.iter_mut().zip(self.dof_map.element_dofs(e)) {
            if let Some(g) = g {
                *o = dofs[g];
            }
        }
        out
    }

    /// (u, u_x, u_xx) of the Hermite interpolant at `x`. `u_xx` takes the
    /// left-element limit at interior nodes.
    pub fn evaluate(&self, dofs: &[f64], x: f64) -> Result<(f64, f64, f64)> {
        if dofs.len() != self.dofs() {
            return Err(Error::InvalidArgument(format!(
                "expected {} DOFs, got {}",
                self.dofs(),
                dofs.len()
            )));
        }
        let (e, xi) = self.mesh.locate(x)?;
        let local = self.element_values(dofs, e);
        let sh = hermite_shapes(xi, self.mesh.h());
        let mut out = (0.0, 0.0, 0.0);
        for (v, s) in local.iter().zip(&sh) {
            out.0 += v * s.value;
            out.1 += v * s.dx;
            out.2 += v * s.dxx;
        }
        Ok(out)
    }

    /// Nodal interpolant from `f(x) -> (value, slope)`.
    pub fn interpolate(&self, f: impl Fn(f64) -> (f64, f64)) -> Vec<f64> {
        let mut dofs = vec![0.0; self.dofs()];
        for (i, &x) in self.mesh.nodes().iter().enumerate().skip(1) {
            let [w, th] = self.dof_map.node_dofs(i).expect("free node");
            let (v, s) = f(x);
            dofs[w] = v;
            dofs[th] = s;
        }
        dofs
    }

    /// Tip displacement and slope `(u(l), u_x(l))` straight from the DOFs.
    pub fn end_values(&self, dofs: &[f64]) -> (f64, f64) {
        (dofs[self.dof_map.end_displacement()], dofs[self.dof_map.end_rotation()])
    }

    /// Writes `matrix` in MatrixMarket coordinate symmetric format (lower triangle).
    pub fn write_matrix_market(matrix: &BandedSymmetricMatrix, mut out: impl Write) -> std::io::Result<()> {
        let entries: Vec<_> = matrix.lower_entries().filter(|e| e.2 != 0.0).collect();
        writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
        writeln!(out, "{} {} {}", matrix.dim(), matrix.dim(), entries.len())?;
        for (i, j, v) in entries {
            writeln!(out, "{} {} {:e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}
