//! Independent reference implementations shared by the oracle tests.
#![allow(dead_code)]

use beamstab_core::banded::BandedSymmetricMatrix;
use beamstab_core::problem::CoefficientField;
use num_complex::Complex64;

pub const ORACLE_POINTS: usize = 50;

pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Gauss rule on [0, 1] from bracketed sign changes of P_n, refined by bisection.
pub fn oracle_rule(n: usize) -> Vec<(f64, f64)> {
    let samples = 40 * n;
    let mut out = Vec::with_capacity(n);
    for i in 0..samples {
        let (mut a, mut b) = (-1.0 + 2.0 * i as f64 / samples as f64, -1.0 + 2.0 * (i + 1) as f64 / samples as f64);
        let fa = legendre(n, a).0;
        if fa * legendre(n, b).0 > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if legendre(n, m).0 * fa > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let x = 0.5 * (a + b);
        let (_, pm1) = legendre(n, x);
        let w = 2.0 * (1.0 - x * x) / (n as f64 * pm1).powi(2);
        out.push((0.5 * (1.0 + x), 0.5 * w));
    }
    assert_eq!(out.len(), n);
    out
}

/// Cubic Hermite basis on [a, a + h] by solving the interpolation conditions
/// for monomial coefficients in `y = x - a`.
pub fn oracle_shapes(h: f64) -> [[f64; 4]; 4] {
    // rows: value at 0, slope at 0, value at h, slope at h
    let rows = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [1.0, h, h * h, h * h * h], [0.0, 1.0, 2.0 * h, 3.0 * h * h]];
    let mut shapes = [[0.0; 4]; 4];
    for (k, shape) in shapes.iter_mut().enumerate() {
        let mut a = rows;
        let mut rhs = [0.0; 4];
        rhs[k] = 1.0;
        for c in 0..4 {
            let p = (c..4).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, p);
            rhs.swap(c, p);
            for r in c + 1..4 {
                let f = a[r][c] / a[c][c];
                for q in c..4 {
                    a[r][q] -= f * a[c][q];
                }
                rhs[r] -= f * rhs[c];
            }
        }
        for c in (0..4).rev() {
            let s: f64 = (c + 1..4).map(|q| a[c][q] * shape[q]).sum();
            shape[c] = (rhs[c] - s) / a[c][c];
        }
    }
    shapes
}

pub fn mono(c: &[f64; 4], y: f64, second: bool) -> f64 {
    if second {
        2.0 * c[2] + 6.0 * c[3] * y
    } else {
        c[0] + y * (c[1] + y * (c[2] + y * c[3]))
    }
}

pub fn oracle_element(coef: &CoefficientField, x0: f64, h: f64, second: bool) -> [[f64; 4]; 4] {
    let shapes = oracle_shapes(h);
    let mut m = [[0.0; 4]; 4];
    for (s, w) in oracle_rule(ORACLE_POINTS) {
        let y = s * h;
        let c = coef.eval(x0 + y) * w * h;
        for a in 0..4 {
            for b in 0..4 {
                m[a][b] += c * mono(&shapes[a], y, second) * mono(&shapes[b], y, second);
            }
        }
    }
    m
}

pub fn max_abs(m: &[[f64; 4]; 4]) -> f64 {
    m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()))
}

pub fn scalar(v: f64) -> BandedSymmetricMatrix {
    let mut a = BandedSymmetricMatrix::zeros(1, 0);
    a.add(0, 0, v);
    a
}

/// Roots of a monic cubic by simultaneous (Durand-Kerner) iteration.
pub fn cubic_roots(c2: f64, c1: f64, c0: f64) -> [Complex64; 3] {
    let p = |z: Complex64| ((z + c2) * z + c1) * z + c0;
    let mut r = [Complex64::new(0.4, 0.9), Complex64::new(0.4, 0.9).powi(2), Complex64::new(0.4, 0.9).powi(3)];
    for _ in 0..500 {
        for i in 0..3 {
            let mut d = Complex64::new(1.0, 0.0);
            for j in 0..3 {
                if i != j {
                    d *= r[i] - r[j];
                }
            }
            r[i] -= p(r[i]) / d;
        }
    }
    r
}

pub fn det3(m: [[Complex64; 3]; 3]) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Closed form `u_j = Σ c_i z_i^j` of the homogeneous three-level recurrence.
pub fn closed_form(m: f64, c: f64, k: f64, h: f64, start: [f64; 3], count: usize) -> Vec<f64> {
    let a = 2.0 * m / (h * h) + 1.5 * c / h + k;
    let b1 = 5.0 * m / (h * h) + 2.0 * c / h;
    let b2 = -4.0 * m / (h * h) - 0.5 * c / h;
    let b3 = m / (h * h);
    // a z³ - b1 z² - b2 z - b3 = 0
    let z = cubic_roots(-b1 / a, -b2 / a, -b3 / a);
    let vand = [[Complex64::new(1.0, 0.0); 3], z, [z[0] * z[0], z[1] * z[1], z[2] * z[2]]];
    let rhs = start.map(|v| Complex64::new(v, 0.0));
    let d = det3(vand);
    let coef: Vec<Complex64> = (0..3)
        .map(|col| {
            let mut mm = vand;
            for row in 0..3 {
                mm[row][col] = rhs[row];
            }
            det3(mm) / d
        })
        .collect();
    (0..count).map(|j| (0..3).map(|i| coef[i] * z[i].powi(j as i32)).sum::<Complex64>().re).collect()
}

