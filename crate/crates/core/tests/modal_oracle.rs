//! Tip response of the undamped mast with end dampers against a truncated
//! series in the clamped-free eigenmodes.

use beamstab_core::fem::gauss_legendre;
use beamstab_core::problem::Preset;
use beamstab_core::stepper::{self, Resolution, TimeStepRule};

/// Roots of `1 + cos b cosh b = 0`, i.e. `cos b + sech b = 0`, by bisection.
fn mode_numbers(count: usize) -> Vec<f64> {
    let g = |b: f64| b.cos() + 1.0 / b.cosh();
    (1..=count)
        .map(|n| {
            let c = (n as f64 - 0.5) * std::f64::consts::PI;
            let (mut a, mut b) = (c - 0.5, c + 0.5);
            let ga = g(a);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if g(m) * ga > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

struct Mode {
    beta: f64,
    s: f64,
    one_minus_s: f64,
    scale: f64,
}

impl Mode {
    fn new(beta: f64) -> Self {
        let denom = beta.sinh() + beta.sin();
        let one_minus_s = (-(-beta).exp() + beta.sin() - beta.cos()) / denom;
        let mut m = Mode { beta, s: 1.0 - one_minus_s, one_minus_s, scale: 1.0 };
        let norm: f64 = quad(|x| m.value(x).powi(2));
        m.scale = 1.0 / norm.sqrt();
        m
    }

    // cosh y - s sinh y written without cancellation
    fn value(&self, x: f64) -> f64 {
        let y = self.beta * x;
        self.scale
            * (0.5 * (self.one_minus_s * y.exp() + (1.0 + self.s) * (-y).exp()) - y.cos() + self.s * y.sin())
    }

    fn slope(&self, x: f64) -> f64 {
        let y = self.beta * x;
        self.scale
            * self.beta
            * (0.5 * (self.one_minus_s * y.exp() - (1.0 + self.s) * (-y).exp()) + y.sin() + self.s * y.cos())
    }
}

fn quad(f: impl Fn(f64) -> f64) -> f64 {
    let (pts, wts) = gauss_legendre(10);
    let cells = 200;
    let h = 1.0 / cells as f64;
    (0..cells)
        .map(|c| pts.iter().zip(&wts).map(|(&p, &w)| w * h * f((c as f64 + p) * h)).sum::<f64>())
        .sum()
}

/// RK4 on `q'' + C q' + Ω² q = 0` over the first `count` modes; returns the tip
/// displacement at the requested times.
fn modal_tip(times: &[f64], count: usize, dt: f64) -> Vec<f64> {
    let p = Preset::MastConstant.problem();
    let (k_a, k_v) = (p.boundary.k_a, p.boundary.k_v);
    let modes: Vec<Mode> = mode_numbers(count).into_iter().map(Mode::new).collect();
    let tip: Vec<f64> = modes.iter().map(|m| m.value(1.0)).collect();
    let tip_slope: Vec<f64> = modes.iter().map(|m| m.slope(1.0)).collect();
    let omega2: Vec<f64> = modes.iter().map(|m| m.beta.powi(4)).collect();
    let damp = |i: usize, j: usize| k_v * tip[i] * tip[j] + k_a * tip_slope[i] * tip_slope[j];

    let mut q: Vec<f64> = modes.iter().map(|m| quad(|x| p.initial.u0.value(x) * m.value(x))).collect();
    let mut v: Vec<f64> = modes.iter().map(|m| quad(|x| p.initial.u1.value(x) * m.value(x))).collect();
    let rhs = |q: &[f64], v: &[f64]| -> Vec<f64> {
        (0..count).map(|i| -omega2[i] * q[i] - (0..count).map(|j| damp(i, j) * v[j]).sum::<f64>()).collect()
    };

    let mut t: f64 = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target - 1e-12 {
            let h = dt.min(target - t);
            let a1 = rhs(&q, &v);
            let q2: Vec<f64> = (0..count).map(|i| q[i] + 0.5 * h * v[i]).collect();
            let v2: Vec<f64> = (0..count).map(|i| v[i] + 0.5 * h * a1[i]).collect();
            let a2 = rhs(&q2, &v2);
            let q3: Vec<f64> = (0..count).map(|i| q[i] + 0.5 * h * v2[i]).collect();
            let v3: Vec<f64> = (0..count).map(|i| v[i] + 0.5 * h * a2[i]).collect();
            let a3 = rhs(&q3, &v3);
            let q4: Vec<f64> = (0..count).map(|i| q[i] + h * v3[i]).collect();
            let v4: Vec<f64> = (0..count).map(|i| v[i] + h * a3[i]).collect();
            let a4 = rhs(&q4, &v4);
            for i in 0..count {
                q[i] += h / 6.0 * (v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]);
                v[i] += h / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
            }
            t += h;
        }
        out.push((0..count).map(|i| q[i] * tip[i]).sum());
    }
    out
}

#[test]
fn mode_numbers_are_the_cantilever_roots() {
    let b = mode_numbers(10);
    assert!((b[0] - 1.875_104_068_711_961).abs() < 1e-12);
    assert!((b[1] - 4.694_091_132_974_175).abs() < 1e-12);
    for m in b.iter().map(|&b| Mode::new(b)) {
        assert!(m.value(0.0).abs() < 1e-12 && m.slope(0.0).abs() < 1e-9);
        // unit-normalized clamped-free modes have |φ(1)| = 2
        assert!((m.value(1.0).abs() - 2.0).abs() < 1e-9);
    }
}

#[test]
fn mast_tip_matches_modal_series() {
    let p = Preset::MastConstant.problem();
    let tr = stepper::run_at(&p, &Resolution::new(41, TimeStepRule::Ratio(40.0))).unwrap();
    let levels: Vec<usize> = (0..tr.levels()).step_by(40).collect();
    let times: Vec<f64> = levels.iter().map(|&j| tr.grid.time(j)).collect();
    let fe: Vec<f64> = levels.iter().map(|&j| tr.system.end_values(&tr.dofs[j]).0).collect();
    let peak = fe.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let worst = |modal: &[f64]| fe.iter().zip(modal).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    // the tip-slope damper couples high modes strongly, so ten modes still carry
    // about 1% truncation error; twenty bring it below the finite-element error budget
    let ten = worst(&modal_tip(&times, 10, 1e-4));
    let twenty = worst(&modal_tip(&times, 20, 5e-5));
    assert!(ten < 1.5e-2 * peak, "10 modes: {ten}, peak {peak}");
    assert!(twenty < 5e-4 * peak, "20 modes: {twenty}, peak {peak}");

    // windowed peaks of |u(l, t)| decay
    let window = |lo: f64, hi: f64| {
        times.iter().zip(&fe).filter(|(t, _)| **t >= lo && **t < hi).map(|(_, u)| u.abs()).fold(0.0, f64::max)
    };
    let peaks: Vec<f64> = (0..4).map(|k| window(0.5 * k as f64, 0.5 * (k + 1) as f64)).collect();
    for w in peaks.windows(2) {
        assert!(w[1] < w[0], "{peaks:?}");
    }
}
