use beamstab_core::banded::BandedCholesky;
use beamstab_core::fem::{self, element_matrix, ElementRule, Mesh, Pairing};
use beamstab_core::problem::{CoefficientField, Preset};
use proptest::prelude::*;

mod common;
use common::{max_abs, oracle_element, oracle_rule, ORACLE_POINTS};

#[test]
fn oracle_rule_integrates_high_degree() {
    let rule = oracle_rule(ORACLE_POINTS);
    let s: f64 = rule.iter().map(|(x, w)| w * x.powi(60)).sum();
    assert!((s - 1.0 / 61.0).abs() < 1e-14);
}

#[test]
fn element_matrices_match_oracle() {
    for preset in Preset::ALL {
        let p = preset.problem();
        let mesh = Mesh::uniform(p.length, 11).unwrap();
        let h = mesh.h();
        let rule = ElementRule::new(fem::quadrature_points(&p, fem::MIN_QUAD_POINTS), h);
        for e in [0, 4, 9] {
            let x0 = mesh.nodes()[e];
            for (coef, pairing, second) in [
                (&p.rho, Pairing::Values, false),
                (&p.mu, Pairing::Values, false),
                (&p.r, Pairing::Curvatures, true),
            ] {
                let got = element_matrix(coef, x0, h, &rule, pairing);
                let want = oracle_element(coef, x0, h, second);
                let scale = max_abs(&want).max(1e-300);
                for a in 0..4 {
                    for b in 0..4 {
                        assert!(
                            (got[a][b] - want[a][b]).abs() <= 1e-12 * scale,
                            "{preset} e={e} {pairing:?} ({a},{b}): {} vs {}",
                            got[a][b],
                            want[a][b]
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn quadratic_coefficients_need_more_points() {
    // degree-2 density: 4 points leave a visible error, the automatic count does not
    let mut p = Preset::CantileverFree.problem();
    p.rho = CoefficientField::Polynomial(vec![1.0, 0.5, 3.0]);
    let h = 0.5;
    let want = oracle_element(&p.rho, 0.5, h, false);
    let auto = element_matrix(&p.rho, 0.5, h, &ElementRule::new(fem::quadrature_points(&p, 4), h), Pairing::Values);
    let four = element_matrix(&p.rho, 0.5, h, &ElementRule::new(4, h), Pairing::Values);
    let err = |m: &[[f64; 4]; 4]| (0..16).map(|k| (m[k / 4][k % 4] - want[k / 4][k % 4]).abs()).fold(0.0, f64::max);
    assert!(err(&auto) < 1e-14, "{}", err(&auto));
    assert!(err(&four) > 1e-12, "{}", err(&four));
}

/// Dense global matrix from oracle elements; node i >= 1 owns DOFs 2(i-1), 2(i-1)+1.
fn oracle_global(coef: &CoefficientField, mesh: &Mesh, second: bool) -> Vec<Vec<f64>> {
    let n = 2 * (mesh.node_count() - 1);
    let mut g = vec![vec![0.0; n]; n];
    for e in 0..mesh.element_count() {
        let local = oracle_element(coef, mesh.nodes()[e], mesh.h(), second);
        let map = |a: usize| {
            let node = e + a / 2;
            (node > 0).then(|| 2 * (node - 1) + a % 2)
        };
        for a in 0..4 {
            for b in 0..4 {
                if let (Some(i), Some(j)) = (map(a), map(b)) {
                    g[i][j] += local[a][b];
                }
            }
        }
    }
    g
}

#[test]
fn assembly_matches_dense_oracle() {
    for preset in Preset::ALL {
        let p = preset.problem();
        let mesh = Mesh::uniform(p.length, 9).unwrap();
        let sys = fem::assemble(&p, &mesh, fem::MIN_QUAD_POINTS).unwrap();
        let mut m = oracle_global(&p.rho, &mesh, false);
        let mut c = oracle_global(&p.mu, &mesh, false);
        let mut k = oracle_global(&p.r, &mesh, true);
        let n = m.len();
        let (w, th) = (n - 2, n - 1);
        c[w][w] += p.boundary.k_v;
        c[th][th] += p.boundary.k_a;
        k[w][w] += p.boundary.k_d;
        k[th][th] += p.boundary.k_r;
        for (got, want) in [(&sys.mass, &mut m), (&sys.damping, &mut c), (&sys.stiffness, &mut k)] {
            let scale = want.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
            let dense = got.to_dense();
            for i in 0..n {
                for j in 0..n {
                    assert!((dense[i][j] - want[i][j]).abs() <= 1e-12 * scale, "{preset} ({i},{j})");
                    assert_eq!(dense[i][j], dense[j][i]);
                }
            }
        }
    }
}

#[test]
fn mass_and_stiffness_factor() {
    for preset in Preset::ALL {
        let p = preset.problem();
        let sys = fem::assemble(&p, &Mesh::uniform(p.length, 41).unwrap(), 4).unwrap();
        BandedCholesky::factor(&sys.mass, "mass").unwrap();
        BandedCholesky::factor(&sys.stiffness, "stiffness").unwrap();
    }
}

fn ne1_system(nodes: usize) -> fem::SemiDiscreteSystem {
    let p = Preset::TestNe1.problem();
    fem::assemble(&p, &Mesh::uniform(1.0, nodes).unwrap(), 4).unwrap()
}

proptest! {
    #[test]
    fn quadratic_forms_are_positive(nodes in 3usize..30, seed in proptest::collection::vec(-1.0f64..1.0, 60)) {
        let sys = ne1_system(nodes);
        let x: Vec<f64> = seed.iter().cycle().take(sys.dofs()).copied().collect();
        prop_assume!(x.iter().any(|v| v.abs() > 1e-3));
        prop_assert!(sys.mass.quad_form(&x) > 0.0);
        prop_assert!(sys.stiffness.quad_form(&x) > 0.0);
        prop_assert!(sys.damping.quad_form(&x) >= 0.0);
    }

    #[test]
    fn clamped_cubics_are_reproduced(a in -3.0f64..3.0, b in -3.0f64..3.0, nodes in 3usize..25, x in 0.0f64..1.0) {
        let sys = ne1_system(nodes);
        let dofs = sys.interpolate(|x| (a * x * x + b * x * x * x, 2.0 * a * x + 3.0 * b * x * x));
        let (u, ux, uxx) = sys.evaluate(&dofs, x).unwrap();
        prop_assert!((u - (a * x * x + b * x * x * x)).abs() < 1e-12);
        prop_assert!((ux - (2.0 * a * x + 3.0 * b * x * x)).abs() < 1e-11);
        prop_assert!((uxx - (2.0 * a + 6.0 * b * x)).abs() < 1e-9);
    }
}
