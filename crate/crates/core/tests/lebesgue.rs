mod common;

use common::c;
use num_complex::Complex64;
use opuc_core::cauchy::{cauchy_g, cauchy_gstar};
use opuc_core::rh::assemble_y;
use opuc_core::szego::phi_pair;
use opuc_core::verify::{circle_points, Grid};
use opuc_core::{OpucSystem, WeightSpec};

fn system() -> OpucSystem {
    OpucSystem::new(WeightSpec::lebesgue(), 13).unwrap()
}

#[test]
fn coefficients_vanish_and_polynomials_are_monomials() {
    let sys = system();
    assert!(sys.table().alphas.iter().all(|a| a.norm() < 1e-12));
    for n in 0..=12 {
        let p = phi_pair(sys.table(), n).unwrap();
        for k in 0..=n {
            let want = if k == n { 1.0 } else { 0.0 };
            assert!((p.phi.coeff(k) - want).norm() < 1e-13, "n={n} k={k}");
        }
    }
}

#[test]
fn second_kind_functions() {
    let sys = system();
    let pts = Grid::default().points(&WeightSpec::lebesgue());
    for n in 1..=10 {
        for &z in &pts {
            let g = cauchy_g(&sys, n, z, sys.rtol()).unwrap();
            let want = if z.norm() < 1.0 { 1.0 } else { 0.0 };
            assert!((g - want).norm() < 1e-10, "G n={n} z={z}");
            if z.norm() > 1.0 {
                let gs = cauchy_gstar(&sys, n, z, sys.rtol()).unwrap();
                assert!((gs + z.powi(-(n as i32))).norm() < 1e-10, "G* n={n} z={z}");
            }
            assert!((assemble_y(&sys, n, z).unwrap().det() - 1.0).norm() < 1e-10, "det n={n} z={z}");
        }
    }
}

#[test]
fn y_one_outside() {
    let sys = system();
    let z = c(2.0, 1.0);
    let y = assemble_y(&sys, 1, z).unwrap();
    let want: [Complex64; 4] = [z, c(0.0, 0.0), c(-1.0, 0.0), 1.0 / z];
    for (k, (a, b)) in y.entries().iter().zip(want).enumerate() {
        assert!((a - b).norm() < 1e-12, "entry {k}: {a} vs {b}");
    }
}

#[test]
fn jump_relation_on_the_circle() {
    let sys = system();
    for t in circle_points() {
        for n in [1, 5] {
            assert!(opuc_core::rh::jump_residual(&sys, n, t, 1e-3).unwrap() < 1e-6);
        }
    }
}
