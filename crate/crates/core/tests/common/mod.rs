#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<Complex64>>, mut rhs: Vec<Complex64>) -> Vec<Complex64> {
    let n = rhs.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm())).unwrap();
        a.swap(k, p);
        rhs.swap(k, p);
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot = &top[k];
        for (i, row) in rest.iter_mut().enumerate() {
            let f = row[k] / pivot[k];
            for (x, p) in row[k..].iter_mut().zip(&pivot[k..]) {
                *x -= f * p;
            }
            let t = rhs[k];
            rhs[k + 1 + i] -= f * t;
        }
    }
    let mut x = vec![c(0.0, 0.0); n];
    for k in (0..n).rev() {
        let s: Complex64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (rhs[k] - s) / a[k][k];
    }
    x
}

/// Monic orthogonal polynomial of degree `n` (coefficients, low first) from
/// `moment(j) = int w e^{-ij theta} d theta`, by imposing orthogonality to
/// `1, z, .., z^{n-1}` directly.
pub fn monic_orthogonal(moment: &dyn Fn(i64) -> Complex64, n: usize) -> Vec<Complex64> {
    let a: Vec<Vec<Complex64>> = (0..n).map(|k| (0..n).map(|m| moment(k as i64 - m as i64)).collect()).collect();
    let rhs: Vec<Complex64> = (0..n).map(|k| -moment(k as i64 - n as i64)).collect();
    let mut p = solve(a, rhs);
    p.push(c(1.0, 0.0));
    p
}

/// `alpha_0 .. alpha_{nmax-1}` as `-conj(Phi_{n+1}(0))`.
pub fn oracle_alphas(moment: &dyn Fn(i64) -> Complex64, nmax: usize) -> Vec<Complex64> {
    (1..=nmax).map(|n| -monic_orthogonal(moment, n)[0].conj()).collect()
}

/// Trapezoid moments of a smooth periodic weight.
pub fn trapezoid_moment(w: &dyn Fn(f64) -> f64, j: i64, nodes: usize) -> Complex64 {
    let h = 2.0 * PI / nodes as f64;
    (0..nodes)
        .map(|k| {
            let t = k as f64 * h;
            Complex64::from_polar(w(t) * h, -(j as f64) * t)
        })
        .sum()
}

/// Exact moments of `|1 - e^{i theta}|^2 e^{-eta (theta - pi)}` on `(0, 2 pi)`.
pub fn jacobi_one_moment(eta: f64, j: i64) -> Complex64 {
    let e = |m: i64| -> Complex64 {
        if eta == 0.0 {
            if m == 0 {
                c(2.0 * PI, 0.0)
            } else {
                c(0.0, 0.0)
            }
        } else {
            c(1.0 - (-2.0 * PI * eta).exp(), 0.0) / c(eta, m as f64)
        }
    };
    (2.0 * e(j) - e(j - 1) - e(j + 1)) * (eta * PI).exp()
}
