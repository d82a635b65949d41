//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{DMatrix, Matrix2};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use qdsys::cavity::LambdaParams;
use qdsys::StateVector;

/// Haar-random rotation in SO(n) from the QR factorization of a Gaussian matrix.
pub fn random_rotation<R: Rng>(n: usize, rng: &mut R) -> Array2<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Array2::from_shape_fn((n, n), |(i, j)| q[(i, j)])
}

/// Hermitian eigenvalues via nalgebra.
pub fn hermitian_eigenvalues(m: &Array2<C64>) -> Vec<f64> {
    let n = m.nrows();
    let dm = DMatrix::from_fn(n, n, |i, j| nalgebra::Complex::new(m[[i, j]].re, m[[i, j]].im));
    dm.symmetric_eigenvalues().iter().copied().collect()
}

/// Cayley's characterization: the hyperdeterminant of `a_{ijk}` is the
/// discriminant of the quadratic `det(A_0 + x A_1)`, `A_i = a_{i··}`.
pub fn hyperdeterminant_discriminant(psi: &StateVector) -> C64 {
    let a = psi.amplitudes();
    let m = |i: usize| Matrix2::new(a[4 * i], a[4 * i + 1], a[4 * i + 2], a[4 * i + 3]);
    let (a0, a1) = (m(0), m(1));
    let det = |x: &Matrix2<C64>| x[(0, 0)] * x[(1, 1)] - x[(0, 1)] * x[(1, 0)];
    // det(A0 + x A1) = c0 + c1 x + c2 x^2
    let c0 = det(&a0);
    let c2 = det(&a1);
    let c1 = det(&(a0 + a1)) - c0 - c2;
    c1 * c1 - 4.0 * c0 * c2
}

/// `exp(v·σ)` for real `v`: the positive unit-determinant matrix
/// `cosh|v| I + sinh|v| v̂·σ`.
fn positive_sl2(v: &[f64]) -> Matrix2<C64> {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let (c, s) = (r.cosh(), if r > 0.0 { r.sinh() / r } else { 1.0 });
    Matrix2::new(
        C64::new(c + s * v[2], 0.0),
        C64::new(s * v[0], -s * v[1]),
        C64::new(s * v[0], s * v[1]),
        C64::new(c - s * v[2], 0.0),
    )
}

struct OrbitCost {
    amps: [C64; 4],
}

impl CostFunction for OrbitCost {
    type Param = Vec<f64>;
    type Output = f64;

    /// `<ψ|P1 ⊗ P2|ψ> = ‖(g1 ⊗ g2)ψ‖²` with `P_k = g_k† g_k`.
    fn cost(&self, x: &Vec<f64>) -> Result<f64, argmin::core::Error> {
        let (p1, p2) = (positive_sl2(&x[0..3]), positive_sl2(&x[3..6]));
        let a = &self.amps;
        let mut total = C64::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                let w = p1[(i / 2, j / 2)] * p2[(i % 2, j % 2)];
                total += a[i].conj() * w * a[j];
            }
        }
        Ok(total.re)
    }
}

/// Brute-force `inf_{g ∈ SL2×SL2} ‖(g1⊗g2)ψ‖²` by Nelder–Mead from several
/// simplices over the six real parameters of `(g1†g1, g2†g2)`.
pub fn orbit_oracle(psi: &StateVector) -> f64 {
    let a = psi.amplitudes();
    let amps = [a[0], a[1], a[2], a[3]];
    let mut best = f64::INFINITY;
    for (start, scale) in [(0.0, 0.5), (0.3, 1.0), (-0.3, 0.25)] {
        let x0 = vec![start; 6];
        let mut simplex = vec![x0.clone()];
        for k in 0..6 {
            let mut x = x0.clone();
            x[k] += scale;
            simplex.push(x);
        }
        let solver = NelderMead::new(simplex).with_sd_tolerance(1e-14).expect("valid tolerance");
        let res = Executor::new(OrbitCost { amps }, solver)
            .configure(|s| s.max_iters(20_000))
            .run()
            .expect("solver runs");
        best = best.min(res.state.best_cost);
    }
    best
}

/// Probability of no Stokes jump by time `t` starting from `|1,1>|n=1>`.
///
/// Only `|1,1>|1>` and the symmetric `|{1,2}>|0>` couple (strength `g√2`),
/// so the survival amplitude is the first column of `exp(−iMt)` with
/// `M = [[ω_c, g√2], [g√2, ε2 − iγ/2]]`.
pub fn block_survival(p: &LambdaParams, t: f64) -> f64 {
    let b = C64::new(p.g * 2f64.sqrt(), 0.0);
    let m11 = C64::new(p.omega_c, 0.0);
    let m22 = C64::new(p.epsilon2, -p.gamma_s / 2.0);
    let tau = (m11 + m22) / 2.0;
    let d = (m11 - m22) / 2.0;
    let omega = (d * d + b * b).sqrt();
    let i = C64::new(0.0, 1.0);
    let phase = (-i * tau * t).exp();
    let (c, s) = ((omega * t).cos(), (omega * t).sin() / omega);
    let u11 = phase * (c - i * s * d);
    let u21 = phase * (-i * s * b);
    u11.norm_sqr() + u21.norm_sqr()
}

/// Two-sided Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = cdf(x);
            (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
