//! Riemannian gradient descent on the unit sphere of `C^D`, viewed as the
//! real sphere `S^{2D-1}`.
//!
//! The tangent projection of a Euclidean gradient `g` at `ψ` is
//! `g − Re<ψ|g> ψ`; the retraction is renormalization.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::hilbert::{inner, norm_sqr};

/// Smooth real function on the sphere with its Euclidean gradient
/// (w.r.t. the real inner product `Re<a|b>`).
pub trait SphereObjective {
    fn value(&self, psi: &Array1<C64>) -> f64;
    fn value_and_gradient(&self, psi: &Array1<C64>) -> (f64, Array1<C64>);
}

#[derive(Clone, Copy, Debug)]
pub struct DescentOptions {
    pub max_iter: usize,
    /// Sufficient-decrease constant of the Armijo rule.
    pub armijo: f64,
    /// Stop once the Riemannian gradient norm falls below this.
    pub grad_tol: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self { max_iter: 5000, armijo: 1e-4, grad_tol: 1e-15 }
    }
}

#[derive(Clone, Debug)]
pub struct DescentResult {
    pub point: Array1<C64>,
    pub value: f64,
    pub iterations: usize,
    /// True if `stop` accepted the point.
    pub reached_target: bool,
}

pub fn tangent_project(psi: &Array1<C64>, g: &Array1<C64>) -> Array1<C64> {
    let radial = inner(psi, g).re;
    g - &psi.mapv(|z| z * radial)
}

fn retract(psi: &Array1<C64>, dir: &Array1<C64>, t: f64) -> Array1<C64> {
    let mut p = psi - &dir.mapv(|z| z * t);
    let n = norm_sqr(&p).sqrt();
    p.mapv_inplace(|z| z / n);
    p
}

/// Minimizes `obj` from `start` (assumed unit norm).
///
/// Steps use a Barzilai-Borwein trial length, shrunk by backtracking until
/// the Armijo condition holds. `stop` is consulted after every accepted step.
pub fn minimize_on_sphere<O, F>(obj: &O, start: Array1<C64>, opts: &DescentOptions, stop: F) -> DescentResult
where
    O: SphereObjective + ?Sized,
    F: Fn(&Array1<C64>, f64) -> bool,
{
    let mut psi = start;
    let (mut f, g) = obj.value_and_gradient(&psi);
    let mut grad = tangent_project(&psi, &g);
    let mut step = 0.1;
    let mut prev: Option<(Array1<C64>, Array1<C64>)> = None;

    if stop(&psi, f) {
        return DescentResult { point: psi, value: f, iterations: 0, reached_target: true };
    }
    for iter in 1..=opts.max_iter {
        let g2 = norm_sqr(&grad);
        if g2.sqrt() < opts.grad_tol {
            return DescentResult { point: psi, value: f, iterations: iter, reached_target: false };
        }
        if let Some((p_old, g_old)) = &prev {
            let s = &psi - p_old;
            let y = &grad - g_old;
            let sy = inner(&s, &y).re;
            if sy > 0.0 {
                step = (norm_sqr(&s) / sy).clamp(1e-8, 1e3);
            }
        }
        let mut t = step;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = retract(&psi, &grad, t);
            let fc = obj.value(&cand);
            if fc <= f - opts.armijo * t * g2 {
                accepted = Some((cand, fc));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, _)) = accepted else {
            // no descent possible at floating-point resolution
            return DescentResult { point: psi, value: f, iterations: iter, reached_target: false };
        };
        let (fc, gc) = obj.value_and_gradient(&cand);
        let grad_new = tangent_project(&cand, &gc);
        prev = Some((std::mem::replace(&mut psi, cand), std::mem::replace(&mut grad, grad_new)));
        f = fc;
        if stop(&psi, f) {
            return DescentResult { point: psi, value: f, iterations: iter, reached_target: true };
        }
    }
    DescentResult { point: psi, value: f, iterations: opts.max_iter, reached_target: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rayleigh quotient of a diagonal Hermitian matrix.
    struct Rayleigh(Vec<f64>);

    impl SphereObjective for Rayleigh {
        fn value(&self, psi: &Array1<C64>) -> f64 {
            psi.iter().zip(&self.0).map(|(z, d)| d * z.norm_sqr()).sum()
        }
        fn value_and_gradient(&self, psi: &Array1<C64>) -> (f64, Array1<C64>) {
            let g = psi.iter().zip(&self.0).map(|(z, d)| z * (2.0 * d)).collect();
            (self.value(psi), g)
        }
    }

    #[test]
    fn finds_smallest_eigenvalue() {
        let obj = Rayleigh(vec![3.0, -1.0, 2.0, 0.5]);
        let start = Array1::from_elem(4, C64::new(0.5, 0.0));
        let r = minimize_on_sphere(&obj, start, &DescentOptions::default(), |_, f| f < -1.0 + 1e-12);
        assert!(r.reached_target, "{r:?}");
        assert!((r.point[1].norm() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn projection_is_tangent() {
        let psi = Array1::from(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let g = Array1::from(vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.3)]);
        let t = tangent_project(&psi, &g);
        assert!(inner(&psi, &t).re.abs() < 1e-15);
    }
}
