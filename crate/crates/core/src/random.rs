//! Seeded sampling of states and local group elements.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hilbert::{HilbertShape, Operator, StateVector};

pub type SimRng = ChaCha8Rng;

/// Independent generator for sub-task `index` of a run seeded by `master`.
pub fn derived_rng(master: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index.wrapping_add(1));
    rng
}

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-random pure state.
pub fn haar_state<R: Rng + ?Sized>(shape: &HilbertShape, rng: &mut R) -> StateVector {
    loop {
        let amps: Array1<C64> = (0..shape.total_dim()).map(|_| complex_gaussian(rng)).collect();
        if let Ok(s) = StateVector::normalize_from(shape.clone(), amps) {
            return s;
        }
    }
}

/// Gaussian tensor with no normalization.
pub fn gaussian_tensor<R: Rng + ?Sized>(shape: &HilbertShape, rng: &mut R) -> StateVector {
    let amps: Array1<C64> = (0..shape.total_dim()).map(|_| complex_gaussian(rng)).collect();
    StateVector::unnormalized(shape.clone(), amps).expect("length matches shape")
}

/// Haar-random unitary via Gram-Schmidt on a Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let mut cols: Vec<Array1<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Array1<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        for c in &cols {
            let proj: C64 = c.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            v.zip_mut_with(c, |x, &y| *x -= proj * y);
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-8 {
            v.mapv_inplace(|z| z / n);
            cols.push(v);
        }
    }
    let m = Array2::from_shape_fn((dim, dim), |(i, j)| cols[j][i]);
    Operator::from_array(m).expect("finite square matrix")
}

/// Random `d×d` matrix with unit determinant and 2-norm condition number
/// below `max_cond`: `U · diag(s_1..s_d) · V` with log-uniform singular values.
pub fn random_sl<R: Rng + ?Sized>(dim: usize, max_cond: f64, rng: &mut R) -> Operator {
    assert!(max_cond > 1.0);
    let spread = max_cond.ln() * 0.999;
    let mut logs: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * spread).collect();
    let mean = logs.iter().sum::<f64>() / dim as f64;
    logs.iter_mut().for_each(|l| *l -= mean);
    let u = haar_unitary(dim, rng);
    let v = haar_unitary(dim, rng);
    let mut diag = Operator::zeros(dim).into_matrix();
    for (k, l) in logs.iter().enumerate() {
        diag[[k, k]] = C64::new(l.exp(), 0.0);
    }
    let mut g = u.dot(&Operator::from_array(diag).expect("finite")).dot(&v);
    // U and V contribute a unit-modulus phase to the determinant.
    let det = determinant(&g);
    let fix = det.powf(-1.0 / dim as f64);
    g = g.scale(fix);
    g
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(op: &Operator) -> C64 {
    let mut a = op.matrix().clone();
    let n = a.nrows();
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[[i, col]].norm().total_cmp(&a[[j, col]].norm()))
            .expect("non-empty");
        if a[[pivot, col]].norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if pivot != col {
            for k in 0..n {
                a.swap([pivot, k], [col, k]);
            }
            det = -det;
        }
        let p = a[[col, col]];
        det *= p;
        for row in col + 1..n {
            let f = a[[row, col]] / p;
            for k in col..n {
                let v = a[[col, k]];
                a[[row, k]] -= f * v;
            }
        }
    }
    det
}
