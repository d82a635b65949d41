//! SLOCC actions by det-1 local matrices and the invariants built on them:
//! concurrence, Cayley hyperdeterminant / 3-tangle, the four-class
//! three-qubit classification and the orbit-minimum measure.

use std::fmt;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{apply_local, reduced_density, HilbertShape, Operator, StateVector};
use crate::random::determinant;

const UNIT_DET_TOL: f64 = 1e-10;
const SINGULAR_TOL: f64 = 1e-12;

/// One invertible unit-determinant matrix per site.
#[derive(Clone, Debug, PartialEq)]
pub struct SloccElement {
    shape: HilbertShape,
    locals: Vec<Operator>,
}

impl SloccElement {
    /// Requires `det = 1` within `1e-10` on every site.
    pub fn new(shape: HilbertShape, locals: Vec<Operator>) -> Result<Self> {
        check_locals(&shape, &locals)?;
        for (site, g) in locals.iter().enumerate() {
            let det = determinant(g);
            if det.norm() < SINGULAR_TOL {
                return Err(Error::Singular { site, det: det.norm() });
            }
            if (det - C64::new(1.0, 0.0)).norm() > UNIT_DET_TOL {
                return Err(Error::InvalidParams(format!("local {site} has determinant {det}, expected 1")));
            }
        }
        Ok(Self { shape, locals })
    }

    /// Rescales each invertible local by `det^{-1/d}`.
    pub fn from_invertible(shape: HilbertShape, locals: Vec<Operator>) -> Result<Self> {
        check_locals(&shape, &locals)?;
        let locals = locals
            .into_iter()
            .enumerate()
            .map(|(site, g)| {
                let det = determinant(&g);
                if det.norm() < SINGULAR_TOL {
                    return Err(Error::Singular { site, det: det.norm() });
                }
                Ok(g.scale(det.powf(-1.0 / g.dim() as f64)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { shape, locals })
    }

    pub fn identity(shape: HilbertShape) -> Self {
        let locals = shape.dims().iter().map(|&d| Operator::identity(d)).collect();
        Self { shape, locals }
    }

    pub fn shape(&self) -> &HilbertShape {
        &self.shape
    }

    pub fn locals(&self) -> &[Operator] {
        &self.locals
    }
}

fn check_locals(shape: &HilbertShape, locals: &[Operator]) -> Result<()> {
    if locals.len() != shape.n_sites() {
        return Err(Error::DimensionMismatch { expected: shape.n_sites(), got: locals.len() });
    }
    for (g, &d) in locals.iter().zip(shape.dims()) {
        if g.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: g.dim() });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SloccOutput {
    pub state: StateVector,
    /// `‖(⊗g_k)ψ‖` before any renormalization.
    pub norm: f64,
}

/// `(g_1 ⊗ … ⊗ g_n) ψ`, optionally renormalized.
pub fn apply_slocc(g: &SloccElement, psi: &StateVector, renormalize: bool) -> Result<SloccOutput> {
    if g.shape() != psi.shape() {
        return Err(Error::DimensionMismatch { expected: g.shape().total_dim(), got: psi.dim() });
    }
    let mut out = psi.clone();
    for (site, local) in g.locals().iter().enumerate() {
        out = apply_local(local, site, &out)?;
    }
    let norm = out.norm_sqr().sqrt();
    let state = if renormalize { out.normalized()? } else { out };
    Ok(SloccOutput { state, norm })
}

fn require_shape(psi: &StateVector, dims: &[usize]) -> Result<()> {
    if psi.shape().dims() != dims {
        return Err(Error::InvalidShape(format!(
            "expected shape {dims:?}, got {:?}",
            psi.shape().dims()
        )));
    }
    Ok(())
}

/// `2|det[ψ]|` for the 2×2 coefficient matrix of a two-qubit state.
pub fn concurrence(psi: &StateVector) -> Result<f64> {
    require_shape(psi, &[2, 2])?;
    psi.require_normalized()?;
    let a = psi.amplitudes();
    Ok((2.0 * (a[0] * a[3] - a[1] * a[2]).norm()).min(1.0))
}

/// Cayley hyperdeterminant of the `2×2×2` coefficient tensor, written out
/// term by term (four squares, six `−2` cross terms, two `+4` terms).
pub fn hyperdeterminant_value(psi: &StateVector) -> Result<C64> {
    require_shape(psi, &[2, 2, 2])?;
    let a = psi.amplitudes();
    let p = |i: usize, j: usize, k: usize| a[(i << 2) | (j << 1) | k];
    let (p000, p001, p010, p011) = (p(0, 0, 0), p(0, 0, 1), p(0, 1, 0), p(0, 1, 1));
    let (p100, p101, p110, p111) = (p(1, 0, 0), p(1, 0, 1), p(1, 1, 0), p(1, 1, 1));

    let squares = p000 * p000 * p111 * p111
        + p001 * p001 * p110 * p110
        + p010 * p010 * p101 * p101
        + p100 * p100 * p011 * p011;
    let cross = p000 * p001 * p110 * p111
        + p000 * p010 * p101 * p111
        + p000 * p100 * p011 * p111
        + p001 * p010 * p101 * p110
        + p001 * p100 * p011 * p110
        + p010 * p100 * p011 * p101;
    let quartic = p000 * p011 * p101 * p110 + p001 * p010 * p100 * p111;
    Ok(squares - 2.0 * cross + 4.0 * quartic)
}

/// `|Det(ψ)|`. Unnormalized tensors are rejected unless `allow_unnormalized`.
pub fn hyperdeterminant(psi: &StateVector, allow_unnormalized: bool) -> Result<f64> {
    if !allow_unnormalized {
        psi.require_normalized()?;
    }
    Ok(hyperdeterminant_value(psi)?.norm())
}

/// `τ = 4|Det(ψ)|` for a normalized three-qubit state.
pub fn three_tangle(psi: &StateVector) -> Result<f64> {
    let tau = 4.0 * hyperdeterminant(psi, false)?;
    Ok(if tau < 1e-14 { 0.0 } else { tau })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "label", rename_all = "kebab-case")]
pub enum SloccClass {
    Ghz,
    W,
    /// `site` is unentangled from the remaining pair.
    Biseparable { site: usize, pair: [usize; 2] },
    CompletelySeparable,
}

impl fmt::Display for SloccClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SloccClass::Ghz => write!(f, "GHZ"),
            SloccClass::W => write!(f, "W"),
            SloccClass::Biseparable { site, pair } => {
                write!(f, "biseparable {{{site}}}|{{{},{}}}", pair[0], pair[1])
            }
            SloccClass::CompletelySeparable => write!(f, "completely separable"),
        }
    }
}

/// Smaller eigenvalue of a 2×2 Hermitian matrix.
fn min_eigenvalue_2x2(rho: &Operator) -> f64 {
    let m = rho.matrix();
    let (a, d, b) = (m[[0, 0]].re, m[[1, 1]].re, m[[0, 1]]);
    let half_gap = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
    (a + d) / 2.0 - half_gap
}

/// Four-class SLOCC classification: GHZ iff `τ > tol`, otherwise by how many
/// single-qubit marginals are pure (smaller eigenvalue `≤ tol`).
pub fn classify_three_qubit(psi: &StateVector, tol: f64) -> Result<SloccClass> {
    require_shape(psi, &[2, 2, 2])?;
    if three_tangle(psi)? > tol {
        return Ok(SloccClass::Ghz);
    }
    let pure: Vec<usize> = (0..3)
        .filter(|&site| {
            let rho = reduced_density(psi, &[site]).expect("valid site");
            min_eigenvalue_2x2(&rho) <= tol
        })
        .collect();
    Ok(match pure.as_slice() {
        [] => SloccClass::W,
        [site] => {
            let others: Vec<usize> = (0..3).filter(|s| s != site).collect();
            SloccClass::Biseparable { site: *site, pair: [others[0], others[1]] }
        }
        _ => SloccClass::CompletelySeparable,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm {
    /// Locally filtered orbit representative (not normalized).
    pub state: StateVector,
    /// Squared length of `state`.
    pub norm_sq: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Drives every single-qubit marginal to a multiple of the identity by
/// replacing site `k` with `det(ρ_k)^{1/4} ρ_k^{-1/2}` in turn.
///
/// Each filter maps `‖ψ‖² = Tr ρ_k` to `2√det ρ_k`, so the norm never grows.
/// If a marginal becomes singular or the norm falls below `1e-6` of its
/// starting value, the orbit closure contains zero and `converged` is false.
pub fn sl_normal_form(psi: &StateVector, max_iter: usize, tol: f64) -> Result<NormalForm> {
    if !psi.shape().is_multiqubit() {
        return Err(Error::InvalidShape("normal form needs a multiqubit shape".into()));
    }
    let n = psi.shape().n_sites();
    let start = psi.norm_sqr();
    let collapse = 1e-6 * start;
    let mut cur = psi.clone();
    for iter in 0..max_iter {
        let marginals: Vec<Operator> = (0..n)
            .map(|k| reduced_density(&cur, &[k]))
            .collect::<Result<_>>()?;
        let norm_sq = cur.norm_sqr();
        let balanced = marginals.iter().all(|rho| {
            let m = rho.matrix();
            ((m[[0, 0]].re - m[[1, 1]].re) / norm_sq).abs() < tol && (m[[0, 1]].norm() / norm_sq) < tol
        });
        if balanced {
            return Ok(NormalForm { state: cur, norm_sq, converged: true, iterations: iter });
        }
        for k in 0..n {
            let rho = reduced_density(&cur, &[k])?;
            let tr = rho.trace().re;
            let det = determinant(&rho).re;
            if tr < collapse || det <= 1e-30 * tr * tr {
                return Ok(NormalForm { norm_sq: cur.norm_sqr(), state: cur, converged: false, iterations: iter });
            }
            cur = apply_local(&filter(&rho, det), k, &cur)?;
        }
        if cur.norm_sqr() < collapse {
            return Ok(NormalForm { norm_sq: cur.norm_sqr(), state: cur, converged: false, iterations: iter + 1 });
        }
    }
    Ok(NormalForm { norm_sq: cur.norm_sqr(), state: cur, converged: false, iterations: max_iter })
}

/// `det^{1/4} ρ^{-1/2}` for a positive-definite 2×2 `ρ`, using
/// `√ρ = (ρ + √det I) / √(Tr ρ + 2√det)`.
fn filter(rho: &Operator, det: f64) -> Operator {
    let sd = det.sqrt();
    let m = rho.matrix();
    let scale = 1.0 / (m[[0, 0]].re + m[[1, 1]].re + 2.0 * sd).sqrt();
    let p = (m[[0, 0]] + sd) * scale;
    let q = m[[0, 1]] * scale;
    let r = m[[1, 0]] * scale;
    let s = (m[[1, 1]] + sd) * scale;
    // (√ρ)^{-1} = adj(√ρ) / √det, then multiply by det^{1/4}
    let f = det.powf(0.25) / sd;
    Operator::from_rows([[s * f, -q * f], [-r * f, p * f]])
}

pub const NORMAL_FORM_MAX_ITER: usize = 10_000;
pub const NORMAL_FORM_TOL: f64 = 1e-10;

/// Squared length of the minimal vector in the SL orbit closure; zero on
/// the null cone.
pub fn orbit_measure(psi: &StateVector) -> Result<f64> {
    let nf = sl_normal_form(psi, NORMAL_FORM_MAX_ITER, NORMAL_FORM_TOL)?;
    Ok(if nf.converged { nf.norm_sq } else { 0.0 })
}
