//! Variances of basic observables, total variance, complete-entanglement
//! (CE) certification and the numerical search for CE states.
//!
//! For an observable set with Casimir scalar `C`,
//! `V(ψ) = Σ_i (<X_i²> − <X_i>²) = C − Σ_i <X_i>²`, so the CE condition
//! `<X_i> = 0 ∀i` is the same as saturating `V(ψ) = C`. The search
//! minimizes the residual `Σ_i <X_i>²` over the unit sphere.

use ndarray::Array1;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{check_dim, inner, norm_sqr, StateVector};
use crate::observables::{CasimirScope, Observable, ObservableSet};
use crate::random::{derived_rng, haar_state};
use crate::sphere::{minimize_on_sphere, DescentOptions, SphereObjective};

pub const DEFAULT_CE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableVariance {
    pub label: String,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceReport {
    pub per_observable: Vec<ObservableVariance>,
    /// Sum of the individual variances.
    pub total: f64,
    pub casimir: Option<f64>,
    /// `C − residual`, present when the Casimir scalar is certified on the full space.
    pub casimir_total: Option<f64>,
    /// `Σ_i <X_i>²`.
    pub residual: f64,
    pub is_ce: bool,
    pub tol: f64,
}

/// `<X²> − <X>²`, clamped at zero.
pub fn variance(x: &Observable, psi: &StateVector) -> Result<f64> {
    psi.require_normalized()?;
    check_dim(x.matrix.dim(), psi.dim())?;
    let (mean, sq) = moments(x, psi.amplitudes());
    Ok((sq - mean * mean).max(0.0))
}

/// `(<X>, <X²>)` for Hermitian `X`; `<X²> = ‖Xψ‖²`.
fn moments(x: &Observable, psi: &Array1<C64>) -> (f64, f64) {
    let xpsi = x.matrix.apply(psi);
    (inner(psi, &xpsi).re, norm_sqr(&xpsi))
}

fn check_set(set: &ObservableSet, psi: &StateVector) -> Result<()> {
    psi.require_normalized()?;
    check_dim(set.shape().total_dim(), psi.dim())
}

pub fn total_variance(set: &ObservableSet, psi: &StateVector) -> Result<VarianceReport> {
    total_variance_with_tol(set, psi, DEFAULT_CE_TOL)
}

pub fn total_variance_with_tol(set: &ObservableSet, psi: &StateVector, tol: f64) -> Result<VarianceReport> {
    check_set(set, psi)?;
    let mut per_observable = Vec::with_capacity(set.len());
    let mut residual = 0.0;
    let mut max_mean: f64 = 0.0;
    for x in set.observables() {
        let (mean, sq) = moments(x, psi.amplitudes());
        residual += mean * mean;
        max_mean = max_mean.max(mean.abs());
        per_observable.push(ObservableVariance {
            label: x.label.clone(),
            mean,
            variance: (sq - mean * mean).max(0.0),
        });
    }
    let total = per_observable.iter().map(|v| v.variance).sum();
    let casimir_total = match set.casimir_scope() {
        Some(CasimirScope::Certified) => set.casimir_scalar().map(|c| c - residual),
        _ => None,
    };
    Ok(VarianceReport {
        per_observable,
        total,
        casimir: set.casimir_scalar(),
        casimir_total,
        residual,
        is_ce: max_mean < tol,
        tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CeCheck {
    pub is_ce: bool,
    pub residual: f64,
    pub max_abs_mean: f64,
}

/// True iff every `|<X_i>|` is below `tol`.
pub fn ce_check(set: &ObservableSet, psi: &StateVector, tol: f64) -> Result<CeCheck> {
    check_set(set, psi)?;
    let means: Vec<f64> = set
        .observables()
        .iter()
        .map(|x| inner(psi.amplitudes(), &x.matrix.apply(psi.amplitudes())).re)
        .collect();
    let max_abs_mean = means.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(CeCheck {
        is_ce: max_abs_mean < tol,
        residual: means.iter().map(|v| v * v).sum(),
        max_abs_mean,
    })
}

/// `±Σ_i <X_i>²` as a sphere objective.
struct Residual<'a> {
    set: &'a ObservableSet,
    sign: f64,
}

impl Residual<'_> {
    fn means(&self, psi: &Array1<C64>) -> Vec<(f64, Array1<C64>)> {
        self.set
            .observables()
            .iter()
            .map(|x| {
                let xpsi = x.matrix.apply(psi);
                (inner(psi, &xpsi).re, xpsi)
            })
            .collect()
    }
}

impl SphereObjective for Residual<'_> {
    fn value(&self, psi: &Array1<C64>) -> f64 {
        self.sign * self.means(psi).iter().map(|(m, _)| m * m).sum::<f64>()
    }

    fn value_and_gradient(&self, psi: &Array1<C64>) -> (f64, Array1<C64>) {
        let mut f = 0.0;
        let mut g = Array1::from_elem(psi.len(), C64::new(0.0, 0.0));
        for (m, xpsi) in self.means(psi) {
            f += m * m;
            g.zip_mut_with(&xpsi, |gi, &xi| *gi += xi * (4.0 * m * self.sign));
        }
        (self.sign * f, g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FindCeOptions {
    pub n_starts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for FindCeOptions {
    fn default() -> Self {
        Self { n_starts: 32, tol: DEFAULT_CE_TOL, max_iter: 5000, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CeSearch {
    Found { state: StateVector, residual: f64, start: usize },
    /// No start reached the tolerance; `best_residual` bounds the obstruction.
    NotFound { best_residual: f64, best_state: StateVector },
}

impl CeSearch {
    pub fn state(&self) -> Option<&StateVector> {
        match self {
            CeSearch::Found { state, .. } => Some(state),
            CeSearch::NotFound { .. } => None,
        }
    }

    pub fn residual(&self) -> f64 {
        match self {
            CeSearch::Found { residual, .. } => *residual,
            CeSearch::NotFound { best_residual, .. } => *best_residual,
        }
    }
}

/// Multi-start search for a state with `max_i |<X_i>| < tol`.
///
/// Start `k` draws a Haar-random initial state from a stream derived from
/// `(seed, k)`; starts run in parallel and the lowest-indexed successful
/// start wins, so the result depends only on the options.
pub fn find_ce(set: &ObservableSet, opts: &FindCeOptions) -> CeSearch {
    let objective = Residual { set, sign: 1.0 };
    let descent = DescentOptions { max_iter: opts.max_iter, ..DescentOptions::default() };
    let tol = opts.tol;
    let shape = set.shape().clone();
    let runs: Vec<(bool, f64, Array1<C64>)> = (0..opts.n_starts.max(1))
        .into_par_iter()
        .map(|k| {
            let mut rng = derived_rng(opts.seed, k as u64);
            let start = haar_state(&shape, &mut rng).into_amplitudes();
            let res = minimize_on_sphere(&objective, start, &descent, |psi, f| {
                f < tol && max_abs_mean(set, psi) < tol
            });
            (res.reached_target, res.value, res.point)
        })
        .collect();

    if let Some((k, (_, f, p))) = runs.iter().enumerate().find(|(_, r)| r.0) {
        let state = StateVector::normalize_from(shape, p.clone()).expect("unit vector");
        return CeSearch::Found { state, residual: *f, start: k };
    }
    let (_, f, p) = runs
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one start");
    let best_state = StateVector::normalize_from(shape, p).expect("unit vector");
    CeSearch::NotFound { best_residual: f, best_state }
}

fn max_abs_mean(set: &ObservableSet, psi: &Array1<C64>) -> f64 {
    set.observables()
        .iter()
        .map(|x| inner(psi, &x.matrix.apply(psi)).re.abs())
        .fold(0.0, f64::max)
}

/// Largest residual `Σ<X_i>²` over pure states, i.e. `C` minus the minimal
/// total variance attained on generalized coherent states.
pub fn max_residual(set: &ObservableSet, opts: &FindCeOptions) -> f64 {
    let objective = Residual { set, sign: -1.0 };
    let descent = DescentOptions { max_iter: opts.max_iter, grad_tol: 1e-12, ..DescentOptions::default() };
    let shape = set.shape().clone();
    (0..opts.n_starts.max(1))
        .into_par_iter()
        .map(|k| {
            let mut rng = derived_rng(opts.seed, k as u64);
            let start = haar_state(&shape, &mut rng).into_amplitudes();
            -minimize_on_sphere(&objective, start, &descent, |_, _| false).value
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Position of `V(ψ)` between the coherent-state minimum (0) and the
/// Casimir (1): `(V − V_min) / (C − V_min)`, clamped to `[0, 1]`.
pub fn remoteness(set: &ObservableSet, psi: &StateVector, opts: &FindCeOptions) -> Result<f64> {
    let c = set.casimir_scalar().ok_or(Error::MissingCasimir)?;
    let report = total_variance(set, psi)?;
    let v_min = c - max_residual(set, opts);
    let span = c - v_min;
    if span < 1e-9 {
        return Err(Error::Degenerate(format!(
            "total variance is constant ({v_min}) on {}",
            set.name()
        )));
    }
    Ok(((report.total - v_min) / span).clamp(0.0, 1.0))
}
