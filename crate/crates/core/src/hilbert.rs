//! Dense states and operators on small tensor-factored Hilbert spaces.
//!
//! Amplitudes are stored row-major over the site digits: the last site's
//! index varies fastest, so `|i j k>` lives at `(i * d1 + j) * d2 + k`.

use ndarray::{linalg::kron, Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tolerance on `sum |amp|^2 - 1` for states accepted as normalized.
pub const NORM_TOL: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Local dimensions of each site, e.g. `[2, 2]` for two qubits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HilbertShape {
    dims: Vec<usize>,
}

impl HilbertShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("no sites".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidShape(format!("local dimension {d} < 2")));
        }
        Ok(Self { dims })
    }

    pub fn qubits(n: usize) -> Self {
        Self::new(vec![2; n.max(1)]).expect("qubit shape is valid")
    }

    pub fn single(d: usize) -> Result<Self> {
        Self::new(vec![d])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_multiqubit(&self) -> bool {
        self.dims.iter().all(|&d| d == 2)
    }

    /// Shape of `self ⊗ other`.
    pub fn concat(&self, other: &HilbertShape) -> HilbertShape {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        HilbertShape { dims }
    }

    /// Per-site digits of a flat index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&digit, &d)| acc * d + digit)
    }

    pub(crate) fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.dims.len() {
            return Err(Error::SiteOutOfRange { site, n_sites: self.dims.len() });
        }
        Ok(())
    }
}

/// Pure state over a [`HilbertShape`].
///
/// States built with [`StateVector::new`] are checked against [`NORM_TOL`].
/// [`StateVector::unnormalized`] is the escape hatch for SLOCC
/// intermediates; analysis routines reject such states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    shape: HilbertShape,
    amps: Array1<C64>,
    normalized: bool,
}

impl StateVector {
    pub fn new(shape: HilbertShape, amps: impl Into<Array1<C64>>) -> Result<Self> {
        let amps = amps.into();
        check_len(&shape, amps.len())?;
        let n2 = norm_sqr(&amps);
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { shape, amps, normalized: true })
    }

    pub fn unnormalized(shape: HilbertShape, amps: impl Into<Array1<C64>>) -> Result<Self> {
        let amps = amps.into();
        check_len(&shape, amps.len())?;
        let normalized = (norm_sqr(&amps) - 1.0).abs() <= NORM_TOL;
        Ok(Self { shape, amps, normalized })
    }

    /// Divides by the norm. Fails on the zero vector.
    pub fn normalize_from(shape: HilbertShape, amps: impl Into<Array1<C64>>) -> Result<Self> {
        let mut amps = amps.into();
        check_len(&shape, amps.len())?;
        let n = norm_sqr(&amps).sqrt();
        if !n.is_finite() || n <= 0.0 {
            return Err(Error::NotNormalized(n * n));
        }
        amps.mapv_inplace(|a| a / n);
        Ok(Self { shape, amps, normalized: true })
    }

    /// Computational basis vector `|index>`.
    pub fn basis(shape: HilbertShape, index: usize) -> Result<Self> {
        let dim = shape.total_dim();
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, got: index });
        }
        let mut amps = Array1::from_elem(dim, ZERO);
        amps[index] = ONE;
        Ok(Self { shape, amps, normalized: true })
    }

    /// Basis vector addressed by per-site digits.
    pub fn product_basis(shape: HilbertShape, digits: &[usize]) -> Result<Self> {
        if digits.len() != shape.n_sites() {
            return Err(Error::DimensionMismatch { expected: shape.n_sites(), got: digits.len() });
        }
        let idx = shape.index_of(digits);
        Self::basis(shape, idx)
    }

    pub fn shape(&self) -> &HilbertShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Array1<C64> {
        self.amps
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    pub fn normalized(&self) -> Result<Self> {
        Self::normalize_from(self.shape.clone(), self.amps.clone())
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.normalized {
            Ok(())
        } else {
            Err(Error::NotNormalized(self.norm_sqr()))
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(inner(&self.amps, &other.amps))
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Same amplitudes under a new shape with equal total dimension.
    pub fn reshaped(&self, shape: HilbertShape) -> Result<Self> {
        check_dim(shape.total_dim(), self.dim())?;
        Ok(Self { shape, amps: self.amps.clone(), normalized: self.normalized })
    }
}

/// Square complex matrix. Hermiticity is not assumed.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    m: Array2<C64>,
}

impl Operator {
    pub fn from_array(m: Array2<C64>) -> Result<Self> {
        let (r, c) = m.dim();
        if r != c || r == 0 {
            return Err(Error::InvalidShape(format!("operator must be square, got {r}x{c}")));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidShape("non-finite operator entry".into()));
        }
        Ok(Self { m })
    }

    /// Row-major complex entries; panics if `rows` is not square.
    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Self {
        let flat: Vec<C64> = rows.iter().flatten().copied().collect();
        Self { m: Array2::from_shape_vec((N, N), flat).expect("square") }
    }

    pub fn from_real_rows<const N: usize>(rows: [[f64; N]; N]) -> Self {
        Self::from_rows(rows.map(|r| r.map(|x| C64::new(x, 0.0))))
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: Array2::eye(dim).mapv(|x: f64| C64::new(x, 0.0)) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: Array2::from_elem((dim, dim), ZERO) }
    }

    /// `|ket><bra|` on the full space.
    pub fn outer(ket: &Array1<C64>, bra: &Array1<C64>) -> Self {
        let d = ket.len();
        Self { m: Array2::from_shape_fn((d, d), |(i, j)| ket[i] * bra[j].conj()) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.m
    }

    pub fn apply(&self, v: &Array1<C64>) -> Array1<C64> {
        self.m.dot(v)
    }

    /// Applies the operator; the result keeps the input shape and may be unnormalized.
    pub fn apply_state(&self, psi: &StateVector) -> Result<StateVector> {
        check_dim(self.dim(), psi.dim())?;
        StateVector::unnormalized(psi.shape.clone(), self.apply(&psi.amps))
    }

    pub fn dot(&self, other: &Operator) -> Operator {
        Operator { m: self.m.dot(&other.m) }
    }

    pub fn adjoint(&self) -> Operator {
        Operator { m: self.m.t().mapv(|z| z.conj()) }
    }

    pub fn scale(&self, s: C64) -> Operator {
        Operator { m: self.m.mapv(|z| z * s) }
    }

    pub fn scale_real(&self, s: f64) -> Operator {
        Operator { m: self.m.mapv(|z| z * s) }
    }

    pub fn add(&self, other: &Operator) -> Operator {
        Operator { m: &self.m + &other.m }
    }

    pub fn sub(&self, other: &Operator) -> Operator {
        Operator { m: &self.m - &other.m }
    }

    pub fn trace(&self) -> C64 {
        self.m.diag().sum()
    }

    /// Hilbert-Schmidt inner product `Tr(self^† other)`.
    pub fn hs_inner(&self, other: &Operator) -> C64 {
        self.m.iter().zip(other.m.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (i..n).all(|j| (self.m[[i, j]] - self.m[[j, i]].conj()).norm() <= tol))
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Operator) -> Operator {
        self.dot(other).sub(&other.dot(self))
    }

    /// `e^{-i t H}` truncated at fourth order, i.e. one classical RK4 step
    /// of `dψ/dt = -iHψ` written as a matrix.
    pub(crate) fn rk4_propagator(&self, dt: f64) -> Operator {
        let a = self.scale(C64::new(0.0, -dt));
        let mut term = Operator::identity(self.dim());
        let mut acc = term.clone();
        for k in 1..=4 {
            term = term.dot(&a).scale_real(1.0 / k as f64);
            acc = acc.add(&term);
        }
        acc
    }
}

/// Kronecker product on operators and states.
pub trait TensorProduct: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl TensorProduct for Operator {
    fn tensor(&self, other: &Self) -> Self {
        Operator { m: kron(&self.m, &other.m) }
    }
}

impl TensorProduct for StateVector {
    fn tensor(&self, other: &Self) -> Self {
        let amps: Array1<C64> = self
            .amps
            .iter()
            .flat_map(|&a| other.amps.iter().map(move |&b| a * b))
            .collect();
        let normalized = (norm_sqr(&amps) - 1.0).abs() <= NORM_TOL;
        StateVector { shape: self.shape.concat(&other.shape), amps, normalized }
    }
}

pub fn tensor_product<T: TensorProduct>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on `site`.
pub fn lift_local(op: &Operator, site: usize, shape: &HilbertShape) -> Result<Operator> {
    shape.check_site(site)?;
    let d = shape.dims()[site];
    check_dim(d, op.dim())?;
    let left: usize = shape.dims()[..site].iter().product();
    let right: usize = shape.dims()[site + 1..].iter().product();
    let mut out = op.clone();
    if left > 1 {
        out = Operator::identity(left).tensor(&out);
    }
    if right > 1 {
        out = out.tensor(&Operator::identity(right));
    }
    Ok(out)
}

/// Applies a single-site operator without building the full lift.
pub fn apply_local(op: &Operator, site: usize, psi: &StateVector) -> Result<StateVector> {
    let shape = psi.shape();
    shape.check_site(site)?;
    let d = shape.dims()[site];
    check_dim(d, op.dim())?;
    let left: usize = shape.dims()[..site].iter().product();
    let right: usize = shape.dims()[site + 1..].iter().product();
    let old = psi.amplitudes();
    let m = op.matrix();
    let mut out = Array1::from_elem(old.len(), ZERO);
    for l in 0..left {
        for i in 0..d {
            for j in 0..d {
                let a = m[[i, j]];
                if a == ZERO {
                    continue;
                }
                for r in 0..right {
                    out[(l * d + i) * right + r] += a * old[(l * d + j) * right + r];
                }
            }
        }
    }
    StateVector::unnormalized(shape.clone(), out)
}

/// `<ψ|X|ψ>`.
pub fn expectation(op: &Operator, psi: &StateVector) -> Result<C64> {
    check_dim(op.dim(), psi.dim())?;
    Ok(inner(&psi.amps, &op.apply(&psi.amps)))
}

/// Partial trace onto the sites in `keep` (taken in ascending site order).
///
/// For an unnormalized input the trace equals `‖ψ‖²`.
pub fn reduced_density(psi: &StateVector, keep: &[usize]) -> Result<Operator> {
    let shape = psi.shape();
    if keep.is_empty() {
        return Err(Error::InvalidShape("empty keep set".into()));
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    for &s in &keep {
        shape.check_site(s)?;
    }
    let rest: Vec<usize> = (0..shape.n_sites()).filter(|s| !keep.contains(s)).collect();
    let keep_shape: Vec<usize> = keep.iter().map(|&s| shape.dims()[s]).collect();
    let rest_shape: Vec<usize> = rest.iter().map(|&s| shape.dims()[s]).collect();
    let dk: usize = keep_shape.iter().product();
    let dr: usize = rest_shape.iter().product();

    let mut coeff = Array2::from_elem((dk, dr), ZERO);
    for (idx, &a) in psi.amps.iter().enumerate() {
        let digits = shape.digits(idx);
        let k = keep.iter().zip(&keep_shape).fold(0, |acc, (&s, &d)| acc * d + digits[s]);
        let r = rest.iter().zip(&rest_shape).fold(0, |acc, (&s, &d)| acc * d + digits[s]);
        coeff[[k, r]] = a;
    }
    let rho = coeff.dot(&coeff.t().mapv(|z| z.conj()));
    Operator::from_array(rho)
}

/// Exchange two sites of a state.
pub fn swap_sites(psi: &StateVector, a: usize, b: usize) -> Result<StateVector> {
    let shape = psi.shape().clone();
    shape.check_site(a)?;
    shape.check_site(b)?;
    let mut dims = shape.dims().to_vec();
    dims.swap(a, b);
    let new_shape = HilbertShape::new(dims)?;
    let mut amps = Array1::from_elem(psi.dim(), ZERO);
    for (idx, &z) in psi.amps.iter().enumerate() {
        let mut digits = shape.digits(idx);
        digits.swap(a, b);
        amps[new_shape.index_of(&digits)] = z;
    }
    StateVector::unnormalized(new_shape, amps).map(|mut s| {
        s.normalized = psi.normalized;
        s
    })
}

pub(crate) fn inner(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm_sqr(a: &Array1<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn check_len(shape: &HilbertShape, len: usize) -> Result<()> {
    check_dim(shape.total_dim(), len)
}

/// Pauli matrices with `|↑> = index 0`.
pub mod pauli {
    use super::*;

    pub fn x() -> Operator {
        Operator::from_real_rows([[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn y() -> Operator {
        Operator::from_rows([[ZERO, -I], [I, ZERO]])
    }

    pub fn z() -> Operator {
        Operator::from_real_rows([[1.0, 0.0], [0.0, -1.0]])
    }
}
