//! Bases of basic observables (the Lie algebra of the dynamic symmetry
//! group) together with their Casimir data.
//!
//! All built-in sets use physics normalization: every generator has
//! Hilbert-Schmidt norm `Tr(X²) = 2` on its own site. Custom sets must be
//! uniformly scaled and orthogonal, but the common scale is free. Total
//! variances are therefore comparable only between sets of one scale.

use std::fmt;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{lift_local, pauli, HilbertShape, Operator, I, ONE, ZERO};

const HERMITIAN_TOL: f64 = 1e-12;
const ORTHO_TOL: f64 = 1e-10;
const CASIMIR_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub matrix: Operator,
    /// Site the generator acts on; `None` for global observables.
    pub site: Option<usize>,
    pub label: String,
}

/// Where the attached Casimir scalar is valid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CasimirScope {
    /// `ΣX_i² = C·I` holds on the whole space.
    Certified,
    /// `ΣX_i² = C` only on a designated subspace; see [`two_level_pair_set`].
    Subspace,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSet {
    shape: HilbertShape,
    observables: Vec<Observable>,
    casimir: Option<(f64, CasimirScope)>,
    name: String,
}

impl ObservableSet {
    pub fn shape(&self) -> &HilbertShape {
        &self.shape
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn casimir_scalar(&self) -> Option<f64> {
        self.casimir.map(|(c, _)| c)
    }

    pub fn casimir_scope(&self) -> Option<CasimirScope> {
        self.casimir.map(|(_, s)| s)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `ΣX_i²`.
    pub fn casimir_operator(&self) -> Operator {
        let d = self.shape.total_dim();
        self.observables
            .iter()
            .fold(Operator::zeros(d), |acc, x| acc.add(&x.matrix.dot(&x.matrix)))
    }

    /// Mixes the basis with a real orthogonal matrix: `Y_a = Σ_b R_ab X_b`.
    pub fn remixed(&self, rotation: &Array2<f64>) -> Result<ObservableSet> {
        let n = self.len();
        if rotation.dim() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, got: rotation.nrows() });
        }
        let d = self.shape.total_dim();
        let mats: Vec<Operator> = (0..n)
            .map(|a| {
                self.observables
                    .iter()
                    .enumerate()
                    .fold(Operator::zeros(d), |acc, (b, x)| acc.add(&x.matrix.scale_real(rotation[[a, b]])))
            })
            .collect();
        let mut set = custom_set(mats, self.shape.clone())?;
        if let Some((c, CasimirScope::Subspace)) = self.casimir {
            set.casimir = Some((c, CasimirScope::Subspace));
        }
        set.name = format!("{}~mixed", self.name);
        Ok(set)
    }

    /// Parses the set identifiers `pauli:<n>`, `spin1`, `su3`, `pair:<a><b>`.
    pub fn from_id(id: &str) -> Result<ObservableSet> {
        let id = id.trim();
        match id {
            "spin1" => return Ok(spin1_set()),
            "su3" => return Ok(gell_mann_set()),
            _ => {}
        }
        if let Some(n) = id.strip_prefix("pauli:") {
            let n: usize = n
                .parse()
                .map_err(|_| Error::Parse(format!("bad qubit count in '{id}'")))?;
            if n == 0 || n > 12 {
                return Err(Error::Parse(format!("qubit count out of range in '{id}'")));
            }
            return Ok(pauli_set(n));
        }
        if let Some(pair) = id.strip_prefix("pair:") {
            let digits: Vec<usize> = pair
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as usize))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::Parse(format!("bad level pair in '{id}'")))?;
            if digits.len() != 2 {
                return Err(Error::Parse(format!("bad level pair in '{id}'")));
            }
            return two_level_pair_set((digits[0], digits[1]));
        }
        Err(Error::Parse(format!("unknown observable set '{id}'")))
    }
}

impl fmt::Display for ObservableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} observables on {:?})", self.name, self.len(), self.shape.dims())
    }
}

/// Local Pauli operators on every qubit; Casimir `3n`.
pub fn pauli_set(n_sites: usize) -> ObservableSet {
    let n_sites = n_sites.max(1);
    let shape = HilbertShape::qubits(n_sites);
    let mut observables = Vec::with_capacity(3 * n_sites);
    for site in 0..n_sites {
        for (name, m) in [("X", pauli::x()), ("Y", pauli::y()), ("Z", pauli::z())] {
            observables.push(Observable {
                matrix: lift_local(&m, site, &shape).expect("site in range"),
                site: Some(site),
                label: format!("{name}{site}"),
            });
        }
    }
    build(shape, observables, format!("pauli:{n_sites}")).expect("Pauli set is valid")
}

/// Spin-1 matrices in the `|1>, |0>, |-1>` basis; Casimir 2.
pub fn spin1_set() -> ObservableSet {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sx = Operator::from_real_rows([[0.0, h, 0.0], [h, 0.0, h], [0.0, h, 0.0]]);
    let ih = C64::new(0.0, h);
    let sy = Operator::from_rows([[ZERO, -ih, ZERO], [ih, ZERO, -ih], [ZERO, ih, ZERO]]);
    let sz = Operator::from_real_rows([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]]);
    let shape = HilbertShape::single(3).expect("valid");
    let observables = [("Sx", sx), ("Sy", sy), ("Sz", sz)]
        .into_iter()
        .map(|(label, matrix)| Observable { matrix, site: Some(0), label: label.into() })
        .collect();
    build(shape, observables, "spin1".into()).expect("spin-1 set is valid")
}

/// The eight Gell-Mann generators of su(3); Casimir 16/3.
pub fn gell_mann_set() -> ObservableSet {
    let o = ZERO;
    let l = ONE;
    let s3 = 1.0 / 3f64.sqrt();
    let mats = [
        Operator::from_rows([[o, l, o], [l, o, o], [o, o, o]]),
        Operator::from_rows([[o, -I, o], [I, o, o], [o, o, o]]),
        Operator::from_rows([[l, o, o], [o, -l, o], [o, o, o]]),
        Operator::from_rows([[o, o, l], [o, o, o], [l, o, o]]),
        Operator::from_rows([[o, o, -I], [o, o, o], [I, o, o]]),
        Operator::from_rows([[o, o, o], [o, o, l], [o, l, o]]),
        Operator::from_rows([[o, o, o], [o, o, -I], [o, I, o]]),
        Operator::from_real_rows([[s3, 0.0, 0.0], [0.0, s3, 0.0], [0.0, 0.0, -2.0 * s3]]),
    ];
    let shape = HilbertShape::single(3).expect("valid");
    let observables = mats
        .into_iter()
        .enumerate()
        .map(|(k, matrix)| Observable { matrix, site: Some(0), label: format!("L{}", k + 1) })
        .collect();
    build(shape, observables, "su3".into()).expect("Gell-Mann set is valid")
}

/// Pauli-like operators on the level pair `(a, b)` of each of two
/// three-level atoms (levels numbered 1..=3, lower level first):
/// `σ_x = |b><a| + h.c.`, `σ_y = -i|b><a| + h.c.`, `σ_z = |b><b| - |a><a|`.
///
/// `ΣX_i²` is not scalar on the 9-dimensional space, so the Casimir 6 is
/// attached with [`CasimirScope::Subspace`]: it holds on states supported
/// on levels `{a, b}` of both atoms.
pub fn two_level_pair_set(levels: (usize, usize)) -> Result<ObservableSet> {
    let (p, q) = levels;
    if p == q || !(1..=3).contains(&p) || !(1..=3).contains(&q) {
        return Err(Error::InvalidLevelPair(p, q));
    }
    let (lo, hi) = (p.min(q) - 1, p.max(q) - 1);
    let shape = HilbertShape::new(vec![3, 3])?;
    let mut sx = Operator::zeros(3).into_matrix();
    let mut sy = sx.clone();
    let mut sz = sx.clone();
    sx[[hi, lo]] = ONE;
    sx[[lo, hi]] = ONE;
    sy[[hi, lo]] = -I;
    sy[[lo, hi]] = I;
    sz[[hi, hi]] = ONE;
    sz[[lo, lo]] = -ONE;
    let locals = [("X", sx), ("Y", sy), ("Z", sz)];
    let mut observables = Vec::with_capacity(6);
    for site in 0..2 {
        for (name, m) in &locals {
            let m = Operator::from_array(m.clone())?;
            observables.push(Observable {
                matrix: lift_local(&m, site, &shape)?,
                site: Some(site),
                label: format!("{name}{site}"),
            });
        }
    }
    let mut set = build(shape, observables, format!("pair:{}{}", lo + 1, hi + 1))?;
    set.casimir = Some((6.0, CasimirScope::Subspace));
    Ok(set)
}

/// Validates a user-supplied basis. The Casimir scalar is attached iff
/// `ΣX_i²` is a multiple of the identity within `1e-10`.
pub fn custom_set(matrices: Vec<Operator>, shape: HilbertShape) -> Result<ObservableSet> {
    let observables = matrices
        .into_iter()
        .enumerate()
        .map(|(k, matrix)| Observable { matrix, site: None, label: format!("X{k}") })
        .collect();
    build(shape, observables, "custom".into())
}

fn build(shape: HilbertShape, observables: Vec<Observable>, name: String) -> Result<ObservableSet> {
    let d = shape.total_dim();
    if observables.is_empty() {
        return Err(Error::InvalidShape("observable set is empty".into()));
    }
    for x in &observables {
        if x.matrix.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.matrix.dim() });
        }
        if !x.matrix.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::NotHermitian(x.label.clone()));
        }
    }
    let norm0 = observables[0].matrix.hs_inner(&observables[0].matrix).re;
    if norm0 <= ORTHO_TOL {
        return Err(Error::UnequalNorms { index: 0, norm: norm0, expected: 0.0 });
    }
    for (i, xi) in observables.iter().enumerate() {
        let ni = xi.matrix.hs_inner(&xi.matrix).re;
        if (ni - norm0).abs() > ORTHO_TOL {
            // An identical pair shows up first as an orthogonality failure.
            if let Some(j) = (0..i).find(|&j| observables[j].matrix.hs_inner(&xi.matrix).norm() > ORTHO_TOL) {
                return Err(Error::NotOrthogonal(j, i));
            }
            return Err(Error::UnequalNorms { index: i, norm: ni, expected: norm0 });
        }
        for (j, xj) in observables.iter().enumerate().take(i) {
            if xj.matrix.hs_inner(&xi.matrix).norm() > ORTHO_TOL {
                return Err(Error::NotOrthogonal(j, i));
            }
        }
    }
    let mut set = ObservableSet { shape, observables, casimir: None, name };
    let cas = set.casimir_operator();
    let c = cas.trace().re / d as f64;
    if cas.max_abs_diff(&Operator::identity(d).scale_real(c)) < CASIMIR_TOL {
        set.casimir = Some((c, CasimirScope::Certified));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn assert_basic_invariants(set: &ObservableSet) {
        let d = set.shape().total_dim();
        for x in set.observables() {
            assert!(x.matrix.is_hermitian(1e-12), "{}", x.label);
            assert!(x.matrix.trace().norm() < 1e-12, "{}", x.label);
        }
        let c = set.casimir_scalar().unwrap();
        assert!(set.casimir_operator().max_abs_diff(&Operator::identity(d).scale_real(c)) < 1e-10);
    }

    #[test]
    fn pauli_sets_have_casimir_3n() {
        for (n, c) in [(1, 3.0), (2, 6.0), (3, 9.0)] {
            let set = pauli_set(n);
            assert_eq!(set.len(), 3 * n);
            assert_abs_diff_eq!(set.casimir_scalar().unwrap(), c, epsilon = 1e-12);
            assert_eq!(set.casimir_scope(), Some(CasimirScope::Certified));
            assert_basic_invariants(&set);
        }
    }

    #[test]
    fn spin1_matrices_as_printed() {
        let set = spin1_set();
        let sz = &set.observables()[2].matrix;
        let diag: Vec<f64> = (0..3).map(|k| sz.matrix()[[k, k]].re).collect();
        assert_eq!(diag, vec![1.0, 0.0, -1.0]);
        assert_abs_diff_eq!(set.casimir_scalar().unwrap(), 2.0, epsilon = 1e-12);
        assert_basic_invariants(&set);
    }

    #[test]
    fn spin1_commutation_table() {
        let set = spin1_set();
        let s: Vec<&Operator> = set.observables().iter().map(|o| &o.matrix).collect();
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let lhs = s[a].commutator(s[b]);
            assert!(lhs.max_abs_diff(&s[c].scale(I)) < 1e-12);
        }
    }

    #[test]
    fn gell_mann_orthogonality_and_casimir() {
        let set = gell_mann_set();
        assert_eq!(set.len(), 8);
        for (a, xa) in set.observables().iter().enumerate() {
            for (b, xb) in set.observables().iter().enumerate() {
                let expected = if a == b { 2.0 } else { 0.0 };
                assert_abs_diff_eq!(xa.matrix.hs_inner(&xb.matrix).re, expected, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(set.casimir_scalar().unwrap(), 16.0 / 3.0, epsilon = 1e-12);
        assert_basic_invariants(&set);
    }

    #[test]
    fn pair_sets_embed_paulis() {
        let set = two_level_pair_set((1, 2)).unwrap();
        assert_eq!(set.len(), 6);
        // σ_z on atom 0 = diag(-1, 1, 0) ⊗ I₃
        let z0 = &set.observables()[2].matrix;
        let diag: Vec<f64> = (0..9).step_by(3).map(|k| z0.matrix()[[k, k]].re).collect();
        assert_eq!(diag, vec![-1.0, 1.0, 0.0]);
        assert_eq!(set.casimir_scope(), Some(CasimirScope::Subspace));
        assert_eq!(set.casimir_scalar(), Some(6.0));

        let set13 = two_level_pair_set((1, 3)).unwrap();
        let x0 = &set13.observables()[0].matrix;
        // |3><1| on atom 0: row 2*3, column 0 of the 9x9 lift
        assert_eq!(x0.matrix()[[6, 0]], ONE);
        assert_eq!(x0.matrix()[[0, 6]], ONE);
        assert_eq!(x0.matrix()[[3, 0]], ZERO);
    }

    #[test]
    fn pair_set_rejects_bad_levels() {
        assert!(matches!(two_level_pair_set((1, 1)), Err(Error::InvalidLevelPair(1, 1))));
        assert!(two_level_pair_set((0, 2)).is_err());
        assert!(two_level_pair_set((2, 4)).is_err());
    }

    #[test]
    fn custom_set_validation() {
        let shape = HilbertShape::qubits(1);
        let ok = custom_set(vec![pauli::x(), pauli::y(), pauli::z()], shape.clone()).unwrap();
        assert_abs_diff_eq!(ok.casimir_scalar().unwrap(), 3.0, epsilon = 1e-12);

        let dup = custom_set(vec![pauli::x(), pauli::x()], shape.clone());
        assert!(matches!(dup, Err(Error::NotOrthogonal(0, 1))));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mixed = custom_set(
            vec![
                pauli::x().add(&pauli::y()).scale_real(h),
                pauli::x().sub(&pauli::y()).scale_real(h),
                pauli::z(),
            ],
            shape.clone(),
        )
        .unwrap();
        assert_abs_diff_eq!(mixed.casimir_scalar().unwrap(), 3.0, epsilon = 1e-12);

        let non_herm = Operator::from_real_rows([[0.0, 1.0], [0.0, 0.0]]);
        assert!(matches!(custom_set(vec![non_herm], shape.clone()), Err(Error::NotHermitian(_))));

        let unequal = custom_set(vec![pauli::x(), pauli::z().scale_real(2.0)], shape);
        assert!(matches!(unequal, Err(Error::UnequalNorms { index: 1, .. })));
    }

    #[test]
    fn single_observable_set_is_accepted() {
        let s = custom_set(vec![pauli::z()], HilbertShape::qubits(1)).unwrap();
        assert_eq!(s.casimir_scalar(), Some(1.0));
    }

    #[test]
    fn set_ids_parse() {
        assert_eq!(ObservableSet::from_id("pauli:3").unwrap().len(), 9);
        assert_eq!(ObservableSet::from_id("spin1").unwrap().len(), 3);
        assert_eq!(ObservableSet::from_id("su3").unwrap().len(), 8);
        assert_eq!(ObservableSet::from_id("pair:13").unwrap().name(), "pair:13");
        assert!(ObservableSet::from_id("pauli:x").is_err());
        assert!(ObservableSet::from_id("pair:1").is_err());
        assert!(ObservableSet::from_id("so4").is_err());
    }
}
