//! Clebsch-Gordan embedding of a spin-1 qutrit into the symmetric
//! subspace of two qubits, and the named fixture states.
//!
//! Qutrit basis order is `|1>, |0>, |-1>` (eigenvalues of `S_z`); qubit
//! basis order is `|↑>, |↓>`.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{check_dim, lift_local, norm_sqr, pauli, HilbertShape, Operator, StateVector, ONE, ZERO};
use crate::observables::{custom_set, spin1_set, ObservableSet};
use crate::slocc::concurrence;

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingReport {
    pub input: StateVector,
    pub output: StateVector,
    pub concurrence_of_image: f64,
}

/// Linear map `|1> → |↑↑>`, `|0> → (|↑↓> + |↓↑>)/√2`, `|-1> → |↓↓>`.
fn embed_amplitudes(q: &Array1<C64>) -> Array1<C64> {
    Array1::from(vec![q[0], q[1] * H, q[1] * H, q[2]])
}

fn require_qutrit(psi: &StateVector) -> Result<()> {
    if psi.shape().dims() != [3] {
        return Err(Error::InvalidShape(format!("expected a qutrit, got {:?}", psi.shape().dims())));
    }
    Ok(())
}

pub fn qutrit_to_two_qubits(psi: &StateVector) -> Result<EmbeddingReport> {
    require_qutrit(psi)?;
    psi.require_normalized()?;
    let output = StateVector::new(HilbertShape::qubits(2), embed_amplitudes(psi.amplitudes()))?;
    let concurrence_of_image = concurrence(&output)?;
    Ok(EmbeddingReport { input: psi.clone(), output, concurrence_of_image })
}

/// `(|↑↓> − |↓↑>)/√2`, the spin-0 complement of the embedding.
pub fn antisymmetric_state() -> StateVector {
    let v = vec![ZERO, C64::new(H, 0.0), C64::new(-H, 0.0), ZERO];
    StateVector::new(HilbertShape::qubits(2), v).expect("normalized")
}

/// Total spin `J_i = (σ_i ⊗ I + I ⊗ σ_i)/2` on two qubits.
pub fn total_spin_operators() -> [Operator; 3] {
    let shape = HilbertShape::qubits(2);
    [pauli::x(), pauli::y(), pauli::z()].map(|s| {
        lift_local(&s, 0, &shape)
            .expect("site 0")
            .add(&lift_local(&s, 1, &shape).expect("site 1"))
            .scale_real(0.5)
    })
}

/// `{J_x, J_y, J_z}` as an observable set: the spin-1 generators seen on
/// two qubits. No Casimir scalar is attached since the singlet is included.
pub fn total_spin_set() -> ObservableSet {
    custom_set(total_spin_operators().to_vec(), HilbertShape::qubits(2)).expect("orthogonal, equal norms")
}

/// `max_i ‖embed(S_i ψ) − J_i embed(ψ)‖`; zero when the embedding
/// intertwines the spin-1 and total-spin representations.
pub fn spin_intertwining_check(psi: &StateVector) -> Result<f64> {
    require_qutrit(psi)?;
    let spins = spin1_set();
    let image = embed_amplitudes(psi.amplitudes());
    let mut worst: f64 = 0.0;
    for (s, j) in spins.observables().iter().zip(total_spin_operators()) {
        let lhs = embed_amplitudes(&s.matrix.apply(psi.amplitudes()));
        let rhs = j.apply(&image);
        worst = worst.max(norm_sqr(&(&lhs - &rhs)).sqrt());
    }
    Ok(worst)
}

/// Biphoton polarization states `|x,x>`, `(|x,y> + |y,x>)/√2`, `|y,y>`
/// with `x ↦ ↑`, `y ↦ ↓`, labelled by spin projection.
pub fn biphoton_basis() -> [(&'static str, StateVector); 3] {
    let shape = HilbertShape::qubits(2);
    let mk = |v: Vec<C64>| StateVector::new(shape.clone(), v).expect("normalized");
    let h = C64::new(H, 0.0);
    [
        ("1", mk(vec![ONE, ZERO, ZERO, ZERO])),
        ("0", mk(vec![ZERO, h, h, ZERO])),
        ("-1", mk(vec![ZERO, ZERO, ZERO, ONE])),
    ]
}

/// Fixture names accepted by [`fixture`].
pub const FIXTURE_NAMES: &[&str] = &[
    "spin1:1",
    "spin1:0",
    "spin1:-1",
    "spin1:+",
    "spin1:-",
    "pion:+",
    "pion:0",
    "pion:-",
    "biphoton:1",
    "biphoton:0",
    "biphoton:-1",
    "antisym",
    "bell:phi+",
    "bell:phi-",
    "bell:psi+",
    "bell:psi-",
    "ghz",
    "w",
    "lambda:12",
    "lambda:13",
    "ket:<bits>",
];

/// Named states. `pion:*` alias the spin-1 isotriplet states; `lambda:12`
/// and `lambda:13` are the symmetric one-excitation states of two
/// three-level atoms on levels (1,2) and (1,3); `ket:<bits>` is any
/// computational-basis qubit product such as `ket:000`.
pub fn fixture(name: &str) -> Result<StateVector> {
    let h = C64::new(H, 0.0);
    let q2 = HilbertShape::qubits(2);
    let q3 = HilbertShape::qubits(3);
    let spin = HilbertShape::single(3)?;
    let atoms = HilbertShape::new(vec![3, 3])?;
    let sparse = |shape: &HilbertShape, entries: &[(usize, C64)]| {
        let mut v = Array1::from_elem(shape.total_dim(), ZERO);
        for &(k, a) in entries {
            v[k] = a;
        }
        StateVector::new(shape.clone(), v)
    };
    match name {
        "spin1:1" | "pion:+" => sparse(&spin, &[(0, ONE)]),
        "spin1:0" | "pion:0" => sparse(&spin, &[(1, ONE)]),
        "spin1:-1" | "pion:-" => sparse(&spin, &[(2, ONE)]),
        "spin1:+" => sparse(&spin, &[(0, h), (2, h)]),
        "spin1:-" => sparse(&spin, &[(0, h), (2, -h)]),
        "biphoton:1" => Ok(biphoton_basis()[0].1.clone()),
        "biphoton:0" => Ok(biphoton_basis()[1].1.clone()),
        "biphoton:-1" => Ok(biphoton_basis()[2].1.clone()),
        "antisym" => Ok(antisymmetric_state()),
        "bell:phi+" => sparse(&q2, &[(0, h), (3, h)]),
        "bell:phi-" => sparse(&q2, &[(0, h), (3, -h)]),
        "bell:psi+" => sparse(&q2, &[(1, h), (2, h)]),
        "bell:psi-" => sparse(&q2, &[(1, h), (2, -h)]),
        "ghz" => sparse(&q3, &[(0, h), (7, h)]),
        "w" => {
            let t = C64::new(1.0 / 3f64.sqrt(), 0.0);
            sparse(&q3, &[(1, t), (2, t), (4, t)])
        }
        // |2>|1> + |1>|2>, levels 1..3 at indices 0..2
        "lambda:12" => sparse(&atoms, &[(3, h), (1, h)]),
        "lambda:13" => sparse(&atoms, &[(6, h), (2, h)]),
        _ => {
            if let Some(bits) = name.strip_prefix("ket:") {
                let digits: Vec<usize> = bits
                    .chars()
                    .map(|c| match c {
                        '0' => Some(0),
                        '1' => Some(1),
                        _ => None,
                    })
                    .collect::<Option<_>>()
                    .filter(|d: &Vec<usize>| !d.is_empty())
                    .ok_or_else(|| Error::Parse(format!("bad bit string in fixture '{name}'")))?;
                return StateVector::product_basis(HilbertShape::qubits(digits.len()), &digits);
            }
            Err(Error::Parse(format!("unknown fixture '{name}'")))
        }
    }
}

/// Checks that `embed` and the inner product commute: `|<e(φ)|e(ψ)> − <φ|ψ>|`.
pub fn isometry_defect(phi: &StateVector, psi: &StateVector) -> Result<f64> {
    require_qutrit(phi)?;
    require_qutrit(psi)?;
    check_dim(phi.dim(), psi.dim())?;
    let a = embed_amplitudes(phi.amplitudes());
    let b = embed_amplitudes(psi.amplitudes());
    let lhs: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    Ok((lhs - phi.inner(psi)?).norm())
}
