//! Monte-Carlo wavefunction trajectories for two three-level Λ atoms in a
//! single-mode cavity.
//!
//! Levels are numbered 1, 2, 3 (stored at indices 0, 1, 2) with `ε₁ = 0`.
//! The cavity drives 1 ↔ 2 resonantly; 2 → 3 emits a Stokes photon that
//! leaves the system. The full space is `atom ⊗ atom ⊗ Fock(0..=cutoff)`
//! and `ħ = 1`.
//!
//! ```text
//! H = Σ_j (ε₂|2><2|_j + ε₃|3><3|_j) + ω_c a†a + g Σ_j (a|2><1|_j + a†|1><2|_j)
//! ```
//!
//! Jump channels: the Stokes channel `L = Σ_j |3><2|_j` at rate `γ_s`
//! (or one channel per atom with `individual_jumps`), and cavity leakage
//! `a` at rate `κ`. Between jumps the state follows
//! `H_eff = H − (i/2) Σ_c γ_c L_c†L_c`, stepped with a fixed-step RK4
//! propagator.

use ndarray::Array1;
use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{check_dim, inner, norm_sqr, reduced_density, HilbertShape, Operator, StateVector, ONE};
use crate::observables::two_level_pair_set;
use crate::random::{derived_rng, seeded};
use crate::variance::{ce_check, total_variance, CeCheck};

pub const LEVELS: usize = 3;
/// Largest amplitude tolerated in the top Fock level.
pub const CUTOFF_TOL: f64 = 1e-6;
/// Largest single-step norm change of the propagator accepted at build time.
pub const MAX_STEP_NORM_CHANGE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaParams {
    pub epsilon2: f64,
    pub epsilon3: f64,
    pub omega_c: f64,
    pub g: f64,
    pub gamma_s: f64,
    pub kappa: f64,
    pub fock_cutoff: usize,
    pub dt: f64,
    pub t_max: f64,
    pub seed: u64,
    /// One Stokes channel per atom instead of the collective operator.
    pub individual_jumps: bool,
    /// Store a state snapshot every this many steps (0 disables snapshots).
    pub record_every: usize,
}

impl Default for LambdaParams {
    fn default() -> Self {
        Self {
            epsilon2: 1.0,
            epsilon3: 0.3,
            omega_c: 1.0,
            g: 1.0,
            gamma_s: 0.2,
            kappa: 0.0,
            fock_cutoff: 2,
            dt: 0.01,
            t_max: 200.0,
            seed: 0,
            individual_jumps: false,
            record_every: 100,
        }
    }
}

impl LambdaParams {
    /// Stokes photon frequency `ε₂ − ε₃`.
    pub fn omega_s(&self) -> f64 {
        self.epsilon2 - self.epsilon3
    }

    pub fn shape(&self) -> HilbertShape {
        HilbertShape::new(vec![LEVELS, LEVELS, self.fock_cutoff + 1]).expect("cutoff >= 1")
    }

    pub fn dim(&self) -> usize {
        LEVELS * LEVELS * (self.fock_cutoff + 1)
    }

    /// Analytic vacuum Rabi period of `|1,1>|1> ↔ (|21>+|12>)/√2 |0>`.
    pub fn rabi_period(&self) -> f64 {
        std::f64::consts::PI / (self.g * std::f64::consts::SQRT_2)
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("epsilon2", self.epsilon2),
            ("epsilon3", self.epsilon3),
            ("omega_c", self.omega_c),
            ("g", self.g),
            ("gamma_s", self.gamma_s),
            ("kappa", self.kappa),
            ("t_max", self.t_max),
        ];
        for (name, v) in named {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParams(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.fock_cutoff < 1 {
            return Err(Error::InvalidParams("fock_cutoff must be >= 1".into()));
        }
        Ok(())
    }
}

/// Index of `|a1, a2, n>` with levels `a1, a2 ∈ 0..3`.
fn idx(p: &LambdaParams, a1: usize, a2: usize, n: usize) -> usize {
    (a1 * LEVELS + a2) * (p.fock_cutoff + 1) + n
}

fn atom_sigma(p: &LambdaParams, atom: usize, to: usize, from: usize) -> Operator {
    let mut m = Operator::zeros(p.dim()).into_matrix();
    let f = p.fock_cutoff + 1;
    for other in 0..LEVELS {
        for n in 0..f {
            let (src, dst) = if atom == 0 {
                (idx(p, from, other, n), idx(p, to, other, n))
            } else {
                (idx(p, other, from, n), idx(p, other, to, n))
            };
            m[[dst, src]] = ONE;
        }
    }
    Operator::from_array(m).expect("finite")
}

fn annihilation(p: &LambdaParams) -> Operator {
    let mut m = Operator::zeros(p.dim()).into_matrix();
    for a1 in 0..LEVELS {
        for a2 in 0..LEVELS {
            for n in 1..=p.fock_cutoff {
                m[[idx(p, a1, a2, n - 1), idx(p, a1, a2, n)]] = C64::new((n as f64).sqrt(), 0.0);
            }
        }
    }
    Operator::from_array(m).expect("finite")
}

/// Cavity photons plus atoms in levels 2 or 3; conserved by `H_eff` and
/// by Stokes jumps, lowered by one per cavity jump.
pub fn excitation_operator(p: &LambdaParams) -> Operator {
    let mut m = Operator::zeros(p.dim()).into_matrix();
    for a1 in 0..LEVELS {
        for a2 in 0..LEVELS {
            for n in 0..=p.fock_cutoff {
                let k = idx(p, a1, a2, n);
                let excited = (a1 > 0) as usize + (a2 > 0) as usize;
                m[[k, k]] = C64::new((n + excited) as f64, 0.0);
            }
        }
    }
    Operator::from_array(m).expect("finite")
}

/// `Σ_j (ε₂|2><2|_j + ε₃|3><3|_j)`.
pub fn atomic_energy_operator(p: &LambdaParams) -> Operator {
    (0..2).fold(Operator::zeros(p.dim()), |h, atom| {
        h.add(&atom_sigma(p, atom, 1, 1).scale_real(p.epsilon2))
            .add(&atom_sigma(p, atom, 2, 2).scale_real(p.epsilon3))
    })
}

/// Atomic plus cavity energy without the coupling term.
pub fn bare_energy_operator(p: &LambdaParams) -> Operator {
    let a = annihilation(p);
    atomic_energy_operator(p).add(&a.adjoint().dot(&a).scale_real(p.omega_c))
}

/// The Hermitian model Hamiltonian; fails if `dt` is too coarse for it.
pub fn build_hamiltonian(p: &LambdaParams) -> Result<Operator> {
    p.validate()?;
    let h = hamiltonian(p);
    check_step(p, &effective_generator(p, &h))?;
    Ok(h)
}

fn hamiltonian(p: &LambdaParams) -> Operator {
    let a = annihilation(p);
    let ad = a.adjoint();
    let mut h = bare_energy_operator(p);
    for atom in 0..2 {
        let raise = atom_sigma(p, atom, 1, 0);
        let lower = atom_sigma(p, atom, 0, 1);
        h = h.add(&a.dot(&raise).add(&ad.dot(&lower)).scale_real(p.g));
    }
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Stokes,
    Cavity,
}

struct JumpOp {
    channel: Channel,
    atom: Option<usize>,
    rate: f64,
    op: Operator,
}

fn jump_operators(p: &LambdaParams) -> Vec<JumpOp> {
    let mut ops = Vec::new();
    if p.gamma_s > 0.0 {
        if p.individual_jumps {
            for atom in 0..2 {
                ops.push(JumpOp { channel: Channel::Stokes, atom: Some(atom), rate: p.gamma_s, op: atom_sigma(p, atom, 2, 1) });
            }
        } else {
            let l = atom_sigma(p, 0, 2, 1).add(&atom_sigma(p, 1, 2, 1));
            ops.push(JumpOp { channel: Channel::Stokes, atom: None, rate: p.gamma_s, op: l });
        }
    }
    if p.kappa > 0.0 {
        ops.push(JumpOp { channel: Channel::Cavity, atom: None, rate: p.kappa, op: annihilation(p) });
    }
    ops
}

fn effective_generator(p: &LambdaParams, h: &Operator) -> Operator {
    jump_operators(p).iter().fold(h.clone(), |acc, j| {
        acc.sub(&j.op.adjoint().dot(&j.op).scale(C64::new(0.0, 0.5 * j.rate)))
    })
}

fn check_step(p: &LambdaParams, h_eff: &Operator) -> Result<()> {
    let prop = h_eff.rk4_propagator(p.dt);
    let worst = (0..p.dim())
        .map(|k| {
            let col = prop.matrix().column(k).to_owned();
            (norm_sqr(&col) - 1.0).abs()
        })
        .fold(0.0, f64::max);
    if worst >= MAX_STEP_NORM_CHANGE {
        return Err(Error::InvalidParams(format!(
            "dt = {} changes the norm by {worst:.3} in one step; reduce dt",
            p.dt
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub channel: Channel,
    /// Emitting atom for individual Stokes jumps.
    pub atom: Option<usize>,
    /// Normalized state immediately after the jump.
    pub state_after: StateVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub jumps: Vec<JumpEvent>,
}

impl TrajectoryRecord {
    pub fn first_stokes(&self) -> Option<&JumpEvent> {
        self.jumps.iter().find(|j| j.channel == Channel::Stokes)
    }

    pub fn stokes_count(&self) -> usize {
        self.jumps.iter().filter(|j| j.channel == Channel::Stokes).count()
    }

    /// `<N>` plus cavity jumps so far at every snapshot; constant along a
    /// trajectory.
    pub fn excitation_ledger(&self, p: &LambdaParams) -> Vec<f64> {
        let n_op = excitation_operator(p);
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, s)| {
                let lost = self.jumps.iter().filter(|j| j.channel == Channel::Cavity && j.time <= t).count();
                inner(s.amplitudes(), &n_op.apply(s.amplitudes())).re + lost as f64
            })
            .collect()
    }
}

/// `|1,1> ⊗ |n=1>`.
pub fn default_initial(p: &LambdaParams) -> StateVector {
    StateVector::basis(p.shape(), idx(p, 0, 0, 1)).expect("index in range")
}

/// Atomic state `ψ_atoms ⊗ |n=0>`.
pub fn with_vacuum(p: &LambdaParams, atoms: &StateVector) -> Result<StateVector> {
    check_dim(LEVELS * LEVELS, atoms.dim())?;
    let mut amps = Array1::from_elem(p.dim(), C64::new(0.0, 0.0));
    for (k, &a) in atoms.amplitudes().iter().enumerate() {
        amps[k * (p.fock_cutoff + 1)] = a;
    }
    StateVector::new(p.shape(), amps)
}

fn check_cutoff(p: &LambdaParams, psi: &Array1<C64>) -> Result<()> {
    let norm = norm_sqr(psi).sqrt();
    let top = (0..LEVELS * LEVELS)
        .map(|k| psi[k * (p.fock_cutoff + 1) + p.fock_cutoff].norm() / norm)
        .fold(0.0, f64::max);
    if top > CUTOFF_TOL {
        return Err(Error::CutoffOverflow { cutoff: p.fock_cutoff, amplitude: top });
    }
    Ok(())
}

/// One trajectory seeded by `p.seed`.
pub fn run_trajectory(p: &LambdaParams, initial: &StateVector) -> Result<TrajectoryRecord> {
    run_with_rng(p, initial, &mut seeded(p.seed))
}

/// Standard norm-loss jump sampling: draw `r ~ U(0,1)`, evolve the
/// unnormalized state until `‖ψ‖² ≤ r`, then pick a channel with weight
/// `γ_c ‖L_c ψ‖²` and apply it.
pub fn run_with_rng<R: Rng + ?Sized>(p: &LambdaParams, initial: &StateVector, rng: &mut R) -> Result<TrajectoryRecord> {
    initial.require_normalized()?;
    check_dim(p.dim(), initial.dim())?;
    let h = build_hamiltonian(p)?;
    let prop = effective_generator(p, &h).rk4_propagator(p.dt);
    let jumps_ops = jump_operators(p);
    let shape = p.shape();
    check_cutoff(p, initial.amplitudes())?;

    let n_steps = (p.t_max / p.dt).round() as usize;
    let mut psi = initial.amplitudes().clone();
    let mut threshold: f64 = rng.random();
    let mut rec = TrajectoryRecord { times: vec![0.0], states: vec![initial.clone()], jumps: Vec::new() };

    for step in 1..=n_steps {
        let t = step as f64 * p.dt;
        psi = prop.apply(&psi);
        check_cutoff(p, &psi)?;
        if norm_sqr(&psi) <= threshold && !jumps_ops.is_empty() {
            let candidates: Vec<(usize, Array1<C64>, f64)> = jumps_ops
                .iter()
                .enumerate()
                .map(|(k, j)| {
                    let out = j.op.apply(&psi);
                    let w = j.rate * norm_sqr(&out);
                    (k, out, w)
                })
                .collect();
            let total: f64 = candidates.iter().map(|c| c.2).sum();
            if total > 0.0 {
                let mut pick = rng.random::<f64>() * total;
                let chosen = candidates
                    .iter()
                    .find(|c| {
                        pick -= c.2;
                        pick <= 0.0
                    })
                    .unwrap_or_else(|| candidates.iter().rev().find(|c| c.2 > 0.0).expect("positive weight"));
                let state_after = StateVector::normalize_from(shape.clone(), chosen.1.clone())?;
                psi = state_after.amplitudes().clone();
                let j = &jumps_ops[chosen.0];
                rec.jumps.push(JumpEvent { time: t, channel: j.channel, atom: j.atom, state_after });
            }
            threshold = rng.random();
        }
        if p.record_every > 0 && (step % p.record_every == 0 || step == n_steps) {
            rec.times.push(t);
            rec.states.push(StateVector::normalize_from(shape.clone(), psi.clone())?);
        }
    }
    Ok(rec)
}

/// Deterministic no-jump evolution under `H_eff`, returning the
/// unnormalized state at each of `n_steps` steps (index 0 is the input).
pub fn no_jump_evolution(p: &LambdaParams, initial: &StateVector, n_steps: usize) -> Result<Vec<Array1<C64>>> {
    check_dim(p.dim(), initial.dim())?;
    let h = build_hamiltonian(p)?;
    let prop = effective_generator(p, &h).rk4_propagator(p.dt);
    let mut out = Vec::with_capacity(n_steps + 1);
    let mut psi = initial.amplitudes().clone();
    out.push(psi.clone());
    for _ in 0..n_steps {
        psi = prop.apply(&psi);
        out.push(psi.clone());
    }
    Ok(out)
}

/// `<ψ|ρ_atoms|ψ>` for a two-atom target state.
pub fn atomic_fidelity(state: &StateVector, target_atoms: &StateVector) -> Result<f64> {
    check_dim(LEVELS * LEVELS, target_atoms.dim())?;
    let rho = reduced_density(state, &[0, 1])?;
    let t = target_atoms.amplitudes();
    Ok(inner(t, &rho.apply(t)).re / state.norm_sqr())
}

/// Atomic state heralded by a Stokes jump, `(|31>+|13>)/√2`.
pub fn robust_target() -> StateVector {
    crate::embedding::fixture("lambda:13").expect("fixture")
}

/// Atomic state reached by absorbing the cavity photon, `(|21>+|12>)/√2`.
pub fn absorbed_target() -> StateVector {
    crate::embedding::fixture("lambda:12").expect("fixture")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PostStokesReport {
    pub time: f64,
    pub fidelity: f64,
    /// `Tr ρ_atoms²` right after the jump.
    pub purity: f64,
    pub ce: CeCheck,
    pub total_variance: f64,
    /// Atomic energy once the Stokes photon has left.
    pub atomic_energy: f64,
    /// Atomic energy plus the Stokes photon `ω_S`.
    pub energy_with_stokes_photon: f64,
}

/// Atomic pure state extracted from the reduced density matrix of `state`.
fn atomic_state(state: &StateVector) -> Result<(StateVector, f64)> {
    let rho = reduced_density(state, &[0, 1])?.scale_real(1.0 / state.norm_sqr());
    let purity = rho.dot(&rho).trace().re;
    let m = rho.matrix();
    let j = (0..m.nrows())
        .max_by(|&a, &b| m[[a, a]].re.total_cmp(&m[[b, b]].re))
        .expect("non-empty");
    let col = m.column(j).to_owned();
    let atoms = StateVector::normalize_from(HilbertShape::new(vec![LEVELS, LEVELS])?, col)?;
    Ok((atoms, purity))
}

pub fn post_stokes_analysis(p: &LambdaParams, rec: &TrajectoryRecord) -> Result<PostStokesReport> {
    let jump = rec.first_stokes().ok_or(Error::NoStokesJump)?;
    let target = robust_target();
    let fidelity = atomic_fidelity(&jump.state_after, &target)?;
    let (atoms, purity) = atomic_state(&jump.state_after)?;
    let set = two_level_pair_set((1, 3))?;
    let ce = ce_check(&set, &atoms, crate::variance::DEFAULT_CE_TOL)?;
    let total = total_variance(&set, &atoms)?.total;
    let e_op = atomic_energy_operator(p);
    let atomic_energy = inner(jump.state_after.amplitudes(), &e_op.apply(jump.state_after.amplitudes())).re;
    Ok(PostStokesReport {
        time: jump.time,
        fidelity,
        purity,
        ce,
        total_variance: total,
        atomic_energy,
        energy_with_stokes_photon: atomic_energy + p.omega_s(),
    })
}

/// Evolves `state` without jumps for `horizon` and returns
/// `1 − |<ψ(0)|ψ(t)>|²`; norm lost to decay counts as deviation.
pub fn stability_check(p: &LambdaParams, state: &StateVector, horizon: f64) -> Result<f64> {
    state.require_normalized()?;
    let n_steps = (horizon / p.dt).round() as usize;
    let path = no_jump_evolution(p, state, n_steps)?;
    let last = path.last().expect("at least the initial state");
    Ok((1.0 - inner(state.amplitudes(), last).norm_sqr()).max(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub trajectories: usize,
    pub with_stokes: usize,
    pub cavity_jumps: usize,
    pub mean_first_stokes_time: Option<f64>,
    pub mean_fidelity: Option<f64>,
    pub ce_pass_rate: Option<f64>,
    pub mean_total_variance: Option<f64>,
}

/// Runs `n` trajectories; trajectory `k` uses the stream derived from
/// `(p.seed, k)`, so results do not depend on the thread schedule.
pub fn run_ensemble(p: &LambdaParams, initial: &StateVector, n: usize) -> Result<Vec<TrajectoryRecord>> {
    (0..n)
        .into_par_iter()
        .map(|k| run_with_rng(p, initial, &mut derived_rng(p.seed, k as u64)))
        .collect()
}

pub fn summarize(p: &LambdaParams, records: &[TrajectoryRecord]) -> Result<(EnsembleSummary, Vec<PostStokesReport>)> {
    let reports: Vec<PostStokesReport> = records
        .iter()
        .filter(|r| r.first_stokes().is_some())
        .map(|r| post_stokes_analysis(p, r))
        .collect::<Result<_>>()?;
    let k = reports.len();
    let mean = |f: &dyn Fn(&PostStokesReport) -> f64| (k > 0).then(|| reports.iter().map(f).sum::<f64>() / k as f64);
    let summary = EnsembleSummary {
        trajectories: records.len(),
        with_stokes: k,
        cavity_jumps: records
            .iter()
            .map(|r| r.jumps.iter().filter(|j| j.channel == Channel::Cavity).count())
            .sum(),
        mean_first_stokes_time: mean(&|r| r.time),
        mean_fidelity: mean(&|r| r.fidelity),
        ce_pass_rate: mean(&|r| if r.ce.is_ce { 1.0 } else { 0.0 }),
        mean_total_variance: mean(&|r| r.total_variance),
    };
    Ok((summary, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn sym12(p: &LambdaParams) -> StateVector {
        with_vacuum(p, &absorbed_target()).unwrap()
    }

    fn anti12(p: &LambdaParams) -> StateVector {
        let mut amps = Array1::from_elem(p.dim(), C64::new(0.0, 0.0));
        amps[idx(p, 1, 0, 0)] = C64::new(H, 0.0);
        amps[idx(p, 0, 1, 0)] = C64::new(-H, 0.0);
        StateVector::new(p.shape(), amps).unwrap()
    }

    fn element(h: &Operator, a: &StateVector, b: &StateVector) -> C64 {
        inner(a.amplitudes(), &h.apply(b.amplitudes()))
    }

    #[test]
    fn hamiltonian_is_hermitian_with_expected_couplings() {
        let p = LambdaParams::default();
        let h = build_hamiltonian(&p).unwrap();
        assert!(h.is_hermitian(1e-15));
        let ground_photon = default_initial(&p);
        assert_abs_diff_eq!(element(&h, &sym12(&p), &ground_photon).re, p.g * 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(element(&h, &anti12(&p), &ground_photon).norm(), 0.0, epsilon = 1e-15);

        let free = LambdaParams { g: 0.0, ..p.clone() };
        let h0 = build_hamiltonian(&free).unwrap();
        let out = h0.apply(ground_photon.amplitudes());
        for (k, z) in out.iter().enumerate() {
            let expected = if k == idx(&free, 0, 0, 1) { free.omega_c } else { 0.0 };
            assert_abs_diff_eq!(z.re, expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn params_validation() {
        assert!(LambdaParams { g: -1.0, ..Default::default() }.validate().is_err());
        assert!(LambdaParams { dt: 0.0, ..Default::default() }.validate().is_err());
        assert!(LambdaParams { fock_cutoff: 0, ..Default::default() }.validate().is_err());
        let coarse = LambdaParams { dt: 1.0, ..Default::default() };
        assert!(matches!(build_hamiltonian(&coarse), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn rabi_oscillation_without_losses() {
        let p = LambdaParams { gamma_s: 0.0, kappa: 0.0, t_max: 5.0, record_every: 1, ..Default::default() };
        let rec = run_trajectory(&p, &default_initial(&p)).unwrap();
        assert!(rec.jumps.is_empty());
        let quarter = p.rabi_period() / 2.0;
        let k = (quarter / p.dt).round() as usize;
        let f = atomic_fidelity(&rec.states[k], &absorbed_target()).unwrap();
        assert!(f > 0.999, "fidelity {f} at t = {}", rec.times[k]);
    }

    #[test]
    fn collective_stokes_jump_creates_robust_state() {
        let p = LambdaParams { seed: 3, ..Default::default() };
        let rec = run_trajectory(&p, &default_initial(&p)).unwrap();
        let first = rec.jumps.first().expect("a jump within t_max");
        assert_eq!(first.channel, Channel::Stokes);
        let report = post_stokes_analysis(&p, &rec).unwrap();
        assert!(report.fidelity > 0.999);
        assert!(report.ce.is_ce);
        assert_abs_diff_eq!(report.total_variance, 6.0, epsilon = 1e-9);
        assert_abs_diff_eq!(report.atomic_energy, p.epsilon3, epsilon = 1e-9);
        assert_abs_diff_eq!(report.energy_with_stokes_photon, p.epsilon2, epsilon = 1e-9);
    }

    #[test]
    fn individual_jumps_give_product_states() {
        let p = LambdaParams { individual_jumps: true, seed: 5, ..Default::default() };
        let rec = run_trajectory(&p, &default_initial(&p)).unwrap();
        let report = post_stokes_analysis(&p, &rec).unwrap();
        assert_abs_diff_eq!(report.fidelity, 0.5, epsilon = 1e-9);
        assert!(rec.first_stokes().unwrap().atom.is_some());
    }

    #[test]
    fn strong_leakage_prevents_stokes() {
        let p = LambdaParams { gamma_s: 0.0, kappa: 20.0, dt: 0.001, t_max: 5.0, ..Default::default() };
        let rec = run_trajectory(&p, &default_initial(&p)).unwrap();
        assert_eq!(rec.stokes_count(), 0);
        assert_eq!(rec.jumps.len(), 1);
        assert_eq!(rec.jumps[0].channel, Channel::Cavity);
        assert!(matches!(post_stokes_analysis(&p, &rec), Err(Error::NoStokesJump)));
    }

    #[test]
    fn excitation_ledger_is_constant() {
        for p in [
            LambdaParams { seed: 1, kappa: 0.3, t_max: 60.0, record_every: 10, ..Default::default() },
            LambdaParams { seed: 2, t_max: 60.0, record_every: 10, ..Default::default() },
        ] {
            let rec = run_trajectory(&p, &default_initial(&p)).unwrap();
            for v in rec.excitation_ledger(&p) {
                assert_abs_diff_eq!(v, 1.0, epsilon = 1e-6);
            }
            for s in &rec.states {
                assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn same_seed_same_jumps() {
        let p = LambdaParams { seed: 42, kappa: 0.1, t_max: 50.0, ..Default::default() };
        let a = run_trajectory(&p, &default_initial(&p)).unwrap();
        let b = run_trajectory(&p, &default_initial(&p)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cutoff_overflow_is_an_error() {
        let p = LambdaParams { fock_cutoff: 1, t_max: 1.0, ..Default::default() };
        assert!(matches!(
            run_trajectory(&p, &default_initial(&p)),
            Err(Error::CutoffOverflow { cutoff: 1, .. })
        ));
    }

    #[test]
    fn stability_examples() {
        let p = LambdaParams::default();
        let robust = with_vacuum(&p, &robust_target()).unwrap();
        assert!(stability_check(&p, &robust, 50.0).unwrap() < 1e-6);
        let ground = StateVector::basis(p.shape(), idx(&p, 0, 0, 0)).unwrap();
        assert!(stability_check(&p, &ground, 50.0).unwrap() < 1e-12);
        let dev = stability_check(&p, &sym12(&p), p.rabi_period() / 2.0).unwrap();
        assert!(dev > 0.9, "deviation {dev}");
    }

    #[test]
    fn unitary_limit_conserves_energy_and_norm() {
        let p = LambdaParams { gamma_s: 0.0, kappa: 0.0, ..Default::default() };
        let h = build_hamiltonian(&p).unwrap();
        let path = no_jump_evolution(&p, &default_initial(&p), 2000).unwrap();
        let e0 = inner(&path[0], &h.apply(&path[0])).re;
        for psi in &path {
            // RK4 is not exactly unitary; the drift is O((ω dt)^6) per step
            let n = norm_sqr(psi);
            assert_abs_diff_eq!(n, 1.0, epsilon = 1e-7);
            assert_abs_diff_eq!(inner(psi, &h.apply(psi)).re / n, e0, epsilon = 1e-8);
        }
    }

    #[test]
    fn no_jump_norm_is_non_increasing() {
        let p = LambdaParams { kappa: 0.2, ..Default::default() };
        let path = no_jump_evolution(&p, &default_initial(&p), 3000).unwrap();
        for w in path.windows(2) {
            assert!(norm_sqr(&w[1]) <= norm_sqr(&w[0]) + 1e-15);
        }
    }
}
