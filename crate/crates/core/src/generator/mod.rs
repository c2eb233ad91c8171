//! Rotating-frame master-equation generator.
//!
//! Two independent representations are provided: the full 16×16 Lindblad
//! superoperator acting on column-stacked density matrices, and the closed
//! seven-element system in [`reduced`]. Their agreement on the tracked
//! subspace is tested in both directions.
//!
//! Vectorization is column stacking: `vec(ρ)[r + 4c] = ρ[r, c]`, so
//! `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.

pub mod reduced;

use nalgebra::{Matrix4, SMatrix, SVector};
use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::model::{SystemConfig, TransitionId};

pub use reduced::{embed, embed_matrix, project, reduced_rhs, ReducedGenerator, ReducedState};

pub type Superop = SMatrix<C64, 16, 16>;
pub type SuperVec = SVector<C64, 16>;

const I: C64 = C64::new(0.0, 1.0);

/// Position of ρ[row, col] in the column-stacked vector.
pub const fn vec_index(row: usize, col: usize) -> usize {
    row + 4 * col
}

pub fn vectorize(m: &Matrix4<C64>) -> SuperVec {
    // nalgebra storage is column-major, which is exactly column stacking
    SuperVec::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &SuperVec) -> Matrix4<C64> {
    Matrix4::from_column_slice(v.as_slice())
}

/// |j⟩⟨k| with zero-based indices.
pub fn sigma(j: usize, k: usize) -> Matrix4<C64> {
    let mut m = Matrix4::zeros();
    m[(j, k)] = C64::new(1.0, 0.0);
    m
}

fn kron(a: &Matrix4<C64>, b: &Matrix4<C64>) -> Superop {
    Superop::from_fn(|r, c| a[(r / 4, c / 4)] * b[(r % 4, c % 4)])
}

/// `H_A − H' + H'_{A−L}` in the frame rotating with
/// `H' = −ω_L42 σ²² − ω_L43 σ³³`.
pub fn build_hamiltonian(config: &SystemConfig) -> Matrix4<C64> {
    let [w1, w2, w3, w4] = config.omega;
    let [l42, l43] = config.laser;
    let [r42, r43] = config.rabi;
    let mut h = Matrix4::zeros();
    h[(0, 0)] = C64::from(w1);
    h[(1, 1)] = C64::from(w2 + l42);
    h[(2, 2)] = C64::from(w3 + l43);
    h[(3, 3)] = C64::from(w4);
    h[(3, 1)] = C64::from(r42);
    h[(1, 3)] = C64::from(r42);
    h[(3, 2)] = C64::from(r43);
    h[(2, 3)] = C64::from(r43);
    h
}

/// Lab-frame atomic Hamiltonian `H_A = Σ ω_j σ^{jj}`.
pub fn atomic_hamiltonian(config: &SystemConfig) -> Matrix4<C64> {
    Matrix4::from_diagonal(&config.omega.map(C64::from).into())
}

/// Thermal emission/absorption rates on one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dissipator {
    pub transition: TransitionId,
    pub occupation: f64,
    /// β⁺ = (n + 1) γ, emission |l⟩ → |p⟩.
    pub emission: f64,
    /// β⁻ = n γ, absorption |p⟩ → |l⟩.
    pub absorption: f64,
}

impl Dissipator {
    pub fn new(config: &SystemConfig, transition: TransitionId) -> Result<Self> {
        let n = config.occupation(transition)?;
        let g = config.gamma_of(transition);
        Ok(Dissipator {
            transition,
            occupation: n,
            emission: (n + 1.0) * g,
            absorption: n * g,
        })
    }

    /// `L_lp[ρ]` evaluated directly in matrix form.
    pub fn apply(&self, rho: &Matrix4<C64>) -> Matrix4<C64> {
        let (l, p) = (self.transition.upper(), self.transition.lower());
        let lower = sigma(p, l);
        let raise = sigma(l, p);
        let anti = |a: &Matrix4<C64>| a * rho + rho * a;
        (lower * rho * raise - anti(&sigma(l, l)).scale(0.5)).scale(self.emission)
            + (raise * rho * lower - anti(&sigma(p, p)).scale(0.5)).scale(self.absorption)
    }

    /// Superoperator of this dissipator.
    pub fn superop(&self) -> Superop {
        let (l, p) = (self.transition.upper(), self.transition.lower());
        lindblad_term(&sigma(p, l)).scale(self.emission)
            + lindblad_term(&sigma(l, p)).scale(self.absorption)
    }
}

/// `D(A) = Ā ⊗ A − ½ (I ⊗ A†A + (A†A)ᵀ ⊗ I)`.
fn lindblad_term(a: &Matrix4<C64>) -> Superop {
    let id = Matrix4::<C64>::identity();
    let ada = a.adjoint() * a;
    kron(&a.conjugate(), a) - (kron(&id, &ada) + kron(&ada.transpose(), &id)).scale(0.5)
}

/// The full rotating-frame Lindblad generator.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladGenerator {
    config: SystemConfig,
    hamiltonian: Matrix4<C64>,
    dissipators: [Dissipator; 4],
    superop: Superop,
}

impl LindbladGenerator {
    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn hamiltonian(&self) -> &Matrix4<C64> {
        &self.hamiltonian
    }

    pub fn superop(&self) -> &Superop {
        &self.superop
    }

    pub fn dissipators(&self) -> &[Dissipator; 4] {
        &self.dissipators
    }

    pub fn dissipator(&self, tr: TransitionId) -> &Dissipator {
        &self.dissipators[tr.index()]
    }

    /// `unvec(L · vec(ρ))`.
    pub fn apply(&self, rho: &Matrix4<C64>) -> Matrix4<C64> {
        unvectorize(&(self.superop * vectorize(rho)))
    }

    /// The same map evaluated with matrix products instead of the
    /// superoperator.
    pub fn apply_direct(&self, rho: &Matrix4<C64>) -> Matrix4<C64> {
        let h = &self.hamiltonian;
        let mut out = (h * rho - rho * h) * (-I);
        for d in &self.dissipators {
            out += d.apply(rho);
        }
        out
    }

    /// Largest singular value of the superoperator.
    pub fn spectral_norm(&self) -> f64 {
        self.superop
            .singular_values()
            .iter()
            .fold(0.0_f64, |a, &b| a.max(b))
    }
}

/// Build the rotating-frame generator. Reservoir 1 sets the occupations of
/// transitions 21 and 43, reservoir 2 those of 31 and 42.
pub fn build_generator(config: &SystemConfig) -> Result<LindbladGenerator> {
    let hamiltonian = build_hamiltonian(config);
    let dissipators = [
        Dissipator::new(config, TransitionId::T21)?,
        Dissipator::new(config, TransitionId::T31)?,
        Dissipator::new(config, TransitionId::T42)?,
        Dissipator::new(config, TransitionId::T43)?,
    ];
    let id = Matrix4::<C64>::identity();
    let mut superop = (kron(&id, &hamiltonian) - kron(&hamiltonian.transpose(), &id)) * (-I);
    for d in &dissipators {
        superop += d.superop();
    }
    Ok(LindbladGenerator {
        config: *config,
        hamiltonian,
        dissipators,
        superop,
    })
}
