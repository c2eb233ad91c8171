//! The closed element-wise equations for the populations and the three
//! coherences ρ₄₂, ρ₄₃, ρ₃₂ that feed back on them.
//!
//! The remaining coherences (ρ₂₁, ρ₃₁, ρ₄₁ and conjugates) form their own
//! invariant block and never source the tracked elements.

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{DensityMatrix, SystemConfig, TransitionId, TRACE_TOL};

const I: C64 = C64::new(0.0, 1.0);

/// Tracked density-matrix elements, or their time derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReducedState {
    /// ρ₁₁..ρ₄₄.
    pub populations: [f64; 4],
    pub rho42: C64,
    pub rho43: C64,
    pub rho32: C64,
}

/// Number of real coordinates in a [`ReducedState`].
pub const REDUCED_DIM: usize = 10;

impl ReducedState {
    pub fn ground() -> Self {
        ReducedState {
            populations: [1.0, 0.0, 0.0, 0.0],
            ..Default::default()
        }
    }

    pub fn trace(&self) -> f64 {
        self.populations.iter().sum()
    }

    /// Real coordinates `(ρ₁₁, ρ₂₂, ρ₃₃, ρ₄₄, Re ρ₄₂, Im ρ₄₂, Re ρ₄₃, Im ρ₄₃, Re ρ₃₂, Im ρ₃₂)`.
    pub fn to_real(&self) -> [f64; REDUCED_DIM] {
        let [p1, p2, p3, p4] = self.populations;
        [
            p1,
            p2,
            p3,
            p4,
            self.rho42.re,
            self.rho42.im,
            self.rho43.re,
            self.rho43.im,
            self.rho32.re,
            self.rho32.im,
        ]
    }

    pub fn from_real(x: &[f64; REDUCED_DIM]) -> Self {
        ReducedState {
            populations: [x[0], x[1], x[2], x[3]],
            rho42: C64::new(x[4], x[5]),
            rho43: C64::new(x[6], x[7]),
            rho32: C64::new(x[8], x[9]),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_real()
            .iter()
            .zip(other.to_real().iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Embed as a full matrix with untracked coherences zero. No state checks,
/// so derivatives can be embedded too.
pub fn embed_matrix(s: &ReducedState) -> Matrix4<C64> {
    let mut m = Matrix4::zeros();
    for (j, p) in s.populations.iter().enumerate() {
        m[(j, j)] = C64::from(*p);
    }
    m[(3, 1)] = s.rho42;
    m[(1, 3)] = s.rho42.conj();
    m[(3, 2)] = s.rho43;
    m[(2, 3)] = s.rho43.conj();
    m[(2, 1)] = s.rho32;
    m[(1, 2)] = s.rho32.conj();
    m
}

/// Embed a state. Fails unless the populations sum to one and the result is
/// a valid density matrix.
pub fn embed(s: &ReducedState) -> Result<DensityMatrix> {
    let tr = s.trace();
    if !((tr - 1.0).abs() < TRACE_TOL) {
        return Err(Error::InvalidState(format!(
            "populations sum to {tr}, not 1"
        )));
    }
    DensityMatrix::new(embed_matrix(s))
}

pub fn project(rho: &Matrix4<C64>) -> ReducedState {
    ReducedState {
        populations: [0, 1, 2, 3].map(|j| rho[(j, j)].re),
        rho42: rho[(3, 1)],
        rho43: rho[(3, 2)],
        rho32: rho[(2, 1)],
    }
}

/// Precomputed coefficients of the element-wise equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedGenerator {
    gamma: [f64; 4],
    n: [f64; 4],
    /// β⁺ per transition.
    bp: [f64; 4],
    /// β⁻ per transition.
    bm: [f64; 4],
    rabi42: f64,
    rabi43: f64,
    detuning42: f64,
    detuning43: f64,
    detuning32: f64,
}

impl ReducedGenerator {
    pub fn new(config: &SystemConfig) -> Result<Self> {
        let mut n = [0.0; 4];
        for tr in TransitionId::ALL {
            n[tr.index()] = config.occupation(tr)?;
        }
        let gamma = config.gamma;
        let w = |tr| config.transition_frequency(tr);
        let [l42, l43] = config.laser;
        Ok(ReducedGenerator {
            gamma,
            n,
            bp: [0, 1, 2, 3].map(|i| (n[i] + 1.0) * gamma[i]),
            bm: [0, 1, 2, 3].map(|i| n[i] * gamma[i]),
            rabi42: config.rabi[0],
            rabi43: config.rabi[1],
            detuning42: w(TransitionId::T42) - l42,
            detuning43: w(TransitionId::T43) - l43,
            detuning32: (config.omega[2] - config.omega[1]) - (l42 - l43),
        })
    }

    /// Net thermal decay Γ_{lp} = γ[(n+1)ρ_ll − n ρ_pp].
    pub fn net_decay(&self, tr: TransitionId, s: &ReducedState) -> f64 {
        let i = tr.index();
        let p = &s.populations;
        self.gamma[i] * ((self.n[i] + 1.0) * p[tr.upper()] - self.n[i] * p[tr.lower()])
    }

    /// Net laser-induced transition Υ = iΩ(ρ_{lp} − ρ_{pl}) for the two
    /// driven transitions, `[Υ₄₂, Υ₄₃]`.
    pub fn net_drive(&self, s: &ReducedState) -> [f64; 2] {
        let u42 = I * self.rabi42 * (s.rho42 - s.rho42.conj());
        let u43 = I * self.rabi43 * (s.rho43 - s.rho43.conj());
        [u42.re, u43.re]
    }

    pub fn rhs(&self, s: &ReducedState) -> ReducedState {
        use TransitionId::*;
        let g21 = self.net_decay(T21, s);
        let g31 = self.net_decay(T31, s);
        let g42 = self.net_decay(T42, s);
        let g43 = self.net_decay(T43, s);
        let [u42, u43] = self.net_drive(s);
        let [_, p2, p3, p4] = s.populations;
        let (bp, bm) = (&self.bp, &self.bm);
        let (i21, i31, i42, i43) = (T21.index(), T31.index(), T42.index(), T43.index());

        // α_{jj'} = iΩ(ρ_jj − ρ_j'j'), η_{jj'j''} = iΩ_{jj'} ρ_{j'j''}
        let alpha42 = I * self.rabi42 * (p4 - p2);
        let alpha43 = I * self.rabi43 * (p4 - p3);
        let eta432 = I * self.rabi43 * s.rho32;
        let eta423 = I * self.rabi42 * s.rho32.conj();
        let eta243 = I * self.rabi42 * s.rho43;
        let eta342 = I * self.rabi43 * s.rho42;

        let d42 = -I * self.detuning42 * s.rho42 + alpha42 - eta432
            - s.rho42 * ((bp[i42] + bm[i42] + bp[i43] + bp[i21]) / 2.0);
        let d43 = -I * self.detuning43 * s.rho43 + alpha43 - eta423
            - s.rho43 * ((bp[i43] + bm[i43] + bp[i42] + bp[i31]) / 2.0);
        let d32 = -I * self.detuning32 * s.rho32 - eta243.conj() - eta342
            - s.rho32 * ((bp[i31] + bp[i21] + bm[i43] + bm[i42]) / 2.0);

        ReducedState {
            populations: [
                g21 + g31,
                g42 - g21 - u42,
                g43 - g31 - u43,
                -g43 - g42 + u42 + u43,
            ],
            rho42: d42,
            rho43: d43,
            rho32: d32,
        }
    }
}

/// Time derivative of the tracked elements.
pub fn reduced_rhs(config: &SystemConfig, state: &ReducedState) -> Result<ReducedState> {
    Ok(ReducedGenerator::new(config)?.rhs(state))
}
