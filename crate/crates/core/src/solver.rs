//! Steady states and time evolution of the rotating-frame generator.

use nalgebra::{Matrix4, SMatrix, SVector, Schur};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generator::{
    embed_matrix, reduced::REDUCED_DIM, unvectorize, vec_index, vectorize, LindbladGenerator,
    ReducedGenerator, ReducedState, Superop, SuperVec,
};
use crate::model::DensityMatrix;

/// Condition number above which the bordered linear system is abandoned in
/// favour of the null-space route.
pub const MAX_CONDITION: f64 = 1e12;
/// Relative size of the second-smallest singular value below which the
/// steady state is declared non-unique.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Residual bound relative to `max(1, ‖L‖₂)`.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Bordered linear solve with the trace row.
    Linear,
    /// Smallest right singular vector of the superoperator.
    Nullspace,
    /// Long-time integration.
    Evolved,
    /// Bordered solve of the seven-element reduced system.
    Reduced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateReport {
    pub rho: DensityMatrix,
    /// ‖L · vec(ρ)‖₂.
    pub residual: f64,
    pub method: Method,
    /// Smallest and second-smallest singular values of L.
    pub singular_values: [f64; 2],
    /// Largest singular value of L.
    pub spectral_norm: f64,
}

impl SteadyStateReport {
    pub fn residual_bound(&self) -> f64 {
        RESIDUAL_TOL * self.spectral_norm.max(1.0)
    }
}

struct Spectrum {
    smallest: f64,
    second: f64,
    largest: f64,
}

fn spectrum(l: &Superop) -> Spectrum {
    let mut sv: Vec<f64> = l.singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    Spectrum {
        smallest: sv[0],
        second: sv[1],
        largest: sv[sv.len() - 1],
    }
}

fn check_unique(s: &Spectrum) -> Result<()> {
    if s.second < DEGENERACY_TOL * s.largest.max(1.0) {
        return Err(Error::MultipleSteadyStates {
            smallest: s.smallest,
            second: s.second,
        });
    }
    Ok(())
}

/// Hermitize and renormalize once, then insist the result is physical and
/// actually stationary.
fn finish(gen: &LindbladGenerator, raw: Matrix4<C64>, method: Method, s: &Spectrum) -> Result<SteadyStateReport> {
    let herm = (raw + raw.adjoint()).scale(0.5);
    let tr = herm.trace().re;
    if !(tr.abs() > 0.0) || !tr.is_finite() {
        return Err(Error::InvalidState(format!("solution has trace {tr}")));
    }
    let rho = DensityMatrix::new(herm.unscale(tr))?;
    let residual = (gen.superop() * vectorize(rho.matrix())).norm();
    let report = SteadyStateReport {
        rho,
        residual,
        method,
        singular_values: [s.smallest, s.second],
        spectral_norm: s.largest,
    };
    if !(residual < report.residual_bound()) {
        return Err(Error::Residual {
            residual,
            bound: report.residual_bound(),
        });
    }
    Ok(report)
}

/// Steady state by a bordered linear solve, falling back to the null-space
/// route when the bordered system is ill-conditioned.
pub fn steady_state(gen: &LindbladGenerator) -> Result<SteadyStateReport> {
    let l = gen.superop();
    let s = spectrum(l);
    check_unique(&s)?;

    // replace the row whose diagonal is smallest in magnitude
    let row = (0..16)
        .min_by(|&a, &b| l[(a, a)].norm().total_cmp(&l[(b, b)].norm()))
        .unwrap_or(0);
    let mut a = *l;
    for c in 0..16 {
        a[(row, c)] = C64::from(0.0);
    }
    for j in 0..4 {
        a[(row, vec_index(j, j))] = C64::from(1.0);
    }
    let mut b = SuperVec::zeros();
    b[row] = C64::from(1.0);

    let sa = spectrum(&a);
    let cond = sa.largest / sa.smallest;
    if !(cond <= MAX_CONDITION) {
        return steady_state_nullspace(gen);
    }
    match a.lu().solve(&b) {
        Some(x) => finish(gen, unvectorize(&x), Method::Linear, &s),
        None => steady_state_nullspace(gen),
    }
}

/// Steady state from the right singular vector of the smallest singular
/// value of L, rescaled to unit trace.
pub fn steady_state_nullspace(gen: &LindbladGenerator) -> Result<SteadyStateReport> {
    let l = gen.superop();
    let s = spectrum(l);
    check_unique(&s)?;
    let svd = l.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::Eigen)?;
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    // rows of v_t are conjugated right singular vectors
    let v = SuperVec::from_fn(|i, _| v_t[(k, i)].conj());
    let raw = unvectorize(&v);
    let tr = raw.trace();
    if tr.norm() < 1e-300 {
        return Err(Error::InvalidState("null vector is traceless".into()));
    }
    finish(gen, raw / tr, Method::Nullspace, &s)
}

/// Steady state of the reduced element-wise system, assembled column by
/// column from its right-hand side and bordered with the trace condition.
/// The residual is still checked against the full generator.
pub fn steady_state_reduced(gen: &LindbladGenerator) -> Result<SteadyStateReport> {
    let s = spectrum(gen.superop());
    check_unique(&s)?;
    let rg = ReducedGenerator::new(gen.config())?;
    let mut m = SMatrix::<f64, REDUCED_DIM, REDUCED_DIM>::zeros();
    for c in 0..REDUCED_DIM {
        let mut x = [0.0; REDUCED_DIM];
        x[c] = 1.0;
        let col = rg.rhs(&ReducedState::from_real(&x)).to_real();
        for (r, v) in col.iter().enumerate() {
            m[(r, c)] = *v;
        }
    }
    // populations sum to a conserved quantity, so the ρ₁₁ row is redundant
    let row = (0..4)
        .min_by(|&a, &b| m[(a, a)].abs().total_cmp(&m[(b, b)].abs()))
        .unwrap_or(0);
    for c in 0..REDUCED_DIM {
        m[(row, c)] = if c < 4 { 1.0 } else { 0.0 };
    }
    let mut b = SVector::<f64, REDUCED_DIM>::zeros();
    b[row] = 1.0;
    let x = m.lu().solve(&b).ok_or_else(|| {
        Error::InvalidState("reduced system is singular".into())
    })?;
    let state = ReducedState::from_real(&std::array::from_fn(|i| x[i]));
    finish(gen, embed_matrix(&state), Method::Reduced, &s)
}

/// Step control for [`evolve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveOptions {
    /// End time in units of 1/γ₂₁. `None` picks `20 / relaxation_scale`.
    pub t_final: Option<f64>,
    /// Largest step tried first; capped at `1/‖L‖₂`.
    pub initial_step: f64,
    /// Relative endpoint change at which step halving stops.
    pub rtol: f64,
    /// Required ‖ρ̇‖₂ at the endpoint; `None` accepts any endpoint.
    pub convergence: Option<f64>,
    /// Number of stored trajectory samples, including both ends.
    pub samples: usize,
    pub max_halvings: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            t_final: None,
            initial_step: 0.05,
            rtol: 1e-10,
            convergence: Some(1e-9),
            samples: 201,
            max_halvings: 12,
        }
    }
}

impl EvolveOptions {
    fn check(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Domain(format!("evolve options: {what}")));
        if let Some(t) = self.t_final {
            if !(t > 0.0 && t.is_finite()) {
                return bad("t_final must be positive");
            }
        }
        if !(self.initial_step > 0.0) || !(self.rtol > 0.0) {
            return bad("step and tolerance must be positive");
        }
        if let Some(c) = self.convergence {
            if !(c > 0.0) {
                return bad("convergence threshold must be positive");
            }
        }
        if self.samples < 2 {
            return bad("need at least two samples");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Matrix4<C64>>,
    pub final_state: DensityMatrix,
    /// Step size of the accepted run.
    pub step: f64,
    /// ‖L · vec(ρ(t_final))‖₂.
    pub derivative_norm: f64,
}

fn rk4_run(l: &Superop, rho0: &SuperVec, h: f64, steps_per_sample: usize, samples: usize) -> Vec<SuperVec> {
    let mut out = Vec::with_capacity(samples);
    let mut x = *rho0;
    out.push(x);
    let half = h / 2.0;
    for _ in 1..samples {
        for _ in 0..steps_per_sample {
            let k1 = l * x;
            let k2 = l * (x + k1 * C64::from(half));
            let k3 = l * (x + k2 * C64::from(half));
            let k4 = l * (x + k3 * C64::from(h));
            x += (k1 + (k2 + k3) * C64::from(2.0) + k4) * C64::from(h / 6.0);
        }
        out.push(x);
    }
    out
}

/// Classical fixed-step RK4, with the step halved until the endpoint stops
/// changing to within `rtol`.
pub fn evolve(gen: &LindbladGenerator, rho0: &DensityMatrix, opts: &EvolveOptions) -> Result<Trajectory> {
    opts.check()?;
    let l = gen.superop();
    let t_final = match opts.t_final {
        Some(t) => t,
        None => 20.0 / relaxation_scale(gen)?,
    };
    let intervals = opts.samples - 1;
    let h_max = opts.initial_step.min(1.0 / gen.spectral_norm().max(1e-300));
    let mut per_sample = ((t_final / intervals as f64) / h_max).ceil().max(1.0) as usize;
    let x0 = vectorize(rho0.matrix());

    let mut h = t_final / (intervals * per_sample) as f64;
    let mut run = rk4_run(l, &x0, h, per_sample, opts.samples);
    let mut converged = false;
    for _ in 0..opts.max_halvings {
        let finer_h = h / 2.0;
        let finer = rk4_run(l, &x0, finer_h, per_sample * 2, opts.samples);
        let (a, b) = (run[intervals], finer[intervals]);
        let change = (a - b).camax();
        let scale = b.camax().max(1.0);
        run = finer;
        h = finer_h;
        per_sample *= 2;
        if change <= opts.rtol * scale {
            converged = true;
            break;
        }
    }
    let end = run[intervals];
    let derivative_norm = (l * end).norm();
    if !converged {
        return Err(Error::NotConverged {
            reason: format!("endpoint still changing after {} halvings", opts.max_halvings),
            derivative_norm,
        });
    }
    if let Some(tol) = opts.convergence {
        if !(derivative_norm < tol) {
            return Err(Error::NotConverged {
                reason: format!("not stationary by t = {t_final}"),
                derivative_norm,
            });
        }
    }
    let final_state = DensityMatrix::new(unvectorize(&end))?;
    Ok(Trajectory {
        times: (0..opts.samples)
            .map(|k| t_final * k as f64 / intervals as f64)
            .collect(),
        states: run.iter().map(unvectorize).collect(),
        final_state,
        step: h,
        derivative_norm,
    })
}

/// Steady state by integrating from the ground state. The horizon is
/// extended up to eight times until ‖ρ̇‖ meets the residual bound.
pub fn steady_state_evolved(gen: &LindbladGenerator, opts: &EvolveOptions) -> Result<SteadyStateReport> {
    let s = spectrum(gen.superop());
    check_unique(&s)?;
    let bound = RESIDUAL_TOL * s.largest.max(1.0);
    let mut o = EvolveOptions {
        convergence: None,
        samples: 2,
        ..*opts
    };
    if o.t_final.is_none() {
        o.t_final = Some(20.0 / relaxation_scale(gen)?);
    }
    let mut rho = DensityMatrix::ground();
    let mut last = f64::INFINITY;
    for _ in 0..8 {
        let traj = evolve(gen, &rho, &o)?;
        rho = traj.final_state;
        last = traj.derivative_norm;
        if last < 0.5 * bound {
            return finish(gen, *rho.matrix(), Method::Evolved, &s);
        }
    }
    Err(Error::NotConverged {
        reason: "steady state not reached".into(),
        derivative_norm: last,
    })
}

/// Eigenvalues of the superoperator.
pub fn eigenvalues(gen: &LindbladGenerator) -> Result<Vec<C64>> {
    let schur = Schur::try_new(*gen.superop(), 1e-15, 10_000).ok_or(Error::Eigen)?;
    let (_, t) = schur.unpack();
    Ok((0..16).map(|i| t[(i, i)]).collect())
}

/// Slowest nonzero decay rate: the minimum of `|Re λ|` over eigenvalues of L
/// with non-negligible real part.
pub fn relaxation_scale(gen: &LindbladGenerator) -> Result<f64> {
    let cutoff = 1e-9 * gen.spectral_norm().max(1.0);
    eigenvalues(gen)?
        .into_iter()
        .map(|z| z.re.abs())
        .filter(|r| *r > cutoff)
        .min_by(f64::total_cmp)
        .ok_or(Error::NoDissipation)
}
