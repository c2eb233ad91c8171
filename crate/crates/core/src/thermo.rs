//! Heat currents, laser power flows and derived thermodynamic figures.
//!
//! Sign conventions: `*_in` quantities flow into the atom; the reported
//! `j_w` and `j_l` are the flows *into* each reservoir and laser beam, so
//! `J_Wm = −J_Wm^in` and `J_Lm = −J_Lm^in`. Beam 1 drives |4⟩↔|2⟩ (Ω₄₂),
//! beam 2 drives |4⟩↔|3⟩ (Ω₄₃). All currents are evaluated with the lab-frame
//! `H_A` against the rotating-frame state.

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generator::{
    atomic_hamiltonian, build_generator, project, sigma, Dissipator, ReducedGenerator,
};
use crate::model::{DensityMatrix, Reservoir, SystemConfig, TransitionId};
use crate::solver::{steady_state, SteadyStateReport};

/// Relative tolerance for the trace-formula vs closed-form comparison.
pub const ROUTE_TOL: f64 = 1e-10;
/// Power threshold for flagging engine operation.
pub const ENGINE_POWER_MIN: f64 = 1e-12;
/// Smallest laser-flow change accepted by [`amplification_factors`].
pub const MIN_LASER_DELTA: f64 = 1e-14;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurrentsReport {
    /// Heat current into reservoir 1 and 2.
    pub j_w: [f64; 2],
    /// Energy flow into laser beam 1 (Ω₄₂) and 2 (Ω₄₃).
    pub j_l: [f64; 2],
    /// Σ_m (J_Wm + J_Lm); zero at a steady state.
    pub j_total: f64,
    /// ω_lp Γ_lp per transition, in [`TransitionId::index`] order.
    pub transition_flows: [f64; 4],
}

impl CurrentsReport {
    pub fn j_w1(&self) -> f64 {
        self.j_w[0]
    }

    pub fn j_w2(&self) -> f64 {
        self.j_w[1]
    }

    /// Total flow into both lasers, J_L1 + J_L2.
    pub fn j_l_out(&self) -> f64 {
        self.j_l[0] + self.j_l[1]
    }

    /// Total flow out of both lasers into the atom.
    pub fn j_l_in(&self) -> f64 {
        -self.j_l_out()
    }

    /// `|J_total|` relative to `max(|J_W1|, |J_W2|, |J_L1|, |J_L2|, 1)`.
    pub fn balance_error(&self) -> f64 {
        let scale = self
            .j_w
            .iter()
            .chain(self.j_l.iter())
            .fold(1.0_f64, |m, x| m.max(x.abs()));
        self.j_total.abs() / scale
    }

    /// `Σ_m J_Wm / T_m`; `None` unless both temperatures are positive.
    pub fn entropy_production(&self, config: &SystemConfig) -> Option<f64> {
        let [t1, t2] = config.temp;
        (t1 > 0.0 && t2 > 0.0).then(|| self.j_w[0] / t1 + self.j_w[1] / t2)
    }
}

fn check_route(quantity: &'static str, trace: f64, closed: f64) -> Result<()> {
    if (trace - closed).abs() > ROUTE_TOL * trace.abs().max(closed.abs()).max(1.0) {
        return Err(Error::RouteMismatch {
            quantity,
            trace,
            closed,
        });
    }
    Ok(())
}

/// Heat and laser flows for a state, computed both from the trace formulas
/// and from the closed forms `−Σ ω_lp Γ_lp`, `ω_lp Υ_lp`; the two must agree.
pub fn heat_currents(config: &SystemConfig, rho: &DensityMatrix) -> Result<CurrentsReport> {
    let ha = atomic_hamiltonian(config);
    let r = rho.matrix();

    // trace route
    let mut w_in_trace = [0.0; 2];
    for tr in TransitionId::ALL {
        let d = Dissipator::new(config, tr)?;
        w_in_trace[tr.reservoir().index()] += (ha * d.apply(r)).trace().re;
    }
    let laser_in_trace = |j: usize, omega: f64| -> f64 {
        let v: Matrix4<C64> = (sigma(3, j) + sigma(j, 3)).scale(omega);
        (-I * (ha * (v * r - r * v)).trace()).re
    };
    let l_in_trace = [
        laser_in_trace(1, config.rabi[0]),
        laser_in_trace(2, config.rabi[1]),
    ];

    // closed-form route
    let rg = ReducedGenerator::new(config)?;
    let s = project(r);
    let mut flows = [0.0; 4];
    let mut w_in_closed = [0.0; 2];
    for tr in TransitionId::ALL {
        let f = config.transition_frequency(tr) * rg.net_decay(tr, &s);
        flows[tr.index()] = f;
        w_in_closed[tr.reservoir().index()] -= f;
    }
    let [u42, u43] = rg.net_drive(&s);
    let l_in_closed = [
        config.transition_frequency(TransitionId::T42) * u42,
        config.transition_frequency(TransitionId::T43) * u43,
    ];

    check_route("J_W1", w_in_trace[0], w_in_closed[0])?;
    check_route("J_W2", w_in_trace[1], w_in_closed[1])?;
    check_route("J_L1", l_in_trace[0], l_in_closed[0])?;
    check_route("J_L2", l_in_trace[1], l_in_closed[1])?;

    let j_w = w_in_trace.map(|x| -x);
    let j_l = l_in_trace.map(|x| -x);
    Ok(CurrentsReport {
        j_w,
        j_l,
        j_total: j_w[0] + j_w[1] + j_l[0] + j_l[1],
        transition_flows: flows,
    })
}

/// Temperature reproducing the ρ₁₁/ρ₃₃ ratio of the {|1⟩, |3⟩} pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum EffectiveTemperature {
    Finite(f64),
    /// ρ₁₁ = ρ₃₃.
    Infinite,
    /// Population inversion, ρ₃₃ > ρ₁₁.
    Negative(f64),
    /// ρ₃₃ = 0.
    Zero,
}

impl EffectiveTemperature {
    /// Signed numeric value; `inf` and `0` for the limiting cases.
    pub fn value(&self) -> f64 {
        match *self {
            EffectiveTemperature::Finite(t) | EffectiveTemperature::Negative(t) => t,
            EffectiveTemperature::Infinite => f64::INFINITY,
            EffectiveTemperature::Zero => 0.0,
        }
    }
}

pub fn effective_temperature(config: &SystemConfig, rho: &DensityMatrix) -> Result<EffectiveTemperature> {
    let p11 = rho.get(0, 0).re;
    let p33 = rho.get(2, 2).re;
    if p33 <= 0.0 {
        return Ok(EffectiveTemperature::Zero);
    }
    if !(p11 > 0.0) {
        return Err(Error::Domain(format!(
            "effective temperature needs rho11 > 0, got {p11}"
        )));
    }
    if p11 == p33 {
        return Ok(EffectiveTemperature::Infinite);
    }
    let t = config.transition_frequency(TransitionId::T31) / (p11 / p33).ln();
    Ok(if t < 0.0 {
        EffectiveTemperature::Negative(t)
    } else {
        EffectiveTemperature::Finite(t)
    })
}

/// Which Rabi frequency is varied for the amplification factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Knob {
    Rabi42,
    Rabi43,
}

impl Knob {
    fn index(self) -> usize {
        match self {
            Knob::Rabi42 => 0,
            Knob::Rabi43 => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Amplification {
    /// ∂J_W1/∂J_L and ∂J_W2/∂J_L, signed, with J_L the total laser inflow.
    pub alpha: [f64; 2],
    /// Rabi-frequency step used.
    pub delta: f64,
    /// J_L(Ω+δ) − J_L(Ω−δ).
    pub delta_laser: f64,
}

/// Default central-difference step `max(1e−4, 1e−3 Ω)`.
pub fn default_rabi_step(rabi: f64) -> f64 {
    (1e-3 * rabi).max(1e-4)
}

fn currents_at(config: &SystemConfig) -> Result<CurrentsReport> {
    let ss = steady_state(&build_generator(config)?)?;
    heat_currents(config, &ss.rho)
}

/// Central-difference amplification factors `α_m = ΔJ_Wm / ΔJ_L`.
///
/// When Ω < δ the lower point has a negative Rabi frequency, which is the
/// same physics with the phase of the beam flipped.
pub fn amplification_factors(config: &SystemConfig, knob: Knob, step: Option<f64>) -> Result<Amplification> {
    let k = knob.index();
    let delta = step.unwrap_or_else(|| default_rabi_step(config.rabi[k]));
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("rabi step must be positive, got {delta}")));
    }
    let mut hi = *config;
    hi.rabi[k] += delta;
    let mut lo = *config;
    lo.rabi[k] -= delta;

    #[cfg(feature = "parallel")]
    let (a, b) = rayon::join(|| currents_at(&hi), || currents_at(&lo));
    #[cfg(not(feature = "parallel"))]
    let (a, b) = (currents_at(&hi), currents_at(&lo));
    let (a, b) = (a?, b?);

    let delta_laser = a.j_l_in() - b.j_l_in();
    if !(delta_laser.abs() >= MIN_LASER_DELTA) {
        return Err(Error::UndefinedDerivative { delta: delta_laser });
    }
    Ok(Amplification {
        alpha: [
            (a.j_w[0] - b.j_w[0]) / delta_laser,
            (a.j_w[1] - b.j_w[1]) / delta_laser,
        ],
        delta,
        delta_laser,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EngineReport {
    /// Output power P = J_L1 + J_L2.
    pub power: f64,
    /// Heat drawn from reservoirs with outflow, Σ max(0, −J_Wm).
    pub heat_in: f64,
    /// P / heat_in; `None` without heat input.
    pub efficiency: Option<f64>,
    /// 1 − T_cold / T_hot.
    pub carnot: f64,
    pub is_engine: bool,
    /// Reservoir supplying the heat (largest outflow), if any.
    pub hot: Option<Reservoir>,
}

/// Efficiency here is total laser output over heat drawn from the hot
/// side; only its limiting value is fixed by the physics, so this general
/// definition is a convention.
pub fn engine_metrics(config: &SystemConfig, currents: &CurrentsReport) -> Result<EngineReport> {
    let power = currents.j_l_out();
    let heat_in: f64 = currents.j_w.iter().map(|j| (-j).max(0.0)).sum();
    let is_engine = power > ENGINE_POWER_MIN;
    if is_engine && !(heat_in > 0.0) {
        return Err(Error::EngineInconsistent { power });
    }
    let hot = if currents.j_w[0] < 0.0 || currents.j_w[1] < 0.0 {
        Some(if currents.j_w[0] <= currents.j_w[1] {
            Reservoir::One
        } else {
            Reservoir::Two
        })
    } else {
        None
    };
    let [t1, t2] = config.temp;
    let (t_hot, t_cold) = (t1.max(t2), t1.min(t2));
    let carnot = if t_hot > 0.0 { 1.0 - t_cold / t_hot } else { 0.0 };
    Ok(EngineReport {
        power,
        heat_in,
        efficiency: (heat_in > 0.0).then(|| power / heat_in),
        carnot,
        is_engine,
        hot,
    })
}

/// Everything computed for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub steady: SteadyStateReport,
    pub currents: CurrentsReport,
    pub engine: EngineReport,
    pub t_eff: EffectiveTemperature,
}

pub fn analyze(config: &SystemConfig) -> Result<Analysis> {
    let steady = steady_state(&build_generator(config)?)?;
    let currents = heat_currents(config, &steady.rho)?;
    let engine = engine_metrics(config, &currents)?;
    let t_eff = effective_temperature(config, &steady.rho)?;
    Ok(Analysis {
        steady,
        currents,
        engine,
        t_eff,
    })
}
