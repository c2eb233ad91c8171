//! Physical parameters, thermal occupations and configuration checks.
//!
//! Units: ħ = k_B = 1 and the decay rate of the |2⟩→|1⟩ transition sets the
//! scale, so every frequency, rate and temperature is a plain `f64` measured
//! in units of γ₂₁. Temperatures are the k_B·T energies directly.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hermiticity tolerance on `‖ρ − ρ†‖_max`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Unit-trace tolerance.
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue allowed for a physical state.
pub const PSD_TOL: f64 = 1e-10;

/// Secular-approximation warning fires when the cross-set frequency gap is
/// below this multiple of the largest rate.
pub const SECULAR_GAP_FACTOR: f64 = 10.0;
/// Weak-coupling warning fires when a rate exceeds this fraction of its
/// transition frequency.
pub const WEAK_COUPLING_FRACTION: f64 = 0.1;

/// The two waveguides acting as thermal reservoirs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reservoir {
    One,
    Two,
}

impl Reservoir {
    pub const ALL: [Reservoir; 2] = [Reservoir::One, Reservoir::Two];

    pub fn index(self) -> usize {
        match self {
            Reservoir::One => 0,
            Reservoir::Two => 1,
        }
    }
}

/// One of the four reservoir-coupled atomic transitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TransitionId {
    T21,
    T31,
    T42,
    T43,
}

impl TransitionId {
    pub const ALL: [TransitionId; 4] = [
        TransitionId::T21,
        TransitionId::T31,
        TransitionId::T42,
        TransitionId::T43,
    ];

    /// Position in `SystemConfig::gamma`.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Zero-based index of the upper level.
    pub fn upper(self) -> usize {
        match self {
            TransitionId::T21 => 1,
            TransitionId::T31 => 2,
            TransitionId::T42 | TransitionId::T43 => 3,
        }
    }

    /// Zero-based index of the lower level.
    pub fn lower(self) -> usize {
        match self {
            TransitionId::T21 | TransitionId::T31 => 0,
            TransitionId::T42 => 1,
            TransitionId::T43 => 2,
        }
    }

    /// Transitions |2⟩↔|1⟩ and |4⟩↔|3⟩ see waveguide 1; |3⟩↔|1⟩ and
    /// |4⟩↔|2⟩ see waveguide 2.
    pub fn reservoir(self) -> Reservoir {
        match self {
            TransitionId::T21 | TransitionId::T43 => Reservoir::One,
            TransitionId::T31 | TransitionId::T42 => Reservoir::Two,
        }
    }

    /// Index into `SystemConfig::rabi` for the laser-driven transitions.
    pub fn laser(self) -> Option<usize> {
        match self {
            TransitionId::T42 => Some(0),
            TransitionId::T43 => Some(1),
            _ => None,
        }
    }
}

impl fmt::Display for TransitionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.upper() + 1, self.lower() + 1)
    }
}

/// Mean photon number `[exp(ω/T) − 1]⁻¹` of a thermal mode.
///
/// `T = 0` maps to exactly zero, as does any ratio large enough that the
/// exponential would overflow.
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Domain(format!(
            "occupation needs a positive finite frequency, got {omega}"
        )));
    }
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::Domain(format!(
            "temperature must be finite and non-negative, got {temperature}"
        )));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = omega / temperature;
    if x > 700.0 {
        return Ok(0.0);
    }
    Ok(1.0 / x.exp_m1())
}

/// Every physical input of the driven four-level emitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigDocument", into = "ConfigDocument")]
pub struct SystemConfig {
    /// Level frequencies ω₁..ω₄.
    pub omega: [f64; 4],
    /// Decay rates γ₂₁, γ₃₁, γ₄₂, γ₄₃ (see [`TransitionId::index`]).
    pub gamma: [f64; 4],
    /// Rabi frequencies Ω₄₂, Ω₄₃.
    pub rabi: [f64; 2],
    /// Laser frequencies ω_L42, ω_L43.
    pub laser: [f64; 2],
    /// Reservoir temperatures T₁, T₂.
    pub temp: [f64; 2],
}

impl SystemConfig {
    /// Config with both lasers on resonance.
    pub fn resonant(
        omega: [f64; 4],
        gamma: [f64; 4],
        rabi: [f64; 2],
        temp: [f64; 2],
    ) -> Self {
        SystemConfig {
            omega,
            gamma,
            rabi,
            laser: [omega[3] - omega[1], omega[3] - omega[2]],
            temp,
        }
    }

    /// ω_lp = ω_l − ω_p.
    pub fn transition_frequency(&self, tr: TransitionId) -> f64 {
        self.omega[tr.upper()] - self.omega[tr.lower()]
    }

    pub fn gamma_of(&self, tr: TransitionId) -> f64 {
        self.gamma[tr.index()]
    }

    pub fn temperature_of(&self, r: Reservoir) -> f64 {
        self.temp[r.index()]
    }

    /// Thermal occupation seen by `tr`. Undecayed transitions report zero
    /// since their occupation never enters the dynamics.
    pub fn occupation(&self, tr: TransitionId) -> Result<f64> {
        if self.gamma_of(tr) == 0.0 {
            return Ok(0.0);
        }
        bose_occupation(
            self.transition_frequency(tr),
            self.temperature_of(tr.reservoir()),
        )
    }

    pub fn get(&self, field: Field) -> f64 {
        match field {
            Field::Omega(i) => self.omega[i],
            Field::Gamma(tr) => self.gamma[tr.index()],
            Field::Rabi(i) => self.rabi[i],
            Field::Laser(i) => self.laser[i],
            Field::Temp(i) => self.temp[i],
        }
    }

    pub fn set(&mut self, field: Field, value: f64) {
        match field {
            Field::Omega(i) => self.omega[i] = value,
            Field::Gamma(tr) => self.gamma[tr.index()] = value,
            Field::Rabi(i) => self.rabi[i] = value,
            Field::Laser(i) => self.laser[i] = value,
            Field::Temp(i) => self.temp[i] = value,
        }
    }

    pub fn with(mut self, field: Field, value: f64) -> Self {
        self.set(field, value);
        self
    }

    /// Apply a `key=value` override using the config-file field names.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(vec![format!("override '{spec}' is not key=value")]))?;
        let field: Field = key.trim().parse()?;
        let value: f64 = value.trim().parse().map_err(|_| {
            Error::InvalidConfig(vec![format!("override '{spec}' has a non-numeric value")])
        })?;
        self.set(field, value);
        Ok(())
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

/// On-disk form of [`SystemConfig`]. Unknown keys are rejected; missing laser
/// frequencies default to resonance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDocument {
    omega1: f64,
    omega2: f64,
    omega3: f64,
    omega4: f64,
    gamma21: f64,
    gamma31: f64,
    gamma42: f64,
    gamma43: f64,
    rabi42: f64,
    rabi43: f64,
    #[serde(default)]
    laser42: Option<f64>,
    #[serde(default)]
    laser43: Option<f64>,
    temp1: f64,
    temp2: f64,
}

impl From<ConfigDocument> for SystemConfig {
    fn from(d: ConfigDocument) -> Self {
        let omega = [d.omega1, d.omega2, d.omega3, d.omega4];
        SystemConfig {
            omega,
            gamma: [d.gamma21, d.gamma31, d.gamma42, d.gamma43],
            rabi: [d.rabi42, d.rabi43],
            laser: [
                d.laser42.unwrap_or(omega[3] - omega[1]),
                d.laser43.unwrap_or(omega[3] - omega[2]),
            ],
            temp: [d.temp1, d.temp2],
        }
    }
}

impl From<SystemConfig> for ConfigDocument {
    fn from(c: SystemConfig) -> Self {
        ConfigDocument {
            omega1: c.omega[0],
            omega2: c.omega[1],
            omega3: c.omega[2],
            omega4: c.omega[3],
            gamma21: c.gamma[0],
            gamma31: c.gamma[1],
            gamma42: c.gamma[2],
            gamma43: c.gamma[3],
            rabi42: c.rabi[0],
            rabi43: c.rabi[1],
            laser42: Some(c.laser[0]),
            laser43: Some(c.laser[1]),
            temp1: c.temp[0],
            temp2: c.temp[1],
        }
    }
}

/// A scalar field of [`SystemConfig`], addressable by its config-file name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Omega(usize),
    Gamma(TransitionId),
    Rabi(usize),
    Laser(usize),
    Temp(usize),
}

impl Field {
    pub const ALL: [Field; 14] = [
        Field::Omega(0),
        Field::Omega(1),
        Field::Omega(2),
        Field::Omega(3),
        Field::Gamma(TransitionId::T21),
        Field::Gamma(TransitionId::T31),
        Field::Gamma(TransitionId::T42),
        Field::Gamma(TransitionId::T43),
        Field::Rabi(0),
        Field::Rabi(1),
        Field::Laser(0),
        Field::Laser(1),
        Field::Temp(0),
        Field::Temp(1),
    ];

    /// Config-file key.
    pub fn name(self) -> &'static str {
        match self {
            Field::Omega(0) => "omega1",
            Field::Omega(1) => "omega2",
            Field::Omega(2) => "omega3",
            Field::Omega(_) => "omega4",
            Field::Gamma(TransitionId::T21) => "gamma21",
            Field::Gamma(TransitionId::T31) => "gamma31",
            Field::Gamma(TransitionId::T42) => "gamma42",
            Field::Gamma(TransitionId::T43) => "gamma43",
            Field::Rabi(0) => "rabi42",
            Field::Rabi(_) => "rabi43",
            Field::Laser(0) => "laser42",
            Field::Laser(_) => "laser43",
            Field::Temp(0) => "temp1",
            Field::Temp(_) => "temp2",
        }
    }

    /// Column header used in tabular output.
    pub fn label(self) -> &'static str {
        match self {
            Field::Rabi(0) => "Omega42",
            Field::Rabi(_) => "Omega43",
            Field::Temp(0) => "T1",
            Field::Temp(_) => "T2",
            other => other.name(),
        }
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Field::ALL
            .into_iter()
            .find(|f| f.name() == s || f.label() == s)
            .ok_or_else(|| Error::UnknownField(s.to_string()))
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Field {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// A driven transition sits too close in frequency to a thermal one.
    Secular { gap: f64, threshold: f64 },
    /// A rate is not small against its transition frequency.
    WeakCoupling { parameter: String, ratio: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::Secular { gap, threshold } => write!(
                f,
                "secular approximation questionable: cross-set gap {gap} < {threshold}"
            ),
            Warning::WeakCoupling { parameter, ratio } => write!(
                f,
                "weak coupling questionable: {parameter} is {ratio:.3} of its transition frequency"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationStatus {
    Ok,
    Warnings,
    Fatal,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub fatal: Vec<String>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn status(&self) -> ValidationStatus {
        if !self.fatal.is_empty() {
            ValidationStatus::Fatal
        } else if !self.warnings.is_empty() {
            ValidationStatus::Warnings
        } else {
            ValidationStatus::Ok
        }
    }

    pub fn is_fatal(&self) -> bool {
        !self.fatal.is_empty()
    }

    pub fn only_secular_warnings(&self) -> bool {
        !self.is_fatal()
            && self
                .warnings
                .iter()
                .all(|w| matches!(w, Warning::Secular { .. }))
    }

    /// `Err` carrying the fatal messages, if any.
    pub fn into_result(self) -> Result<Vec<Warning>> {
        if self.fatal.is_empty() {
            Ok(self.warnings)
        } else {
            Err(Error::InvalidConfig(self.fatal))
        }
    }
}

pub fn validate(config: &SystemConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let fatal = &mut report.fatal;

    for field in Field::ALL {
        let v = config.get(field);
        if !v.is_finite() {
            fatal.push(format!("{field} is not finite ({v})"));
        }
    }
    for tr in TransitionId::ALL {
        if config.gamma_of(tr) < 0.0 {
            fatal.push(format!("gamma{tr} is negative"));
        }
    }
    for (i, name) in ["rabi42", "rabi43"].iter().enumerate() {
        if config.rabi[i] < 0.0 {
            fatal.push(format!("{name} is negative"));
        }
    }
    for (i, name) in ["temp1", "temp2"].iter().enumerate() {
        if config.temp[i] < 0.0 {
            fatal.push(format!("{name} is negative"));
        }
    }
    for tr in TransitionId::ALL {
        let w = config.transition_frequency(tr);
        let decays = config.gamma_of(tr) > 0.0;
        let driven = tr.laser().is_some_and(|i| config.rabi[i] > 0.0);
        if (decays || driven) && !(w > 0.0) {
            fatal.push(format!(
                "transition {tr} is coupled but its frequency {w} is not positive"
            ));
        }
    }
    if report.is_fatal() {
        return report;
    }

    let max_rate = config
        .gamma
        .iter()
        .chain(config.rabi.iter())
        .fold(0.0_f64, |m, &x| m.max(x));
    let driven = [
        config.transition_frequency(TransitionId::T43),
        config.transition_frequency(TransitionId::T42),
    ];
    let thermal = [
        config.transition_frequency(TransitionId::T21),
        config.transition_frequency(TransitionId::T31),
    ];
    let gap = driven
        .iter()
        .flat_map(|a| thermal.iter().map(move |b| (a - b).abs()))
        .fold(f64::INFINITY, f64::min);
    let threshold = SECULAR_GAP_FACTOR * max_rate;
    if gap < threshold {
        report.warnings.push(Warning::Secular { gap, threshold });
    }

    for tr in TransitionId::ALL {
        let w = config.transition_frequency(tr);
        if w <= 0.0 {
            continue;
        }
        let g = config.gamma_of(tr);
        if g > WEAK_COUPLING_FRACTION * w {
            report.warnings.push(Warning::WeakCoupling {
                parameter: format!("gamma{tr}"),
                ratio: g / w,
            });
        }
        if let Some(i) = tr.laser() {
            let r = config.rabi[i];
            if r > WEAK_COUPLING_FRACTION * w {
                report.warnings.push(Warning::WeakCoupling {
                    parameter: format!("rabi{tr}"),
                    ratio: r / w,
                });
            }
        }
    }
    report
}

/// 4×4 atomic density matrix in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Matrix4<C64>);

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(rho: Matrix4<C64>) -> Result<Self> {
        let herm = hermiticity_error(&rho);
        if !(herm < HERMITIAN_TOL) {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max deviation {herm:.3e})"
            )));
        }
        let tr = rho.trace();
        if !((tr.re - 1.0).abs() < TRACE_TOL) || !(tr.im.abs() < TRACE_TOL) {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let min = min_eigenvalue(&rho);
        if !(min >= -PSD_TOL) {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {min:.3e})"
            )));
        }
        Ok(DensityMatrix(rho))
    }

    /// Pure basis state |level⟩⟨level| (zero-based).
    pub fn basis(level: usize) -> Self {
        let mut m = Matrix4::zeros();
        m[(level, level)] = C64::new(1.0, 0.0);
        DensityMatrix(m)
    }

    pub fn ground() -> Self {
        Self::basis(0)
    }

    /// Diagonal state from populations summing to one.
    pub fn diagonal(populations: [f64; 4]) -> Result<Self> {
        let mut m = Matrix4::zeros();
        for (j, p) in populations.into_iter().enumerate() {
            m[(j, j)] = C64::new(p, 0.0);
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix4<C64> {
        self.0
    }

    /// Element ρ_{jk}, zero-based.
    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.0[(j, k)]
    }

    pub fn populations(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|j| self.0[(j, j)].re)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.0)
    }
}

pub(crate) fn hermiticity_error(m: &Matrix4<C64>) -> f64 {
    (m - m.adjoint()).iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn min_eigenvalue(m: &Matrix4<C64>) -> f64 {
    let h = (m + m.adjoint()).scale(0.5);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}
