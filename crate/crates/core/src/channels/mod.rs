//! Noise models acting on the battery and their time evolution.
//!
//! Every channel has a closed-form propagator (used for trajectories and
//! scans). The Markovian channels also expose their jump operators so the
//! vectorized Liouvillian in [`liouvillian`] can serve as an independent
//! numerical oracle.

mod closed_form;
pub mod liouvillian;

pub use closed_form::{
    gadc_bloch_evolve, gadc_ergotropy, nm_amplitude, nm_ergotropy, pauli_ergotropy, qutrit_diagonal_evolve,
    QubitFactors,
};
pub use liouvillian::{build_liouvillian, evolve_spectral, Liouvillian};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ergotropy::{
    bloch_breakdown, ergotropy_breakdown, qubit_ergotropy, qutrit_table_ergotropy, ErgotropyBreakdown,
};
use crate::error::{Error, Result};
use crate::state::{
    bloch_to_density, density_to_bloch, pauli_x, pauli_y, pauli_z, trace_distance, BatteryHamiltonian, BlochVector,
    CMatrix, DensityMatrix, QutritDiagonal,
};

fn check_rate(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::domain(format!(
            "{name} must be a finite non-negative rate, got {v}"
        )));
    }
    Ok(())
}

fn check_hz(h_z: f64) -> Result<()> {
    if !(h_z > 0.0 && h_z.is_finite()) {
        return Err(Error::domain(format!("h_z must be positive, got {h_z}")));
    }
    Ok(())
}

/// Mean boson number of a mode at energy gap `2 h_z` and temperature `t`
/// (units with `k_B = 1`).
pub fn bose_occupation(temperature: f64, h_z: f64) -> Result<f64> {
    if !(temperature >= 0.0) {
        return Err(Error::domain(format!("temperature {temperature} is negative")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / ((2.0 * h_z / temperature).exp_m1()))
}

/// Generalized amplitude damping. Emission rate `γ(1+n)`, absorption `γn`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gadc {
    pub gamma: f64,
    pub n_bose: f64,
    pub h_z: f64,
}

impl Gadc {
    pub fn new(gamma: f64, n_bose: f64, h_z: f64) -> Result<Self> {
        let c = Gadc { gamma, n_bose, h_z };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        check_rate("gamma", self.gamma)?;
        check_rate("n_bose", self.n_bose)?;
        check_hz(self.h_z)
    }

    /// `a = 1 + 2n`.
    pub fn a(&self) -> f64 {
        1.0 + 2.0 * self.n_bose
    }

    pub fn gamma_minus(&self) -> f64 {
        self.gamma * (1.0 + self.n_bose)
    }

    pub fn gamma_plus(&self) -> f64 {
        self.gamma * self.n_bose
    }
}

/// Anisotropic Pauli noise, `γ_x = γ_y = γ_⊥`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pauli {
    pub gamma_perp: f64,
    pub gamma_z: f64,
    pub h_z: f64,
}

impl Pauli {
    pub fn new(gamma_perp: f64, gamma_z: f64, h_z: f64) -> Result<Self> {
        let c = Pauli {
            gamma_perp,
            gamma_z,
            h_z,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        check_rate("gamma_perp", self.gamma_perp)?;
        check_rate("gamma_z", self.gamma_z)?;
        check_hz(self.h_z)
    }
}

/// Zero-temperature amplitude damping of a qutrit, every downward
/// transition at rate `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QutritAdc {
    pub gamma: f64,
    pub h_z: f64,
}

impl QutritAdc {
    pub fn new(gamma: f64, h_z: f64) -> Result<Self> {
        let c = QutritAdc { gamma, h_z };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        check_rate("gamma", self.gamma)?;
        check_hz(self.h_z)
    }
}

/// Qubit coupled to a vacuum bath with a Lorentzian spectral density of
/// width `lambda`, coupling `gamma` and detuning `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonMarkovAdc {
    pub gamma: f64,
    pub lambda: f64,
    pub delta: f64,
    pub h_z: f64,
}

impl NonMarkovAdc {
    pub fn new(gamma: f64, lambda: f64, delta: f64, h_z: f64) -> Result<Self> {
        let c = NonMarkovAdc {
            gamma,
            lambda,
            delta,
            h_z,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::domain(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::domain(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !self.delta.is_finite() {
            return Err(Error::domain("delta must be finite"));
        }
        check_hz(self.h_z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelSpec {
    Gadc(Gadc),
    Pauli(Pauli),
    QutritAdc(QutritAdc),
    NonMarkovAdc(NonMarkovAdc),
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ChannelSpec::Gadc(c) => c.validate(),
            ChannelSpec::Pauli(c) => c.validate(),
            ChannelSpec::QutritAdc(c) => c.validate(),
            ChannelSpec::NonMarkovAdc(c) => c.validate(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChannelSpec::Gadc(_) => "gadc",
            ChannelSpec::Pauli(_) => "pauli",
            ChannelSpec::QutritAdc(_) => "qutrit_adc",
            ChannelSpec::NonMarkovAdc(_) => "non_markov_adc",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ChannelSpec::QutritAdc(_) => 3,
            _ => 2,
        }
    }

    pub fn h_z(&self) -> f64 {
        match self {
            ChannelSpec::Gadc(c) => c.h_z,
            ChannelSpec::Pauli(c) => c.h_z,
            ChannelSpec::QutritAdc(c) => c.h_z,
            ChannelSpec::NonMarkovAdc(c) => c.h_z,
        }
    }

    pub fn is_markovian(&self) -> bool {
        !matches!(self, ChannelSpec::NonMarkovAdc(_))
    }

    pub fn hamiltonian(&self) -> Result<BatteryHamiltonian> {
        BatteryHamiltonian::for_dim(self.dim(), self.h_z())
    }

    /// Jump operators with their rates, in the storage basis (highest level
    /// first). `None` for the non-Markovian channel, which has no
    /// time-independent generator.
    pub fn jump_operators(&self) -> Option<Vec<(CMatrix, f64)>> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let unit = |d: usize, row: usize, col: usize| {
            let mut m = CMatrix::from_element(d, d, zero);
            m[(row, col)] = one;
            m
        };
        match self {
            ChannelSpec::Gadc(c) => Some(vec![(unit(2, 1, 0), c.gamma_minus()), (unit(2, 0, 1), c.gamma_plus())]),
            ChannelSpec::Pauli(c) => Some(vec![
                (pauli_x(), c.gamma_perp),
                (pauli_y(), c.gamma_perp),
                (pauli_z(), c.gamma_z),
            ]),
            ChannelSpec::QutritAdc(c) => Some(vec![
                (unit(3, 1, 0), c.gamma),
                (unit(3, 2, 1), c.gamma),
                (unit(3, 2, 0), c.gamma),
            ]),
            ChannelSpec::NonMarkovAdc(_) => None,
        }
    }

    /// Vectorized generator of a Markovian channel.
    pub fn liouvillian(&self) -> Result<Liouvillian> {
        let jumps = self
            .jump_operators()
            .ok_or_else(|| Error::Model("the non-Markovian channel has no time-independent generator".into()))?;
        build_liouvillian(&self.hamiltonian()?, &jumps)
    }

    /// Slowest relaxation rate of the dynamics (the Liouvillian gap for the
    /// Markovian channels, `λ` for the Lorentzian bath).
    pub fn slowest_rate(&self) -> f64 {
        match self {
            ChannelSpec::Gadc(c) => c.a() * c.gamma / 2.0,
            ChannelSpec::Pauli(c) => (4.0 * c.gamma_perp).min(2.0 * (c.gamma_perp + c.gamma_z)),
            ChannelSpec::QutritAdc(c) => c.gamma / 2.0,
            ChannelSpec::NonMarkovAdc(c) => c.lambda,
        }
    }

    /// Horizon after which the long-time laws fix the ordering of two
    /// curves: `100 / rate` for Markovian channels, `20 / λ` for the
    /// Lorentzian bath.
    pub fn default_horizon(&self) -> Result<f64> {
        let rate = self.slowest_rate();
        if !(rate > 0.0) {
            return Err(Error::Model(
                "channel has no relaxation; a horizon must be given explicitly".into(),
            ));
        }
        Ok(match self {
            ChannelSpec::NonMarkovAdc(c) => 20.0 / c.lambda,
            _ => 100.0 / rate,
        })
    }

    pub fn propagator(&self, rho0: &DensityMatrix) -> Result<Propagator> {
        self.validate()?;
        if rho0.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: rho0.dim(),
            });
        }
        match self {
            ChannelSpec::QutritAdc(c) => Ok(Propagator::Qutrit {
                rho0: rho0.clone(),
                channel: *c,
                diagonal: rho0.max_offdiagonal() == 0.0,
            }),
            _ => Ok(Propagator::Qubit {
                b0: density_to_bloch(rho0)?,
                channel: *self,
            }),
        }
    }

    /// State at time `t` from the closed-form solution.
    pub fn evolve(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        self.propagator(rho0)?.state(t)
    }
}

/// Fixed point of the dynamics: the thermal state for the generalized
/// amplitude damping channel, `I/2` for Pauli noise, the ground level
/// otherwise.
pub fn steady_state(c: &ChannelSpec) -> Result<DensityMatrix> {
    c.validate()?;
    match c {
        ChannelSpec::Gadc(g) => {
            let a = g.a();
            DensityMatrix::diagonal(&[g.n_bose / a, (1.0 + g.n_bose) / a])
        }
        ChannelSpec::Pauli(_) => DensityMatrix::maximally_mixed(2),
        ChannelSpec::QutritAdc(_) => DensityMatrix::diagonal(&[0.0, 0.0, 1.0]),
        ChannelSpec::NonMarkovAdc(_) => DensityMatrix::diagonal(&[0.0, 1.0]),
    }
}

/// Closed-form time evolution of one initial state.
#[derive(Debug, Clone, PartialEq)]
pub enum Propagator {
    Qubit {
        b0: BlochVector,
        channel: ChannelSpec,
    },
    Qutrit {
        rho0: DensityMatrix,
        channel: QutritAdc,
        diagonal: bool,
    },
}

impl Propagator {
    pub fn h_z(&self) -> f64 {
        match self {
            Propagator::Qubit { channel, .. } => channel.h_z(),
            Propagator::Qutrit { channel, .. } => channel.h_z,
        }
    }

    /// Longitudinal magnetization and squared transverse magnetization of
    /// a qubit at time `t`, plus the steady-state `m_z`.
    fn qubit_components(b0: &BlochVector, channel: &ChannelSpec, t: f64) -> (f64, f64, f64) {
        let f = QubitFactors::of(channel, t);
        let dz = f.population * (b0.z - f.z_ss);
        let z = f.z_ss + dz;
        let r2 = f.coherence.norm_sqr() * b0.transverse_sqr();
        (z, r2, dz)
    }

    pub fn state(&self, t: f64) -> Result<DensityMatrix> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("time {t} must be non-negative")));
        }
        match self {
            Propagator::Qubit { b0, channel } => {
                let f = QubitFactors::of(channel, t);
                let z = f.z_ss + f.population * (b0.z - f.z_ss);
                // x − i y picks up the coherence factor
                let w = f.coherence * Complex64::new(b0.x, -b0.y);
                bloch_to_density(clamp_to_ball(BlochVector { x: w.re, y: -w.im, z }))
            }
            Propagator::Qutrit { rho0, channel, .. } => qutrit_state(rho0, channel, t),
        }
    }

    pub fn ergotropy(&self, t: f64) -> f64 {
        match self {
            Propagator::Qubit { b0, channel } => {
                let (z, r2, _) = Self::qubit_components(b0, channel, t);
                qubit_ergotropy(z, r2, channel.h_z())
            }
            Propagator::Qutrit { .. } => self.breakdown(t).total,
        }
    }

    pub fn breakdown(&self, t: f64) -> ErgotropyBreakdown {
        match self {
            Propagator::Qubit { b0, channel } => {
                let (z, r2, _) = Self::qubit_components(b0, channel, t);
                bloch_breakdown(z, r2, channel.h_z())
            }
            Propagator::Qutrit {
                rho0,
                channel,
                diagonal,
            } => {
                if *diagonal {
                    let q = qutrit_diagonal_evolve(&diag_of(rho0), channel, t);
                    let e = qutrit_table_ergotropy(&q, channel.h_z);
                    ErgotropyBreakdown {
                        total: e,
                        incoherent: e,
                        coherent: 0.0,
                    }
                } else {
                    let h = BatteryHamiltonian::qutrit(channel.h_z).expect("validated channel has positive h_z");
                    let rho = qutrit_state(rho0, channel, t).expect("closed form stays physical");
                    ergotropy_breakdown(&rho, &h).expect("dimensions agree")
                }
            }
        }
    }

    /// Trace distance from the channel's steady state.
    pub fn trace_distance(&self, t: f64) -> f64 {
        match self {
            Propagator::Qubit { b0, channel } => {
                let f = QubitFactors::of(channel, t);
                let dz = f.population * (b0.z - f.z_ss);
                let r2 = f.coherence.norm_sqr() * b0.transverse_sqr();
                0.5 * (dz * dz + r2).sqrt()
            }
            Propagator::Qutrit {
                rho0,
                channel,
                diagonal,
            } => {
                if *diagonal {
                    let q = qutrit_diagonal_evolve(&diag_of(rho0), channel, t);
                    q.p1 + q.p2
                } else {
                    let rho = qutrit_state(rho0, channel, t).expect("closed form stays physical");
                    let ss = DensityMatrix::diagonal(&[0.0, 0.0, 1.0]).expect("ground state");
                    trace_distance(&rho, &ss).expect("dimensions agree")
                }
            }
        }
    }
}

fn clamp_to_ball(b: BlochVector) -> BlochVector {
    let r = b.norm();
    if r > 1.0 {
        BlochVector {
            x: b.x / r,
            y: b.y / r,
            z: b.z / r,
        }
    } else {
        b
    }
}

fn diag_of(rho: &DensityMatrix) -> QutritDiagonal {
    let p = rho.populations();
    QutritDiagonal { p1: p[0], p2: p[1] }
}

/// Full qutrit closed form: populations from the diagonal solution,
/// coherences decaying independently.
fn qutrit_state(rho0: &DensityMatrix, c: &QutritAdc, t: f64) -> Result<DensityMatrix> {
    let q = qutrit_diagonal_evolve(&diag_of(rho0), c, t);
    let m0 = rho0.matrix();
    let g = c.gamma;
    let h = c.h_z;
    let decay = |rate: f64, freq: f64| Complex64::from_polar((-rate * t).exp(), -freq * t);
    let mut m = CMatrix::zeros(3, 3);
    m[(0, 0)] = Complex64::new(q.p1, 0.0);
    m[(1, 1)] = Complex64::new(q.p2, 0.0);
    m[(2, 2)] = Complex64::new(q.p3(), 0.0);
    m[(0, 1)] = m0[(0, 1)] * decay(1.5 * g, h);
    m[(0, 2)] = m0[(0, 2)] * decay(g, 2.0 * h);
    m[(1, 2)] = m0[(1, 2)] * decay(0.5 * g, h);
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        m[(j, i)] = m[(i, j)].conj();
    }
    DensityMatrix::with_tolerance(m, 1e-10)
}
