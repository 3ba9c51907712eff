//! Analytic solutions of the four channels.

use num_complex::Complex64;

use super::{ChannelSpec, Gadc, NonMarkovAdc, Pauli, QutritAdc};
use crate::ergotropy::qubit_ergotropy;
use crate::error::{Error, Result};
use crate::state::{BlochVector, QutritDiagonal, BALL_TOL};

/// Phase-covariant qubit dynamics:
/// `z(t) = z_ss + population·(z0 − z_ss)` and
/// `(x − iy)(t) = coherence·(x0 − iy0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitFactors {
    pub z_ss: f64,
    pub population: f64,
    pub coherence: Complex64,
}

impl QubitFactors {
    /// Factors of a qubit channel at time `t`. Panics on the qutrit channel.
    pub fn of(c: &ChannelSpec, t: f64) -> Self {
        match c {
            ChannelSpec::Gadc(g) => {
                let rate = g.a() * g.gamma;
                QubitFactors {
                    z_ss: -1.0 / g.a(),
                    population: (-rate * t).exp(),
                    coherence: Complex64::from_polar((-0.5 * rate * t).exp(), -2.0 * g.h_z * t),
                }
            }
            ChannelSpec::Pauli(p) => QubitFactors {
                z_ss: 0.0,
                population: (-4.0 * p.gamma_perp * t).exp(),
                coherence: Complex64::from_polar((-2.0 * (p.gamma_perp + p.gamma_z) * t).exp(), -2.0 * p.h_z * t),
            },
            ChannelSpec::NonMarkovAdc(m) => {
                let nu = nm_amplitude(m, t);
                QubitFactors {
                    z_ss: -1.0,
                    population: nu.norm_sqr(),
                    coherence: nu * Complex64::from_polar(1.0, -2.0 * m.h_z * t),
                }
            }
            ChannelSpec::QutritAdc(_) => panic!("qubit factors requested for a qutrit channel"),
        }
    }
}

pub fn gadc_bloch_evolve(b0: &BlochVector, c: &Gadc, t: f64) -> BlochVector {
    let f = QubitFactors::of(&ChannelSpec::Gadc(*c), t);
    let w = f.coherence * Complex64::new(b0.x, -b0.y);
    BlochVector {
        x: w.re,
        y: -w.im,
        z: f.z_ss + f.population * (b0.z - f.z_ss),
    }
}

pub fn gadc_ergotropy(b0: &BlochVector, c: &Gadc, t: f64) -> f64 {
    let y = (-c.a() * c.gamma * t).exp();
    let z_ss = -1.0 / c.a();
    let z = z_ss + y * (b0.z - z_ss);
    qubit_ergotropy(z, y * b0.transverse_sqr(), c.h_z)
}

/// Ergotropy under Pauli noise for states in the x–z plane.
pub fn pauli_ergotropy(b0: &BlochVector, c: &Pauli, t: f64) -> Result<f64> {
    if b0.y.abs() > BALL_TOL {
        return Err(Error::Precondition(format!(
            "Pauli closed form needs m_y = 0, got {}",
            b0.y
        )));
    }
    let z = (-4.0 * c.gamma_perp * t).exp() * b0.z;
    let r2 = (-4.0 * (c.gamma_perp + c.gamma_z) * t).exp() * b0.x * b0.x;
    Ok(qubit_ergotropy(z, r2, c.h_z))
}

/// Populations `(top, middle)` of a diagonal qutrit state.
pub fn qutrit_diagonal_evolve(q: &QutritDiagonal, c: &QutritAdc, t: f64) -> QutritDiagonal {
    let e1 = (-c.gamma * t).exp();
    let e2 = e1 * e1;
    let top = q.p1 * e2;
    let mid = ((q.p1 + q.p2) * e1 - top).max(0.0);
    QutritDiagonal { p1: top, p2: mid }
}

/// Excited-state amplitude `ν(t)` for the Lorentzian bath.
///
/// Written as `e^{-λt/2}[cosh w + (λ − iΔ)(t/2)·sinh(w)/w]` with
/// `w = ζt/2`, evaluated through exponentials of `±w − λt/2` so that long
/// horizons do not overflow.
pub fn nm_amplitude(c: &NonMarkovAdc, t: f64) -> Complex64 {
    let k = Complex64::new(c.lambda, -c.delta);
    let zeta = (k * k - 2.0 * c.gamma * c.lambda).sqrt();
    let w = zeta * (0.5 * t);
    let damp = -0.5 * c.lambda * t;
    let ep = (w + damp).exp();
    let em = (-w + damp).exp();
    let cosh = 0.5 * (ep + em);
    let sinhc = if w.norm() < 1e-4 {
        let w2 = w * w;
        Complex64::new(damp.exp(), 0.0) * (1.0 + w2 / 6.0 + w2 * w2 / 120.0)
    } else {
        0.5 * (ep - em) / w
    };
    cosh + k * (0.5 * t) * sinhc
}

/// Ergotropy for the Lorentzian bath: the zero-temperature damping law
/// with `e^{-γt}` replaced by `|ν(t)|²`.
pub fn nm_ergotropy(b0: &BlochVector, c: &NonMarkovAdc, t: f64) -> f64 {
    let x = nm_amplitude(c, t).norm_sqr();
    qubit_ergotropy(x * (1.0 + b0.z) - 1.0, x * b0.transverse_sqr(), c.h_z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gadc_matches_literal_formula() {
        let c = Gadc::new(0.1, 0.4, 1.0).unwrap();
        let a = c.a();
        let b = BlochVector::new(0.5, 0.0, 0.3).unwrap();
        for t in [0.0, 0.5, 2.0, 9.0] {
            let y = (-a * c.gamma * t).exp();
            let z = y * b.z - (1.0 - y) / a;
            let naive = z + (z * z + y * b.x * b.x).sqrt();
            assert_abs_diff_eq!(gadc_ergotropy(&b, &c, t), naive.max(0.0), epsilon = 1e-13);
        }
    }

    #[test]
    fn worked_crossing_point() {
        let c = Gadc::new(0.1, 0.0, 1.0).unwrap();
        let t = 10.0 * 1.6f64.ln();
        let e1 = gadc_ergotropy(&BlochVector::from_polar(0.0, 0.0), &c, t);
        let e2 = gadc_ergotropy(&BlochVector::from_polar(std::f64::consts::FRAC_PI_2, 0.0), &c, t);
        assert_abs_diff_eq!(e1, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(e2, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn pauli_matches_explicit_form() {
        let c = Pauli::new(0.02, 0.05, 1.0).unwrap();
        let b = BlochVector::new(0.6, 0.0, 0.2).unwrap();
        for t in [0.0, 1.0, 5.0] {
            let lit = (-4.0 * c.gamma_perp * t).exp()
                * (b.z + (b.z * b.z + (4.0 * t * (c.gamma_perp - c.gamma_z)).exp() * b.x * b.x).sqrt());
            assert_abs_diff_eq!(pauli_ergotropy(&b, &c, t).unwrap(), lit, epsilon = 1e-13);
        }
        let off_plane = BlochVector::new(0.1, 0.2, 0.0).unwrap();
        assert!(matches!(
            pauli_ergotropy(&off_plane, &c, 1.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn pauli_long_time_has_no_overflow() {
        let c = Pauli::new(0.5, 0.0, 1.0).unwrap();
        let b = BlochVector::new(0.6, 0.0, -0.2).unwrap();
        let e = pauli_ergotropy(&b, &c, 400.0).unwrap();
        assert!(e.is_finite() && e >= 0.0);
    }

    #[test]
    fn qutrit_populations_conserve_trace() {
        let c = QutritAdc::new(0.3, 1.0).unwrap();
        let q = QutritDiagonal::new(0.2, 0.5).unwrap();
        let out = qutrit_diagonal_evolve(&q, &c, 1.3);
        assert_abs_diff_eq!(out.p1, 0.2 * (-0.78f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(out.p2, 0.7 * (-0.39f64).exp() - 0.2 * (-0.78f64).exp(), epsilon = 1e-15);
        assert!(out.p3() >= 0.0);
    }

    #[test]
    fn nm_amplitude_reference_value() {
        let c = NonMarkovAdc::new(0.25, 1.0, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(nm_amplitude(&c, 1.0).norm(), 0.954_46, epsilon = 1e-5);
        assert_eq!(nm_amplitude(&c, 0.0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn nm_amplitude_continuous_at_degenerate_zeta() {
        // λ = 2γ with Δ = 0 gives ζ = 0
        let c = NonMarkovAdc::new(0.5, 1.0, 0.0, 1.0).unwrap();
        let t: f64 = 2.0;
        let expected = (-0.5 * t).exp() * (1.0 + 0.5 * t);
        assert_abs_diff_eq!(nm_amplitude(&c, t).re, expected, epsilon = 1e-14);
        let near = NonMarkovAdc::new(0.5 + 1e-9, 1.0, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(nm_amplitude(&near, t).re, expected, epsilon = 1e-8);
    }

    #[test]
    fn nm_amplitude_bounded_on_long_horizons() {
        let c = NonMarkovAdc::new(1.0, 0.03, 0.1, 1.0).unwrap();
        for k in 0..2000 {
            let nu = nm_amplitude(&c, k as f64 * 0.5);
            assert!(nu.norm() <= 1.0 + 1e-12, "t = {}", k as f64 * 0.5);
        }
    }
}
