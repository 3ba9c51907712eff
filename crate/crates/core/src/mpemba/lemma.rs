//! Randomized checks of the monotonicity lemmas.
//!
//! L1 and L3 move along an isoergotropic curve and expect `∂ℰ(t)/∂m_z < 0`;
//! L2 and L4 hold `m_x` fixed and expect `∂ℰ(t)/∂m_z > 0`. L1/L2 apply to
//! generalized amplitude damping, L3/L4 to the Lorentzian bath.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{gadc_ergotropy, nm_ergotropy, ChannelSpec};
use crate::error::{Error, Result};
use crate::state::BlochVector;

const STEP: f64 = 1e-6;
const MARGIN: f64 = 1e-3;
/// Derivatives on the wrong side of zero by less than this are noise.
const NOISE: f64 = 1e-8;
const KEEP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lemma {
    L1,
    L2,
    L3,
    L4,
}

impl Lemma {
    fn along_iso(self) -> bool {
        matches!(self, Lemma::L1 | Lemma::L3)
    }
}

impl std::str::FromStr for Lemma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L1" => Ok(Lemma::L1),
            "L2" => Ok(Lemma::L2),
            "L3" => Ok(Lemma::L3),
            "L4" => Ok(Lemma::L4),
            _ => Err(Error::domain(format!("unknown lemma {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaViolation {
    pub m_x: f64,
    pub m_z: f64,
    pub t: f64,
    pub derivative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: Lemma,
    pub samples: usize,
    pub violations: usize,
    /// Largest wrong-signed derivative magnitude seen (0 if none).
    pub worst: f64,
    /// First few violating samples.
    pub violation_samples: Vec<LemmaViolation>,
}

type Evaluator = Box<dyn Fn(&BlochVector, f64) -> f64>;

pub fn verify_lemma_monotonicity(lemma: Lemma, samples: usize, c: &ChannelSpec, seed: u64) -> Result<LemmaReport> {
    c.validate()?;
    let (eval, t_lo, t_hi): (Evaluator, f64, f64) = match (lemma, c) {
        (Lemma::L1 | Lemma::L2, ChannelSpec::Gadc(g)) => {
            if g.gamma == 0.0 {
                return Err(Error::Precondition("gamma must be positive".into()));
            }
            let g = *g;
            let rate = g.a() * g.gamma;
            (Box::new(move |b, t| gadc_ergotropy(b, &g, t)), 0.05 / rate, 5.0 / rate)
        }
        (Lemma::L3 | Lemma::L4, ChannelSpec::NonMarkovAdc(m)) => {
            let m = *m;
            (
                Box::new(move |b, t| nm_ergotropy(b, &m, t)),
                1e-3 / m.lambda,
                20.0 / m.lambda,
            )
        }
        _ => {
            return Err(Error::Precondition(format!(
                "{lemma:?} does not apply to the {} channel",
                c.name()
            )))
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = LemmaReport {
        lemma,
        samples,
        violations: 0,
        worst: 0.0,
        violation_samples: Vec::new(),
    };
    for k in 0..samples {
        let t = rng.gen_range(t_lo..t_hi);
        let (mx, mz, deriv) = if lemma.along_iso() {
            let e0: f64 = rng.gen_range(0.05..1.95);
            let mz = rng.gen_range((e0 - 1.0 + MARGIN)..(0.5 * e0 - MARGIN));
            let on_iso = |z: f64| BlochVector {
                x: (e0 * e0 - 2.0 * e0 * z).sqrt(),
                y: 0.0,
                z,
            };
            let d = (eval(&on_iso(mz + STEP), t) - eval(&on_iso(mz - STEP), t)) / (2.0 * STEP);
            (on_iso(mz).x, mz, d)
        } else {
            // every tenth sample sits on the coherence-free axis
            let mx: f64 = if k % 10 == 0 { 0.0 } else { rng.gen_range(0.0..0.999) };
            let zmax = (1.0 - mx * mx).sqrt() - MARGIN;
            let mz = rng.gen_range(-zmax..zmax);
            let at = |z: f64| BlochVector { x: mx, y: 0.0, z };
            let d = (eval(&at(mz + STEP), t) - eval(&at(mz - STEP), t)) / (2.0 * STEP);
            (mx, mz, d)
        };
        let wrong = if lemma.along_iso() { deriv } else { -deriv };
        if wrong > NOISE {
            report.violations += 1;
            report.worst = report.worst.max(wrong);
            if report.violation_samples.len() < KEEP {
                report.violation_samples.push(LemmaViolation {
                    m_x: mx,
                    m_z: mz,
                    t,
                    derivative: deriv,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{Gadc, NonMarkovAdc};

    #[test]
    fn gadc_lemmas_hold() {
        for n in [0.0, 0.5] {
            let c = ChannelSpec::Gadc(Gadc::new(0.1, n, 1.0).unwrap());
            for l in [Lemma::L1, Lemma::L2] {
                let r = verify_lemma_monotonicity(l, 1000, &c, 7).unwrap();
                assert_eq!(r.violations, 0, "{l:?} n={n}: {:?}", r.violation_samples);
            }
        }
    }

    #[test]
    fn non_markov_lemmas_hold() {
        let c = ChannelSpec::NonMarkovAdc(NonMarkovAdc::new(0.3, 0.03, 0.13, 1.0).unwrap());
        for l in [Lemma::L3, Lemma::L4] {
            let r = verify_lemma_monotonicity(l, 1000, &c, 11).unwrap();
            assert_eq!(r.violations, 0, "{l:?}: {:?}", r.violation_samples);
        }
    }

    #[test]
    fn wrong_channel_rejected() {
        let c = ChannelSpec::Gadc(Gadc::new(0.1, 0.0, 1.0).unwrap());
        assert!(matches!(
            verify_lemma_monotonicity(Lemma::L3, 10, &c, 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn same_seed_same_report() {
        let c = ChannelSpec::Gadc(Gadc::new(0.2, 0.1, 1.0).unwrap());
        let a = verify_lemma_monotonicity(Lemma::L2, 200, &c, 3).unwrap();
        let b = verify_lemma_monotonicity(Lemma::L2, 200, &c, 3).unwrap();
        assert_eq!(a, b);
    }
}
