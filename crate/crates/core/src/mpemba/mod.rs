//! Ergotropic and state Mpemba crossings.

mod detect;
mod lemma;
mod pair;

pub use detect::{detect_crossings, CrossingDetector, CrossingReport, FnPair, PairSampler, Parity};
pub use lemma::{verify_lemma_monotonicity, Lemma, LemmaReport, LemmaViolation};
pub(crate) use pair::detect_with_tail;
pub use pair::{curve_value, ergotropic_crossings, mpemba_horizon, state_mpemba_crossings, Curve, PropagatorPair};

use serde::{Deserialize, Serialize};

use crate::channels::{ChannelSpec, Gadc, Pauli, Propagator};
use crate::ergotropy::bloch_ergotropy;
use crate::error::{Error, Result};
use crate::state::{BlochVector, DensityMatrix, BALL_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub ergotropy_total: Vec<f64>,
    pub ergotropy_incoherent: Vec<f64>,
    pub ergotropy_coherent: Vec<f64>,
    pub trace_distance: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Uniform sampling of the closed-form dynamics on `[0, t_max]`.
pub fn trajectory(rho0: &DensityMatrix, c: &ChannelSpec, t_max: f64, n_points: usize) -> Result<Trajectory> {
    trajectory_of(&c.propagator(rho0)?, t_max, n_points)
}

pub fn trajectory_of(p: &Propagator, t_max: f64, n_points: usize) -> Result<Trajectory> {
    if n_points < 2 {
        return Err(Error::domain(format!("n_points = {n_points} must be at least 2")));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::domain(format!("t_max = {t_max} must be positive")));
    }
    let n = n_points - 1;
    let mut tr = Trajectory {
        times: Vec::with_capacity(n_points),
        ergotropy_total: Vec::with_capacity(n_points),
        ergotropy_incoherent: Vec::with_capacity(n_points),
        ergotropy_coherent: Vec::with_capacity(n_points),
        trace_distance: Vec::with_capacity(n_points),
    };
    for k in 0..=n {
        let t = t_max * k as f64 / n as f64;
        let b = p.breakdown(t);
        tr.times.push(t);
        tr.ergotropy_total.push(b.total);
        tr.ergotropy_incoherent.push(b.incoherent);
        tr.ergotropy_coherent.push(b.coherent);
        tr.trace_distance.push(p.trace_distance(t));
    }
    Ok(tr)
}

/// Fraction of the area between the two ergotropy curves where the
/// initially lower one lies on top. Trapezoidal rule on the shared grid.
pub fn mpemba_parameter(traj1: &Trajectory, traj2: &Trajectory) -> Result<f64> {
    if traj1.times != traj2.times {
        return Err(Error::domain("trajectories must share one time grid"));
    }
    if traj1.is_empty() {
        return Err(Error::domain("empty trajectories"));
    }
    let e1 = &traj1.ergotropy_total;
    let e2 = &traj2.ergotropy_total;
    if e1[0] <= e2[0] {
        return Err(Error::Ordering(format!(
            "first trajectory must start higher ({} <= {})",
            e1[0], e2[0]
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..traj1.len() - 1 {
        let h = traj1.times[k + 1] - traj1.times[k];
        let (pos, neg) = detect::split_area(h, e1[k] - e2[k], e1[k + 1] - e2[k + 1]);
        num += neg;
        den += pos + neg;
    }
    if !(den > 0.0) {
        return Err(Error::Ordering("curves coincide; the parameter is undefined".into()));
    }
    Ok((num / den).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "time", rename_all = "snake_case")]
pub enum CrossingTime {
    Finite(f64),
    /// No finite crossing: `cos θ1 + cos θ2 ≤ 0`.
    Divergent,
    /// Identical states.
    Degenerate,
}

/// Closed-form crossing time of two pure states with polar angles `θ1`,
/// `θ2` under generalized amplitude damping.
pub fn crossing_time_pure_gadc(theta1: f64, theta2: f64, c: &Gadc) -> Result<CrossingTime> {
    let pi = std::f64::consts::PI;
    for th in [theta1, theta2] {
        if !(0.0..=pi).contains(&th) {
            return Err(Error::domain(format!("polar angle {th} outside [0, π]")));
        }
    }
    c.validate()?;
    if theta1 == theta2 {
        return Ok(CrossingTime::Degenerate);
    }
    let (c1, c2) = (theta1.cos(), theta2.cos());
    let s = c1 + c2;
    if s <= 0.0 {
        return Ok(CrossingTime::Divergent);
    }
    let a = c.a();
    let arg = 4.0 * (a * (1.0 + c1 * c2) + s) / (s * (4.0 + a * s));
    if !(arg > 1.0) || !arg.is_finite() || c.gamma == 0.0 {
        return Ok(CrossingTime::Divergent);
    }
    Ok(CrossingTime::Finite(arg.ln() / (a * c.gamma)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    Crossing,
    NoCrossing,
    NotCovered,
}

const PRED_TOL: f64 = 1e-12;

/// Crossing prediction under generalized amplitude damping from the
/// initial coherences. The pair is reordered so the first member has the
/// larger ergotropy.
pub fn predict_emc_gadc(b1: &BlochVector, b2: &BlochVector) -> Prediction {
    if b1 == b2 {
        return Prediction::NoCrossing;
    }
    let (e1, e2) = (bloch_ergotropy(b1, 1.0), bloch_ergotropy(b2, 1.0));
    let (hi, lo, tie) = if (e1 - e2).abs() <= PRED_TOL {
        (b1, b2, true)
    } else if e1 > e2 {
        (b1, b2, false)
    } else {
        (b2, b1, false)
    };
    let (c_hi, c_lo) = (hi.transverse(), lo.transverse());
    if (c_hi - c_lo).abs() <= PRED_TOL {
        return if tie {
            Prediction::NotCovered
        } else {
            Prediction::NoCrossing
        };
    }
    if tie {
        return Prediction::NotCovered;
    }
    if c_hi > c_lo {
        Prediction::NoCrossing
    } else {
        Prediction::Crossing
    }
}

/// Crossing prediction under anisotropic Pauli noise for states in the
/// x–z plane with positive `m_z`, first member of higher ergotropy.
pub fn predict_emc_pauli(b1: &BlochVector, b2: &BlochVector, c: &Pauli) -> Result<Prediction> {
    for b in [b1, b2] {
        if b.y.abs() > BALL_TOL || !(b.z > 0.0) {
            return Err(Error::Ordering(format!(
                "states must have m_y = 0 and m_z > 0, got ({}, {}, {})",
                b.x, b.y, b.z
            )));
        }
    }
    let (e1, e2) = (bloch_ergotropy(b1, 1.0), bloch_ergotropy(b2, 1.0));
    if !(e1 > e2) {
        return Err(Error::Ordering(format!(
            "first state must have the larger ergotropy ({e1} <= {e2})"
        )));
    }
    let pick = |a: f64, b: f64| {
        if (a - b).abs() <= PRED_TOL {
            Prediction::NotCovered
        } else if a < b {
            Prediction::Crossing
        } else {
            Prediction::NoCrossing
        }
    };
    Ok(
        if (c.gamma_perp - c.gamma_z).abs() <= PRED_TOL * c.gamma_perp.max(c.gamma_z) {
            Prediction::NoCrossing
        } else if c.gamma_perp < c.gamma_z {
            pick(b1.z, b2.z)
        } else {
            pick(b1.transverse(), b2.transverse())
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::QutritAdc;
    use crate::ergotropy::pure_qubit;
    use crate::state::bloch_to_density;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn b(x: f64, z: f64) -> BlochVector {
        BlochVector::new(x, 0.0, z).unwrap()
    }

    #[test]
    fn ground_state_trajectory_is_flat_zero() {
        let c = ChannelSpec::Gadc(Gadc::new(0.1, 0.0, 1.0).unwrap());
        let g = DensityMatrix::diagonal(&[0.0, 1.0]).unwrap();
        let tr = trajectory(&g, &c, 10.0, 11).unwrap();
        assert!(tr.ergotropy_total.iter().all(|&e| e == 0.0));
        assert!(tr.trace_distance.iter().all(|&d| d == 0.0));
        assert_eq!(tr.times[10], 10.0);
    }

    #[test]
    fn markovian_trajectory_decreases() {
        let c = ChannelSpec::Gadc(Gadc::new(0.1, 0.0, 1.0).unwrap());
        let rho = bloch_to_density(b(0.8, 0.1)).unwrap();
        let tr = trajectory(&rho, &c, 50.0, 501).unwrap();
        assert!(tr.ergotropy_total.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn non_markov_trajectory_revives() {
        let c = ChannelSpec::NonMarkovAdc(crate::channels::NonMarkovAdc::new(0.3, 0.03, 0.13, 1.0).unwrap());
        let rho = bloch_to_density(b(0.5, 0.5)).unwrap();
        let tr = trajectory(&rho, &c, 200.0, 2001).unwrap();
        assert!(tr.ergotropy_total.windows(2).any(|w| w[1] > w[0] + 1e-9));
    }

    #[test]
    fn trajectory_preconditions() {
        let c = ChannelSpec::QutritAdc(QutritAdc::new(0.1, 1.0).unwrap());
        let rho = DensityMatrix::maximally_mixed(3).unwrap();
        assert!(trajectory(&rho, &c, 1.0, 1).is_err());
        assert!(trajectory(&rho, &c, 0.0, 5).is_err());
    }

    #[test]
    fn closed_form_crossing_time() {
        let c = Gadc::new(0.1, 0.0, 1.0).unwrap();
        match crossing_time_pure_gadc(0.0, FRAC_PI_2, &c).unwrap() {
            CrossingTime::Finite(t) => assert_abs_diff_eq!(t, 10.0 * 1.6f64.ln(), epsilon = 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            crossing_time_pure_gadc(0.3, PI - 0.3, &c).unwrap(),
            CrossingTime::Divergent
        );
        assert_eq!(crossing_time_pure_gadc(0.7, 0.7, &c).unwrap(), CrossingTime::Degenerate);
        assert!(crossing_time_pure_gadc(-0.1, 0.5, &c).is_err());
    }

    #[test]
    fn closed_form_crossing_time_at_finite_temperature() {
        let g = Gadc::new(0.07, 0.6, 1.0).unwrap();
        let c = ChannelSpec::Gadc(g);
        let (t1, t2) = (0.4, 1.3);
        let want = match crossing_time_pure_gadc(t1, t2, &g).unwrap() {
            CrossingTime::Finite(t) => t,
            other => panic!("unexpected {other:?}"),
        };
        let rep = ergotropic_crossings(&pure_qubit(t1, 0.0).unwrap(), &pure_qubit(t2, 0.0).unwrap(), &c, None).unwrap();
        assert_eq!(rep.count, 1);
        assert!((rep.crossing_times[0] - want).abs() < 1e-6 * want);
    }

    #[test]
    fn mpemba_parameter_guards() {
        let c = ChannelSpec::Gadc(Gadc::new(0.1, 0.0, 1.0).unwrap());
        let p1 = c.propagator(&bloch_to_density(b(0.8, 0.0)).unwrap()).unwrap();
        let p2 = c.propagator(&bloch_to_density(b(0.4, -0.2)).unwrap()).unwrap();
        let a = trajectory_of(&p1, 100.0, 201).unwrap();
        let z = trajectory_of(&p2, 100.0, 201).unwrap();
        assert_eq!(mpemba_parameter(&a, &z).unwrap(), 0.0);
        assert!(matches!(mpemba_parameter(&z, &a), Err(Error::Ordering(_))));
        assert!(matches!(mpemba_parameter(&a, &a), Err(Error::Ordering(_))));
        let short = trajectory_of(&p2, 100.0, 101).unwrap();
        assert!(matches!(mpemba_parameter(&a, &short), Err(Error::Domain(_))));
    }

    #[test]
    fn gadc_predictions() {
        assert_eq!(predict_emc_gadc(&b(0.8, 0.0), &b(0.4, -0.2)), Prediction::NoCrossing);
        assert_eq!(predict_emc_gadc(&b(0.0, 0.9), &b(0.9, 0.0)), Prediction::Crossing);
        assert_eq!(predict_emc_gadc(&b(0.9, 0.0), &b(0.0, 0.9)), Prediction::Crossing);
        assert_eq!(predict_emc_gadc(&b(0.3, 0.3), &b(0.3, 0.3)), Prediction::NoCrossing);
    }

    #[test]
    fn pauli_predictions() {
        let slow_perp = Pauli::new(0.001, 0.01, 1.0).unwrap();
        // ergotropy 0.2 + sqrt(0.04 + 0.81) > 0.5 + sqrt(0.25 + 0.01)
        let hi = b(0.9, 0.2);
        let lo = b(0.1, 0.5);
        assert!(bloch_ergotropy(&hi, 1.0) > bloch_ergotropy(&lo, 1.0));
        assert_eq!(predict_emc_pauli(&hi, &lo, &slow_perp).unwrap(), Prediction::Crossing);

        let fast_perp = Pauli::new(0.01, 0.001, 1.0).unwrap();
        assert_eq!(
            predict_emc_pauli(&b(0.5, 0.5), &b(0.8, 0.1), &fast_perp).unwrap(),
            Prediction::Crossing
        );
        let equal = Pauli::new(0.01, 0.01, 1.0).unwrap();
        assert_eq!(predict_emc_pauli(&hi, &lo, &equal).unwrap(), Prediction::NoCrossing);
        assert!(predict_emc_pauli(&lo, &hi, &equal).is_err());
        assert!(predict_emc_pauli(&b(0.5, -0.1), &lo, &equal).is_err());
    }
}
