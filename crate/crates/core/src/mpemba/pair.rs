//! Crossing analysis for pairs of evolving states.

use std::cmp::Ordering;

use super::detect::{CrossingDetector, CrossingReport, PairSampler};
use super::{mpemba_parameter, trajectory_of};
use crate::channels::{ChannelSpec, Propagator, QubitFactors};
use crate::error::{Error, Result};
use crate::state::DensityMatrix;

/// Which scalar curve of a trajectory to compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    Ergotropy,
    TraceDistance,
}

pub fn curve_value(p: &Propagator, curve: Curve, t: f64) -> f64 {
    match curve {
        Curve::Ergotropy => p.ergotropy(t),
        Curve::TraceDistance => p.trace_distance(t),
    }
}

pub struct PropagatorPair<'a> {
    pub first: &'a Propagator,
    pub second: &'a Propagator,
    pub curve: Curve,
}

impl PairSampler for PropagatorPair<'_> {
    fn at(&self, t: f64) -> (f64, f64) {
        (
            curve_value(self.first, self.curve, t),
            curve_value(self.second, self.curve, t),
        )
    }
}

/// Leading long-time behaviour `coeff·e^{−rate·t}` of a curve. Keys compare
/// by rate first (slower wins), then lexicographically by coefficients.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LateKey {
    /// Exactly zero after a finite time.
    Vanishes,
    Decays {
        rate: f64,
        coeffs: Vec<f64>,
    },
}

const KEY_TOL: f64 = 1e-12;

fn cmp_close(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= KEY_TOL * a.abs().max(b.abs()) {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

impl LateKey {
    fn compare(&self, other: &LateKey) -> Ordering {
        match (self, other) {
            (LateKey::Vanishes, LateKey::Vanishes) => Ordering::Equal,
            (LateKey::Vanishes, _) => Ordering::Less,
            (_, LateKey::Vanishes) => Ordering::Greater,
            (LateKey::Decays { rate: r1, coeffs: c1 }, LateKey::Decays { rate: r2, coeffs: c2 }) => cmp_close(*r2, *r1)
                .then_with(|| {
                    for (a, b) in c1.iter().zip(c2) {
                        match cmp_close(*a, *b) {
                            Ordering::Equal => continue,
                            o => return o,
                        }
                    }
                    Ordering::Equal
                }),
        }
    }
}

fn decays(rate: f64, coeffs: Vec<f64>) -> Option<LateKey> {
    Some(LateKey::Decays { rate, coeffs })
}

/// Long-time law of one curve, `None` when no closed-form key is known.
pub(crate) fn late_key(p: &Propagator, curve: Curve) -> Option<LateKey> {
    match p {
        Propagator::Qubit { b0, channel } => {
            let m2 = b0.transverse_sqr();
            let m = m2.sqrt();
            let z0 = b0.z;
            match (channel, curve) {
                (ChannelSpec::Gadc(_) | ChannelSpec::NonMarkovAdc(_), Curve::Ergotropy) => {
                    if m2 > 0.0 {
                        decays(1.0, vec![m2, z0])
                    } else {
                        Some(LateKey::Vanishes)
                    }
                }
                (ChannelSpec::Gadc(_) | ChannelSpec::NonMarkovAdc(_), Curve::TraceDistance) => {
                    let z_ss = QubitFactors::of(channel, 0.0).z_ss;
                    let dz = (z0 - z_ss).abs();
                    if m2 > 0.0 {
                        decays(0.5, vec![m, dz])
                    } else if dz > 0.0 {
                        decays(1.0, vec![dz])
                    } else {
                        Some(LateKey::Vanishes)
                    }
                }
                (ChannelSpec::Pauli(c), Curve::Ergotropy) => {
                    let rz = 4.0 * c.gamma_perp;
                    let rm = 2.0 * (c.gamma_perp + c.gamma_z);
                    match cmp_close(c.gamma_z, c.gamma_perp) {
                        Ordering::Equal => {
                            let e = z0 + (z0 * z0 + m2).sqrt();
                            if e > 0.0 {
                                decays(rz, vec![e])
                            } else {
                                Some(LateKey::Vanishes)
                            }
                        }
                        // longitudinal part outlives the coherence
                        Ordering::Greater => {
                            if z0 > 0.0 {
                                decays(rz, vec![z0, m2])
                            } else if m2 == 0.0 {
                                Some(LateKey::Vanishes)
                            } else if z0 == 0.0 {
                                decays(rm, vec![m])
                            } else {
                                decays(4.0 * c.gamma_z, vec![m2 / z0.abs()])
                            }
                        }
                        Ordering::Less => {
                            if m2 > 0.0 {
                                decays(rm, vec![m, z0])
                            } else if z0 > 0.0 {
                                decays(rz, vec![z0])
                            } else {
                                Some(LateKey::Vanishes)
                            }
                        }
                    }
                }
                (ChannelSpec::Pauli(c), Curve::TraceDistance) => {
                    let rz = 4.0 * c.gamma_perp;
                    let rm = 2.0 * (c.gamma_perp + c.gamma_z);
                    let dz = z0.abs();
                    let mut parts: Vec<(f64, f64)> = [(rz, dz), (rm, m)].into_iter().filter(|p| p.1 > 0.0).collect();
                    if parts.is_empty() {
                        return Some(LateKey::Vanishes);
                    }
                    if parts.len() == 2 && cmp_close(rz, rm) == Ordering::Equal {
                        return decays(rz, vec![(dz * dz + m2).sqrt()]);
                    }
                    parts.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let rate = parts[0].0;
                    decays(rate, parts.iter().map(|p| p.1).collect())
                }
                (ChannelSpec::QutritAdc(_), _) => None,
            }
        }
        Propagator::Qutrit {
            rho0,
            channel,
            diagonal,
        } => {
            if !*diagonal {
                return None;
            }
            match curve {
                // the passive ordering is reached in finite time
                Curve::Ergotropy => Some(LateKey::Vanishes),
                Curve::TraceDistance => {
                    let p = rho0.populations();
                    let w = p[0] + p[1];
                    if w > 0.0 {
                        decays(channel.gamma, vec![w])
                    } else {
                        Some(LateKey::Vanishes)
                    }
                }
            }
        }
    }
}

/// Sign of `curve_1 − curve_2` as `t → ∞`, or 0 when undetermined.
pub(crate) fn late_order(p1: &Propagator, p2: &Propagator, curve: Curve) -> i8 {
    match (late_key(p1, curve), late_key(p2, curve)) {
        (Some(a), Some(b)) => match a.compare(&b) {
            Ordering::Greater => 1,
            Ordering::Less => -1,
            Ordering::Equal => 0,
        },
        _ => 0,
    }
}

/// Detection on `[0, t_max]` followed by the long-time check: if the
/// ordering at the horizon disagrees with the asymptotic law, a crossing
/// lies beyond it and the horizon is extended.
pub(crate) fn detect_with_tail<S: PairSampler + ?Sized>(
    det: &CrossingDetector,
    fast: &S,
    p1: &Propagator,
    p2: &Propagator,
    curve: Curve,
    t_max: f64,
) -> Result<CrossingReport> {
    let late = late_order(p1, p2, curve);
    let first = det.run(fast, t_max)?;
    if late == 0 || first.end_sign == 0 || first.end_sign == late {
        return Ok(first.report);
    }
    let slow = PropagatorPair {
        first: p1,
        second: p2,
        curve,
    };
    let mut horizon = t_max;
    let mut last = first;
    for ext in 1..=6 {
        horizon *= 4.0;
        last = det.run(&slow, horizon)?;
        last.report.tail_extensions = ext;
        if last.end_sign == 0 || last.end_sign == late {
            return Ok(last.report);
        }
    }
    last.report.converged = false;
    Ok(last.report)
}

pub(crate) fn horizon_for(c: &ChannelSpec, t_max: Option<f64>) -> Result<f64> {
    match t_max {
        Some(t) if t > 0.0 && t.is_finite() => Ok(t),
        Some(t) => Err(Error::domain(format!("t_max = {t} must be positive"))),
        None => c.default_horizon(),
    }
}

/// Time after which both ergotropies stay below `1e-6` of the larger
/// initial value, capped at `200/rate` and never before `2·last_crossing`.
pub fn mpemba_horizon(p1: &Propagator, p2: &Propagator, c: &ChannelSpec, last_crossing: f64) -> Result<f64> {
    let rate = c.slowest_rate();
    if !(rate > 0.0) {
        return Err(Error::Model("channel has no relaxation".into()));
    }
    let cap = 200.0 / rate;
    let e0 = p1.ergotropy(0.0).max(p2.ergotropy(0.0));
    let thr = 1e-6 * e0;
    let n = 8192;
    let mut last_above = 0;
    for k in 0..=n {
        let t = cap * k as f64 / n as f64;
        if p1.ergotropy(t).max(p2.ergotropy(t)) >= thr {
            last_above = k;
        }
    }
    let t_f = cap * ((last_above + 1).min(n)) as f64 / n as f64;
    Ok(t_f.max((2.0 * last_crossing).min(cap)).max(cap / n as f64))
}

/// Mpemba parameter of a pair from trajectories on `[0, t_f]`, with the
/// initially higher curve taken as the reference.
pub(crate) fn pair_mpemba_parameter(
    p1: &Propagator,
    p2: &Propagator,
    c: &ChannelSpec,
    report: &CrossingReport,
) -> Result<f64> {
    if report.count == 0 {
        return Ok(0.0);
    }
    let last = report.crossing_times.last().copied().unwrap_or(0.0);
    let t_f = mpemba_horizon(p1, p2, c, last)?;
    let a = trajectory_of(p1, t_f, 4097)?;
    let b = trajectory_of(p2, t_f, 4097)?;
    let o = if a.ergotropy_total[0] > b.ergotropy_total[0] {
        mpemba_parameter(&a, &b)?
    } else {
        mpemba_parameter(&b, &a)?
    };
    // crossings finer than the trajectory grid
    Ok(if o > 0.0 { o } else { report.mpemba_parameter })
}

/// Ergotropic crossings of two states under `c`, over `[0, t_max]` (the
/// channel's default horizon when `None`).
pub fn ergotropic_crossings(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    c: &ChannelSpec,
    t_max: Option<f64>,
) -> Result<CrossingReport> {
    let p1 = c.propagator(rho1)?;
    let p2 = c.propagator(rho2)?;
    let horizon = horizon_for(c, t_max)?;
    let det = CrossingDetector::default();
    let pair = PropagatorPair {
        first: &p1,
        second: &p2,
        curve: Curve::Ergotropy,
    };
    let mut report = detect_with_tail(&det, &pair, &p1, &p2, Curve::Ergotropy, horizon)?;
    report.mpemba_parameter = pair_mpemba_parameter(&p1, &p2, c, &report)?;
    Ok(report)
}

/// Crossings of the trace distances to the steady state.
pub fn state_mpemba_crossings(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    c: &ChannelSpec,
    t_max: Option<f64>,
) -> Result<CrossingReport> {
    let p1 = c.propagator(rho1)?;
    let p2 = c.propagator(rho2)?;
    let horizon = horizon_for(c, t_max)?;
    let det = CrossingDetector::default();
    let pair = PropagatorPair {
        first: &p1,
        second: &p2,
        curve: Curve::TraceDistance,
    };
    detect_with_tail(&det, &pair, &p1, &p2, Curve::TraceDistance, horizon)
}
