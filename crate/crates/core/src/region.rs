//! Parameter-plane sweeps classifying initial states against a reference.
//!
//! Points are independent and evaluated in parallel; results are collected
//! in grid order (axis1 outer, axis2 inner), so maps are reproducible
//! regardless of scheduling.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{ChannelSpec, Gadc, Propagator, QubitFactors, QutritAdc};
use crate::ergotropy::{pure_qubit, qubit_ergotropy, qutrit_table_ergotropy};
use crate::error::{Error, Result};
use crate::mpemba::{
    detect_with_tail, ergotropic_crossings, CrossingDetector, CrossingReport, Curve, PairSampler, PropagatorPair,
};
use crate::state::{bloch_to_density, BlochVector, QutritDiagonal, BALL_TOL};

/// Resolution of the cached factor tables: the first three detector levels.
const TABLE_INTERVALS: usize = 8192;
const ISO_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(name: &str, min: f64, max: f64, n: usize) -> Self {
        Axis {
            name: name.to_string(),
            min,
            max,
            n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::domain(format!("axis {} needs at least 2 points", self.name)));
        }
        if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::domain(format!(
                "axis {} needs min < max, got [{}, {}]",
                self.name, self.min, self.max
            )));
        }
        Ok(())
    }

    /// Inclusive at both ends.
    pub fn values(&self) -> Vec<f64> {
        let span = self.max - self.min;
        (0..self.n)
            .map(|k| {
                if k + 1 == self.n {
                    self.max
                } else {
                    self.min + span * k as f64 / (self.n - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub axis1: Axis,
    pub axis2: Axis,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
}

impl GridSpec {
    pub fn new(axis1: Axis, axis2: Axis) -> Self {
        GridSpec {
            axis1,
            axis2,
            fixed: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        self.axis2.validate()
    }

    fn expect_plane(&self, a: &str, b: &str) -> Result<()> {
        self.validate()?;
        if self.axis1.name != a || self.axis2.name != b {
            return Err(Error::domain(format!(
                "grid must span ({a}, {b}), got ({}, {})",
                self.axis1.name, self.axis2.name
            )));
        }
        Ok(())
    }

    fn points(&self) -> Vec<(f64, f64)> {
        let v2 = self.axis2.values();
        self.axis1
            .values()
            .into_iter()
            .flat_map(|a| v2.iter().map(move |&b| (a, b)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub axis1: f64,
    pub axis2: f64,
    pub valid_state: bool,
    pub crossing_count: usize,
    pub emc: bool,
    pub state_mpemba: bool,
    pub mpemba_parameter: f64,
    pub iso_flag: bool,
    /// Initial values coincide with the reference, so no ordering exists.
    pub degenerate: bool,
}

impl RegionPoint {
    fn invalid(axis1: f64, axis2: f64) -> Self {
        RegionPoint {
            axis1,
            axis2,
            valid_state: false,
            crossing_count: 0,
            emc: false,
            state_mpemba: false,
            mpemba_parameter: 0.0,
            iso_flag: false,
            degenerate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub grid: GridSpec,
    pub channel: ChannelSpec,
    pub t_max: f64,
    pub points: Vec<RegionPoint>,
    /// Non-zero even crossing counts (only meaningful for the Lorentzian
    /// bath, where odd counts are expected).
    pub anomalies: usize,
    /// Points whose horizon had to be extended by the long-time check.
    pub tail_extensions: usize,
    /// Points whose crossing count had not stabilized.
    pub unconverged: usize,
}

impl RegionMap {
    pub fn at(&self, i: usize, j: usize) -> &RegionPoint {
        &self.points[i * self.grid.axis2.n + j]
    }
}

// ---------------------------------------------------------------------------
// cached samplers

struct QubitTable {
    n: usize,
    z_ss: f64,
    h_z: f64,
    pop: Vec<f64>,
    coh2: Vec<f64>,
}

impl QubitTable {
    fn new(c: &ChannelSpec, t_max: f64) -> Self {
        let n = TABLE_INTERVALS;
        let mut pop = Vec::with_capacity(n + 1);
        let mut coh2 = Vec::with_capacity(n + 1);
        let mut z_ss = 0.0;
        for k in 0..=n {
            let f = QubitFactors::of(c, t_max * k as f64 / n as f64);
            z_ss = f.z_ss;
            pop.push(f.population);
            coh2.push(f.coherence.norm_sqr());
        }
        QubitTable {
            n,
            z_ss,
            h_z: c.h_z(),
            pop,
            coh2,
        }
    }

    /// Whole curve in one branch-free pass; bit-identical to `value`.
    fn fill(&self, curve: Curve, z0: f64, m2: f64, out: &mut Vec<f64>) {
        let (z_ss, h) = (self.z_ss, self.h_z);
        let d0 = z0 - z_ss;
        match curve {
            Curve::Ergotropy => out.extend(self.pop.iter().zip(&self.coh2).map(|(&p, &c)| {
                let z = z_ss + p * d0;
                let r2 = c * m2;
                let q = (z * z + r2).sqrt();
                let up = z + q;
                let down = r2 / (q - z);
                h * if z >= 0.0 { up } else { down }
            })),
            Curve::TraceDistance => out.extend(self.pop.iter().zip(&self.coh2).map(|(&p, &c)| {
                let dz = p * d0;
                0.5 * (dz * dz + c * m2).sqrt()
            })),
        }
    }

    fn value(&self, curve: Curve, z0: f64, m2: f64, k: usize) -> f64 {
        let dz = self.pop[k] * (z0 - self.z_ss);
        let r2 = self.coh2[k] * m2;
        match curve {
            Curve::Ergotropy => qubit_ergotropy(self.z_ss + dz, r2, self.h_z),
            Curve::TraceDistance => 0.5 * (dz * dz + r2).sqrt(),
        }
    }
}

struct QutritTable {
    n: usize,
    h_z: f64,
    e1: Vec<f64>,
}

impl QutritTable {
    fn new(c: &QutritAdc, t_max: f64) -> Self {
        let n = TABLE_INTERVALS;
        let e1 = (0..=n)
            .map(|k| (-c.gamma * t_max * k as f64 / n as f64).exp())
            .collect();
        QutritTable { n, h_z: c.h_z, e1 }
    }

    fn value(&self, curve: Curve, q: &QutritDiagonal, k: usize) -> f64 {
        let e1 = self.e1[k];
        match curve {
            Curve::Ergotropy => {
                let top = q.p1 * e1 * e1;
                let mid = ((q.p1 + q.p2) * e1 - top).max(0.0);
                qutrit_table_ergotropy(&QutritDiagonal { p1: top, p2: mid }, self.h_z)
            }
            Curve::TraceDistance => e1 * (q.p1 + q.p2),
        }
    }
}

enum Cached<'a> {
    Qubit { table: &'a QubitTable, z0: f64, m2: f64 },
    Qutrit { table: &'a QutritTable, q: QutritDiagonal },
}

/// Reference values on the table grid plus the point evaluated from the
/// table; off-grid times fall back to the propagators.
struct CachedPair<'a> {
    reference: &'a [f64],
    point: Cached<'a>,
    curve: Curve,
    slow: PropagatorPair<'a>,
}

impl PairSampler for CachedPair<'_> {
    fn at(&self, t: f64) -> (f64, f64) {
        self.slow.at(t)
    }

    fn at_grid(&self, j: usize, n: usize, t: f64) -> (f64, f64) {
        let table_n = match &self.point {
            Cached::Qubit { table, .. } => table.n,
            Cached::Qutrit { table, .. } => table.n,
        };
        if n > table_n || table_n % n != 0 {
            return self.slow.at(t);
        }
        let k = j * (table_n / n);
        let v = match &self.point {
            Cached::Qubit { table, z0, m2 } => table.value(self.curve, *z0, *m2, k),
            Cached::Qutrit { table, q } => table.value(self.curve, q, k),
        };
        (self.reference[k], v)
    }

    fn fill_grid(&self, n: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        let Cached::Qubit { table, z0, m2 } = &self.point else {
            return None;
        };
        if n != table.n {
            return None;
        }
        let mut g = Vec::with_capacity(n + 1);
        table.fill(self.curve, *z0, *m2, &mut g);
        Some((self.reference.to_vec(), g))
    }
}

// ---------------------------------------------------------------------------

struct PairOutcome {
    report: Option<CrossingReport>,
}

fn classify(
    det: &CrossingDetector,
    sampler: &CachedPair,
    p_ref: &Propagator,
    p: &Propagator,
    t_max: f64,
) -> Result<PairOutcome> {
    match detect_with_tail(det, sampler, p_ref, p, sampler.curve, t_max) {
        Ok(r) => Ok(PairOutcome { report: Some(r) }),
        Err(Error::AmbiguousOrdering { .. }) => Ok(PairOutcome { report: None }),
        Err(e) => Err(e),
    }
}

fn reference_values(p: &Propagator, curve: Curve, t_max: f64) -> Vec<f64> {
    (0..=TABLE_INTERVALS)
        .map(|k| {
            let t = t_max * k as f64 / TABLE_INTERVALS as f64;
            match curve {
                Curve::Ergotropy => p.ergotropy(t),
                Curve::TraceDistance => p.trace_distance(t),
            }
        })
        .collect()
}

fn finish(grid: &GridSpec, c: &ChannelSpec, t_max: f64, rows: Vec<(RegionPoint, u32, bool)>) -> RegionMap {
    let anomalies = rows
        .iter()
        .filter(|(p, _, _)| p.crossing_count > 0 && p.crossing_count % 2 == 0)
        .count();
    let tail_extensions = rows.iter().filter(|(_, e, _)| *e > 0).count();
    let unconverged = rows.iter().filter(|(_, _, ok)| !ok).count();
    RegionMap {
        grid: grid.clone(),
        channel: *c,
        t_max,
        points: rows.into_iter().map(|r| r.0).collect(),
        anomalies: if c.is_markovian() { 0 } else { anomalies },
        tail_extensions,
        unconverged,
    }
}

fn scan_qubit(ref_state: &BlochVector, c: &ChannelSpec, grid: &GridSpec, with_state: bool) -> Result<RegionMap> {
    grid.expect_plane("m_x", "m_z")?;
    ref_state.validate()?;
    if c.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: c.dim(),
        });
    }
    let m_y = grid.fixed.get("m_y").copied().unwrap_or(0.0);
    if m_y != 0.0 {
        return Err(Error::domain("qubit scans run in the m_y = 0 plane"));
    }
    let p_ref = c.propagator(&bloch_to_density(*ref_state)?)?;
    let e_ref = p_ref.ergotropy(0.0);
    if !(e_ref > 0.0) {
        return Err(Error::DegenerateReference("reference state has zero ergotropy".into()));
    }
    let t_max = c.default_horizon()?;
    let table = QubitTable::new(c, t_max);
    let ref_erg = reference_values(&p_ref, Curve::Ergotropy, t_max);
    let ref_dist = if with_state {
        reference_values(&p_ref, Curve::TraceDistance, t_max)
    } else {
        Vec::new()
    };
    let det = CrossingDetector::default();

    let rows = grid
        .points()
        .into_par_iter()
        .map(|(mx, mz)| -> Result<(RegionPoint, u32, bool)> {
            if mx * mx + mz * mz > 1.0 + BALL_TOL {
                return Ok((RegionPoint::invalid(mx, mz), 0, true));
            }
            let b = BlochVector { x: mx, y: 0.0, z: mz };
            let p = c.propagator(&bloch_to_density(b)?)?;
            let e = p.ergotropy(0.0);
            let m2 = mx * mx;
            let erg_pair = CachedPair {
                reference: &ref_erg,
                point: Cached::Qubit {
                    table: &table,
                    z0: mz,
                    m2,
                },
                curve: Curve::Ergotropy,
                slow: PropagatorPair {
                    first: &p_ref,
                    second: &p,
                    curve: Curve::Ergotropy,
                },
            };
            let erg = classify(&det, &erg_pair, &p_ref, &p, t_max)?;
            let mut point = RegionPoint {
                axis1: mx,
                axis2: mz,
                valid_state: true,
                crossing_count: 0,
                emc: false,
                state_mpemba: false,
                mpemba_parameter: 0.0,
                iso_flag: (e - e_ref).abs() < ISO_TOL * e_ref,
                degenerate: erg.report.is_none(),
            };
            let mut ext = 0;
            let mut ok = true;
            if let Some(r) = &erg.report {
                point.crossing_count = r.count;
                point.emc = r.count > 0;
                point.mpemba_parameter = r.mpemba_parameter;
                ext = r.tail_extensions;
                ok = r.converged;
            }
            if with_state {
                let dist_pair = CachedPair {
                    reference: &ref_dist,
                    point: Cached::Qubit {
                        table: &table,
                        z0: mz,
                        m2,
                    },
                    curve: Curve::TraceDistance,
                    slow: PropagatorPair {
                        first: &p_ref,
                        second: &p,
                        curve: Curve::TraceDistance,
                    },
                };
                if let Some(r) = classify(&det, &dist_pair, &p_ref, &p, t_max)?.report {
                    point.state_mpemba = r.count > 0;
                    ext = ext.max(r.tail_extensions);
                    ok &= r.converged;
                }
            }
            Ok((point, ext, ok))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(grid, c, t_max, rows))
}

/// Ergotropic-crossing classification of the `(m_x, m_z)` plane against a
/// qubit reference.
pub fn scan_emc_qubit(ref_state: &BlochVector, c: &ChannelSpec, grid: &GridSpec) -> Result<RegionMap> {
    scan_qubit(ref_state, c, grid, false)
}

/// Crossing counts under the Lorentzian bath. Even non-zero counts are
/// tallied in `anomalies`.
pub fn scan_crossing_count_nm(ref_state: &BlochVector, c: &ChannelSpec, grid: &GridSpec) -> Result<RegionMap> {
    if c.is_markovian() {
        return Err(Error::Precondition("expected the non-Markovian channel".into()));
    }
    scan_qubit(ref_state, c, grid, false)
}

fn scan_qutrit(ref_state: &QutritDiagonal, c: &QutritAdc, grid: &GridSpec, with_state: bool) -> Result<RegionMap> {
    grid.expect_plane("p1", "p2")?;
    ref_state.validate()?;
    let spec = ChannelSpec::QutritAdc(*c);
    let p_ref = spec.propagator(&ref_state.to_density()?)?;
    let e_ref = p_ref.ergotropy(0.0);
    if !(e_ref > 0.0) {
        return Err(Error::DegenerateReference("reference state has zero ergotropy".into()));
    }
    let t_max = spec.default_horizon()?;
    let table = QutritTable::new(c, t_max);
    let ref_erg = reference_values(&p_ref, Curve::Ergotropy, t_max);
    let ref_dist = if with_state {
        reference_values(&p_ref, Curve::TraceDistance, t_max)
    } else {
        Vec::new()
    };
    let det = CrossingDetector::default();

    let rows = grid
        .points()
        .into_par_iter()
        .map(|(p1, p2)| -> Result<(RegionPoint, u32, bool)> {
            if p1 < 0.0 || p2 < 0.0 || p1 + p2 > 1.0 + BALL_TOL {
                return Ok((RegionPoint::invalid(p1, p2), 0, true));
            }
            let q = QutritDiagonal { p1, p2 };
            let p = spec.propagator(&q.to_density()?)?;
            let e = p.ergotropy(0.0);
            let erg_pair = CachedPair {
                reference: &ref_erg,
                point: Cached::Qutrit { table: &table, q },
                curve: Curve::Ergotropy,
                slow: PropagatorPair {
                    first: &p_ref,
                    second: &p,
                    curve: Curve::Ergotropy,
                },
            };
            let erg = classify(&det, &erg_pair, &p_ref, &p, t_max)?;
            let mut point = RegionPoint {
                axis1: p1,
                axis2: p2,
                valid_state: true,
                crossing_count: 0,
                emc: false,
                state_mpemba: false,
                mpemba_parameter: 0.0,
                iso_flag: (e - e_ref).abs() < ISO_TOL * e_ref,
                degenerate: erg.report.is_none(),
            };
            let mut ok = true;
            if let Some(r) = &erg.report {
                point.crossing_count = r.count;
                point.emc = r.count > 0;
                point.mpemba_parameter = r.mpemba_parameter;
                ok = r.converged;
            }
            if with_state {
                let dist_pair = CachedPair {
                    reference: &ref_dist,
                    point: Cached::Qutrit { table: &table, q },
                    curve: Curve::TraceDistance,
                    slow: PropagatorPair {
                        first: &p_ref,
                        second: &p,
                        curve: Curve::TraceDistance,
                    },
                };
                if let Some(r) = classify(&det, &dist_pair, &p_ref, &p, t_max)?.report {
                    point.state_mpemba = r.count > 0;
                    ok &= r.converged;
                }
            }
            Ok((point, 0, ok))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(grid, &spec, t_max, rows))
}

/// Ergotropic-crossing classification of diagonal qutrit states over the
/// `(p1, p2)` simplex.
pub fn scan_qutrit_simplex(ref_state: &QutritDiagonal, c: &ChannelSpec, grid: &GridSpec) -> Result<RegionMap> {
    match c {
        ChannelSpec::QutritAdc(q) => scan_qutrit(ref_state, q, grid, false),
        _ => Err(Error::Precondition("expected the qutrit channel".into())),
    }
}

/// Reference for [`scan_state_vs_emc`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    Bloch(BlochVector),
    Qutrit(QutritDiagonal),
}

/// Ergotropic and trace-distance crossings side by side.
pub fn scan_state_vs_emc(reference: &Reference, c: &ChannelSpec, grid: &GridSpec) -> Result<RegionMap> {
    match (reference, c) {
        (Reference::Qutrit(q), ChannelSpec::QutritAdc(ch)) => scan_qutrit(q, ch, grid, true),
        (Reference::Bloch(b), _) if c.dim() == 2 => scan_qubit(b, c, grid, true),
        _ => Err(Error::Dimension {
            expected: c.dim(),
            found: match reference {
                Reference::Bloch(_) => 2,
                Reference::Qutrit(_) => 3,
            },
        }),
    }
}

/// Mpemba parameter for pairs of pure states with polar angles on the
/// `(theta1, theta2)` grid.
pub fn scan_mpemba_parameter_pure(c: &Gadc, grid: &GridSpec) -> Result<RegionMap> {
    grid.expect_plane("theta1", "theta2")?;
    let pi = std::f64::consts::PI;
    for ax in [&grid.axis1, &grid.axis2] {
        if ax.min < 0.0 || ax.max > pi + 1e-12 {
            return Err(Error::domain("polar angles must lie in [0, π]"));
        }
    }
    let spec = ChannelSpec::Gadc(*c);
    spec.validate()?;
    let t_max = spec.default_horizon()?;
    let rows = grid
        .points()
        .into_par_iter()
        .map(|(th1, th2)| -> Result<(RegionPoint, u32, bool)> {
            let (th1c, th2c) = (th1.min(pi), th2.min(pi));
            let mut point = RegionPoint {
                axis1: th1,
                axis2: th2,
                valid_state: true,
                crossing_count: 0,
                emc: false,
                state_mpemba: false,
                mpemba_parameter: 0.0,
                iso_flag: false,
                degenerate: false,
            };
            if th1c == th2c {
                point.degenerate = true;
                point.iso_flag = true;
                return Ok((point, 0, true));
            }
            let r1 = pure_qubit(th1c, 0.0)?;
            let r2 = pure_qubit(th2c, 0.0)?;
            match ergotropic_crossings(&r1, &r2, &spec, Some(t_max)) {
                Ok(r) => {
                    point.crossing_count = r.count;
                    point.emc = r.count > 0;
                    point.mpemba_parameter = r.mpemba_parameter;
                    Ok((point, r.tail_extensions, r.converged))
                }
                Err(Error::AmbiguousOrdering { .. }) => {
                    point.degenerate = true;
                    Ok((point, 0, true))
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(grid, &spec, t_max, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::NonMarkovAdc;

    fn qubit_grid(n: usize) -> GridSpec {
        GridSpec::new(Axis::new("m_x", -1.0, 1.0, n), Axis::new("m_z", -1.0, 1.0, n))
    }

    #[test]
    fn axis_values_are_inclusive() {
        let a = Axis::new("p1", 0.0, 1.0, 5);
        assert_eq!(a.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(Axis::new("p1", 1.0, 0.0, 5).validate().is_err());
        assert!(Axis::new("p1", 0.0, 1.0, 1).validate().is_err());
    }

    #[test]
    fn spherocylinder_is_crossing_free() {
        let c = ChannelSpec::Gadc(Gadc::new(0.01, 0.0, 1.0).unwrap());
        let r = BlochVector::new(0.5, 0.0, 0.2).unwrap();
        let map = scan_emc_qubit(&r, &c, &qubit_grid(41)).unwrap();
        let e_ref = crate::ergotropy::bloch_ergotropy(&r, 1.0);
        for p in map.points.iter().filter(|p| p.valid_state) {
            let b = BlochVector {
                x: p.axis1,
                y: 0.0,
                z: p.axis2,
            };
            let e = crate::ergotropy::bloch_ergotropy(&b, 1.0);
            if p.axis1.abs() <= 0.5 && e <= e_ref {
                assert!(!p.emc, "({}, {})", p.axis1, p.axis2);
            }
            if p.axis1.abs() > 0.5 && e < e_ref && !p.degenerate {
                assert_eq!(p.crossing_count, 1, "({}, {})", p.axis1, p.axis2);
            }
        }
        assert!(map.points.iter().any(|p| !p.valid_state));
        assert_eq!(map.unconverged, 0);
    }

    #[test]
    fn cached_scan_matches_direct_detection() {
        let c = ChannelSpec::Gadc(Gadc::new(0.05, 0.3, 1.0).unwrap());
        let r = BlochVector::new(0.3, 0.0, 0.4).unwrap();
        let map = scan_emc_qubit(&r, &c, &qubit_grid(9)).unwrap();
        let rho_ref = bloch_to_density(r).unwrap();
        for p in map.points.iter().filter(|p| p.valid_state && !p.degenerate) {
            let rho = bloch_to_density(BlochVector {
                x: p.axis1,
                y: 0.0,
                z: p.axis2,
            })
            .unwrap();
            let direct = ergotropic_crossings(&rho_ref, &rho, &c, None).unwrap();
            assert_eq!(direct.count, p.crossing_count);
        }
    }

    #[test]
    fn zero_ergotropy_reference_rejected() {
        let c = ChannelSpec::Gadc(Gadc::new(0.01, 0.0, 1.0).unwrap());
        let r = BlochVector::new(0.0, 0.0, -0.5).unwrap();
        assert!(matches!(
            scan_emc_qubit(&r, &c, &qubit_grid(5)),
            Err(Error::DegenerateReference(_))
        ));
    }

    #[test]
    fn qutrit_pair_point_is_emc() {
        let c = ChannelSpec::QutritAdc(QutritAdc::new(0.1, 1.0).unwrap());
        let grid = GridSpec::new(Axis::new("p1", 0.485, 0.585, 2), Axis::new("p2", 0.382, 0.482, 2));
        let r = QutritDiagonal::new(0.481, 0.103).unwrap();
        let map = scan_qutrit_simplex(&r, &c, &grid).unwrap();
        assert!(map.at(0, 0).emc);
    }

    #[test]
    fn qutrit_state_scan_never_shows_state_mpemba() {
        let c = ChannelSpec::QutritAdc(QutritAdc::new(0.1, 1.0).unwrap());
        let grid = GridSpec::new(Axis::new("p1", 0.0, 1.0, 21), Axis::new("p2", 0.0, 1.0, 21));
        let r = Reference::Qutrit(QutritDiagonal::new(0.481, 0.103).unwrap());
        let map = scan_state_vs_emc(&r, &c, &grid).unwrap();
        assert!(map.points.iter().all(|p| !p.state_mpemba));
        assert!(map.points.iter().any(|p| p.emc));
        assert!(map
            .points
            .iter()
            .filter(|p| p.valid_state)
            .all(|p| p.axis1 + p.axis2 <= 1.0 + 1e-12));
    }

    #[test]
    fn emc_implies_state_mpemba() {
        let c = ChannelSpec::Gadc(Gadc::new(0.01, 0.0, 1.0).unwrap());
        let r = Reference::Bloch(BlochVector::new(0.4, 0.0, 0.15).unwrap());
        let map = scan_state_vs_emc(&r, &c, &qubit_grid(41)).unwrap();
        assert!(map.points.iter().all(|p| !p.emc || p.state_mpemba));
        assert!(map.points.iter().any(|p| p.state_mpemba && !p.emc));
    }

    #[test]
    fn non_markov_map_has_only_odd_counts() {
        let c = ChannelSpec::NonMarkovAdc(NonMarkovAdc::new(1.0, 0.03, 0.1, 1.0).unwrap());
        let r = BlochVector::new(0.3, 0.0, 0.0).unwrap();
        let map = scan_crossing_count_nm(&r, &c, &qubit_grid(21)).unwrap();
        assert_eq!(map.anomalies, 0);
        assert!(map.points.iter().any(|p| p.crossing_count >= 3));
    }

    #[test]
    fn pure_map_vanishes_past_the_antidiagonal() {
        let c = Gadc::new(0.03, 0.0, 1.0).unwrap();
        let pi = std::f64::consts::PI;
        let grid = GridSpec::new(Axis::new("theta1", 0.0, pi, 9), Axis::new("theta2", 0.0, pi, 9));
        let map = scan_mpemba_parameter_pure(&c, &grid).unwrap();
        for p in &map.points {
            assert!((0.0..=1.0).contains(&p.mpemba_parameter));
            let zero_expected = p.axis1 + p.axis2 >= pi - 1e-12 || p.axis1 == p.axis2;
            assert_eq!(p.mpemba_parameter == 0.0, zero_expected, "({}, {})", p.axis1, p.axis2);
        }
    }
}
