//! Randomized property checks behind the `verify` command.

use ergoflux_core::channels::evolve_spectral;
use ergoflux_core::ergotropy::{bloch_ergotropy, ergotropy, pure_qubit};
use ergoflux_core::mpemba::{
    crossing_time_pure_gadc, ergotropic_crossings, predict_emc_gadc, predict_emc_pauli, verify_lemma_monotonicity,
    CrossingTime, Lemma, Prediction,
};
use ergoflux_core::state::{bloch_to_density, BlochVector, CMatrix, DensityMatrix};
use ergoflux_core::{ChannelSpec, Gadc, Pauli};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

/// Tolerance of the closed form against the spectral evolution.
pub const ORACLE_TOL: f64 = 1e-9;
/// Relative tolerance of detected against closed-form crossing times.
pub const CROSSING_TIME_RTOL: f64 = 1e-6;
const KEEP: usize = 16;

pub const PROPERTIES: [&str; 10] = [
    "L1",
    "L2",
    "L3",
    "L4",
    "oracle",
    "crossing_time",
    "predict_emc_gadc",
    "predict_emc_pauli",
    "nm_parity",
    "trace_preservation",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub property: String,
    pub passed: bool,
    pub samples: usize,
    /// Samples the property actually speaks about.
    pub covered: usize,
    pub violations: usize,
    pub worst: f64,
    pub violation_samples: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub channel: ChannelSpec,
    pub seed: u64,
    pub passed: bool,
    pub properties: Vec<PropertyResult>,
}

/// Uniform point of the Bloch ball, strictly inside.
pub fn random_bloch<R: Rng>(rng: &mut R) -> BlochVector {
    loop {
        let (x, y, z) = (
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if x * x + y * y + z * z < 0.998 {
            return BlochVector { x, y, z };
        }
    }
}

/// Uniform point of the x–z disk, strictly inside.
pub fn random_xz<R: Rng>(rng: &mut R) -> BlochVector {
    loop {
        let (x, z) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if x * x + z * z < 0.998 {
            return BlochVector { x, y: 0.0, z };
        }
    }
}

/// `AA†/Tr(AA†)` with Gaussian-free uniform entries; full rank almost surely.
pub fn random_density<R: Rng>(rng: &mut R, dim: usize) -> DensityMatrix {
    if dim == 2 {
        return bloch_to_density(random_bloch(rng)).expect("inside the ball");
    }
    let a = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let m = &a * a.adjoint();
    let tr = m.trace();
    DensityMatrix::with_tolerance(m / tr, 1e-10).expect("positive by construction")
}

/// Largest deviation between closed form and spectral evolution, in the
/// state entries and in the ergotropy.
pub fn oracle_error(c: &ChannelSpec, rho: &DensityMatrix, t: f64) -> CliResult<f64> {
    let l = c.liouvillian()?;
    let h = c.hamiltonian()?;
    let numeric = evolve_spectral(&l, rho, t)?;
    let p = c.propagator(rho)?;
    let closed = p.state(t)?;
    let d_state = (numeric.matrix() - closed.matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let d_erg = (ergotropy(&numeric, &h)? - p.ergotropy(t)).abs();
    Ok(d_state.max(d_erg))
}

/// Relative error of the detected crossing against the closed form, or
/// `None` when no finite crossing is predicted.
pub fn crossing_time_error(theta1: f64, theta2: f64, g: &Gadc) -> CliResult<Option<(f64, f64, usize)>> {
    let CrossingTime::Finite(want) = crossing_time_pure_gadc(theta1, theta2, g)? else {
        return Ok(None);
    };
    let rep = ergotropic_crossings(
        &pure_qubit(theta1, 0.0)?,
        &pure_qubit(theta2, 0.0)?,
        &ChannelSpec::Gadc(*g),
        None,
    )?;
    let got = rep.crossing_times.first().copied().unwrap_or(f64::NAN);
    let rel = if rep.count == 1 {
        (got - want).abs() / want
    } else {
        f64::INFINITY
    };
    Ok(Some((rel, want, rep.count)))
}

fn count_of(b1: &BlochVector, b2: &BlochVector, c: &ChannelSpec) -> CliResult<usize> {
    Ok(ergotropic_crossings(&bloch_to_density(*b1)?, &bloch_to_density(*b2)?, c, None)?.count)
}

/// Pauli pair in the upper x–z half disk, first member of larger ergotropy.
pub fn random_pauli_pair<R: Rng>(rng: &mut R) -> (BlochVector, BlochVector) {
    loop {
        let a = random_xz(rng);
        let b = random_xz(rng);
        if a.z <= 1e-6 || b.z <= 1e-6 {
            continue;
        }
        let (ea, eb) = (bloch_ergotropy(&a, 1.0), bloch_ergotropy(&b, 1.0));
        if (ea - eb).abs() < 1e-9 {
            continue;
        }
        return if ea > eb { (a, b) } else { (b, a) };
    }
}

/// Does the detector agree with a prediction? `None` when not covered.
pub fn prediction_agrees(p: Prediction, count: usize) -> Option<bool> {
    match p {
        Prediction::Crossing => Some(count == 1),
        Prediction::NoCrossing => Some(count == 0),
        Prediction::NotCovered => None,
    }
}

struct Outcome {
    covered: bool,
    error: f64,
    sample: Option<Value>,
}

impl Outcome {
    fn ok(error: f64) -> Self {
        Outcome {
            covered: true,
            error,
            sample: None,
        }
    }

    fn skip() -> Self {
        Outcome {
            covered: false,
            error: 0.0,
            sample: None,
        }
    }

    fn bad(error: f64, sample: Value) -> Self {
        Outcome {
            covered: true,
            error,
            sample: Some(sample),
        }
    }
}

fn tally(property: &str, outcomes: Vec<Outcome>) -> PropertyResult {
    let samples = outcomes.len();
    let covered = outcomes.iter().filter(|o| o.covered).count();
    let worst = outcomes.iter().map(|o| o.error).fold(0.0, f64::max);
    let bad: Vec<Value> = outcomes.into_iter().filter_map(|o| o.sample).collect();
    PropertyResult {
        property: property.to_string(),
        passed: bad.is_empty(),
        samples,
        covered,
        violations: bad.len(),
        worst,
        violation_samples: bad.into_iter().take(KEEP).collect(),
    }
}

fn not_applicable(property: &str, c: &ChannelSpec) -> CliError {
    CliError::Physics(format!(
        "property {property} does not apply to the {} channel",
        c.name()
    ))
}

/// Runs one named property with `samples` random draws.
pub fn check_property(property: &str, c: &ChannelSpec, samples: usize, seed: u64) -> CliResult<PropertyResult> {
    let stream = PROPERTIES
        .iter()
        .position(|p| *p == property)
        .ok_or_else(|| CliError::Schema {
            path: "properties".into(),
            message: format!("unknown property {property:?}"),
        })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);

    if let Ok(lemma) = property.parse::<Lemma>() {
        let r = verify_lemma_monotonicity(lemma, samples, c, seed).map_err(|e| match e {
            ergoflux_core::Error::Precondition(_) => not_applicable(property, c),
            e => e.into(),
        })?;
        return Ok(PropertyResult {
            property: property.to_string(),
            passed: r.violations == 0,
            samples: r.samples,
            covered: r.samples,
            violations: r.violations,
            worst: r.worst,
            violation_samples: r.violation_samples.iter().map(|v| json!(v)).collect(),
        });
    }

    let outcomes: Vec<Outcome> = match property {
        "oracle" => {
            let slow = c.slowest_rate();
            if !c.is_markovian() {
                return Err(not_applicable(property, c));
            }
            let draws: Vec<(DensityMatrix, f64)> = (0..samples)
                .map(|_| (random_density(&mut rng, c.dim()), rng.gen_range(0.0..5.0 / slow)))
                .collect();
            draws
                .par_iter()
                .map(|(rho, t)| {
                    let e = oracle_error(c, rho, *t)?;
                    Ok(if e < ORACLE_TOL {
                        Outcome::ok(e)
                    } else {
                        Outcome::bad(e, json!({"t": t, "error": e, "populations": rho.populations()}))
                    })
                })
                .collect::<CliResult<_>>()?
        }
        "trace_preservation" => {
            let draws: Vec<(DensityMatrix, f64)> = (0..samples)
                .map(|_| {
                    (
                        random_density(&mut rng, c.dim()),
                        rng.gen_range(0.0..c.default_horizon().unwrap_or(100.0)),
                    )
                })
                .collect();
            draws
                .par_iter()
                .map(|(rho, t)| {
                    let out = c.evolve(rho, *t)?;
                    let e = (out.matrix().trace() - Complex64::new(1.0, 0.0)).norm();
                    Ok(if e < 1e-12 {
                        Outcome::ok(e)
                    } else {
                        Outcome::bad(e, json!({"t": t, "error": e}))
                    })
                })
                .collect::<CliResult<_>>()?
        }
        "crossing_time" => {
            let ChannelSpec::Gadc(g) = c else {
                return Err(not_applicable(property, c));
            };
            let pi = std::f64::consts::PI;
            let mut draws = Vec::with_capacity(samples);
            while draws.len() < samples {
                let (t1, t2): (f64, f64) = (rng.gen_range(0.0..=pi), rng.gen_range(0.0..=pi));
                if t1.cos() + t2.cos() > 0.05 && (t1 - t2).abs() > 1e-3 {
                    draws.push((t1, t2));
                }
            }
            draws
                .par_iter()
                .map(|&(t1, t2)| {
                    Ok(match crossing_time_error(t1, t2, g)? {
                        Some((rel, _, _)) if rel < CROSSING_TIME_RTOL => Outcome::ok(rel),
                        Some((rel, want, count)) => Outcome::bad(
                            rel,
                            json!({"theta1": t1, "theta2": t2, "expected": want, "count": count, "relative_error": rel}),
                        ),
                        None => Outcome::bad(f64::INFINITY, json!({"theta1": t1, "theta2": t2, "expected": null})),
                    })
                })
                .collect::<CliResult<_>>()?
        }
        "predict_emc_gadc" => {
            if !matches!(c, ChannelSpec::Gadc(_)) {
                return Err(not_applicable(property, c));
            }
            let draws: Vec<_> = (0..samples)
                .map(|_| (random_xz(&mut rng), random_xz(&mut rng)))
                .collect();
            draws
                .par_iter()
                .map(|(b1, b2)| {
                    let p = predict_emc_gadc(b1, b2);
                    if p == Prediction::NotCovered {
                        return Ok(Outcome::skip());
                    }
                    let n = count_of(b1, b2, c)?;
                    Ok(match prediction_agrees(p, n) {
                        Some(true) => Outcome::ok(0.0),
                        _ => Outcome::bad(1.0, json!({"first": b1, "second": b2, "prediction": p, "count": n})),
                    })
                })
                .collect::<CliResult<_>>()?
        }
        "predict_emc_pauli" => {
            let ChannelSpec::Pauli(pauli) = c else {
                return Err(not_applicable(property, c));
            };
            let draws: Vec<_> = (0..samples).map(|_| random_pauli_pair(&mut rng)).collect();
            draws
                .par_iter()
                .map(|(b1, b2)| pauli_outcome(b1, b2, pauli, c))
                .collect::<CliResult<_>>()?
        }
        "nm_parity" => {
            if !matches!(c, ChannelSpec::NonMarkovAdc(_)) {
                return Err(not_applicable(property, c));
            }
            let mut draws = Vec::with_capacity(samples);
            while draws.len() < samples {
                let (a, b) = (random_xz(&mut rng), random_xz(&mut rng));
                let (ea, eb) = (bloch_ergotropy(&a, 1.0), bloch_ergotropy(&b, 1.0));
                if (ea - eb).abs() < 1e-6 || (a.x.abs() - b.x.abs()).abs() < 1e-6 {
                    continue;
                }
                draws.push(if ea > eb { (a, b) } else { (b, a) });
            }
            draws
                .par_iter()
                .map(|(b1, b2)| {
                    let n = count_of(b1, b2, c)?;
                    let odd_expected = b1.x.abs() < b2.x.abs();
                    let ok = (n == 0 || n % 2 == 1) && (n % 2 == 1) == odd_expected;
                    Ok(if ok {
                        Outcome::ok(0.0)
                    } else {
                        Outcome::bad(1.0, json!({"first": b1, "second": b2, "count": n}))
                    })
                })
                .collect::<CliResult<_>>()?
        }
        _ => unreachable!("lemmas handled above"),
    };
    Ok(tally(property, outcomes))
}

fn pauli_outcome(b1: &BlochVector, b2: &BlochVector, pauli: &Pauli, c: &ChannelSpec) -> CliResult<Outcome> {
    let p = predict_emc_pauli(b1, b2, pauli)?;
    if p == Prediction::NotCovered {
        return Ok(Outcome::skip());
    }
    let n = count_of(b1, b2, c)?;
    Ok(match prediction_agrees(p, n) {
        Some(true) => Outcome::ok(0.0),
        _ => Outcome::bad(1.0, json!({"first": b1, "second": b2, "prediction": p, "count": n})),
    })
}

pub fn verify(c: &ChannelSpec, properties: &[String], samples: usize, seed: u64) -> CliResult<VerifyReport> {
    let results = properties
        .iter()
        .map(|p| check_property(p, c, samples, seed))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(VerifyReport {
        channel: *c,
        seed,
        passed: results.iter().all(|r| r.passed),
        properties: results,
    })
}
