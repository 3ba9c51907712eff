//! Acceptance suite. Each criterion prints one PASS/FAIL line with its
//! wall time against the allowed budget; the process fails if any does.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use ergoflux::verify::{
    check_property, crossing_time_error, oracle_error, prediction_agrees, random_bloch, random_density,
    random_pauli_pair, CROSSING_TIME_RTOL, ORACLE_TOL,
};
use ergoflux_core::channels::gadc_bloch_evolve;
use ergoflux_core::ergotropy::{ergotropy, incoherent_vanish_time, pure_qubit, qutrit_table_ergotropy};
use ergoflux_core::mpemba::{
    crossing_time_pure_gadc, detect_crossings, ergotropic_crossings, predict_emc_pauli, state_mpemba_crossings,
    CrossingTime,
};
use ergoflux_core::region::{
    scan_crossing_count_nm, scan_emc_qubit, scan_mpemba_parameter_pure, scan_state_vs_emc, Axis, GridSpec, Reference,
};
use ergoflux_core::state::{bloch_to_density, BatteryHamiltonian, BlochVector};
use ergoflux_core::{ChannelSpec, Gadc, NonMarkovAdc, Pauli, QutritAdc, QutritDiagonal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, u64, fn() -> Outcome);

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(20240917);
    r.set_stream(stream);
    r
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn qubit_grid(n: usize) -> GridSpec {
    GridSpec::new(Axis::new("m_x", -1.0, 1.0, n), Axis::new("m_z", -1.0, 1.0, n))
}

fn bloch(x: f64, y: f64, z: f64) -> BlochVector {
    BlochVector { x, y, z }
}

// ---------------------------------------------------------------------------

fn oracle() -> Outcome {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    let mut total = 0;
    for kind in 0..4 {
        for _ in 0..500 {
            let h = r.gen_range(0.2..2.0);
            let c = match kind {
                0 => ChannelSpec::Gadc(Gadc::new(r.gen_range(0.01..1.0), 0.0, h).map_err(e)?),
                1 => ChannelSpec::Gadc(Gadc::new(r.gen_range(0.01..1.0), 0.5, h).map_err(e)?),
                2 => ChannelSpec::Pauli(Pauli::new(r.gen_range(0.001..0.5), r.gen_range(0.001..0.5), h).map_err(e)?),
                _ => ChannelSpec::QutritAdc(QutritAdc::new(r.gen_range(0.01..1.0), h).map_err(e)?),
            };
            let rho = random_density(&mut r, c.dim());
            let t = r.gen_range(0.0..30.0);
            let err = oracle_error(&c, &rho, t).map_err(e)?;
            ensure(err < ORACLE_TOL, || {
                format!("{} at t={t}: deviation {err:.3e}", c.name())
            })?;
            worst = worst.max(err);
            total += 1;
        }
    }
    Ok(format!("{total} triples, worst deviation {worst:.2e}"))
}

fn crossing_time() -> Outcome {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < 1000 {
        let (t1, t2): (f64, f64) = (r.gen_range(0.0..=PI), r.gen_range(0.0..=PI));
        let (g, n) = (r.gen_range(0.01..1.0), r.gen_range(0.0..2.0));
        if t1.cos() + t2.cos() <= 0.05 {
            continue;
        }
        let gadc = Gadc::new(g, n, 1.0).map_err(e)?;
        let Some((rel, want, count)) = crossing_time_error(t1, t2, &gadc).map_err(e)? else {
            return Err(format!("no finite closed-form time for ({t1}, {t2}, {g}, {n})"));
        };
        ensure(rel < CROSSING_TIME_RTOL, || {
            format!("({t1}, {t2}, γ={g}, n={n}): expected {want}, {count} crossings, relative error {rel:.2e}")
        })?;
        worst = worst.max(rel);
        done += 1;
    }
    let g = Gadc::new(0.1, 0.0, 1.0).map_err(e)?;
    let CrossingTime::Finite(t) = crossing_time_pure_gadc(0.0, PI / 2.0, &g).map_err(e)? else {
        return Err("worked point has no finite crossing".into());
    };
    ensure(
        (t - 10.0 * 1.6f64.ln()).abs() < 1e-12 && (t - 4.7000).abs() < 5e-5,
        || format!("t* = {t}"),
    )?;
    let c = ChannelSpec::Gadc(g);
    for th in [0.0, PI / 2.0] {
        let v = c.propagator(&pure_qubit(th, 0.0).map_err(e)?).map_err(e)?.ergotropy(t);
        ensure((v - 0.5).abs() < 1e-12, || format!("ergotropy at t* is {v}"))?;
    }
    Ok(format!("{done} samples, worst relative error {worst:.2e}; t* = {t:.4}"))
}

fn spherocylinder() -> Outcome {
    let c = ChannelSpec::Gadc(Gadc::new(0.1, 0.0, 1.0).map_err(e)?);
    let grid = qubit_grid(201);
    let mut r = rng(3);
    let (mut inside, mut swapped) = (0usize, 0usize);
    for k in 0..20 {
        let b_ref = loop {
            let b = random_bloch(&mut r);
            let b = bloch(b.x, 0.0, b.z);
            if b.x.abs() > 0.05 && ergoflux_core::ergotropy::bloch_ergotropy(&b, 1.0) > 0.05 {
                break b;
            }
        };
        let e_ref = ergoflux_core::ergotropy::bloch_ergotropy(&b_ref, 1.0);
        let map = scan_emc_qubit(&b_ref, &c, &grid).map_err(e)?;
        for p in map.points.iter().filter(|p| p.valid_state && !p.degenerate) {
            let b = bloch(p.axis1, 0.0, p.axis2);
            let en = ergoflux_core::ergotropy::bloch_ergotropy(&b, 1.0);
            let (dc, de) = (p.axis1.abs() - b_ref.x.abs(), en - e_ref);
            if dc <= 0.0 && de <= 0.0 {
                inside += 1;
                ensure(p.crossing_count == 0, || {
                    format!(
                        "reference {k} {b_ref:?}: point ({}, {}) inside has {} crossings",
                        p.axis1, p.axis2, p.crossing_count
                    )
                })?;
            }
            // strictly opposite orderings of ergotropy and coherence
            if dc.abs() > 1e-9 && de.abs() > 1e-9 && dc * de < 0.0 {
                swapped += 1;
                ensure(p.crossing_count == 1, || {
                    format!(
                        "reference {k} {b_ref:?}: point ({}, {}) has {} crossings, expected 1",
                        p.axis1, p.axis2, p.crossing_count
                    )
                })?;
            }
        }
    }
    let mut pure = 0;
    let n = 41;
    for i in 0..n {
        for j in 0..n {
            let (t1, t2) = (PI * i as f64 / (n - 1) as f64, PI * j as f64 / (n - 1) as f64);
            if i + j < n - 1 || i == j {
                continue;
            }
            let rep = ergotropic_crossings(
                &pure_qubit(t1, 0.0).map_err(e)?,
                &pure_qubit(t2, 0.0).map_err(e)?,
                &c,
                None,
            )
            .map_err(e)?;
            ensure(rep.count == 0, || {
                format!("pure pair ({t1}, {t2}) has {} crossings", rep.count)
            })?;
            pure += 1;
        }
    }
    Ok(format!("20 references: {inside} inside points with 0 crossings, {swapped} opposite-order points with 1, {pure} pure pairs with 0"))
}

fn pauli() -> Outcome {
    let mut r = rng(4);
    let mut covered = 0;
    for (gp, gz) in [(0.01, 0.001), (0.001, 0.01)] {
        let pc = Pauli::new(gp, gz, 1.0).map_err(e)?;
        let c = ChannelSpec::Pauli(pc);
        for _ in 0..1000 {
            let (b1, b2) = random_pauli_pair(&mut r);
            let p = predict_emc_pauli(&b1, &b2, &pc).map_err(e)?;
            let Some(_) = prediction_agrees(p, 0) else { continue };
            let n = ergotropic_crossings(
                &bloch_to_density(b1).map_err(e)?,
                &bloch_to_density(b2).map_err(e)?,
                &c,
                None,
            )
            .map_err(e)?
            .count;
            ensure(prediction_agrees(p, n) == Some(true), || {
                format!("γ⊥={gp}, γz={gz}: {b1:?} vs {b2:?} predicted {p:?}, detected {n}")
            })?;
            covered += 1;
        }
    }
    let c = ChannelSpec::Pauli(Pauli::new(0.01, 0.001, 1.0).map_err(e)?);
    let n = ergotropic_crossings(
        &bloch_to_density(bloch(0.5, 0.0, 0.5)).map_err(e)?,
        &bloch_to_density(bloch(0.8, 0.0, 0.1)).map_err(e)?,
        &c,
        None,
    )
    .map_err(e)?
    .count;
    ensure(n == 1, || format!("worked Pauli pair has {n} crossings"))?;
    Ok(format!("{covered} covered pairs agree; worked pair crosses once"))
}

fn incoherent() -> Outcome {
    let g = Gadc::new(0.1, 0.0, 1.0).map_err(e)?;
    let c = ChannelSpec::Gadc(g);
    let mut r = rng(5);
    let states: Vec<BlochVector> = (0..100).map(|_| random_bloch(&mut r)).collect();
    let props = states
        .iter()
        .map(|b| c.propagator(&bloch_to_density(*b).map_err(e)?).map_err(e))
        .collect::<Result<Vec<_>, _>>()?;
    let t_max = c.default_horizon().map_err(e)?;
    for (b, p) in states.iter().zip(&props) {
        for k in 0..=2000 {
            let t = t_max * k as f64 / 2000.0;
            let want = 2.0 * gadc_bloch_evolve(b, &g, t).z.max(0.0);
            let got = p.breakdown(t).incoherent;
            ensure((got - want).abs() < 1e-12, || {
                format!("{b:?} at t={t}: {got} vs {want}")
            })?;
        }
        // vanish time by bisection on the incoherent part
        let t_s = incoherent_vanish_time(b.z, &g).map_err(e)?;
        if b.z > 0.0 {
            let (mut lo, mut hi) = (0.0, t_max);
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if p.breakdown(mid).incoherent > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            ensure((lo - t_s).abs() < 1e-8, || {
                format!("{b:?}: vanish at {lo}, formula {t_s}")
            })?;
        } else {
            ensure(t_s == 0.0 && p.breakdown(0.0).incoherent == 0.0, || {
                format!("{b:?}: t_s = {t_s}")
            })?;
        }
    }
    let (mut emc, mut pairs) = (0, 0);
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            let (pi, pj) = (&props[i], &props[j]);
            let (bi, bj) = (pi.breakdown(0.0), pj.breakdown(0.0));
            if (bi.incoherent - bj.incoherent).abs() > 1e-12 {
                let rep = detect_crossings(
                    |t| pi.breakdown(t).incoherent,
                    |t| pj.breakdown(t).incoherent,
                    t_max,
                    1e-12 * t_max,
                )
                .map_err(e)?;
                ensure(rep.count == 0, || {
                    format!("incoherent curves of {i} and {j} cross {} times", rep.count)
                })?;
                pairs += 1;
            }
            let rho_i = bloch_to_density(states[i]).map_err(e)?;
            let rho_j = bloch_to_density(states[j]).map_err(e)?;
            let rep = ergotropic_crossings(&rho_i, &rho_j, &c, None).map_err(e)?;
            if rep.count == 0 {
                continue;
            }
            emc += 1;
            let t_star = rep.crossing_times[0];
            // the crossing is located to ~1e-12·t_max; an exchange that
            // coincides with it counts
            let t_end = t_star + 1e-6 * t_star.max(1.0);
            let opposite = (bi.coherent - bj.coherent) * (bi.incoherent - bj.incoherent) < 0.0;
            let exchange = opposite
                || detect_crossings(
                    |t| pi.breakdown(t).coherent,
                    |t| pj.breakdown(t).coherent,
                    t_end,
                    1e-12 * t_end,
                )
                .map_err(e)?
                .count
                    > 0;
            ensure(exchange, || {
                format!("pair {i}, {j} crosses at {t_star} without a coherent exchange")
            })?;
        }
    }
    Ok(format!(
        "100 states; {pairs} incoherent pairs never cross; {emc} crossing pairs explained"
    ))
}

fn qutrit() -> Outcome {
    let h = BatteryHamiltonian::qutrit(1.0).map_err(e)?;
    let n = 200;
    let mut worst = 0.0f64;
    let mut count = 0;
    for i in 0..n {
        for j in 0..n - i {
            let (p1, p2) = (i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64);
            let q = QutritDiagonal::new(p1, p2.min(1.0 - p1)).map_err(e)?;
            let d = (qutrit_table_ergotropy(&q, 1.0) - ergotropy(&q.to_density().map_err(e)?, &h).map_err(e)?).abs();
            ensure(d < 1e-12, || format!("({p1}, {p2}): table and eigen differ by {d:.2e}"))?;
            worst = worst.max(d);
            count += 1;
        }
    }
    let c = ChannelSpec::QutritAdc(QutritAdc::new(0.1, 1.0).map_err(e)?);
    let a = QutritDiagonal::new(0.481, 0.103).map_err(e)?.to_density().map_err(e)?;
    let b = QutritDiagonal::new(0.485, 0.382).map_err(e)?.to_density().map_err(e)?;
    let erg = ergotropic_crossings(&a, &b, &c, None).map_err(e)?.count;
    let dist = state_mpemba_crossings(&a, &b, &c, None).map_err(e)?.count;
    ensure(erg == 1 && dist == 0, || {
        format!("worked qutrit pair: {erg} ergotropic, {dist} trace-distance crossings")
    })?;
    Ok(format!(
        "{count} simplex points, worst {worst:.1e}; worked pair 1 ergotropic, 0 trace-distance crossings"
    ))
}

fn non_markov() -> Outcome {
    let c = ChannelSpec::NonMarkovAdc(NonMarkovAdc::new(0.3, 0.03, 0.13, 1.0).map_err(e)?);
    let parity = check_property("nm_parity", &c, 200, 7).map_err(e)?;
    ensure(parity.passed, || {
        format!("parity violations: {:?}", parity.violation_samples)
    })?;
    let mut lemmas = Vec::new();
    for l in ["L3", "L4"] {
        let rep = check_property(l, &c, 1000, 7).map_err(e)?;
        ensure(rep.violations == 0, || format!("{l}: {} violations", rep.violations))?;
        lemmas.push(rep.samples);
    }
    let scan_c = ChannelSpec::NonMarkovAdc(NonMarkovAdc::new(1.0, 0.03, 0.1, 1.0).map_err(e)?);
    let map = scan_crossing_count_nm(&bloch(0.3, 0.0, 0.0), &scan_c, &qubit_grid(101)).map_err(e)?;
    let mut counts: Vec<usize> = map
        .points
        .iter()
        .filter(|p| p.valid_state)
        .map(|p| p.crossing_count)
        .collect();
    counts.sort_unstable();
    counts.dedup();
    ensure([1, 3, 5].iter().all(|k| counts.contains(k)), || {
        format!("scan counts {counts:?}")
    })?;
    Ok(format!(
        "200 pairs with odd nonzero counts; L3/L4 on {lemmas:?} samples clean; scan counts {counts:?}"
    ))
}

fn state_vs_emc() -> Outcome {
    let c = ChannelSpec::Gadc(Gadc::new(0.01, 0.0, 1.0).map_err(e)?);
    let map = scan_state_vs_emc(&Reference::Bloch(bloch(0.4, 0.0, 0.15)), &c, &qubit_grid(201)).map_err(e)?;
    let valid = || map.points.iter().filter(|p| p.valid_state && !p.degenerate);
    if let Some(p) = valid().find(|p| p.emc && !p.state_mpemba) {
        return Err(format!(
            "({}, {}) has an ergotropic crossing without a trace-distance crossing",
            p.axis1, p.axis2
        ));
    }
    let emc = valid().filter(|p| p.emc).count();
    let only_state = valid().filter(|p| p.state_mpemba && !p.emc).count();
    ensure(only_state > 0, || "no state-only Mpemba point".into())?;
    Ok(format!(
        "{emc} ergotropic points all state-Mpemba; {only_state} state-only points"
    ))
}

fn theta_map() -> Outcome {
    let g = Gadc::new(0.03, 0.0, 1.0).map_err(e)?;
    let n = 101;
    let grid = GridSpec::new(Axis::new("theta1", 0.0, PI, n), Axis::new("theta2", 0.0, PI, n));
    let map = scan_mpemba_parameter_pure(&g, &grid).map_err(e)?;
    let mut positive = 0;
    for i in 0..n {
        for j in 0..n {
            let p = map.at(i, j);
            let o = p.mpemba_parameter;
            ensure((0.0..=1.0).contains(&o), || {
                format!("𝒪 = {o} at ({}, {})", p.axis1, p.axis2)
            })?;
            let zero_set = i + j >= n - 1 || i == j;
            ensure((o == 0.0) == zero_set, || {
                format!("𝒪 = {o} at ({}, {}), zero set: {zero_set}", p.axis1, p.axis2)
            })?;
            positive += usize::from(o > 0.0);
        }
    }
    Ok(format!("{}x{n} map, {positive} points with 𝒪 > 0, zero set exact", n))
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn read_tree(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map_err(e)?
        .map(|d| {
            let p = d.map_err(e)?.path();
            Ok((
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).map_err(e)?,
            ))
        })
        .collect::<Result<_, String>>()?;
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let mut configs: Vec<PathBuf> = std::fs::read_dir(repo_root().join("configs"))
        .map_err(e)?
        .filter_map(|d| d.ok().map(|d| d.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    configs.sort();
    ensure(!configs.is_empty(), || "no shipped configs".into())?;
    let tmp = tempfile::tempdir().map_err(e)?;
    let mut files = 0;
    for cfg in &configs {
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(cfg).map_err(e)?).map_err(e)?;
        let cmd = v["command"].as_str().ok_or("config without command")?;
        let stem = cfg.file_stem().unwrap().to_string_lossy().into_owned();
        let mut runs = Vec::new();
        for k in 0..2 {
            let out = tmp.path().join(format!("{stem}_{k}"));
            let o = Command::new(env!("CARGO_BIN_EXE_ergoflux"))
                .args([cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
                .output()
                .map_err(e)?;
            ensure(o.status.success(), || {
                format!("{stem}: {}", String::from_utf8_lossy(&o.stderr))
            })?;
            runs.push(read_tree(&out)?);
        }
        ensure(runs[0] == runs[1] && !runs[0].is_empty(), || {
            format!("{stem}: outputs differ between runs")
        })?;
        files += runs[0].len();
    }
    Ok(format!("{} configs, {files} artifacts byte-identical", configs.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1", "closed form vs spectral evolution", 30, oracle),
        ("2", "pure-state crossing time", 20, crossing_time),
        ("3", "spherocylinder and coherence ordering", 120, spherocylinder),
        ("4", "Pauli crossing prediction", 60, pauli),
        ("5", "incoherent ergotropy under amplitude damping", 60, incoherent),
        ("6", "qutrit table ergotropy and worked pair", 60, qutrit),
        ("7", "Lorentzian bath parity and lemmas", 180, non_markov),
        ("8", "ergotropic implies state Mpemba", 120, state_vs_emc),
        ("9", "Mpemba parameter over pure pairs", 120, theta_map),
        ("10", "byte-identical reruns of shipped configs", 600, determinism),
    ];
    let mut failed = 0;
    for (id, name, limit, f) in criteria {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let took = start.elapsed();
        let res = match res {
            Ok(m) if took > Duration::from_secs(limit) => Err(format!("over time budget; {m}")),
            r => r,
        };
        let (tag, msg) = match &res {
            Ok(m) => ("PASS", m),
            Err(m) => ("FAIL", m),
        };
        println!(
            "{tag} criterion {id:>2} {name} [{:.1}s / {limit}s]: {msg}",
            took.as_secs_f64()
        );
        failed += usize::from(res.is_err());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
