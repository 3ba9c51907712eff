//! Command dispatch: one function per subcommand, each returning the
//! paths it wrote.

use std::path::{Path, PathBuf};

use ergoflux_core::mpemba::{
    crossing_time_pure_gadc, ergotropic_crossings, predict_emc_gadc, predict_emc_pauli, state_mpemba_crossings,
    trajectory, CrossingReport, CrossingTime, Prediction,
};
use ergoflux_core::region::{
    scan_crossing_count_nm, scan_emc_qubit, scan_mpemba_parameter_pure, scan_qutrit_simplex, scan_state_vs_emc,
    GridSpec, Reference, RegionMap,
};
use ergoflux_core::state::{density_to_bloch, BlochVector, DensityMatrix, QutritDiagonal};
use ergoflux_core::ChannelSpec;
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{Command, Format, RunConfig, ScanKind, StateSpec};
use crate::error::{CliError, CliResult};
use crate::output::{to_json, write_atomic, Cell, Csv};
use crate::verify::verify;

pub fn run(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    match cfg.command()? {
        Command::Traj => run_traj(cfg),
        Command::Crossings => run_crossings(cfg),
        Command::Region => run_region(cfg),
        Command::Verify => run_verify(cfg),
        Command::Spectrum => run_spectrum(cfg),
    }
}

fn horizon(cfg: &RunConfig, c: &ChannelSpec) -> CliResult<f64> {
    match cfg.horizon {
        Some(h) => Ok(h),
        None => Ok(c.default_horizon()?),
    }
}

fn emit(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> CliResult<()> {
    let p = dir.join(name);
    write_atomic(&p, contents)?;
    written.push(p);
    Ok(())
}

pub const TRAJ_COLUMNS: [&str; 5] = [
    "t",
    "ergotropy",
    "ergotropy_incoherent",
    "ergotropy_coherent",
    "trace_distance",
];

fn run_traj(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let c = cfg.channel_spec()?;
    let t_max = horizon(cfg, &c)?;
    let mut written = Vec::new();
    for (k, rho) in cfg.densities()?.iter().enumerate() {
        let tr = trajectory(rho, &c, t_max, cfg.n_points)?;
        match cfg.output.format {
            Format::Csv => {
                let mut csv = Csv::new(&TRAJ_COLUMNS);
                for i in 0..tr.len() {
                    csv.row(&[
                        Cell::Num(tr.times[i]),
                        Cell::Num(tr.ergotropy_total[i]),
                        Cell::Num(tr.ergotropy_incoherent[i]),
                        Cell::Num(tr.ergotropy_coherent[i]),
                        Cell::Num(tr.trace_distance[i]),
                    ]);
                }
                emit(
                    &cfg.output.path,
                    &format!("trajectory_{k}.csv"),
                    &csv.into_string(),
                    &mut written,
                )?;
            }
            Format::Json => {
                #[derive(Serialize)]
                struct Out<'a> {
                    channel: &'a ChannelSpec,
                    state: &'a StateSpec,
                    t_max: f64,
                    trajectory: &'a ergoflux_core::mpemba::Trajectory,
                }
                let out = Out {
                    channel: &c,
                    state: &cfg.states[k],
                    t_max,
                    trajectory: &tr,
                };
                emit(
                    &cfg.output.path,
                    &format!("trajectory_{k}.json"),
                    &to_json(&out)?,
                    &mut written,
                )?;
            }
        }
    }
    Ok(written)
}

#[derive(Debug, Serialize)]
pub struct CrossingsOutput {
    pub channel: ChannelSpec,
    pub states: Vec<StateSpec>,
    /// Ordered so that `first` has the larger initial ergotropy.
    pub swapped: bool,
    pub ergotropic: CrossingReport,
    pub state_mpemba: CrossingReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prediction: Option<Prediction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_time: Option<CrossingTime>,
}

fn initial_ergotropy(rho: &DensityMatrix, c: &ChannelSpec) -> CliResult<f64> {
    Ok(c.propagator(rho)?.ergotropy(0.0))
}

fn run_crossings(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let c = cfg.channel_spec()?;
    let rhos = cfg.densities()?;
    let swapped = initial_ergotropy(&rhos[1], &c)? > initial_ergotropy(&rhos[0], &c)?;
    let (i1, i2) = if swapped { (1, 0) } else { (0, 1) };
    let (r1, r2) = (&rhos[i1], &rhos[i2]);
    let ergotropic = ergotropic_crossings(r1, r2, &c, cfg.horizon)?;
    let state_mpemba = state_mpemba_crossings(r1, r2, &c, cfg.horizon)?;
    let prediction = match c {
        ChannelSpec::Gadc(_) => Some(predict_emc_gadc(&density_to_bloch(r1)?, &density_to_bloch(r2)?)),
        ChannelSpec::Pauli(p) => predict_emc_pauli(&density_to_bloch(r1)?, &density_to_bloch(r2)?, &p).ok(),
        _ => None,
    };
    let closed_form_time = match (c, cfg.states[i1], cfg.states[i2]) {
        (ChannelSpec::Gadc(g), StateSpec::Pure([t1, p1]), StateSpec::Pure([t2, p2])) if p1 == p2 => {
            Some(crossing_time_pure_gadc(t1, t2, &g)?)
        }
        _ => None,
    };
    let out = CrossingsOutput {
        channel: c,
        states: vec![cfg.states[i1], cfg.states[i2]],
        swapped,
        ergotropic,
        state_mpemba,
        prediction,
        closed_form_time,
    };
    let mut written = Vec::new();
    emit(&cfg.output.path, "crossings.json", &to_json(&out)?, &mut written)?;
    Ok(written)
}

fn reference(cfg: &RunConfig) -> CliResult<Reference> {
    let rho = cfg.states[0].to_density()?;
    Ok(match cfg.states[0] {
        StateSpec::Qutrit([p1, p2]) => Reference::Qutrit(QutritDiagonal::new(p1, p2)?),
        _ => Reference::Bloch(density_to_bloch(&rho)?),
    })
}

fn bloch_ref(r: &Reference) -> CliResult<BlochVector> {
    match r {
        Reference::Bloch(b) => Ok(*b),
        Reference::Qutrit(_) => Err(CliError::Physics("this scan needs a qubit reference".into())),
    }
}

/// Runs the configured sweep.
pub fn scan(cfg: &RunConfig) -> CliResult<RegionMap> {
    let c = cfg.channel_spec()?;
    let grid: &GridSpec = cfg.grid.as_ref().ok_or_else(|| CliError::Schema {
        path: "grid".into(),
        message: "region runs need a grid".into(),
    })?;
    let kind = cfg.scan_kind(&c);
    let map = match kind {
        ScanKind::MpembaParameter => match c {
            ChannelSpec::Gadc(g) => scan_mpemba_parameter_pure(&g, grid)?,
            _ => {
                return Err(CliError::Physics(
                    "the mpemba_parameter scan needs the gadc channel".into(),
                ))
            }
        },
        ScanKind::Emc => scan_emc_qubit(&bloch_ref(&reference(cfg)?)?, &c, grid)?,
        ScanKind::CrossingCount => scan_crossing_count_nm(&bloch_ref(&reference(cfg)?)?, &c, grid)?,
        ScanKind::QutritSimplex => match reference(cfg)? {
            Reference::Qutrit(q) => scan_qutrit_simplex(&q, &c, grid)?,
            Reference::Bloch(_) => {
                return Err(CliError::Physics(
                    "the qutrit_simplex scan needs a qutrit reference".into(),
                ))
            }
        },
        ScanKind::StateVsEmc => scan_state_vs_emc(&reference(cfg)?, &c, grid)?,
    };
    Ok(map)
}

pub const REGION_COLUMNS: [&str; 8] = [
    "axis1",
    "axis2",
    "valid",
    "crossing_count",
    "emc",
    "state_mpemba",
    "mpemba_parameter",
    "iso_flag",
];

#[derive(Debug, Serialize)]
struct RegionMeta<'a> {
    scan: ScanKind,
    channel: &'a ChannelSpec,
    grid: &'a GridSpec,
    reference: Option<StateSpec>,
    t_max: f64,
    points: usize,
    valid_points: usize,
    emc_points: usize,
    state_mpemba_points: usize,
    degenerate_points: usize,
    anomalies: usize,
    tail_extensions: usize,
    unconverged: usize,
}

fn run_region(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let map = scan(cfg)?;
    let mut written = Vec::new();
    let count = |f: fn(&ergoflux_core::region::RegionPoint) -> bool| map.points.iter().filter(|p| f(p)).count();
    let meta = RegionMeta {
        scan: cfg.scan_kind(&map.channel),
        channel: &map.channel,
        grid: &map.grid,
        reference: cfg.states.first().copied(),
        t_max: map.t_max,
        points: map.points.len(),
        valid_points: count(|p| p.valid_state),
        emc_points: count(|p| p.emc),
        state_mpemba_points: count(|p| p.state_mpemba),
        degenerate_points: count(|p| p.degenerate),
        anomalies: map.anomalies,
        tail_extensions: map.tail_extensions,
        unconverged: map.unconverged,
    };
    match cfg.output.format {
        Format::Csv => {
            let mut csv = Csv::new(&REGION_COLUMNS);
            for p in &map.points {
                csv.row(&[
                    Cell::Num(p.axis1),
                    Cell::Num(p.axis2),
                    Cell::Bool(p.valid_state),
                    Cell::Int(p.crossing_count),
                    Cell::Bool(p.emc),
                    Cell::Bool(p.state_mpemba),
                    Cell::Num(p.mpemba_parameter),
                    Cell::Bool(p.iso_flag),
                ]);
            }
            emit(&cfg.output.path, "region.csv", &csv.into_string(), &mut written)?;
        }
        Format::Json => emit(&cfg.output.path, "region.json", &to_json(&map.points)?, &mut written)?,
    }
    emit(&cfg.output.path, "region_meta.json", &to_json(&meta)?, &mut written)?;
    Ok(written)
}

fn run_verify(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let c = cfg.channel_spec()?;
    let report = verify(&c, &cfg.properties, cfg.samples, cfg.seed)?;
    let mut written = Vec::new();
    emit(&cfg.output.path, "verify.json", &to_json(&report)?, &mut written)?;
    Ok(written)
}

/// Complex matrix as rows of `[re, im]` pairs.
fn complex_rows(m: &ergoflux_core::state::CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Debug, Serialize)]
struct Mode {
    eigenvalue: [f64; 2],
    right: Vec<Vec<[f64; 2]>>,
    left: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize)]
struct SpectrumOutput {
    channel: ChannelSpec,
    dim: usize,
    diagonalizable: bool,
    condition_number: f64,
    zero_modes: usize,
    spectral_gap: Option<f64>,
    steady_state: Option<Vec<Vec<[f64; 2]>>>,
    modes: Vec<Mode>,
}

fn run_spectrum(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let c = cfg.channel_spec()?;
    let l = c.liouvillian()?;
    let modes = l
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(k, lam)| Mode {
            eigenvalue: pair(lam),
            right: complex_rows(&l.right_eigenmatrix(k)),
            left: complex_rows(&l.left_eigenmatrix(k)),
        })
        .collect();
    let out = SpectrumOutput {
        channel: c,
        dim: l.dim(),
        diagonalizable: l.is_diagonalizable(),
        condition_number: l.condition_number(),
        zero_modes: l.zero_modes(),
        spectral_gap: l.spectral_gap(),
        steady_state: l.steady_state().map(|s| complex_rows(s.matrix())),
        modes,
    };
    let mut written = Vec::new();
    emit(&cfg.output.path, "spectrum.json", &to_json(&out)?, &mut written)?;
    Ok(written)
}
