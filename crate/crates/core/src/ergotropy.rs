//! Ergotropy, passive states and the coherent/incoherent split.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::Gadc;
use crate::error::{Error, Result};
use crate::state::{
    check_dims, eigen_sorted, snap, BatteryHamiltonian, BlochVector, CMatrix, DensityMatrix, QutritDiagonal, BALL_TOL,
};

/// Total ergotropy split into the part reachable without touching
/// coherences and the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErgotropyBreakdown {
    pub total: f64,
    pub incoherent: f64,
    pub coherent: f64,
}

/// `Tr[ρH] − Σ p_i ε_i` with populations descending against ascending
/// energies.
pub fn ergotropy(rho: &DensityMatrix, h: &BatteryHamiltonian) -> Result<f64> {
    check_dims(h.dim(), rho.dim())?;
    let (p, _) = eigen_sorted(rho);
    let passive: f64 = p.iter().zip(h.eigenvalues()).map(|(p, e)| p * e).sum();
    Ok((h.mean_energy(rho)? - passive).max(0.0))
}

/// `Σ p_i |ε_i⟩⟨ε_i|`, the minimum-energy state unitarily reachable from `ρ`.
pub fn passive_state(rho: &DensityMatrix, h: &BatteryHamiltonian) -> Result<DensityMatrix> {
    check_dims(h.dim(), rho.dim())?;
    let (p, _) = eigen_sorted(rho);
    let u = h.eigenbasis();
    let d = rho.dim();
    let mut m = CMatrix::zeros(d, d);
    for (k, pk) in p.iter().enumerate() {
        let col = u.column(k);
        m += (col * col.adjoint()).scale(pk.max(0.0));
    }
    DensityMatrix::with_tolerance(m, 1e-10)
}

/// Energy-basis dephasing `Δ(ρ)`.
pub fn dephase(rho: &DensityMatrix, h: &BatteryHamiltonian) -> Result<DensityMatrix> {
    let in_basis = h.to_energy_basis(rho)?;
    let d = rho.dim();
    let u = h.eigenbasis();
    let mut m = CMatrix::zeros(d, d);
    for k in 0..d {
        let col = u.column(k);
        m += (col * col.adjoint()) * in_basis[(k, k)];
    }
    DensityMatrix::with_tolerance(m, 1e-10)
}

/// Incoherent part is the ergotropy of `Δ(ρ)`; the coherent part is the
/// remainder.
pub fn ergotropy_breakdown(rho: &DensityMatrix, h: &BatteryHamiltonian) -> Result<ErgotropyBreakdown> {
    let total = ergotropy(rho, h)?;
    let incoherent = diagonal_ergotropy(&h.to_energy_basis(rho)?, h).min(total);
    Ok(ErgotropyBreakdown {
        total,
        incoherent,
        coherent: (total - incoherent).max(0.0),
    })
}

/// Ergotropy of the diagonal of `m`, which is expressed in the ascending
/// energy basis of `h`.
fn diagonal_ergotropy(m: &CMatrix, h: &BatteryHamiltonian) -> f64 {
    let eps = h.eigenvalues();
    let pops: Vec<f64> = (0..m.nrows()).map(|i| m[(i, i)].re).collect();
    let energy: f64 = pops.iter().zip(eps).map(|(p, e)| p * e).sum();
    let mut sorted = pops.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let passive: f64 = sorted.iter().zip(eps).map(|(p, e)| p * e).sum();
    (energy - passive).max(0.0)
}

/// `h (z + √(z² + r²))`, evaluated without cancellation when `z < 0`.
///
/// `z` is the longitudinal magnetization and `r2` the squared transverse
/// magnetization of a qubit.
pub fn qubit_ergotropy(z: f64, r2: f64, h_z: f64) -> f64 {
    let q = (z * z + r2).sqrt();
    let e = if z >= 0.0 {
        z + q
    } else if q - z > 0.0 {
        r2 / (q - z)
    } else {
        0.0
    };
    h_z * e
}

/// Closed-form qubit ergotropy `h_z (m_z + |m|)`.
pub fn bloch_ergotropy(b: &BlochVector, h_z: f64) -> f64 {
    qubit_ergotropy(b.z, b.transverse_sqr(), h_z)
}

/// Closed-form qubit split: incoherent `2 h_z max(0, m_z)`, coherent the rest.
pub fn bloch_breakdown(z: f64, r2: f64, h_z: f64) -> ErgotropyBreakdown {
    let total = qubit_ergotropy(z, r2, h_z);
    let incoherent = (2.0 * h_z * z.max(0.0)).min(total);
    ErgotropyBreakdown {
        total,
        incoherent,
        coherent: (total - incoherent).max(0.0),
    }
}

/// Time after which the incoherent ergotropy of a qubit relaxing under
/// the generalized amplitude damping channel stays at zero,
/// `ln(1 + m_z a) / (a γ)` with `a = 1 + 2n`. Returns 0 when `m_z <= 0`.
pub fn incoherent_vanish_time(m_z: f64, c: &Gadc) -> Result<f64> {
    let a = c.a();
    let arg = 1.0 + m_z * a;
    if !(arg > 0.0) {
        return Err(Error::domain(format!("1 + m_z (1 + 2n) = {arg} must be positive")));
    }
    if m_z <= 0.0 {
        return Ok(0.0);
    }
    if c.gamma == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(arg.ln() / (a * c.gamma))
}

/// Non-negative `m_x` such that `(m_x, 0, m_z)` has ergotropy `e0`
/// (with `h_z = 1`): `m_x² = e0² − 2 e0 m_z`.
pub fn iso_ergotropic_mx(e0: f64, m_z: f64) -> Result<f64> {
    if !(e0 >= 0.0) {
        return Err(Error::domain(format!("ergotropy {e0} must be non-negative")));
    }
    let radicand = e0 * e0 - 2.0 * e0 * m_z;
    if radicand < -BALL_TOL {
        return Err(Error::domain(format!("no real m_x: e0² − 2 e0 m_z = {radicand}")));
    }
    let mx = radicand.max(0.0).sqrt();
    if mx * mx + m_z * m_z > 1.0 + BALL_TOL {
        return Err(Error::domain(format!("({mx}, 0, {m_z}) lies outside the Bloch ball")));
    }
    Ok(mx)
}

/// Piecewise ergotropy of a diagonal qutrit for the six population
/// orderings, scaled by `h_z`. Ties go to the first matching row.
pub fn qutrit_table_ergotropy(q: &QutritDiagonal, h_z: f64) -> f64 {
    let (p1, p2) = (q.p1, q.p2);
    let p3 = q.p3();
    let e = if p1 <= p2 && p2 <= p3 {
        0.0
    } else if p1 <= p3 && p3 <= p2 {
        2.0 * p2 + p1 - 1.0
    } else if p2 <= p1 && p1 <= p3 {
        p1 - p2
    } else if p2 <= p3 && p3 <= p1 {
        3.0 * p1 - 1.0
    } else if p3 <= p1 && p1 <= p2 {
        3.0 * (p1 + p2) - 2.0
    } else {
        4.0 * p1 + 2.0 * p2 - 2.0
    };
    h_z * e.max(0.0)
}

/// Builds the qubit pure state `cos(θ/2)|e⟩ + e^{iφ} sin(θ/2)|g⟩`.
pub fn pure_qubit(theta: f64, phi: f64) -> Result<DensityMatrix> {
    DensityMatrix::pure(&[
        Complex64::new(snap((theta / 2.0).cos()), 0.0),
        Complex64::from_polar(snap((theta / 2.0).sin()), phi),
    ])
}
