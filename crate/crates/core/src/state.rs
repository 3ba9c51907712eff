//! State representations and the scalar measures computed on them.
//!
//! Matrices are written in the energy basis with the highest level first:
//! for a qubit index 0 is the excited state (the +1 eigenstate of `σ_z`),
//! for a qutrit the order is top, middle, ground. With `H = h_z σ_z` this
//! makes `m_z = +1` the fully charged state.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Slack allowed on `|m| <= 1`.
pub const BALL_TOL: f64 = 1e-12;
/// Maximum element-wise deviation from Hermiticity.
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density matrix.
pub const POSITIVITY_SLACK: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Qubit magnetization `(m_x, m_y, m_z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    /// Validated constructor; rejects points outside the closed unit ball.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let b = BlochVector { x, y, z };
        b.validate()?;
        Ok(b)
    }

    /// Pure state with polar angle `theta` (`m_z = cos θ`) and azimuth `phi`.
    pub fn from_polar(theta: f64, phi: f64) -> Self {
        let s = snap(theta.sin());
        BlochVector {
            x: snap(s * phi.cos()),
            y: snap(s * phi.sin()),
            z: snap(theta.cos()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite()) {
            return Err(Error::domain("Bloch vector has non-finite components"));
        }
        let r2 = self.norm_sqr();
        if r2 > 1.0 + BALL_TOL {
            return Err(Error::domain(format!(
                "Bloch vector ({}, {}, {}) lies outside the unit ball (|m| = {})",
                self.x,
                self.y,
                self.z,
                r2.sqrt()
            )));
        }
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Squared distance from the z axis, `m_x² + m_y²`.
    pub fn transverse_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// Distance from the z axis. Equals the l1 coherence of the state.
    pub fn transverse(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// `½(I + m·σ)`.
/// Rounding residue of trigonometric functions at multiples of π/2 (for
/// example `sin π ≈ 1.2e-16`) is set to exactly zero, so poles and the
/// equator stay coherence-free or population-balanced.
pub(crate) fn snap(v: f64) -> f64 {
    if v.abs() < 1e-15 {
        0.0
    } else {
        v
    }
}

pub fn bloch_to_density(b: BlochVector) -> Result<DensityMatrix> {
    b.validate()?;
    let half = 0.5;
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(half * (1.0 + b.z), 0.0),
            Complex64::new(half * b.x, -half * b.y),
            Complex64::new(half * b.x, half * b.y),
            Complex64::new(half * (1.0 - b.z), 0.0),
        ],
    );
    // the matrix is Hermitian with unit trace by construction; positivity
    // follows from |m| <= 1
    Ok(DensityMatrix { m })
}

/// `m_i = Tr[ρ σ_i]`.
pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: rho.dim(),
        });
    }
    let m = &rho.m;
    let off = m[(1, 0)];
    Ok(BlochVector {
        x: 2.0 * off.re,
        y: 2.0 * off.im,
        z: (m[(0, 0)] - m[(1, 1)]).re,
    })
}

/// Hermitian, unit-trace, positive semidefinite matrix of dimension 2 or 3.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates with the default tolerances.
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, HERMITIAN_TOL)
    }

    /// Validates Hermiticity and trace with `tol` instead of the default,
    /// then symmetrizes. Used for outputs of numerical propagation.
    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        let d = m.nrows();
        if m.ncols() != d {
            return Err(Error::domain(format!(
                "density matrix must be square, got {}x{}",
                d,
                m.ncols()
            )));
        }
        if d != 2 && d != 3 {
            return Err(Error::domain(format!(
                "only qubits and qutrits are supported, got dimension {d}"
            )));
        }
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::domain("density matrix has non-finite entries"));
        }
        let dev = hermitian_deviation(&m);
        if dev > tol {
            return Err(Error::domain(format!(
                "matrix is not Hermitian (max deviation {dev:e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > tol.max(TRACE_TOL) || tr.im.abs() > tol.max(TRACE_TOL) {
            return Err(Error::domain(format!("trace is {tr}, expected 1")));
        }
        let m = hermitian_part(&m);
        let (vals, _) = hermitian_eigen_unchecked(&m);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -POSITIVITY_SLACK {
            return Err(Error::domain(format!(
                "matrix is not positive semidefinite (smallest eigenvalue {min:e})"
            )));
        }
        Ok(DensityMatrix { m })
    }

    /// Diagonal state with the given populations, highest level first.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let d = populations.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, p) in populations.iter().enumerate() {
            m[(i, i)] = Complex64::new(*p, 0.0);
        }
        Self::new(m)
    }

    /// `|ψ⟩⟨ψ|` after normalizing `psi`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::domain("state vector has zero or non-finite norm"));
        }
        let d = psi.len();
        let m = CMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Self::new(m)
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::diagonal(&vec![1.0 / dim as f64; dim])
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    /// Diagonal entries (populations), highest level first.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    /// Largest off-diagonal modulus.
    pub fn max_offdiagonal(&self) -> f64 {
        let d = self.dim();
        let mut best = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    best = best.max(self.m[(i, j)].norm());
                }
            }
        }
        best
    }
}

/// Qutrit state that is diagonal in the energy basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QutritDiagonal {
    /// Population of the top level `|2⟩`.
    pub p1: f64,
    /// Population of the middle level `|1⟩`.
    pub p2: f64,
}

impl QutritDiagonal {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        let q = QutritDiagonal { p1, p2 };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        let tol = BALL_TOL;
        if !(self.p1.is_finite() && self.p2.is_finite())
            || self.p1 < -tol
            || self.p2 < -tol
            || self.p1 + self.p2 > 1.0 + tol
        {
            return Err(Error::domain(format!(
                "({}, {}) is not a point of the probability simplex",
                self.p1, self.p2
            )));
        }
        Ok(())
    }

    /// Ground-level population.
    pub fn p3(&self) -> f64 {
        1.0 - self.p1 - self.p2
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        self.validate()?;
        DensityMatrix::diagonal(&[self.p1, self.p2, self.p3()])
    }

    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        if rho.dim() != 3 {
            return Err(Error::Dimension {
                expected: 3,
                found: rho.dim(),
            });
        }
        let p = rho.populations();
        Ok(QutritDiagonal { p1: p[0], p2: p[1] })
    }
}

/// `H = h_z σ_z` (qubit) or `H = h_z S_z` (qutrit) with its spectral data.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryHamiltonian {
    h_z: f64,
    matrix: CMatrix,
    eigenvalues: Vec<f64>,
    eigenbasis: CMatrix,
}

impl BatteryHamiltonian {
    pub fn qubit(h_z: f64) -> Result<Self> {
        Self::spin(2, h_z)
    }

    pub fn qutrit(h_z: f64) -> Result<Self> {
        Self::spin(3, h_z)
    }

    pub fn for_dim(dim: usize, h_z: f64) -> Result<Self> {
        match dim {
            2 | 3 => Self::spin(dim, h_z),
            _ => Err(Error::domain(format!("unsupported dimension {dim}"))),
        }
    }

    fn spin(dim: usize, h_z: f64) -> Result<Self> {
        if !(h_z > 0.0 && h_z.is_finite()) {
            return Err(Error::domain(format!("h_z must be positive, got {h_z}")));
        }
        // diagonal levels, highest first: (+h, -h) or (+h, 0, -h)
        let levels: Vec<f64> = match dim {
            2 => vec![h_z, -h_z],
            _ => vec![h_z, 0.0, -h_z],
        };
        let matrix = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            dim,
            levels.iter().map(|e| Complex64::new(*e, 0.0)),
        ));
        // ascending order reverses the storage order
        let eigenvalues: Vec<f64> = levels.iter().rev().cloned().collect();
        let eigenbasis = CMatrix::from_fn(dim, dim, |i, j| if i == dim - 1 - j { ONE } else { ZERO });
        Ok(BatteryHamiltonian {
            h_z,
            matrix,
            eigenvalues,
            eigenbasis,
        })
    }

    pub fn h_z(&self) -> f64 {
        self.h_z
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Energies in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Columns are the energy eigenstates, in the order of `eigenvalues`.
    pub fn eigenbasis(&self) -> &CMatrix {
        &self.eigenbasis
    }

    /// `U† ρ U`: the state expressed in the ascending energy eigenbasis.
    pub fn to_energy_basis(&self, rho: &DensityMatrix) -> Result<CMatrix> {
        check_dims(self.dim(), rho.dim())?;
        Ok(self.eigenbasis.adjoint() * rho.matrix() * &self.eigenbasis)
    }

    pub fn mean_energy(&self, rho: &DensityMatrix) -> Result<f64> {
        check_dims(self.dim(), rho.dim())?;
        Ok((rho.matrix() * &self.matrix).trace().re)
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Dimension { expected, found });
    }
    Ok(())
}

pub(crate) fn hermitian_deviation(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..d {
        for j in i..d {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending
/// order. Ties keep the solver's index order.
pub(crate) fn hermitian_eigen_unchecked(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = CMatrix::from_fn(m.nrows(), m.nrows(), |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// Descending eigenvalues and matching eigenvector columns of a Hermitian
/// matrix; rejects input that deviates from Hermiticity by more than
/// [`HERMITIAN_TOL`].
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let dev = hermitian_deviation(m);
    if dev > HERMITIAN_TOL {
        return Err(Error::domain(format!(
            "matrix is not Hermitian (max deviation {dev:e})"
        )));
    }
    Ok(hermitian_eigen_unchecked(&hermitian_part(m)))
}

/// Eigenvalues of `ρ` in descending order with their eigenvectors as
/// columns.
pub fn eigen_sorted(rho: &DensityMatrix) -> (Vec<f64>, CMatrix) {
    hermitian_eigen_unchecked(rho.matrix())
}

/// `½ Σ |eig(ρ1 − ρ2)|`.
pub fn trace_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    check_dims(rho1.dim(), rho2.dim())?;
    let diff = hermitian_part(&(rho1.matrix() - rho2.matrix()));
    let (vals, _) = hermitian_eigen_unchecked(&diff);
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

/// l1-norm of coherence in the eigenbasis of `h`.
pub fn l1_coherence(rho: &DensityMatrix, h: &BatteryHamiltonian) -> Result<f64> {
    let m = h.to_energy_basis(rho)?;
    let d = m.nrows();
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                total += m[(i, j)].norm();
            }
        }
    }
    Ok(total)
}
