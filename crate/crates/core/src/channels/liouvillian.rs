//! Vectorized Lindblad generators and their spectral decomposition.
//!
//! Vectorization is row-major, `vec(ρ)[i·d + j] = ρ_ij`, so
//! `vec(AρB) = (A ⊗ Bᵀ) vec(ρ)`.

use nalgebra::linalg::Schur;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{check_dims, BatteryHamiltonian, CMatrix, DensityMatrix};

/// Eigenvector bases worse conditioned than this are not trusted; evolution
/// then falls back to the matrix exponential.
const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    matrix: CMatrix,
    eigenvalues: Vec<Complex64>,
    /// Columns are right eigenvectors.
    right: CMatrix,
    /// Rows are dual (left) vectors, `left · right = I`.
    left: CMatrix,
    condition: f64,
    zero_modes: usize,
    steady_state: Option<DensityMatrix>,
}

fn vec_to_matrix(v: impl Iterator<Item = Complex64>, d: usize) -> CMatrix {
    let data: Vec<Complex64> = v.collect();
    CMatrix::from_row_slice(d, d, &data)
}

impl Liouvillian {
    /// Dimension of the underlying Hilbert space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Sorted with the zero modes first, then by decreasing real part.
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn right_eigenmatrix(&self, k: usize) -> CMatrix {
        vec_to_matrix(self.right.column(k).iter().copied(), self.dim)
    }

    /// Dual matrix `l_k` with `Tr[l_k† r_j] = δ_kj`.
    pub fn left_eigenmatrix(&self, k: usize) -> CMatrix {
        vec_to_matrix(self.left.row(k).iter().map(|z| z.conj()), self.dim)
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    /// Whether evolution uses the spectral sum (as opposed to the matrix
    /// exponential fallback).
    pub fn is_diagonalizable(&self) -> bool {
        self.condition <= MAX_CONDITION
    }

    pub fn zero_modes(&self) -> usize {
        self.zero_modes
    }

    /// Unique fixed point, if the kernel is one-dimensional.
    pub fn steady_state(&self) -> Option<&DensityMatrix> {
        self.steady_state.as_ref()
    }

    /// Smallest non-zero decay rate, `min |Re λ|` over the non-zero modes.
    pub fn spectral_gap(&self) -> Option<f64> {
        self.eigenvalues[self.zero_modes..]
            .iter()
            .map(|l| -l.re)
            .filter(|r| *r > 0.0)
            .min_by(|a, b| a.total_cmp(b))
    }
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `−i[H⊗I − I⊗Hᵀ] + Σ_k (γ_k/2)(2 L⊗L* − L†L⊗I − I⊗LᵀL*)`.
pub fn liouvillian_matrix(h: &CMatrix, jumps: &[(CMatrix, f64)]) -> Result<CMatrix> {
    let d = h.nrows();
    if h.ncols() != d {
        return Err(Error::Dimension {
            expected: d,
            found: h.ncols(),
        });
    }
    let id = CMatrix::identity(d, d);
    let mi = Complex64::new(0.0, -1.0);
    let mut l = (kron(h, &id) - kron(&id, &h.transpose())) * mi;
    for (op, rate) in jumps {
        check_dims(d, op.nrows())?;
        check_dims(d, op.ncols())?;
        if !(*rate >= 0.0 && rate.is_finite()) {
            return Err(Error::domain(format!("jump rate {rate} must be non-negative")));
        }
        if *rate == 0.0 {
            continue;
        }
        let ldl = op.adjoint() * op;
        let term = kron(op, &op.conjugate()) * Complex64::new(2.0, 0.0) - kron(&ldl, &id) - kron(&id, &ldl.transpose());
        l += term * Complex64::new(rate / 2.0, 0.0);
    }
    Ok(l)
}

/// Right eigenvectors of an upper triangular matrix by back substitution.
fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let n = t.nrows();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let tiny = scale * 1e-14;
    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        let lk = t[(k, k)];
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut den = t[(i, i)] - lk;
            if den.norm() < tiny {
                den = Complex64::new(tiny, 0.0);
            }
            y[(i, k)] = -s / den;
        }
    }
    y
}

pub fn build_liouvillian(h: &BatteryHamiltonian, jumps: &[(CMatrix, f64)]) -> Result<Liouvillian> {
    let d = h.dim();
    let matrix = liouvillian_matrix(h.matrix(), jumps)?;
    let n = d * d;
    let schur = Schur::try_new(matrix.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::Numeric("Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();
    let mut v = &q * triangular_eigenvectors(&t);
    for k in 0..n {
        let norm = v.column(k).norm();
        v.column_mut(k).unscale_mut(norm);
    }
    let raw: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();

    let lnorm = matrix.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let zero_tol = 1e-10 * lnorm;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let za = raw[a].norm() < zero_tol;
        let zb = raw[b].norm() < zero_tol;
        zb.cmp(&za)
            .then(raw[b].re.total_cmp(&raw[a].re))
            .then(raw[a].im.total_cmp(&raw[b].im))
    });
    let zero_modes = raw.iter().filter(|l| l.norm() < zero_tol).count();
    let eigenvalues: Vec<Complex64> = order
        .iter()
        .map(|&k| {
            if raw[k].norm() < zero_tol {
                Complex64::new(0.0, 0.0)
            } else {
                raw[k]
            }
        })
        .collect();
    let mut right = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);

    // unit trace for the unique fixed point
    if zero_modes == 1 {
        let tr: Complex64 = (0..d).map(|i| right[(i * d + i, 0)]).sum();
        if tr.norm() > 1e-12 {
            let inv = Complex64::new(1.0, 0.0) / tr;
            right.column_mut(0).iter_mut().for_each(|z| *z *= inv);
        }
    }

    let left = right.clone().try_inverse();
    let (left, condition) = match left {
        Some(w) => {
            let c = right.norm() * w.norm() / n as f64;
            (w, if c.is_finite() { c } else { f64::INFINITY })
        }
        None => (CMatrix::zeros(n, n), f64::INFINITY),
    };

    let steady_state = if zero_modes == 1 {
        let m = vec_to_matrix(right.column(0).iter().copied(), d);
        DensityMatrix::with_tolerance(m, 1e-8).ok()
    } else {
        None
    };

    Ok(Liouvillian {
        dim: d,
        matrix,
        eigenvalues,
        right,
        left,
        condition,
        zero_modes,
        steady_state,
    })
}

/// `ρ(t) = Σ_k e^{λ_k t} Tr[l_k† ρ0] r_k`, or `exp(𝓛t)` when the
/// eigenbasis is ill conditioned.
pub fn evolve_spectral(l: &Liouvillian, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    check_dims(l.dim, rho0.dim())?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("time {t} must be finite and non-negative")));
    }
    let d = l.dim;
    let n = d * d;
    let v0 = nalgebra::DVector::from_iterator(
        n,
        (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| rho0.matrix()[(i, j)]),
    );
    let vt = if l.is_diagonalizable() {
        let mut c = &l.left * v0;
        for (k, lam) in l.eigenvalues.iter().enumerate() {
            c[k] *= (lam * t).exp();
        }
        &l.right * c
    } else {
        (&l.matrix * Complex64::new(t, 0.0)).exp() * v0
    };
    DensityMatrix::with_tolerance(vec_to_matrix(vt.iter().copied(), d), 1e-10)
}
