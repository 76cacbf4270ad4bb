//! Dense symmetric matrices and a cyclic Jacobi eigensolver.

use serde::Serialize;

use crate::error::{LoclabError, Result};

/// Largest dimension the eigensolver accepts.
pub const MAX_DIM: usize = 512;

/// Row-major symmetric matrix. Symmetry is enforced on every write.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "SymMatrix needs dim >= 1");
        SymMatrix {
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.entries[i * m.dim + i] = d;
        }
        m
    }

    /// Builds from rows, symmetrizing as `(S + Sᵀ)/2`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(LoclabError::InvalidArgument("matrix must be square".into()));
        }
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.entries[i * n + j] = 0.5 * (rows[i][j] + rows[j][i]);
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.dim + j] = v;
        self.entries[j * self.dim + i] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn off_diagonal_mass(&self) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.entries[i * n + j];
                s += 2.0 * v * v;
            }
        }
        s.sqrt()
    }

    pub fn is_diagonal(&self) -> bool {
        self.off_diagonal_mass() == 0.0
    }
}

/// Eigenvalues in ascending order, optionally with an orthogonal basis whose
/// column `k` is the eigenvector of `eigenvalues[k]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub basis: Option<Vec<Vec<f64>>>,
}

impl Spectrum {
    /// Spectrum of a diagonal matrix given its diagonal.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut eigenvalues = diag.to_vec();
        eigenvalues.sort_by(f64::total_cmp);
        Spectrum {
            eigenvalues,
            basis: None,
        }
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// `Q diag(λ) Qᵀ`; requires the basis.
    pub fn reconstruct(&self) -> Option<SymMatrix> {
        let q = self.basis.as_ref()?;
        let n = self.eigenvalues.len();
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n)
                    .map(|k| q[i][k] * self.eigenvalues[k] * q[j][k])
                    .sum();
                m.set(i, j, v);
            }
        }
        Some(m)
    }
}

/// Cyclic Jacobi eigen-decomposition.
///
/// Sweeps rotate away every off-diagonal pair until the off-diagonal
/// Frobenius mass drops to `tol * ‖S‖_F`. Diagonal inputs return after the
/// initial mass check without a single rotation.
pub fn jacobi_spectrum(s: &SymMatrix, tol: f64) -> Result<Spectrum> {
    if s.entries.iter().any(|x| !x.is_finite()) {
        return Err(LoclabError::NonFiniteMatrix);
    }
    if !(tol > 0.0) {
        return Err(LoclabError::InvalidArgument("tol must be positive".into()));
    }
    let n = s.dim;
    if n > MAX_DIM {
        return Err(LoclabError::InvalidArgument(format!(
            "dimension {n} exceeds {MAX_DIM}"
        )));
    }
    let mut a = s.entries.clone();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    let scale = s.frobenius();
    let target = tol * scale;

    const MAX_SWEEPS: usize = 100;
    let mut sweeps = 0;
    loop {
        let off = {
            let mut m = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    m += 2.0 * a[i * n + j] * a[i * n + j];
                }
            }
            m.sqrt()
        };
        if off <= target || off == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(LoclabError::NoConvergence("jacobi sweeps"));
        }
        sweeps += 1;
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = a[p * n + r];
                if apr == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let arr = a[r * n + r];
                // tan of the rotation angle, smaller root
                let theta = (arr - app) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akr = a[k * n + r];
                    a[k * n + p] = c * akp - sn * akr;
                    a[k * n + r] = sn * akp + c * akr;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let ark = a[r * n + k];
                    a[p * n + k] = c * apk - sn * ark;
                    a[r * n + k] = sn * apk + c * ark;
                }
                a[p * n + r] = 0.0;
                a[r * n + p] = 0.0;
                for k in 0..n {
                    let qkp = q[k * n + p];
                    let qkr = q[k * n + r];
                    q[k * n + p] = c * qkp - sn * qkr;
                    q[k * n + r] = sn * qkp + c * qkr;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let eigenvalues = order.iter().map(|&i| a[i * n + i]).collect();
    let basis = (0..n)
        .map(|row| order.iter().map(|&col| q[row * n + col]).collect())
        .collect();
    Ok(Spectrum {
        eigenvalues,
        basis: Some(basis),
    })
}
