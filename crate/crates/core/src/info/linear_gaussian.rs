//! Jointly Gaussian variables represented as linear combinations of
//! independent zero-mean unit-variance base coordinates. Covariances are
//! Euclidean inner products of coefficient rows, so conditional mutual
//! information reduces to principal angles between residual row spaces.

use super::{check_disjoint, InfoError, VarSet, RANK_TOL};
use nalgebra::DMatrix;

#[derive(Debug, Clone, Default)]
pub struct LinearGaussianSystem {
    base_dim: usize,
    names: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl LinearGaussianSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    fn index(&self, name: &str) -> Result<usize, InfoError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| InfoError::UnknownVariable(name.to_string()))
    }

    /// Add `name` as a linear combination of existing variables plus an
    /// optional fresh independent coordinate of the given variance. All
    /// existing rows are zero-padded when the base dimension grows.
    pub fn add_variable(
        &mut self,
        name: &str,
        combination: &[(&str, f64)],
        fresh_noise_variance: f64,
    ) -> Result<(), InfoError> {
        if self.contains(name) {
            return Err(InfoError::DuplicateName(name.to_string()));
        }
        if fresh_noise_variance < 0.0 {
            return Err(InfoError::NegativeProbability {
                context: format!("fresh variance of `{name}`"),
                value: fresh_noise_variance,
            });
        }
        let mut row = vec![0.0; self.base_dim];
        for &(src, coef) in combination {
            let i = self.index(src)?;
            for (r, s) in row.iter_mut().zip(&self.rows[i]) {
                *r += coef * s;
            }
        }
        if fresh_noise_variance > 0.0 {
            for r in &mut self.rows {
                r.push(0.0);
            }
            row.push(fresh_noise_variance.sqrt());
            self.base_dim += 1;
        }
        self.names.push(name.to_string());
        self.rows.push(row);
        Ok(())
    }

    /// Coefficient row of a variable (length `base_dim`).
    pub fn row(&self, name: &str) -> Result<&[f64], InfoError> {
        Ok(&self.rows[self.index(name)?])
    }

    pub fn covariance_of(&self, a: &str, b: &str) -> Result<f64, InfoError> {
        let ra = self.row(a)?;
        let rb = self.row(b)?;
        Ok(ra.iter().zip(rb).map(|(x, y)| x * y).sum())
    }

    pub fn variance_of(&self, a: &str) -> Result<f64, InfoError> {
        self.covariance_of(a, a)
    }

    /// Covariance matrix of a variable set, i.e. G Gᵀ for the stacked rows.
    pub fn covariance(&self, vars: &VarSet) -> Result<DMatrix<f64>, InfoError> {
        let g = self.stack(vars)?;
        Ok(&g * g.transpose())
    }

    fn stack(&self, vars: &VarSet) -> Result<DMatrix<f64>, InfoError> {
        let mut m = DMatrix::zeros(vars.len(), self.base_dim);
        for (k, n) in vars.names().iter().enumerate() {
            let row = self.row(n)?;
            for (j, &v) in row.iter().enumerate() {
                m[(k, j)] = v;
            }
        }
        Ok(m)
    }

    /// Conditional mutual information I(A;B|C) in bits.
    ///
    /// Rows of A and B are projected onto the orthogonal complement of
    /// span(rows of C); I = -1/2 Σ log2(1 - ρk²) over the canonical
    /// correlations ρk between the residual subspaces. Directions whose
    /// residual falls below the rank tolerance (relative to the largest row
    /// norm among A∪B∪C) are deterministic given C and are dropped.
    pub fn cond_mi(&self, a: &VarSet, b: &VarSet, c: &VarSet) -> Result<f64, InfoError> {
        check_disjoint(&[a, b, c])?;
        let ma = self.stack(a)?;
        let mb = self.stack(b)?;
        let mc = self.stack(c)?;
        let scale = [&ma, &mb, &mc]
            .iter()
            .flat_map(|m| m.row_iter().map(|r| r.norm()).collect::<Vec<_>>())
            .fold(0.0f64, f64::max);
        if scale == 0.0 {
            return Ok(0.0);
        }
        let tol = RANK_TOL * scale;
        let qc = orthonormal_rows(&mc, tol);
        let qa = orthonormal_rows(&project_out(&ma, &qc), tol);
        let qb = orthonormal_rows(&project_out(&mb, &qc), tol);
        if qa.nrows() == 0 || qb.nrows() == 0 {
            return Ok(0.0);
        }
        let m = &qa * qb.transpose();
        let mut bits = 0.0;
        for rho in jacobi_singular_values(&m) {
            let rho = rho.clamp(0.0, 1.0);
            if rho >= 1.0 - 1e-12 {
                return Err(InfoError::InfiniteMutualInformation {
                    a: a.to_string(),
                    b: b.to_string(),
                });
            }
            bits -= 0.5 * (1.0 - rho * rho).log2();
        }
        Ok(bits.max(0.0))
    }
}

/// Orthonormal basis of the row space, as rows, via column-pivoted
/// Householder QR of the transpose. Directions whose pivot magnitude falls at
/// or below `tol` are dropped. (Householder QR is non-iterative and backward
/// stable; the iterative SVD is avoided on purpose here.)
fn orthonormal_rows(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    if m.nrows() == 0 {
        return DMatrix::zeros(0, m.ncols());
    }
    let qr = m.transpose().col_piv_qr();
    let r = qr.r();
    let rank = (0..r.nrows().min(r.ncols()))
        .take_while(|&i| r[(i, i)].abs() > tol)
        .count();
    qr.q().columns(0, rank).transpose().into_owned()
}

/// Residuals of the rows of `m` after removing their span(qc) components,
/// with one reorthogonalization pass.
fn project_out(m: &DMatrix<f64>, qc: &DMatrix<f64>) -> DMatrix<f64> {
    if qc.nrows() == 0 || m.nrows() == 0 {
        return m.clone();
    }
    let once = m - (m * qc.transpose()) * qc;
    &once - (&once * qc.transpose()) * qc
}

/// Singular values of a small matrix by one-sided Jacobi rotations: columns
/// of `a` are rotated pairwise until mutually orthogonal; the singular values
/// are the final column norms. Deterministic sweep order, quadratic
/// convergence; sizes here never exceed a dozen columns.
fn jacobi_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    // operate on the thinner orientation so columns are the short dimension
    let mut a = if m.nrows() < m.ncols() {
        m.transpose()
    } else {
        m.clone()
    };
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return Vec::new();
    }
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..a.nrows() {
                    app += a[(i, p)] * a[(i, p)];
                    aqq += a[(i, q)] * a[(i, q)];
                    apq += a[(i, p)] * a[(i, q)];
                }
                let denom = (app * aqq).sqrt();
                if denom > 0.0 {
                    off = off.max((apq / denom).abs());
                }
                if apq.abs() <= 1e-300 || apq.abs() <= 1e-16 * denom {
                    continue;
                }
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..a.nrows() {
                    let vp = a[(i, p)];
                    let vq = a[(i, q)];
                    a[(i, p)] = c * vp - s * vq;
                    a[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    (0..n).map(|j| a.column(j).norm()).collect()
}
