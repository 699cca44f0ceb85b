//! Principal component analysis by covariance eigendecomposition.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Components kept by the corpus pipeline.
pub const PCA_COMPONENTS: usize = 50;

/// Fitted projection: `mean` has length `dim`; `basis` is `components x dim`
/// row-major with orthonormal rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub dim: usize,
    pub components: usize,
    pub mean: Vec<f64>,
    pub basis: Vec<f64>,
    /// Eigenvalues of the sample covariance (divisor `n - 1`), non-increasing.
    pub explained_variance: Vec<f64>,
}

/// Fit [`PCA_COMPONENTS`] components; needs at least 51 rows.
pub fn fit_pca(rows: &[Vec<f64>]) -> Result<Pca> {
    fit_pca_components(rows, PCA_COMPONENTS)
}

/// Fit `components` principal axes of `rows` (needs `rows.len() > components`).
///
/// Axes are ordered by non-increasing eigenvalue; each is signed so that its
/// largest-magnitude coefficient (first on ties) is positive.
pub fn fit_pca_components(rows: &[Vec<f64>], components: usize) -> Result<Pca> {
    let n = rows.len();
    if components == 0 {
        return Err(Error::validation("PCA needs at least one component"));
    }
    if n <= components {
        return Err(Error::validation(format!(
            "PCA with {components} components needs at least {} samples, got {n}",
            components + 1
        )));
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::validation("PCA rows have differing lengths"));
    }
    if components > dim {
        return Err(Error::validation(format!(
            "cannot keep {components} components of {dim}-dimensional data"
        )));
    }

    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let centred = DMatrix::from_fn(n, dim, |i, j| rows[i][j] - mean[j]);
    let cov = (centred.transpose() * &centred) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut basis = Vec::with_capacity(components * dim);
    let mut explained_variance = Vec::with_capacity(components);
    for &c in order.iter().take(components) {
        let col = eig.eigenvectors.column(c);
        let mut axis: Vec<f64> = col.iter().copied().collect();
        let pivot = axis
            .iter()
            .enumerate()
            .fold(0usize, |best, (i, v)| if v.abs() > axis[best].abs() { i } else { best });
        if axis[pivot] < 0.0 {
            axis.iter_mut().for_each(|v| *v = -*v);
        }
        basis.extend(axis);
        explained_variance.push(eig.eigenvalues[c].max(0.0));
    }

    Ok(Pca {
        dim,
        components,
        mean,
        basis,
        explained_variance,
    })
}

impl Pca {
    pub fn axis(&self, c: usize) -> &[f64] {
        &self.basis[c * self.dim..(c + 1) * self.dim]
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        project(&self.mean, &self.basis, self.dim, x)
    }

    pub fn reconstruct(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, &a) in coords.iter().enumerate() {
            for (o, b) in out.iter_mut().zip(self.axis(c)) {
                *o += a * b;
            }
        }
        out
    }
}

/// `basis * (x - mean)` for a row-major `basis` with `dim` columns.
pub fn project<T: Copy + Into<f64>>(mean: &[T], basis: &[T], dim: usize, x: &[T]) -> Vec<f64> {
    basis
        .chunks_exact(dim)
        .map(|axis| {
            axis.iter()
                .zip(mean.iter().zip(x))
                .map(|(&b, (&m, &v))| b.into() * (v.into() - m.into()))
                .sum()
        })
        .collect()
}

/// Largest deviation of `B B^T` from the identity.
pub fn orthonormality_error<T: Copy + Into<f64>>(basis: &[T], dim: usize) -> f64 {
    let rows: Vec<&[T]> = basis.chunks_exact(dim).collect();
    let mut worst = 0.0f64;
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in rows.iter().enumerate() {
            let dot: f64 = a.iter().zip(b.iter()).map(|(&x, &y)| x.into() * y.into()).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rows(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn needs_more_rows_than_components() {
        assert!(fit_pca(&random_rows(50, 60, 1)).is_err());
        assert!(fit_pca(&random_rows(51, 60, 1)).is_ok());
    }

    #[test]
    fn rank_one_axis_aligns_with_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dir: Vec<f64> = (0..512).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        let offset: Vec<f64> = (0..512).map(|_| rng.random_range(-3.0..3.0)).collect();
        let rows: Vec<Vec<f64>> = [-1.0, 0.5, 2.0]
            .iter()
            .map(|t| offset.iter().zip(&dir).map(|(o, d)| o + t * d).collect())
            .collect();
        let pca = fit_pca_components(&rows, 1).unwrap();
        let cos: f64 = pca.axis(0).iter().zip(&dir).map(|(a, d)| a * d).sum::<f64>() / norm;
        assert!(cos.abs() >= 1.0 - 1e-6, "cos = {cos}");
    }

    #[test]
    fn mean_projects_to_origin_and_sign_convention_holds() {
        let rows = random_rows(80, 64, 2);
        let pca = fit_pca(&rows).unwrap();
        assert!(pca.project(&pca.mean).iter().all(|v| v.abs() < 1e-9));
        for c in 0..pca.components {
            let axis = pca.axis(c);
            let max = axis.iter().cloned().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            assert!(max > 0.0);
        }
        assert!(orthonormality_error(&pca.basis, pca.dim) < 1e-6);
    }
}
