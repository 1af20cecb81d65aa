//! Small dense complex kernels used by the recovery and analysis code.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

const PAR_THRESHOLD: usize = 1 << 15;

/// `sum conj(a_i) b_i`.
#[inline]
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let (mut re, mut im) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    Complex64::new(re, im)
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

/// `y += alpha x`.
#[inline]
pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Thin QR factorization grown one column at a time by classical Gram-Schmidt
/// with one reorthogonalization pass. Tracks `Q^* b` and the residual
/// `b - Q Q^* b`, so a least-squares refit costs `O(m k)` per added column.
#[derive(Clone, Debug)]
pub struct IncrementalQr {
    q: Vec<Vec<Complex64>>,
    r: Vec<Vec<Complex64>>,
    qtb: Vec<Complex64>,
    residual: Vec<Complex64>,
    dependent_tol: f64,
}

impl IncrementalQr {
    pub fn new(b: &[Complex64]) -> Self {
        IncrementalQr {
            q: Vec::new(),
            r: Vec::new(),
            qtb: Vec::new(),
            residual: b.to_vec(),
            dependent_tol: 1e-12,
        }
    }

    pub fn residual(&self) -> &[Complex64] {
        &self.residual
    }

    pub fn residual_norm(&self) -> f64 {
        norm(&self.residual)
    }

    fn project(&self, v: &[Complex64]) -> Vec<Complex64> {
        if self.q.len() * v.len() >= PAR_THRESHOLD {
            self.q.par_iter().map(|q| dot(q, v)).collect()
        } else {
            self.q.iter().map(|q| dot(q, v)).collect()
        }
    }

    /// Orthogonalizes and appends `column`. Returns `false` (and leaves the
    /// factorization unchanged) when the column lies numerically in the span
    /// of the previous ones.
    pub fn push(&mut self, column: &[Complex64]) -> bool {
        assert_eq!(column.len(), self.residual.len());
        let original = norm(column);
        if original == 0.0 {
            return false;
        }
        let mut v = column.to_vec();
        let mut h = vec![Complex64::default(); self.q.len()];
        for _ in 0..2 {
            let hp = self.project(&v);
            for (qk, c) in self.q.iter().zip(&hp) {
                axpy(-c, qk, &mut v);
            }
            for (acc, c) in h.iter_mut().zip(&hp) {
                *acc += c;
            }
        }
        let nv = norm(&v);
        if nv <= self.dependent_tol * original {
            return false;
        }
        for x in v.iter_mut() {
            *x /= nv;
        }
        let c = dot(&v, &self.residual);
        axpy(-c, &v, &mut self.residual);
        // Q^* b component, refreshed on the updated residual for stability
        self.qtb.push(c);
        h.push(Complex64::new(nv, 0.0));
        self.r.push(h);
        self.q.push(v);
        true
    }

    /// Solves `R z = Q^* b` by back-substitution.
    pub fn solve(&self) -> Vec<Complex64> {
        let k = self.q.len();
        let mut z = self.qtb.clone();
        for j in (0..k).rev() {
            z[j] /= self.r[j][j];
            let zj = z[j];
            for i in 0..j {
                z[i] -= self.r[j][i] * zj;
            }
        }
        z
    }
}

/// Largest singular value of a linear map by power iteration on `A^* A`.
pub fn operator_norm<F, G>(n: usize, apply: F, adjoint: G, iterations: usize) -> f64
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
    G: Fn(&[Complex64]) -> Vec<Complex64>,
{
    if n == 0 {
        return 0.0;
    }
    // deterministic, non-degenerate start vector
    let mut v: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(1.0 + 0.37 * (k as f64).sin(), 0.21 * (k as f64).cos()))
        .collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut sigma = 0.0;
    for _ in 0..iterations {
        let w = adjoint(&apply(&v));
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let next = nw.sqrt();
        v = w.into_iter().map(|x| x / nw).collect();
        if (next - sigma).abs() <= 1e-12 * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

/// Outcome of a pivoted Cholesky factorization of a Hermitian matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CholeskyReport {
    pub rank: usize,
    /// Most negative pivot encountered, 0 if none.
    pub min_pivot: f64,
    pub positive_semidefinite: bool,
}

/// Diagonally pivoted Cholesky. Stops when the largest remaining pivot drops
/// below `tol * max diag`; the matrix is declared PSD when no remaining pivot
/// is below `-tol * max diag`.
pub fn pivoted_cholesky(g: &DMatrix<Complex64>, tol: f64) -> CholeskyReport {
    let n = g.nrows();
    assert_eq!(n, g.ncols());
    let mut a = g.clone();
    let scale = (0..n).map(|i| a[(i, i)].re.abs()).fold(0.0, f64::max);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    let threshold = tol * scale.max(f64::MIN_POSITIVE);
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, a[(perm[i], perm[i])].re))
            .fold((k, f64::NEG_INFINITY), |best, x| if x.1 > best.1 { x } else { best });
        if pivot <= threshold {
            let min_pivot = (k..n)
                .map(|i| a[(perm[i], perm[i])].re)
                .fold(0.0, f64::min);
            return CholeskyReport {
                rank,
                min_pivot,
                positive_semidefinite: min_pivot >= -threshold,
            };
        }
        perm.swap(k, p);
        let pk = perm[k];
        let l = pivot.sqrt();
        let col: Vec<Complex64> = (k + 1..n).map(|i| a[(perm[i], pk)] / l).collect();
        for (ii, i) in (k + 1..n).enumerate() {
            for (jj, j) in (k + 1..n).enumerate() {
                let delta = col[ii] * col[jj].conj();
                a[(perm[i], perm[j])] -= delta;
            }
        }
        rank += 1;
    }
    CholeskyReport {
        rank,
        min_pivot: 0.0,
        positive_semidefinite: true,
    }
}
