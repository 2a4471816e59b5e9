//! Generalized symmetric eigensolver for the pencil (A, M): sparse LDLᵀ
//! shift-invert subspace iteration, with the number of eigenvalues below a
//! threshold certified independently by Sylvester inertia.

use crate::fem::SparseSym;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum EigenError {
    #[error("dimension mismatch: A is {0}x{0}, M is {1}x{1}")]
    DimensionMismatch(usize, usize),
    #[error("LDLT breakdown at pivot {0}")]
    Breakdown(usize),
    #[error("inertia factorization failed after shift perturbation")]
    InertiaFailed,
    #[error("subspace iteration did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("mass matrix is not positive definite")]
    MassNotDefinite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// LDLᵀ factorization (no pivoting) of a symmetric matrix.
pub struct LdltFactor {
    n: usize,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
}

impl LdltFactor {
    /// (negative, zero, positive) pivot counts. By Sylvester's law these are
    /// the eigenvalue counts of the factored matrix by sign.
    pub fn inertia(&self) -> (usize, usize, usize) {
        let mut neg = 0;
        let mut zero = 0;
        let mut pos = 0;
        for &dk in &self.d {
            if dk < 0.0 {
                neg += 1;
            } else if dk > 0.0 {
                pos += 1;
            } else {
                zero += 1;
            }
        }
        (neg, zero, pos)
    }

    /// In-place solve of (LDLᵀ) x = b.
    pub fn solve(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        for j in 0..self.n {
            let bj = b[j];
            for p in self.lp[j]..self.lp[j + 1] {
                b[self.li[p]] -= self.lx[p] * bj;
            }
        }
        for j in 0..self.n {
            b[j] /= self.d[j];
        }
        for j in (0..self.n).rev() {
            let mut bj = b[j];
            for p in self.lp[j]..self.lp[j + 1] {
                bj -= self.lx[p] * b[self.li[p]];
            }
            b[j] = bj;
        }
    }
}

/// Up-looking sparse LDLᵀ of a symmetric matrix given with full pattern.
/// Fails if a pivot is exactly zero (the unpivoted factorization does not
/// exist); callers handling indefinite shifts perturb and retry.
pub fn ldlt(a: &SparseSym) -> Result<LdltFactor, EigenError> {
    let n = a.dim();
    // upper triangle of A in CSR equals the lower triangle in CSC, which is
    // the layout the up-looking algorithm consumes column by column
    let mut up: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for r in 0..n {
        let (cols, vals) = a.row(r);
        for (c, v) in cols.iter().zip(vals) {
            if *c >= r {
                up[*c].push((r, *v));
            }
        }
    }
    // elimination tree and symbolic column counts
    let mut parent = vec![usize::MAX; n];
    let mut lnz = vec![0usize; n];
    let mut flag = vec![usize::MAX; n];
    for k in 0..n {
        flag[k] = k;
        for &(i, _) in &up[k] {
            let mut i = i;
            while i < k && flag[i] != k {
                if parent[i] == usize::MAX {
                    parent[i] = k;
                }
                lnz[i] += 1;
                flag[i] = k;
                i = parent[i];
            }
        }
    }
    let mut lp = vec![0usize; n + 1];
    for k in 0..n {
        lp[k + 1] = lp[k] + lnz[k];
    }
    let nnz = lp[n];
    let mut li = vec![0usize; nnz];
    let mut lx = vec![0.0f64; nnz];
    let mut d = vec![0.0f64; n];
    let mut y = vec![0.0f64; n];
    let mut pattern = vec![0usize; n];
    let mut lfill = lp.clone();
    for k in 0..n {
        flag[k] = k;
        let mut top = n;
        let mut dk = 0.0;
        for &(i, v) in &up[k] {
            if i == k {
                dk = v;
                continue;
            }
            y[i] = v;
            let mut len = 0;
            let mut i = i;
            while flag[i] != k {
                pattern[len] = i;
                len += 1;
                flag[i] = k;
                i = parent[i];
            }
            while len > 0 {
                len -= 1;
                top -= 1;
                pattern[top] = pattern[len];
            }
        }
        d[k] = dk;
        for &i in &pattern[top..n] {
            let yi = y[i];
            y[i] = 0.0;
            for p in lp[i]..lfill[i] {
                y[li[p]] -= lx[p] * yi;
            }
            let lki = yi / d[i];
            d[k] -= lki * yi;
            li[lfill[i]] = k;
            lx[lfill[i]] = lki;
            lfill[i] += 1;
        }
        if d[k] == 0.0 {
            return Err(EigenError::Breakdown(k));
        }
    }
    Ok(LdltFactor { n, lp, li, lx, d })
}

/// Number of eigenvalues of the pencil (A, M) strictly below `sigma`,
/// certified by the inertia of A − σM. If the unpivoted factorization breaks
/// down the shift is perturbed by growing relative amounts and retried.
pub fn inertia_below(a: &SparseSym, m: &SparseSym, sigma: f64) -> Result<usize, EigenError> {
    if a.dim() != m.dim() {
        return Err(EigenError::DimensionMismatch(a.dim(), m.dim()));
    }
    let scale = sigma.abs().max(1.0);
    for attempt in 0..8 {
        let shift = sigma + scale * 1e-12 * ((1 << attempt) as f64 - 1.0);
        let shifted = a.add_scaled(m, -shift);
        match ldlt(&shifted) {
            Ok(f) => return Ok(f.inertia().0),
            Err(EigenError::Breakdown(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(EigenError::InertiaFailed)
}

fn mat_from_cols(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let n = cols[0].len();
    DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// Dense generalized symmetric eigensolve of (Ar, Mr) via Cholesky reduction.
/// Returns eigenvalues ascending with eigenvectors as columns.
fn dense_gen_eig(ar: &DMatrix<f64>, mr: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>), EigenError> {
    let chol = nalgebra::Cholesky::new(mr.clone()).ok_or(EigenError::MassNotDefinite)?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or(EigenError::MassNotDefinite)?;
    let b = &linv * ar * linv.transpose();
    let b = (&b + b.transpose()) * 0.5;
    let se = nalgebra::SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(ar.nrows(), order.len());
    for (jj, &i) in order.iter().enumerate() {
        let x = linv.transpose() * se.eigenvectors.column(i);
        vecs.set_column(jj, &x);
    }
    Ok((vals, vecs))
}

fn fix_sign(v: &mut [f64]) {
    let mut imax = 0;
    let mut best = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > best {
            best = x.abs();
            imax = i;
        }
    }
    if v[imax] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// All eigenvalues of the pencil (A, M) strictly below `threshold`, with
/// M-orthonormal eigenvectors, via shift-invert block subspace iteration.
///
/// The count is certified up front by [`inertia_below`]; the iteration then
/// runs a block of count + 4 vectors to relative residual `tol`. Random
/// starting vectors come from a seeded ChaCha stream, so results are
/// reproducible for fixed inputs.
pub fn eigs_below(
    a: &SparseSym,
    m: &SparseSym,
    threshold: f64,
    tol: f64,
    seed: u64,
) -> Result<Vec<EigenPair>, EigenError> {
    let n = a.dim();
    if n != m.dim() {
        return Err(EigenError::DimensionMismatch(n, m.dim()));
    }
    let count = inertia_below(a, m, threshold)?;
    if count == 0 {
        return Ok(Vec::new());
    }
    let p = (count + 4).min(n);
    // negative shift keeps A − σM positive definite for the PSD forms at
    // hand, so the unpivoted factorization cannot break down
    let sigma = -0.01 * threshold.abs().max(1.0);
    let factor = ldlt(&a.add_scaled(m, -sigma))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let max_iter = 500;
    let mut scratch = vec![0.0; n];
    for _iter in 0..max_iter {
        // Y = (A − σM)⁻¹ M X
        for xi in x.iter_mut() {
            m.matvec(xi, &mut scratch);
            xi.copy_from_slice(&scratch);
            factor.solve(xi);
        }
        // M-orthonormalize (modified Gram-Schmidt, two passes)
        for _pass in 0..2 {
            for i in 0..p {
                for j in 0..i {
                    m.matvec(&x[j], &mut scratch);
                    let proj: f64 = x[i].iter().zip(&scratch).map(|(a, b)| a * b).sum();
                    let (xi, xj) = {
                        let (lo, hi) = x.split_at_mut(i);
                        (&mut hi[0], &lo[j])
                    };
                    for (t, s) in xi.iter_mut().zip(xj) {
                        *t -= proj * s;
                    }
                }
                let norm = m.quadratic_form(&x[i]).max(0.0).sqrt();
                if norm <= 0.0 {
                    // degenerate column, replace by a fresh random vector
                    for t in x[i].iter_mut() {
                        *t = rng.gen_range(-1.0..1.0);
                    }
                    continue;
                }
                for t in x[i].iter_mut() {
                    *t /= norm;
                }
            }
        }
        // Rayleigh-Ritz on the block
        let xm = mat_from_cols(&x);
        let mut ax = DMatrix::zeros(n, p);
        let mut mx = DMatrix::zeros(n, p);
        for j in 0..p {
            a.matvec(&x[j], &mut scratch);
            ax.set_column(j, &DVector::from_column_slice(&scratch));
            m.matvec(&x[j], &mut scratch);
            mx.set_column(j, &DVector::from_column_slice(&scratch));
        }
        let ar = xm.transpose() * &ax;
        let mr = xm.transpose() * &mx;
        let ar = (&ar + ar.transpose()) * 0.5;
        let mr = (&mr + mr.transpose()) * 0.5;
        let (vals, vecs) = dense_gen_eig(&ar, &mr)?;
        let ritz = &xm * &vecs;
        for j in 0..p {
            for i in 0..n {
                x[j][i] = ritz[(i, j)];
            }
        }
        // convergence: relative residual of the wanted pairs
        let mut converged = true;
        let mut av = vec![0.0; n];
        for j in 0..count.min(p) {
            a.matvec(&x[j], &mut av);
            m.matvec(&x[j], &mut scratch);
            let mut res = 0.0f64;
            let mut den = 0.0f64;
            for i in 0..n {
                let r = av[i] - vals[j] * scratch[i];
                res += r * r;
                den += av[i] * av[i];
            }
            if res.sqrt() > tol * den.sqrt().max(1e-300) {
                converged = false;
                break;
            }
        }
        if converged {
            let mut out = Vec::new();
            for j in 0..count.min(p) {
                if vals[j] < threshold {
                    let mut v = x[j].clone();
                    fix_sign(&mut v);
                    out.push(EigenPair {
                        value: vals[j],
                        vector: v,
                    });
                }
            }
            return Ok(out);
        }
    }
    Err(EigenError::NoConvergence(max_iter))
}

/// Dense reference path: full generalized eigensolve, then filter below the
/// threshold. Only for cross-checks and small systems.
pub fn dense_eigs_below(
    a: &SparseSym,
    m: &SparseSym,
    threshold: f64,
) -> Result<Vec<EigenPair>, EigenError> {
    let (vals, vecs) = dense_gen_eig(&a.to_dense(), &m.to_dense())?;
    let mut out = Vec::new();
    for (j, &v) in vals.iter().enumerate() {
        if v < threshold {
            let mut vec: Vec<f64> = vecs.column(j).iter().copied().collect();
            // M-normalize to match the iterative path
            let nrm = m.quadratic_form(&vec).sqrt();
            for t in vec.iter_mut() {
                *t /= nrm;
            }
            fix_sign(&mut vec);
            out.push(EigenPair { value: v, vector: vec });
        }
    }
    Ok(out)
}

/// Smallest generalized eigenvalue of (A, M), dense path.
pub fn dense_smallest(a: &SparseSym, m: &SparseSym) -> f64 {
    let (vals, _) = dense_gen_eig(&a.to_dense(), &m.to_dense()).expect("mass not definite");
    vals[0]
}
