//! Complex vector and Hermitian matrix helpers.
//!
//! Hermitian `n x n` matrices enter the conic solver through `n^2` real
//! parameters: the diagonal first, then `(re, im)` pairs of the strict upper
//! triangle in row-major order. The PSD constraint uses the real symmetric
//! embedding `[Re W, -Im W; Im W, Re W]` of side `2n`.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CVec = DVector<C64>;
pub type CMat = DMatrix<C64>;

/// Outer product `v v^H`.
pub fn gram(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub fn trace_re(m: &CMat) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

/// `Tr(a b)` for Hermitian arguments, real part.
pub fn trace_prod(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// `|a^H b|^2`.
pub fn abs2_inner(a: &CVec, b: &CVec) -> f64 {
    a.dotc(b).norm_sqr()
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square()
        && (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| (m[(i, j)] - m[(j, i)].conj()).norm() <= tol))
}

/// Number of real parameters of an `n x n` Hermitian matrix.
pub fn herm_param_count(n: usize) -> usize {
    n * n
}

/// Index of the `(re, im)` pair for `i < j` in the parameter vector.
fn pair_offset(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    // pairs before row i: sum_{r<i} (n-1-r)
    let before = i * (2 * n - i - 1) / 2;
    n + 2 * (before + (j - i - 1))
}

pub fn herm_to_params(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    let mut p = vec![0.0; herm_param_count(n)];
    for i in 0..n {
        p[i] = m[(i, i)].re;
        for j in (i + 1)..n {
            let o = pair_offset(n, i, j);
            p[o] = m[(i, j)].re;
            p[o + 1] = m[(i, j)].im;
        }
    }
    p
}

pub fn params_to_herm(p: &[f64], n: usize) -> CMat {
    assert_eq!(p.len(), herm_param_count(n));
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(p[i], 0.0);
        for j in (i + 1)..n {
            let o = pair_offset(n, i, j);
            let z = C64::new(p[o], p[o + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Coefficients `a` with `Tr(h W) = a . params(W)` for Hermitian `h`.
pub fn trace_coeffs(h: &CMat) -> Vec<f64> {
    let n = h.nrows();
    let mut a = vec![0.0; herm_param_count(n)];
    for i in 0..n {
        a[i] = h[(i, i)].re;
        for j in (i + 1)..n {
            let o = pair_offset(n, i, j);
            a[o] = 2.0 * h[(i, j)].re;
            a[o + 1] = 2.0 * h[(i, j)].im;
        }
    }
    a
}

/// `[Re W, -Im W; Im W, Re W]`.
pub fn real_embedding(w: &CMat) -> DMatrix<f64> {
    let n = w.nrows();
    let mut x = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = w[(i, j)];
            x[(i, j)] = z.re;
            x[(n + i, n + j)] = z.re;
            x[(i, n + j)] = -z.im;
            x[(n + i, j)] = z.im;
        }
    }
    x
}

/// Inverse of [`real_embedding`]; averages the two real copies so that a
/// symmetric matrix that is only approximately structured maps to the
/// nearest Hermitian matrix.
pub fn hermitian_from_embedding(x: &DMatrix<f64>) -> CMat {
    let n = x.nrows() / 2;
    let mut w = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re = 0.5 * (x[(i, j)] + x[(n + i, n + j)]);
            let im = 0.5 * (x[(n + i, j)] - x[(i, n + j)]);
            w[(i, j)] = C64::new(re, im);
        }
    }
    // symmetrize to kill rounding asymmetry
    let wh = w.adjoint();
    (w + wh).scale(0.5)
}

pub fn svec_len(side: usize) -> usize {
    side * (side + 1) / 2
}

/// Lower triangle, column-major, off-diagonals scaled by `sqrt(2)` so that
/// `svec(a) . svec(b) = Tr(a b)`.
pub fn svec(x: &DMatrix<f64>) -> Vec<f64> {
    let n = x.nrows();
    let mut out = Vec::with_capacity(svec_len(n));
    for j in 0..n {
        for i in j..n {
            let v = if i == j {
                x[(i, j)]
            } else {
                std::f64::consts::SQRT_2 * 0.5 * (x[(i, j)] + x[(j, i)])
            };
            out.push(v);
        }
    }
    out
}

pub fn smat(v: &[f64], n: usize) -> DMatrix<f64> {
    assert_eq!(v.len(), svec_len(n));
    let mut x = DMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        for i in j..n {
            if i == j {
                x[(i, i)] = v[k];
            } else {
                let e = v[k] * std::f64::consts::FRAC_1_SQRT_2;
                x[(i, j)] = e;
                x[(j, i)] = e;
            }
            k += 1;
        }
    }
    x
}

/// Position of `(i, j)` in [`svec`] order for a side-`n` matrix.
pub fn svec_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    // columns 0..j hold n, n-1, ..., n-j+1 entries
    j * n - j * j.saturating_sub(1) / 2 + (i - j)
}

/// Sparse linear map `params(W) -> svec(real_embedding(W))` as
/// `(svec_row, param_index, coefficient)` triplets.
pub fn embedding_svec_map(n: usize) -> Vec<(usize, usize, f64)> {
    let side = 2 * n;
    let s2 = std::f64::consts::SQRT_2;
    let idx = |i: usize, j: usize| svec_index(side, i, j);
    let mut out = Vec::new();
    for i in 0..n {
        out.push((idx(i, i), i, 1.0));
        out.push((idx(n + i, n + i), i, 1.0));
        for j in (i + 1)..n {
            let o = pair_offset(n, i, j);
            out.push((idx(j, i), o, s2));
            out.push((idx(n + j, n + i), o, s2));
            // X[n+j][i] = Im W_ji = -Im W_ij, X[n+i][j] = Im W_ij
            out.push((idx(n + j, i), o + 1, -s2));
            out.push((idx(n + i, j), o + 1, s2));
        }
    }
    out
}

/// Largest eigenpair of a Hermitian matrix plus the second-largest
/// eigenvalue. The eigenvector is phase-normalized so that its first
/// non-negligible entry is real and positive. Near-ties (gap below `1e-9`)
/// pick the candidate with the lexicographically largest real part of its
/// first nonzero entry.
pub fn principal_eigen(m: &CMat) -> (f64, CVec, f64) {
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lmax = eig.eigenvalues[order[0]];
    let l2 = if n > 1 { eig.eigenvalues[order[1]] } else { f64::NEG_INFINITY };
    let normalized = |k: usize| -> CVec {
        let mut u: CVec = eig.eigenvectors.column(k).into_owned();
        if let Some(z) = u.iter().find(|z| z.norm() > 1e-12).copied() {
            let phase = z.conj() / z.norm();
            u *= phase;
        }
        u
    };
    let mut best = normalized(order[0]);
    for &k in order.iter().skip(1) {
        if (lmax - eig.eigenvalues[k]).abs() > 1e-9 {
            break;
        }
        let cand = normalized(k);
        if lexi_key(&cand) > lexi_key(&best) {
            best = cand;
        }
    }
    (lmax, best, l2)
}

fn lexi_key(u: &CVec) -> f64 {
    u.iter().find(|z| z.norm() > 1e-12).map(|z| z.re).unwrap_or(0.0)
}

pub fn min_eigenvalue_herm(m: &CMat) -> f64 {
    m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Nearest PSD matrix (Frobenius) by clipping negative eigenvalues.
pub fn project_psd_herm(m: &CMat) -> CMat {
    let eig = m.clone().symmetric_eigen();
    let mut out = CMat::zeros(m.nrows(), m.ncols());
    for k in 0..m.nrows() {
        let l = eig.eigenvalues[k];
        if l > 0.0 {
            let u = eig.eigenvectors.column(k);
            out += (u * u.adjoint()).scale(l);
        }
    }
    out
}

/// Orthonormal basis of the orthogonal complement of `span(cols)`, built by
/// Gram-Schmidt against the columns followed by completion with the
/// standard basis. Columns whose residual norm falls below `tol` are treated
/// as dependent.
pub fn orthogonal_complement(cols: &[&CVec], dim: usize, tol: f64) -> CMat {
    let mut basis: Vec<CVec> = Vec::new();
    let push = |basis: &mut Vec<CVec>, v: &CVec| -> bool {
        let mut r = v.clone();
        for _ in 0..2 {
            for q in basis.iter() {
                let c = q.dotc(&r);
                r -= q * c;
            }
        }
        let nr = r.norm();
        if nr > tol * v.norm().max(1e-300) && nr > 1e-300 {
            basis.push(r / C64::new(nr, 0.0));
            true
        } else {
            false
        }
    };
    for c in cols {
        push(&mut basis, c);
    }
    let span = basis.len();
    for i in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut e = CVec::zeros(dim);
        e[i] = C64::new(1.0, 0.0);
        push(&mut basis, &e);
    }
    let comp = &basis[span..];
    let mut out = CMat::zeros(dim, comp.len());
    for (k, q) in comp.iter().enumerate() {
        out.set_column(k, q);
    }
    out
}
