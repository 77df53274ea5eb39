//! Euclidean projections onto the supported cones and their duals.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, Result};
use crate::linalg::{smat, svec, svec_len};

/// One block of the cone product. Slack rows are laid out block by block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cone {
    /// `s = 0`.
    Zero(usize),
    /// `s >= 0`.
    NonNeg(usize),
    /// PSD matrices of the given side, stored as `svec`.
    Psd(usize),
    /// `count` consecutive triples `(x, y, z)` with `y exp(x / y) <= z`.
    Exp(usize),
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Zero(d) | Cone::NonNeg(d) => d,
            Cone::Psd(side) => svec_len(side),
            Cone::Exp(count) => 3 * count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let size = match *self {
            Cone::Zero(d) | Cone::NonNeg(d) | Cone::Psd(d) | Cone::Exp(d) => d,
        };
        if size == 0 {
            return Err(invalid_input(format!("empty cone block {self:?}")));
        }
        Ok(())
    }
}

pub type ConeSpec = Vec<Cone>;

pub fn cone_dim(spec: &[Cone]) -> usize {
    spec.iter().map(Cone::dim).sum()
}

/// Nearest PSD matrix in Frobenius norm.
pub fn project_psd(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !x.is_square() {
        return Err(invalid_input("PSD projection needs a square matrix"));
    }
    let scale = x.amax().max(1.0);
    if (x - x.transpose()).amax() > 1e-9 * scale {
        return Err(invalid_input("PSD projection needs a symmetric matrix"));
    }
    Ok(clip_eigen(x.clone()))
}

fn clip_eigen(x: DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let eig = SymmetricEigen::new(x.clone());
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return x;
    }
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        let l = eig.eigenvalues[k];
        if l > 0.0 {
            let u = eig.eigenvectors.column(k);
            out.ger(l, &u, &u, 1.0);
        }
    }
    out
}

/// PSD projection in `svec` coordinates, in place.
pub fn project_psd_svec(v: &mut [f64], side: usize) {
    let m = smat(v, side);
    let p = clip_eigen(m);
    v.copy_from_slice(&svec(&p));
}

pub fn in_expcone(v: [f64; 3], tol: f64) -> bool {
    let [x, y, z] = v;
    if y > 0.0 {
        y * (x / y).exp() - z <= tol
    } else {
        y >= -tol && x <= tol && z >= -tol
    }
}

/// Membership in the dual cone `{u < 0, -u exp(v / u) <= e w} U {u = 0, v, w >= 0}`.
pub fn in_expcone_dual(v: [f64; 3], tol: f64) -> bool {
    let [u, w1, w2] = v;
    if u < 0.0 {
        -u * (w1 / u).exp() - std::f64::consts::E * w2 <= tol
    } else {
        u <= tol && w1 >= -tol && w2 >= -tol
    }
}

/// Euclidean projection onto the exponential cone.
///
/// Outside the easy cases the projection and its polar part lie on a pair of
/// orthogonal boundary rays indexed by `rho = x / y`; the third coordinate
/// of `v` fixes `rho` through a scalar equation solved by safeguarded Newton.
pub fn project_expcone(v: [f64; 3]) -> [f64; 3] {
    let [r0, s0, t0] = v;
    if in_expcone(v, 0.0) {
        return v;
    }
    if in_expcone_dual([-r0, -s0, -t0], 0.0) {
        return [0.0; 3];
    }
    if r0 <= 0.0 && s0 <= 0.0 {
        return [r0, 0.0, t0.max(0.0)];
    }

    let q = |rho: f64| rho * rho - rho + 1.0;
    let a = |rho: f64| (rho - 1.0) * r0 + s0;
    let b = |rho: f64| r0 - rho * s0;
    // third coordinate of (primal part + polar part) minus t0
    let phi = |rho: f64| (a(rho) * rho.exp() - b(rho) * (-rho).exp()) / q(rho) - t0;
    let dphi = |rho: f64| {
        let (ep, em) = (rho.exp(), (-rho).exp());
        let num = a(rho) * ep - b(rho) * em;
        let dnum = (r0 + a(rho)) * ep + (s0 + b(rho)) * em;
        (dnum * q(rho) - num * (2.0 * rho - 1.0)) / (q(rho) * q(rho))
    };

    // interval where both ray coefficients are positive
    let (mut lo, mut hi) = if r0 > 0.0 && s0 > 0.0 {
        (1.0 - s0 / r0, r0 / s0)
    } else if r0 > 0.0 {
        let lo = 1.0 - s0 / r0;
        let mut step = 1.0;
        let mut hi = lo + step;
        while phi(hi) < 0.0 && hi < 700.0 {
            step *= 2.0;
            hi = lo + step;
        }
        (lo, hi.min(700.0))
    } else {
        let hi = r0 / s0;
        let mut step = 1.0;
        let mut lo = hi - step;
        while phi(lo) > 0.0 && lo > -700.0 {
            step *= 2.0;
            lo = hi - step;
        }
        (lo.max(-700.0), hi)
    };

    // Newton inside the bracket, bisecting whenever a step would leave it or
    // fails to halve the previous step
    let mut rho = 0.5 * (lo + hi);
    let mut step_old = hi - lo;
    for _ in 0..200 {
        let f = phi(rho);
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = rho;
        } else {
            hi = rho;
        }
        let d = dphi(rho);
        let newton = rho - f / d;
        let step = if d > 0.0 && newton > lo && newton < hi && (newton - rho).abs() < 0.5 * step_old.abs() {
            newton - rho
        } else {
            0.5 * (lo + hi) - rho
        };
        step_old = step;
        rho += step;
        if hi - lo <= 1e-15 * (1.0 + rho.abs()) || step.abs() <= 1e-16 * (1.0 + rho.abs()) {
            break;
        }
    }

    // Evaluate whichever of the two orthogonal parts is better conditioned at
    // this rho and recover the other from v = primal + polar.
    let (ar, br) = (a(rho), b(rho));
    let rel_a = ar.abs() / ((rho - 1.0) * r0).abs().max(s0.abs());
    let rel_b = br.abs() / r0.abs().max((rho * s0).abs());
    let cand = if rel_a >= rel_b {
        let c = ar.max(0.0) / q(rho);
        [c * rho, c, c * rho.exp()]
    } else {
        let d = br.max(0.0) / q(rho);
        let (x, z) = (r0 - d, t0 + d * (-rho).exp());
        let mut y = (s0 - d * (1.0 - rho)).max(0.0);
        // put the point back on the boundary by moving only y
        if y > 0.0 && z > 0.0 && (1.0 - rho).abs() > 1e-3 {
            for _ in 0..3 {
                let g = y.ln() + x / y - z.ln();
                let next = y - g * y / (1.0 - x / y);
                if !(next.is_finite() && next > 0.0) {
                    break;
                }
                y = next;
            }
        }
        [x, y, z]
    };
    // fall back to the simple candidates if the boundary point is worse
    let alt = [r0.min(0.0), 0.0, t0.max(0.0)];
    let dist = |p: &[f64; 3]| (p[0] - r0).powi(2) + (p[1] - s0).powi(2) + (p[2] - t0).powi(2);
    let mut best = cand;
    for p in [alt, [0.0; 3]] {
        if dist(&p) < dist(&best) {
            best = p;
        }
    }
    best
}

/// Projection onto the dual exponential cone via `P_{K*}(v) = v + P_K(-v)`.
pub fn project_expcone_dual(v: [f64; 3]) -> [f64; 3] {
    let p = project_expcone([-v[0], -v[1], -v[2]]);
    [v[0] + p[0], v[1] + p[1], v[2] + p[2]]
}

/// Projects `v` onto the product cone `K` described by `spec`.
pub fn project_primal(spec: &[Cone], v: &mut [f64]) {
    let mut off = 0;
    for cone in spec {
        let d = cone.dim();
        let block = &mut v[off..off + d];
        match *cone {
            Cone::Zero(_) => block.fill(0.0),
            Cone::NonNeg(_) => block.iter_mut().for_each(|x| *x = x.max(0.0)),
            Cone::Psd(side) => project_psd_svec(block, side),
            Cone::Exp(count) => {
                for t in 0..count {
                    let p = project_expcone([block[3 * t], block[3 * t + 1], block[3 * t + 2]]);
                    block[3 * t..3 * t + 3].copy_from_slice(&p);
                }
            }
        }
        off += d;
    }
}

/// Projects `v` onto the dual product cone `K*`.
pub fn project_dual(spec: &[Cone], v: &mut [f64]) {
    let mut off = 0;
    for cone in spec {
        let d = cone.dim();
        let block = &mut v[off..off + d];
        match *cone {
            Cone::Zero(_) => {}
            Cone::NonNeg(_) => block.iter_mut().for_each(|x| *x = x.max(0.0)),
            Cone::Psd(side) => project_psd_svec(block, side),
            Cone::Exp(count) => {
                for t in 0..count {
                    let p = project_expcone_dual([block[3 * t], block[3 * t + 1], block[3 * t + 2]]);
                    block[3 * t..3 * t + 3].copy_from_slice(&p);
                }
            }
        }
        off += d;
    }
}
