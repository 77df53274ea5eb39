//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use satsec::conic::{Cone, ConicProgram};

/// Random bounded LP `min c'x s.t. G x <= h, |x_i| <= box` with a strictly
/// feasible point.
pub struct RandomLp {
    pub n: usize,
    pub g: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

pub fn random_lp(seed: u64) -> RandomLp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=6usize);
    let extra = rng.random_range(1..=5usize);
    let bx = 5.0;
    let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut g = Vec::new();
    let mut h = Vec::new();
    for _ in 0..extra {
        let row: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: f64 = row.iter().zip(&x0).map(|(a, x)| a * x).sum();
        h.push(v + rng.random_range(0.1..1.0));
        g.push(row);
    }
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut row = vec![0.0; n];
            row[i] = sign;
            g.push(row);
            h.push(bx);
        }
    }
    let c = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    RandomLp { n, g, h, c }
}

impl RandomLp {
    pub fn program(&self) -> ConicProgram {
        let mut a = Vec::new();
        for (r, row) in self.g.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    a.push((r, j, v));
                }
            }
        }
        ConicProgram {
            n: self.n,
            a,
            b: self.h.clone(),
            c: self.c.clone(),
            cones: vec![Cone::NonNeg(self.h.len())],
            var_names: vec![],
        }
    }

    /// Optimum by enumerating every basis of `n` active constraints.
    pub fn vertex_oracle(&self) -> f64 {
        let n = self.n;
        let rows = self.g.len();
        let mut best = f64::INFINITY;
        let mut idx: Vec<usize> = (0..n).collect();
        loop {
            if let Some(x) = solve_square(&idx.iter().map(|&i| self.g[i].clone()).collect::<Vec<_>>(), &idx.iter().map(|&i| self.h[i]).collect::<Vec<_>>()) {
                let feasible = self
                    .g
                    .iter()
                    .zip(&self.h)
                    .all(|(row, h)| row.iter().zip(&x).map(|(a, x)| a * x).sum::<f64>() <= h + 1e-9);
                if feasible {
                    let obj: f64 = self.c.iter().zip(&x).map(|(c, x)| c * x).sum();
                    best = best.min(obj);
                }
            }
            // next combination
            let mut k = n;
            loop {
                if k == 0 {
                    return best;
                }
                k -= 1;
                if idx[k] < rows - n + k {
                    idx[k] += 1;
                    for t in k + 1..n {
                        idx[t] = idx[t - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_square(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &v)| r.iter().copied().chain([v]).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..=n {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Projection onto the dual exponential cone by searching its boundary rays
/// `a (-1, -s, exp(s - 1))`, `a >= 0`, plus the face `{0} x R+ x R+`.
pub fn project_dual_exp_oracle(p: [f64; 3]) -> [f64; 3] {
    let inside = |v: [f64; 3]| {
        if v[0] < 0.0 {
            -v[0] * (v[1] / v[0]).exp() <= std::f64::consts::E * v[2]
        } else {
            v[0] == 0.0 && v[1] >= 0.0 && v[2] >= 0.0
        }
    };
    if inside(p) {
        return p;
    }
    let dist2 = |q: [f64; 3]| (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2) + (q[2] - p[2]).powi(2);
    let mut cands = vec![[0.0; 3], [0.0, p[1].max(0.0), p[2].max(0.0)]];
    let ray = |s: f64| [-1.0, -s, (s - 1.0).exp()];
    let dray = |s: f64| [0.0, -1.0, (s - 1.0).exp()];
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    // stationarity of <p, r>^2 / |r|^2 in s
    let stat = |s: f64| {
        let r = ray(s);
        let dr = dray(s);
        dot(p, dr) * dot(r, r) - dot(p, r) * dot(r, dr)
    };
    let on_ray = |s: f64| {
        let r = ray(s);
        let a = (dot(p, r) / dot(r, r)).max(0.0);
        [a * r[0], a * r[1], a * r[2]]
    };
    let (lo, hi, steps) = (-60.0, 60.0, 4_000);
    let h = (hi - lo) / steps as f64;
    let mut prev = stat(lo);
    for k in 1..=steps {
        let s1 = lo + k as f64 * h;
        let cur = stat(s1);
        if prev == 0.0 || prev.signum() != cur.signum() {
            let (mut a, mut b) = (s1 - h, s1);
            let fa = stat(a);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if stat(mid).signum() == fa.signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            cands.push(on_ray(0.5 * (a + b)));
        }
        prev = cur;
    }
    *cands.iter().min_by(|a, b| dist2(**a).total_cmp(&dist2(**b))).unwrap()
}
