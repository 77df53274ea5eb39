//! Bessel functions of the first kind for integer order.
//!
//! Power series below `|x| = 8`, Miller's normalized backward recurrence
//! above it.

const SERIES_LIMIT: f64 = 8.0;

pub fn bessel_j(n: u32, x: f64) -> f64 {
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n % 2 == 0 { v } else { -v };
    }
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_LIMIT {
        series(n, x)
    } else {
        miller(n, x)
    }
}

fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // (x/2)^n / n!
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let q = half * half;
    let mut sum = term;
    for k in 1..200u32 {
        term *= -q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn miller(n: u32, x: f64) -> f64 {
    let top = (n as f64).max(x);
    let mut m = (top + 30.0 + 4.0 * top.sqrt()) as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=m).rev() {
        if k as u32 == n {
            wanted = cur;
        }
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e200 {
            cur *= 1e-200;
            next *= 1e-200;
            norm *= 1e-200;
            wanted *= 1e-200;
        }
    }
    // cur now holds J_0
    norm += cur;
    if n == 0 {
        wanted = cur;
    }
    wanted / norm
}
