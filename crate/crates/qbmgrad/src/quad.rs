//! Gauss–Legendre rules and composite rules on graded panels.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard.entry(n).or_insert_with(|| Arc::new(compute_gl(n))).clone()
}

fn compute_gl(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Maps a Gauss–Legendre rule onto `[a, b]`, appending to `out`.
pub fn push_panel(a: f64, b: f64, n: usize, out: &mut Vec<(f64, f64)>) {
    let rule = gauss_legendre(n);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    for (x, w) in rule.0.iter().zip(&rule.1) {
        out.push((c + h * x, h * w));
    }
}

/// Panel breakpoints on `[0, t_max]`, refined geometrically toward zero and
/// capped at width `max_width` elsewhere.
pub fn graded_breakpoints(t_max: f64, levels: usize, max_width: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    for k in (0..levels).rev() {
        pts.push(t_max * 0.5f64.powi(k as i32 + 1));
    }
    pts.push(t_max);
    let mut out = vec![0.0];
    for w in pts.windows(2) {
        let pieces = ((w[1] - w[0]) / max_width).ceil().max(1.0) as usize;
        for p in 1..=pieces {
            out.push(w[0] + (w[1] - w[0]) * p as f64 / pieces as f64);
        }
    }
    out
}

/// Composite rule on `[a, b]` using `n` nodes per panel between successive
/// breakpoints.
pub fn composite(breaks: &[f64], n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(breaks.len() * n);
    for w in breaks.windows(2) {
        push_panel(w[0], w[1], n, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = gauss_legendre(8);
        let s: f64 = rule.0.iter().zip(&rule.1).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-15);
        let s: f64 = rule.1.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn graded_rule_handles_log_singularity() {
        let br = graded_breakpoints(1.0, 40, 0.5);
        let rule = composite(&br, 12);
        let s: f64 = rule.iter().map(|(x, w)| w * x.ln()).sum();
        assert!((s + 1.0).abs() < 1e-11, "{s}");
    }
}
