//! Gauss–Legendre rules.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule: `panels` equal panels on `[a, b]`, each with the
/// `n`-point rule `(nodes, weights)` on `[-1, 1]`.
pub fn composite(a: f64, b: f64, panels: usize, rule: &(Vec<f64>, Vec<f64>)) -> Vec<(f64, f64)> {
    let width = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.0.len());
    for p in 0..panels {
        let left = a + p as f64 * width;
        let mid = left + 0.5 * width;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            out.push((mid + 0.5 * width * x, 0.5 * width * w));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = gauss_legendre(8);
        // x^14 on [-1, 1] integrates to 2/15
        let s: f64 = rule.0.iter().zip(&rule.1).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        let total: f64 = rule.1.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn composite_cosine() {
        let rule = gauss_legendre(16);
        let pts = composite(0.0, 10.0, 8, &rule);
        let s: f64 = pts.iter().map(|(x, w)| w * x.cos()).sum();
        assert!((s - 10f64.sin()).abs() < 1e-13);
    }
}
