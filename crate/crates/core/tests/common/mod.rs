#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// Gauss–Legendre rule on [-1, 1] by Newton iteration on P_n, kept separate
/// from the library's own rule.
pub fn legendre_rule(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Integral of `f` over consecutive panels given by `breaks`.
pub fn integrate(f: impl Fn(f64) -> f64, breaks: &[f64], rule: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        let mut s = 0.0;
        for &(t, wt) in rule {
            s += wt * f(mid + half * t);
        }
        total += half * s;
    }
    total
}

fn uniform(a: f64, b: f64, panels: usize) -> Vec<f64> {
    (0..=panels).map(|k| a + (b - a) * k as f64 / panels as f64).collect()
}

/// `J0, J1, Y0, Y1` from the integral representations
/// `J_n = (1/pi) int_0^pi cos(n t - x sin t) dt` and
/// `Y_n = (1/pi) int_0^pi sin(x sin t - n t) dt
///        - (1/pi) int_0^inf (e^{n s} + (-1)^n e^{-n s}) e^{-x sinh s} ds`.
pub struct BesselOracle {
    rule: Vec<(f64, f64)>,
}

impl BesselOracle {
    pub fn new() -> Self {
        Self { rule: legendre_rule(24) }
    }

    pub fn eval(&self, x: f64) -> [f64; 4] {
        let angle = uniform(0.0, PI, (x / 2.0).ceil() as usize + 4);
        let j0 = integrate(|t| (x * t.sin()).cos(), &angle, &self.rule) / PI;
        let j1 = integrate(|t| (t - x * t.sin()).cos(), &angle, &self.rule) / PI;
        let s0 = integrate(|t| (x * t.sin()).sin(), &angle, &self.rule) / PI;
        let s1 = integrate(|t| (x * t.sin() - t).sin(), &angle, &self.rule) / PI;
        // Substituting v = x sinh s gives int_0^inf e^{-v} K(v) dv with a peak
        // of width x at v = 0; panels are graded towards the origin.
        let mut breaks = vec![0.0];
        let mut v = x;
        while v < 1.0 {
            breaks.push(v);
            v *= 2.0;
        }
        let last = *breaks.last().unwrap();
        breaks.extend((1..=60).map(|k| k as f64).filter(|&k| k > last));
        let tail0 = integrate(|v| 2.0 * (-v).exp() / (x * x + v * v).sqrt(), &breaks, &self.rule);
        // (e^s - e^-s) ds = 2 sinh s ds = 2 v / x * dv / sqrt(x^2 + v^2)
        let tail1 = integrate(|v| 2.0 * v / x * (-v).exp() / (x * x + v * v).sqrt(), &breaks, &self.rule);
        [j0, j1, s0 - tail0 / PI, s1 - tail1 / PI]
    }

    pub fn hankel(&self, x: f64) -> (Complex64, Complex64) {
        let [j0, j1, y0, y1] = self.eval(x);
        (Complex64::new(j0, y0), Complex64::new(j1, y1))
    }
}

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

/// Relative l2 distance `|a - b| / |b|`.
pub fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Observed order from three successive errors or differences.
pub fn observed_order(e: &[f64]) -> Vec<f64> {
    e.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
