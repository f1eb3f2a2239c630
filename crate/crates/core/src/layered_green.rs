//! Green's function of the two-layered medium with a flat interface at `x2 = 0`.
//!
//! The medium has wavenumber `kappa1` above the interface and `kappa2` below.
//! `G0(x, y)` is split into a free-space term and a spectral correction
//!
//! ```text
//! G0(x, y) = Phi(x, y) + (i / 2pi) * int_0^inf F(xi) cos(xi |x1 - y1|) dxi
//! ```
//!
//! where `F` depends only on the two heights. With `beta_j = sqrt(kappa_j^2 - xi^2)`
//! (`Im beta_j >= 0`) the spectral densities are
//!
//! * both points above: `Phi_k1 + R e^{i beta1 (x2 + y2)} / beta1`, `R = (beta1 - beta2)/(beta1 + beta2)`
//! * both points below: `Phi_k2 + R' e^{-i beta2 (x2 + y2)} / beta2`, `R' = -R`
//! * one point on each side: `Phi_k2 + [2/(beta1 + beta2) e^{i (beta1 u + beta2 d)} - e^{i beta2 (u + d)} / beta2]`
//!   with `u` the upper height and `d` the lower depth. Subtracting the `Phi_k2`
//!   comparison term keeps the density exponentially decaying for points close
//!   to the interface.
//!
//! The integral runs on the real axis. The branch points `kappa1`, `kappa2` are
//! panel endpoints and are removed by a quadratic change of variables, after
//! which composite Gauss–Legendre panels converge geometrically.
//!
//! Points with `x2 == 0` are evaluated as the limit from above, which equals the
//! limit from below because `G0` is continuous across the interface.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::point::Point;
use crate::quadrature::gauss_legendre;
use crate::specfun::{phi_radial, COINCIDENCE_TOL};

/// Successive panel doublings must agree to this absolute tolerance.
pub const SPECTRAL_TOL: f64 = 1e-10;
/// Upper bound on the number of spectral nodes of a single rule.
pub const MAX_SPECTRAL_NODES: usize = 1 << 17;
/// Horizontal separations are keyed on this grid when tabulating.
pub const SEPARATION_QUANTUM: f64 = 1e-12;

const PANEL_ORDER: usize = 16;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GreenError {
    #[error("wavenumbers must be finite and positive (kappa1 = {0}, kappa2 = {1})")]
    InvalidMedium(f64, f64),
    #[error("source and observation points coincide at {0}")]
    Coincident(Point),
    #[error("point {0} is not finite")]
    NonFinite(Point),
    #[error("spectral quadrature did not converge with {nodes} nodes (last change {change:e})")]
    NonConvergence { nodes: usize, change: f64 },
    #[error("source {0} must lie above the interface")]
    SourceBelowInterface(Point),
    #[error("both points lie on the interface; the spectral integral does not decay")]
    OnInterface,
    #[error("entry ({row}, {col}): {source}")]
    Entry {
        row: usize,
        col: usize,
        source: Box<GreenError>,
    },
}

/// Piecewise-constant medium: `kappa1` above the flat interface, `kappa2` below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    kappa1: f64,
    kappa2: f64,
}

impl Medium {
    pub fn new(kappa1: f64, kappa2: f64) -> Result<Self, GreenError> {
        let ok = |k: f64| k.is_finite() && k > 0.0;
        if ok(kappa1) && ok(kappa2) {
            Ok(Self { kappa1, kappa2 })
        } else {
            Err(GreenError::InvalidMedium(kappa1, kappa2))
        }
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa2
    }

    /// Contrast `kappa1^2 - kappa2^2`.
    pub fn eta(&self) -> f64 {
        self.kappa1 * self.kappa1 - self.kappa2 * self.kappa2
    }

    /// Wavelength in the upper medium.
    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.kappa1
    }

    /// Wavelength in the lower medium.
    pub fn wavelength2(&self) -> f64 {
        2.0 * PI / self.kappa2
    }

    /// Wavenumber of the unperturbed medium at height `x2`.
    pub fn kappa_at(&self, x2: f64) -> f64 {
        if x2 >= 0.0 {
            self.kappa1
        } else {
            self.kappa2
        }
    }

    /// The same configuration seen upside down.
    pub fn flipped(&self) -> Medium {
        Medium {
            kappa1: self.kappa2,
            kappa2: self.kappa1,
        }
    }
}

/// Vertical arrangement of a point pair relative to the interface.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Layout {
    /// Both points above; the value is `x2 + y2`.
    Upper(f64),
    /// Both points below; the value is `|x2| + |y2|`.
    Lower(f64),
    /// One point above at height `up`, one below at depth `down`.
    Mixed { up: f64, down: f64 },
}

impl Layout {
    fn of(x2: f64, y2: f64) -> Layout {
        match (x2 >= 0.0, y2 >= 0.0) {
            (true, true) => Layout::Upper(x2 + y2),
            (false, false) => Layout::Lower(-x2 - y2),
            (true, false) => Layout::Mixed { up: x2, down: -y2 },
            (false, true) => Layout::Mixed { up: y2, down: -x2 },
        }
    }

    fn decay_length(&self) -> f64 {
        match *self {
            Layout::Upper(h) | Layout::Lower(h) => h,
            Layout::Mixed { up, down } => up + down,
        }
    }

    fn key(&self) -> (u8, u64, u64) {
        match *self {
            Layout::Upper(h) => (0, h.to_bits(), 0),
            Layout::Lower(h) => (1, h.to_bits(), 0),
            Layout::Mixed { up, down } => (2, up.to_bits(), down.to_bits()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct RuleKey {
    layout: (u8, u64, u64),
    bucket: i32,
}

fn bucket_of(separation: f64) -> i32 {
    if separation <= 1.0 {
        0
    } else {
        separation.log2().ceil() as i32
    }
}

fn quantize(separation: f64) -> (i64, f64) {
    let key = (separation / SEPARATION_QUANTUM).round() as i64;
    (key, key as f64 * SEPARATION_QUANTUM)
}

#[inline]
fn beta(kappa: f64, xi: f64) -> Complex64 {
    let d = (kappa - xi) * (kappa + xi);
    if d >= 0.0 {
        Complex64::new(d.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-d).sqrt())
    }
}

#[inline]
fn expi(z: Complex64) -> Complex64 {
    // exp(i z)
    let m = (-z.im).exp();
    Complex64::new(m * z.re.cos(), m * z.re.sin())
}

fn spectral_density(medium: &Medium, layout: Layout, xi: f64) -> Complex64 {
    let b1 = beta(medium.kappa1, xi);
    let b2 = beta(medium.kappa2, xi);
    match layout {
        Layout::Upper(h) => (b1 - b2) / ((b1 + b2) * b1) * expi(b1 * h),
        Layout::Lower(h) => (b2 - b1) / ((b1 + b2) * b2) * expi(b2 * h),
        Layout::Mixed { up, down } => {
            2.0 / (b1 + b2) * expi(b1 * up + b2 * down) - expi(b2 * (up + down)) / b2
        }
    }
}

/// How an interval of the spectral variable is mapped onto `s in [0, 1]`.
#[derive(Debug, Clone, Copy)]
enum Map {
    Linear,
    /// Square-root singularity at the left end.
    LeftSingular,
    /// Square-root singularity at the right end.
    RightSingular,
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    a: f64,
    b: f64,
    map: Map,
}

impl Interval {
    fn point(&self, s: f64) -> (f64, f64) {
        let len = self.b - self.a;
        match self.map {
            Map::Linear => (self.a + len * s, len),
            Map::LeftSingular => (self.a + len * s * s, 2.0 * len * s),
            Map::RightSingular => {
                let t = 1.0 - s;
                (self.b - len * t * t, 2.0 * len * t)
            }
        }
    }
}

/// Precomputed spectral samples `w_k F(xi_k)` for one height configuration,
/// valid for horizontal separations up to `2^bucket`.
#[derive(Debug, Clone)]
pub struct SpectralRule {
    nodes: Vec<f64>,
    weighted: Vec<Complex64>,
}

impl SpectralRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The spectral correction at horizontal separation `separation`.
    pub fn eval(&self, separation: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (xi, wf) in self.nodes.iter().zip(&self.weighted) {
            acc += wf * (xi * separation).cos();
        }
        // i / (2 pi)
        Complex64::new(-acc.im, acc.re) / (2.0 * PI)
    }

    /// Every node lies on the real axis, so `Im beta_j >= 0` is checked directly.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn build(medium: &Medium, layout: Layout, bucket: i32) -> Result<SpectralRule, GreenError> {
        let span = 2f64.powi(bucket);
        let decay = layout.decay_length();
        if decay <= 0.0 {
            return Err(GreenError::OnInterface);
        }
        let ka = medium.kappa1.min(medium.kappa2);
        let kb = medium.kappa1.max(medium.kappa2);
        let cutoff = 3.0 * kb + 40.0 / decay;

        let mut intervals = vec![Interval { a: 0.0, b: ka, map: Map::RightSingular }];
        if kb > ka {
            let mid = 0.5 * (ka + kb);
            intervals.push(Interval { a: ka, b: mid, map: Map::LeftSingular });
            intervals.push(Interval { a: mid, b: kb, map: Map::RightSingular });
        }
        intervals.push(Interval { a: kb, b: 2.0 * kb, map: Map::LeftSingular });
        if cutoff > 2.0 * kb {
            intervals.push(Interval { a: 2.0 * kb, b: cutoff, map: Map::Linear });
        }

        // Start near one panel per three oscillations of cos(xi * span).
        let rate = span + decay;
        let base: Vec<usize> = intervals
            .iter()
            .map(|iv| ((iv.b - iv.a) * rate / (6.0 * PI)).ceil().max(1.0) as usize)
            .collect();

        let rule = gauss_legendre(PANEL_ORDER);
        let probes = [0.0, 0.25 * span, 0.5 * span, 0.75 * span, span];
        let mut scale = 1usize;
        let coarse = Self::assemble(medium, layout, &intervals, &base, scale, &rule);
        let mut coarse_vals: Vec<Complex64> = probes.iter().map(|&d| coarse.eval(d)).collect();
        loop {
            scale *= 2;
            let fine = Self::assemble(medium, layout, &intervals, &base, scale, &rule);
            let fine_vals: Vec<Complex64> = probes.iter().map(|&d| fine.eval(d)).collect();
            let change = coarse_vals
                .iter()
                .zip(&fine_vals)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if change < SPECTRAL_TOL {
                return Ok(fine);
            }
            if fine.len() * 2 > MAX_SPECTRAL_NODES {
                return Err(GreenError::NonConvergence { nodes: fine.len(), change });
            }
            coarse_vals = fine_vals;
        }
    }

    fn assemble(
        medium: &Medium,
        layout: Layout,
        intervals: &[Interval],
        base: &[usize],
        scale: usize,
        rule: &(Vec<f64>, Vec<f64>),
    ) -> SpectralRule {
        let total: usize = base.iter().map(|b| b * scale * rule.0.len()).sum();
        let mut nodes = Vec::with_capacity(total);
        let mut weighted = Vec::with_capacity(total);
        for (iv, &b) in intervals.iter().zip(base) {
            let panels = b * scale;
            let width = 1.0 / panels as f64;
            for p in 0..panels {
                let mid = (p as f64 + 0.5) * width;
                for (t, w) in rule.0.iter().zip(&rule.1) {
                    let s = mid + 0.5 * width * t;
                    let (xi, jac) = iv.point(s);
                    nodes.push(xi);
                    weighted.push(spectral_density(medium, layout, xi) * (0.5 * width * w * jac));
                }
            }
        }
        SpectralRule { nodes, weighted }
    }
}

/// Green's function evaluator with a cache of spectral rules.
///
/// Rules depend only on the pair of heights and on the separation bucket, so a
/// single evaluator amortizes them across many point pairs.
#[derive(Debug)]
pub struct LayeredGreen {
    medium: Medium,
    rules: Mutex<HashMap<RuleKey, Arc<SpectralRule>>>,
    evaluations: AtomicUsize,
}

impl Clone for LayeredGreen {
    fn clone(&self) -> Self {
        Self {
            medium: self.medium,
            rules: Mutex::new(self.rules.lock().unwrap().clone()),
            evaluations: AtomicUsize::new(0),
        }
    }
}

fn check_points(x: &Point, y: &Point) -> Result<(), GreenError> {
    if !x.is_finite() {
        return Err(GreenError::NonFinite(*x));
    }
    if !y.is_finite() {
        return Err(GreenError::NonFinite(*y));
    }
    Ok(())
}

impl LayeredGreen {
    pub fn new(medium: Medium) -> Self {
        Self {
            medium,
            rules: Mutex::new(HashMap::new()),
            evaluations: AtomicUsize::new(0),
        }
    }

    pub fn medium(&self) -> &Medium {
        &self.medium
    }

    /// Number of spectral integrals evaluated so far (one per distinct
    /// height configuration and quantized separation in tabulations).
    pub fn spectral_evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    fn rule(&self, layout: Layout, bucket: i32) -> Result<Arc<SpectralRule>, GreenError> {
        let key = RuleKey { layout: layout.key(), bucket };
        if let Some(r) = self.rules.lock().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let built = Arc::new(SpectralRule::build(&self.medium, layout, bucket)?);
        let mut map = self.rules.lock().unwrap();
        Ok(map.entry(key).or_insert(built).clone())
    }

    fn correction(&self, layout: Layout, separation: f64) -> Result<Complex64, GreenError> {
        let (_, q) = quantize(separation);
        let rule = self.rule(layout, bucket_of(q))?;
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        Ok(rule.eval(q))
    }

    fn direct(&self, layout: Layout, r: f64) -> Complex64 {
        match layout {
            Layout::Upper(_) => phi_radial(self.medium.kappa1, r),
            Layout::Lower(_) | Layout::Mixed { .. } => phi_radial(self.medium.kappa2, r),
        }
    }

    /// `G0(x, y)`.
    pub fn g0(&self, x: &Point, y: &Point) -> Result<Complex64, GreenError> {
        check_points(x, y)?;
        let r = x.dist(y);
        if r < COINCIDENCE_TOL {
            return Err(GreenError::Coincident(*x));
        }
        let layout = Layout::of(x.x2, y.x2);
        Ok(self.direct(layout, r) + self.correction(layout, (x.x1 - y.x1).abs())?)
    }

    /// `G0(x, y) - Phi_k(x, y)` for two points on the same side of the
    /// interface, `k` being the local wavenumber. Smooth at `x = y`.
    pub fn reflected(&self, x: &Point, y: &Point) -> Result<Complex64, GreenError> {
        check_points(x, y)?;
        let layout = Layout::of(x.x2, y.x2);
        if let Layout::Mixed { .. } = layout {
            return self.g0(x, y);
        }
        self.correction(layout, (x.x1 - y.x1).abs())
    }

    /// Scattered part of the unperturbed field for a source above the
    /// interface: `G0 - Phi_k1` for `x` above, `G0` for `x` below.
    pub fn g0_scattered(&self, x: &Point, source: &Point) -> Result<Complex64, GreenError> {
        check_points(x, source)?;
        if source.x2 < 0.0 {
            return Err(GreenError::SourceBelowInterface(*source));
        }
        if x.x2 >= 0.0 {
            self.correction(Layout::of(x.x2, source.x2), (x.x1 - source.x1).abs())
        } else {
            self.g0(x, source)
        }
    }

    /// Dense table `T[i][j] = G0(targets[i], sources[j])`.
    ///
    /// Spectral integrals are shared between entries with the same height pair
    /// and the same quantized horizontal separation; the free-space term is
    /// evaluated per entry. Every entry is bit-identical to [`Self::g0`].
    pub fn tabulate(&self, targets: &[Point], sources: &[Point]) -> Result<Mat<Complex64>, GreenError> {
        self.tabulate_inner(targets, sources, TableMode::Full)
    }

    /// Like [`Self::tabulate`], except that coincident pairs hold the smooth
    /// part [`Self::reflected`] instead of failing.
    pub fn tabulate_regular(&self, targets: &[Point], sources: &[Point]) -> Result<Mat<Complex64>, GreenError> {
        self.tabulate_inner(targets, sources, TableMode::Regular)
    }

    /// Like [`Self::tabulate`] but returns `G0 - Phi_k1` for targets above the
    /// interface (the scattered part for sources above).
    pub fn tabulate_scattered(&self, targets: &[Point], sources: &[Point]) -> Result<Mat<Complex64>, GreenError> {
        for (j, s) in sources.iter().enumerate() {
            if s.x2 < 0.0 {
                return Err(entry_err(0, j, GreenError::SourceBelowInterface(*s)));
            }
        }
        self.tabulate_inner(targets, sources, TableMode::Scattered)
    }

    fn tabulate_inner(&self, targets: &[Point], sources: &[Point], mode: TableMode) -> Result<Mat<Complex64>, GreenError> {
        let nr = targets.len();
        let nc = sources.len();
        // Distinct spectral evaluations.
        let mut index: HashMap<(RuleKey, i64), usize> = HashMap::new();
        let mut jobs: Vec<(RuleKey, Layout, f64)> = Vec::new();
        let mut slot = vec![usize::MAX; nr * nc];
        for (i, x) in targets.iter().enumerate() {
            for (j, y) in sources.iter().enumerate() {
                check_points(x, y).map_err(|e| entry_err(i, j, e))?;
                let layout = Layout::of(x.x2, y.x2);
                let (dk, dq) = quantize((x.x1 - y.x1).abs());
                let key = RuleKey { layout: layout.key(), bucket: bucket_of(dq) };
                let next = jobs.len();
                let id = *index.entry((key, dk)).or_insert_with(|| {
                    jobs.push((key, layout, dq));
                    next
                });
                slot[i * nc + j] = id;
            }
        }

        // Build the missing rules.
        let mut needed: Vec<(RuleKey, Layout)> = Vec::new();
        {
            let map = self.rules.lock().unwrap();
            let mut seen = std::collections::HashSet::new();
            for (k, lay, _) in &jobs {
                if !map.contains_key(k) && seen.insert(*k) {
                    needed.push((*k, *lay));
                }
            }
        }
        let built: Vec<(RuleKey, Result<SpectralRule, GreenError>)> = needed
            .par_iter()
            .map(|(k, lay)| (*k, SpectralRule::build(&self.medium, *lay, k.bucket)))
            .collect();
        {
            let mut map = self.rules.lock().unwrap();
            for (k, r) in built {
                map.entry(k).or_insert(Arc::new(r?));
            }
        }
        let rules: HashMap<RuleKey, Arc<SpectralRule>> = {
            let map = self.rules.lock().unwrap();
            jobs.iter().map(|(k, _, _)| (*k, map[k].clone())).collect()
        };

        let values: Vec<Complex64> = jobs.par_iter().map(|(k, _, d)| rules[k].eval(*d)).collect();
        self.evaluations.fetch_add(jobs.len(), Ordering::Relaxed);

        let mut out = Mat::<Complex64>::zeros(nr, nc);
        for (i, x) in targets.iter().enumerate() {
            for (j, y) in sources.iter().enumerate() {
                let layout = Layout::of(x.x2, y.x2);
                let corr = values[slot[i * nc + j]];
                let r = x.dist(y);
                let value = if mode == TableMode::Scattered && x.x2 >= 0.0 {
                    corr
                } else if r < COINCIDENCE_TOL {
                    if mode != TableMode::Regular {
                        return Err(entry_err(i, j, GreenError::Coincident(*x)));
                    }
                    corr
                } else {
                    self.direct(layout, r) + corr
                };
                out[(i, j)] = value;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TableMode {
    Full,
    Scattered,
    Regular,
}

fn entry_err(row: usize, col: usize, e: GreenError) -> GreenError {
    GreenError::Entry { row, col, source: Box::new(e) }
}

/// `G0(x, y)` with a throwaway evaluator.
pub fn g0(medium: &Medium, x: &Point, y: &Point) -> Result<Complex64, GreenError> {
    LayeredGreen::new(*medium).g0(x, y)
}

/// Scattered part of `G0` for a source above the interface.
pub fn g0_scattered(medium: &Medium, x: &Point, y: &Point) -> Result<Complex64, GreenError> {
    LayeredGreen::new(*medium).g0_scattered(x, y)
}

/// Dense table of `G0(targets[i], sources[j])`.
pub fn tabulate_kernel(medium: &Medium, sources: &[Point], targets: &[Point]) -> Result<Mat<Complex64>, GreenError> {
    LayeredGreen::new(*medium).tabulate(targets, sources)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::phi;

    fn medium(k1: f64, k2: f64) -> Medium {
        Medium::new(k1, k2).unwrap()
    }

    #[test]
    fn medium_accessors() {
        let m = medium(1.0, 10.0);
        assert_eq!(m.eta(), -99.0);
        assert!((m.wavelength() - 2.0 * PI).abs() < 1e-15);
        assert!(Medium::new(0.0, 1.0).is_err());
        assert!(Medium::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn equal_wavenumbers_give_free_space() {
        let m = medium(1.0, 1.0);
        let green = LayeredGreen::new(m);
        let pairs = [
            (Point::new(0.3, 0.7), Point::new(-1.0, 1.2)),
            (Point::new(0.3, -0.7), Point::new(2.0, -0.2)),
            (Point::new(0.3, 0.7), Point::new(-4.0, -1.2)),
            (Point::new(5.0, -0.05), Point::new(-4.0, 0.1)),
        ];
        for (x, y) in pairs {
            let g = green.g0(&x, &y).unwrap();
            let p = phi(1.0, &x, &y).unwrap();
            assert!((g - p).norm() < 1e-10, "{x} {y}: {g} vs {p}");
        }
    }

    #[test]
    fn coincident_points_rejected() {
        let p = Point::new(0.2, 0.4);
        assert!(matches!(g0(&medium(1.0, 2.0), &p, &p), Err(GreenError::Coincident(_))));
    }

    #[test]
    fn scattered_part_is_finite_at_source() {
        let m = medium(1.0, 2.0);
        let y = Point::new(0.0, 1.0);
        let v = g0_scattered(&m, &y, &y).unwrap();
        assert!(v.norm().is_finite() && v.norm() > 0.0);
        let near = g0_scattered(&m, &Point::new(1e-6, 1.0), &y).unwrap();
        assert!((v - near).norm() < 1e-6);
    }

    #[test]
    fn scattered_part_vanishes_without_contrast() {
        let m = medium(1.5, 1.5);
        let v = g0_scattered(&m, &Point::new(2.0, 0.3), &Point::new(0.0, 1.0)).unwrap();
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn decays_into_lower_half_plane() {
        let green = LayeredGreen::new(medium(1.0, 2.0));
        let y = Point::new(0.0, 1.0);
        let mags: Vec<f64> = [5.0, 10.0, 20.0]
            .iter()
            .map(|t| green.g0(&Point::new(0.0, -t), &y).unwrap().norm())
            .collect();
        assert!(mags[0] > mags[1] && mags[1] > mags[2], "{mags:?}");
    }

    #[test]
    fn rule_nodes_lie_on_real_axis_within_bounds() {
        let m = medium(1.0, 2.0);
        let r = SpectralRule::build(&m, Layout::Upper(1.0), 2).unwrap();
        assert!(r.nodes().iter().all(|&xi| xi > 0.0 && xi < 3.0 * 2.0 + 40.0 + 1e-9));
        for &xi in r.nodes() {
            assert!(beta(1.0, xi).im >= 0.0 && beta(2.0, xi).im >= 0.0);
        }
    }

    #[test]
    fn interface_limit_points_are_accepted() {
        let green = LayeredGreen::new(medium(1.0, 2.0));
        let y = Point::new(0.0, 1.0);
        let on = green.g0(&Point::new(0.5, 0.0), &y).unwrap();
        let above = green.g0(&Point::new(0.5, 1e-7), &y).unwrap();
        let below = green.g0(&Point::new(0.5, -1e-7), &y).unwrap();
        assert!((on - above).norm() < 1e-6 && (on - below).norm() < 1e-6);
        assert!(matches!(
            green.g0(&Point::new(0.5, 0.0), &Point::new(0.0, 0.0)),
            Err(GreenError::OnInterface)
        ));
    }

    #[test]
    fn one_by_one_table_matches_direct_call() {
        let m = medium(1.0, 2.0);
        let x = Point::new(0.4, -0.3);
        let y = Point::new(-0.1, 0.8);
        let t = tabulate_kernel(&m, &[y], &[x]).unwrap();
        assert_eq!(t[(0, 0)], g0(&m, &x, &y).unwrap());
    }
}
