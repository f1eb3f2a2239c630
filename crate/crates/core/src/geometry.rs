//! Interface profiles, the half-disk reference interface, measurement lines,
//! sampling grids and the cell meshes of perturbation regions.

use std::fmt;

use crate::layered_green::Medium;
use crate::point::Point;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("measurement line needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("tabulated profile needs strictly increasing abscissae and at least two rows")]
    BadTable,
    #[error("unknown profile '{0}'")]
    UnknownProfile(String),
    #[error("empty interval [{0}, {1}]")]
    EmptyInterval(f64, f64),
}

fn positive(name: &'static str, value: f64) -> Result<f64, GeometryError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(GeometryError::NonPositive { name, value })
    }
}

/// The piecewise cubic B-spline supported on `[-2, 2]`.
pub fn cubic_bspline(x1: f64) -> f64 {
    let t = x1.abs();
    if t <= 1.0 {
        t * t * t / 2.0 - t * t + 2.0 / 3.0
    } else if t < 2.0 {
        -t * t * t / 6.0 + t * t - 2.0 * t + 4.0 / 3.0
    } else {
        0.0
    }
}

/// Smooth cutoff equal to 1 on `[-4, 4]` and 0 outside `(-5, 5)`.
pub fn smooth_cutoff(x1: f64) -> f64 {
    let t = x1.abs();
    if t <= 4.0 {
        1.0
    } else if t < 5.0 {
        1.0 / (1.0 + (1.0 / (5.0 - t) + 1.0 / (4.0 - t)).exp())
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    Flat,
    /// `0.6 B3(x)`
    BsplineF1,
    /// Three Gaussian dips times the smooth cutoff.
    GaussiansF2,
    /// `exp(16/(x^2 - 16)) sin(pi x)` on `|x| < 4`.
    OscillatoryF3,
    /// `0.6 B3(x) - 0.4 B3(x - 5)`
    CompositeF6,
    /// Piecewise-linear through the given samples, zero outside them.
    Tabulated { xs: Vec<f64>, fs: Vec<f64> },
}

/// A compactly supported perturbation `x2 = f(x1)` of the flat interface.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceProfile {
    kind: ProfileKind,
    support_radius: f64,
}

impl InterfaceProfile {
    pub fn flat() -> Self {
        Self { kind: ProfileKind::Flat, support_radius: 0.0 }
    }

    pub fn f1() -> Self {
        Self { kind: ProfileKind::BsplineF1, support_radius: 2.0 }
    }

    pub fn f2() -> Self {
        Self { kind: ProfileKind::GaussiansF2, support_radius: 5.0 }
    }

    pub fn f3() -> Self {
        Self { kind: ProfileKind::OscillatoryF3, support_radius: 4.0 }
    }

    pub fn f6() -> Self {
        Self { kind: ProfileKind::CompositeF6, support_radius: 7.0 }
    }

    /// Profile through `(xs[i], fs[i])`, linearly interpolated and zero
    /// outside `[xs[0], xs[n-1]]`.
    pub fn tabulated(xs: Vec<f64>, fs: Vec<f64>) -> Result<Self, GeometryError> {
        if xs.len() < 2 || xs.len() != fs.len() || xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(GeometryError::BadTable);
        }
        if xs.iter().chain(&fs).any(|v| !v.is_finite()) {
            return Err(GeometryError::BadTable);
        }
        let support_radius = xs[0].abs().max(xs[xs.len() - 1].abs());
        Ok(Self { kind: ProfileKind::Tabulated { xs, fs }, support_radius })
    }

    /// Reads a two-column whitespace- or comma-separated text table.
    /// Lines starting with `#` are ignored.
    pub fn parse_table(text: &str) -> Result<Self, GeometryError> {
        let mut xs = Vec::new();
        let mut fs = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty());
            let x = cols.next().and_then(|s| s.parse::<f64>().ok()).ok_or(GeometryError::BadTable)?;
            let f = cols.next().and_then(|s| s.parse::<f64>().ok()).ok_or(GeometryError::BadTable)?;
            xs.push(x);
            fs.push(f);
        }
        Self::tabulated(xs, fs)
    }

    pub fn by_name(name: &str) -> Result<Self, GeometryError> {
        match name {
            "flat" => Ok(Self::flat()),
            "f1" => Ok(Self::f1()),
            "f2" => Ok(Self::f2()),
            "f3" => Ok(Self::f3()),
            "f6" => Ok(Self::f6()),
            other => Err(GeometryError::UnknownProfile(other.to_string())),
        }
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn id(&self) -> &'static str {
        match self.kind {
            ProfileKind::Flat => "flat",
            ProfileKind::BsplineF1 => "f1",
            ProfileKind::GaussiansF2 => "f2",
            ProfileKind::OscillatoryF3 => "f3",
            ProfileKind::CompositeF6 => "f6",
            ProfileKind::Tabulated { .. } => "tabulated",
        }
    }

    /// `M`: the profile vanishes for `|x1| >= M`.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.kind, ProfileKind::Flat)
    }

    pub fn eval(&self, x1: f64) -> f64 {
        match &self.kind {
            ProfileKind::Flat => 0.0,
            ProfileKind::BsplineF1 => 0.6 * cubic_bspline(x1),
            ProfileKind::GaussiansF2 => {
                let bumps = -0.3 * (-x1 * x1).exp()
                    - 0.4 * (-4.0 * (x1 - 2.0).powi(2)).exp()
                    - 0.2 * (-3.0 * (x1 + 2.0).powi(2)).exp();
                bumps * smooth_cutoff(x1)
            }
            ProfileKind::OscillatoryF3 => {
                if x1.abs() < 4.0 {
                    (16.0 / (x1 * x1 - 16.0)).exp() * (std::f64::consts::PI * x1).sin()
                } else {
                    0.0
                }
            }
            ProfileKind::CompositeF6 => 0.6 * cubic_bspline(x1) - 0.4 * cubic_bspline(x1 - 5.0),
            ProfileKind::Tabulated { xs, fs } => {
                let n = xs.len();
                if x1 < xs[0] || x1 > xs[n - 1] {
                    return 0.0;
                }
                let k = xs.partition_point(|&x| x <= x1).clamp(1, n - 1);
                let t = (x1 - xs[k - 1]) / (xs[k] - xs[k - 1]);
                fs[k - 1] + t * (fs[k] - fs[k - 1])
            }
        }
    }

    fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        let m = self.support_radius;
        let n = 20_000;
        (0..=n).map(move |i| self.eval(-m + 2.0 * m * i as f64 / n as f64))
    }

    /// Maximum of `f` (sampled; at least 0).
    pub fn sup(&self) -> f64 {
        self.samples().fold(0.0, f64::max)
    }

    /// Minimum of `f` (sampled; at most 0).
    pub fn inf(&self) -> f64 {
        self.samples().fold(0.0, f64::min)
    }

    /// Euclidean distance from `z` to the curve `x2 = f(x1)`, by dense sampling.
    pub fn distance_to(&self, z: &Point) -> f64 {
        // the vertical gap bounds the search window
        let mut best = (z.x2 - self.eval(z.x1)).abs();
        let step = 1e-3;
        let n = (best / step).ceil() as i64 + 1;
        for i in -n..=n {
            let x1 = z.x1 + i as f64 * step;
            let d = Point::new(x1, self.eval(x1)).dist(z);
            best = best.min(d);
        }
        best
    }
}

impl fmt::Display for InterfaceProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// The reference interface that follows the lower half of a circle of
/// radius `r` about the origin and is flat elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfDiskInterface {
    radius: f64,
}

impl HalfDiskInterface {
    pub fn new(radius: f64) -> Result<Self, GeometryError> {
        positive("half-disk radius", radius).map(|radius| Self { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn height(&self, x1: f64) -> f64 {
        gamma_r_height(self, x1)
    }
}

pub fn gamma_r_height(gr: &HalfDiskInterface, x1: f64) -> f64 {
    let r = gr.radius;
    if x1.abs() < r {
        -((r - x1) * (r + x1)).sqrt()
    } else {
        0.0
    }
}

/// `N` equally spaced points on the segment `{(x1, b) : |x1| <= a}`,
/// endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementLine {
    half_width: f64,
    height: f64,
    count: usize,
}

impl MeasurementLine {
    pub fn new(half_width: f64, height: f64, count: usize) -> Result<Self, GeometryError> {
        positive("measurement half-width", half_width)?;
        if !height.is_finite() {
            return Err(GeometryError::NonPositive { name: "measurement height", value: height });
        }
        if count < 2 {
            return Err(GeometryError::TooFewPoints(count));
        }
        Ok(Self { half_width, height, count })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn point(&self, p: usize) -> Point {
        let a = self.half_width;
        let x1 = -a + 2.0 * a * p as f64 / (self.count - 1) as f64;
        Point::new(x1, self.height)
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.count).map(|p| self.point(p)).collect()
    }
}

/// Rectangular grid of sampling points, endpoints included. Points are
/// ordered with `x1` varying fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingGrid {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub hx: f64,
    pub hy: f64,
}

impl SamplingGrid {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), hx: f64, hy: f64) -> Result<Self, GeometryError> {
        positive("grid step hx", hx)?;
        positive("grid step hy", hy)?;
        for (a, b) in [x_range, y_range] {
            if !(a.is_finite() && b.is_finite() && b >= a) {
                return Err(GeometryError::EmptyInterval(a, b));
            }
        }
        Ok(Self { x_range, y_range, hx, hy })
    }

    fn count(extent: f64, step: f64) -> usize {
        // tolerate rounding in extent / step
        (extent / step + 1e-9).floor() as usize + 1
    }

    pub fn nx(&self) -> usize {
        Self::count(self.x_range.1 - self.x_range.0, self.hx)
    }

    pub fn ny(&self) -> usize {
        Self::count(self.y_range.1 - self.y_range.0, self.hy)
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x1(&self, i: usize) -> f64 {
        self.x_range.0 + i as f64 * self.hx
    }

    pub fn x2(&self, j: usize) -> f64 {
        self.y_range.0 + j as f64 * self.hy
    }

    /// Point with column `i` and row `j`.
    pub fn point(&self, i: usize, j: usize) -> Point {
        Point::new(self.x1(i), self.x2(j))
    }

    pub fn points(&self) -> Vec<Point> {
        let nx = self.nx();
        (0..self.len()).map(|k| self.point(k % nx, k / nx)).collect()
    }
}

/// One square quadrature cell of a perturbation region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub center: Point,
    pub area: f64,
    /// `kappa_true^2 - kappa_reference^2` on the cell.
    pub contrast: f64,
}

/// Square cells covering the region between a curve and the flat interface.
///
/// Cells sit on the lattice `h Z x h Z`, so one grid line is the interface
/// itself and the mesh of an even curve is mirror-symmetric. A cell belongs to
/// the mesh when its centre lies strictly between the curve and `x2 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationMesh {
    cells: Vec<Cell>,
    cell_width: f64,
}

impl PerturbationMesh {
    pub fn empty(cell_width: f64) -> Self {
        Self { cells: Vec::new(), cell_width }
    }

    /// Cells between `x2 = curve(x1)` and `x2 = 0` for `|x1| < support`.
    ///
    /// Above the flat interface the true wavenumber is `kappa2` and the
    /// reference one `kappa1`, so those cells carry `-eta`; cells below carry
    /// `+eta`.
    pub fn between(curve: impl Fn(f64) -> f64, support: f64, medium: &Medium, h: f64) -> Result<Self, GeometryError> {
        positive("cell width", h)?;
        let eta = medium.eta();
        let mut cells = Vec::new();
        let cols = (support / h).ceil() as i64;
        let mut lo = 0.0_f64;
        let mut hi = 0.0_f64;
        let heights: Vec<(f64, f64)> = (-cols..cols)
            .map(|j| {
                let c1 = (j as f64 + 0.5) * h;
                (c1, if c1.abs() < support { curve(c1) } else { 0.0 })
            })
            .collect();
        for &(_, f) in &heights {
            lo = lo.min(f);
            hi = hi.max(f);
        }
        let row_lo = (lo / h).floor() as i64;
        let row_hi = (hi / h).ceil() as i64;
        for k in row_lo..row_hi {
            let c2 = (k as f64 + 0.5) * h;
            for &(c1, f) in &heights {
                let contrast = if 0.0 < c2 && c2 < f {
                    -eta
                } else if f < c2 && c2 < 0.0 {
                    eta
                } else {
                    continue;
                };
                cells.push(Cell { center: Point::new(c1, c2), area: h * h, contrast });
            }
        }
        if cells.is_empty() {
            log::warn!("perturbation mesh with cell width {h} is empty");
        }
        Ok(Self { cells, cell_width: h })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    pub fn centers(&self) -> Vec<Point> {
        self.cells.iter().map(|c| c.center).collect()
    }
}

/// Mesh of the region between the profile and the flat interface.
pub fn build_mesh(profile: &InterfaceProfile, medium: &Medium, h: f64) -> Result<PerturbationMesh, GeometryError> {
    if profile.is_flat() {
        positive("cell width", h)?;
        return Ok(PerturbationMesh::empty(h));
    }
    PerturbationMesh::between(|x| profile.eval(x), profile.support_radius(), medium, h)
}

/// Mesh of the half-disk between the reference curve and the flat interface.
pub fn build_half_disk_mesh(gr: &HalfDiskInterface, medium: &Medium, h: f64) -> Result<PerturbationMesh, GeometryError> {
    PerturbationMesh::between(|x| gamma_r_height(gr, x), gr.radius(), medium, h)
}

/// Ten cells per wavelength of the lower medium.
pub fn default_cell_width(medium: &Medium) -> f64 {
    medium.wavelength2() / 10.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn medium() -> Medium {
        Medium::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn bspline_values() {
        assert!((cubic_bspline(0.0) - 2.0 / 3.0).abs() < 1e-15);
        let left: f64 = 1.0f64.powi(3) / 2.0 - 1.0 + 2.0 / 3.0;
        let right: f64 = -1.0 / 6.0 + 1.0 - 2.0 + 4.0 / 3.0;
        assert!((left - 1.0 / 6.0).abs() < 1e-15 && (right - 1.0 / 6.0).abs() < 1e-15);
        assert!((cubic_bspline(1.0) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(cubic_bspline(2.0), 0.0);
        assert_eq!(cubic_bspline(-2.0), 0.0);
    }

    #[test]
    fn bspline_smooth_at_support_edge() {
        for h in [1e-2, 5e-3] {
            let x = 2.0 - h;
            let d1 = (cubic_bspline(2.0) - cubic_bspline(x)) / h;
            let d2 = (cubic_bspline(2.0) - 2.0 * cubic_bspline(x) + cubic_bspline(x - h)) / (h * h);
            // one-sided differences of (2 - x)^3 / 6 are O(h^2) and O(h)
            assert!(d1.abs() <= h * h);
            assert!(d2.abs() <= 2.0 * h);
        }
    }

    #[test]
    fn profile_values() {
        assert!((InterfaceProfile::f1().eval(0.0) - 0.4).abs() < 1e-15);
        let f3 = InterfaceProfile::f3();
        assert_eq!(f3.eval(0.0), 0.0);
        assert_eq!(f3.eval(4.0), 0.0);
        assert!(f3.eval(3.999).abs() < 1e-100);
        assert!((smooth_cutoff(4.5) - 0.5).abs() < 1e-15);
        let expected = -0.3 - 0.4 * (-16.0f64).exp() - 0.2 * (-12.0f64).exp();
        assert!((InterfaceProfile::f2().eval(0.0) - expected).abs() < 1e-15);
        assert!((expected + 0.300_001_27).abs() < 1e-8);
    }

    #[test]
    fn profiles_vanish_beyond_support() {
        for p in [InterfaceProfile::f1(), InterfaceProfile::f2(), InterfaceProfile::f3(), InterfaceProfile::f6()] {
            let m = p.support_radius();
            for i in 0..100 {
                let x = m + i as f64 * 0.173;
                assert_eq!(p.eval(x), 0.0, "{p} at {x}");
                assert_eq!(p.eval(-x), 0.0, "{p} at {}", -x);
            }
        }
    }

    #[test]
    fn tabulated_profile_interpolates() {
        let p = InterfaceProfile::parse_table("# x f\n-1 0\n0, 0.5\n1 0\n").unwrap();
        assert_eq!(p.support_radius(), 1.0);
        assert!((p.eval(0.5) - 0.25).abs() < 1e-15);
        assert_eq!(p.eval(1.5), 0.0);
        assert!(InterfaceProfile::parse_table("0 1\n").is_err());
        assert!(InterfaceProfile::parse_table("1 0\n0 1\n").is_err());
    }

    #[test]
    fn half_disk_height() {
        let gr = HalfDiskInterface::new(2.0).unwrap();
        assert_eq!(gr.height(0.0), -2.0);
        assert_eq!(gr.height(2.0), 0.0);
        assert_eq!(gr.height(-2.0), 0.0);
        assert!((gr.height(2.0 / 2f64.sqrt()) + 2f64.sqrt()).abs() < 1e-12);
        assert!(HalfDiskInterface::new(0.0).is_err());
    }

    #[test]
    fn measurement_points() {
        let line = MeasurementLine::new(15.0, 0.55, 601).unwrap();
        let pts = line.points();
        assert_eq!(pts.len(), 601);
        assert_eq!(pts[0], Point::new(-15.0, 0.55));
        assert_eq!(pts[600], Point::new(15.0, 0.55));
        assert!((pts[300].x1).abs() < 1e-14);
        assert!(MeasurementLine::new(1.0, 0.5, 1).is_err());
    }

    #[test]
    fn full_scale_grid_counts() {
        let g = SamplingGrid::new((-10.0, 10.0), (-1.0, 0.5), 0.5, 0.1).unwrap();
        assert_eq!((g.nx(), g.ny()), (41, 16));
        let pts = g.points();
        assert_eq!(pts[0], Point::new(-10.0, -1.0));
        assert!((pts[pts.len() - 1].x2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn flat_profile_has_empty_mesh() {
        assert!(build_mesh(&InterfaceProfile::flat(), &medium(), 0.1).unwrap().is_empty());
    }

    #[test]
    fn f1_mesh_area_and_sign() {
        let m = medium();
        let mesh = build_mesh(&InterfaceProfile::f1(), &m, 0.05).unwrap();
        assert!(mesh.cells().iter().all(|c| c.contrast == -m.eta()));
        // the B-spline integrates to one
        assert!((mesh.total_area() - 0.6).abs() < 0.02 * 0.6, "{}", mesh.total_area());
        for c in mesh.cells() {
            let f = InterfaceProfile::f1().eval(c.center.x1);
            assert!(0.0 < c.center.x2 && c.center.x2 < f);
        }
    }

    #[test]
    fn f3_mesh_has_both_signs() {
        let m = medium();
        let mesh = build_mesh(&InterfaceProfile::f3(), &m, 0.05).unwrap();
        assert!(mesh.cells().iter().any(|c| c.contrast == m.eta()));
        assert!(mesh.cells().iter().any(|c| c.contrast == -m.eta()));
        for c in mesh.cells() {
            assert!(c.center.x2 != 0.0);
            let expected = if c.center.x2 > 0.0 { -m.eta() } else { m.eta() };
            assert_eq!(c.contrast, expected);
        }
    }

    #[test]
    fn half_disk_mesh_is_mirror_symmetric() {
        let m = medium();
        let gr = HalfDiskInterface::new(2.0).unwrap();
        let mesh = build_half_disk_mesh(&gr, &m, 0.2).unwrap();
        assert!(mesh.cells().iter().all(|c| c.contrast == m.eta()));
        for c in mesh.cells() {
            let mirrored = Point::new(-c.center.x1, c.center.x2);
            assert!(mesh.cells().iter().any(|d| d.center == mirrored));
        }
        let exact = std::f64::consts::PI * 4.0 / 2.0;
        assert!((mesh.total_area() - exact).abs() < 0.05 * exact);
    }

    #[test]
    fn distance_to_curve() {
        let p = InterfaceProfile::f1();
        assert!((p.distance_to(&Point::new(0.0, 0.1)) - 0.3).abs() < 1e-3);
        assert!((p.distance_to(&Point::new(5.0, -0.7)) - 0.7).abs() < 1e-12);
    }
}
