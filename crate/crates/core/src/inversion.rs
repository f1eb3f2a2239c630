//! Linear sampling reconstruction: Tikhonov-regularized near-field
//! equations, the normalized indicator and interface extraction.

use std::io::{BufRead, Write};

use faer::Mat;
use num_complex::Complex64;

use crate::forward::{ForwardError, NearFieldMatrix, ReferenceSolve, Variant};
use crate::geometry::{GeometryError, InterfaceProfile, MeasurementLine, SamplingGrid};
use crate::layered_green::Medium;
use crate::point::Point;
use crate::specfun::{phi, SpecFunError};

/// Regularization parameter used when none is given.
pub const DEFAULT_ALPHA: f64 = 5e-5;

/// Cut-off used by [`extract_interface`] when none is given.
pub const DEFAULT_CUTOFF: f64 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum InversionError {
    #[error("regularization parameter must be positive and finite, got {0}")]
    Alpha(f64),
    #[error("singular value decomposition failed")]
    Decomposition,
    #[error("right-hand side has length {found}, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("{data} data cannot be inverted with {probe} test functions")]
    VariantMismatch { data: Variant, probe: Variant },
    #[error("density norm vanished at {0}")]
    ZeroDensity(Point),
    #[error("sampling point {0} lies on the measurement line")]
    OnLine(Point),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("cut-off must lie in (0, 1], got {0}")]
    Cutoff(f64),
    #[error("indicator file: {0}")]
    Format(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TikhonovConfig {
    alpha: f64,
}

impl TikhonovConfig {
    pub fn new(alpha: f64) -> Result<Self, InversionError> {
        if alpha.is_finite() && alpha > 0.0 {
            Ok(Self { alpha })
        } else {
            Err(InversionError::Alpha(alpha))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for TikhonovConfig {
    fn default() -> Self {
        Self { alpha: DEFAULT_ALPHA }
    }
}

/// Singular system of a data matrix, reused for every right-hand side.
#[derive(Debug, Clone)]
pub struct SvdFilter {
    u: Mat<Complex64>,
    s: Vec<f64>,
    v: Mat<Complex64>,
}

impl SvdFilter {
    pub fn new(e: &Mat<Complex64>) -> Result<Self, InversionError> {
        let svd = e.svd().map_err(|_| InversionError::Decomposition)?;
        let s: Vec<f64> = svd.S().column_vector().iter().map(|x| x.re).collect();
        if s.iter().any(|x| !x.is_finite()) {
            return Err(InversionError::Decomposition);
        }
        Ok(Self { u: svd.U().to_owned(), s, v: svd.V().to_owned() })
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.s
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    fn factors(&self, alpha: f64) -> Vec<f64> {
        self.s.iter().map(|&s| s / (alpha + s * s)).collect()
    }

    /// `U^H b` for every column `b` of `rhs`.
    fn project(&self, rhs: &Mat<Complex64>) -> Mat<Complex64> {
        self.u.adjoint() * rhs
    }

    /// The Tikhonov solution `sum_i s_i/(alpha + s_i^2) <u_i, b> v_i`.
    pub fn solve(&self, rhs: &[Complex64], cfg: &TikhonovConfig) -> Result<Vec<Complex64>, InversionError> {
        self.check(rhs.len())?;
        let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let proj = self.project(&b);
        let f = self.factors(cfg.alpha);
        let coeffs = Mat::from_fn(f.len(), 1, |i, _| proj[(i, 0)] * f[i]);
        let g = &self.v * &coeffs;
        Ok((0..g.nrows()).map(|i| g[(i, 0)]).collect())
    }

    /// Norms of the Tikhonov solutions for every column of `rhs`, computed
    /// from the projections alone since `V` is unitary.
    pub fn solution_norms(&self, rhs: &Mat<Complex64>, cfg: &TikhonovConfig) -> Result<Vec<f64>, InversionError> {
        self.check(rhs.nrows())?;
        let proj = self.project(rhs);
        let f = self.factors(cfg.alpha);
        Ok((0..rhs.ncols())
            .map(|j| (0..f.len()).map(|i| f[i] * f[i] * proj[(i, j)].norm_sqr()).sum::<f64>().sqrt())
            .collect())
    }

    fn check(&self, len: usize) -> Result<(), InversionError> {
        if len == self.dim() {
            Ok(())
        } else {
            Err(InversionError::Dimension { expected: self.dim(), found: len })
        }
    }
}

/// Tikhonov solution of `E g = rhs` for the data matrix of `matrix`.
pub fn svd_filter_solve(matrix: &NearFieldMatrix, rhs: &[Complex64], cfg: &TikhonovConfig) -> Result<Vec<Complex64>, InversionError> {
    SvdFilter::new(matrix.entries())?.solve(rhs, cfg)
}

/// Test functions of the near-field equation.
#[derive(Debug, Clone, Copy)]
pub enum Probe<'a> {
    /// `Phi_k1(x_p, z)`.
    Raw,
    /// `G_r(x_p, z)` from a solved half-disk reference problem.
    Modified(&'a ReferenceSolve),
}

impl Probe<'_> {
    pub fn variant(&self) -> Variant {
        match self {
            Probe::Raw => Variant::Raw,
            Probe::Modified(_) => Variant::Modified,
        }
    }
}

/// Right-hand side of the near-field equation for the sampling point `z`.
pub fn test_rhs(medium: &Medium, line: &MeasurementLine, z: &Point, probe: Probe<'_>) -> Result<Vec<Complex64>, InversionError> {
    let m = test_matrix(medium, line, std::slice::from_ref(z), probe)?;
    Ok((0..m.nrows()).map(|p| m[(p, 0)]).collect())
}

/// Right-hand sides for all sampling points, one column per point.
pub fn test_matrix(medium: &Medium, line: &MeasurementLine, zs: &[Point], probe: Probe<'_>) -> Result<Mat<Complex64>, InversionError> {
    let xs = line.points();
    for z in zs {
        if xs.iter().any(|x| x.dist(z) < crate::specfun::COINCIDENCE_TOL) {
            return Err(InversionError::OnLine(*z));
        }
    }
    match probe {
        Probe::Raw => {
            let mut out = Mat::zeros(xs.len(), zs.len());
            for (j, z) in zs.iter().enumerate() {
                for (p, x) in xs.iter().enumerate() {
                    out[(p, j)] = phi(medium.kappa1(), x, z)?;
                }
            }
            Ok(out)
        }
        Probe::Modified(reference) => Ok(reference.total_at(zs)?.transpose().to_owned()),
    }
}

/// Sampling grid with normalized indicator values.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorField {
    grid: SamplingGrid,
    values: Vec<f64>,
    raw_norms: Vec<f64>,
    alpha: f64,
    variant: Variant,
}

impl IndicatorField {
    /// Normalizes `1 / norms` by its maximum.
    pub fn from_norms(grid: SamplingGrid, raw_norms: Vec<f64>, alpha: f64, variant: Variant) -> Result<Self, InversionError> {
        assert_eq!(grid.len(), raw_norms.len());
        let points = grid.points();
        if let Some(k) = raw_norms.iter().position(|&n| !(n > 0.0 && n.is_finite())) {
            return Err(InversionError::ZeroDensity(points[k]));
        }
        let ind: Vec<f64> = raw_norms.iter().map(|n| 1.0 / n).collect();
        let max = ind.iter().cloned().fold(0.0, f64::max);
        let values = ind.iter().map(|v| v / max).collect();
        Ok(Self { grid, values, raw_norms, alpha, variant })
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    /// `NInd` in grid order (`x1` fastest).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn raw_norms(&self) -> &[f64] {
        &self.raw_norms
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// `NInd` at grid node `(i, j)`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx() + i]
    }

    /// CSV with a commented header describing the grid, then one
    /// `x1,x2,nind,raw_norm` row per node.
    pub fn write_csv(&self, mut w: impl Write, cutoff: f64) -> std::io::Result<()> {
        let g = &self.grid;
        writeln!(w, "# grid x1 {:?} {:?} {} x2 {:?} {:?} {}", g.x_range.0, g.x_range.1, g.nx(), g.y_range.0, g.y_range.1, g.ny())?;
        writeln!(w, "# steps {:?} {:?}", g.hx, g.hy)?;
        writeln!(w, "# alpha {:?}", self.alpha)?;
        writeln!(w, "# variant {}", self.variant)?;
        writeln!(w, "# cutoff {cutoff:?}")?;
        writeln!(w, "x1,x2,nind,raw_norm")?;
        for (k, p) in g.points().iter().enumerate() {
            writeln!(w, "{:?},{:?},{:?},{:?}", p.x1, p.x2, self.values[k], self.raw_norms[k])?;
        }
        Ok(())
    }

    /// Binary 8-bit PGM, one pixel per node with value `round(255 NInd)`.
    /// The first row is the largest `x2`, columns run with increasing `x1`.
    pub fn write_pgm(&self, mut w: impl Write) -> std::io::Result<()> {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        write!(w, "P5\n{nx} {ny}\n255\n")?;
        let mut pixels = Vec::with_capacity(nx * ny);
        for j in (0..ny).rev() {
            for i in 0..nx {
                pixels.push((255.0 * self.value(i, j)).round().clamp(0.0, 255.0) as u8);
            }
        }
        w.write_all(&pixels)
    }

    /// Reads a file written by [`Self::write_csv`].
    pub fn read_csv(r: impl std::io::Read) -> Result<Self, InversionError> {
        let bad = |m: &str| InversionError::Format(m.to_string());
        let mut alpha = None;
        let mut variant = None;
        let mut steps = None;
        let mut ranges = None;
        let mut rows = Vec::new();
        for line in std::io::BufReader::new(r).lines() {
            let line = line?;
            if let Some(rest) = line.strip_prefix("# ") {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                match parts.first().copied() {
                    Some("grid") if parts.len() == 9 => {
                        let f = |i: usize| parts[i].parse::<f64>().map_err(|_| bad("grid"));
                        ranges = Some(((f(2)?, f(3)?), (f(6)?, f(7)?)));
                    }
                    Some("steps") if parts.len() == 3 => {
                        let f = |i: usize| parts[i].parse::<f64>().map_err(|_| bad("steps"));
                        steps = Some((f(1)?, f(2)?));
                    }
                    Some("alpha") => alpha = parts.get(1).and_then(|v| v.parse::<f64>().ok()),
                    Some("variant") => variant = parts.get(1).and_then(|v| v.parse::<Variant>().ok()),
                    _ => {}
                }
            } else if line.starts_with("x1,") || line.is_empty() {
                continue;
            } else {
                let cols: Vec<f64> = line.split(',').map(|c| c.parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad("row"))?;
                if cols.len() != 4 {
                    return Err(bad("row"));
                }
                rows.push((cols[2], cols[3]));
            }
        }
        let ((xr, yr), (hx, hy)) = (ranges.ok_or_else(|| bad("grid"))?, steps.ok_or_else(|| bad("steps"))?);
        let grid = SamplingGrid::new(xr, yr, hx, hy)?;
        if rows.len() != grid.len() {
            return Err(bad("row count"));
        }
        Ok(Self {
            grid,
            values: rows.iter().map(|r| r.0).collect(),
            raw_norms: rows.iter().map(|r| r.1).collect(),
            alpha: alpha.ok_or_else(|| bad("alpha"))?,
            variant: variant.ok_or_else(|| bad("variant"))?,
        })
    }
}

/// Indicator of every grid point from one shared singular decomposition.
pub fn indicator_map(matrix: &NearFieldMatrix, grid: &SamplingGrid, cfg: &TikhonovConfig, probe: Probe<'_>) -> Result<IndicatorField, InversionError> {
    let filter = SvdFilter::new(matrix.entries())?;
    indicator_map_with(&filter, matrix, grid, cfg, probe)
}

/// [`indicator_map`] with a precomputed decomposition of `matrix`.
pub fn indicator_map_with(
    filter: &SvdFilter,
    matrix: &NearFieldMatrix,
    grid: &SamplingGrid,
    cfg: &TikhonovConfig,
    probe: Probe<'_>,
) -> Result<IndicatorField, InversionError> {
    if probe.variant() != matrix.variant() {
        return Err(InversionError::VariantMismatch { data: matrix.variant(), probe: probe.variant() });
    }
    let rhs = test_matrix(matrix.medium(), matrix.line(), &grid.points(), probe)?;
    let norms = filter.solution_norms(&rhs, cfg)?;
    IndicatorField::from_norms(*grid, norms, cfg.alpha(), matrix.variant())
}

/// Nodes with `NInd >= cutoff` in one grid column.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnEstimate {
    pub x1: f64,
    pub x2: Vec<f64>,
}

impl ColumnEstimate {
    /// Upper envelope of the surviving nodes, the interface estimate.
    pub fn upper(&self) -> Option<f64> {
        self.x2.iter().cloned().reduce(f64::max)
    }
}

/// Thresholded indicator, column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceEstimate {
    pub cutoff: f64,
    pub columns: Vec<ColumnEstimate>,
}

impl InterfaceEstimate {
    pub fn is_empty(&self) -> bool {
        self.columns.iter().all(|c| c.x2.is_empty())
    }

    /// Abscissae of the columns with at least one surviving node.
    pub fn active_columns(&self) -> Vec<f64> {
        self.columns.iter().filter(|c| !c.x2.is_empty()).map(|c| c.x1).collect()
    }

    /// Jaccard index between the active columns and the columns inside
    /// `[lo, hi]`.
    pub fn column_jaccard(&self, lo: f64, hi: f64) -> f64 {
        let inside = |x: f64| x >= lo && x <= hi;
        let mut both = 0;
        let mut either = 0;
        for c in &self.columns {
            let a = !c.x2.is_empty();
            let b = inside(c.x1);
            both += (a && b) as usize;
            either += (a || b) as usize;
        }
        if either == 0 {
            0.0
        } else {
            both as f64 / either as f64
        }
    }
}

/// Keeps the nodes where `NInd >= cutoff` (the indicator is large inside
/// the perturbation region).
pub fn extract_interface(field: &IndicatorField, cutoff: f64) -> Result<InterfaceEstimate, InversionError> {
    if !(cutoff > 0.0 && cutoff <= 1.0) {
        return Err(InversionError::Cutoff(cutoff));
    }
    let g = field.grid();
    let columns: Vec<ColumnEstimate> = (0..g.nx())
        .map(|i| ColumnEstimate { x1: g.x1(i), x2: (0..g.ny()).filter(|&j| field.value(i, j) >= cutoff).map(|j| g.x2(j)).collect() })
        .collect();
    let estimate = InterfaceEstimate { cutoff, columns };
    if estimate.is_empty() {
        log::warn!("no grid point reaches the cut-off {cutoff}");
    }
    Ok(estimate)
}

/// Which grid points count as lying inside the scatterer when comparing
/// indicator levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InsideRegion {
    /// Strictly between the profile and `x2 = 0`, at least `margin` from
    /// both curves.
    Perturbation { margin: f64 },
    /// Below the profile by at most `depth`, at least `margin` from it.
    BelowProfile { margin: f64, depth: f64 },
}

/// Mean indicator over an inside region divided by the mean over points at
/// least `margin` above the profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separation {
    pub inside_mean: f64,
    pub inside_count: usize,
    pub above_mean: f64,
    pub above_count: usize,
}

impl Separation {
    pub fn ratio(&self) -> f64 {
        self.inside_mean / self.above_mean
    }
}

/// Slack for grid points that sit exactly at the margin.
const MARGIN_SLACK: f64 = 1e-9;

pub fn separation(field: &IndicatorField, profile: &InterfaceProfile, region: InsideRegion) -> Separation {
    let above_margin = match region {
        InsideRegion::Perturbation { margin } | InsideRegion::BelowProfile { margin, .. } => margin,
    };
    let (mut si, mut ni, mut sa, mut na) = (0.0, 0, 0.0, 0);
    for (k, z) in field.grid().points().iter().enumerate() {
        let f = profile.eval(z.x1);
        let v = field.values()[k];
        if z.x2 > f + above_margin - MARGIN_SLACK {
            sa += v;
            na += 1;
            continue;
        }
        let inside = match region {
            InsideRegion::Perturbation { margin } => {
                z.x2 > f.min(0.0) && z.x2 < f.max(0.0) && z.x2.abs() >= margin - MARGIN_SLACK && profile.distance_to(z) >= margin - MARGIN_SLACK
            }
            InsideRegion::BelowProfile { margin, depth } => z.x2 < f && z.x2 >= f - depth - MARGIN_SLACK && profile.distance_to(z) >= margin - MARGIN_SLACK,
        };
        if inside {
            si += v;
            ni += 1;
        }
    }
    let mean = |s: f64, n: usize| if n == 0 { f64::NAN } else { s / n as f64 };
    Separation { inside_mean: mean(si, ni), inside_count: ni, above_mean: mean(sa, na), above_count: na }
}
