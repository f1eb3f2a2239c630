//! Scattering data from the Lippmann–Schwinger equation over the cells of a
//! perturbation mesh, posed relative to the flat two-layer medium.
//!
//! With `G0` the flat-interface Green's function and `w_n = c_n A_n` the
//! weighted contrast of cell `n`, the total field of a point source `y`
//! satisfies
//!
//! ```text
//! u(c_m, y) - sum_n K_mn w_n u(c_n, y) = G0(c_m, y)
//! ```
//!
//! where `K_mn = G0(c_m, c_n)` off the diagonal and the diagonal holds the
//! equivalent-disk integral of the local free-space kernel plus the smooth
//! reflected part. The system matrix does not depend on the source, so one
//! LU factorization serves every source.

mod nearfield;

use std::sync::Arc;

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use num_complex::Complex64;

use crate::geometry::{build_half_disk_mesh, build_mesh, GeometryError, HalfDiskInterface, InterfaceProfile, MeasurementLine, PerturbationMesh};
use crate::layered_green::{GreenError, LayeredGreen, Medium};
use crate::point::Point;
use crate::specfun::{disk_integral_phi, SpecFunError};

pub use nearfield::{add_noise, relative_asymmetry, spectral_norm, FormatError, NearFieldMatrix, Variant, FORMAT_VERSION};

/// Largest dense system the half-disk reference solve may assemble.
pub const MAX_REFERENCE_CELLS: usize = 20_000;

/// Pivot ratio below which the factorized system is reported singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForwardError {
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("perturbation mesh is empty")]
    EmptyMesh,
    #[error("Lippmann-Schwinger system with {cells} cells is numerically singular (pivot ratio {pivot_ratio:e})")]
    Singular { cells: usize, pivot_ratio: f64 },
    #[error("half-disk mesh needs {cells} cells, above the budget of {budget}; largest feasible radius at h = {h} is {r_max:.3}")]
    Budget { cells: usize, budget: usize, h: f64, r_max: f64 },
    #[error("point {point} must lie above the interface (height {height})")]
    BelowInterface { point: Point, height: f64 },
    #[error("measurement line at height {b} must lie above the profile maximum {sup} and above x2 = 0")]
    LineTooLow { b: f64, sup: f64 },
    #[error("modified data needs a half-disk reference interface")]
    MissingReference,
}

/// Factorized Lippmann–Schwinger system of one perturbation mesh.
pub struct LSSystem {
    mesh: PerturbationMesh,
    green: Arc<LayeredGreen>,
    centers: Vec<Point>,
    weights: Vec<Complex64>,
    lu: Option<PartialPivLu<Complex64>>,
    condition: f64,
}

impl std::fmt::Debug for LSSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LSSystem")
            .field("cells", &self.mesh.len())
            .field("medium", self.green.medium())
            .field("condition", &self.condition)
            .finish()
    }
}

/// Assembles and factorizes the system of a non-empty mesh.
pub fn assemble_ls(mesh: PerturbationMesh, medium: Medium) -> Result<LSSystem, ForwardError> {
    if mesh.is_empty() {
        return Err(ForwardError::EmptyMesh);
    }
    LSSystem::new(mesh, Arc::new(LayeredGreen::new(medium)))
}

impl LSSystem {
    /// Assembles the system; an empty mesh gives the trivial system whose
    /// scattered field is that of the flat interface.
    pub fn new(mesh: PerturbationMesh, green: Arc<LayeredGreen>) -> Result<Self, ForwardError> {
        let centers = mesh.centers();
        let weights: Vec<Complex64> = mesh.cells().iter().map(|c| Complex64::new(c.contrast * c.area, 0.0)).collect();
        if mesh.is_empty() {
            return Ok(Self { mesh, green, centers, weights, lu: None, condition: 1.0 });
        }
        let matrix = system_matrix(&mesh, &green, &centers, &weights)?;
        let norm_a = one_norm(&matrix);
        let lu = matrix.partial_piv_lu();
        let pivot_ratio = pivot_ratio(&lu);
        if !(pivot_ratio > SINGULAR_PIVOT_RATIO) {
            return Err(ForwardError::Singular { cells: mesh.len(), pivot_ratio });
        }
        let condition = norm_a * inverse_one_norm_estimate(&lu);
        log::debug!("LS system: {} cells, condition estimate {condition:.3e}", mesh.len());
        Ok(Self { mesh, green, centers, weights, lu: Some(lu), condition })
    }

    pub fn mesh(&self) -> &PerturbationMesh {
        &self.mesh
    }

    pub fn medium(&self) -> &Medium {
        self.green.medium()
    }

    pub fn green(&self) -> &Arc<LayeredGreen> {
        &self.green
    }

    /// Estimate of the 1-norm condition number `|A|_1 |A^-1|_1`.
    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    /// Total field at the cell centres for a point source at `source`.
    pub fn solve_total_field(&self, source: &Point) -> Result<Vec<Complex64>, ForwardError> {
        self.check_source(source)?;
        let rhs = self.green.tabulate(&self.centers, std::slice::from_ref(source))?;
        let u = self.solve(rhs);
        Ok((0..u.nrows()).map(|i| u[(i, 0)]).collect())
    }

    /// Solves the system for every column of `rhs`.
    pub fn solve(&self, rhs: Mat<Complex64>) -> Mat<Complex64> {
        match &self.lu {
            Some(lu) => lu.solve(&rhs),
            None => rhs,
        }
    }

    /// `u^s(receiver, source)`: total field minus the incident `Phi_k1`.
    pub fn scattered_field(&self, source: &Point, receiver: &Point) -> Result<Complex64, ForwardError> {
        self.check_source(source)?;
        let mut value = self.green.g0_scattered(receiver, source)?;
        if self.mesh.is_empty() {
            return Ok(value);
        }
        let u = self.solve_total_field(source)?;
        let row = self.green.tabulate(std::slice::from_ref(receiver), &self.centers)?;
        for (n, un) in u.iter().enumerate() {
            value += row[(0, n)] * self.weights[n] * un;
        }
        Ok(value)
    }

    /// Solves for sources at every point of `points` and samples the
    /// scattered fields at the same points.
    pub fn line_response(&self, points: &[Point]) -> Result<LineResponse, ForwardError> {
        for p in points {
            self.check_source(p)?;
        }
        let direct = self.green.tabulate_scattered(points, points)?;
        if self.mesh.is_empty() {
            return Ok(LineResponse {
                points: points.to_vec(),
                total: Mat::zeros(0, points.len()),
                scattered: direct,
            });
        }
        // G0 is symmetric, so the receiver kernel is the transpose of the
        // source table.
        let incident = self.green.tabulate(&self.centers, points)?;
        let total = self.solve(incident.clone());
        let weighted = Mat::from_fn(total.nrows(), total.ncols(), |n, q| self.weights[n] * total[(n, q)]);
        let volume = incident.transpose() * &weighted;
        let scattered = Mat::from_fn(points.len(), points.len(), |p, q| direct[(p, q)] + volume[(p, q)]);
        Ok(LineResponse { points: points.to_vec(), total, scattered })
    }

    /// Total field `u(z, x_p)` at each target `z` for the sources of `response`,
    /// by the volume representation formula. Rows follow `targets`.
    pub fn total_field_at(&self, targets: &[Point], response: &LineResponse) -> Result<Mat<Complex64>, ForwardError> {
        let mut out = self.green.tabulate(targets, &response.points)?;
        if self.mesh.is_empty() {
            return Ok(out);
        }
        let kernel = self.green.tabulate(targets, &self.centers)?;
        let weighted = Mat::from_fn(response.total.nrows(), response.total.ncols(), |n, q| self.weights[n] * response.total[(n, q)]);
        let volume = &kernel * &weighted;
        out += &volume;
        Ok(out)
    }

    fn check_source(&self, source: &Point) -> Result<(), ForwardError> {
        if !source.is_finite() {
            return Err(GreenError::NonFinite(*source).into());
        }
        if source.x2 <= 0.0 {
            return Err(ForwardError::BelowInterface { point: *source, height: 0.0 });
        }
        let half = 0.5 * self.mesh.cell_width();
        if self.centers.iter().any(|c| (c.x1 - source.x1).abs() < half && (c.x2 - source.x2).abs() < half) {
            return Err(ForwardError::BelowInterface { point: *source, height: source.x2 + half });
        }
        Ok(())
    }
}

/// Fields of one set of point sources that double as receivers.
#[derive(Debug, Clone)]
pub struct LineResponse {
    points: Vec<Point>,
    /// Total field at the cell centres, one column per source.
    total: Mat<Complex64>,
    /// `scattered[(p, q)] = u^s(points[p], points[q])`.
    scattered: Mat<Complex64>,
}

impl LineResponse {
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn scattered(&self) -> &Mat<Complex64> {
        &self.scattered
    }

    pub fn into_scattered(self) -> Mat<Complex64> {
        self.scattered
    }
}

fn system_matrix(mesh: &PerturbationMesh, green: &LayeredGreen, centers: &[Point], weights: &[Complex64]) -> Result<Mat<Complex64>, ForwardError> {
    let medium = green.medium();
    let kernel = green.tabulate_regular(centers, centers)?;
    let radius = mesh.cell_width() / std::f64::consts::PI.sqrt();
    let mut self_terms = Vec::with_capacity(mesh.len());
    for cell in mesh.cells() {
        let local = disk_integral_phi(medium.kappa_at(cell.center.x2), radius)?;
        // The regular table holds the reflected part on the diagonal.
        self_terms.push(local / cell.area);
    }
    let n = centers.len();
    Ok(Mat::from_fn(n, n, |i, j| {
        let k = if i == j { kernel[(i, i)] + self_terms[i] } else { kernel[(i, j)] };
        let delta = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        delta - k * weights[j]
    }))
}

fn one_norm(m: &Mat<Complex64>) -> f64 {
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn pivot_ratio(lu: &PartialPivLu<Complex64>) -> f64 {
    let u = lu.U();
    let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].norm()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if max > 0.0 && max.is_finite() && min.is_finite() {
        min / max
    } else {
        0.0
    }
}

/// Hager's estimate of `|A^-1|_1` from a few solves with `A` and `A^H`.
fn inverse_one_norm_estimate(lu: &PartialPivLu<Complex64>) -> f64 {
    let n = lu.U().nrows();
    let mut x = Mat::from_fn(n, 1, |_, _| Complex64::new(1.0 / n as f64, 0.0));
    let mut estimate = 0.0;
    let mut last_index = usize::MAX;
    for _ in 0..5 {
        let y = lu.solve(&x);
        estimate = (0..n).map(|i| y[(i, 0)].norm()).sum();
        let sign = Mat::from_fn(n, 1, |i, _| {
            let v = y[(i, 0)];
            let r = v.norm();
            if r > 0.0 {
                v / r
            } else {
                Complex64::new(1.0, 0.0)
            }
        });
        let z = lu.solve_adjoint(&sign);
        let (j, zmax) = (0..n).map(|i| (i, z[(i, 0)].norm())).fold((0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        let ztx: f64 = (0..n).map(|i| (z[(i, 0)].conj() * x[(i, 0)]).re).sum();
        if zmax <= ztx || j == last_index {
            break;
        }
        last_index = j;
        x = Mat::zeros(n, 1);
        x[(j, 0)] = Complex64::new(1.0, 0.0);
    }
    estimate
}

/// Checks that a measurement line sits above the profile and the flat interface.
pub fn check_line(profile: &InterfaceProfile, line: &MeasurementLine) -> Result<(), ForwardError> {
    let sup = profile.sup().max(0.0);
    if !(line.height() > sup) {
        return Err(ForwardError::LineTooLow { b: line.height(), sup });
    }
    Ok(())
}

/// Largest half-disk radius whose mesh at cell width `h` fits the budget.
pub fn max_reference_radius(h: f64) -> f64 {
    (2.0 * MAX_REFERENCE_CELLS as f64 * h * h / std::f64::consts::PI).sqrt()
}

/// Solver for the half-disk reference problem.
#[derive(Debug)]
pub struct ReferenceField {
    gr: HalfDiskInterface,
    system: LSSystem,
}

impl ReferenceField {
    pub fn new(medium: Medium, gr: HalfDiskInterface, h: f64) -> Result<Self, ForwardError> {
        Self::with_green(Arc::new(LayeredGreen::new(medium)), gr, h)
    }

    pub fn with_green(green: Arc<LayeredGreen>, gr: HalfDiskInterface, h: f64) -> Result<Self, ForwardError> {
        let estimate = (std::f64::consts::PI * gr.radius() * gr.radius() / (2.0 * h * h)).ceil() as usize;
        if estimate > 2 * MAX_REFERENCE_CELLS {
            return Err(budget_error(estimate, h));
        }
        let mesh = build_half_disk_mesh(&gr, green.medium(), h)?;
        if mesh.len() > MAX_REFERENCE_CELLS {
            return Err(budget_error(mesh.len(), h));
        }
        let system = LSSystem::new(mesh, green)?;
        Ok(Self { gr, system })
    }

    pub fn interface(&self) -> &HalfDiskInterface {
        &self.gr
    }

    pub fn system(&self) -> &LSSystem {
        &self.system
    }

    /// `G_r^s(receiver, source)`.
    pub fn scattered(&self, source: &Point, receiver: &Point) -> Result<Complex64, ForwardError> {
        for p in [source, receiver] {
            let floor = self.gr.height(p.x1);
            if p.x2 <= floor {
                return Err(ForwardError::BelowInterface { point: *p, height: floor });
            }
        }
        self.system.scattered_field(source, receiver)
    }
}

fn budget_error(cells: usize, h: f64) -> ForwardError {
    ForwardError::Budget { cells, budget: MAX_REFERENCE_CELLS, h, r_max: max_reference_radius(h) }
}

/// `G_r^s(receiver, source)` for the half-disk interface of radius `gr.radius()`.
pub fn gr_scattered(medium: Medium, gr: HalfDiskInterface, source: &Point, receiver: &Point, h: f64) -> Result<Complex64, ForwardError> {
    ReferenceField::new(medium, gr, h)?.scattered(source, receiver)
}

/// The half-disk reference problem solved for point sources on a line.
#[derive(Debug)]
pub struct ReferenceSolve {
    field: ReferenceField,
    response: LineResponse,
}

impl ReferenceSolve {
    pub fn new(medium: Medium, gr: HalfDiskInterface, h: f64, line: &MeasurementLine) -> Result<Self, ForwardError> {
        Self::with_green(Arc::new(LayeredGreen::new(medium)), gr, h, line)
    }

    fn with_green(green: Arc<LayeredGreen>, gr: HalfDiskInterface, h: f64, line: &MeasurementLine) -> Result<Self, ForwardError> {
        let field = ReferenceField::with_green(green, gr, h)?;
        let response = field.system().line_response(&line.points())?;
        Ok(Self { field, response })
    }

    pub fn field(&self) -> &ReferenceField {
        &self.field
    }

    /// `G_r^s(x_p, x_q)` on the line.
    pub fn scattered(&self) -> &Mat<Complex64> {
        self.response.scattered()
    }

    /// `G_r(z, x_p)` for every target `z` (rows) and line point `x_p`
    /// (columns). By reciprocity this is also `G_r(x_p, z)`.
    pub fn total_at(&self, targets: &[Point]) -> Result<Mat<Complex64>, ForwardError> {
        self.field.system().total_field_at(targets, &self.response)
    }
}

/// Everything computed while synthesizing one data set, kept for the
/// reconstruction step that needs the reference field at sampling points.
#[derive(Debug)]
pub struct Synthesis {
    pub matrix: NearFieldMatrix,
    pub reference: Option<ReferenceSolve>,
    pub condition: f64,
}

/// Near-field data of `profile` on `line`.
pub fn synthesize(
    profile: &InterfaceProfile,
    medium: Medium,
    line: &MeasurementLine,
    variant: Variant,
    gr: Option<HalfDiskInterface>,
    h: f64,
) -> Result<NearFieldMatrix, ForwardError> {
    synthesize_full(profile, medium, line, variant, gr, h).map(|s| s.matrix)
}

/// Like [`synthesize`], also returning the reference solve and the
/// condition estimate of the perturbation system.
pub fn synthesize_full(
    profile: &InterfaceProfile,
    medium: Medium,
    line: &MeasurementLine,
    variant: Variant,
    gr: Option<HalfDiskInterface>,
    h: f64,
) -> Result<Synthesis, ForwardError> {
    check_line(profile, line)?;
    let green = Arc::new(LayeredGreen::new(medium));
    let points = line.points();
    let mesh = build_mesh(profile, &medium, h)?;
    let system = LSSystem::new(mesh, green.clone())?;
    let condition = system.condition_estimate();
    let mut entries = system.line_response(&points)?.into_scattered();
    let reference = match (variant, gr) {
        (Variant::Raw, _) => None,
        (Variant::Modified, None) => return Err(ForwardError::MissingReference),
        (Variant::Modified, Some(gr)) => {
            let reference = ReferenceSolve::with_green(green, gr, h, line)?;
            entries -= reference.scattered();
            Some(reference)
        }
    };
    let matrix = NearFieldMatrix::new(entries, *line, medium, variant, profile.id().to_string(), h, gr.map(|g| g.radius()));
    Ok(Synthesis { matrix, reference, condition })
}
