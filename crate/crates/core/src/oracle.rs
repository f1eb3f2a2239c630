//! Finite-difference frequency-domain reference solver.
//!
//! Second-order five-point discretization of `Delta u + kappa(x)^2 u = -delta_y`
//! on a uniform node grid, with complex coordinate stretching in absorbing
//! layers around the box and homogeneous Dirichlet conditions outside them.
//! Nodes within `1e-12` of the interface use the mean of the two `kappa^2`.
//! It shares no code with the integral-equation solver beyond the profile
//! definition and the free-space kernel used to split off the incident field.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64;

use crate::geometry::InterfaceProfile;
use crate::layered_green::Medium;
use crate::point::Point;
use crate::specfun::phi;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("grid step {step} exceeds lambda2/20 = {limit}")]
    GridTooCoarse { step: f64, limit: f64 },
    #[error("absorbing layer thickness {thickness} is below lambda1/2 = {limit}")]
    LayerTooThin { thickness: f64, limit: f64 },
    #[error("box x1 range [{lo}, {hi}] must contain [{need_lo}, {need_hi}]")]
    BoxTooNarrow { lo: f64, hi: f64, need_lo: f64, need_hi: f64 },
    #[error("point {0} lies outside the box interior")]
    OutsideBox(Point),
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    #[error("sparse factorization failed: {0}")]
    Solve(String),
}

/// Geometry and absorbing layers of the finite-difference grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FDFDConfig {
    /// Physical box `[x_lo, x_hi] x [y_lo, y_hi]`; the layers lie outside it.
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub grid_step: f64,
    pub pml_thickness: f64,
    /// Peak of the quadratic damping profile `sigma`.
    pub pml_strength: f64,
}

impl FDFDConfig {
    /// The box `[-half_width, half_width] x y_range` with layers of
    /// thickness `max(lambda1/2, 4)` and damping peak `24 / thickness`.
    pub fn around(medium: &Medium, half_width: f64, y_range: (f64, f64), grid_step: f64) -> Self {
        let pml = (medium.wavelength() / 2.0).max(4.0);
        Self { x_range: (-half_width, half_width), y_range, grid_step, pml_thickness: pml, pml_strength: 24.0 / pml }
    }

    pub fn validate(&self, profile: &InterfaceProfile, medium: &Medium) -> Result<(), OracleError> {
        let limit = medium.wavelength2() / 20.0;
        if !(self.grid_step > 0.0) || self.grid_step > limit * (1.0 + 1e-12) {
            return Err(OracleError::GridTooCoarse { step: self.grid_step, limit });
        }
        let limit = medium.wavelength() / 2.0;
        if !(self.pml_thickness >= limit) {
            return Err(OracleError::LayerTooThin { thickness: self.pml_thickness, limit });
        }
        if !(self.pml_strength > 0.0) || !(self.y_range.1 > self.y_range.0) {
            return Err(OracleError::Config("layer strength and box height must be positive"));
        }
        let need = profile.support_radius() + 2.0 * medium.wavelength();
        if self.x_range.0 > -need || self.x_range.1 < need {
            return Err(OracleError::BoxTooNarrow { lo: self.x_range.0, hi: self.x_range.1, need_lo: -need, need_hi: need });
        }
        Ok(())
    }
}

/// Node grid covering the box and its layers. Node coordinates are integer
/// multiples of the step, so points with such coordinates are nodes.
struct Grid {
    h: f64,
    i0: i64,
    j0: i64,
    nx: usize,
    ny: usize,
    cfg: FDFDConfig,
}

impl Grid {
    fn new(cfg: &FDFDConfig) -> Self {
        let h = cfg.grid_step;
        let i0 = ((cfg.x_range.0 - cfg.pml_thickness) / h).floor() as i64;
        let i1 = ((cfg.x_range.1 + cfg.pml_thickness) / h).ceil() as i64;
        let j0 = ((cfg.y_range.0 - cfg.pml_thickness) / h).floor() as i64;
        let j1 = ((cfg.y_range.1 + cfg.pml_thickness) / h).ceil() as i64;
        // boundary nodes carry the Dirichlet condition and are not unknowns
        Self { h, i0: i0 + 1, j0: j0 + 1, nx: (i1 - i0 - 1) as usize, ny: (j1 - j0 - 1) as usize, cfg: *cfg }
    }

    fn x(&self, i: f64) -> f64 {
        (self.i0 as f64 + i) * self.h
    }

    fn y(&self, j: f64) -> f64 {
        (self.j0 as f64 + j) * self.h
    }

    fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Stretching factor at a coordinate, `1 + i sigma(d) / kappa1`.
    fn stretch(&self, t: f64, range: (f64, f64), kappa1: f64) -> Complex64 {
        let d = if t < range.0 {
            range.0 - t
        } else if t > range.1 {
            t - range.1
        } else {
            0.0
        };
        let s = d / self.cfg.pml_thickness;
        Complex64::new(1.0, self.cfg.pml_strength * s * s / kappa1)
    }

    fn inside_box(&self, p: &Point) -> bool {
        let (x, y) = (self.cfg.x_range, self.cfg.y_range);
        p.x1 >= x.0 && p.x1 <= x.1 && p.x2 >= y.0 && p.x2 <= y.1
    }

    /// Bilinear weights of the four nodes around `p`.
    fn stencil(&self, p: &Point) -> [(usize, f64); 4] {
        let fi = p.x1 / self.h - self.i0 as f64;
        let fj = p.x2 / self.h - self.j0 as f64;
        let (i, j) = (fi.floor(), fj.floor());
        let (tx, ty) = (fi - i, fj - j);
        let (i, j) = (i as usize, j as usize);
        [
            (self.index(i, j), (1.0 - tx) * (1.0 - ty)),
            (self.index(i + 1, j), tx * (1.0 - ty)),
            (self.index(i, j + 1), (1.0 - tx) * ty),
            (self.index(i + 1, j + 1), tx * ty),
        ]
    }
}

fn kappa_sq(profile: &InterfaceProfile, medium: &Medium, p: &Point) -> f64 {
    let f = profile.eval(p.x1);
    let (k1, k2) = (medium.kappa1() * medium.kappa1(), medium.kappa2() * medium.kappa2());
    if (p.x2 - f).abs() < 1e-12 {
        0.5 * (k1 + k2)
    } else if p.x2 > f {
        k1
    } else {
        k2
    }
}

/// Scattered field `u - Phi_k1(., source)` at `receivers` for a point source
/// above the interface.
pub fn fdfd_scattered(
    profile: &InterfaceProfile,
    medium: &Medium,
    cfg: &FDFDConfig,
    source: &Point,
    receivers: &[Point],
) -> Result<Vec<Complex64>, OracleError> {
    cfg.validate(profile, medium)?;
    let grid = Grid::new(cfg);
    for p in std::iter::once(source).chain(receivers) {
        if !grid.inside_box(p) {
            return Err(OracleError::OutsideBox(*p));
        }
    }
    let (nx, ny, h) = (grid.nx, grid.ny, grid.h);
    let k1 = medium.kappa1();
    let sx = |i: f64| grid.stretch(grid.x(i), cfg.x_range, k1);
    let sy = |j: f64| grid.stretch(grid.y(j), cfg.y_range, k1);
    let inv_h2 = 1.0 / (h * h);
    let mut triplets = Vec::with_capacity(5 * nx * ny);
    for j in 0..ny {
        let (jf, syj) = (j as f64, sy(j as f64));
        let (sy_dn, sy_up) = (sy(jf - 0.5), sy(jf + 0.5));
        for i in 0..nx {
            let if_ = i as f64;
            let sxi = sx(if_);
            let (sx_l, sx_r) = (sx(if_ - 0.5), sx(if_ + 0.5));
            let row = grid.index(i, j);
            let cl = inv_h2 / (sxi * sx_l);
            let cr = inv_h2 / (sxi * sx_r);
            let cd = inv_h2 / (syj * sy_dn);
            let cu = inv_h2 / (syj * sy_up);
            let ksq = kappa_sq(profile, medium, &Point::new(grid.x(if_), grid.y(jf)));
            triplets.push(Triplet::new(row, row, Complex64::new(ksq, 0.0) - cl - cr - cd - cu));
            if i > 0 {
                triplets.push(Triplet::new(row, grid.index(i - 1, j), cl));
            }
            if i + 1 < nx {
                triplets.push(Triplet::new(row, grid.index(i + 1, j), cr));
            }
            if j > 0 {
                triplets.push(Triplet::new(row, grid.index(i, j - 1), cd));
            }
            if j + 1 < ny {
                triplets.push(Triplet::new(row, grid.index(i, j + 1), cu));
            }
        }
    }
    let n = nx * ny;
    let a = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &triplets).map_err(|e| OracleError::Solve(format!("{e:?}")))?;
    let lu = a.sp_lu().map_err(|e| OracleError::Solve(format!("{e:?}")))?;
    let mut rhs = Mat::<Complex64>::zeros(n, 1);
    for (k, w) in grid.stencil(source) {
        rhs[(k, 0)] -= Complex64::new(w * inv_h2, 0.0);
    }
    let u = lu.solve(&rhs);
    if (0..n).any(|k| !u[(k, 0)].is_finite()) {
        return Err(OracleError::Solve("non-finite solution".into()));
    }
    // interpolate the smooth difference u - Phi rather than u itself
    let mut out = Vec::with_capacity(receivers.len());
    for r in receivers {
        let mut v = Complex64::new(0.0, 0.0);
        for (k, w) in grid.stencil(r) {
            if w == 0.0 {
                continue;
            }
            let (i, j) = (k % nx, k / nx);
            let node = Point::new(grid.x(i as f64), grid.y(j as f64));
            let incident = phi(k1, &node, source).map_err(|_| OracleError::Config("receiver stencil touches the source node"))?;
            v += (u[(k, 0)] - incident) * w;
        }
        out.push(v);
    }
    Ok(out)
}
