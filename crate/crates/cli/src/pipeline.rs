//! Synthesis, inversion and output writing shared by the commands.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rough_lsm::forward::{synthesize_full, FormatError, ForwardError, NearFieldMatrix, ReferenceSolve, Synthesis, Variant};
use rough_lsm::geometry::{HalfDiskInterface, InterfaceProfile};
use rough_lsm::inversion::{extract_interface, indicator_map_with, separation, IndicatorField, InsideRegion, InterfaceEstimate, InversionError, Probe, SvdFilter};

use crate::config::{ConfigError, Resolved};

/// Distance from the profile used by the separation metrics.
pub const SEPARATION_MARGIN: f64 = 0.2;
/// Depth of the band below the profile used by the second metric.
pub const BELOW_DEPTH: f64 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ForwardError> for CliError {
    fn from(e: ForwardError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<InversionError> for CliError {
    fn from(e: InversionError) -> Self {
        match e {
            InversionError::VariantMismatch { .. } | InversionError::Io(_) | InversionError::Format(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

pub fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

pub fn synthesize(res: &Resolved) -> Result<Synthesis, CliError> {
    let t = Instant::now();
    let s = synthesize_full(&res.profile, res.medium, &res.line, res.variant, res.reference, res.h)?;
    log::info!("synthesized {}x{} {} matrix in {:.2?}, condition estimate {:.3e}", res.line.count(), res.line.count(), res.variant, t.elapsed(), s.condition);
    Ok(s)
}

/// Reference solve needed to invert `matrix`, rebuilt from its metadata.
pub fn reference_for(matrix: &NearFieldMatrix) -> Result<Option<ReferenceSolve>, CliError> {
    match matrix.variant() {
        Variant::Raw => Ok(None),
        Variant::Modified => {
            let r = matrix.reference_radius().ok_or_else(|| CliError::Config("modified matrix without reference radius".into()))?;
            let gr = HalfDiskInterface::new(r).map_err(|e| CliError::Config(e.to_string()))?;
            Ok(Some(ReferenceSolve::new(*matrix.medium(), gr, matrix.cell_width(), matrix.line())?))
        }
    }
}

pub fn invert(matrix: &NearFieldMatrix, res: &Resolved, reference: Option<&ReferenceSolve>) -> Result<IndicatorField, CliError> {
    let probe = match reference {
        Some(r) => Probe::Modified(r),
        None => Probe::Raw,
    };
    let filter = SvdFilter::new(matrix.entries())?;
    Ok(indicator_map_with(&filter, matrix, &res.grid, &res.tikhonov, probe)?)
}

/// Files written for one inverted data set.
pub struct Outputs {
    pub field: PathBuf,
    pub image: PathBuf,
    pub overlay: PathBuf,
}

/// Writes `<prefix>.csv`, `<prefix>.pgm` and `<prefix>_overlay.csv`.
pub fn write_field(prefix: &Path, field: &IndicatorField, estimate: &InterfaceEstimate, profile: Option<&InterfaceProfile>) -> Result<Outputs, CliError> {
    let with_ext = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    let out = Outputs { field: with_ext(".csv"), image: with_ext(".pgm"), overlay: with_ext("_overlay.csv") };
    let create = |p: &Path| std::fs::File::create(p).map(std::io::BufWriter::new).map_err(|e| io_error(p, e));
    let mut w = create(&out.field)?;
    field.write_csv(&mut w, estimate.cutoff).and_then(|_| w.flush()).map_err(|e| io_error(&out.field, e))?;
    let mut w = create(&out.image)?;
    field.write_pgm(&mut w).and_then(|_| w.flush()).map_err(|e| io_error(&out.image, e))?;
    let mut w = create(&out.overlay)?;
    write_overlay(&mut w, estimate, profile).and_then(|_| w.flush()).map_err(|e| io_error(&out.overlay, e))?;
    Ok(out)
}

/// `x1,estimate,true_f` per grid column; empty cells where unknown.
fn write_overlay(mut w: impl Write, estimate: &InterfaceEstimate, profile: Option<&InterfaceProfile>) -> std::io::Result<()> {
    writeln!(w, "x1,estimate,true_f")?;
    for c in &estimate.columns {
        let est = c.upper().map(|v| format!("{v:?}")).unwrap_or_default();
        let f = profile.map(|p| format!("{:?}", p.eval(c.x1))).unwrap_or_default();
        writeln!(w, "{:?},{est},{f}", c.x1)?;
    }
    Ok(())
}

/// Quality numbers of one reconstruction against the known profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quality {
    /// Mean indicator strictly between the profile and the flat interface
    /// over the mean above the profile; NaN when no node qualifies.
    pub region_ratio: f64,
    /// Same with the band below the profile.
    pub below_ratio: f64,
    pub column_jaccard: f64,
}

pub fn quality(field: &IndicatorField, estimate: &InterfaceEstimate, profile: &InterfaceProfile) -> Quality {
    let m = profile.support_radius();
    Quality {
        region_ratio: separation(field, profile, InsideRegion::Perturbation { margin: SEPARATION_MARGIN }).ratio(),
        below_ratio: separation(field, profile, InsideRegion::BelowProfile { margin: SEPARATION_MARGIN, depth: BELOW_DEPTH }).ratio(),
        column_jaccard: estimate.column_jaccard(-m, m),
    }
}

pub fn estimate(field: &IndicatorField, cutoff: f64) -> Result<InterfaceEstimate, CliError> {
    Ok(extract_interface(field, cutoff)?)
}
