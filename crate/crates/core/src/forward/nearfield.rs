//! The near-field data matrix, its noise model and its file formats.

use std::fmt;
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use faer::Mat;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::MeasurementLine;
use crate::layered_green::Medium;

/// Version written into and required from matrix files.
pub const FORMAT_VERSION: u32 = 1;

const MAGIC: &str = "rough-lsm near-field";

/// Which kernel the matrix samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `u^s(x_p, y_q)`.
    Raw,
    /// `u^s(x_p, y_q) - G_r^s(x_p, y_q)`.
    Modified,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Raw => "raw",
            Variant::Modified => "modified",
        })
    }
}

impl FromStr for Variant {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(Variant::Raw),
            "modified" => Ok(Variant::Modified),
            other => Err(FormatError::Field { key: "variant", value: other.to_string() }),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a near-field matrix file")]
    Magic,
    #[error("unsupported format version {found} (expected {FORMAT_VERSION})")]
    Version { found: String },
    #[error("missing header field '{0}'")]
    Missing(&'static str),
    #[error("bad value '{value}' for header field '{key}'")]
    Field { key: &'static str, value: String },
    #[error("unexpected header line '{0}'")]
    Unexpected(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

impl PartialEq for FormatError {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}

/// Dense `N x N` samples of a scattered field with the parameters that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct NearFieldMatrix {
    entries: Mat<Complex64>,
    line: MeasurementLine,
    medium: Medium,
    variant: Variant,
    noise_level: f64,
    seed: Option<u64>,
    profile_id: String,
    cell_width: f64,
    reference_radius: Option<f64>,
}

impl NearFieldMatrix {
    pub fn new(
        entries: Mat<Complex64>,
        line: MeasurementLine,
        medium: Medium,
        variant: Variant,
        profile_id: String,
        cell_width: f64,
        reference_radius: Option<f64>,
    ) -> Self {
        assert_eq!(entries.nrows(), line.count());
        assert_eq!(entries.ncols(), line.count());
        Self { entries, line, medium, variant, noise_level: 0.0, seed: None, profile_id, cell_width, reference_radius }
    }

    pub fn entries(&self) -> &Mat<Complex64> {
        &self.entries
    }

    pub fn line(&self) -> &MeasurementLine {
        &self.line
    }

    pub fn medium(&self) -> &Medium {
        &self.medium
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn noise_level(&self) -> f64 {
        self.noise_level
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn profile_id(&self) -> &str {
        &self.profile_id
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    pub fn reference_radius(&self) -> Option<f64> {
        self.reference_radius
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the text header followed by little-endian `(re, im)` pairs in
    /// row-major order.
    pub fn write_to(&self, mut w: impl Write) -> Result<(), FormatError> {
        let n = self.len();
        let opt = |v: Option<String>| v.unwrap_or_else(|| "none".to_string());
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "version {FORMAT_VERSION}")?;
        writeln!(w, "N {n}")?;
        writeln!(w, "a {:?}", self.line.half_width())?;
        writeln!(w, "b {:?}", self.line.height())?;
        writeln!(w, "kappa1 {:?}", self.medium.kappa1())?;
        writeln!(w, "kappa2 {:?}", self.medium.kappa2())?;
        writeln!(w, "variant {}", self.variant)?;
        writeln!(w, "delta {:?}", self.noise_level)?;
        writeln!(w, "seed {}", opt(self.seed.map(|s| s.to_string())))?;
        writeln!(w, "profile {}", self.profile_id)?;
        writeln!(w, "h {:?}", self.cell_width)?;
        writeln!(w, "reference_radius {}", opt(self.reference_radius.map(|r| format!("{r:?}"))))?;
        writeln!(w, "end")?;
        let mut buf = Vec::with_capacity(16 * n * n);
        for p in 0..n {
            for q in 0..n {
                let z = self.entries[(p, q)];
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(r: impl Read) -> Result<Self, FormatError> {
        let mut r = std::io::BufReader::new(r);
        let mut line = String::new();
        let mut next = |r: &mut std::io::BufReader<_>| -> Result<Option<String>, FormatError> {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                return Ok(None);
            }
            Ok(Some(line.trim_end_matches(['\n', '\r']).to_string()))
        };
        if next(&mut r)?.as_deref() != Some(MAGIC) {
            return Err(FormatError::Magic);
        }
        let mut fields = std::collections::BTreeMap::new();
        loop {
            let Some(l) = next(&mut r)? else { return Err(FormatError::Missing("end")) };
            if l == "end" {
                break;
            }
            let (k, v) = l.split_once(' ').ok_or_else(|| FormatError::Unexpected(l.clone()))?;
            fields.insert(k.to_string(), v.to_string());
        }
        let get = |key: &'static str| fields.get(key).cloned().ok_or(FormatError::Missing(key));
        let version = get("version")?;
        if version != FORMAT_VERSION.to_string() {
            return Err(FormatError::Version { found: version });
        }
        fn parse<T: FromStr>(key: &'static str, v: String) -> Result<T, FormatError> {
            v.parse().map_err(|_| FormatError::Field { key, value: v })
        }
        fn parse_opt<T: FromStr>(key: &'static str, v: String) -> Result<Option<T>, FormatError> {
            if v == "none" {
                Ok(None)
            } else {
                parse(key, v).map(Some)
            }
        }
        let n: usize = parse("N", get("N")?)?;
        let a: f64 = parse("a", get("a")?)?;
        let b: f64 = parse("b", get("b")?)?;
        let k1: f64 = parse("kappa1", get("kappa1")?)?;
        let k2: f64 = parse("kappa2", get("kappa2")?)?;
        let variant: Variant = get("variant")?.parse()?;
        let delta: f64 = parse("delta", get("delta")?)?;
        let seed: Option<u64> = parse_opt("seed", get("seed")?)?;
        let profile_id = get("profile")?;
        let h: f64 = parse("h", get("h")?)?;
        let reference_radius: Option<f64> = parse_opt("reference_radius", get("reference_radius")?)?;
        let line = MeasurementLine::new(a, b, n).map_err(|_| FormatError::Field { key: "N", value: n.to_string() })?;
        let medium = Medium::new(k1, k2).map_err(|_| FormatError::Field { key: "kappa1", value: format!("{k1} {k2}") })?;
        let mut bytes = vec![0u8; 16 * n * n];
        r.read_exact(&mut bytes)?;
        let word = |i: usize| f64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().expect("8-byte slice"));
        let entries = Mat::from_fn(n, n, |p, q| {
            let k = 2 * (p * n + q);
            Complex64::new(word(k), word(k + 1))
        });
        if (0..n).any(|p| (0..n).any(|q| !entries[(p, q)].is_finite())) {
            return Err(FormatError::NonFinite);
        }
        Ok(Self { entries, line, medium, variant, noise_level: delta, seed, profile_id, cell_width: h, reference_radius })
    }

    pub fn write_file(&self, path: impl AsRef<std::path::Path>) -> Result<(), FormatError> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_file(path: impl AsRef<std::path::Path>) -> Result<Self, FormatError> {
        Self::read_from(std::fs::File::open(path)?)
    }

    /// CSV with one `p,q,re,im` row per entry; indices start at 1.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "p,q,re,im")?;
        for p in 0..self.len() {
            for q in 0..self.len() {
                let z = self.entries[(p, q)];
                writeln!(w, "{},{},{:?},{:?}", p + 1, q + 1, z.re, z.im)?;
            }
        }
        Ok(())
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &Mat<Complex64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.singular_values().map(|s| s.first().copied().unwrap_or(0.0)).unwrap_or(f64::NAN)
}

/// `|E - E^T|_2 / |E|_2`.
pub fn relative_asymmetry(m: &Mat<Complex64>) -> f64 {
    let diff = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] - m[(j, i)]);
    spectral_norm(&diff) / spectral_norm(m)
}

/// `E + delta |E|_2 zeta / |zeta|_2` with `zeta` complex Gaussian noise drawn
/// from a ChaCha20 stream seeded by `seed` (real then imaginary part, entries
/// in row-major order).
pub fn add_noise(matrix: &NearFieldMatrix, delta: f64, seed: u64) -> NearFieldMatrix {
    assert!(delta >= 0.0 && delta.is_finite(), "noise level must be non-negative");
    let mut out = matrix.clone();
    out.noise_level = delta;
    out.seed = Some(seed);
    if delta == 0.0 {
        return out;
    }
    let n = matrix.len();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        values.push(Complex64::new(re, im));
    }
    let zeta = Mat::from_fn(n, n, |p, q| values[p * n + q]);
    let scale = delta * spectral_norm(&matrix.entries) / spectral_norm(&zeta);
    out.entries = Mat::from_fn(n, n, |p, q| matrix.entries[(p, q)] + zeta[(p, q)] * scale);
    out
}
