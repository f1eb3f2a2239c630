//! Presets for the six numerical examples.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rough_lsm::forward::add_noise;

use crate::config::ExperimentConfig;
use crate::pipeline::{self, CliError, Quality};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// kappa2 = 2, N = 201, modified data with a half-disk just wider than
    /// the perturbation. Runs in seconds.
    Desk,
    /// kappa1 = 1, kappa2 = 10, N = 601, raw data. Each run takes a few
    /// seconds to a minute.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Example {
    Ex1,
    Ex2,
    Ex3,
    Ex4,
    Ex5,
    Ex6,
}

impl Example {
    pub fn name(&self) -> &'static str {
        match self {
            Example::Ex1 => "ex1",
            Example::Ex2 => "ex2",
            Example::Ex3 => "ex3",
            Example::Ex4 => "ex4",
            Example::Ex5 => "ex5",
            Example::Ex6 => "ex6",
        }
    }
}

/// One data set of a sweep: a configuration plus a label.
#[derive(Debug, Clone)]
pub struct Run {
    pub label: String,
    pub config: ExperimentConfig,
}

fn base(preset: Preset, profile: &str, y_top: f64, b: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig { profile: profile.into(), y_range: [-1.0, y_top], b, ..Default::default() };
    match preset {
        Preset::Desk => {
            let support = rough_lsm::geometry::InterfaceProfile::by_name(profile).map(|p| p.support_radius()).unwrap_or(2.0);
            c.kappa2 = 2.0;
            c.n = 201;
            c.variant = "modified".into();
            c.radius = Some(support + 1.0);
        }
        Preset::Full => {
            c.kappa2 = 10.0;
            c.n = 601;
            c.variant = "raw".into();
        }
    }
    c
}

/// The runs of an example. Runs that differ only in noise share a label
/// prefix and one clean synthesis.
pub fn runs(example: Example, preset: Preset) -> Vec<Run> {
    let noise_sweep = vec![0.0, 0.02, 0.05];
    let one = |label: String, mut c: ExperimentConfig, noise: Vec<f64>| {
        c.noise = noise;
        Run { label, config: c }
    };
    match example {
        Example::Ex1 => vec![one("ex1".into(), base(preset, "f1", 0.5, 0.55), noise_sweep)],
        Example::Ex2 => vec![one("ex2".into(), base(preset, "f2", 0.2, 0.25), noise_sweep)],
        Example::Ex3 => vec![one("ex3".into(), base(preset, "f3", 0.5, 0.55), noise_sweep)],
        Example::Ex4 => [201, 401, 601]
            .into_iter()
            .map(|n| one(format!("ex4_n{n}"), ExperimentConfig { n, ..base(preset, "f1", 0.5, 0.55) }, vec![0.02]))
            .collect(),
        Example::Ex5 => [0.25, 0.65, 1.05]
            .into_iter()
            .map(|b| one(format!("ex5_b{b}"), base(preset, "f2", 0.2, b), vec![0.02]))
            .collect(),
        Example::Ex6 => [2.0, 8.0, 14.0]
            .into_iter()
            .map(|a| one(format!("ex6_a{a}"), ExperimentConfig { a, ..base(preset, "f6", 0.5, 0.55) }, vec![0.02]))
            .collect(),
    }
}

/// One row of the summary table.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub run: String,
    pub profile: String,
    pub variant: String,
    pub kappa2: f64,
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub quality: Quality,
    pub seconds: f64,
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from("run,profile,variant,kappa2,n,a,b,delta,region_ratio,below_ratio,column_jaccard,seconds\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{:.4},{:.4},{:.3},{:.2}",
            r.run, r.profile, r.variant, r.kappa2, r.n, r.a, r.b, r.delta, r.quality.region_ratio, r.quality.below_ratio, r.quality.column_jaccard, r.seconds
        );
    }
    s
}

pub fn summary_table(rows: &[SummaryRow]) -> String {
    let mut s = format!("{:<18} {:>8} {:>5} {:>5} {:>5} {:>6} {:>9} {:>9} {:>8} {:>8}\n", "run", "variant", "n", "a", "b", "delta", "region", "below", "jaccard", "seconds");
    for r in rows {
        let _ = writeln!(
            s,
            "{:<18} {:>8} {:>5} {:>5} {:>5} {:>6} {:>9.3} {:>9.3} {:>8.3} {:>8.2}",
            r.run, r.variant, r.n, r.a, r.b, r.delta, r.quality.region_ratio, r.quality.below_ratio, r.quality.column_jaccard, r.seconds
        );
    }
    s
}

/// Runs every data set of `runs`, writing matrices, fields, images and a
/// summary into `dir`.
pub fn execute(runs: &[Run], dir: &Path) -> Result<Vec<SummaryRow>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| pipeline::io_error(dir, e))?;
    let mut rows = Vec::new();
    for run in runs {
        let res = run.config.resolve()?;
        let t = Instant::now();
        let synthesis = pipeline::synthesize(&res)?;
        let clean_time = t.elapsed().as_secs_f64();
        let config_path = dir.join(format!("{}.toml", run.label));
        std::fs::write(&config_path, run.config.to_toml()).map_err(|e| pipeline::io_error(&config_path, e))?;
        for &delta in &run.config.noise {
            let t = Instant::now();
            let matrix = add_noise(&synthesis.matrix, delta, run.config.seed);
            let name = format!("{}_d{delta}", run.label);
            let matrix_path = dir.join(format!("{name}.bin"));
            matrix.write_file(&matrix_path)?;
            let field = pipeline::invert(&matrix, &res, synthesis.reference.as_ref())?;
            let estimate = pipeline::estimate(&field, res.cutoff)?;
            pipeline::write_field(&dir.join(&name), &field, &estimate, Some(&res.profile))?;
            rows.push(SummaryRow {
                run: name,
                profile: run.config.profile.clone(),
                variant: run.config.variant.clone(),
                kappa2: run.config.kappa2,
                n: run.config.n,
                a: run.config.a,
                b: run.config.b,
                delta,
                quality: pipeline::quality(&field, &estimate, &res.profile),
                seconds: clean_time + t.elapsed().as_secs_f64(),
            });
        }
    }
    let path = dir.join("summary.csv");
    std::fs::write(&path, summary_csv(&rows)).map_err(|e| pipeline::io_error(&path, e))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_resolves() {
        for ex in [Example::Ex1, Example::Ex2, Example::Ex3, Example::Ex4, Example::Ex5, Example::Ex6] {
            for preset in [Preset::Desk, Preset::Full] {
                for run in runs(ex, preset) {
                    run.config.resolve().unwrap_or_else(|e| panic!("{}: {e}", run.label));
                }
            }
        }
    }

    #[test]
    fn sweeps_follow_the_examples() {
        let ns: Vec<usize> = runs(Example::Ex4, Preset::Full).iter().map(|r| r.config.n).collect();
        assert_eq!(ns, vec![201, 401, 601]);
        let bs: Vec<f64> = runs(Example::Ex5, Preset::Full).iter().map(|r| r.config.b).collect();
        assert_eq!(bs, vec![0.25, 0.65, 1.05]);
        let a: Vec<f64> = runs(Example::Ex6, Preset::Desk).iter().map(|r| r.config.a).collect();
        assert_eq!(a, vec![2.0, 8.0, 14.0]);
        let ex2 = &runs(Example::Ex2, Preset::Full)[0].config;
        assert_eq!((ex2.y_range, ex2.b, ex2.kappa2), ([-1.0, 0.2], 0.25, 10.0));
    }
}
