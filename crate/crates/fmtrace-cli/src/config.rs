//! Flat key-value experiment configuration.
//!
//! One `section.key = value` assignment per line, `#` comments, no nesting
//! beyond the single dot.  The format is deliberately dumb: any language can
//! parse it back out of an archived report.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use fmtrace::cutoffs::RadialBlend;
use fmtrace::fm_apply::{Cutoff, CutoffPair};
use fmtrace::geometry::CanonicalTransformSpec;
use fmtrace::grid::TorusGrid;
use fmtrace::mellin::{LineGrid, LogGrid};
use fmtrace::reduction::ReducedTraceSetup;
use fmtrace::registry;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub transformation: String,
    pub n_ambient: usize,
    pub n_sub: usize,
    pub period: f64,
    pub s: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_step: f64,
    pub line_min: f64,
    pub line_max: f64,
    pub line_step: f64,
    pub physical_r0: f64,
    pub physical_r1: f64,
    pub dual_r0: f64,
    pub dual_r1: f64,
    pub out_path: String,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            transformation: "torus_rotation".into(),
            n_ambient: 64,
            n_sub: 64,
            period: 2.0 * PI,
            s: -0.5,
            tau_min: -60.0,
            tau_max: 60.0,
            tau_step: 0.005,
            line_min: -80.0,
            line_max: 80.0,
            line_step: 0.01,
            physical_r0: PI / 4.0,
            physical_r1: PI / 2.0,
            dual_r0: 1.5,
            dual_r1: 3.0,
            out_path: "report.json".into(),
            format: OutputFormat::Json,
        }
    }
}

/// The documented keys, in serialization order.
const KEYS: &[&str] = &[
    "transformation",
    "discretization.n_ambient",
    "discretization.n_sub",
    "discretization.period",
    "sobolev.s",
    "mellin.tau_min",
    "mellin.tau_max",
    "mellin.step",
    "mellin.line_min",
    "mellin.line_max",
    "mellin.line_step",
    "cutoffs.physical_r0",
    "cutoffs.physical_r1",
    "cutoffs.dual_r0",
    "cutoffs.dual_r1",
    "output.path",
    "output.format",
];

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "line {lineno}: expected `key = value`, got `{line}`"
                )));
            };
            let key = key.trim();
            let value = value.trim();
            let Some(&canonical) = KEYS.iter().find(|&&k| k == key) else {
                return Err(CliError::Config(format!("line {lineno}: unknown key `{key}`")));
            };
            if let Some(first) = seen.insert(canonical, lineno) {
                return Err(CliError::Config(format!(
                    "line {lineno}: `{key}` already set on line {first}"
                )));
            }
            cfg.assign(canonical, value, lineno)?;
        }
        Ok(cfg)
    }

    fn assign(&mut self, key: &str, value: &str, lineno: usize) -> Result<(), CliError> {
        fn num<T: std::str::FromStr>(key: &str, value: &str, lineno: usize) -> Result<T, CliError> {
            value.parse().map_err(|_| {
                CliError::Config(format!("line {lineno}: `{key}` expects a number, got `{value}`"))
            })
        }
        match key {
            "transformation" => self.transformation = value.to_string(),
            "discretization.n_ambient" => self.n_ambient = num(key, value, lineno)?,
            "discretization.n_sub" => self.n_sub = num(key, value, lineno)?,
            "discretization.period" => self.period = num(key, value, lineno)?,
            "sobolev.s" => self.s = num(key, value, lineno)?,
            "mellin.tau_min" => self.tau_min = num(key, value, lineno)?,
            "mellin.tau_max" => self.tau_max = num(key, value, lineno)?,
            "mellin.step" => self.tau_step = num(key, value, lineno)?,
            "mellin.line_min" => self.line_min = num(key, value, lineno)?,
            "mellin.line_max" => self.line_max = num(key, value, lineno)?,
            "mellin.line_step" => self.line_step = num(key, value, lineno)?,
            "cutoffs.physical_r0" => self.physical_r0 = num(key, value, lineno)?,
            "cutoffs.physical_r1" => self.physical_r1 = num(key, value, lineno)?,
            "cutoffs.dual_r0" => self.dual_r0 = num(key, value, lineno)?,
            "cutoffs.dual_r1" => self.dual_r1 = num(key, value, lineno)?,
            "output.path" => self.out_path = value.to_string(),
            "output.format" => {
                self.format = match value {
                    "json" => OutputFormat::Json,
                    "csv" => OutputFormat::Csv,
                    other => {
                        return Err(CliError::Config(format!(
                            "line {lineno}: `output.format` must be json or csv, got `{other}`"
                        )))
                    }
                }
            }
            _ => unreachable!("key list and assignment table are kept in sync"),
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for &key in KEYS {
            let _ = writeln!(out, "{key} = {}", self.value_string(key));
        }
        out
    }

    fn value_string(&self, key: &str) -> String {
        match key {
            "transformation" => self.transformation.clone(),
            "discretization.n_ambient" => self.n_ambient.to_string(),
            "discretization.n_sub" => self.n_sub.to_string(),
            "discretization.period" => self.period.to_string(),
            "sobolev.s" => self.s.to_string(),
            "mellin.tau_min" => self.tau_min.to_string(),
            "mellin.tau_max" => self.tau_max.to_string(),
            "mellin.step" => self.tau_step.to_string(),
            "mellin.line_min" => self.line_min.to_string(),
            "mellin.line_max" => self.line_max.to_string(),
            "mellin.line_step" => self.line_step.to_string(),
            "cutoffs.physical_r0" => self.physical_r0.to_string(),
            "cutoffs.physical_r1" => self.physical_r1.to_string(),
            "cutoffs.dual_r0" => self.dual_r0.to_string(),
            "cutoffs.dual_r1" => self.dual_r1.to_string(),
            "output.path" => self.out_path.clone(),
            "output.format" => self.format.as_str().to_string(),
            _ => unreachable!(),
        }
    }

    /// Flat dotted map for embedding into reports.
    pub fn to_flat_map(&self) -> BTreeMap<String, serde_json::Value> {
        let mut map = BTreeMap::new();
        for &key in KEYS {
            let value = match key {
                "transformation" | "output.path" | "output.format" => {
                    serde_json::Value::String(self.value_string(key))
                }
                "discretization.n_ambient" | "discretization.n_sub" => {
                    serde_json::Value::from(self.value_string(key).parse::<u64>().unwrap())
                }
                _ => serde_json::Value::from(self.value_string(key).parse::<f64>().unwrap()),
            };
            map.insert(key.to_string(), value);
        }
        map
    }

    /// Full load-time validation: structure plus the analytic inequalities.
    pub fn validate(&self) -> Result<(), CliError> {
        self.validate_structural()?;
        self.validate_analytic()
    }

    /// The inequalities tied to the transformation's order: s < 0,
    /// s − m − n/2 > 0, and the weight line inside the strip.  Commands that
    /// never build Sobolev weights (localization and condition checks, which
    /// must accept control transformations of other orders) skip these.
    pub fn validate_analytic(&self) -> Result<(), CliError> {
        let spec = self.build_transformation()?;
        let m = spec.amplitude.degree_m;
        // The Sobolev constructor carries the canonical messages for
        // s < 0 and s - m - n/2 > 0.
        let weights = fmtrace::trace::SobolevWeights::new(self.s, m, 1)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let strip = fmtrace::symbol::analyticity_strip(weights);
        let gamma = 0.5;
        if !strip.contains(gamma) {
            return Err(CliError::Config(format!(
                "weight line gamma = n/4 = {gamma} must lie inside the strip ({}, {})",
                strip.lo, strip.hi
            )));
        }
        Ok(())
    }

    /// Grid, quadrature, cutoff, and output invariants, each cited on failure.
    pub fn validate_structural(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.n_ambient % 2 != 0 || self.n_ambient < 8 {
            return fail(format!(
                "discretization.n_ambient must be even and >= 8, got {}",
                self.n_ambient
            ));
        }
        if self.n_sub != self.n_ambient {
            return fail(format!(
                "discretization.n_sub must equal discretization.n_ambient ({} != {})",
                self.n_sub, self.n_ambient
            ));
        }
        if !(self.period > 0.0) {
            return fail(format!("discretization.period must satisfy period > 0, got {}", self.period));
        }
        if !(self.tau_min < self.tau_max) {
            return fail(format!(
                "mellin.tau_min < mellin.tau_max required, got {} >= {}",
                self.tau_min, self.tau_max
            ));
        }
        if !(self.tau_step > 0.0) {
            return fail(format!("mellin.step must satisfy step > 0, got {}", self.tau_step));
        }
        if !(self.line_min < self.line_max) {
            return fail(format!(
                "mellin.line_min < mellin.line_max required, got {} >= {}",
                self.line_min, self.line_max
            ));
        }
        if !(self.line_step > 0.0) {
            return fail(format!("mellin.line_step must satisfy step > 0, got {}", self.line_step));
        }
        if !(0.0 < self.physical_r0 && self.physical_r0 < self.physical_r1) {
            return fail(format!(
                "cutoffs must satisfy 0 < physical_r0 < physical_r1, got ({}, {})",
                self.physical_r0, self.physical_r1
            ));
        }
        if !(self.physical_r1 <= self.period / 2.0) {
            return fail(format!(
                "cutoffs.physical_r1 must satisfy r1 <= period/2, got {} > {}",
                self.physical_r1,
                self.period / 2.0
            ));
        }
        if !(0.0 < self.dual_r0 && self.dual_r0 < self.dual_r1) {
            return fail(format!(
                "cutoffs must satisfy 0 < dual_r0 < dual_r1, got ({}, {})",
                self.dual_r0, self.dual_r1
            ));
        }
        Ok(())
    }

    pub fn build_transformation(&self) -> Result<CanonicalTransformSpec, CliError> {
        registry::build(&self.transformation).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn ambient_grid(&self) -> Result<TorusGrid, CliError> {
        TorusGrid::new(2, self.n_ambient, self.period).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn sub_grid(&self) -> Result<TorusGrid, CliError> {
        TorusGrid::new(1, self.n_sub, self.period).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn log_grid(&self) -> Result<LogGrid, CliError> {
        LogGrid::new(self.tau_min, self.tau_max, self.tau_step)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn line_grid(&self) -> Result<LineGrid, CliError> {
        LineGrid::new(self.line_min, self.line_max, self.line_step)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn dual_cutoff(&self) -> Result<Cutoff, CliError> {
        Ok(Cutoff::Blend(
            RadialBlend::rising(self.dual_r0, self.dual_r1)
                .map_err(|e| CliError::Config(e.to_string()))?,
        ))
    }

    pub fn cutoff_pair(&self) -> Result<CutoffPair, CliError> {
        CutoffPair::blended((self.physical_r0, self.physical_r1), (self.dual_r0, self.dual_r1))
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Both reduced-trace routes wired up from this configuration.
    pub fn reduced_setup(&self) -> Result<ReducedTraceSetup, CliError> {
        Ok(ReducedTraceSetup::new(
            self.build_transformation()?,
            self.ambient_grid()?,
            self.s,
            self.dual_cutoff()?,
            self.log_grid()?,
            self.line_grid()?,
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_idempotent() {
        let cfg = ExperimentConfig::default();
        let text = cfg.serialize();
        let reparsed = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(text, reparsed.serialize());
    }

    #[test]
    fn parses_overrides_and_comments() {
        let text = "# comment\nsobolev.s = -0.25\ndiscretization.n_ambient = 32 # trailing\ndiscretization.n_sub = 32\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.s, -0.25);
        assert_eq!(cfg.n_ambient, 32);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_and_duplicate_keys_are_cited() {
        let err = ExperimentConfig::parse("mellin.stepp = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 1") && err.to_string().contains("mellin.stepp"));
        let err = ExperimentConfig::parse("sobolev.s = -0.5\nsobolev.s = -0.4\n").unwrap_err();
        assert!(err.to_string().contains("line 2") && err.to_string().contains("line 1"));
    }

    #[test]
    fn control_transformations_pass_structural_validation_only() {
        let mut cfg = ExperimentConfig::default();
        cfg.transformation = "identity".into();
        cfg.validate_structural().unwrap();
        // Order zero can never satisfy s - m - n/2 > 0 with s < 0.
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn positive_s_is_rejected_with_the_inequality() {
        let mut cfg = ExperimentConfig::default();
        cfg.s = 0.5;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("s < 0"), "message: {err}");
    }

    #[test]
    fn s_near_minus_one_is_rejected_by_the_order_inequality() {
        let mut cfg = ExperimentConfig::default();
        cfg.s = -1.0;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("s - m - n/2 > 0"), "message: {err}");
    }

    #[test]
    fn bad_format_is_cited() {
        let err = ExperimentConfig::parse("output.format = yaml\n").unwrap_err();
        assert!(err.to_string().contains("output.format"));
    }
}
