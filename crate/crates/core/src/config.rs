//! TOML run configuration.
//!
//! Top-level keys are the [`ExperimentSpec`] fields (with `[cv]`, `[solver]`
//! and `[sl1_weights]` tables). Three optional tables drive the CLI:
//!
//! ```toml
//! [sweep]
//! axis = "saturation_ratio"
//! values = [0.0, 0.1, 0.2]
//!
//! [bench]
//! cells = [[500, 1000], [1000, 1000]]
//! repeats = 3
//!
//! [theory]
//! thresholds = [0.0, 1.0]
//! samples = 100000
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{SweepAxis, TABLE_CELLS};
use crate::synth::ExperimentSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub cells: Vec<(usize, usize)>,
    pub repeats: usize,
}

impl Default for BenchSection {
    fn default() -> Self {
        BenchSection { cells: TABLE_CELLS.to_vec(), repeats: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheorySection {
    pub thresholds: Vec<f64>,
    pub samples: usize,
    /// Dimension of the unit vector used for the vector form of the check.
    pub dim: usize,
}

impl Default for TheorySection {
    fn default() -> Self {
        TheorySection { thresholds: vec![0.0, 0.5, 1.0, 1.5], samples: 100_000, dim: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub spec: ExperimentSpec,
    pub sweep: Option<SweepSection>,
    pub bench: BenchSection,
    pub theory: TheorySection,
}

fn section<T: for<'de> Deserialize<'de>>(table: &mut toml::Table, key: &str) -> Result<Option<T>> {
    match table.remove(key) {
        None => Ok(None),
        Some(v) => v.try_into().map(Some).map_err(|e| Error::Config(format!("[{key}]: {e}"))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let sweep = section::<SweepSection>(&mut table, "sweep")?;
        let bench = section::<BenchSection>(&mut table, "bench")?.unwrap_or_default();
        let theory = section::<TheorySection>(&mut table, "theory")?.unwrap_or_default();
        let spec: ExperimentSpec =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let cfg = RunConfig { spec, sweep, bench, theory };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    /// All problems are reported as [`Error::Config`].
    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        self.spec.validate().map_err(wrap)?;
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::Config("[sweep] values must be nonempty".into()));
            }
            for v in &s.values {
                s.axis.apply(&self.spec, *v).map_err(wrap)?;
            }
        }
        if self.bench.repeats == 0 || self.bench.cells.is_empty() {
            return Err(Error::Config("[bench] needs cells and repeats >= 1".into()));
        }
        if self.theory.samples < 1000 || self.theory.dim == 0 {
            return Err(Error::Config("[theory] needs samples >= 1000 and dim >= 1".into()));
        }
        Ok(())
    }
}
