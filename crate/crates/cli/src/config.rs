//! Experiment configuration: TOML schema, validation, critical-coupling
//! defaults, and the config hash that identifies a run.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ising_core::lattice::Bc;
use ising_core::mc::SamplerKind;

/// Documented literature defaults for the critical coupling of the
/// nearest-neighbor Ising model on `Z^d`. These are configuration inputs,
/// not ground truth: every acceptance check fits exponents rather than
/// asserting coupling digits.
pub fn critical_beta(d: usize) -> Option<f64> {
    match d {
        2 => Some((1.0 + 2.0f64.sqrt()).ln() / 2.0), // exact: ln(1+sqrt(2))/2
        3 => Some(0.221_654_6),
        4 => Some(0.149_694_7),
        5 => Some(0.113_915_0),
        _ => None,
    }
}

/// Inverse temperature: a number, or the symbolic `"critical"` resolved
/// against the configured dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaSpec {
    Value(f64),
    Symbolic(String),
}

impl BetaSpec {
    pub fn resolve(&self, d: usize) -> Result<f64> {
        match self {
            BetaSpec::Value(v) => {
                if *v < 0.0 {
                    bail!("beta must be >= 0, got {v}");
                }
                Ok(*v)
            }
            BetaSpec::Symbolic(s) if s == "critical" => critical_beta(d)
                .with_context(|| format!("no critical default for d = {d}")),
            BetaSpec::Symbolic(s) => bail!("unknown symbolic beta {s:?} (use \"critical\")"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    /// Sweep-equivalents to discard; omit for the automatic choice
    /// (ten estimated autocorrelation times).
    pub burn_in: Option<u64>,
    pub n_samples: u64,
    pub thinning: u64,
    pub replicas: u64,
}

/// One experiment: geometry sweep, model parameters, sampler and schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Schema version; this file format is version 1.
    pub version: u32,
    pub dimension: usize,
    /// Strictly increasing bulk radii `n`.
    pub radii: Vec<i64>,
    /// Outer-box ratio for free-BC scans: samples live on `[-Mn, Mn]^d`.
    pub cube_ratio: i64,
    pub beta: BetaSpec,
    pub bc: Bc,
    /// Near-critical field parameter `h` (the physical field is
    /// `H = h a^{(d+2)/2}`).
    pub field_h: f64,
    pub lattice_spacing: f64,
    pub sampler: SamplerKind,
    pub schedule: ScheduleConfig,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).context("parsing config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != 1 {
            bail!("unsupported config schema version {}", self.version);
        }
        if self.dimension == 0 {
            bail!("dimension must be >= 1");
        }
        if self.radii.is_empty() {
            bail!("radii must be nonempty");
        }
        if !self.radii.windows(2).all(|w| w[0] < w[1]) {
            bail!("radii must be strictly increasing, got {:?}", self.radii);
        }
        if self.radii[0] < 1 {
            bail!("radii must be >= 1");
        }
        if self.cube_ratio < 1 {
            bail!("cube_ratio must be >= 1");
        }
        let n_max = *self.radii.last().unwrap();
        let side = 2 * self.cube_ratio * n_max + 1;
        let sites = (side as f64).powi(self.dimension as i32);
        if sites > 2e7 {
            bail!("outer box has {sites:.0} sites; over the memory budget");
        }
        if self.lattice_spacing <= 0.0 {
            bail!("lattice_spacing must be > 0");
        }
        if self.schedule.n_samples == 0 || self.schedule.thinning == 0 || self.schedule.replicas == 0
        {
            bail!("schedule needs positive n_samples, thinning and replicas");
        }
        self.beta.resolve(self.dimension)?;
        Ok(())
    }

    pub fn beta_value(&self) -> f64 {
        self.beta.resolve(self.dimension).expect("validated")
    }

    /// Physical external field `H = h a^{(d+2)/2}`.
    pub fn physical_field(&self) -> f64 {
        self.field_h
            * self
                .lattice_spacing
                .powf((self.dimension as f64 + 2.0) / 2.0)
    }

    /// SHA-256 over the canonical JSON form. Every semantically meaningful
    /// field participates (output paths and thread counts are not part of
    /// the config, so they cannot affect the hash).
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn short_hash(&self) -> String {
        self.hash()[..12].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
version = 1
dimension = 2
radii = [2, 3, 4]
cube_ratio = 2
beta = "critical"
bc = "free"
field_h = 0.0
lattice_spacing = 1.0
sampler = "wolff"
seed = 7

[schedule]
burn_in = 100
n_samples = 500
thinning = 1
replicas = 2
"#;

    #[test]
    fn parses_and_resolves_critical_beta() {
        let cfg = ExperimentConfig::from_toml(BASE).unwrap();
        assert!((cfg.beta_value() - 0.44068679350977147).abs() < 1e-15);
        assert_eq!(cfg.bc, Bc::Free);
        assert_eq!(cfg.schedule.replicas, 2);
    }

    #[test]
    fn numeric_beta_and_field_scaling() {
        let text = BASE.replace("beta = \"critical\"", "beta = 0.25").replace(
            "field_h = 0.0",
            "field_h = 0.5",
        );
        let text = text.replace("lattice_spacing = 1.0", "lattice_spacing = 0.5");
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg.beta_value(), 0.25);
        // H = h a^{(d+2)/2} with d = 2: 0.5 * 0.5^2
        assert!((cfg.physical_field() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml(&BASE.replace("[2, 3, 4]", "[3, 2]")).is_err());
        assert!(ExperimentConfig::from_toml(&BASE.replace("version = 1", "version = 2")).is_err());
        assert!(ExperimentConfig::from_toml(&BASE.replace("cube_ratio = 2", "cube_ratio = 0")).is_err());
        assert!(
            ExperimentConfig::from_toml(&BASE.replace("beta = \"critical\"", "beta = \"cold\""))
                .is_err()
        );
    }

    #[test]
    fn hash_tracks_semantic_fields_only() {
        let a = ExperimentConfig::from_toml(BASE).unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 8;
        assert_ne!(a.hash(), b.hash());
        let c = ExperimentConfig::from_toml(&BASE.replace("field_h = 0.0", "field_h = 0.1"))
            .unwrap();
        assert_ne!(a.hash(), c.hash());
    }
}
