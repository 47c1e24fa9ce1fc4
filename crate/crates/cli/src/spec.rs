//! Declarative run specifications: a TOML file listing experiments, each a
//! full sweep configuration. Unknown fields are rejected so typos surface
//! as parse errors instead of silently-ignored settings.

use anyhow::{bail, Context};
use serde::Deserialize;
use std::path::Path;

use relay_outage::{ProtocolKind, SelectionScheme};

/// Threshold given either directly in nats (xi) or as a rate in bits.
/// The internal canonical unit is nats; the half-duplex two-slot
/// transmission doubles the threshold: s = 2 xi.
#[derive(Debug, Clone, Copy)]
pub struct Threshold {
    pub xi_nats: f64,
}

impl Threshold {
    pub fn s_threshold(&self) -> f64 {
        2.0 * self.xi_nats
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: Option<String>,
    pub m: u32,
    pub k: u32,
    pub protocol: String,
    pub scheme: String,
    #[serde(default = "default_mu")]
    pub mu1: f64,
    #[serde(default = "default_mu")]
    pub mu2: f64,
    /// Mutual-information threshold in nats. Exactly one of `xi` and
    /// `rate_bits` must be present.
    pub xi: Option<f64>,
    /// Rate threshold in bits, converted to nats (ln 2 per bit).
    pub rate_bits: Option<f64>,
    pub snr_db_start: f64,
    pub snr_db_stop: f64,
    pub snr_db_step: f64,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<String>,
}

fn default_mu() -> f64 {
    1.0
}

fn default_outputs() -> Vec<String> {
    vec!["csv".to_string()]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<ExperimentSpec>,
}

/// Fully validated experiment ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub name: String,
    pub m: u32,
    pub k: u32,
    pub protocol: ProtocolKind,
    pub scheme: SelectionScheme,
    pub mu1: f64,
    pub mu2: f64,
    pub threshold: Threshold,
    pub grid_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub csv: bool,
    pub json: bool,
}

pub fn load(path: &Path) -> anyhow::Result<Vec<Experiment>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read spec file {}", path.display()))?;
    let spec: RunSpec = toml::from_str(&text)
        .with_context(|| format!("cannot parse spec file {}", path.display()))?;
    let mut experiments = Vec::with_capacity(spec.experiments.len());
    for (index, exp) in spec.experiments.iter().enumerate() {
        experiments.push(
            validate(exp, index)
                .with_context(|| format!("experiment #{} is invalid", index + 1))?,
        );
    }
    let mut names: Vec<&str> = experiments.iter().map(|e| e.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        bail!("experiment names must be unique");
    }
    Ok(experiments)
}

fn validate(exp: &ExperimentSpec, index: usize) -> anyhow::Result<Experiment> {
    if exp.m < 1 || exp.k < 1 {
        bail!("M and K must be at least 1");
    }
    if exp.trials < 1 {
        bail!("trials must be at least 1");
    }
    let protocol: ProtocolKind = exp.protocol.parse()?;
    let scheme: SelectionScheme = exp.scheme.parse()?;
    if !(exp.mu1 > 0.0 && exp.mu1.is_finite()) || !(exp.mu2 > 0.0 && exp.mu2.is_finite()) {
        bail!("mu1 and mu2 must be positive");
    }

    let xi_nats = match (exp.xi, exp.rate_bits) {
        (Some(xi), None) => xi,
        (None, Some(bits)) => bits * std::f64::consts::LN_2,
        (Some(_), Some(_)) => bail!("give either xi (nats) or rate_bits, not both"),
        (None, None) => bail!("one of xi (nats) or rate_bits is required"),
    };
    if !(xi_nats > 0.0 && xi_nats.is_finite()) {
        bail!("threshold must be positive");
    }

    if !(exp.snr_db_step > 0.0) {
        bail!("snr_db_step must be positive");
    }
    if exp.snr_db_stop < exp.snr_db_start {
        bail!("snr_db_stop must not be below snr_db_start");
    }
    let grid_db = build_grid(exp.snr_db_start, exp.snr_db_stop, exp.snr_db_step);

    let mut csv = false;
    let mut json = false;
    for output in &exp.outputs {
        match output.as_str() {
            "csv" => csv = true,
            "json" => json = true,
            other => bail!("unknown output format {other:?}, expected csv or json"),
        }
    }
    if !(csv || json) {
        bail!("experiment requests no outputs");
    }

    let name = exp.name.clone().unwrap_or_else(|| {
        format!(
            "exp{:02}_{}_{}_m{}k{}",
            index + 1,
            exp.protocol.to_ascii_lowercase(),
            if scheme == SelectionScheme::Bulk { "bulk" } else { "ps" },
            exp.m,
            exp.k
        )
    });
    if name.is_empty() || name.contains(['/', '\\']) {
        bail!("experiment name must be a plain file stem");
    }

    Ok(Experiment {
        name,
        m: exp.m,
        k: exp.k,
        protocol,
        scheme,
        mu1: exp.mu1,
        mu2: exp.mu2,
        threshold: Threshold { xi_nats },
        grid_db,
        trials: exp.trials,
        seed: exp.seed,
        csv,
        json,
    })
}

pub fn build_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| start + step * i as f64).collect()
}
