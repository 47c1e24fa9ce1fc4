//! Rayleigh fading channel gains and per-protocol end-to-end SNR mappings
//! for a single (relay, subcarrier) link.
//!
//! Squared channel magnitudes on each hop are exponentially distributed;
//! the three forwarding protocols map a pair of hop gains to the effective
//! end-to-end SNR of the link.

use rand::RngExt;

use crate::error::{Error, Result};

/// Relay forwarding protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    /// Decode-and-forward.
    Df,
    /// Fixed-gain amplify-and-forward (gain set from channel statistics).
    Fg,
    /// Variable-gain amplify-and-forward (gain set from the instantaneous channel).
    Vg,
}

impl std::str::FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "df" => Ok(Self::Df),
            "fg" => Ok(Self::Fg),
            "vg" => Ok(Self::Vg),
            other => Err(Error::InvalidConfig {
                detail: format!("unknown protocol {other:?}, expected df, fg or vg"),
            }),
        }
    }
}

impl std::fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Df => "df",
            Self::Fg => "fg",
            Self::Vg => "vg",
        })
    }
}

/// Mean of the exponential squared channel gain of one hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopGainParams {
    mu: f64,
}

impl HopGainParams {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidParam {
                name: "mu",
                value: mu,
            });
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// Squared channel magnitudes of both hops for one (relay, subcarrier) link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRealization {
    h1_sq: f64,
    h2_sq: f64,
}

impl LinkRealization {
    pub fn new(h1_sq: f64, h2_sq: f64) -> Result<Self> {
        for v in [h1_sq, h2_sq] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::NegativeInput { value: v });
            }
        }
        Ok(Self { h1_sq, h2_sq })
    }

    pub fn h1_sq(&self) -> f64 {
        self.h1_sq
    }

    pub fn h2_sq(&self) -> f64 {
        self.h2_sq
    }
}

/// Average transmit SNR and per-hop gain means; linear scale throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrParams {
    gamma_bar: f64,
    mu1: f64,
    mu2: f64,
}

impl SnrParams {
    pub fn new(gamma_bar: f64, mu1: f64, mu2: f64) -> Result<Self> {
        for (name, value) in [("gamma_bar", gamma_bar), ("mu1", mu1), ("mu2", mu2)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParam { name, value });
            }
        }
        Ok(Self {
            gamma_bar,
            mu1,
            mu2,
        })
    }

    /// Same hop means at a different average SNR.
    pub fn with_gamma_bar(&self, gamma_bar: f64) -> Result<Self> {
        Self::new(gamma_bar, self.mu1, self.mu2)
    }

    pub fn gamma_bar(&self) -> f64 {
        self.gamma_bar
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }
}

/// Density of the exponential squared channel gain: e^{-x/mu}/mu.
pub fn gain_pdf(x: f64, p: HopGainParams) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::NegativeInput { value: x });
    }
    Ok((-x / p.mu).exp() / p.mu)
}

/// Distribution function of the squared channel gain: 1 - e^{-x/mu}.
pub fn gain_cdf(x: f64, p: HopGainParams) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::NegativeInput { value: x });
    }
    Ok(-(-x / p.mu).exp_m1())
}

/// Draw one squared channel gain by inverse-CDF sampling.
///
/// Uses -mu ln(U) with U uniform on the open interval (0, 1), so log(0)
/// cannot occur. Deterministic given the stream state.
pub fn sample_gain<R: rand::Rng + ?Sized>(p: HopGainParams, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(rand::distr::Open01);
    -p.mu * u.ln()
}

/// End-to-end SNR of one link under the given protocol.
///
/// DF: gamma_bar * min(h1, h2).
/// FG: gamma_bar^2 h1 h2 / (gamma_bar mu1 + gamma_bar h2 + 1).
/// VG: gamma_bar^2 h1 h2 / (gamma_bar h1 + gamma_bar h2 + 1).
pub fn end_to_end_snr(kind: ProtocolKind, link: LinkRealization, p: &SnrParams) -> f64 {
    let g = p.gamma_bar;
    let (h1, h2) = (link.h1_sq, link.h2_sq);
    match kind {
        ProtocolKind::Df => g * h1.min(h2),
        ProtocolKind::Fg => g * g * h1 * h2 / (g * p.mu1 + g * h2 + 1.0),
        ProtocolKind::Vg => g * g * h1 * h2 / (g * h1 + g * h2 + 1.0),
    }
}
