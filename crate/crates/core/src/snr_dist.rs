//! Closed-form densities, distribution functions and near-zero power-series
//! coefficients of the per-link end-to-end SNR for the three protocols.
//!
//! The DF density is a plain exponential and everything about it is in
//! closed form. The FG and VG densities are two-term K0/K1 Bessel
//! expressions with an integrable logarithmic singularity at the origin;
//! their distribution functions are evaluated by adaptive quadrature, with
//! the singular half of the interval tamed by the substitution u = sqrt(s).

use crate::bessel::{bessel_k0, bessel_k1};
use crate::channel::{ProtocolKind, SnrParams};
use crate::error::{Error, Result};
use crate::quad::integrate;

/// Coefficients of f(s) = s^q (g0 + g1 s + O(s^2)) about s = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesCoefficients {
    pub q: u32,
    pub g0: f64,
    pub g1: f64,
}

/// End-to-end SNR distribution of a single link for one protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolDistribution {
    kind: ProtocolKind,
    params: SnrParams,
}

impl ProtocolDistribution {
    pub fn new(kind: ProtocolKind, params: SnrParams) -> Self {
        Self { kind, params }
    }

    pub fn kind(&self) -> ProtocolKind {
        self.kind
    }

    pub fn params(&self) -> &SnrParams {
        &self.params
    }

    /// Exponential rate of the DF end-to-end SNR: (1/mu1 + 1/mu2) / gamma_bar.
    fn df_rate(&self) -> f64 {
        (1.0 / self.params.mu1() + 1.0 / self.params.mu2()) / self.params.gamma_bar()
    }

    /// Subchannel diversity exponent used by the outage machinery.
    ///
    /// DF has q = 0 from its exact expansion; FG and VG have no valid
    /// power-series expansion, and the approximations substitute their
    /// densities directly with an effective exponent of 0.
    pub fn effective_q(&self) -> u32 {
        0
    }

    /// Density of the end-to-end SNR at `s`.
    ///
    /// FG and VG are singular (logarithmically) at s = 0 and error there;
    /// DF is finite everywhere.
    pub fn pdf(&self, s: f64) -> Result<f64> {
        if s < 0.0 || s.is_nan() {
            return Err(Error::NegativeInput { value: s });
        }
        match self.kind {
            ProtocolKind::Df => {
                let lambda = self.df_rate();
                Ok(lambda * (-lambda * s).exp())
            }
            ProtocolKind::Fg => {
                if s == 0.0 {
                    return Err(Error::SingularAtZero);
                }
                let (a, b) = self.fg_factors();
                let w = 2.0 * (b * s).sqrt();
                Ok((-a * s).exp() * (2.0 * b * bessel_k0(w) + a * w * bessel_k1(w)))
            }
            ProtocolKind::Vg => {
                if s == 0.0 {
                    return Err(Error::SingularAtZero);
                }
                let (a, c, mu2) = self.vg_factors();
                let w = 2.0 * (c * s * (1.0 + s * mu2)).sqrt();
                Ok((-a * s).exp()
                    * (2.0 * c * (1.0 + 2.0 * s * mu2) * bessel_k0(w) + a * w * bessel_k1(w)))
            }
        }
    }

    /// Distribution function of the end-to-end SNR at `s`.
    ///
    /// DF in closed form; FG/VG by adaptive quadrature of the density over
    /// (0, s], split at s/2 with the substitution u = sqrt(t) on the lower
    /// half to absorb the K0 log singularity. Absolute tolerance 1e-10.
    pub fn cdf(&self, s: f64) -> Result<f64> {
        if s < 0.0 || s.is_nan() {
            return Err(Error::NegativeInput { value: s });
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        match self.kind {
            ProtocolKind::Df => Ok(-(-self.df_rate() * s).exp_m1()),
            ProtocolKind::Fg | ProtocolKind::Vg => {
                let mid = 0.5 * s;
                let lower = integrate(
                    |u| 2.0 * u * self.pdf(u * u).unwrap_or(0.0),
                    0.0,
                    mid.sqrt(),
                    5e-11,
                );
                let upper = integrate(|t| self.pdf(t).unwrap_or(0.0), mid, s, 5e-11);
                Ok((lower + upper).clamp(0.0, 1.0))
            }
        }
    }

    /// Near-zero power-series coefficients, when an exact expansion exists.
    ///
    /// DF: q = 0, g0 = lambda, g1 = -lambda^2. FG/VG: `None` — those
    /// densities cannot be expanded to the required form, so series-based
    /// asymptotics are unavailable for them (the direct approximations
    /// still evaluate the densities themselves).
    pub fn series_coefficients(&self) -> Option<SeriesCoefficients> {
        match self.kind {
            ProtocolKind::Df => {
                let lambda = self.df_rate();
                Some(SeriesCoefficients {
                    q: 0,
                    g0: lambda,
                    g1: -lambda * lambda,
                })
            }
            ProtocolKind::Fg | ProtocolKind::Vg => None,
        }
    }

    /// FG density factors: decay rate a = 1/(gamma_bar mu1) and
    /// b = (1 + gamma_bar mu1) / (gamma_bar^2 mu1 mu2).
    fn fg_factors(&self) -> (f64, f64) {
        let g = self.params.gamma_bar();
        let (mu1, mu2) = (self.params.mu1(), self.params.mu2());
        let a = 1.0 / (g * mu1);
        let b = (1.0 + g * mu1) / (g * g * mu1 * mu2);
        (a, b)
    }

    /// VG density factors: decay rate a = (1/mu1 + 1/mu2)/gamma_bar and
    /// c = 1 / (gamma_bar^2 mu1 mu2).
    fn vg_factors(&self) -> (f64, f64, f64) {
        let g = self.params.gamma_bar();
        let (mu1, mu2) = (self.params.mu1(), self.params.mu2());
        let a = (1.0 / mu1 + 1.0 / mu2) / g;
        let c = 1.0 / (g * g * mu1 * mu2);
        (a, c, mu2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{end_to_end_snr, sample_gain, HopGainParams, LinkRealization};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dist(kind: ProtocolKind, gamma_bar: f64) -> ProtocolDistribution {
        ProtocolDistribution::new(kind, SnrParams::new(gamma_bar, 1.0, 1.0).unwrap())
    }

    /// Closed-form FG/VG distribution functions derived by integrating the
    /// two-term K0/K1 densities: both are exact derivatives of
    /// 1 - e^{-a s} w(s) K1(w(s)). Used as an independent cross-check of
    /// the quadrature path only.
    fn closed_form_cdf(d: &ProtocolDistribution, s: f64) -> f64 {
        let w = match d.kind() {
            ProtocolKind::Df => return d.cdf(s).unwrap(),
            ProtocolKind::Fg => {
                let (_, b) = d.fg_factors();
                2.0 * (b * s).sqrt()
            }
            ProtocolKind::Vg => {
                let (_, c, mu2) = d.vg_factors();
                2.0 * (c * s * (1.0 + s * mu2)).sqrt()
            }
        };
        let a = match d.kind() {
            ProtocolKind::Fg => d.fg_factors().0,
            _ => d.vg_factors().0,
        };
        1.0 - (-a * s).exp() * w * bessel_k1(w)
    }

    #[test]
    fn df_pdf_examples() {
        let d = dist(ProtocolKind::Df, 100.0);
        assert!((d.pdf(0.0).unwrap() - 0.02).abs() < 1e-15);
        assert!((d.pdf(50.0).unwrap() - 0.02 * (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn df_cdf_median() {
        let d = dist(ProtocolKind::Df, 100.0);
        let median = std::f64::consts::LN_2 / 0.02;
        assert!((d.cdf(median).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cdf_at_zero_and_negative() {
        for kind in [ProtocolKind::Df, ProtocolKind::Fg, ProtocolKind::Vg] {
            let d = dist(kind, 100.0);
            assert_eq!(d.cdf(0.0).unwrap(), 0.0);
            assert!(d.cdf(-1.0).is_err());
            assert!(d.pdf(-1.0).is_err());
        }
    }

    #[test]
    fn fg_vg_singular_at_zero() {
        assert_eq!(
            dist(ProtocolKind::Fg, 100.0).pdf(0.0),
            Err(Error::SingularAtZero)
        );
        assert_eq!(
            dist(ProtocolKind::Vg, 100.0).pdf(0.0),
            Err(Error::SingularAtZero)
        );
    }

    #[test]
    fn densities_normalize() {
        // integral over (0, inf) within 1e-6; split [0,1] with sqrt
        // substitution plus a direct tail. All three densities decay at
        // rate >= 1/gamma_bar (mu = 1), so 80 gamma_bar leaves a tail
        // below e^{-80}.
        for kind in [ProtocolKind::Df, ProtocolKind::Fg, ProtocolKind::Vg] {
            for gamma in [10.0, 100.0] {
                let d = dist(kind, gamma);
                let head = integrate(|u| 2.0 * u * d.pdf(u * u).unwrap(), 0.0, 1.0, 1e-9);
                let tail = integrate(|t| d.pdf(t).unwrap(), 1.0, 80.0 * gamma, 1e-9);
                let total = head + tail;
                assert!(
                    (total - 1.0).abs() < 1e-6,
                    "{kind:?} gamma={gamma}: {total}"
                );
            }
        }
    }

    #[test]
    fn vg_cdf_reaches_one() {
        let d = dist(ProtocolKind::Vg, 100.0);
        let v = d.cdf(1e6).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "cdf(1e6) = {v}");
    }

    #[test]
    fn quadrature_cdf_matches_closed_form() {
        for kind in [ProtocolKind::Fg, ProtocolKind::Vg] {
            for gamma in [10.0, 100.0] {
                let d = dist(kind, gamma);
                for s in [0.05, 0.5, 3.0, 20.0, 150.0] {
                    let q = d.cdf(s).unwrap();
                    let c = closed_form_cdf(&d, s);
                    assert!(
                        (q - c).abs() < 1e-9,
                        "{kind:?} gamma={gamma} s={s}: {q} vs {c}"
                    );
                }
            }
        }
    }

    #[test]
    fn cdf_monotone_nondecreasing() {
        for kind in [ProtocolKind::Df, ProtocolKind::Fg, ProtocolKind::Vg] {
            let d = dist(kind, 50.0);
            let mut prev = 0.0;
            for i in 1..=40 {
                let s = 0.25 * i as f64;
                let v = d.cdf(s).unwrap();
                assert!(v + 1e-12 >= prev, "{kind:?} s={s}");
                prev = v;
            }
            assert!(prev <= 1.0);
        }
    }

    #[test]
    fn df_series_coefficients() {
        let d = dist(ProtocolKind::Df, 100.0);
        let c = d.series_coefficients().unwrap();
        assert_eq!(c.q, 0);
        assert!((c.g0 - 0.02).abs() < 1e-15);
        assert!((c.g1 + 4e-4).abs() < 1e-15);

        let d = ProtocolDistribution::new(ProtocolKind::Df, SnrParams::new(10.0, 2.0, 2.0).unwrap());
        let c = d.series_coefficients().unwrap();
        assert!((c.g0 - 0.1).abs() < 1e-15);
        assert!((c.g1 + 0.01).abs() < 1e-15);
    }

    #[test]
    fn fg_vg_series_unavailable() {
        assert!(dist(ProtocolKind::Fg, 100.0).series_coefficients().is_none());
        assert!(dist(ProtocolKind::Vg, 100.0).series_coefficients().is_none());
    }

    #[test]
    fn df_series_remainder_is_quadratic() {
        // |pdf(s) - (g0 + g1 s)| <= C s^2 for s <= 0.01, with
        // C = lambda^3 (Taylor remainder bound with slack).
        let d = dist(ProtocolKind::Df, 10.0);
        let c = d.series_coefficients().unwrap();
        let lambda = c.g0;
        let bound = lambda * lambda * lambda;
        let mut s = 1e-4;
        while s <= 0.01 {
            let err = (d.pdf(s).unwrap() - (c.g0 + c.g1 * s)).abs();
            assert!(err <= bound * s * s, "s={s}: {err}");
            s *= 2.0;
        }
    }

    #[test]
    fn high_snr_df_vg_proximity() {
        // relative cdf difference below 10% at s = (e^2 - 1)/2
        let s = ((2.0f64).exp() - 1.0) / 2.0;
        for gamma in [1e4, 1e5] {
            let df = dist(ProtocolKind::Df, gamma).cdf(s).unwrap();
            let vg = dist(ProtocolKind::Vg, gamma).cdf(s).unwrap();
            let rel = ((vg - df) / df).abs();
            assert!(rel < 0.10, "gamma={gamma}: rel = {rel}");
        }
    }

    #[test]
    fn histogram_matches_density() {
        // chi-square goodness of fit on 50 equal-probability bins,
        // 1e6 samples per (protocol, gamma_bar); statistic must stay below
        // the 0.999 quantile of chi2(49) = 85.3506 (i.e. p > 0.001).
        const CHI2_49_Q999: f64 = 85.35056460859305;
        let unit = HopGainParams::new(1.0).unwrap();
        for kind in [ProtocolKind::Df, ProtocolKind::Fg, ProtocolKind::Vg] {
            for gamma in [10.0, 100.0] {
                let params = SnrParams::new(gamma, 1.0, 1.0).unwrap();
                let d = ProtocolDistribution::new(kind, params);

                // equal-probability bin edges via bisection on the closed
                // form (edges need not be exact; expected masses below use
                // the production cdf)
                let bins = 50usize;
                let mut edges = Vec::with_capacity(bins + 1);
                edges.push(0.0);
                for i in 1..bins {
                    let target = i as f64 / bins as f64;
                    let (mut lo, mut hi) = (0.0, 200.0 * gamma);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        if closed_form_cdf(&d, mid) < target {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    edges.push(0.5 * (lo + hi));
                }
                edges.push(f64::INFINITY);

                let expected: Vec<f64> = (0..bins)
                    .map(|i| {
                        let lo = d.cdf(edges[i]).unwrap();
                        let hi = if edges[i + 1].is_finite() {
                            d.cdf(edges[i + 1]).unwrap()
                        } else {
                            1.0
                        };
                        hi - lo
                    })
                    .collect();

                let n = 1_000_000usize;
                let mut counts = vec![0u64; bins];
                let mut rng = ChaCha8Rng::seed_from_u64(23);
                for _ in 0..n {
                    let link = LinkRealization::new(
                        sample_gain(unit, &mut rng),
                        sample_gain(unit, &mut rng),
                    )
                    .unwrap();
                    let snr = end_to_end_snr(kind, link, &params);
                    let idx = edges.partition_point(|&e| e <= snr).saturating_sub(1);
                    counts[idx.min(bins - 1)] += 1;
                }

                let mut stat = 0.0;
                for i in 0..bins {
                    let e = expected[i] * n as f64;
                    let o = counts[i] as f64;
                    stat += (o - e) * (o - e) / e;
                }
                assert!(
                    stat < CHI2_49_Q999,
                    "{kind:?} gamma={gamma}: chi2 = {stat}"
                );
            }
        }
    }
}
