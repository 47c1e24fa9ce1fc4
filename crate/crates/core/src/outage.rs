//! Outage probability approximations for bulk and per-subcarrier relay
//! selection over the parallel fading channel, their high-SNR asymptotics
//! and diversity orders.
//!
//! The single-relay building block F_I(s) combines the S_x coefficients
//! with the end-to-end SNR density; bulk selection raises it to the M-th
//! power, per-subcarrier selection replaces the density by the density of
//! the per-subcarrier maximum (a lifted series of order q' = M(q+1) - 1).
//! The formulas are high-SNR approximations: raw values above 1 are
//! clamped and flagged instead of silently reported.

use crate::error::{Error, Result};
use crate::snr_dist::{ProtocolDistribution, SeriesCoefficients};
use crate::sx::sx_value;

/// Relay selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectionScheme {
    /// One relay forwards all subcarriers.
    Bulk,
    /// The best relay is chosen independently for each subcarrier.
    PerSubcarrier,
}

impl std::str::FromStr for SelectionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bulk" => Ok(Self::Bulk),
            "ps" | "per-subcarrier" | "per_subcarrier" => Ok(Self::PerSubcarrier),
            other => Err(Error::InvalidConfig {
                detail: format!("unknown scheme {other:?}, expected bulk or per-subcarrier"),
            }),
        }
    }
}

impl std::fmt::Display for SelectionScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Bulk => "bulk",
            Self::PerSubcarrier => "per-subcarrier",
        })
    }
}

/// Series coefficients of the per-subcarrier maximum density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftedSeries {
    pub q_prime: u32,
    pub g0_prime: f64,
    pub g1_prime: f64,
}

/// A single outage evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageResult {
    /// Approximate outage probability, clamped into [0, 1].
    pub approx: f64,
    /// High-SNR asymptote, when series coefficients exist (DF only).
    pub asymptotic: Option<f64>,
    /// Diversity order M K (q + 1).
    pub diversity: u32,
    /// Set when the raw approximation exceeded 1 and was clamped.
    pub clamped: bool,
}

/// Value of F_I or a related approximation, with its clamp flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Approx {
    pub value: f64,
    pub clamped: bool,
}

/// Shared core of the approximations:
/// S_0^{Kq+1} / (S_1 - S_0)^{Kq} * f((S_1 - S_0)/S_0)^K.
fn proposition_approx<F>(k: u32, q: u32, s: f64, density: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let s0 = sx_value(k, s, q, 0)?;
    let s1 = sx_value(k, s, q, 1)?;
    let diff = s1 - s0;
    if !(s0 > 0.0) || !(diff > 0.0) {
        return Err(Error::InvalidRegime {
            detail: format!("S_0 = {s0}, S_1 - S_0 = {diff} at K={k}, q={q}, s={s}"),
        });
    }
    let f_value = density(diff / s0)?;
    let kq = (k * q) as i32;
    Ok(s0.powi(kq + 1) / diff.powi(kq) * f_value.powi(k as i32))
}

/// Single-relay outage approximation F_I(s) for K parallel subcarriers.
pub fn f_i_approx(k: u32, d: &ProtocolDistribution, q: u32, s: f64) -> Result<Approx> {
    if !(s > 0.0) {
        return Err(Error::InvalidRegime {
            detail: format!("threshold s must be positive, got {s}"),
        });
    }
    let raw = proposition_approx(k, q, s, |t| d.pdf(t))?;
    Ok(clamp_unit(raw))
}

fn clamp_unit(raw: f64) -> Approx {
    if raw > 1.0 {
        Approx {
            value: 1.0,
            clamped: true,
        }
    } else {
        Approx {
            value: raw,
            clamped: false,
        }
    }
}

/// Outage probability with bulk selection: F_I(s)^M, with asymptote
/// (S_0(K,s,q) g0^K)^M when series coefficients exist.
pub fn bulk_outage(
    m: u32,
    k: u32,
    d: &ProtocolDistribution,
    q: u32,
    s: f64,
) -> Result<OutageResult> {
    check_counts(m, k)?;
    let fi = f_i_approx(k, d, q, s)?;
    let approx = fi.value.powi(m as i32);
    let asymptotic = match d.series_coefficients() {
        Some(c) => Some((sx_value(k, s, q, 0)? * c.g0.powi(k as i32)).powi(m as i32)),
        None => None,
    };
    Ok(OutageResult {
        approx,
        asymptotic,
        diversity: diversity_order(SelectionScheme::Bulk, m, k, q),
        clamped: fi.clamped,
    })
}

/// Series coefficients of the density of the maximum over M i.i.d. links.
///
/// q' = M(q+1) - 1; g0' = M g0^M / (q+1)^{M-1};
/// g1' = M [ g0^{M-1} g1 / (q+1)^{M-1}
///         + (M-1) g0^{M-1} g1 / ((q+1)^{M-2} (q+2)) ].
pub fn lift_series(c: &SeriesCoefficients, m: u32) -> LiftedSeries {
    let mf = m as f64;
    let q1 = (c.q + 1) as f64;
    let q2 = (c.q + 2) as f64;
    let g0_pow = c.g0.powi(m as i32 - 1);
    LiftedSeries {
        q_prime: m * (c.q + 1) - 1,
        g0_prime: mf * c.g0.powi(m as i32) / q1.powi(m as i32 - 1),
        g1_prime: mf
            * (g0_pow * c.g1 / q1.powi(m as i32 - 1)
                + (mf - 1.0) * g0_pow * c.g1 / (q1.powi(m as i32 - 2) * q2)),
    }
}

/// Density of the per-subcarrier maximum: M F(s)^{M-1} f(s).
pub fn f_psi(d: &ProtocolDistribution, m: u32, s: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidConfig {
            detail: "relay count M must be at least 1".into(),
        });
    }
    if m == 1 {
        return d.pdf(s);
    }
    Ok(m as f64 * d.cdf(s)?.powi(m as i32 - 1) * d.pdf(s)?)
}

/// Outage probability with per-subcarrier selection: the single-relay
/// approximation with the density replaced by the per-subcarrier maximum
/// density and the series order lifted to q' = M(q+1) - 1.
pub fn ps_outage(
    m: u32,
    k: u32,
    d: &ProtocolDistribution,
    q: u32,
    s: f64,
) -> Result<OutageResult> {
    check_counts(m, k)?;
    if !(s > 0.0) {
        return Err(Error::InvalidRegime {
            detail: format!("threshold s must be positive, got {s}"),
        });
    }
    let q_prime = m * (q + 1) - 1;
    let raw = proposition_approx(k, q_prime, s, |t| f_psi(d, m, t))?;
    let approx = clamp_unit(raw);
    let asymptotic = match d.series_coefficients() {
        Some(c) => {
            let lifted = lift_series(&c, m);
            Some(sx_value(k, s, q_prime, 0)? * lifted.g0_prime.powi(k as i32))
        }
        None => None,
    };
    Ok(OutageResult {
        approx: approx.value,
        asymptotic,
        diversity: diversity_order(SelectionScheme::PerSubcarrier, m, k, q),
        clamped: approx.clamped,
    })
}

/// Diversity order M K (q + 1); identical for both selection schemes.
pub fn diversity_order(_scheme: SelectionScheme, m: u32, k: u32, q: u32) -> u32 {
    m * k * (q + 1)
}

fn check_counts(m: u32, k: u32) -> Result<()> {
    if m < 1 {
        return Err(Error::InvalidConfig {
            detail: "relay count M must be at least 1".into(),
        });
    }
    if k < 1 {
        return Err(Error::InvalidConfig {
            detail: "subcarrier count K must be at least 1".into(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ProtocolKind, SnrParams};
    use crate::quad::integrate;

    fn df(gamma: f64) -> ProtocolDistribution {
        ProtocolDistribution::new(ProtocolKind::Df, SnrParams::new(gamma, 1.0, 1.0).unwrap())
    }

    fn vg(gamma: f64) -> ProtocolDistribution {
        ProtocolDistribution::new(ProtocolKind::Vg, SnrParams::new(gamma, 1.0, 1.0).unwrap())
    }

    #[test]
    fn f_i_df_single_carrier_close_to_exact() {
        // exact single-carrier DF outage is 1 - e^{-lambda (e^s - 1)}
        let d = df(100.0);
        let fi = f_i_approx(1, &d, 0, 2.0).unwrap();
        let lambda = 0.02;
        let exact = 1.0 - (-lambda * ((2.0f64).exp() - 1.0)).exp();
        assert!(!fi.clamped);
        assert!(
            ((fi.value - exact) / exact).abs() < 0.005,
            "{} vs {exact}",
            fi.value
        );
        // frozen value of the formula itself
        assert!((fi.value - 0.119_872_449_266).abs() < 1e-9);
    }

    #[test]
    fn f_i_vanishes_as_s_to_zero() {
        let d = df(100.0);
        let fi = f_i_approx(1, &d, 0, 1e-9).unwrap();
        assert!(fi.value < 1e-8);
    }

    #[test]
    fn bulk_is_f_i_to_the_m_bit_identical() {
        let d = df(100.0);
        for (m, k) in [(1u32, 1u32), (2, 1), (2, 2), (3, 2)] {
            let fi = f_i_approx(k, &d, 0, 2.0).unwrap();
            let b = bulk_outage(m, k, &d, 0, 2.0).unwrap();
            assert_eq!(b.approx, fi.value.powi(m as i32));
        }
    }

    #[test]
    fn bulk_m2_k1_values() {
        let d = df(100.0);
        let b = bulk_outage(2, 1, &d, 0, 2.0).unwrap();
        assert!((b.approx - 0.014369).abs() < 5e-5, "{}", b.approx);
        let asym = b.asymptotic.unwrap();
        let expect = (((2.0f64).exp() - 1.0) * 0.02).powi(2);
        assert!((asym - expect).abs() < 1e-12, "{asym} vs {expect}");
        assert_eq!(b.diversity, 2);
    }

    #[test]
    fn lift_identity_at_m1() {
        let c = SeriesCoefficients {
            q: 0,
            g0: 0.02,
            g1: -4e-4,
        };
        let l = lift_series(&c, 1);
        assert_eq!(l.q_prime, 0);
        assert_eq!(l.g0_prime, 0.02);
        assert_eq!(l.g1_prime, -4e-4);
    }

    #[test]
    fn lift_examples() {
        let c = SeriesCoefficients {
            q: 0,
            g0: 0.02,
            g1: -4e-4,
        };
        let l = lift_series(&c, 2);
        assert_eq!(l.q_prime, 1);
        assert!((l.g0_prime - 8e-4).abs() < 1e-18);
        assert!((l.g1_prime - 3.0 * 0.02 * (-4e-4)).abs() < 1e-18);

        let c = SeriesCoefficients {
            q: 1,
            g0: 1.0,
            g1: 0.0,
        };
        let l = lift_series(&c, 2);
        assert_eq!(l.q_prime, 3);
        assert!((l.g0_prime - 1.0).abs() < 1e-15);
        assert_eq!(l.g1_prime, 0.0);
    }

    #[test]
    fn f_psi_values_and_normalization() {
        let d = df(100.0);
        // M = 1 reduces to the density itself, bit-identically
        assert_eq!(f_psi(&d, 1, 3.0).unwrap(), d.pdf(3.0).unwrap());

        // at the DF median: 2 * 0.5 * (lambda/2) = 0.01
        let median = std::f64::consts::LN_2 / 0.02;
        assert!((f_psi(&d, 2, median).unwrap() - 0.01).abs() < 1e-12);

        // integrates to 1
        for m in [2u32, 3] {
            let total = integrate(
                |t| f_psi(&d, m, t).unwrap(),
                0.0,
                4000.0,
                1e-9,
            );
            assert!((total - 1.0).abs() < 1e-6, "M={m}: {total}");
        }
    }

    #[test]
    fn schemes_coincide_at_m1_bit_identical() {
        for d in [df(100.0), df(2000.0), vg(100.0)] {
            for k in [1u32, 2, 3] {
                let b = bulk_outage(1, k, &d, 0, 2.0).unwrap();
                let p = ps_outage(1, k, &d, 0, 2.0).unwrap();
                let fi = f_i_approx(k, &d, 0, 2.0).unwrap();
                assert_eq!(b.approx, p.approx);
                assert_eq!(b.approx, fi.value);
                assert_eq!(b.asymptotic, p.asymptotic);
            }
        }
    }

    #[test]
    fn ps_m2_k1_close_to_order_statistic_oracle() {
        let d = df(100.0);
        let p = ps_outage(2, 1, &d, 0, 2.0).unwrap();
        let exact = (1.0 - (-0.02 * ((2.0f64).exp() - 1.0)).exp()).powi(2);
        assert!(
            ((p.approx - exact) / exact).abs() < 0.05,
            "{} vs {exact}",
            p.approx
        );
    }

    #[test]
    fn diversity_orders() {
        assert_eq!(diversity_order(SelectionScheme::Bulk, 1, 1, 0), 1);
        assert_eq!(diversity_order(SelectionScheme::Bulk, 2, 3, 0), 6);
        assert_eq!(diversity_order(SelectionScheme::PerSubcarrier, 2, 3, 0), 6);
        assert_eq!(diversity_order(SelectionScheme::Bulk, 3, 2, 0), 6);
        assert_eq!(diversity_order(SelectionScheme::PerSubcarrier, 2, 2, 1), 8);
    }

    #[test]
    fn asymptotic_slope_matches_diversity() {
        // log10 of the asymptote falls by MK(q+1) per decade of gamma_bar
        for (m, k) in [(1u32, 1u32), (2, 1), (1, 2), (2, 2), (3, 2)] {
            for scheme in [SelectionScheme::Bulk, SelectionScheme::PerSubcarrier] {
                let run = |gamma: f64| -> f64 {
                    let d = df(gamma);
                    let r = match scheme {
                        SelectionScheme::Bulk => bulk_outage(m, k, &d, 0, 2.0).unwrap(),
                        SelectionScheme::PerSubcarrier => {
                            ps_outage(m, k, &d, 0, 2.0).unwrap()
                        }
                    };
                    r.asymptotic.unwrap().log10()
                };
                let drop = run(1e4) - run(1e5);
                let expected = (m * k) as f64;
                assert!(
                    ((drop - expected) / expected).abs() < 0.02,
                    "{scheme:?} M={m} K={k}: {drop}"
                );
            }
        }
    }

    #[test]
    fn approx_converges_to_asymptote() {
        for m in 1..=3u32 {
            for k in 1..=3u32 {
                let d = df(1e5);
                for r in [
                    bulk_outage(m, k, &d, 0, 2.0).unwrap(),
                    ps_outage(m, k, &d, 0, 2.0).unwrap(),
                ] {
                    let a = r.asymptotic.unwrap();
                    assert!(
                        ((r.approx - a) / a).abs() < 0.2,
                        "M={m} K={k}: {} vs {a}",
                        r.approx
                    );
                }
            }
        }
    }

    #[test]
    fn no_clamping_at_high_snr_df_grid() {
        for gamma in [1e3, 1e4, 1e5] {
            let d = df(gamma);
            for m in 1..=3u32 {
                for k in 1..=3u32 {
                    assert!(!bulk_outage(m, k, &d, 0, 2.0).unwrap().clamped);
                    assert!(!ps_outage(m, k, &d, 0, 2.0).unwrap().clamped);
                }
            }
        }
    }

    #[test]
    fn clamp_flags_raw_values_above_one() {
        // the clamp guard itself: a synthetic density value large enough to
        // push the raw formula above 1
        let big = proposition_approx(1, 0, 2.0, |_| Ok(5.0)).unwrap();
        assert!(big > 1.0);
        let clamped = clamp_unit(big);
        assert!(clamped.clamped);
        assert_eq!(clamped.value, 1.0);
        let ok = clamp_unit(0.3);
        assert!(!ok.clamped);
        assert_eq!(ok.value, 0.3);
    }

    #[test]
    fn fg_vg_have_no_asymptote() {
        let d = vg(100.0);
        assert!(bulk_outage(2, 2, &d, 0, 2.0).unwrap().asymptotic.is_none());
        assert!(ps_outage(2, 2, &d, 0, 2.0).unwrap().asymptotic.is_none());
    }

    #[test]
    fn invalid_inputs() {
        let d = df(100.0);
        assert!(f_i_approx(1, &d, 0, 0.0).is_err());
        assert!(f_i_approx(1, &d, 0, -1.0).is_err());
        assert!(bulk_outage(0, 1, &d, 0, 2.0).is_err());
        assert!(ps_outage(2, 0, &d, 0, 2.0).is_err());
        assert!(f_psi(&d, 0, 1.0).is_err());
    }
}
