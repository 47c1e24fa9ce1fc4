//! Built-in verification suites: the algebraic identities, hand-derived
//! values and Monte Carlo cross-checks behind the library, runnable from
//! the CLI as a machine-readable gate.
//!
//! `Fast` covers oracles and algebraic identities and finishes in well
//! under a minute. `Full` adds 1e7-trial Monte Carlo cross-checks of the
//! outage approximations.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{end_to_end_snr, sample_gain, HopGainParams, LinkRealization, ProtocolKind, SnrParams};
use crate::laplace::{invert_at, invert_at_residues, invert_simple_poles, NodeMultiset};
use crate::mc::{estimate_curve_both, estimate_outage, run_trial, SimConfig};
use crate::outage::{bulk_outage, f_i_approx, f_psi, lift_series, ps_outage, SelectionScheme};
use crate::quad::integrate;
use crate::snr_dist::{ProtocolDistribution, SeriesCoefficients};
use crate::sx::sx_value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyLevel {
    Fast,
    Full,
}

impl std::str::FromStr for VerifyLevel {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fast" => Ok(Self::Fast),
            "full" => Ok(Self::Full),
            other => Err(crate::error::Error::InvalidConfig {
                detail: format!("unknown verify level {other:?}, expected fast or full"),
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub level: VerifyLevel,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Runner {
    checks: Vec<CheckResult>,
}

impl Runner {
    fn run<F: FnOnce() -> Result<String, String>>(&mut self, name: &str, f: F) {
        let start = Instant::now();
        let (passed, detail) = match f() {
            Ok(detail) => (true, detail),
            Err(detail) => (false, detail),
        };
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn df_dist(gamma: f64) -> ProtocolDistribution {
    ProtocolDistribution::new(ProtocolKind::Df, SnrParams::new(gamma, 1.0, 1.0).unwrap())
}

/// Exact single-carrier DF outage: 1 - e^{-lambda (e^s - 1)}.
fn df_exact_k1(gamma: f64, s: f64) -> f64 {
    let lambda = 2.0 / gamma;
    1.0 - (-lambda * (s.exp() - 1.0)).exp()
}

pub fn run(level: VerifyLevel) -> VerifyReport {
    let mut r = Runner { checks: Vec::new() };

    r.run("laplace/hand-values", || {
        let cases: [(Vec<(f64, u32)>, f64, f64); 3] = [
            (vec![(0.0, 2)], 2.0, 2.0),
            (vec![(0.0, 1), (1.0, 1)], 2.0, (2.0f64).exp() - 1.0),
            (vec![(0.0, 1), (1.0, 2)], 2.0, 1.0 + (2.0f64).exp()),
        ];
        for (pairs, s, expect) in cases {
            let p = NodeMultiset::new(pairs).unwrap();
            let v = invert_at(&p, s).map_err(|e| e.to_string())?.value;
            if (v - expect).abs() > 1e-10 {
                return Err(format!("got {v}, expected {expect}"));
            }
        }
        Ok("3 hand-derived transforms reproduced to 1e-10".into())
    });

    r.run("laplace/dual-path-agreement", || {
        use rand::RngExt;
        let mut rng = ChaCha8Rng::seed_from_u64(424242);
        let mut worst = 0.0f64;
        let mut accepted = 0;
        while accepted < 300 {
            // poles shaped like the production multisets: small values,
            // multiplicities up to 6; draws where cancellation provably
            // swamps the residue expansion are screened by its condition
            let distinct = rng.random_range(2..=4usize);
            let mut values: Vec<f64> = (0..=6).map(f64::from).collect();
            for i in 0..distinct {
                let j = rng.random_range(i..values.len());
                values.swap(i, j);
            }
            values.truncate(distinct);
            let pairs: Vec<(f64, u32)> = values
                .into_iter()
                .map(|v| (v + rng.random_range(-0.3..0.3), rng.random_range(1..=6u32)))
                .collect();
            let p = match NodeMultiset::new(pairs) {
                Ok(p) if p.total_count() >= 2 && p.total_count() <= 8 => p,
                _ => continue,
            };
            let s: f64 = rng.random_range(0.0..10.0);
            let b = crate::laplace::invert_at_residues_detailed(&p, s)
                .map_err(|e| e.to_string())?;
            if b.condition > 1e6 {
                continue;
            }
            accepted += 1;
            let a = invert_at(&p, s).map_err(|e| e.to_string())?.value;
            let rel = (a - b.value).abs() / a.abs().max(b.value.abs()).max(1e-300);
            worst = worst.max(rel);
        }
        if worst > 1e-8 {
            return Err(format!("worst relative disagreement {worst:.3e}"));
        }
        Ok(format!("300 random multisets, worst relative gap {worst:.2e}"))
    });

    r.run("laplace/simple-pole-formula", || {
        let poles = [0.0, 1.0, 2.5, 3.25];
        let p = NodeMultiset::from_values(&poles).unwrap();
        for s in [0.0, 0.7, 3.0] {
            let a = invert_at(&p, s).map_err(|e| e.to_string())?.value;
            let b = invert_simple_poles(&poles, s).map_err(|e| e.to_string())?;
            if (a - b).abs() > 1e-8 * a.abs().max(1.0) {
                return Err(format!("s={s}: {a} vs {b}"));
            }
        }
        Ok("matches the divided-difference path on distinct poles".into())
    });

    r.run("sx/hand-values", || {
        let s0 = sx_value(1, 2.0, 0, 0).map_err(|e| e.to_string())?;
        let s1 = sx_value(1, 2.0, 0, 1).map_err(|e| e.to_string())?;
        let e0 = (2.0f64).exp() - 1.0;
        let e1 = ((4.0f64).exp() - 1.0) / 2.0;
        if (s0 - e0).abs() > 1e-10 || (s1 - e1).abs() > 1e-10 {
            return Err(format!("S_0 = {s0} (want {e0}), S_1 = {s1} (want {e1})"));
        }
        Ok("S_0(1,2,0) and S_1(1,2,0) reproduced to 1e-10".into())
    });

    r.run("sx/sign-and-ordering", || {
        for k in 1..=6u32 {
            for s in [0.5, 2.0] {
                let s0 = sx_value(k, s, 0, 0).map_err(|e| e.to_string())?;
                let s1 = sx_value(k, s, 0, 1).map_err(|e| e.to_string())?;
                if !(s0 > 0.0 && s1 - s0 > 0.0) {
                    return Err(format!("K={k} s={s}: S_0={s0}, S_1={s1}"));
                }
            }
        }
        Ok("S_0 > 0 and S_1 > S_0 on the q = 0 grid".into())
    });

    r.run("distributions/df-closed-forms", || {
        let d = df_dist(100.0);
        let pdf0 = d.pdf(0.0).map_err(|e| e.to_string())?;
        let med = d.cdf(std::f64::consts::LN_2 / 0.02).map_err(|e| e.to_string())?;
        if (pdf0 - 0.02).abs() > 1e-14 || (med - 0.5).abs() > 1e-12 {
            return Err(format!("pdf(0) = {pdf0}, cdf(median) = {med}"));
        }
        Ok("DF density and median verified".into())
    });

    r.run("distributions/normalization", || {
        for kind in [ProtocolKind::Fg, ProtocolKind::Vg] {
            let d = ProtocolDistribution::new(kind, SnrParams::new(100.0, 1.0, 1.0).unwrap());
            let head = integrate(|u| 2.0 * u * d.pdf(u * u).unwrap(), 0.0, 1.0, 1e-9);
            let tail = integrate(|t| d.pdf(t).unwrap(), 1.0, 8000.0, 1e-9);
            if (head + tail - 1.0).abs() > 1e-6 {
                return Err(format!("{kind:?}: integral = {}", head + tail));
            }
        }
        Ok("FG and VG densities integrate to 1 within 1e-6".into())
    });

    r.run("outage/lift-identities", || {
        let c = SeriesCoefficients {
            q: 0,
            g0: 0.02,
            g1: -4e-4,
        };
        let l1 = lift_series(&c, 1);
        let l2 = lift_series(&c, 2);
        if l1.q_prime != 0 || l1.g0_prime != c.g0 || l1.g1_prime != c.g1 {
            return Err("M = 1 lift is not the identity".into());
        }
        if l2.q_prime != 1
            || (l2.g0_prime - 8e-4).abs() > 1e-18
            || (l2.g1_prime + 2.4e-5).abs() > 1e-18
        {
            return Err(format!("M = 2 lift: {l2:?}"));
        }
        Ok("series lift identities hold".into())
    });

    r.run("outage/structural-identities", || {
        let d = df_dist(100.0);
        for (m, k) in [(2u32, 2u32), (3, 1)] {
            let fi = f_i_approx(k, &d, 0, 2.0).map_err(|e| e.to_string())?;
            let b = bulk_outage(m, k, &d, 0, 2.0).map_err(|e| e.to_string())?;
            if b.approx != fi.value.powi(m as i32) {
                return Err(format!("bulk != F_I^M at M={m} K={k}"));
            }
            let b1 = bulk_outage(1, k, &d, 0, 2.0).map_err(|e| e.to_string())?;
            let p1 = ps_outage(1, k, &d, 0, 2.0).map_err(|e| e.to_string())?;
            if b1.approx != p1.approx {
                return Err(format!("schemes differ at M=1, K={k}"));
            }
        }
        let v = f_psi(&d, 1, 3.0).map_err(|e| e.to_string())?;
        if v != d.pdf(3.0).unwrap() {
            return Err("f_psi(M=1) is not the density".into());
        }
        Ok("factorization and M = 1 coincidence are bit-identical".into())
    });

    r.run("mc/exact-oracle-df-k1", || {
        let trials = if level == VerifyLevel::Full { 1_000_000 } else { 200_000 };
        for gamma_db in [20.0, 30.0] {
            let gamma = 10f64.powf(gamma_db / 10.0);
            for m in 1..=3u32 {
                let cfg = SimConfig::new(
                    m,
                    1,
                    ProtocolKind::Df,
                    SelectionScheme::Bulk,
                    SnrParams::new(gamma, 1.0, 1.0).unwrap(),
                    2.0,
                    trials,
                    90210,
                )
                .unwrap();
                let est = estimate_outage(&cfg);
                let exact = df_exact_k1(gamma, 2.0).powi(m as i32);
                if (est.p_hat - exact).abs() > 3.0 * est.half_width() {
                    return Err(format!(
                        "M={m} {gamma_db} dB: p_hat={} exact={exact} hw={}",
                        est.p_hat,
                        est.half_width()
                    ));
                }
            }
        }
        Ok(format!("exact DF K=1 oracle matched at {trials} trials"))
    });

    r.run("mc/determinism", || {
        let cfg = SimConfig::new(
            2,
            2,
            ProtocolKind::Vg,
            SelectionScheme::PerSubcarrier,
            SnrParams::new(100.0, 1.0, 1.0).unwrap(),
            2.0,
            30_000,
            777,
        )
        .unwrap();
        let a = estimate_outage(&cfg);
        let b = estimate_outage(&cfg);
        if a != b {
            return Err("re-run differed".into());
        }
        Ok("identical estimates across re-runs".into())
    });

    r.run("mc/scheme-dominance", || {
        let cfg = SimConfig::new(
            3,
            3,
            ProtocolKind::Df,
            SelectionScheme::Bulk,
            SnrParams::new(50.0, 1.0, 1.0).unwrap(),
            2.0,
            100_000,
            31337,
        )
        .unwrap();
        for idx in 0..cfg.trials() {
            let t = run_trial(&cfg, idx);
            if t.ps_info < t.bulk_info {
                return Err(format!("violation at trial {idx}"));
            }
        }
        Ok("ps_info >= bulk_info on 1e5 trials".into())
    });

    r.run("channel/protocol-ordering", || {
        let unit = HopGainParams::new(1.0).unwrap();
        let params = SnrParams::new(100.0, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(555);
        for _ in 0..100_000 {
            let link = LinkRealization::new(
                sample_gain(unit, &mut rng),
                sample_gain(unit, &mut rng),
            )
            .unwrap();
            let vg = end_to_end_snr(ProtocolKind::Vg, link, &params);
            let df = end_to_end_snr(ProtocolKind::Df, link, &params);
            if vg > df {
                return Err(format!("gamma_VG {vg} > gamma_DF {df}"));
            }
        }
        Ok("gamma_VG <= gamma_DF on 1e5 links".into())
    });

    if level == VerifyLevel::Full {
        r.run("mc/approximation-cross-check", || {
            // 1e7-trial checks in the p in [1e-4, 1e-2] band
            let cases = [
                (ProtocolKind::Df, 2u32, 2u32, 20.0, 0.20),
                (ProtocolKind::Vg, 2, 2, 20.0, 0.20),
                (ProtocolKind::Fg, 2, 2, 25.0, 0.35),
            ];
            let mut lines = Vec::new();
            for (protocol, m, k, db, tol) in cases {
                let cfg = SimConfig::new(
                    m,
                    k,
                    protocol,
                    SelectionScheme::Bulk,
                    SnrParams::new(10f64.powf(db / 10.0), 1.0, 1.0).unwrap(),
                    2.0,
                    10_000_000,
                    2024,
                )
                .unwrap();
                let (bulk_curve, ps_curve) =
                    estimate_curve_both(&cfg, &[db]).map_err(|e| e.to_string())?;
                for (curve, scheme) in [(bulk_curve, "bulk"), (ps_curve, "ps")] {
                    let pt = &curve.points[0];
                    if pt.mc.p_hat >= 1e-4 && pt.mc.p_hat <= 1e-2 {
                        let rel = rel_err(pt.analytic, pt.mc.p_hat);
                        if rel > tol {
                            return Err(format!(
                                "{protocol:?}/{scheme} M={m} K={k} {db} dB: rel {rel:.3}"
                            ));
                        }
                        lines.push(format!("{protocol:?}/{scheme} rel {rel:.3}"));
                    }
                }
            }
            Ok(lines.join("; "))
        });

        r.run("mc/dominance-1e7", || {
            let cfg = SimConfig::new(
                2,
                2,
                ProtocolKind::Df,
                SelectionScheme::Bulk,
                SnrParams::new(100.0, 1.0, 1.0).unwrap(),
                2.0,
                10_000_000,
                99,
            )
            .unwrap();
            for idx in 0..cfg.trials() {
                let t = run_trial(&cfg, idx);
                if t.ps_info < t.bulk_info {
                    return Err(format!("violation at trial {idx}"));
                }
            }
            Ok("ps_info >= bulk_info on 1e7 trials".into())
        });
    }

    VerifyReport {
        level,
        checks: r.checks,
    }
}
