//! Modified Bessel functions of the second kind, orders 0 and 1.
//!
//! Small arguments (x <= 2) use the ascending series paired with I0/I1;
//! larger arguments use the exponentially-scaled integral representation
//!
//!   K_v(x) = sqrt(pi/(2x)) e^{-x} / Gamma(v + 1/2)
//!            * Integral_0^inf e^{-t} t^{v-1/2} (1 + t/(2x))^{v-1/2} dt,
//!
//! evaluated with the substitution t = u^2 so the integrand is smooth.
//! Both branches deliver close to full double precision; accuracy is
//! pinned against external reference values in the tests.

use crate::quad::integrate;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_TERMS: usize = 34;

fn i0_series(x: f64) -> f64 {
    let t = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=SERIES_TERMS {
        term *= t / ((k * k) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

fn i1_series(x: f64) -> f64 {
    let t = 0.25 * x * x;
    let mut term = 1.0; // t^k / (k! (k+1)!)
    let mut sum = 1.0;
    for k in 1..=SERIES_TERMS {
        term *= t / ((k * (k + 1)) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    0.5 * x * sum
}

/// K0(x) for x > 0.
///
/// # Panics
/// Panics if `x <= 0` (K0 is singular at 0 and complex for x < 0).
pub fn bessel_k0(x: f64) -> f64 {
    assert!(x > 0.0, "bessel_k0 requires x > 0, got {x}");
    if x <= 2.0 {
        // K0 = -(ln(x/2) + gamma) I0(x) + sum_{k>=1} H_k t^k / (k!)^2
        let t = 0.25 * x * x;
        let mut term = 1.0;
        let mut harmonic = 0.0;
        let mut sum = 0.0;
        for k in 1..=SERIES_TERMS {
            term *= t / ((k * k) as f64);
            harmonic += 1.0 / k as f64;
            sum += term * harmonic;
            if term * harmonic < 1e-18 * sum.max(1.0) {
                break;
            }
        }
        -((0.5 * x).ln() + EULER_GAMMA) * i0_series(x) + sum
    } else {
        let inv2x = 0.5 / x;
        let integral = integrate(
            |u| (-u * u).exp() / (1.0 + u * u * inv2x).sqrt(),
            0.0,
            8.0,
            1e-15,
        );
        let pi = std::f64::consts::PI;
        (pi / (2.0 * x)).sqrt() * (-x).exp() * (2.0 / pi.sqrt()) * integral
    }
}

/// K1(x) for x > 0.
///
/// # Panics
/// Panics if `x <= 0`.
pub fn bessel_k1(x: f64) -> f64 {
    assert!(x > 0.0, "bessel_k1 requires x > 0, got {x}");
    if x <= 2.0 {
        // K1 = 1/x + ln(x/2) I1(x)
        //      - (x/4) sum_{k>=0} (H_k + H_{k+1} - 2 gamma) t^k / (k! (k+1)!)
        let t = 0.25 * x * x;
        let mut term = 1.0; // t^k / (k! (k+1)!)
        let mut h_k = 0.0;
        let mut h_k1 = 1.0;
        let mut sum = term * (h_k + h_k1 - 2.0 * EULER_GAMMA);
        for k in 1..=SERIES_TERMS {
            term *= t / ((k * (k + 1)) as f64);
            h_k += 1.0 / k as f64;
            h_k1 += 1.0 / (k + 1) as f64;
            let contrib = term * (h_k + h_k1 - 2.0 * EULER_GAMMA);
            sum += contrib;
            if contrib.abs() < 1e-18 * sum.abs().max(1.0) {
                break;
            }
        }
        1.0 / x + (0.5 * x).ln() * i1_series(x) - 0.25 * x * sum
    } else {
        let inv2x = 0.5 / x;
        let integral = integrate(
            |u| u * u * (-u * u).exp() * (1.0 + u * u * inv2x).sqrt(),
            0.0,
            8.0,
            1e-15,
        );
        let pi = std::f64::consts::PI;
        (pi / (2.0 * x)).sqrt() * (-x).exp() * (4.0 / pi.sqrt()) * integral
    }
}
