//! The combinatorial coefficient S_x(K, s, q): a signed double sum over an
//! outer binomial index and over compositions of K-1 into q+1 parts, each
//! term weighting an inverse Laplace transform of a product of simple
//! rational factors by exact multinomial/binomial integers.
//!
//! Integer weights are carried in arbitrary precision and converted to f64
//! only when multiplied against the transform value, so floating point
//! error enters solely through the Laplace engine.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::laplace::{invert_at, NodeMultiset};

/// Query for one coefficient: K subcarriers, threshold s (nats), series
/// exponent q, and the variant selector x in {0, 1}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SxQuery {
    k: u32,
    s: f64,
    q: u32,
    x: u8,
}

impl SxQuery {
    pub fn new(k: u32, s: f64, q: u32, x: u8) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidConfig {
                detail: "K must be at least 1".into(),
            });
        }
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::NegativeInput { value: s });
        }
        if x > 1 {
            return Err(Error::InvalidConfig {
                detail: format!("x must be 0 or 1, got {x}"),
            });
        }
        Ok(Self { k, s, q, x })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn x(&self) -> u8 {
        self.x
    }
}

/// Non-negative integer parts (a_0, ..., a_q) with a fixed sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition {
    parts: Vec<u32>,
}

impl Composition {
    /// Validates the parts against the expected sum `n`.
    pub fn new(parts: Vec<u32>, n: u32) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidConfig {
                detail: "composition needs at least one part".into(),
            });
        }
        let sum: u32 = parts.iter().sum();
        if sum != n {
            return Err(Error::InvalidConfig {
                detail: format!("composition parts sum to {sum}, expected {n}"),
            });
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }
}

/// All tuples of `parts` non-negative integers summing to `n`, in
/// lexicographic order, each exactly once.
pub fn compositions(n: u32, parts: u32) -> Compositions {
    assert!(parts >= 1, "compositions needs at least one part");
    let mut first = vec![0u32; parts as usize];
    *first.last_mut().unwrap() = n;
    Compositions {
        next: Some(first),
    }
}

pub struct Compositions {
    next: Option<Vec<u32>>,
}

impl Iterator for Compositions {
    type Item = Composition;

    fn next(&mut self) -> Option<Composition> {
        let current = self.next.take()?;
        let len = current.len();
        let mut succ = current.clone();
        // advance: find the rightmost non-final slot with mass to its right,
        // bump it, and park the remaining mass in the final slot
        let mut advanced = false;
        let mut suffix_sum: u32 = 0;
        for j in (0..len - 1).rev() {
            suffix_sum += succ[j + 1];
            if suffix_sum > 0 {
                succ[j] += 1;
                for slot in succ[j + 1..].iter_mut() {
                    *slot = 0;
                }
                succ[len - 1] = suffix_sum - 1;
                advanced = true;
                break;
            }
        }
        self.next = advanced.then_some(succ);
        Some(Composition { parts: current })
    }
}

/// Exact multinomial coefficient n! / (a_0! ... a_q!).
///
/// # Panics
/// Panics if the parts do not sum to `n` (caller contract).
pub fn multinomial(n: u32, parts: &Composition) -> BigUint {
    let sum: u32 = parts.parts.iter().sum();
    assert_eq!(sum, n, "multinomial parts must sum to n");
    let mut remaining = n;
    let mut acc = BigUint::one();
    for &a in &parts.parts {
        acc *= binomial_big(remaining, a);
        remaining -= a;
    }
    acc
}

fn binomial_big(n: u32, k: u32) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn binomial_u64(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Integer pole multiset for one (composition, j) term: {0}, the value
/// q+1-p repeated a_p times for each part p, and the closing value
/// q+1+x-j, with coinciding values merged into multiplicities. The total
/// count is K+1.
fn integer_poles(c: &Composition, q: u32, x: u8, j: u32) -> Vec<(u32, u32)> {
    debug_assert!(j <= q && x <= 1);
    let mut mults: HashMap<u32, u32> = HashMap::new();
    *mults.entry(0).or_insert(0) += 1;
    for (p, &a) in c.parts.iter().enumerate() {
        if a > 0 {
            *mults.entry(q + 1 - p as u32).or_insert(0) += a;
        }
    }
    *mults.entry(q + 1 + x as u32 - j).or_insert(0) += 1;
    let mut out: Vec<(u32, u32)> = mults.into_iter().collect();
    out.sort_unstable();
    out
}

/// Pole multiset of one term as a [`NodeMultiset`] for the Laplace engine.
pub fn pole_vector(c: &Composition, q: u32, x: u8, j: u32) -> NodeMultiset {
    let pairs: Vec<(f64, u32)> = integer_poles(c, q, x, j)
        .into_iter()
        .map(|(v, m)| (v as f64, m))
        .collect();
    NodeMultiset::new(pairs).expect("integer pole multisets are valid by construction")
}

/// Evaluate S_x(K, s, q).
///
/// Inverse-transform values are memoized per call keyed by the integer
/// pole multiset, since many (j, composition) pairs share poles. All pole
/// values are small non-negative integers, so distinct poles are separated
/// by at least 1 and the Laplace engine's ill-conditioning flag cannot
/// fire here.
pub fn sx(query: &SxQuery) -> Result<f64> {
    let SxQuery { k, s, q, x } = *query;
    let mut memo: HashMap<Vec<(u32, u32)>, f64> = HashMap::new();
    let mut total = 0.0f64;

    for j in 0..=q {
        let outer = binomial_u64(q, j) as f64;
        let outer_sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        for comp in compositions(k - 1, q + 1) {
            let mut weight = multinomial(k - 1, &comp);
            let mut sign = outer_sign;
            for (p, &a) in comp.parts().iter().enumerate() {
                if a > 0 {
                    weight *= binomial_big(q, p as u32).pow(a);
                    if p % 2 == 1 && a % 2 == 1 {
                        sign = -sign;
                    }
                }
            }
            let weight = weight.to_f64().ok_or(Error::CoefficientOverflow)?;
            if !weight.is_finite() {
                return Err(Error::CoefficientOverflow);
            }

            let key = integer_poles(&comp, q, x, j);
            let transform = match memo.get(&key) {
                Some(&v) => v,
                None => {
                    let poles = pole_vector(&comp, q, x, j);
                    let inv = invert_at(&poles, s)?;
                    debug_assert!(!inv.ill_conditioned);
                    memo.insert(key, inv.value);
                    inv.value
                }
            };
            total += sign * outer * weight * transform;
        }
    }
    Ok(total)
}

/// Convenience wrapper building the query inline.
pub fn sx_value(k: u32, s: f64, q: u32, x: u8) -> Result<f64> {
    sx(&SxQuery::new(k, s, q, x)?)
}
