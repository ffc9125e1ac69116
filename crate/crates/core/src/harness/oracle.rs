//! Independent verification oracles.
//!
//! [`lagrange_oracle`] reverts univariate series by coefficient extraction
//! over the rationals, sharing no code with the contraction iteration it
//! cross-checks. [`bijectivity_oracle`] decides pointwise bijectivity over a
//! finite ring by exhaustive enumeration.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::maps::PolyMap;
use crate::series::{MultiIndex, TateSeries};

/// Default point budget for exhaustive enumeration; override with the
/// `TATEJAC_ENUM_BUDGET` environment variable.
pub const DEFAULT_ENUM_BUDGET: u64 = 10_000_000;

pub fn default_enumeration_budget() -> u64 {
    std::env::var("TATEJAC_ENUM_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_ENUM_BUDGET)
}

/// Compositional inverse of a univariate series through degree `cap`, by
/// Lagrange coefficient extraction: `[x^k] g = (1/k) [x^{k-1}] (x/f)^k`.
///
/// The arithmetic runs entirely over the rationals on dense coefficient
/// vectors, independent of the series composition machinery. Requires
/// `f(0) = 0` and `f'(0)` invertible in `Q`; over an integer domain a
/// noninteger coefficient in the result is reported as the genuine
/// obstruction it is.
pub fn lagrange_oracle(series: &TateSeries, cap: u32) -> Result<TateSeries> {
    let domain = series.domain();
    if domain.is_truncated() {
        return Err(Error::RequiresAdicDomain(format!(
            "the reversion oracle runs over exact coefficients, not {domain}"
        )));
    }
    if series.variable_count() != 1 {
        return Err(Error::VariableCountMismatch {
            expected: 1,
            found: series.variable_count(),
        });
    }
    if !series.constant_term().is_zero() {
        return Err(Error::NonzeroConstantTerm { component: 0 });
    }
    let cap = cap.min(series.degree_cap());

    // Dense rational coefficients of t = f / x, so t_0 = f'(0).
    let d = cap as usize;
    let mut t = vec![BigRational::zero(); d];
    for (idx, coeff) in series.iter() {
        let e = idx.exponent(0) as usize;
        if e == 0 || e > d {
            continue;
        }
        t[e - 1] = coeff.to_rational();
    }
    if t[0].is_zero() {
        return Err(Error::NotAUnit(
            "f'(0) = 0: the series has no compositional inverse".into(),
        ));
    }

    // r = 1 / t by the standard recurrence, truncated at degree d.
    let lead_inv = t[0].recip();
    let mut r = vec![BigRational::zero(); d];
    r[0] = lead_inv.clone();
    for k in 1..d {
        let mut acc = BigRational::zero();
        for i in 1..=k {
            if !t[i].is_zero() && !r[k - i].is_zero() {
                acc += &t[i] * &r[k - i];
            }
        }
        r[k] = -acc * &lead_inv;
    }

    // power = r^k, advanced one factor per coefficient.
    let mut out_coeffs: Vec<(u32, BigRational)> = Vec::new();
    let mut power = vec![BigRational::zero(); d];
    power[0] = BigRational::one();
    for k in 1..=d {
        power = dense_mul_trunc(&power, &r, d);
        // [x^k] g = (1/k) [x^{k-1}] r^k
        let g_k = &power[k - 1] / BigRational::from_integer(BigInt::from(k));
        if !g_k.is_zero() {
            out_coeffs.push((k as u32, g_k));
        }
    }

    let mut terms = Vec::with_capacity(out_coeffs.len());
    for (e, c) in out_coeffs {
        if e >= cap {
            continue;
        }
        let element = if domain.is_rational() {
            domain.element_from_ratio(c.numer().clone(), c.denom().clone())?
        } else {
            if !c.is_integer() {
                return Err(Error::NonIntegerCoefficient {
                    degree: e,
                    coefficient: format!("{}/{}", c.numer(), c.denom()),
                });
            }
            domain.element_from_bigint(c.to_integer())
        };
        terms.push((MultiIndex::new(vec![e]), element));
    }
    let result = TateSeries::from_terms(domain, 1, cap, terms)?;
    // A nonlinear series has no polynomial inverse over Q, so the truncation
    // is genuinely partial.
    let nonlinear = series.max_total_degree().is_some_and(|deg| deg > 1);
    Ok(if nonlinear {
        result.mark_truncated()
    } else {
        result
    })
}

fn dense_mul_trunc(a: &[BigRational], b: &[BigRational], len: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); len];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if i + j >= len {
                break;
            }
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

/// Exhaustively test whether a map is a bijection of the points of
/// `(Z/m)^n`, under the default enumeration budget.
pub fn bijectivity_oracle(map: &PolyMap, modulus: u64) -> Result<bool> {
    bijectivity_oracle_with_budget(map, modulus, default_enumeration_budget())
}

pub fn bijectivity_oracle_with_budget(map: &PolyMap, modulus: u64, budget: u64) -> Result<bool> {
    let n = map.dimension();
    let total = (modulus as u128)
        .checked_pow(n as u32)
        .filter(|t| *t <= budget as u128)
        .ok_or_else(|| Error::EnumerationBudget {
            required: (modulus as u128).checked_pow(n as u32).unwrap_or(u128::MAX),
            budget,
        })?;
    let total = total as usize;

    // Reduce coefficients once into u64 residues.
    let residue_domain = Domain::truncated(modulus, 1)?;
    let reduced = map.change_domain(&residue_domain)?;
    let components: Vec<Vec<(Vec<u32>, u64)>> = reduced
        .components()
        .iter()
        .map(|c| {
            c.iter()
                .map(|(idx, coeff)| {
                    let v = coeff
                        .to_bigint()
                        .expect("residues are integers")
                        .try_into()
                        .expect("canonical residue fits u64");
                    (idx.exponents().to_vec(), v)
                })
                .collect()
        })
        .collect();

    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % modulus as u128) as u64;
    let powmod = |base: u64, mut e: u32| {
        let mut acc = 1 % modulus;
        let mut b = base % modulus;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };

    let mut seen = vec![false; total];
    let mut point = vec![0u64; n];
    for _ in 0..total {
        let mut image_key = 0usize;
        for terms in &components {
            let mut value = 0u64;
            for (exps, coeff) in terms {
                let mut term = *coeff;
                for (var, &e) in exps.iter().enumerate() {
                    if e > 0 {
                        term = mulmod(term, powmod(point[var], e));
                    }
                }
                value = (value + term) % modulus;
            }
            image_key = image_key * modulus as usize + value as usize;
        }
        if seen[image_key] {
            return Ok(false);
        }
        seen[image_key] = true;
        // odometer increment
        for slot in point.iter_mut() {
            *slot += 1;
            if *slot < modulus {
                break;
            }
            *slot = 0;
        }
    }
    Ok(true)
}
