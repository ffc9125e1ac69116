//! Formal inversion of maps, I-adic lifting of inverses, residue transfer
//! checks, and coefficient-decay profiling.
//!
//! `formal_inverse` reverts a map `F = X + H` (zero constant term, identity
//! linear part) by the contraction `G <- X - H o G`, which is exact through
//! one more total degree per step. `adic_lift_inverse` starts from an inverse
//! modulo the ideal and runs the quadratic correction `G <- G - E o G` with
//! `E = G o F - X`; each step at least doubles the ideal valuation of the
//! error, and the step ledger records the observed gain so the contract is
//! checked rather than assumed.
//!
//! Whether a formal inverse lies in the Tate algebra cannot be decided from
//! a finite truncation; [`decay_profile`] reports the per-degree coefficient
//! valuations as finite evidence, and callers phrase conclusions as
//! "consistent with (non-)membership through degree D".

use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Valuation};
use crate::error::{Error, Result};
use crate::harness::oracle::bijectivity_oracle_with_budget;
use crate::maps::PolyMap;

/// One corrective step of the adic lift: the ideal valuation of the
/// composition error `G_k o F - X` before the step was applied.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftStep {
    pub step: usize,
    pub error_valuation: Valuation,
}

/// Result of [`adic_lift_inverse`]: the lifted inverse and the per-step
/// valuation ledger (step 0 records the initial congruence).
#[derive(Debug, Clone)]
pub struct LiftOutcome {
    pub inverse: PolyMap,
    pub steps: Vec<LiftStep>,
}

/// Per-degree minimum coefficient valuation of a map, with monotone
/// envelopes. Entry `d` covers the stored terms of total degree `d` across
/// all components; `Top` when none are stored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayProfile {
    /// Minimum valuation at each degree `0..D`.
    pub per_degree: Vec<Valuation>,
    /// `tail_floor[d]` = minimum valuation over degrees `>= d`. Growth of
    /// this envelope is the membership evidence.
    pub tail_floor: Vec<Valuation>,
    /// `prefix_floor[d]` = minimum valuation over degrees `<= d`.
    pub prefix_floor: Vec<Valuation>,
}

impl DecayProfile {
    pub fn degrees_with_valuation(&self, v: u32) -> Vec<u32> {
        self.per_degree
            .iter()
            .enumerate()
            .filter(|(_, val)| **val == Valuation::Finite(v))
            .map(|(d, _)| d as u32)
            .collect()
    }

    /// Largest degree whose valuation is exactly zero, if any.
    pub fn last_unit_degree(&self) -> Option<u32> {
        self.degrees_with_valuation(0).last().copied()
    }
}

/// Compositional inverse of `F = X + H` through total degree `cap`, by the
/// contraction `G_0 = X`, `G_{k+1} = X - H o G_k`. After `k` steps the
/// result is correct through total degree `k + 1`; the iteration runs to
/// `k = cap - 1` or until the fixed point is reached.
pub fn formal_inverse(map: &PolyMap, cap: u32) -> Result<PolyMap> {
    if !map.has_zero_constant_terms() {
        return Err(Error::NotNormalized("constant term is nonzero".into()));
    }
    if !map.has_identity_linear_part() {
        return Err(Error::NotNormalized("linear part is not the identity".into()));
    }
    let f = map.with_cap(cap)?;
    let x = PolyMap::identity(f.domain(), f.dimension(), cap)?;
    let higher = f.sub(&x)?;
    let mut inverse = x.clone();
    for _ in 0..cap.saturating_sub(1) {
        let next = x.sub(&higher.compose(&inverse)?)?;
        if next == inverse {
            break;
        }
        inverse = next;
    }
    Ok(inverse)
}

/// Lift an inverse modulo `I` to an inverse modulo `I^target` (and the
/// degree cap of `map`), recording the error valuation before each step.
///
/// Preconditions: an adic domain, `F(0) = 0`, `G0(0) = 0`, the Jacobian
/// determinant of `F` a Tate unit, and `G0 o F = X (mod I)`. The per-step
/// contract `val(E_k) >= min(2^k, target)` is enforced at runtime.
pub fn adic_lift_inverse(map: &PolyMap, initial: &PolyMap, target: u32) -> Result<LiftOutcome> {
    let domain = map.domain();
    if !domain.is_adic() {
        return Err(Error::RequiresAdicDomain(domain.to_string()));
    }
    if let Some(available) = domain.precision() {
        if target > available {
            return Err(Error::PrecisionTarget {
                requested: target,
                available,
            });
        }
    }
    if !map.has_zero_constant_terms() {
        return Err(Error::NotNormalized("constant term of F is nonzero".into()));
    }
    if !initial.has_zero_constant_terms() {
        return Err(Error::NotNormalized("constant term of G0 is nonzero".into()));
    }
    domain.check_same(initial.domain())?;
    let det = map.jacobian()?.det()?;
    let det_check = det.unit_check();
    if !det_check.is_unit() {
        return Err(Error::JacobianNotUnit(det_check.describe()));
    }
    let cap = map.degree_cap();
    let initial = initial.with_cap(cap)?;
    let x = PolyMap::identity(domain, map.dimension(), cap)?;

    let mut inverse = initial;
    let mut steps = Vec::new();
    let mut step = 0usize;
    loop {
        let error = inverse.compose(map)?.sub(&x)?;
        let valuation = error.min_valuation();
        steps.push(LiftStep {
            step,
            error_valuation: valuation,
        });
        if step == 0 && valuation < Valuation::Finite(1) {
            return Err(Error::NotInverseModIdeal(format!(
                "composition error has valuation {valuation}"
            )));
        }
        let expected = (1u32 << step.min(31)).min(target);
        if valuation < Valuation::Finite(expected) {
            let observed = valuation.finite().unwrap_or(0);
            return Err(Error::PrecisionContract {
                step,
                expected,
                observed,
            });
        }
        if valuation >= Valuation::Finite(target) {
            return Ok(LiftOutcome { inverse, steps });
        }
        inverse = inverse.sub(&error.compose(&inverse)?)?;
        step += 1;
    }
}

/// Options for [`transfer_check`].
#[derive(Debug, Clone, Default)]
pub struct TransferOptions {
    /// Working degree cap; defaults to the cap of the input map.
    pub degree: Option<u32>,
    /// Target ideal precision for the lift; defaults to the domain precision
    /// for truncated domains and to 8 for exact ones.
    pub precision: Option<u32>,
    /// Degrees of trailing silence required to call a truncated inverse a
    /// stabilized polynomial; defaults to `D / 2`.
    pub stabilization_window: Option<u32>,
    /// Point-enumeration budget for the bijectivity screen; defaults to the
    /// environment (`TATEJAC_ENUM_BUDGET`) or 10^7. Zero disables the screen.
    pub enumeration_budget: Option<u64>,
}

/// Result of [`transfer_check`].
#[derive(Debug, Clone)]
pub struct TransferOutcome {
    /// Best determination of whether the reduction of `F` modulo `I` is
    /// invertible in the polynomial ring over `R/I`.
    pub invertible_mod_ideal: bool,
    /// True when the determination rests on an exact argument (verified
    /// polynomial inverse, point-count failure, or a degree obstruction)
    /// rather than on stabilization heuristics.
    pub certified: bool,
    /// The residue inverse over `R/I`, when one was found.
    pub residue_inverse: Option<PolyMap>,
    /// The lifted inverse over `R`, when lifting succeeded.
    pub lifted: Option<PolyMap>,
    /// Lift ledger, when lifting ran.
    pub lift_steps: Option<Vec<LiftStep>>,
    /// Description of the obstruction when not invertible.
    pub obstruction: Option<String>,
    /// Supplementary observations (heuristics used, screens run).
    pub notes: Vec<String>,
}

/// Reduce a map modulo the ideal, decide invertibility of the reduction in
/// `(R/I)[X]`, and lift a found inverse back to `R` with
/// [`adic_lift_inverse`].
///
/// Failures are reported in the outcome, not as errors.
pub fn transfer_check(map: &PolyMap, options: &TransferOptions) -> Result<TransferOutcome> {
    let domain = map.domain();
    let modulus = domain
        .ideal_generator()
        .ok_or_else(|| Error::RequiresAdicDomain(domain.to_string()))?;
    if !map.has_zero_constant_terms() {
        return Err(Error::NotNormalized("constant term of F is nonzero".into()));
    }
    let cap = options.degree.unwrap_or_else(|| map.degree_cap());
    let map = map.with_cap(cap)?;
    let residue_domain = Domain::truncated(modulus, 1)?;
    let residue = map.change_domain(&residue_domain)?;
    let mut notes = Vec::new();

    // Screen 1: a polynomial inverse forces a unit linear determinant.
    let linear_det = residue.linear_matrix().det()?;
    if !linear_det.is_unit() {
        return Ok(TransferOutcome {
            invertible_mod_ideal: false,
            certified: true,
            residue_inverse: None,
            lifted: None,
            lift_steps: None,
            obstruction: Some(format!(
                "linear part has determinant {linear_det}, not a unit mod {modulus}"
            )),
            notes,
        });
    }

    // Screen 2: a polynomial inverse acts bijectively on (Z/m)^n points.
    let budget = options
        .enumeration_budget
        .unwrap_or_else(crate::harness::oracle::default_enumeration_budget);
    if budget > 0 {
        let required = (modulus as u128).checked_pow(map.dimension() as u32);
        if required.is_some_and(|r| r <= budget as u128) {
            match bijectivity_oracle_with_budget(&residue, modulus, budget) {
                Ok(true) => notes.push(format!(
                    "point screen: reduction is bijective on the {modulus}^{} points of (Z/{modulus})^{}",
                    map.dimension(),
                    map.dimension()
                )),
                Ok(false) => {
                    return Ok(TransferOutcome {
                        invertible_mod_ideal: false,
                        certified: true,
                        residue_inverse: None,
                        lifted: None,
                        lift_steps: None,
                        obstruction: Some(format!(
                            "reduction is not bijective on (Z/{modulus})^{} points",
                            map.dimension()
                        )),
                        notes,
                    });
                }
                Err(err) => notes.push(format!("point screen skipped: {err}")),
            }
        } else {
            notes.push("point screen skipped: over the enumeration budget".into());
        }
    }

    // Invert the normalized reduction formally and look for stabilization.
    let normalized = residue.normalize()?;
    let truncated_inverse = formal_inverse(&normalized.map, cap)?;
    let top = truncated_inverse.max_total_degree().unwrap_or(0);
    let window = options.stabilization_window.unwrap_or(cap / 2).max(1);
    let stabilized = top + window < cap;

    // Degree obstruction: over a field, univariate composition multiplies
    // degrees, so a reduction of degree >= 2 has no polynomial inverse.
    let residue_degree = residue.max_total_degree().unwrap_or(0);
    if map.dimension() == 1
        && crate::domain::is_prime(modulus)
        && residue_degree >= 2
        && residue.is_exact()
    {
        return Ok(TransferOutcome {
            invertible_mod_ideal: false,
            certified: true,
            residue_inverse: None,
            lifted: None,
            lift_steps: None,
            obstruction: Some(format!(
                "degree obstruction: deg(F mod {modulus}) = {residue_degree} >= 2 and composition \
                 multiplies degrees over the field Z/{modulus}, so no polynomial inverse exists"
            )),
            notes,
        });
    }

    if !stabilized {
        return Ok(TransferOutcome {
            invertible_mod_ideal: false,
            certified: false,
            residue_inverse: None,
            lifted: None,
            lift_steps: None,
            obstruction: Some(format!(
                "no polynomial stabilization: truncated inverse still has terms at degree {top} \
                 with window {window} under cap {cap} (heuristic)"
            )),
            notes,
        });
    }

    // Candidate polynomial inverse of the normalized reduction; verify the
    // composition exactly at a cap past the product of the degrees.
    let candidate = match certify_polynomial_inverse(&normalized.map, &truncated_inverse)? {
        Some(candidate) => candidate,
        None => {
            return Ok(TransferOutcome {
                invertible_mod_ideal: false,
                certified: false,
                residue_inverse: None,
                lifted: None,
                lift_steps: None,
                obstruction: Some(format!(
                    "apparent stabilization at degree {top}, but the exact two-sided composition \
                     check failed (heuristic)"
                )),
                notes,
            });
        }
    };
    notes.push("residue inverse verified by exact two-sided composition past the degree product".into());

    // Undo the normalization: G = G' o (L^{-1} X).
    let linear_inv = normalized.linear.invert()?.as_linear_map(cap)?;
    let residue_inverse = candidate.with_cap(cap)?.compose(&linear_inv)?;

    // Lift back to R.
    let target = options.precision.or_else(|| domain.precision()).unwrap_or(8);
    let initial = residue_inverse.lift_canonical(domain)?;
    match adic_lift_inverse(&map, &initial, target) {
        Ok(outcome) => {
            notes.push(format!(
                "lifted to precision {target} in {} corrective steps",
                outcome.steps.len().saturating_sub(1)
            ));
            Ok(TransferOutcome {
                invertible_mod_ideal: true,
                certified: true,
                residue_inverse: Some(residue_inverse),
                lifted: Some(outcome.inverse),
                lift_steps: Some(outcome.steps),
                obstruction: None,
                notes,
            })
        }
        Err(err) => {
            notes.push(format!("lift did not run to completion: {err}"));
            Ok(TransferOutcome {
                invertible_mod_ideal: true,
                certified: true,
                residue_inverse: Some(residue_inverse),
                lifted: None,
                lift_steps: None,
                obstruction: None,
                notes,
            })
        }
    }
}

/// Reinterpret a stabilized truncation as an exact polynomial.
fn exact_polynomial_copy(map: &PolyMap) -> Result<PolyMap> {
    use crate::series::TateSeries;
    PolyMap::new(
        map.components()
            .iter()
            .map(|c| {
                TateSeries::from_terms(
                    c.domain(),
                    c.variable_count(),
                    c.degree_cap(),
                    c.iter().map(|(i, v)| (i.clone(), v)),
                )
            })
            .collect::<Result<_>>()?,
    )
}

/// Try to prove that a truncated inverse is in fact a polynomial inverse.
///
/// The stored terms of `candidate` are taken as an exact polynomial and the
/// two-sided composition with `map` is recomputed at a cap past the product
/// of the degrees, where the polynomial identity cannot hide cancellation.
/// On success the candidate is returned with its truncation marker cleared;
/// `None` means no certificate (which does not refute the candidate).
pub fn certify_polynomial_inverse(map: &PolyMap, candidate: &PolyMap) -> Result<Option<PolyMap>> {
    if !map.is_exact() {
        return Ok(None);
    }
    let map_degree = map.max_total_degree().unwrap_or(1).max(1);
    let candidate_degree = candidate.max_total_degree().unwrap_or(1).max(1);
    let verify_cap = map_degree
        .saturating_mul(candidate_degree)
        .saturating_add(2);
    if verify_cap > 512 {
        // Desk-scale guard: the certificate composition would be enormous.
        return Ok(None);
    }
    let exact_candidate = exact_polynomial_copy(candidate)?;
    let wide = verify_cap
        .max(map.degree_cap())
        .max(candidate.degree_cap());
    let wide_map = map.with_cap(wide)?;
    let wide_candidate = exact_candidate.with_cap(wide)?;
    if wide_candidate.compose(&wide_map)?.is_identity()
        && wide_map.compose(&wide_candidate)?.is_identity()
    {
        Ok(Some(exact_candidate))
    } else {
        Ok(None)
    }
}

/// Per-degree minimum coefficient valuation of a map over an adic domain.
pub fn decay_profile(map: &PolyMap) -> Result<DecayProfile> {
    let domain = map.domain();
    if !domain.is_adic() {
        return Err(Error::RequiresAdicDomain(domain.to_string()));
    }
    let cap = map.degree_cap() as usize;
    let mut per_degree = vec![Valuation::Top; cap];
    for component in map.components() {
        for (idx, coeff) in component.iter() {
            let d = idx.total_degree() as usize;
            let v = coeff.valuation();
            if v < per_degree[d] {
                per_degree[d] = v;
            }
        }
    }
    let mut tail_floor = per_degree.clone();
    for d in (0..cap.saturating_sub(1)).rev() {
        tail_floor[d] = tail_floor[d].min(tail_floor[d + 1]);
    }
    let mut prefix_floor = per_degree.clone();
    for d in 1..cap {
        prefix_floor[d] = prefix_floor[d].min(prefix_floor[d - 1]);
    }
    Ok(DecayProfile {
        per_degree,
        tail_floor,
        prefix_floor,
    })
}

/// Reduction of a map to the residue polynomial ring `(R/I)[X]`, represented
/// as a map over `Z/m` (precision one).
pub fn residue_reduction(map: &PolyMap) -> Result<PolyMap> {
    let modulus = map
        .domain()
        .ideal_generator()
        .ok_or_else(|| Error::RequiresAdicDomain(map.domain().to_string()))?;
    map.change_domain(&Domain::truncated(modulus, 1)?)
}
