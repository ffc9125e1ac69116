//! Experiment drivers: the unimodular-witness procedure over `Z/p^N` and
//! the positive-characteristic counterexample diagnostics.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::domain::{is_prime, AdicElement, Domain, DomainSpec, Valuation};
use crate::error::{Error, Result};
use crate::harness::ExperimentReport;
use crate::inversion::{certify_polynomial_inverse, decay_profile, formal_inverse, DecayProfile};
use crate::maps::PolyMap;
use crate::series::{MultiIndex, TateSeries};

/// Options for [`unimodular_witness`].
#[derive(Debug, Clone, Default)]
pub struct WitnessOptions {
    /// Target point; defaults to `(1, ..., 1)`, the canonical candidate.
    pub point: Option<Vec<AdicElement>>,
    /// Tail-estimate window for the evaluations.
    pub window: Option<u32>,
}

/// Outcome of the unimodular-witness procedure.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessOutcome {
    /// The witness candidate `b = G(target)`, componentwise.
    pub witness: Vec<String>,
    /// `F(b)`, computed by exact polynomial evaluation.
    pub image: Vec<String>,
    /// The target vector the witness aims at.
    pub target: Vec<String>,
    /// Ideal precision to which `F(b)` was compared with the target:
    /// the domain precision downgraded by the evaluation tail estimates.
    pub achieved_precision: Valuation,
    /// Whether `F(b)` matches the target at the achieved precision.
    pub congruent: bool,
    /// Whether some entry of `F(b)` is a unit (unimodularity over `Z/p^N`).
    pub unimodular: bool,
    /// Tail-precision estimate per component of the inverse evaluation.
    pub tail_estimates: Vec<Valuation>,
    /// Whether the truncated inverse was a fully stored polynomial.
    pub exact_inverse: bool,
}

/// Run the witness procedure for a polynomial map over `Z/p^N` whose
/// Jacobian determinant is a constant unit.
///
/// The map is translated to fix the origin, normalized, inverted through
/// degree `cap`, and the inverse is evaluated at the (transported) target
/// point to produce the candidate `b`; `F(b)` is then computed by exact
/// polynomial arithmetic and compared with the target at the precision the
/// evaluation tail supports.
pub fn unimodular_witness(
    map: &PolyMap,
    cap: u32,
    options: &WitnessOptions,
) -> Result<ExperimentReport<WitnessOutcome>> {
    let domain = map.domain().clone();
    let (p, precision) = match domain.spec() {
        DomainSpec::TruncatedAdic { m, precision } => (*m, *precision),
        other => {
            return Err(Error::RequiresAdicDomain(format!(
                "witness runs over Z/p^N, got {other}"
            )))
        }
    };
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if !map.is_exact() {
        return Err(Error::TruncatedInput("the witness procedure".into()));
    }

    // The Jacobian determinant must be a unit constant of Z/p^N up to
    // I-divisible terms, i.e. a Tate unit. Compute it at a cap wide enough
    // that no term of the exact determinant hides past the truncation.
    let degree = map.max_total_degree().unwrap_or(0).max(1);
    let wide_cap = (map.dimension() as u32)
        .saturating_mul(degree.saturating_sub(1))
        .saturating_add(2);
    let det = map.with_cap(wide_cap.max(map.degree_cap()))?.jacobian()?.det()?;
    let det_check = det.unit_check();
    if !det_check.is_unit() {
        return Err(Error::JacobianNotConstantUnit(det_check.describe()));
    }

    let target = match &options.point {
        Some(point) => {
            if point.len() != map.dimension() {
                return Err(Error::VariableCountMismatch {
                    expected: map.dimension(),
                    found: point.len(),
                });
            }
            point.clone()
        }
        None => vec![domain.one(); map.dimension()],
    };

    // Normalize (translation and linear part), invert, and transport the
    // target through the affine data: b = G'(L^{-1}(target - F(0))).
    let normalized = map.normalize()?;
    let mut inverse = formal_inverse(&normalized.map, cap)?;
    let mut certified_polynomial = false;
    if !inverse.is_exact() {
        // The truncation marker is conservative; when the inverse is in fact
        // a polynomial, prove it and drop the tail uncertainty.
        if let Some(exact) = certify_polynomial_inverse(&normalized.map, &inverse)? {
            inverse = exact;
            certified_polynomial = true;
        }
    }
    let linear_inverse = normalized.linear.invert()?;
    let centered: Vec<AdicElement> = target
        .iter()
        .zip(&normalized.shift)
        .map(|(t, s)| t.sub(s))
        .collect::<Result<_>>()?;
    let transported = linear_inverse.apply(&centered)?;

    let evals = inverse.eval(&transported, options.window)?;
    let witness: Vec<AdicElement> = evals.iter().map(|e| e.value.clone()).collect();
    let tail_estimates: Vec<Valuation> = evals.iter().map(|e| e.tail_valuation).collect();
    let exact_inverse = evals.iter().all(|e| e.exact);

    // F(b) by exact evaluation of the original polynomial map.
    let image: Vec<AdicElement> = map
        .eval(&witness, None)?
        .into_iter()
        .map(|e| e.value)
        .collect();

    let achieved_precision = tail_estimates
        .iter()
        .copied()
        .min()
        .unwrap_or(Valuation::Top)
        .min(Valuation::Finite(precision));
    let threshold = match achieved_precision {
        Valuation::Finite(k) => k,
        Valuation::Top => precision,
    };
    let congruent = image
        .iter()
        .zip(&target)
        .map(|(im, t)| im.sub(t))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .all(|diff| diff.valuation() >= Valuation::Finite(threshold));
    let unimodular = image.iter().any(|entry| entry.is_unit());

    let mut oracles = vec![
        format!(
            "image F(b) computed by exact polynomial evaluation mod {p}^{precision}, \
             independent of the inverse"
        ),
        format!("inverse computed by contraction iteration through degree {cap}"),
        format!(
            "congruence F(b) = target checked coefficientwise mod {p}^{threshold}"
        ),
    ];
    let mut caveats = Vec::new();
    if certified_polynomial {
        oracles.push(
            "inverse certified polynomial by exact two-sided composition past the degree product"
                .into(),
        );
    }
    if exact_inverse {
        oracles.push("inverse is a fully stored polynomial: no tail uncertainty".into());
    } else {
        caveats.push(format!(
            "tail precision is heuristic: inverse coefficients beyond degree {cap} are unknown; \
             the estimate reads the valuations in the top band"
        ));
    }

    let outcome = WitnessOutcome {
        witness: witness.iter().map(AdicElement::to_coeff_string).collect(),
        image: image.iter().map(AdicElement::to_coeff_string).collect(),
        target: target.iter().map(AdicElement::to_coeff_string).collect(),
        achieved_precision,
        congruent,
        unimodular,
        tail_estimates,
        exact_inverse,
    };
    Ok(ExperimentReport {
        kind: "witness",
        domain: domain.spec().clone(),
        inputs: json!({
            "map": map.to_string(),
            "degree_cap": cap,
            "p": p,
            "N": precision,
            "target": outcome.target,
        }),
        outcome,
        oracles,
        caveats,
    })
}

/// Outcome of the positive-characteristic diagnostics for
/// `F = (x_i - x_i^c)` over `(Z, (c))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharPOutcome {
    /// The unit-criterion verdict for `det JF` with the coefficient evidence.
    pub det_jacobian_is_tate_unit: bool,
    pub det_jacobian: String,
    /// Degrees `< D` where some inverse coefficient has ideal valuation 0.
    pub zero_valuation_degrees: Vec<u32>,
    /// Last such degree, when any.
    pub last_unit_degree: Option<u32>,
    /// Whether unit coefficients persist into the top half of the window.
    pub no_decay_observed: bool,
    pub profile: DecayProfile,
    pub conclusion: String,
}

/// Build the coordinatewise counterexample map `F = (x_i - x_i^c)` over the
/// exact integers with ideal `(c)`, verify its Jacobian determinant is a
/// Tate unit, invert it formally through degree `cap`, and profile the
/// coefficient decay of the inverse.
pub fn char_p_report(c: u64, n: usize, cap: u32) -> Result<ExperimentReport<CharPOutcome>> {
    if c < 2 {
        return Err(Error::InvalidDomain(format!("exponent c={c} must be >= 2")));
    }
    if n == 0 {
        return Err(Error::VariableCountMismatch {
            expected: 1,
            found: 0,
        });
    }
    if cap <= c as u32 {
        return Err(Error::InvalidDegreeCap {
            cap,
            reason: format!("the map x - x^{c} needs degree cap > {c}"),
        });
    }
    let domain = Domain::exact_integer(c)?;
    let components: Vec<TateSeries> = (0..n)
        .map(|i| {
            let mut exps = vec![0u32; n];
            exps[i] = c as u32;
            TateSeries::from_terms(
                &domain,
                n,
                cap,
                [
                    (MultiIndex::variable(n, i), domain.one()),
                    (MultiIndex::new(exps), domain.element_from_int(-1)),
                ],
            )
        })
        .collect::<Result<_>>()?;
    let map = PolyMap::new(components)?;

    // det JF = prod_i (1 - c x_i^{c-1}); its nonconstant coefficients are
    // all divisible by c, so the unit criterion holds over (Z, (c)).
    let det = map.jacobian()?.det()?;
    let det_check = det.unit_check();
    let det_is_unit = det_check.is_unit();

    let inverse = formal_inverse(&map, cap)?;
    let profile = decay_profile(&inverse)?;
    let zero_valuation_degrees = profile.degrees_with_valuation(0);
    let last_unit_degree = profile.last_unit_degree();
    let no_decay_observed = last_unit_degree.is_some_and(|d| 2 * d >= cap);
    let conclusion = match last_unit_degree {
        Some(d) if no_decay_observed => format!(
            "coefficients of ideal valuation 0 persist through degree {d} of {cap}: no I-adic \
             decay observed; consistent with the inverse lying outside the Tate algebra \
             (evidence through degree {cap} only)"
        ),
        Some(d) => format!(
            "unit coefficients last seen at degree {d}; data through degree {cap} is \
             inconclusive about decay"
        ),
        None => format!(
            "every inverse coefficient through degree {cap} lies in the ideal; consistent with \
             membership through this truncation"
        ),
    };

    let oracles = vec![
        format!(
            "det JF = {det}: unit criterion checked coefficientwise ({})",
            if det_is_unit {
                "constant term a unit of Z, nonconstant coefficients divisible by c"
            } else {
                "criterion failed"
            }
        ),
        format!("inverse computed by contraction iteration through degree {cap}"),
        "decay profile reads exact integer valuations of the stored coefficients".into(),
    ];
    let caveats = vec![format!(
        "membership of the inverse in the Tate algebra is undecidable from a degree-{cap} \
         truncation; the profile is finite evidence only"
    )];

    let outcome = CharPOutcome {
        det_jacobian_is_tate_unit: det_is_unit,
        det_jacobian: det.to_string(),
        zero_valuation_degrees,
        last_unit_degree,
        no_decay_observed,
        profile,
        conclusion,
    };
    Ok(ExperimentReport {
        kind: "char_p",
        domain: domain.spec().clone(),
        inputs: json!({ "c": c, "n": n, "degree_cap": cap }),
        outcome,
        oracles,
        caveats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generate::{generate_tame, TameSpec};
    use num_bigint::BigInt;

    fn univ_map(domain: &Domain, cap: u32, coeffs: &[(u32, i64)]) -> PolyMap {
        PolyMap::new(vec![TateSeries::from_terms(
            domain,
            1,
            cap,
            coeffs
                .iter()
                .map(|&(e, c)| (MultiIndex::new(vec![e]), domain.element_from_int(c))),
        )
        .unwrap()])
        .unwrap()
    }

    #[test]
    fn witness_for_x_plus_5x2() {
        let d = Domain::truncated(5, 4).unwrap();
        let f = univ_map(&d, 16, &[(1, 1), (2, 5)]);
        let report = unimodular_witness(&f, 16, &WitnessOptions::default()).unwrap();
        assert_eq!(report.outcome.witness, vec!["46".to_string()]);
        assert!(report.outcome.congruent);
        assert!(report.outcome.unimodular);
        assert_eq!(report.outcome.image, vec!["1".to_string()]);
        // Independent integer recheck: 46 + 5*46^2 = 1 mod 5^4.
        let b = BigInt::from(46);
        let image = &b + BigInt::from(5) * &b * &b;
        assert_eq!(image % BigInt::from(625), BigInt::from(1));
    }

    #[test]
    fn witness_of_identity_is_the_target() {
        let d = Domain::truncated(7, 3).unwrap();
        let id = PolyMap::identity(&d, 2, 4).unwrap();
        let report = unimodular_witness(&id, 4, &WitnessOptions::default()).unwrap();
        assert_eq!(report.outcome.witness, vec!["1".to_string(), "1".to_string()]);
        assert_eq!(report.outcome.image, report.outcome.target);
        assert!(report.outcome.exact_inverse);
        assert_eq!(report.outcome.achieved_precision, Valuation::Finite(3));
    }

    #[test]
    fn witness_of_elementary_map_is_exact() {
        let d = Domain::truncated(3, 3).unwrap();
        let f = PolyMap::new(vec![
            TateSeries::from_terms(
                &d,
                2,
                6,
                [
                    (MultiIndex::new(vec![1, 0]), d.one()),
                    (MultiIndex::new(vec![0, 2]), d.one()),
                ],
            )
            .unwrap(),
            TateSeries::variable(&d, 2, 1, 6).unwrap(),
        ])
        .unwrap();
        let report = unimodular_witness(&f, 6, &WitnessOptions::default()).unwrap();
        // b = (1 - 1, 1) = (0, 1), F(b) = (1, 1).
        assert_eq!(report.outcome.witness, vec!["0".to_string(), "1".to_string()]);
        assert_eq!(report.outcome.image, vec!["1".to_string(), "1".to_string()]);
        assert!(report.outcome.congruent && report.outcome.unimodular);
    }

    #[test]
    fn witness_rejects_composite_modulus_and_nonconstant_jacobian() {
        let d = Domain::truncated(6, 2).unwrap();
        let id = PolyMap::identity(&d, 1, 4).unwrap();
        assert!(matches!(
            unimodular_witness(&id, 4, &WitnessOptions::default()),
            Err(Error::NotPrime(6))
        ));

        let d5 = Domain::truncated(5, 2).unwrap();
        // det J(x + x^2) = 1 + 2x is not constant.
        let f = univ_map(&d5, 6, &[(1, 1), (2, 1)]);
        assert!(matches!(
            unimodular_witness(&f, 6, &WitnessOptions::default()),
            Err(Error::JacobianNotConstantUnit(_))
        ));
    }

    #[test]
    fn witness_accepts_custom_points() {
        let d = Domain::truncated(5, 3).unwrap();
        let f = univ_map(&d, 12, &[(1, 1), (2, 5)]);
        let point = vec![d.element_from_int(2)];
        let report = unimodular_witness(
            &f,
            12,
            &WitnessOptions {
                point: Some(point),
                window: None,
            },
        )
        .unwrap();
        assert!(report.outcome.congruent);
        assert_eq!(report.outcome.image, vec!["2".to_string()]);
    }

    #[test]
    fn witness_on_generated_tame_maps_is_exact() {
        for (i, p) in [2u64, 13, 97].into_iter().enumerate() {
            let spec = TameSpec::new(100 + i as u64, 2, 2, 2, Domain::truncated(p, 3).unwrap());
            let pair = generate_tame(&spec).unwrap();
            let cap = pair.forward.degree_cap();
            let report =
                unimodular_witness(&pair.forward, cap, &WitnessOptions::default()).unwrap();
            assert!(report.outcome.exact_inverse, "p={p}");
            assert!(report.outcome.congruent, "p={p}");
            assert_eq!(report.outcome.achieved_precision, Valuation::Finite(3));
        }
    }

    #[test]
    fn char_p_catalan_parity_shows_no_decay() {
        let report = char_p_report(2, 1, 64).unwrap();
        assert!(report.outcome.det_jacobian_is_tate_unit);
        assert_eq!(
            report.outcome.zero_valuation_degrees,
            vec![1, 2, 4, 8, 16, 32]
        );
        assert!(report.outcome.no_decay_observed);
        assert!(report.outcome.conclusion.contains("no I-adic decay"));
    }

    #[test]
    fn char_p_bivariate_cubic() {
        let report = char_p_report(3, 2, 10).unwrap();
        assert!(report.outcome.det_jacobian_is_tate_unit);
        // det JF = (1 - 3x1^2)(1 - 3x2^2)
        assert_eq!(
            report.outcome.det_jacobian,
            "1 - 3*x1^2 - 3*x2^2 + 9*x1^2*x2^2"
        );
        assert!(report
            .outcome
            .zero_valuation_degrees
            .iter()
            .any(|&d| d >= 3));
    }

    #[test]
    fn char_p_report_is_byte_deterministic() {
        let a = char_p_report(2, 1, 32).unwrap().to_json().unwrap();
        let b = char_p_report(2, 1, 32).unwrap().to_json().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn coordinatewise_inverse_matches_univariate_reversion() {
        // F = (x_i - x_i^3) acts coordinatewise, so each inverse component
        // is the univariate reversion in its own variable.
        use crate::harness::oracle::lagrange_oracle;
        let c = 3u64;
        let cap = 10u32;
        let domain = Domain::exact_integer(c).unwrap();
        let univariate = TateSeries::from_terms(
            &domain,
            1,
            cap,
            [
                (MultiIndex::new(vec![1]), domain.one()),
                (MultiIndex::new(vec![3]), domain.element_from_int(-1)),
            ],
        )
        .unwrap();
        let oracle = lagrange_oracle(&univariate, cap).unwrap();

        let n = 2;
        let components: Vec<TateSeries> = (0..n)
            .map(|i| {
                let mut exps = vec![0u32; n];
                exps[i] = c as u32;
                TateSeries::from_terms(
                    &domain,
                    n,
                    cap,
                    [
                        (MultiIndex::variable(n, i), domain.one()),
                        (MultiIndex::new(exps), domain.element_from_int(-1)),
                    ],
                )
                .unwrap()
            })
            .collect();
        let map = PolyMap::new(components).unwrap();
        let inverse = formal_inverse(&map, cap).unwrap();
        for i in 0..n {
            for (idx, coeff) in inverse.component(i).iter() {
                // Only the i-th variable appears in component i.
                let e = idx.exponent(i);
                assert_eq!(idx.total_degree(), e);
                assert_eq!(
                    coeff.to_bigint(),
                    oracle
                        .coefficient(&MultiIndex::new(vec![e]))
                        .to_bigint()
                );
            }
        }
    }
}
