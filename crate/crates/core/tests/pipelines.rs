//! End-to-end flows over the public surfaces: JSON map files in and out of
//! the inversion and lifting operations, report envelopes, and the
//! Jacobian-determinant identity on inverse pairs.

use tatejac::{
    adic_lift_inverse, decay_profile, formal_inverse, generate_tame, transfer_check,
    unimodular_witness, Domain, MapFile, PolyMap, TameSpec, TateSeries, TransferOptions,
    Valuation, WitnessOptions,
};

fn parse_map(json: &str) -> PolyMap {
    serde_json::from_str::<MapFile>(json).unwrap().to_map().unwrap()
}

#[test]
fn invert_then_lift_through_the_wire_format() {
    // f = x + 5x^2 over Z/5^4 at degree cap 16, as a map file.
    let json = r#"{
        "domain": {"kind": "truncated_adic", "m": 5, "N": 4},
        "components": [
            {"n": 1, "D": 16, "terms": [[[1], "1"], [[2], "5"]]}
        ]
    }"#;
    let map = parse_map(json);

    // Seed g0 = x from its own file and lift.
    let seed = parse_map(
        r#"{
            "domain": {"kind": "truncated_adic", "m": 5, "N": 4},
            "components": [{"n": 1, "D": 16, "terms": [[[1], "1"]]}]
        }"#,
    );
    let outcome = adic_lift_inverse(&map, &seed, 4).unwrap();

    // The lifted inverse round-trips through JSON exactly.
    let json_out = serde_json::to_string(&MapFile::from_map(&outcome.inverse)).unwrap();
    let back = parse_map(&json_out);
    assert_eq!(back, outcome.inverse);

    // And evaluates at 1 to the documented witness value 46 mod 625.
    let domain = Domain::truncated(5, 4).unwrap();
    let eval = back.component(0).eval(&[domain.one()], None).unwrap();
    assert_eq!(eval.value, domain.element_from_int(46));

    // Valuation ledger: initial congruence, then doubling.
    let vals: Vec<_> = outcome.steps.iter().map(|s| s.error_valuation).collect();
    assert!(vals[0] >= Valuation::Finite(1));
    assert!(*vals.last().unwrap() >= Valuation::Finite(4));
}

#[test]
fn transfer_pipeline_over_exact_integers() {
    let json = r#"{
        "domain": {"kind": "exact_integer_adic", "m": 5},
        "components": [
            {"n": 1, "D": 12, "terms": [[[1], "1"], [[2], "5"]]}
        ]
    }"#;
    let map = parse_map(json);
    let outcome = transfer_check(
        &map,
        &TransferOptions {
            precision: Some(6),
            ..Default::default()
        },
    )
    .unwrap();
    assert!(outcome.invertible_mod_ideal && outcome.certified);
    let lifted = outcome.lifted.unwrap();

    // G o F = X mod (5^6, degree 12).
    let x = PolyMap::identity(map.domain(), 1, 12).unwrap();
    let diff = lifted.compose(&map).unwrap().sub(&x).unwrap();
    assert!(diff.min_valuation() >= Valuation::Finite(6));

    // The decay profile of the lift shows the conjugated-Catalan growth.
    let profile = decay_profile(&lifted).unwrap();
    assert_eq!(profile.per_degree[1], Valuation::Finite(0));
    assert!(profile.per_degree[5] >= Valuation::Finite(4));
}

#[test]
fn report_envelopes_carry_the_schema_fields() {
    let report = tatejac::char_p_report(2, 1, 32).unwrap();
    let json = report.to_json().unwrap();
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    for field in ["kind", "domain", "inputs", "outcome", "oracles", "caveats"] {
        assert!(value.get(field).is_some(), "missing field {field}");
    }
    assert_eq!(value["kind"], "char_p");
    assert_eq!(value["domain"]["kind"], "exact_integer_adic");
    assert!(!value["oracles"].as_array().unwrap().is_empty());

    // Determinism: rebuilding the report reproduces the bytes.
    let again = tatejac::char_p_report(2, 1, 32).unwrap().to_json().unwrap();
    assert_eq!(json, again);
}

#[test]
fn witness_reports_are_deterministic() {
    let d = Domain::truncated(5, 4).unwrap();
    let f = PolyMap::new(vec![TateSeries::from_terms(
        &d,
        1,
        16,
        [
            (tatejac::MultiIndex::new(vec![1]), d.one()),
            (tatejac::MultiIndex::new(vec![2]), d.element_from_int(5)),
        ],
    )
    .unwrap()])
    .unwrap();
    let a = unimodular_witness(&f, 16, &WitnessOptions::default())
        .unwrap()
        .to_json()
        .unwrap();
    let b = unimodular_witness(&f, 16, &WitnessOptions::default())
        .unwrap()
        .to_json()
        .unwrap();
    assert_eq!(a, b);
}

// For inverse pairs F, G: det JF * (det JG o F) = 1 at the truncation.
#[test]
fn jacobian_determinants_of_inverse_pairs_multiply_to_one() {
    for seed in 0..12u64 {
        let domain = match seed % 3 {
            0 => Domain::rational(),
            1 => Domain::exact_integer(3).unwrap(),
            _ => Domain::truncated(5, 2).unwrap(),
        };
        let mut spec = TameSpec::new(7000 + seed, 2, 2, 2, domain.clone());
        spec.min_poly_degree = 2;
        spec.linear_factors = false;
        let pair = generate_tame(&spec).unwrap();
        let det_f = pair.forward.jacobian().unwrap().det().unwrap();
        let det_g = pair.inverse.jacobian().unwrap().det().unwrap();
        let transported = det_g.compose(pair.forward.components()).unwrap();
        let product = det_f.mul(&transported).unwrap();
        let one = TateSeries::one(&domain, 2, product.degree_cap()).unwrap();
        assert_eq!(product, one, "seed {seed}");
    }
}

#[test]
fn formal_inverse_of_parsed_rational_map_matches_reference() {
    // The map (x1 + x2^2, x2) has the closed-form inverse (x1 - x2^2, x2)
    // at every cap.
    let json = r#"{
        "domain": {"kind": "rational_discrete"},
        "components": [
            {"n": 2, "D": 9, "terms": [[[1, 0], "1"], [[0, 2], "1"]]},
            {"n": 2, "D": 9, "terms": [[[0, 1], "1"]]}
        ]
    }"#;
    let map = parse_map(json);
    let inverse = formal_inverse(&map, 9).unwrap();
    let expected = parse_map(
        r#"{
            "domain": {"kind": "rational_discrete"},
            "components": [
                {"n": 2, "D": 9, "terms": [[[1, 0], "1"], [[0, 2], "-1"]]},
                {"n": 2, "D": 9, "terms": [[[0, 1], "1"]]}
            ]
        }"#,
    );
    assert_eq!(inverse, expected);
}
