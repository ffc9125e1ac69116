//! Deterministic fixtures shared by the benchmarks.

use tatejac::{Domain, MultiIndex, PolyMap, TateSeries};

/// A dense-ish bivariate series over `Z/5^8` with every monomial of total
/// degree below `max_deg` present.
pub fn dense_bivariate(cap: u32, max_deg: u32) -> TateSeries {
    let domain = Domain::truncated(5, 8).unwrap();
    let mut terms = Vec::new();
    for a in 0..=max_deg {
        for b in 0..=(max_deg - a) {
            let coeff = domain.element_from_int((a as i64 + 1) * 7 + b as i64 * 3 + 1);
            terms.push((MultiIndex::new(vec![a, b]), coeff));
        }
    }
    TateSeries::from_terms(&domain, 2, cap, terms).unwrap()
}

/// A bivariate map `X + (higher terms)` suitable for reversion benchmarks.
pub fn reversion_map(cap: u32) -> PolyMap {
    let domain = Domain::truncated(5, 8).unwrap();
    let mk = |var: usize, other: usize| {
        TateSeries::variable(&domain, 2, var, cap)
            .unwrap()
            .add(
                &TateSeries::from_terms(
                    &domain,
                    2,
                    cap,
                    [
                        (
                            MultiIndex::new(if other == 0 { vec![2, 0] } else { vec![0, 2] }),
                            domain.element_from_int(3),
                        ),
                        (MultiIndex::new(vec![1, 1]), domain.element_from_int(-2)),
                    ],
                )
                .unwrap(),
            )
            .unwrap()
    };
    PolyMap::new(vec![mk(0, 1), mk(1, 0)]).unwrap()
}

/// The univariate lift instance `x + 5x^2` over `Z/5^8` with seed `x`.
pub fn lift_instance(cap: u32) -> (PolyMap, PolyMap) {
    let domain = Domain::truncated(5, 8).unwrap();
    let f = PolyMap::new(vec![TateSeries::from_terms(
        &domain,
        1,
        cap,
        [
            (MultiIndex::new(vec![1]), domain.one()),
            (MultiIndex::new(vec![2]), domain.element_from_int(5)),
        ],
    )
    .unwrap()])
    .unwrap();
    let seed = PolyMap::new(vec![TateSeries::variable(&domain, 1, 0, cap).unwrap()]).unwrap();
    (f, seed)
}

/// Zero-constant substitutions for composition benchmarks.
pub fn substitutions(cap: u32) -> Vec<TateSeries> {
    let domain = Domain::truncated(5, 8).unwrap();
    vec![
        TateSeries::from_terms(
            &domain,
            2,
            cap,
            [
                (MultiIndex::new(vec![1, 0]), domain.one()),
                (MultiIndex::new(vec![0, 2]), domain.element_from_int(2)),
                (MultiIndex::new(vec![2, 1]), domain.element_from_int(-1)),
            ],
        )
        .unwrap(),
        TateSeries::from_terms(
            &domain,
            2,
            cap,
            [
                (MultiIndex::new(vec![0, 1]), domain.one()),
                (MultiIndex::new(vec![1, 1]), domain.element_from_int(4)),
            ],
        )
        .unwrap(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build_and_strategies_agree() {
        let f = dense_bivariate(10, 6);
        let subs = substitutions(10);
        assert_eq!(f.compose(&subs).unwrap(), f.compose_horner(&subs).unwrap());
        let (map, seed) = lift_instance(12);
        assert!(tatejac::adic_lift_inverse(&map, &seed, 8).is_ok());
        assert!(tatejac::formal_inverse(&reversion_map(10), 10).is_ok());
    }
}
