//! Seeded generation of tame automorphisms with closed-form inverses.
//!
//! A generated map is a composition of elementary factors
//! `x_i <- x_i + q(other variables)` and invertible linear factors (shears,
//! unit scalings, swaps). Each factor has an exact inverse, so the pair
//! `(F, G)` satisfies `F o G = G o F = X` by construction, and the Jacobian
//! determinant of `F` is a unit constant.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{AdicElement, Domain, DomainSpec};
use crate::error::{Error, Result};
use crate::maps::PolyMap;
use crate::series::{MultiIndex, TateSeries};

/// Parameters for [`generate_tame`].
#[derive(Debug, Clone)]
pub struct TameSpec {
    pub seed: u64,
    pub n: usize,
    /// Maximum total degree of an elementary polynomial `q`.
    pub degree_bound: u32,
    /// Number of factors to compose.
    pub length: u32,
    pub domain: Domain,
    /// Minimum total degree of `q`; 2 keeps linear parts equal to the
    /// identity across the whole composition.
    pub min_poly_degree: u32,
    /// Allow linear factors (shears, unit scalings, swaps).
    pub linear_factors: bool,
    /// Degree cap for the output; defaults to one past the degree of the
    /// composed map, clamped to 128.
    pub cap: Option<u32>,
}

impl TameSpec {
    pub fn new(seed: u64, n: usize, degree_bound: u32, length: u32, domain: Domain) -> Self {
        TameSpec {
            seed,
            n,
            degree_bound,
            length,
            domain,
            min_poly_degree: 1,
            linear_factors: true,
            cap: None,
        }
    }
}

/// A generated pair: the map, its exact inverse, and a description of the
/// factors used.
#[derive(Debug, Clone)]
pub struct TamePair {
    pub forward: PolyMap,
    pub inverse: PolyMap,
    pub factors: Vec<String>,
}

enum Factor {
    /// `x_i <- x_i + q(other variables)`, with the polynomial stored as
    /// exponent/coefficient pairs not involving variable `i`.
    Elementary {
        target: usize,
        terms: Vec<(Vec<u32>, AdicElement)>,
    },
    /// `x_i <- x_i + c * x_j`, `i != j`.
    Shear {
        target: usize,
        source: usize,
        coefficient: AdicElement,
    },
    /// `x_i <- u * x_i` with `u` a unit.
    Scale { target: usize, unit: AdicElement },
    Swap { a: usize, b: usize },
}

impl Factor {
    fn describe(&self) -> String {
        match self {
            Factor::Elementary { target, terms } => {
                format!("elementary x{} += q ({} terms)", target + 1, terms.len())
            }
            Factor::Shear {
                target,
                source,
                coefficient,
            } => format!("shear x{} += {coefficient} * x{}", target + 1, source + 1),
            Factor::Scale { target, unit } => format!("scale x{} *= {unit}", target + 1),
            Factor::Swap { a, b } => format!("swap x{} <-> x{}", a + 1, b + 1),
        }
    }

    fn degree(&self) -> u32 {
        match self {
            Factor::Elementary { terms, .. } => terms
                .iter()
                .map(|(e, _)| e.iter().sum::<u32>())
                .max()
                .unwrap_or(1)
                .max(1),
            _ => 1,
        }
    }

    fn as_map(&self, domain: &Domain, n: usize, cap: u32, inverted: bool) -> Result<PolyMap> {
        let mut components: Vec<TateSeries> = (0..n)
            .map(|i| TateSeries::variable(domain, n, i, cap))
            .collect::<Result<_>>()?;
        match self {
            Factor::Elementary { target, terms } => {
                let mut q = TateSeries::zero(domain, n, cap)?;
                for (exps, coeff) in terms {
                    let term = TateSeries::from_terms(
                        domain,
                        n,
                        cap,
                        [(MultiIndex::new(exps.clone()), coeff.clone())],
                    )?;
                    q = q.add(&term)?;
                }
                if inverted {
                    q = q.neg();
                }
                components[*target] = components[*target].add(&q)?;
            }
            Factor::Shear {
                target,
                source,
                coefficient,
            } => {
                let coefficient = if inverted {
                    coefficient.neg()
                } else {
                    coefficient.clone()
                };
                let shear = TateSeries::variable(domain, n, *source, cap)?
                    .scalar_mul(&coefficient)?;
                components[*target] = components[*target].add(&shear)?;
            }
            Factor::Scale { target, unit } => {
                let unit = if inverted {
                    unit.invert_unit()?
                } else {
                    unit.clone()
                };
                components[*target] = components[*target].scalar_mul(&unit)?;
            }
            Factor::Swap { a, b } => {
                components.swap(*a, *b);
            }
        }
        PolyMap::new(components)
    }
}

/// Generate a tame map with its closed-form inverse.
pub fn generate_tame(spec: &TameSpec) -> Result<TamePair> {
    if spec.n == 0 {
        return Err(Error::VariableCountMismatch {
            expected: 1,
            found: 0,
        });
    }
    if spec.min_poly_degree > spec.degree_bound {
        return Err(Error::InvalidDegreeCap {
            cap: spec.degree_bound,
            reason: "degree bound below the minimum polynomial degree".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let domain = &spec.domain;
    let n = spec.n;

    let mut factors = Vec::new();
    for _ in 0..spec.length {
        factors.push(random_factor(&mut rng, spec)?);
    }

    // One past the degree of the full composition, clamped to desk scale.
    let composed_degree: u64 = factors.iter().map(|f| f.degree() as u64).product();
    let cap = spec
        .cap
        .unwrap_or_else(|| (composed_degree.saturating_add(1)).min(128) as u32)
        .max(2);

    let identity = PolyMap::identity(domain, n, cap)?;
    let mut forward = identity.clone();
    let mut inverse = identity;
    // F = phi_L o ... o phi_1, G = phi_1^{-1} o ... o phi_L^{-1}.
    for factor in &factors {
        forward = factor.as_map(domain, n, cap, false)?.compose(&forward)?;
        inverse = inverse.compose(&factor.as_map(domain, n, cap, true)?)?;
    }

    Ok(TamePair {
        forward,
        inverse,
        factors: factors.iter().map(Factor::describe).collect(),
    })
}

fn random_unit(rng: &mut ChaCha8Rng, domain: &Domain) -> AdicElement {
    match domain.spec() {
        DomainSpec::ExactIntegerAdic { .. } => {
            domain.element_from_int(if rng.gen_bool(0.5) { 1 } else { -1 })
        }
        DomainSpec::TruncatedAdic { .. } => loop {
            let candidate = domain.element_from_int(rng.gen_range(1..100));
            if candidate.is_unit() {
                break candidate;
            }
        },
        DomainSpec::RationalDiscrete => {
            let v = rng.gen_range(1..6) * if rng.gen_bool(0.5) { 1 } else { -1 };
            domain.element_from_int(v)
        }
    }
}

fn random_factor(rng: &mut ChaCha8Rng, spec: &TameSpec) -> Result<Factor> {
    let n = spec.n;
    let domain = &spec.domain;
    // With one variable (or linear factors disabled on top of it) only
    // scalings remain.
    let elementary_possible = n >= 2;
    let choice = if !spec.linear_factors {
        if elementary_possible {
            0
        } else {
            2
        }
    } else if elementary_possible {
        rng.gen_range(0..4)
    } else {
        2
    };
    Ok(match choice {
        0 => {
            let target = rng.gen_range(0..n);
            let term_count = rng.gen_range(1..=3);
            let mut terms = Vec::with_capacity(term_count);
            for _ in 0..term_count {
                // exponents over the variables other than `target`
                loop {
                    let mut exps = vec![0u32; n];
                    let mut total = 0u32;
                    for (var, e) in exps.iter_mut().enumerate() {
                        if var == target {
                            continue;
                        }
                        *e = rng.gen_range(0..=spec.degree_bound);
                        total += *e;
                    }
                    if total >= spec.min_poly_degree && total <= spec.degree_bound {
                        let coeff = domain.element_from_int(rng.gen_range(-5..=5));
                        terms.push((exps, coeff));
                        break;
                    }
                }
            }
            Factor::Elementary { target, terms }
        }
        1 => {
            let target = rng.gen_range(0..n);
            let source = loop {
                let s = rng.gen_range(0..n);
                if s != target {
                    break s;
                }
            };
            Factor::Shear {
                target,
                source,
                coefficient: domain.element_from_int(rng.gen_range(-4..=4)),
            }
        }
        2 => Factor::Scale {
            target: rng.gen_range(0..n),
            unit: random_unit(rng, domain),
        },
        _ => {
            let a = rng.gen_range(0..n);
            let b = loop {
                let b = rng.gen_range(0..n);
                if b != a {
                    break b;
                }
            };
            Factor::Swap { a, b }
        }
    })
}
