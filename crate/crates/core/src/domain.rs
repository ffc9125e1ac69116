//! Coefficient domains: exact and truncated ideal-adic rings.
//!
//! Three concrete domains cover the desk-scale experiments:
//!
//! * [`DomainSpec::TruncatedAdic`] — residues of `Z` modulo `m^N`, carrying
//!   the ideal `I = (m)` at coefficient precision `N`;
//! * [`DomainSpec::ExactIntegerAdic`] — exact integers with the ideal `(m)`;
//! * [`DomainSpec::RationalDiscrete`] — exact rationals with the zero ideal,
//!   whose Tate algebra is the plain polynomial ring.
//!
//! Every instance is Hausdorff before truncation: the powers of the ideal
//! intersect in zero. Elements are immutable and all operations are pure.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serializable description of a coefficient domain.
///
/// JSON forms: `{"kind":"truncated_adic","m":5,"N":8}`,
/// `{"kind":"exact_integer_adic","m":2}`, `{"kind":"rational_discrete"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    TruncatedAdic {
        m: u64,
        #[serde(rename = "N")]
        precision: u32,
    },
    ExactIntegerAdic {
        m: u64,
    },
    RationalDiscrete,
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::TruncatedAdic { m, precision } => {
                write!(f, "Z/{m}^{precision} with I=({m})")
            }
            DomainSpec::ExactIntegerAdic { m } => write!(f, "Z with I=({m})"),
            DomainSpec::RationalDiscrete => write!(f, "Q with I=(0)"),
        }
    }
}

#[derive(Debug)]
struct DomainInner {
    spec: DomainSpec,
    /// `m` for the adic kinds.
    modulus: Option<BigInt>,
    /// `m^N` for the truncated kind.
    modulus_power: Option<BigInt>,
    /// Product of the distinct primes dividing `m`, for the adic kinds.
    radical: Option<BigInt>,
}

/// A validated coefficient domain. Cheap to clone and share across threads.
#[derive(Debug, Clone)]
pub struct Domain(Arc<DomainInner>);

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.0.spec == other.0.spec
    }
}

impl Eq for Domain {}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.spec.fmt(f)
    }
}

impl Domain {
    pub fn new(spec: DomainSpec) -> Result<Self> {
        match spec {
            DomainSpec::TruncatedAdic { m, precision } => {
                if m < 2 {
                    return Err(Error::InvalidDomain(format!("modulus m={m} must be >= 2")));
                }
                if precision < 1 {
                    return Err(Error::InvalidDomain("precision N must be >= 1".into()));
                }
                let modulus = BigInt::from(m);
                let modulus_power = num_traits::pow::pow(modulus.clone(), precision as usize);
                let radical = BigInt::from(radical_u64(m));
                Ok(Domain(Arc::new(DomainInner {
                    spec,
                    modulus: Some(modulus),
                    modulus_power: Some(modulus_power),
                    radical: Some(radical),
                })))
            }
            DomainSpec::ExactIntegerAdic { m } => {
                if m < 2 {
                    return Err(Error::InvalidDomain(format!("modulus m={m} must be >= 2")));
                }
                Ok(Domain(Arc::new(DomainInner {
                    spec,
                    modulus: Some(BigInt::from(m)),
                    modulus_power: None,
                    radical: Some(BigInt::from(radical_u64(m))),
                })))
            }
            DomainSpec::RationalDiscrete => Ok(Domain(Arc::new(DomainInner {
                spec,
                modulus: None,
                modulus_power: None,
                radical: None,
            }))),
        }
    }

    /// `Z/m^N` with the ideal `(m)`.
    pub fn truncated(m: u64, precision: u32) -> Result<Self> {
        Domain::new(DomainSpec::TruncatedAdic { m, precision })
    }

    /// Exact `Z` with the ideal `(m)`.
    pub fn exact_integer(m: u64) -> Result<Self> {
        Domain::new(DomainSpec::ExactIntegerAdic { m })
    }

    /// Exact `Q` with the zero ideal.
    pub fn rational() -> Self {
        Domain::new(DomainSpec::RationalDiscrete).expect("rational domain is always valid")
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.0.spec
    }

    pub fn is_adic(&self) -> bool {
        !matches!(self.0.spec, DomainSpec::RationalDiscrete)
    }

    pub fn is_truncated(&self) -> bool {
        matches!(self.0.spec, DomainSpec::TruncatedAdic { .. })
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.0.spec, DomainSpec::RationalDiscrete)
    }

    /// Generator of the ideal, for the adic kinds.
    pub fn ideal_generator(&self) -> Option<u64> {
        match self.0.spec {
            DomainSpec::TruncatedAdic { m, .. } | DomainSpec::ExactIntegerAdic { m } => Some(m),
            DomainSpec::RationalDiscrete => None,
        }
    }

    /// Coefficient precision `N`, for the truncated kind.
    pub fn precision(&self) -> Option<u32> {
        match self.0.spec {
            DomainSpec::TruncatedAdic { precision, .. } => Some(precision),
            _ => None,
        }
    }

    fn modulus(&self) -> Option<&BigInt> {
        self.0.modulus.as_ref()
    }

    fn modulus_power(&self) -> Option<&BigInt> {
        self.0.modulus_power.as_ref()
    }

    fn radical(&self) -> Option<&BigInt> {
        self.0.radical.as_ref()
    }

    pub(crate) fn check_same(&self, other: &Domain) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }

    /// Reduce an integer to the canonical representative of the domain.
    pub(crate) fn canonical_int(&self, value: BigInt) -> Coeff {
        match self.0.spec {
            DomainSpec::TruncatedAdic { .. } => {
                let q = self.modulus_power().expect("truncated domain has m^N");
                Coeff::Int(value.mod_floor(q))
            }
            DomainSpec::ExactIntegerAdic { .. } => Coeff::Int(value),
            DomainSpec::RationalDiscrete => Coeff::Rat(BigRational::from_integer(value)),
        }
    }

    pub(crate) fn canonical(&self, value: Coeff) -> Coeff {
        match value {
            Coeff::Int(i) => self.canonical_int(i),
            Coeff::Rat(r) => {
                debug_assert!(self.is_rational(), "rational coefficient in adic domain");
                Coeff::Rat(r)
            }
        }
    }

    pub fn zero(&self) -> AdicElement {
        self.element_from_int(0)
    }

    pub fn one(&self) -> AdicElement {
        self.element_from_int(1)
    }

    pub fn element_from_int(&self, value: i64) -> AdicElement {
        self.element_from_bigint(BigInt::from(value))
    }

    pub fn element_from_bigint(&self, value: BigInt) -> AdicElement {
        AdicElement {
            value: self.canonical_int(value),
            domain: self.clone(),
        }
    }

    /// A rational element; only the rational domain accepts a denominator != 1.
    pub fn element_from_ratio(&self, numer: BigInt, denom: BigInt) -> Result<AdicElement> {
        if denom.is_zero() {
            return Err(Error::InvalidDomain("zero denominator".into()));
        }
        if self.is_rational() {
            Ok(AdicElement {
                value: Coeff::Rat(BigRational::new(numer, denom)),
                domain: self.clone(),
            })
        } else {
            let ratio = BigRational::new(numer, denom);
            if ratio.is_integer() {
                Ok(self.element_from_bigint(ratio.to_integer()))
            } else {
                Err(Error::InvalidDomain(format!(
                    "coefficient {ratio} is not an integer in {self}"
                )))
            }
        }
    }

    /// Parse a coefficient given as a decimal string, `p/q` for rationals.
    pub fn parse_element(&self, text: &str) -> Result<AdicElement> {
        let parse_int = |s: &str| -> Result<BigInt> {
            s.trim().parse::<BigInt>().map_err(|e| Error::Parse {
                offset: 0,
                message: format!("invalid integer {s:?}: {e}"),
            })
        };
        match text.split_once('/') {
            Some((num, den)) => self.element_from_ratio(parse_int(num)?, parse_int(den)?),
            None => Ok(self.element_from_bigint(parse_int(text)?)),
        }
    }

    pub(crate) fn coeff_is_zero(&self, c: &Coeff) -> bool {
        match c {
            Coeff::Int(i) => i.is_zero(),
            Coeff::Rat(r) => r.is_zero(),
        }
    }

    pub(crate) fn coeff_add(&self, a: &Coeff, b: &Coeff) -> Coeff {
        self.canonical(match (a, b) {
            (Coeff::Int(x), Coeff::Int(y)) => Coeff::Int(x + y),
            (Coeff::Rat(x), Coeff::Rat(y)) => Coeff::Rat(x + y),
            _ => unreachable!("mixed coefficient representations"),
        })
    }

    pub(crate) fn coeff_sub(&self, a: &Coeff, b: &Coeff) -> Coeff {
        self.canonical(match (a, b) {
            (Coeff::Int(x), Coeff::Int(y)) => Coeff::Int(x - y),
            (Coeff::Rat(x), Coeff::Rat(y)) => Coeff::Rat(x - y),
            _ => unreachable!("mixed coefficient representations"),
        })
    }

    pub(crate) fn coeff_mul(&self, a: &Coeff, b: &Coeff) -> Coeff {
        self.canonical(match (a, b) {
            (Coeff::Int(x), Coeff::Int(y)) => Coeff::Int(x * y),
            (Coeff::Rat(x), Coeff::Rat(y)) => Coeff::Rat(x * y),
            _ => unreachable!("mixed coefficient representations"),
        })
    }

    pub(crate) fn coeff_neg(&self, a: &Coeff) -> Coeff {
        self.canonical(match a {
            Coeff::Int(x) => Coeff::Int(-x),
            Coeff::Rat(x) => Coeff::Rat(-x),
        })
    }

    pub(crate) fn coeff_from_u32(&self, k: u32) -> Coeff {
        self.canonical_int(BigInt::from(k))
    }
}

/// Raw coefficient payload. Integers for the adic kinds, rationals for `Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Coeff {
    Int(BigInt),
    Rat(BigRational),
}

impl Coeff {
    pub(crate) fn to_coeff_string(&self) -> String {
        match self {
            Coeff::Int(i) => i.to_string(),
            Coeff::Rat(r) => {
                if r.is_integer() {
                    r.to_integer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

/// Ideal valuation: the largest `k` with the element in `I^k`.
///
/// `Top` reads "at least the precision" in a truncated domain and "infinite"
/// in an exact one; at truncation the two are indistinguishable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(u32),
    Top,
}

impl Valuation {
    pub fn is_top(&self) -> bool {
        matches!(self, Valuation::Top)
    }

    pub fn finite(&self) -> Option<u32> {
        match self {
            Valuation::Finite(k) => Some(*k),
            Valuation::Top => None,
        }
    }

    pub fn saturating_add(self, other: Valuation) -> Valuation {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a.saturating_add(b)),
            _ => Valuation::Top,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(k) => write!(f, "{k}"),
            Valuation::Top => write!(f, "TOP"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(k) => serializer.serialize_u32(*k),
            Valuation::Top => serializer.serialize_str("TOP"),
        }
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let v = serde_json::Value::deserialize(deserializer)?;
        match v {
            serde_json::Value::Number(n) => n
                .as_u64()
                .and_then(|k| u32::try_from(k).ok())
                .map(Valuation::Finite)
                .ok_or_else(|| DeError::custom("valuation out of range")),
            serde_json::Value::String(s) if s == "TOP" => Ok(Valuation::Top),
            other => Err(DeError::custom(format!("invalid valuation: {other}"))),
        }
    }
}

/// A ring element in canonical form, tagged with its domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdicElement {
    value: Coeff,
    domain: Domain,
}

impl AdicElement {
    pub(crate) fn from_raw(value: Coeff, domain: Domain) -> Self {
        AdicElement { value, domain }
    }

    pub(crate) fn raw(&self) -> &Coeff {
        &self.value
    }

    pub(crate) fn into_raw(self) -> Coeff {
        self.value
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn is_zero(&self) -> bool {
        self.domain.coeff_is_zero(&self.value)
    }

    pub fn is_one(&self) -> bool {
        match &self.value {
            Coeff::Int(i) => i.is_one(),
            Coeff::Rat(r) => r.is_one(),
        }
    }

    /// True when the value is an integer (always true in the adic kinds).
    pub fn is_integer(&self) -> bool {
        match &self.value {
            Coeff::Int(_) => true,
            Coeff::Rat(r) => r.is_integer(),
        }
    }

    /// The integer payload, when there is one.
    pub fn to_bigint(&self) -> Option<BigInt> {
        match &self.value {
            Coeff::Int(i) => Some(i.clone()),
            Coeff::Rat(r) => r.is_integer().then(|| r.to_integer()),
        }
    }

    /// The value as an exact rational.
    pub fn to_rational(&self) -> BigRational {
        match &self.value {
            Coeff::Int(i) => BigRational::from_integer(i.clone()),
            Coeff::Rat(r) => r.clone(),
        }
    }

    /// Canonical decimal string, `p/q` for non-integral rationals.
    pub fn to_coeff_string(&self) -> String {
        self.value.to_coeff_string()
    }

    fn check_same_domain(&self, other: &AdicElement) -> Result<()> {
        self.domain.check_same(&other.domain)
    }

    pub fn add(&self, other: &AdicElement) -> Result<AdicElement> {
        self.check_same_domain(other)?;
        Ok(AdicElement {
            value: self.domain.coeff_add(&self.value, &other.value),
            domain: self.domain.clone(),
        })
    }

    pub fn sub(&self, other: &AdicElement) -> Result<AdicElement> {
        self.check_same_domain(other)?;
        Ok(AdicElement {
            value: self.domain.coeff_sub(&self.value, &other.value),
            domain: self.domain.clone(),
        })
    }

    pub fn mul(&self, other: &AdicElement) -> Result<AdicElement> {
        self.check_same_domain(other)?;
        Ok(AdicElement {
            value: self.domain.coeff_mul(&self.value, &other.value),
            domain: self.domain.clone(),
        })
    }

    pub fn neg(&self) -> AdicElement {
        AdicElement {
            value: self.domain.coeff_neg(&self.value),
            domain: self.domain.clone(),
        }
    }

    /// Unit test: coprimality to `m` in `Z/m^N`, `±1` in exact `Z`,
    /// nonzero in `Q`.
    pub fn is_unit(&self) -> bool {
        match (self.domain.spec(), &self.value) {
            (DomainSpec::TruncatedAdic { .. }, Coeff::Int(i)) => {
                let m = self.domain.modulus().expect("adic domain has modulus");
                i.gcd(m).is_one()
            }
            (DomainSpec::ExactIntegerAdic { .. }, Coeff::Int(i)) => i.abs().is_one(),
            (DomainSpec::RationalDiscrete, Coeff::Rat(r)) => !r.is_zero(),
            _ => unreachable!("coefficient representation out of sync with domain"),
        }
    }

    /// Multiplicative inverse of a unit; extended Euclid modulo `m^N` in the
    /// truncated domain.
    pub fn invert_unit(&self) -> Result<AdicElement> {
        if !self.is_unit() {
            return Err(Error::NotAUnit(format!(
                "{} in {}",
                self.to_coeff_string(),
                self.domain
            )));
        }
        let value = match (self.domain.spec(), &self.value) {
            (DomainSpec::TruncatedAdic { .. }, Coeff::Int(i)) => {
                let q = self.domain.modulus_power().expect("truncated has m^N");
                let ext = i.extended_gcd(q);
                debug_assert!(ext.gcd.is_one());
                self.domain.canonical_int(ext.x)
            }
            (DomainSpec::ExactIntegerAdic { .. }, Coeff::Int(i)) => Coeff::Int(i.clone()),
            (DomainSpec::RationalDiscrete, Coeff::Rat(r)) => Coeff::Rat(r.recip()),
            _ => unreachable!(),
        };
        Ok(AdicElement {
            value,
            domain: self.domain.clone(),
        })
    }

    /// Largest `k` with the element in `I^k`; `Top` for zero, and for the
    /// rational domain 0 on any nonzero element (its ideal is zero).
    pub fn valuation(&self) -> Valuation {
        match (self.domain.spec(), &self.value) {
            (DomainSpec::RationalDiscrete, Coeff::Rat(r)) => {
                if r.is_zero() {
                    Valuation::Top
                } else {
                    Valuation::Finite(0)
                }
            }
            (_, Coeff::Int(i)) => {
                if i.is_zero() {
                    return Valuation::Top;
                }
                let m = self.domain.modulus().expect("adic domain has modulus");
                let mut v = 0u32;
                let mut cur = i.clone();
                loop {
                    let (q, r) = cur.div_mod_floor(m);
                    if !r.is_zero() {
                        break;
                    }
                    v += 1;
                    cur = q;
                }
                Valuation::Finite(v)
            }
            _ => unreachable!(),
        }
    }

    /// Membership in the radical of the ideal: divisibility by the product of
    /// the distinct primes of `m`; in `Q` only zero qualifies.
    pub fn in_radical(&self) -> bool {
        match (self.domain.spec(), &self.value) {
            (DomainSpec::RationalDiscrete, Coeff::Rat(r)) => r.is_zero(),
            (_, Coeff::Int(i)) => {
                let rad = self.domain.radical().expect("adic domain has radical");
                i.mod_floor(rad).is_zero()
            }
            _ => unreachable!(),
        }
    }

    /// Canonical-representative reduction or embedding into another domain.
    ///
    /// Supported: truncated -> truncated at lower or equal precision (same m),
    /// exact Z -> truncated (same m), exact Z -> Q, and identity.
    pub fn change_domain(&self, target: &Domain) -> Result<AdicElement> {
        if &self.domain == target {
            return Ok(self.clone());
        }
        match (self.domain.spec(), target.spec()) {
            (
                DomainSpec::TruncatedAdic { m, precision },
                DomainSpec::TruncatedAdic {
                    m: m2,
                    precision: p2,
                },
            ) if m == m2 && p2 <= precision => {
                Ok(target.element_from_bigint(self.to_bigint().expect("integral")))
            }
            (DomainSpec::ExactIntegerAdic { m }, DomainSpec::TruncatedAdic { m: m2, .. })
                if m == m2 =>
            {
                Ok(target.element_from_bigint(self.to_bigint().expect("integral")))
            }
            (DomainSpec::ExactIntegerAdic { .. }, DomainSpec::RationalDiscrete) => {
                Ok(target.element_from_bigint(self.to_bigint().expect("integral")))
            }
            (DomainSpec::RationalDiscrete, DomainSpec::ExactIntegerAdic { .. }) => {
                match self.to_bigint() {
                    Some(i) => Ok(target.element_from_bigint(i)),
                    None => Err(Error::InvalidDomain(format!(
                        "coefficient {} is not an integer",
                        self.to_coeff_string()
                    ))),
                }
            }
            _ => Err(Error::DomainMismatch {
                left: self.domain.to_string(),
                right: target.to_string(),
            }),
        }
    }

    /// Interpret the canonical representative as an element of `target`,
    /// e.g. lift residues mod `m` to residues mod `m^N` or to exact `Z`.
    pub fn lift_canonical(&self, target: &Domain) -> Result<AdicElement> {
        match (self.domain.spec(), target.spec()) {
            (DomainSpec::TruncatedAdic { m, .. }, DomainSpec::TruncatedAdic { m: m2, .. })
            | (DomainSpec::TruncatedAdic { m, .. }, DomainSpec::ExactIntegerAdic { m: m2 })
                if m == m2 =>
            {
                Ok(target.element_from_bigint(self.to_bigint().expect("integral")))
            }
            _ => Err(Error::DomainMismatch {
                left: self.domain.to_string(),
                right: target.to_string(),
            }),
        }
    }
}

impl fmt::Display for AdicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_coeff_string())
    }
}

/// Product of the distinct primes dividing `m`, by trial division.
/// Desk-scale moduli only; no cryptographic sizes.
pub(crate) fn radical_u64(m: u64) -> u64 {
    let mut rest = m;
    let mut rad = 1u64;
    let mut p = 2u64;
    while p.saturating_mul(p) <= rest {
        if rest % p == 0 {
            rad *= p;
            while rest % p == 0 {
                rest /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        rad *= rest;
    }
    rad
}

/// Primality by trial division; desk-scale inputs only.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    true
}
