//! Sparse multivariate truncated power series.
//!
//! A [`TateSeries`] stores finitely many monomials of total degree below a
//! degree cap `D`; terms of degree `>= D` are unrepresented and treated as
//! unknown. Together with the coefficient precision of the domain this gives
//! the dual truncation `(D, N)` under which every identity in the library is
//! read: equality means equality of truncations.
//!
//! A series additionally tracks whether any nonzero information has ever been
//! discarded past its cap. Series built from literals are exact polynomials;
//! products and compositions that overflow the cap are marked truncated.
//! Evaluation over the rationals refuses truncated inputs, and evaluation
//! reports over adic domains downgrade their precision claim accordingly.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::domain::{AdicElement, Coeff, Domain, Valuation};
use crate::error::{Error, Result};

/// Exponent tuple of a monomial. Ordered by total degree, then
/// lexicographically; the order is used for canonical serialization and
/// deterministic iteration only.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    /// The constant monomial in `n` variables.
    pub fn constant(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The monomial `x_var` in `n` variables (`var` is zero-based).
    pub fn variable(n: usize, var: usize) -> Self {
        let mut e = vec![0; n];
        e[var] = 1;
        MultiIndex(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, var: usize) -> u32 {
        self.0[var]
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Product of monomials: exponentwise sum.
    pub fn mul(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.0.len(), other.0.len());
        MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    fn drop_last(&self) -> MultiIndex {
        MultiIndex(self.0[..self.0.len() - 1].to_vec())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        // Total degree first; ties x1-major, so iteration and display read
        // naturally (1, x1, x2, x1^2, x1*x2, x2^2, ...).
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "x{}", i + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Outcome of the Tate unit criterion, with a certificate on failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnitCheck {
    Unit,
    ConstantNotUnit {
        constant: AdicElement,
    },
    /// First monomial (in the canonical order) whose coefficient fails
    /// radical membership.
    CoefficientNotInRadical {
        index: MultiIndex,
        coefficient: AdicElement,
    },
}

impl UnitCheck {
    pub fn is_unit(&self) -> bool {
        matches!(self, UnitCheck::Unit)
    }

    pub fn describe(&self) -> String {
        match self {
            UnitCheck::Unit => "unit".into(),
            UnitCheck::ConstantNotUnit { constant } => {
                format!("constant term {constant} is not a unit of the coefficient ring")
            }
            UnitCheck::CoefficientNotInRadical { index, coefficient } => format!(
                "coefficient {coefficient} of monomial {index} is not in the radical of the ideal"
            ),
        }
    }
}

/// Evaluation result with its heuristic tail-precision report.
#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub value: AdicElement,
    /// Minimum coefficient valuation in the top degree band `[D-w, D)` when
    /// the series is truncated; `Top` when the series is a fully stored
    /// polynomial (the claim is then exact, not heuristic).
    pub tail_valuation: Valuation,
    /// Width of the band inspected.
    pub window: u32,
    /// True when the series is a fully stored polynomial.
    pub exact: bool,
}

/// A sparse multivariate power series truncated at total degree `cap`.
#[derive(Debug, Clone)]
pub struct TateSeries {
    n: usize,
    cap: u32,
    domain: Domain,
    terms: BTreeMap<MultiIndex, Coeff>,
    truncated: bool,
}

/// Equality of truncations: variable count, cap, domain, and stored
/// coefficients. The truncation marker is provenance, not value.
impl PartialEq for TateSeries {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.cap == other.cap
            && self.domain == other.domain
            && self.terms == other.terms
    }
}

impl Eq for TateSeries {}

impl TateSeries {
    fn check_shape(n: usize, cap: u32) -> Result<()> {
        if n == 0 {
            return Err(Error::VariableCountMismatch {
                expected: 1,
                found: 0,
            });
        }
        if cap == 0 {
            return Err(Error::InvalidDegreeCap {
                cap,
                reason: "degree cap must be positive".into(),
            });
        }
        Ok(())
    }

    pub fn zero(domain: &Domain, n: usize, cap: u32) -> Result<Self> {
        Self::check_shape(n, cap)?;
        Ok(TateSeries {
            n,
            cap,
            domain: domain.clone(),
            terms: BTreeMap::new(),
            truncated: false,
        })
    }

    pub fn constant(domain: &Domain, n: usize, cap: u32, value: &AdicElement) -> Result<Self> {
        domain.check_same(value.domain())?;
        let mut s = Self::zero(domain, n, cap)?;
        if !value.is_zero() {
            s.terms.insert(MultiIndex::constant(n), value.raw().clone());
        }
        Ok(s)
    }

    pub fn one(domain: &Domain, n: usize, cap: u32) -> Result<Self> {
        Self::constant(domain, n, cap, &domain.one())
    }

    /// The series `x_var` (zero-based index).
    pub fn variable(domain: &Domain, n: usize, var: usize, cap: u32) -> Result<Self> {
        Self::check_shape(n, cap)?;
        if var >= n {
            return Err(Error::VariableIndexOutOfRange {
                index: var,
                count: n,
            });
        }
        if cap < 2 {
            return Err(Error::InvalidDegreeCap {
                cap,
                reason: "a variable needs degree cap >= 2".into(),
            });
        }
        let mut s = Self::zero(domain, n, cap)?;
        s.terms
            .insert(MultiIndex::variable(n, var), domain.one().into_raw());
        Ok(s)
    }

    /// Build a series from explicit terms. Coefficients are canonicalized
    /// and zeros pruned; a term of degree `>= cap` is rejected.
    pub fn from_terms(
        domain: &Domain,
        n: usize,
        cap: u32,
        terms: impl IntoIterator<Item = (MultiIndex, AdicElement)>,
    ) -> Result<Self> {
        let mut s = Self::zero(domain, n, cap)?;
        for (idx, c) in terms {
            if idx.len() != n {
                return Err(Error::VariableCountMismatch {
                    expected: n,
                    found: idx.len(),
                });
            }
            let degree = idx.total_degree();
            if degree >= cap {
                return Err(Error::TermBeyondCap { degree, cap });
            }
            domain.check_same(c.domain())?;
            s.accumulate(idx, c.into_raw());
        }
        Ok(s)
    }

    pub(crate) fn from_raw(
        domain: Domain,
        n: usize,
        cap: u32,
        terms: BTreeMap<MultiIndex, Coeff>,
        truncated: bool,
    ) -> Self {
        TateSeries {
            n,
            cap,
            domain,
            terms,
            truncated,
        }
    }

    fn accumulate(&mut self, idx: MultiIndex, c: Coeff) {
        if self.domain.coeff_is_zero(&c) {
            return;
        }
        match self.terms.entry(idx) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = self.domain.coeff_add(e.get(), &c);
                if self.domain.coeff_is_zero(&sum) {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn variable_count(&self) -> usize {
        self.n
    }

    pub fn degree_cap(&self) -> u32 {
        self.cap
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no nonzero information was ever discarded past the cap:
    /// the stored terms are the whole series.
    pub fn is_exact(&self) -> bool {
        !self.truncated
    }

    pub(crate) fn mark_truncated(mut self) -> Self {
        self.truncated = true;
        self
    }

    /// Largest total degree among stored terms.
    pub fn max_total_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|i| i.total_degree())
    }

    pub fn coefficient(&self, idx: &MultiIndex) -> AdicElement {
        match self.terms.get(idx) {
            Some(c) => AdicElement::from_raw(c.clone(), self.domain.clone()),
            None => self.domain.zero(),
        }
    }

    pub fn constant_term(&self) -> AdicElement {
        self.coefficient(&MultiIndex::constant(self.n))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, AdicElement)> + '_ {
        self.terms
            .iter()
            .map(|(i, c)| (i, AdicElement::from_raw(c.clone(), self.domain.clone())))
    }

    fn check_compatible(&self, other: &TateSeries) -> Result<()> {
        if self.n != other.n {
            return Err(Error::VariableCountMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        self.domain.check_same(&other.domain)
    }

    pub fn add(&self, other: &TateSeries) -> Result<TateSeries> {
        self.check_compatible(other)?;
        let cap = self.cap.min(other.cap);
        let mut out = TateSeries::zero(&self.domain, self.n, cap)?;
        out.truncated = self.truncated || other.truncated;
        for src in [self, other] {
            for (idx, c) in &src.terms {
                if idx.total_degree() >= cap {
                    // A stored term of the wider operand falls past the
                    // shared cap: information is lost.
                    out.truncated = true;
                } else {
                    out.accumulate(idx.clone(), c.clone());
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &TateSeries) -> Result<TateSeries> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TateSeries {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = self.domain.coeff_neg(c);
        }
        out
    }

    pub fn scalar_mul(&self, scalar: &AdicElement) -> Result<TateSeries> {
        self.domain.check_same(scalar.domain())?;
        let mut out = TateSeries::zero(&self.domain, self.n, self.cap)?;
        out.truncated = self.truncated;
        for (idx, c) in &self.terms {
            out.accumulate(idx.clone(), self.domain.coeff_mul(c, scalar.raw()));
        }
        Ok(out)
    }

    /// Convolution truncated at total degree `< min(cap, other.cap)`.
    pub fn mul(&self, other: &TateSeries) -> Result<TateSeries> {
        self.check_compatible(other)?;
        let cap = self.cap.min(other.cap);
        // Multiplying by an exactly-zero series yields exact zero.
        if (self.is_zero() && self.is_exact()) || (other.is_zero() && other.is_exact()) {
            return TateSeries::zero(&self.domain, self.n, cap);
        }
        let mut out = TateSeries::zero(&self.domain, self.n, cap)?;
        out.truncated = self.truncated || other.truncated;
        for (ia, ca) in &self.terms {
            let da = ia.total_degree();
            if da >= cap {
                out.truncated = true;
                continue;
            }
            // Terms iterate in degree order, so once the degree budget is
            // exhausted the rest of the inner loop can only overflow.
            for (ib, cb) in &other.terms {
                if da + ib.total_degree() >= cap {
                    out.truncated = true;
                    break;
                }
                out.accumulate(ia.mul(ib), self.domain.coeff_mul(ca, cb));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, exp: u32) -> Result<TateSeries> {
        let mut out = TateSeries::one(&self.domain, self.n, self.cap)?;
        for _ in 0..exp {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Formal partial derivative with respect to `var` (zero-based). The
    /// degree cap drops by one: degree-`cap` terms of the input, which are
    /// unknown, would contribute at degree `cap - 1`.
    pub fn derive(&self, var: usize) -> Result<TateSeries> {
        if var >= self.n {
            return Err(Error::VariableIndexOutOfRange {
                index: var,
                count: self.n,
            });
        }
        if self.cap < 2 {
            return Err(Error::InvalidDegreeCap {
                cap: self.cap,
                reason: "derivative needs degree cap >= 2".into(),
            });
        }
        let mut out = TateSeries::zero(&self.domain, self.n, self.cap - 1)?;
        out.truncated = self.truncated;
        for (idx, c) in &self.terms {
            let e = idx.exponent(var);
            if e == 0 {
                continue;
            }
            let mut exps = idx.exponents().to_vec();
            exps[var] = e - 1;
            let factor = self.domain.coeff_from_u32(e);
            out.accumulate(MultiIndex::new(exps), self.domain.coeff_mul(c, &factor));
        }
        Ok(out)
    }

    fn check_substitution(&self, subs: &[TateSeries]) -> Result<(usize, u32)> {
        if subs.len() != self.n {
            return Err(Error::VariableCountMismatch {
                expected: self.n,
                found: subs.len(),
            });
        }
        let inner_n = subs[0].n;
        let mut cap = self.cap;
        for (k, g) in subs.iter().enumerate() {
            self.domain.check_same(&g.domain)?;
            if g.n != inner_n {
                return Err(Error::VariableCountMismatch {
                    expected: inner_n,
                    found: g.n,
                });
            }
            if !g.constant_term().is_zero() {
                return Err(Error::NonzeroConstantTerm { component: k });
            }
            cap = cap.min(g.cap);
        }
        Ok((inner_n, cap))
    }

    /// Substitute `subs[i]` for `x_{i+1}`. Every substituted series must have
    /// a vanishing constant term, which makes the truncated composition
    /// well defined. Monomial-by-monomial with cached powers.
    pub fn compose(&self, subs: &[TateSeries]) -> Result<TateSeries> {
        let (inner_n, cap) = self.check_substitution(subs)?;
        let mut out = TateSeries::zero(&self.domain, inner_n, cap)?;
        out.truncated = self.truncated;
        // powers[i] holds subs[i]^0, subs[i]^1, ... at the shared cap.
        let mut powers: Vec<Vec<TateSeries>> = subs
            .iter()
            .map(|g| {
                Ok(vec![
                    TateSeries::one(&self.domain, inner_n, cap)?,
                    g.with_cap_internal(cap)?,
                ])
            })
            .collect::<Result<_>>()?;
        for (idx, c) in &self.terms {
            if idx.total_degree() >= cap {
                // Substituted series have zero constant terms, so this term
                // only feeds degrees past the cap.
                out.truncated = true;
                continue;
            }
            let mut term = TateSeries::constant(
                &self.domain,
                inner_n,
                cap,
                &AdicElement::from_raw(c.clone(), self.domain.clone()),
            )?;
            for (i, &e) in idx.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = &mut powers[i];
                while pw.len() <= e as usize {
                    let next = pw.last().unwrap().mul(&pw[1])?;
                    pw.push(next);
                }
                term = term.mul(&pw[e as usize])?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Same substitution computed by recursive Horner evaluation in the last
    /// variable. Results agree with [`TateSeries::compose`] coefficientwise;
    /// the two strategies exist so each can check the other.
    pub fn compose_horner(&self, subs: &[TateSeries]) -> Result<TateSeries> {
        let (inner_n, cap) = self.check_substitution(subs)?;
        let subs_at_cap: Vec<TateSeries> = subs
            .iter()
            .map(|g| g.with_cap_internal(cap))
            .collect::<Result<_>>()?;
        let mut out = self.horner_rec(&subs_at_cap, inner_n, cap)?;
        if self.truncated {
            out = out.mark_truncated();
        }
        Ok(out)
    }

    fn horner_rec(&self, subs: &[TateSeries], inner_n: usize, cap: u32) -> Result<TateSeries> {
        if self.n == 1 {
            let g = &subs[0];
            let top = self
                .terms
                .keys()
                .next_back()
                .map(|i| i.exponent(0))
                .unwrap_or(0);
            let mut acc = TateSeries::zero(&self.domain, inner_n, cap)?;
            for e in (0..=top).rev() {
                acc = acc.mul(g)?;
                let c = self.coefficient(&MultiIndex::new(vec![e]));
                if !c.is_zero() {
                    acc = acc.add(&TateSeries::constant(&self.domain, inner_n, cap, &c)?)?;
                }
            }
            return Ok(acc);
        }
        // Group by the exponent of the last variable.
        let mut layers: BTreeMap<u32, TateSeries> = BTreeMap::new();
        for (idx, c) in &self.terms {
            let e = idx.exponent(self.n - 1);
            let layer = layers.entry(e).or_insert_with(|| {
                TateSeries::from_raw(
                    self.domain.clone(),
                    self.n - 1,
                    self.cap,
                    BTreeMap::new(),
                    false,
                )
            });
            layer.terms.insert(idx.drop_last(), c.clone());
        }
        let top = layers.keys().next_back().copied().unwrap_or(0);
        let g_last = &subs[subs.len() - 1];
        let inner_subs = &subs[..subs.len() - 1];
        let mut acc = TateSeries::zero(&self.domain, inner_n, cap)?;
        for e in (0..=top).rev() {
            acc = acc.mul(g_last)?;
            if let Some(layer) = layers.get(&e) {
                acc = acc.add(&layer.horner_rec(inner_subs, inner_n, cap)?)?;
            }
        }
        Ok(acc)
    }

    /// Evaluate at a point of `R^n`.
    ///
    /// Over an adic domain the outcome carries a heuristic tail-precision
    /// estimate: the minimum coefficient valuation over the top band of
    /// `window` degrees (default `max(1, D/4)`), or `Top` when the series is
    /// a fully stored polynomial. Over the rationals a truncated series is
    /// rejected: the sum of its unknown tail is meaningless.
    pub fn eval(&self, point: &[AdicElement], window: Option<u32>) -> Result<EvalOutcome> {
        if point.len() != self.n {
            return Err(Error::VariableCountMismatch {
                expected: self.n,
                found: point.len(),
            });
        }
        for p in point {
            self.domain.check_same(p.domain())?;
        }
        if self.domain.is_rational() && self.truncated {
            return Err(Error::NonPolynomialEvaluation);
        }
        let max_exp = |var: usize| {
            self.terms
                .keys()
                .map(|i| i.exponent(var))
                .max()
                .unwrap_or(0)
        };
        // Power tables, reduced at every step so residues stay small.
        let mut tables: Vec<Vec<AdicElement>> = Vec::with_capacity(self.n);
        for (var, p) in point.iter().enumerate() {
            let top = max_exp(var);
            let mut tbl = Vec::with_capacity(top as usize + 1);
            tbl.push(self.domain.one());
            for e in 1..=top {
                let next = tbl[(e - 1) as usize].mul(p)?;
                tbl.push(next);
            }
            tables.push(tbl);
        }
        let mut value = self.domain.zero();
        for (idx, c) in &self.terms {
            let mut term = AdicElement::from_raw(c.clone(), self.domain.clone());
            for (var, &e) in idx.exponents().iter().enumerate() {
                if e > 0 {
                    term = term.mul(&tables[var][e as usize])?;
                }
            }
            value = value.add(&term)?;
        }
        let window = window.unwrap_or_else(|| (self.cap / 4).max(1));
        let tail_valuation = if !self.truncated {
            Valuation::Top
        } else {
            let lo = self.cap.saturating_sub(window);
            self.terms
                .iter()
                .filter(|(i, _)| i.total_degree() >= lo)
                .map(|(_, c)| AdicElement::from_raw(c.clone(), self.domain.clone()).valuation())
                .min()
                .unwrap_or(Valuation::Top)
        };
        Ok(EvalOutcome {
            value,
            tail_valuation,
            window,
            exact: !self.truncated,
        })
    }

    /// The Tate unit criterion: a unit constant term and every nonconstant
    /// coefficient in the radical of the ideal.
    pub fn unit_check(&self) -> UnitCheck {
        let constant = self.constant_term();
        if !constant.is_unit() {
            return UnitCheck::ConstantNotUnit { constant };
        }
        for (idx, c) in &self.terms {
            if idx.is_constant() {
                continue;
            }
            let coefficient = AdicElement::from_raw(c.clone(), self.domain.clone());
            if !coefficient.in_radical() {
                return UnitCheck::CoefficientNotInRadical {
                    index: idx.clone(),
                    coefficient,
                };
            }
        }
        UnitCheck::Unit
    }

    pub fn is_tate_unit(&self) -> bool {
        self.unit_check().is_unit()
    }

    /// Constructive inverse of a Tate unit: with `b = f(0)^{-1}` and
    /// `b*f = 1 + u`, the inverse is `b * sum_{i<D} (-u)^i`, evaluated by
    /// Horner. The product `f * f^{-1}` is 1 in the truncated ring.
    pub fn invert_unit(&self) -> Result<TateSeries> {
        let check = self.unit_check();
        if !check.is_unit() {
            return Err(Error::NotAUnit(check.describe()));
        }
        let b = self.constant_term().invert_unit()?;
        let one = TateSeries::one(&self.domain, self.n, self.cap)?;
        let u = self.scalar_mul(&b)?.sub(&one)?;
        let mut acc = one.clone();
        for _ in 1..self.cap {
            let next = one.sub(&u.mul(&acc)?)?;
            if next == acc {
                // u is nilpotent at this truncation; the sum has stabilized.
                acc = next;
                break;
            }
            acc = next;
        }
        acc.scalar_mul(&b)
    }

    /// Restrict to a lower degree cap.
    pub fn truncate_cap(&self, cap: u32) -> Result<TateSeries> {
        if cap > self.cap {
            return Err(Error::InvalidDegreeCap {
                cap,
                reason: format!("larger than the current cap {}", self.cap),
            });
        }
        let mut out = TateSeries::zero(&self.domain, self.n, cap)?;
        out.truncated = self.truncated;
        for (idx, c) in &self.terms {
            if idx.total_degree() >= cap {
                out.truncated = true;
            } else {
                out.terms.insert(idx.clone(), c.clone());
            }
        }
        Ok(out)
    }

    /// Move to a new cap: lowering always works, raising only for a fully
    /// stored polynomial (a truncated tail cannot be invented).
    pub fn with_cap(&self, cap: u32) -> Result<TateSeries> {
        if cap <= self.cap {
            self.truncate_cap(cap)
        } else if self.truncated {
            Err(Error::TruncatedExtension {
                from: self.cap,
                to: cap,
            })
        } else {
            let mut out = self.clone();
            out.cap = cap;
            Ok(out)
        }
    }

    /// Internal cap adjustment used by composition: truncation only.
    fn with_cap_internal(&self, cap: u32) -> Result<TateSeries> {
        if cap == self.cap {
            Ok(self.clone())
        } else {
            self.truncate_cap(cap)
        }
    }

    /// Apply a coefficientwise reduction or embedding (see
    /// [`AdicElement::change_domain`]).
    pub fn change_domain(&self, target: &Domain) -> Result<TateSeries> {
        let mut out = TateSeries::zero(target, self.n, self.cap)?;
        out.truncated = self.truncated;
        for (idx, c) in self.iter() {
            out.accumulate(idx.clone(), c.change_domain(target)?.into_raw());
        }
        Ok(out)
    }

    /// Reinterpret canonical representatives in `target` (see
    /// [`AdicElement::lift_canonical`]).
    pub fn lift_canonical(&self, target: &Domain) -> Result<TateSeries> {
        let mut out = TateSeries::zero(target, self.n, self.cap)?;
        out.truncated = self.truncated;
        for (idx, c) in self.iter() {
            out.accumulate(idx.clone(), c.lift_canonical(target)?.into_raw());
        }
        Ok(out)
    }

    /// Reinterpret a series with integer coefficients over another domain by
    /// mapping each coefficient through `Z`. For truncated sources this reads
    /// the canonical representatives; non-integral rational coefficients are
    /// an error.
    pub fn reinterpret_integral(&self, target: &Domain) -> Result<TateSeries> {
        let mut out = TateSeries::zero(target, self.n, self.cap)?;
        out.truncated = self.truncated;
        for (idx, c) in self.iter() {
            let int = c.to_bigint().ok_or_else(|| {
                Error::InvalidDomain(format!(
                    "coefficient {} of {} is not an integer",
                    c.to_coeff_string(),
                    idx
                ))
            })?;
            out.accumulate(idx.clone(), target.element_from_bigint(int).into_raw());
        }
        Ok(out)
    }

    /// Minimum coefficient valuation among stored terms; `Top` when zero.
    pub fn min_valuation(&self) -> Valuation {
        self.iter()
            .map(|(_, c)| c.valuation())
            .min()
            .unwrap_or(Valuation::Top)
    }
}

impl fmt::Display for TateSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        } else {
            for (k, (idx, c)) in self.terms.iter().enumerate() {
                let c = c.to_coeff_string();
                let (sign, mag) = match c.strip_prefix('-') {
                    Some(rest) => ("-", rest.to_string()),
                    None => ("+", c),
                };
                if k == 0 {
                    if sign == "-" {
                        write!(f, "-")?;
                    }
                } else {
                    write!(f, " {sign} ")?;
                }
                if idx.is_constant() {
                    write!(f, "{mag}")?;
                } else if mag == "1" {
                    write!(f, "{idx}")?;
                } else {
                    write!(f, "{mag}*{idx}")?;
                }
            }
        }
        if self.truncated {
            write!(f, " + O(deg {})", self.cap)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use proptest::prelude::*;

    fn trunc(m: u64, n: u32) -> Domain {
        Domain::truncated(m, n).unwrap()
    }

    fn univ(domain: &Domain, cap: u32, coeffs: &[(u32, i64)]) -> TateSeries {
        TateSeries::from_terms(
            domain,
            1,
            cap,
            coeffs
                .iter()
                .map(|&(e, c)| (MultiIndex::new(vec![e]), domain.element_from_int(c))),
        )
        .unwrap()
    }

    fn biv(domain: &Domain, cap: u32, coeffs: &[([u32; 2], i64)]) -> TateSeries {
        TateSeries::from_terms(
            domain,
            2,
            cap,
            coeffs
                .iter()
                .map(|&(e, c)| (MultiIndex::new(e.to_vec()), domain.element_from_int(c))),
        )
        .unwrap()
    }

    #[test]
    fn canonical_order_is_graded_then_x1_major() {
        let x2_squared = MultiIndex::new(vec![0, 2]);
        let x1 = MultiIndex::new(vec![1, 0]);
        let x1_x2 = MultiIndex::new(vec![1, 1]);
        assert!(x1 < x2_squared); // degree 1 < degree 2
        assert!(x1_x2 < x2_squared); // same degree: x1-major first
        assert!(MultiIndex::new(vec![2, 0]) < x1_x2);
    }

    #[test]
    fn add_cancels_and_keeps_canonical_form() {
        let q = Domain::rational();
        let f = univ(&q, 5, &[(0, 1), (1, 1)]);
        let g = univ(&q, 5, &[(0, 1), (1, -1)]);
        let sum = f.add(&g).unwrap();
        assert_eq!(sum, univ(&q, 5, &[(0, 2)]));
        assert_eq!(sum.term_count(), 1);
    }

    #[test]
    fn add_zero_is_identity() {
        let d = trunc(7, 2);
        let f = biv(&d, 6, &[([1, 0], 3), ([0, 2], 5)]);
        let z = TateSeries::zero(&d, 2, 6).unwrap();
        assert_eq!(f.add(&z).unwrap(), f);
    }

    #[test]
    fn modular_coefficients_cancel_in_add() {
        let d = trunc(5, 1);
        let f = univ(&d, 4, &[(1, 3)]);
        let g = univ(&d, 4, &[(1, 2)]);
        assert!(f.add(&g).unwrap().is_zero());
    }

    #[test]
    fn difference_of_squares() {
        let q = Domain::rational();
        let f = univ(&q, 4, &[(0, 1), (1, 1)]);
        let g = univ(&q, 4, &[(0, 1), (1, -1)]);
        assert_eq!(f.mul(&g).unwrap(), univ(&q, 4, &[(0, 1), (2, -1)]));
    }

    #[test]
    fn mul_by_one_is_identity() {
        let d = trunc(12, 2);
        let f = biv(&d, 5, &[([1, 1], 7), ([0, 1], 2)]);
        let one = TateSeries::one(&d, 2, 5).unwrap();
        assert_eq!(f.mul(&one).unwrap(), f);
    }

    #[test]
    fn binomial_square_expands() {
        let q = Domain::rational();
        let f = biv(&q, 5, &[([1, 0], 1), ([0, 1], 1)]);
        let expected = biv(&q, 5, &[([2, 0], 1), ([1, 1], 2), ([0, 2], 1)]);
        assert_eq!(f.mul(&f).unwrap(), expected);
    }

    #[test]
    fn derivative_power_rule() {
        let q = Domain::rational();
        let f = biv(&q, 6, &[([2, 1], 1)]);
        assert_eq!(f.derive(0).unwrap(), biv(&q, 5, &[([1, 1], 2)]));
        let c = biv(&q, 6, &[([0, 0], 9)]);
        assert!(c.derive(1).unwrap().is_zero());
    }

    #[test]
    fn derivative_vanishes_mod_characteristic() {
        let d = trunc(2, 1);
        let f = univ(&d, 4, &[(2, 1)]);
        assert!(f.derive(0).unwrap().is_zero());
    }

    #[test]
    fn derivative_index_out_of_range() {
        let q = Domain::rational();
        let f = univ(&q, 4, &[(1, 1)]);
        assert!(matches!(
            f.derive(3),
            Err(Error::VariableIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn compose_square_with_shift() {
        let q = Domain::rational();
        let f = univ(&q, 6, &[(2, 1)]); // x^2
        let g = univ(&q, 6, &[(1, 1), (2, 1)]); // x + x^2
        let expected = univ(&q, 6, &[(2, 1), (3, 2), (4, 1)]);
        assert_eq!(f.compose(&[g.clone()]).unwrap(), expected);
        assert_eq!(f.compose_horner(&[g]).unwrap(), expected);
    }

    #[test]
    fn compose_with_identity_substitution() {
        let q = Domain::rational();
        let f = biv(&q, 6, &[([1, 0], 2), ([1, 2], -3), ([0, 1], 1)]);
        let subs = vec![
            TateSeries::variable(&q, 2, 0, 6).unwrap(),
            TateSeries::variable(&q, 2, 1, 6).unwrap(),
        ];
        assert_eq!(f.compose(&subs).unwrap(), f);
    }

    #[test]
    fn compose_requires_vanishing_constant_terms() {
        let q = Domain::rational();
        let f = univ(&q, 4, &[(1, 1)]);
        let g = univ(&q, 4, &[(0, 1), (1, 1)]);
        assert!(matches!(
            f.compose(&[g]),
            Err(Error::NonzeroConstantTerm { component: 0 })
        ));
    }

    #[test]
    fn compose_reversion_candidate_gives_identity_mod_degree_six() {
        // g = x + x^2 + 2x^3 + 5x^4 + 14x^5 inverts f = x - x^2 through degree 5.
        let q = Domain::rational();
        let f = univ(&q, 6, &[(1, 1), (2, -1)]);
        let g = univ(&q, 6, &[(1, 1), (2, 1), (3, 2), (4, 5), (5, 14)]);
        let x = TateSeries::variable(&q, 1, 0, 6).unwrap();
        assert_eq!(f.compose(&[g]).unwrap(), x);
    }

    #[test]
    fn eval_polynomial_is_exact() {
        let d = trunc(5, 4);
        let f = univ(&d, 8, &[(0, 1), (1, 5)]);
        let out = f.eval(&[d.one()], None).unwrap();
        assert_eq!(out.value, d.element_from_int(6));
        assert_eq!(out.tail_valuation, Valuation::Top);
        assert!(out.exact);
    }

    #[test]
    fn eval_variable_returns_the_point() {
        let d = trunc(7, 2);
        let f = univ(&d, 4, &[(1, 1)]);
        let a = d.element_from_int(29);
        assert_eq!(f.eval(&[a.clone()], None).unwrap().value, a);
    }

    #[test]
    fn eval_rejects_truncated_rational_series() {
        let q = Domain::rational();
        let f = univ(&q, 4, &[(1, 1)]).mark_truncated();
        assert!(matches!(
            f.eval(&[q.one()], None),
            Err(Error::NonPolynomialEvaluation)
        ));
    }

    #[test]
    fn truncated_eval_reports_band_valuation() {
        let d = trunc(5, 4);
        // Stored tail coefficient 50 has valuation 2; window 2 covers degrees 6..8.
        let f = univ(&d, 8, &[(0, 1), (6, 50)]).mark_truncated();
        let out = f.eval(&[d.one()], Some(2)).unwrap();
        assert_eq!(out.tail_valuation, Valuation::Finite(2));
        assert!(!out.exact);
    }

    #[test]
    fn unit_criterion_examples() {
        let d5 = trunc(5, 3);
        assert!(univ(&d5, 4, &[(0, 3), (1, 5)]).is_tate_unit());
        let not_unit = univ(&d5, 4, &[(0, 1), (1, 1)]);
        match not_unit.unit_check() {
            UnitCheck::CoefficientNotInRadical { index, .. } => {
                assert_eq!(index, MultiIndex::new(vec![1]));
            }
            other => panic!("expected radical failure, got {other:?}"),
        }
        let d12 = trunc(12, 2);
        assert!(univ(&d12, 4, &[(0, 5), (1, 6)]).is_tate_unit());
    }

    #[test]
    fn unit_criterion_over_exact_integers() {
        let d = Domain::exact_integer(2).unwrap();
        // det J(x - x^2) = 1 - 2x: nonconstant coefficients divisible by 2.
        assert!(univ(&d, 8, &[(0, 1), (1, -2)]).is_tate_unit());
        assert!(!univ(&d, 8, &[(0, 3), (1, 2)]).is_tate_unit());
    }

    #[test]
    fn geometric_inverse_of_one_plus_five_x() {
        let d = trunc(5, 3);
        let f = univ(&d, 3, &[(0, 1), (1, 5)]);
        let inv = f.invert_unit().unwrap();
        assert_eq!(inv, univ(&d, 3, &[(0, 1), (1, -5), (2, 25)]));
        let prod = f.mul(&inv).unwrap();
        assert_eq!(prod, TateSeries::one(&d, 1, 3).unwrap());
    }

    #[test]
    fn invert_constant_series() {
        let d = trunc(10, 2);
        let c = univ(&d, 5, &[(0, 7)]);
        assert_eq!(c.invert_unit().unwrap(), univ(&d, 5, &[(0, 43)]));
        let one = TateSeries::one(&d, 1, 5).unwrap();
        assert_eq!(one.invert_unit().unwrap(), one);
    }

    #[test]
    fn invert_non_unit_reports_certificate() {
        let d = trunc(5, 2);
        let f = univ(&d, 4, &[(0, 1), (1, 2)]);
        match f.invert_unit() {
            Err(Error::NotAUnit(msg)) => assert!(msg.contains("x1")),
            other => panic!("expected unit failure, got {other:?}"),
        }
    }

    #[test]
    fn tail_truncation_is_marked() {
        let q = Domain::rational();
        let f = univ(&q, 4, &[(2, 1)]);
        let g = univ(&q, 4, &[(3, 1)]);
        let prod = f.mul(&g).unwrap();
        assert!(prod.is_zero());
        assert!(!prod.is_exact());
        // In-range products stay exact.
        let h = univ(&q, 4, &[(1, 1)]);
        assert!(f.mul(&h).unwrap().is_exact());
    }

    #[test]
    fn serde_of_domain_spec_matches_wire_format() {
        let spec = DomainSpec::TruncatedAdic { m: 5, precision: 8 };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"kind":"truncated_adic","m":5,"N":8}"#);
        let back: DomainSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }

    // ---- property tests ----

    fn domain_strategy() -> impl Strategy<Value = Domain> {
        prop_oneof![
            (prop::sample::select(vec![2u64, 4, 5, 12, 30]), 1u32..4)
                .prop_map(|(m, n)| trunc(m, n)),
            prop::sample::select(vec![2u64, 3, 5]).prop_map(|m| Domain::exact_integer(m).unwrap()),
            Just(Domain::rational()),
        ]
    }

    /// Random sparse series whose true degree stays small enough that
    /// products at the cap do not truncate.
    fn series_strategy(
        domain: Domain,
        n: usize,
        cap: u32,
        max_deg: u32,
    ) -> impl Strategy<Value = TateSeries> {
        let exps = prop::collection::vec(0u32..=max_deg, n);
        let term = (exps, -9i64..=9).prop_map(move |(e, c)| (e, c));
        prop::collection::vec(term, 0..5).prop_map(move |terms| {
            TateSeries::from_terms(
                &domain,
                n,
                cap,
                terms.into_iter().filter_map(|(e, c)| {
                    let idx = MultiIndex::new(e);
                    (idx.total_degree() <= max_deg)
                        .then(|| (idx, domain.element_from_int(c)))
                }),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn ring_laws_hold(
            (d, f, g, h) in domain_strategy().prop_flat_map(|d| {
                (
                    Just(d.clone()),
                    series_strategy(d.clone(), 2, 16, 3),
                    series_strategy(d.clone(), 2, 16, 3),
                    series_strategy(d, 2, 16, 3),
                )
            })
        ) {
            let _ = &d;
            prop_assert_eq!(f.add(&g).unwrap(), g.add(&f).unwrap());
            prop_assert_eq!(f.mul(&g).unwrap(), g.mul(&f).unwrap());
            prop_assert_eq!(
                f.add(&g).unwrap().add(&h).unwrap(),
                f.add(&g.add(&h).unwrap()).unwrap()
            );
            prop_assert_eq!(
                f.mul(&g).unwrap().mul(&h).unwrap(),
                f.mul(&g.mul(&h).unwrap()).unwrap()
            );
            prop_assert_eq!(
                f.mul(&g.add(&h).unwrap()).unwrap(),
                f.mul(&g).unwrap().add(&f.mul(&h).unwrap()).unwrap()
            );
        }

        #[test]
        fn product_degrees_stay_under_cap(
            (d, f, g) in domain_strategy().prop_flat_map(|d| {
                (
                    Just(d.clone()),
                    series_strategy(d.clone(), 2, 5, 4),
                    series_strategy(d, 2, 5, 4),
                )
            })
        ) {
            let _ = &d;
            let prod = f.mul(&g).unwrap();
            prop_assert!(prod.max_total_degree().map_or(true, |deg| deg < 5));
        }

        #[test]
        fn leibniz_rule(
            (d, f, g) in domain_strategy().prop_flat_map(|d| {
                (
                    Just(d.clone()),
                    series_strategy(d.clone(), 2, 10, 3),
                    series_strategy(d, 2, 10, 3),
                )
            })
        ) {
            let _ = &d;
            let lhs = f.mul(&g).unwrap().derive(0).unwrap();
            let rhs = f
                .derive(0)
                .unwrap()
                .mul(&g)
                .unwrap()
                .add(&f.mul(&g.derive(0).unwrap()).unwrap())
                .unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        // The unit criterion is multiplicative whenever the product is fully
        // stored (no information past the cap was discarded).
        #[test]
        fn unit_criterion_is_multiplicative_on_full_products(
            (d, f, g) in domain_strategy().prop_flat_map(|d| {
                (
                    Just(d.clone()),
                    series_strategy(d.clone(), 2, 16, 3),
                    series_strategy(d, 2, 16, 3),
                )
            })
        ) {
            let _ = &d;
            let prod = f.mul(&g).unwrap();
            prop_assert!(prod.is_exact());
            prop_assert_eq!(prod.is_tate_unit(), f.is_tate_unit() && g.is_tate_unit());
        }

        #[test]
        fn unit_inverse_multiplies_to_one(
            (d, f) in domain_strategy().prop_flat_map(|d| {
                (Just(d.clone()), series_strategy(d, 2, 6, 3))
            })
        ) {
            let _ = &d;
            if f.is_tate_unit() {
                let inv = f.invert_unit().unwrap();
                let one = TateSeries::one(f.domain(), 2, f.degree_cap()).unwrap();
                prop_assert_eq!(f.mul(&inv).unwrap(), one);
            } else {
                prop_assert!(f.invert_unit().is_err());
            }
        }

        #[test]
        fn composition_strategies_agree_and_associate(
            (d, f, g1, g2, h1, h2) in domain_strategy().prop_flat_map(|d| {
                fn zero_constant(
                    d: Domain,
                ) -> impl Strategy<Value = TateSeries> {
                    series_strategy(d, 2, 8, 3).prop_map(|mut s| {
                        s.terms.remove(&MultiIndex::constant(2));
                        s
                    })
                }
                (
                    Just(d.clone()),
                    series_strategy(d.clone(), 2, 8, 3),
                    zero_constant(d.clone()),
                    zero_constant(d.clone()),
                    zero_constant(d.clone()),
                    zero_constant(d),
                )
            })
        ) {
            let _ = &d;
            let gs = [g1, g2];
            let hs = [h1.clone(), h2.clone()];
            let by_powers = f.compose(&gs).unwrap();
            let by_horner = f.compose_horner(&gs).unwrap();
            prop_assert_eq!(&by_powers, &by_horner);

            // f o (G o H) == (f o G) o H
            let g_of_h: Vec<TateSeries> =
                gs.iter().map(|g| g.compose(&hs).unwrap()).collect();
            let lhs = f.compose(&g_of_h).unwrap();
            let rhs = f.compose(&gs).unwrap().compose(&hs).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
