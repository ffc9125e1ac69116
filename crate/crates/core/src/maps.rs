//! Polynomial and Tate maps, Jacobian matrices, and division-free
//! determinants.
//!
//! A [`PolyMap`] is a square tuple of series: `n` components in `n`
//! variables over a shared domain and cap. Composition follows
//! `(F o G)(X) = F(G(X))` everywhere.
//!
//! Determinants are computed division-free (coefficient rings such as
//! `Z/m^N` have zero divisors, so elimination is unsound); a subset dynamic
//! program over column minors keeps desk-scale dimensions cheap.

use std::fmt;

use crate::domain::{AdicElement, Domain, Valuation};
use crate::error::{Error, Result};
use crate::series::{EvalOutcome, MultiIndex, TateSeries};

/// Default dimension limit for determinant expansion.
pub const DEFAULT_DET_LIMIT: usize = 8;

/// An `n`-tuple of series in `n` variables over a shared domain and cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMap {
    components: Vec<TateSeries>,
}

impl PolyMap {
    pub fn new(components: Vec<TateSeries>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::VariableCountMismatch {
                expected: 1,
                found: 0,
            });
        }
        let domain = components[0].domain().clone();
        let cap = components[0].degree_cap();
        if cap < 2 {
            return Err(Error::InvalidDegreeCap {
                cap,
                reason: "a map needs degree cap >= 2 to store its linear part".into(),
            });
        }
        for c in &components {
            if c.variable_count() != n {
                return Err(Error::VariableCountMismatch {
                    expected: n,
                    found: c.variable_count(),
                });
            }
            domain.check_same(c.domain())?;
            if c.degree_cap() != cap {
                return Err(Error::InvalidDegreeCap {
                    cap: c.degree_cap(),
                    reason: format!("components must share a degree cap (expected {cap})"),
                });
            }
        }
        Ok(PolyMap { components })
    }

    pub fn identity(domain: &Domain, n: usize, cap: u32) -> Result<Self> {
        let components = (0..n)
            .map(|i| TateSeries::variable(domain, n, i, cap))
            .collect::<Result<_>>()?;
        PolyMap::new(components)
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn degree_cap(&self) -> u32 {
        self.components[0].degree_cap()
    }

    pub fn domain(&self) -> &Domain {
        self.components[0].domain()
    }

    pub fn components(&self) -> &[TateSeries] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &TateSeries {
        &self.components[i]
    }

    pub fn is_exact(&self) -> bool {
        self.components.iter().all(|c| c.is_exact())
    }

    pub fn max_total_degree(&self) -> Option<u32> {
        self.components.iter().filter_map(|c| c.max_total_degree()).max()
    }

    /// Minimum coefficient valuation across all components.
    pub fn min_valuation(&self) -> Valuation {
        self.components
            .iter()
            .map(|c| c.min_valuation())
            .min()
            .unwrap_or(Valuation::Top)
    }

    pub fn constant_vector(&self) -> Vec<AdicElement> {
        self.components.iter().map(|c| c.constant_term()).collect()
    }

    pub fn has_zero_constant_terms(&self) -> bool {
        self.components.iter().all(|c| c.constant_term().is_zero())
    }

    /// The degree-1 coefficient matrix `L[i][j] = [x_j] F_i`.
    pub fn linear_matrix(&self) -> ScalarMatrix {
        let n = self.dimension();
        let entries = (0..n)
            .flat_map(|i| {
                (0..n).map(move |j| self.components[i].coefficient(&MultiIndex::variable(n, j)))
            })
            .collect();
        ScalarMatrix {
            n,
            domain: self.domain().clone(),
            entries,
        }
    }

    pub fn has_identity_linear_part(&self) -> bool {
        self.linear_matrix().is_identity()
    }

    /// Componentwise sum; used to perturb maps.
    pub fn add(&self, other: &PolyMap) -> Result<PolyMap> {
        if other.dimension() != self.dimension() {
            return Err(Error::VariableCountMismatch {
                expected: self.dimension(),
                found: other.dimension(),
            });
        }
        PolyMap::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect::<Result<_>>()?,
        )
    }

    pub fn sub(&self, other: &PolyMap) -> Result<PolyMap> {
        if other.dimension() != self.dimension() {
            return Err(Error::VariableCountMismatch {
                expected: self.dimension(),
                found: other.dimension(),
            });
        }
        PolyMap::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(b))
                .collect::<Result<_>>()?,
        )
    }

    /// `(self o other)(X) = self(other(X))`. The substituted map must have
    /// vanishing constant terms.
    pub fn compose(&self, other: &PolyMap) -> Result<PolyMap> {
        if other.dimension() != self.dimension() {
            return Err(Error::VariableCountMismatch {
                expected: self.dimension(),
                found: other.dimension(),
            });
        }
        PolyMap::new(
            self.components
                .iter()
                .map(|c| c.compose(other.components()))
                .collect::<Result<_>>()?,
        )
    }

    /// True when every component equals `x_i` exactly in the truncated ring.
    pub fn is_identity(&self) -> bool {
        self.components.iter().enumerate().all(|(i, c)| {
            match PolyMap::identity(self.domain(), self.dimension(), self.degree_cap()) {
                Ok(id) => c == id.component(i),
                Err(_) => false,
            }
        })
    }

    /// Jacobian matrix `(d F_i / d x_j)`, at cap one less than the map's.
    pub fn jacobian(&self) -> Result<SeriesMatrix> {
        let n = self.dimension();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(self.components[i].derive(j)?);
            }
        }
        Ok(SeriesMatrix {
            n,
            domain: self.domain().clone(),
            cap: self.degree_cap() - 1,
            entries,
        })
    }

    /// Componentwise evaluation; see [`TateSeries::eval`].
    pub fn eval(&self, point: &[AdicElement], window: Option<u32>) -> Result<Vec<EvalOutcome>> {
        self.components.iter().map(|c| c.eval(point, window)).collect()
    }

    pub fn with_cap(&self, cap: u32) -> Result<PolyMap> {
        PolyMap::new(
            self.components
                .iter()
                .map(|c| c.with_cap(cap))
                .collect::<Result<_>>()?,
        )
    }

    pub fn change_domain(&self, target: &Domain) -> Result<PolyMap> {
        PolyMap::new(
            self.components
                .iter()
                .map(|c| c.change_domain(target))
                .collect::<Result<_>>()?,
        )
    }

    pub fn lift_canonical(&self, target: &Domain) -> Result<PolyMap> {
        PolyMap::new(
            self.components
                .iter()
                .map(|c| c.lift_canonical(target))
                .collect::<Result<_>>()?,
        )
    }

    /// See [`TateSeries::reinterpret_integral`].
    pub fn reinterpret_integral(&self, target: &Domain) -> Result<PolyMap> {
        PolyMap::new(
            self.components
                .iter()
                .map(|c| c.reinterpret_integral(target))
                .collect::<Result<_>>()?,
        )
    }

    /// Affine normalization: split `F` as `F = shift + L * F'` where `F'`
    /// has zero constant term and identity linear part.
    ///
    /// Requires the linear-part determinant to be a unit of the coefficient
    /// ring. An inverse `G'` of `F'` then yields the inverse of `F` as
    /// `X -> G'(L^{-1} (X - shift))`.
    pub fn normalize(&self) -> Result<NormalizedMap> {
        let shift = self.constant_vector();
        let linear = self.linear_matrix();
        let linear_inverse = linear.invert()?;
        let n = self.dimension();
        // F'_i = sum_j Linv[i][j] (F_j - shift_j)
        let centered: Vec<TateSeries> = (0..n)
            .map(|j| {
                let c = TateSeries::constant(
                    self.domain(),
                    n,
                    self.degree_cap(),
                    &shift[j],
                )?;
                self.components[j].sub(&c)
            })
            .collect::<Result<_>>()?;
        let mut components = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = TateSeries::zero(self.domain(), n, self.degree_cap())?;
            for (j, series) in centered.iter().enumerate() {
                acc = acc.add(&series.scalar_mul(linear_inverse.entry(i, j))?)?;
            }
            components.push(acc);
        }
        Ok(NormalizedMap {
            map: PolyMap::new(components)?,
            shift,
            linear,
        })
    }
}

impl fmt::Display for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Result of [`PolyMap::normalize`]: the normalized map plus the affine data
/// needed to reconstruct the original (or its inverse).
#[derive(Debug, Clone)]
pub struct NormalizedMap {
    pub map: PolyMap,
    pub shift: Vec<AdicElement>,
    pub linear: ScalarMatrix,
}

impl NormalizedMap {
    /// Reconstruct the original map: `F_i = shift_i + sum_j L[i][j] F'_j`.
    pub fn denormalize(&self) -> Result<PolyMap> {
        let n = self.map.dimension();
        let cap = self.map.degree_cap();
        let domain = self.map.domain();
        let mut components = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = TateSeries::constant(domain, n, cap, &self.shift[i])?;
            for j in 0..n {
                acc = acc.add(&self.map.component(j).scalar_mul(self.linear.entry(i, j))?)?;
            }
            components.push(acc);
        }
        PolyMap::new(components)
    }
}

/// A square matrix of ring elements (the linear part of a map).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarMatrix {
    n: usize,
    domain: Domain,
    entries: Vec<AdicElement>,
}

impl ScalarMatrix {
    pub fn from_rows(domain: &Domain, rows: Vec<Vec<AdicElement>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::VariableCountMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for e in row {
                domain.check_same(e.domain())?;
                entries.push(e);
            }
        }
        Ok(ScalarMatrix {
            n,
            domain: domain.clone(),
            entries,
        })
    }

    pub fn identity(domain: &Domain, n: usize) -> Self {
        let entries = (0..n * n)
            .map(|k| {
                if k / n == k % n {
                    domain.one()
                } else {
                    domain.zero()
                }
            })
            .collect();
        ScalarMatrix {
            n,
            domain: domain.clone(),
            entries,
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &AdicElement {
        &self.entries[i * self.n + j]
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                let e = self.entry(i, j);
                if i == j {
                    e.is_one()
                } else {
                    e.is_zero()
                }
            })
        })
    }

    /// Division-free cofactor determinant.
    pub fn det(&self) -> Result<AdicElement> {
        // Work on index lists to avoid materializing minors.
        fn rec(m: &ScalarMatrix, row: usize, cols: &mut Vec<usize>) -> Result<AdicElement> {
            if cols.is_empty() {
                return Ok(m.domain.one());
            }
            let mut acc = m.domain.zero();
            for k in 0..cols.len() {
                let col = cols.remove(k);
                let factor = m.entry(row, col);
                if !factor.is_zero() {
                    let minor = rec(m, row + 1, cols)?;
                    let term = factor.mul(&minor)?;
                    acc = if k % 2 == 0 {
                        acc.add(&term)?
                    } else {
                        acc.sub(&term)?
                    };
                }
                cols.insert(k, col);
            }
            Ok(acc)
        }
        let mut cols: Vec<usize> = (0..self.n).collect();
        rec(self, 0, &mut cols)
    }

    /// Inverse via the adjugate: requires the determinant to be a unit.
    pub fn invert(&self) -> Result<ScalarMatrix> {
        let det = self.det()?;
        if !det.is_unit() {
            return Err(Error::LinearPartNotInvertible(format!(
                "determinant {det} is not a unit in {}",
                self.domain
            )));
        }
        let det_inv = det.invert_unit()?;
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                // adj[i][j] = (-1)^{i+j} det(minor_{j,i})
                let minor = self.minor(j, i)?;
                let mut c = minor.det()?.mul(&det_inv)?;
                if (i + j) % 2 == 1 {
                    c = c.neg();
                }
                entries.push(c);
            }
        }
        Ok(ScalarMatrix {
            n,
            domain: self.domain.clone(),
            entries,
        })
    }

    fn minor(&self, drop_row: usize, drop_col: usize) -> Result<ScalarMatrix> {
        let n = self.n;
        let mut entries = Vec::with_capacity((n - 1) * (n - 1));
        for i in 0..n {
            if i == drop_row {
                continue;
            }
            for j in 0..n {
                if j == drop_col {
                    continue;
                }
                entries.push(self.entry(i, j).clone());
            }
        }
        Ok(ScalarMatrix {
            n: n - 1,
            domain: self.domain.clone(),
            entries,
        })
    }

    pub fn apply(&self, v: &[AdicElement]) -> Result<Vec<AdicElement>> {
        if v.len() != self.n {
            return Err(Error::VariableCountMismatch {
                expected: self.n,
                found: v.len(),
            });
        }
        (0..self.n)
            .map(|i| {
                let mut acc = self.domain.zero();
                for j in 0..self.n {
                    acc = acc.add(&self.entry(i, j).mul(&v[j])?)?;
                }
                Ok(acc)
            })
            .collect()
    }

    pub fn rows(&self) -> Vec<Vec<AdicElement>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.entry(i, j).clone()).collect())
            .collect()
    }

    /// The matrix as a linear map at the given cap.
    pub fn as_linear_map(&self, cap: u32) -> Result<PolyMap> {
        let n = self.n;
        let mut components = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = TateSeries::zero(&self.domain, n, cap)?;
            for j in 0..n {
                let x_j = TateSeries::variable(&self.domain, n, j, cap)?;
                acc = acc.add(&x_j.scalar_mul(self.entry(i, j))?)?;
            }
            components.push(acc);
        }
        PolyMap::new(components)
    }
}

/// A square matrix of series over a shared domain and cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesMatrix {
    n: usize,
    domain: Domain,
    cap: u32,
    entries: Vec<TateSeries>,
}

impl SeriesMatrix {
    pub fn from_rows(rows: Vec<Vec<TateSeries>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::VariableCountMismatch {
                expected: 1,
                found: 0,
            });
        }
        let domain = rows[0][0].domain().clone();
        let cap = rows[0][0].degree_cap();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::VariableCountMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for e in row {
                domain.check_same(e.domain())?;
                if e.degree_cap() != cap {
                    return Err(Error::InvalidDegreeCap {
                        cap: e.degree_cap(),
                        reason: format!("matrix entries must share a degree cap (expected {cap})"),
                    });
                }
                entries.push(e);
            }
        }
        Ok(SeriesMatrix {
            n,
            domain,
            cap,
            entries,
        })
    }

    pub fn identity(domain: &Domain, n: usize, vars: usize, cap: u32) -> Result<Self> {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(if i == j {
                    TateSeries::one(domain, vars, cap)?
                } else {
                    TateSeries::zero(domain, vars, cap)?
                });
            }
        }
        Ok(SeriesMatrix {
            n,
            domain: domain.clone(),
            cap,
            entries,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn degree_cap(&self) -> u32 {
        self.cap
    }

    pub fn entry(&self, i: usize, j: usize) -> &TateSeries {
        &self.entries[i * self.n + j]
    }

    /// Division-free determinant at the default dimension limit.
    pub fn det(&self) -> Result<TateSeries> {
        self.det_with_limit(DEFAULT_DET_LIMIT)
    }

    /// Determinant by a dynamic program over column subsets: `minors[S]`
    /// holds the minor of the first `|S|` rows and column set `S`. This is a
    /// signed Laplace expansion, so it needs no divisions and is independent
    /// of expansion order.
    pub fn det_with_limit(&self, limit: usize) -> Result<TateSeries> {
        if self.n > limit {
            return Err(Error::DimensionLimit {
                dim: self.n,
                limit,
            });
        }
        let n = self.n;
        let vars = self.entries[0].variable_count();
        let zero = TateSeries::zero(&self.domain, vars, self.cap)?;
        let full = 1usize << n;
        let mut minors: Vec<Option<TateSeries>> = vec![None; full];
        minors[0] = Some(TateSeries::one(&self.domain, vars, self.cap)?);
        for mask in 1..full {
            let row = (mask as u32).count_ones() as usize - 1;
            let mut acc = zero.clone();
            let mut sign_pos = 0usize;
            for col in 0..n {
                if mask & (1 << col) == 0 {
                    continue;
                }
                let sub = mask & !(1 << col);
                let prev = minors[sub].as_ref().expect("minor computed in order");
                let factor = self.entry(row, col);
                if !factor.is_zero() || !factor.is_exact() {
                    let term = factor.mul(prev)?;
                    acc = if (row + sign_pos) % 2 == 0 {
                        acc.add(&term)?
                    } else {
                        acc.sub(&term)?
                    };
                }
                sign_pos += 1;
            }
            minors[mask] = Some(acc);
        }
        Ok(minors[full - 1].take().expect("full minor computed"))
    }

    /// Matrix product.
    pub fn matrix_mul(&self, other: &SeriesMatrix) -> Result<SeriesMatrix> {
        if other.n != self.n {
            return Err(Error::VariableCountMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let vars = self.entries[0].variable_count();
        let cap = self.cap.min(other.cap);
        let mut entries = Vec::with_capacity(self.n * self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = TateSeries::zero(&self.domain, vars, cap)?;
                for k in 0..self.n {
                    acc = acc.add(&self.entry(i, k).mul(other.entry(k, j))?)?;
                }
                entries.push(acc);
            }
        }
        Ok(SeriesMatrix {
            n: self.n,
            domain: self.domain.clone(),
            cap,
            entries,
        })
    }

    /// Entrywise substitution of a map into every entry.
    pub fn compose(&self, map: &PolyMap) -> Result<SeriesMatrix> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.compose(map.components()))
            .collect::<Result<Vec<_>>>()?;
        let cap = entries[0].degree_cap();
        Ok(SeriesMatrix {
            n: self.n,
            domain: self.domain.clone(),
            cap,
            entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::UnitCheck;
    use proptest::prelude::*;

    fn q() -> Domain {
        Domain::rational()
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

    /// The elementary map (x1 + x2^2, x2).
    fn elementary(domain: &Domain, cap: u32, sign: i64) -> PolyMap {
        PolyMap::new(vec![
            biv(domain, cap, &[([1, 0], 1), ([0, 2], sign)]),
            biv(domain, cap, &[([0, 1], 1)]),
        ])
        .unwrap()
    }

    #[test]
    fn jacobian_of_elementary_map() {
        let f = elementary(&q(), 6, 1);
        let jac = f.jacobian().unwrap();
        assert_eq!(jac.entry(0, 0), &TateSeries::one(&q(), 2, 5).unwrap());
        assert_eq!(jac.entry(0, 1), &biv(&q(), 5, &[([0, 1], 2)]));
        assert!(jac.entry(1, 0).is_zero());
        assert_eq!(jac.entry(1, 1), &TateSeries::one(&q(), 2, 5).unwrap());
        assert_eq!(jac.det().unwrap(), TateSeries::one(&q(), 2, 5).unwrap());
    }

    #[test]
    fn jacobian_of_identity_is_identity_matrix() {
        let id = PolyMap::identity(&q(), 3, 5).unwrap();
        let jac = id.jacobian().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(jac.entry(i, j).is_zero(), i != j);
            }
        }
        assert_eq!(jac.det().unwrap(), TateSeries::one(&q(), 3, 4).unwrap());
    }

    #[test]
    fn jacobian_of_char_p_counterexample_shape() {
        // d/dx (x - x^c) = 1 - c x^{c-1}
        let d = Domain::exact_integer(3).unwrap();
        let f = PolyMap::new(vec![TateSeries::from_terms(
            &d,
            1,
            8,
            [
                (MultiIndex::new(vec![1]), d.element_from_int(1)),
                (MultiIndex::new(vec![3]), d.element_from_int(-1)),
            ],
        )
        .unwrap()])
        .unwrap();
        let det = f.jacobian().unwrap().det().unwrap();
        let expected = TateSeries::from_terms(
            &d,
            1,
            7,
            [
                (MultiIndex::new(vec![0]), d.element_from_int(1)),
                (MultiIndex::new(vec![2]), d.element_from_int(-3)),
            ],
        )
        .unwrap();
        assert_eq!(det, expected);
        assert!(matches!(det.unit_check(), UnitCheck::Unit));
    }

    #[test]
    fn det_rejects_oversized_matrices() {
        let id = PolyMap::identity(&q(), 2, 4).unwrap().jacobian().unwrap();
        assert!(matches!(
            id.det_with_limit(1),
            Err(Error::DimensionLimit { dim: 2, limit: 1 })
        ));
    }

    #[test]
    fn two_by_two_determinant() {
        let one = TateSeries::one(&q(), 2, 5).unwrap();
        let m = SeriesMatrix::from_rows(vec![
            vec![one.clone(), biv(&q(), 5, &[([0, 1], 2)])],
            vec![TateSeries::zero(&q(), 2, 5).unwrap(), one.clone()],
        ])
        .unwrap();
        assert_eq!(m.det().unwrap(), one);
    }

    #[test]
    fn map_compose_with_identity() {
        let f = elementary(&q(), 6, 1);
        let id = PolyMap::identity(&q(), 2, 6).unwrap();
        assert_eq!(f.compose(&id).unwrap(), f);
    }

    #[test]
    fn elementary_map_composes_with_its_inverse() {
        let f = elementary(&q(), 6, 1);
        let g = elementary(&q(), 6, -1);
        assert!(f.compose(&g).unwrap().is_identity());
        assert!(g.compose(&f).unwrap().is_identity());
    }

    #[test]
    fn is_identity_respects_coefficient_precision() {
        let d = Domain::truncated(5, 2).unwrap();
        // x + 25 x^3 == x mod 5^2
        let f = PolyMap::new(vec![TateSeries::from_terms(
            &d,
            1,
            5,
            [
                (MultiIndex::new(vec![1]), d.element_from_int(1)),
                (MultiIndex::new(vec![3]), d.element_from_int(25)),
            ],
        )
        .unwrap()])
        .unwrap();
        assert!(f.is_identity());
        assert!(!elementary(&q(), 6, 1).is_identity());
    }

    #[test]
    fn normalize_univariate_affine_example() {
        // f = 3 + 2x + x^2 over Q: f' = x + x^2/2, shift 3, linear (2).
        let q = q();
        let f = PolyMap::new(vec![TateSeries::from_terms(
            &q,
            1,
            6,
            [
                (MultiIndex::new(vec![0]), q.element_from_int(3)),
                (MultiIndex::new(vec![1]), q.element_from_int(2)),
                (MultiIndex::new(vec![2]), q.element_from_int(1)),
            ],
        )
        .unwrap()])
        .unwrap();
        let norm = f.normalize().unwrap();
        assert_eq!(norm.shift, vec![q.element_from_int(3)]);
        assert_eq!(norm.linear.entry(0, 0), &q.element_from_int(2));
        let half = q.element_from_ratio(1.into(), 2.into()).unwrap();
        let expected = PolyMap::new(vec![TateSeries::from_terms(
            &q,
            1,
            6,
            [
                (MultiIndex::new(vec![1]), q.one()),
                (MultiIndex::new(vec![2]), half),
            ],
        )
        .unwrap()])
        .unwrap();
        assert_eq!(norm.map, expected);
        assert_eq!(norm.denormalize().unwrap(), f);
    }

    #[test]
    fn normalize_fixed_point_and_swap() {
        let f = elementary(&q(), 6, 1);
        let norm = f.normalize().unwrap();
        assert_eq!(norm.map, f);
        assert!(norm.shift.iter().all(|s| s.is_zero()));
        assert!(norm.linear.is_identity());

        let swap = PolyMap::new(vec![
            biv(&q(), 5, &[([0, 1], 1)]),
            biv(&q(), 5, &[([1, 0], 1)]),
        ])
        .unwrap();
        let norm = swap.normalize().unwrap();
        assert!(norm.map.is_identity());
        assert!(norm.linear.entry(0, 0).is_zero());
        assert!(norm.linear.entry(0, 1).is_one());
        assert_eq!(norm.denormalize().unwrap(), swap);
    }

    #[test]
    fn normalize_rejects_non_unit_linear_part() {
        let d = Domain::exact_integer(5).unwrap();
        // linear part (2) is not a unit of exact Z
        let f = PolyMap::new(vec![TateSeries::from_terms(
            &d,
            1,
            4,
            [(MultiIndex::new(vec![1]), d.element_from_int(2))],
        )
        .unwrap()])
        .unwrap();
        assert!(matches!(
            f.normalize(),
            Err(Error::LinearPartNotInvertible(_))
        ));
    }

    #[test]
    fn scalar_matrix_inverse_roundtrip() {
        let d = Domain::truncated(7, 2).unwrap();
        let m = ScalarMatrix::from_rows(
            &d,
            vec![
                vec![d.element_from_int(2), d.element_from_int(3)],
                vec![d.element_from_int(1), d.element_from_int(4)],
            ],
        )
        .unwrap();
        let inv = m.invert().unwrap();
        let v = vec![d.element_from_int(5), d.element_from_int(11)];
        let back = inv.apply(&m.apply(&v).unwrap()).unwrap();
        assert_eq!(back, v);
    }

    // Test-only Leibniz determinant: sum over permutations with signs.
    fn leibniz_det(m: &SeriesMatrix) -> TateSeries {
        fn permutations(k: usize) -> Vec<(Vec<usize>, i32)> {
            if k == 0 {
                return vec![(vec![], 1)];
            }
            let mut out = Vec::new();
            for (perm, sign) in permutations(k - 1) {
                for slot in 0..=perm.len() {
                    let mut p = perm.clone();
                    p.insert(slot, k - 1);
                    // moving element k-1 left by (len - slot) transpositions
                    let flips = (perm.len() - slot) as i32;
                    out.push((p, sign * if flips % 2 == 0 { 1 } else { -1 }));
                }
            }
            out
        }
        let n = m.dimension();
        let vars = m.entry(0, 0).variable_count();
        let mut acc = TateSeries::zero(m.entry(0, 0).domain(), vars, m.degree_cap()).unwrap();
        for (perm, sign) in permutations(n) {
            let mut term = TateSeries::one(m.entry(0, 0).domain(), vars, m.degree_cap()).unwrap();
            for (row, &col) in perm.iter().enumerate() {
                term = term.mul(m.entry(row, col)).unwrap();
            }
            acc = if sign > 0 {
                acc.add(&term).unwrap()
            } else {
                acc.sub(&term).unwrap()
            };
        }
        acc
    }

    fn series_strategy(n: usize, cap: u32, max_deg: u32) -> impl Strategy<Value = TateSeries> {
        let term = (prop::collection::vec(0u32..=max_deg, n), -6i64..=6);
        prop::collection::vec(term, 0..4).prop_map(move |terms| {
            let d = Domain::rational();
            TateSeries::from_terms(
                &d,
                n,
                cap,
                terms.into_iter().filter_map(|(e, c)| {
                    let idx = MultiIndex::new(e);
                    (idx.total_degree() < cap).then(|| (idx, d.element_from_int(c)))
                }),
            )
            .unwrap()
        })
    }

    fn zero_constant_map(n: usize, cap: u32, max_deg: u32) -> impl Strategy<Value = PolyMap> {
        prop::collection::vec(series_strategy(n, cap, max_deg), n).prop_map(move |mut cs| {
            let d = Domain::rational();
            for (i, c) in cs.iter_mut().enumerate() {
                let constant =
                    TateSeries::constant(&d, n, cap, &c.constant_term()).unwrap();
                *c = c.sub(&constant).unwrap();
                // keep the linear part invertible-ish by adding x_i
                let xi = TateSeries::variable(&d, n, i, cap).unwrap();
                *c = c.add(&xi).unwrap();
            }
            PolyMap::new(cs).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn determinant_matches_leibniz_expansion(
            rows in prop::collection::vec(
                prop::collection::vec(series_strategy(2, 5, 3), 3),
                3,
            )
        ) {
            let m = SeriesMatrix::from_rows(rows).unwrap();
            prop_assert_eq!(m.det().unwrap(), leibniz_det(&m));
        }

        #[test]
        fn determinant_is_multiplicative(
            rows_a in prop::collection::vec(
                prop::collection::vec(series_strategy(2, 5, 2), 2),
                2,
            ),
            rows_b in prop::collection::vec(
                prop::collection::vec(series_strategy(2, 5, 2), 2),
                2,
            ),
        ) {
            let a = SeriesMatrix::from_rows(rows_a).unwrap();
            let b = SeriesMatrix::from_rows(rows_b).unwrap();
            let lhs = a.matrix_mul(&b).unwrap().det().unwrap();
            let rhs = a.det().unwrap().mul(&b.det().unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        // J(F o G) = (JF o G) * JG
        #[test]
        fn chain_rule(
            f in zero_constant_map(2, 8, 3),
            g in zero_constant_map(2, 8, 3),
        ) {
            let comp = f.compose(&g).unwrap();
            let lhs = comp.jacobian().unwrap();
            let rhs = f
                .jacobian()
                .unwrap()
                .compose(&g)
                .unwrap()
                .matrix_mul(&g.jacobian().unwrap())
                .unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert_eq!(lhs.entry(i, j), rhs.entry(i, j));
                }
            }
        }

        #[test]
        fn normalize_roundtrips(f in zero_constant_map(2, 6, 3)) {
            // shift the map by constants to exercise the affine part
            let d = Domain::rational();
            let c0 = TateSeries::constant(&d, 2, 6, &d.element_from_int(3)).unwrap();
            let c1 = TateSeries::constant(&d, 2, 6, &d.element_from_int(-2)).unwrap();
            let shifted = PolyMap::new(vec![
                f.component(0).add(&c0).unwrap(),
                f.component(1).add(&c1).unwrap(),
            ])
            .unwrap();
            if let Ok(norm) = shifted.normalize() {
                prop_assert!(norm.map.has_zero_constant_terms());
                prop_assert!(norm.map.has_identity_linear_part());
                prop_assert_eq!(norm.denormalize().unwrap(), shifted);
            }
        }
    }
}
