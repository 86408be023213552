//! Sparse homogeneous multivariate polynomials over an exact coefficient ring.
//!
//! A polynomial in `n+1` variables carries its declared homogeneous degree;
//! the zero polynomial is an empty term map of any declared degree. Terms are
//! keyed by exponent vectors ordered graded-lexicographically (higher power of
//! the first variable first within a degree), which fixes a canonical basis
//! for every coefficient-vector encoding in the crate.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::comb::{binomial, monomial_count};
use crate::error::{Error, Result};
use crate::field::Ring;

/// Exponent vector of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExpVec(Vec<u8>);

impl ExpVec {
    pub fn new(exps: Vec<u8>) -> Self {
        ExpVec(exps)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn exps(&self) -> &[u8] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    /// Product of monomials.
    pub fn add_exps(&self, other: &ExpVec) -> ExpVec {
        debug_assert_eq!(self.0.len(), other.0.len());
        ExpVec(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

/// Graded order, ties broken so that within a degree the monomial with the
/// larger power of the earliest variable comes first (x0^e, x0^{e-1}x1, ...).
impl Ord for ExpVec {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for ExpVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The ordered monomial basis of one graded piece, with O(nvars) rank lookup
/// backed by a precomputed binomial table.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    nvars: usize,
    degree: u32,
    list: Vec<ExpVec>,
    /// binom[n][k] for n up to degree + nvars, k up to nvars.
    binom: Vec<Vec<u64>>,
}

impl MonomialBasis {
    pub fn new(nvars: usize, degree: u32) -> Self {
        assert!(nvars >= 1);
        let mut list = Vec::with_capacity(monomial_count(nvars, degree) as usize);
        let mut current = vec![0u8; nvars];
        emit(&mut list, &mut current, 0, degree);
        let rows = degree as usize + nvars + 1;
        let cols = nvars + 1;
        let mut binom = vec![vec![0u64; cols]; rows];
        for (n, row) in binom.iter_mut().enumerate() {
            for (k, slot) in row.iter_mut().enumerate().take(n + 1) {
                *slot = binomial(n as u64, k as u64);
            }
        }
        MonomialBasis {
            nvars,
            degree,
            list,
            binom,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn get(&self, i: usize) -> &ExpVec {
        &self.list[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ExpVec> {
        self.list.iter()
    }

    /// Rank of a monomial in this basis, computed combinatorially.
    pub fn index_of(&self, m: &ExpVec) -> usize {
        self.index_of_exps(&m.0)
    }

    /// Rank from a raw exponent slice. Monomials with a larger exponent at
    /// an earlier position come first; their count telescopes to a single
    /// binomial per position.
    #[inline]
    pub fn index_of_exps(&self, exps: &[u8]) -> usize {
        debug_assert_eq!(exps.len(), self.nvars);
        debug_assert_eq!(exps.iter().map(|&e| e as u32).sum::<u32>(), self.degree);
        let mut rank = 0u64;
        let mut remaining = self.degree as usize;
        for (pos, &exp) in exps.iter().enumerate().take(self.nvars - 1) {
            let e = exp as usize;
            // sum over t in (e, remaining] of the monomial counts in the
            // remaining variables collapses to one binomial
            let v = self.nvars - 1 - pos;
            if remaining > e {
                rank += self.binom[remaining - e - 1 + v][v];
            }
            remaining -= e;
        }
        rank as usize
    }
}

fn emit(list: &mut Vec<ExpVec>, current: &mut [u8], pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining as u8;
        list.push(ExpVec(current.to_vec()));
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e as u8;
        emit(list, current, pos + 1, remaining - e);
    }
}

/// All exponent vectors of total degree `e` in `n+1` variables, in the
/// canonical graded-lexicographic order. `n` is the projective dimension.
pub fn monomial_basis(n: usize, e: u32) -> Vec<ExpVec> {
    MonomialBasis::new(n + 1, e).list
}

/// Sparse homogeneous polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<F: Ring> {
    field: F,
    nvars: usize,
    degree: u32,
    terms: BTreeMap<ExpVec, F::Elem>,
}

impl<F: Ring> Poly<F> {
    pub fn zero(field: F, nvars: usize, degree: u32) -> Self {
        Poly {
            field,
            nvars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(field: F, nvars: usize, c: F::Elem) -> Self {
        let mut p = Poly::zero(field, nvars, 0);
        if !p.field.is_zero(&c) {
            p.terms.insert(ExpVec(vec![0; nvars]), c);
        }
        p
    }

    pub fn one(field: F, nvars: usize) -> Self {
        let c = field.one();
        Poly::constant(field, nvars, c)
    }

    /// The variable x_i as a degree-1 polynomial.
    pub fn variable(field: F, nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut exps = vec![0u8; nvars];
        exps[i] = 1;
        let one = field.one();
        Poly::monomial(field, ExpVec(exps), one)
    }

    pub fn monomial(field: F, exps: ExpVec, c: F::Elem) -> Self {
        let degree = exps.degree();
        let nvars = exps.nvars();
        let mut terms = BTreeMap::new();
        if !field.is_zero(&c) {
            terms.insert(exps, c);
        }
        Poly {
            field,
            nvars,
            degree,
            terms,
        }
    }

    /// Builds from terms, validating homogeneity and dropping zeros.
    pub fn from_terms(
        field: F,
        nvars: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (ExpVec, F::Elem)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (e, c) in terms {
            if e.nvars() != nvars {
                return Err(Error::Shape(format!(
                    "monomial in {} variables, expected {nvars}",
                    e.nvars()
                )));
            }
            if e.degree() != degree {
                return Err(Error::Shape(format!(
                    "monomial of degree {}, expected {degree}",
                    e.degree()
                )));
            }
            if field.is_zero(&c) {
                continue;
            }
            if map.insert(e, c).is_some() {
                return Err(Error::Shape("duplicate monomial".into()));
            }
        }
        Ok(Poly {
            field,
            nvars,
            degree,
            terms: map,
        })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExpVec, &F::Elem)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &ExpVec) -> F::Elem {
        self.terms
            .get(e)
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        if self.nvars != other.nvars {
            return Err(Error::Shape(format!(
                "{} vs {} variables",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if self.degree != other.degree {
            return Err(Error::Shape(format!(
                "adding degrees {} and {}",
                self.degree, other.degree
            )));
        }
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            match terms.get_mut(e) {
                Some(x) => {
                    *x = self.field.add(x, c);
                    if self.field.is_zero(x) {
                        terms.remove(e);
                    }
                }
                None => {
                    terms.insert(e.clone(), c.clone());
                }
            }
        }
        Ok(Poly {
            field: self.field.clone(),
            nvars: self.nvars,
            degree: self.degree,
            terms,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), self.field.neg(c)))
            .collect();
        Poly {
            field: self.field.clone(),
            nvars: self.nvars,
            degree: self.degree,
            terms,
        }
    }

    pub fn scal_mul(&self, c: &F::Elem) -> Self {
        if self.field.is_zero(c) {
            return Poly::zero(self.field.clone(), self.nvars, self.degree);
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, x)| (e.clone(), self.field.mul(c, x)))
            .collect();
        Poly {
            field: self.field.clone(),
            nvars: self.nvars,
            degree: self.degree,
            terms,
        }
    }

    /// Exact product. Accumulates into a dense coefficient table of the
    /// target degree, which keeps term collection linear.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let degree = self.degree + other.degree;
        if self.is_zero() || other.is_zero() {
            return Ok(Poly::zero(self.field.clone(), self.nvars, degree));
        }
        let basis = MonomialBasis::new(self.nvars, degree);
        let mut acc: Vec<F::Elem> = vec![self.field.zero(); basis.len()];
        let mut buf = [0u8; 8];
        assert!(self.nvars <= 8, "exponent buffer limit");
        let buf = &mut buf[..self.nvars];
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                for ((t, x), y) in buf.iter_mut().zip(ea.exps()).zip(eb.exps()) {
                    *t = x + y;
                }
                let idx = basis.index_of_exps(buf);
                self.field.add_mul_assign(&mut acc[idx], ca, cb);
            }
        }
        let mut terms = BTreeMap::new();
        for (i, c) in acc.into_iter().enumerate() {
            if !self.field.is_zero(&c) {
                terms.insert(basis.get(i).clone(), c);
            }
        }
        Ok(Poly {
            field: self.field.clone(),
            nvars: self.nvars,
            degree,
            terms,
        })
    }

    /// Formal partial derivative with respect to x_i.
    pub fn partial(&self, i: usize) -> Self {
        assert!(i < self.nvars, "variable index out of range");
        let degree = self.degree.saturating_sub(1);
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let ei = e.0[i];
            if ei == 0 {
                continue;
            }
            let mut exps = e.0.clone();
            exps[i] -= 1;
            let coeff = self.field.mul(c, &self.field.from_i64(ei as i64));
            if !self.field.is_zero(&coeff) {
                terms.insert(ExpVec(exps), coeff);
            }
        }
        Poly {
            field: self.field.clone(),
            nvars: self.nvars,
            degree,
            terms,
        }
    }

    /// Checks the Euler identity sum_i x_i dP/dx_i = deg(P) * P.
    pub fn euler_identity_check(&self) -> bool {
        let mut lhs = Poly::zero(self.field.clone(), self.nvars, self.degree);
        for i in 0..self.nvars {
            let xi = Poly::variable(self.field.clone(), self.nvars, i);
            let term = self.partial(i).mul(&xi).expect("same ring");
            if term.is_zero() {
                continue;
            }
            lhs = lhs.add(&term).expect("same degree");
        }
        let rhs = self.scal_mul(&self.field.from_i64(self.degree as i64));
        lhs == rhs
    }

    /// Dense coefficient vector in the canonical monomial order.
    pub fn to_coords(&self, basis: &MonomialBasis) -> Result<Vec<F::Elem>> {
        if basis.nvars() != self.nvars || basis.degree() != self.degree {
            return Err(Error::Shape("coefficient basis mismatch".into()));
        }
        let mut out = vec![self.field.zero(); basis.len()];
        for (e, c) in &self.terms {
            out[basis.index_of(e)] = c.clone();
        }
        Ok(out)
    }

    /// Inverse of [`Poly::to_coords`].
    pub fn from_coords(field: F, basis: &MonomialBasis, coords: &[F::Elem]) -> Result<Self> {
        if coords.len() != basis.len() {
            return Err(Error::Shape("coefficient vector length mismatch".into()));
        }
        let mut terms = BTreeMap::new();
        for (i, c) in coords.iter().enumerate() {
            if !field.is_zero(c) {
                terms.insert(basis.get(i).clone(), c.clone());
            }
        }
        Ok(Poly {
            field,
            nvars: basis.nvars(),
            degree: basis.degree(),
            terms,
        })
    }

    /// Maps coefficients into another ring, dropping vanishing images.
    pub fn map_scalars<G: Ring>(
        &self,
        target: G,
        f: &impl Fn(&F::Elem) -> Result<G::Elem>,
    ) -> Result<Poly<G>> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let w = f(c)?;
            if !target.is_zero(&w) {
                terms.insert(e.clone(), w);
            }
        }
        Ok(Poly {
            field: target,
            nvars: self.nvars,
            degree: self.degree,
            terms,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Rationals};

    fn x(i: usize) -> Poly<Rationals> {
        Poly::variable(Rationals, 3, i)
    }

    #[test]
    fn product_of_variables() {
        let p = x(0).mul(&x(1)).unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.coeff(&ExpVec::new(vec![1, 1, 0])), Rationals.from_i64(1));
    }

    #[test]
    fn additive_inverse_cancels() {
        let p = x(0).add(&x(1)).unwrap();
        let q = p.add(&p.scal_mul(&Rationals.from_i64(-1))).unwrap();
        assert!(q.is_zero());
    }

    #[test]
    fn difference_of_squares() {
        let sum = x(0).add(&x(1)).unwrap();
        let diff = x(0).sub(&x(1)).unwrap();
        let p = sum.mul(&diff).unwrap();
        let expected = x(0)
            .mul(&x(0))
            .unwrap()
            .sub(&x(1).mul(&x(1)).unwrap())
            .unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn degree_mismatch_is_rejected() {
        let deg2 = x(0).mul(&x(0)).unwrap();
        assert!(matches!(x(0).add(&deg2), Err(Error::Shape(_))));
    }

    #[test]
    fn partials() {
        // d/dx0 (x0^2 x1) = 2 x0 x1
        let p = x(0).mul(&x(0)).unwrap().mul(&x(1)).unwrap();
        let d = p.partial(0);
        assert_eq!(d.coeff(&ExpVec::new(vec![1, 1, 0])), Rationals.from_i64(2));
        assert_eq!(d.num_terms(), 1);

        // d/dx0 (x1^3) = 0
        let q = x(1).mul(&x(1)).unwrap().mul(&x(1)).unwrap();
        assert!(q.partial(0).is_zero());

        // d/dx2 (x0 x1 x2) = x0 x1
        let r = x(0).mul(&x(1)).unwrap().mul(&x(2)).unwrap();
        assert_eq!(
            r.partial(2).coeff(&ExpVec::new(vec![1, 1, 0])),
            Rationals.from_i64(1)
        );
    }

    #[test]
    fn monomial_basis_counts() {
        assert_eq!(monomial_basis(2, 2).len(), 6);
        assert_eq!(monomial_basis(4, 1).len(), 5);
        assert_eq!(monomial_basis(4, 3).len(), 35);
    }

    #[test]
    fn monomial_basis_is_sorted_and_ranked_consistently() {
        for (n, e) in [(2usize, 2u32), (3, 3), (4, 2), (1, 5)] {
            let basis = MonomialBasis::new(n + 1, e);
            let mut sorted = basis.list.clone();
            sorted.sort();
            assert_eq!(sorted, basis.list, "list must already be in Ord order");
            for (i, m) in basis.iter().enumerate() {
                assert_eq!(basis.index_of(m), i);
            }
        }
        // leading monomial is x0^e
        let b = MonomialBasis::new(3, 2);
        assert_eq!(b.get(0).exps(), &[2, 0, 0]);
        assert_eq!(b.get(b.len() - 1).exps(), &[0, 0, 2]);
    }

    #[test]
    fn euler_identity() {
        let p = x(0).mul(&x(0)).unwrap();
        assert!(p.euler_identity_check());
        let q = x(0).mul(&x(1)).unwrap().mul(&x(2)).unwrap();
        assert!(q.euler_identity_check());

        // random degree-4 polynomial in 5 variables
        let f = PrimeField::new(32003).unwrap();
        let mut rng = crate::rng::SplitMix64::new(3);
        let basis = MonomialBasis::new(5, 4);
        let coords: Vec<u64> = (0..basis.len()).map(|_| rng.below(32003)).collect();
        let p = Poly::from_coords(f, &basis, &coords).unwrap();
        assert!(p.euler_identity_check());
    }

    #[test]
    fn coords_roundtrip() {
        let p = x(0)
            .mul(&x(1))
            .unwrap()
            .add(&x(2).mul(&x(2)).unwrap().scal_mul(&Rationals.from_i64(-3)))
            .unwrap();
        let basis = MonomialBasis::new(3, 2);
        let v = p.to_coords(&basis).unwrap();
        let q = Poly::from_coords(Rationals, &basis, &v).unwrap();
        assert_eq!(p, q);
    }
}
