//! Polynomial differential forms on the affine cone C^{n+1}.
//!
//! A form of grade q and total degree d is a sum of terms `A_I dz_I` over
//! sorted q-subsets of the variables, with every coefficient polynomial
//! homogeneous of degree d - q. The operations are the exterior product,
//! the exterior derivative, contraction with polynomial vector fields, and
//! the radial (Euler) contraction whose vanishing characterizes forms that
//! descend to twisted projective forms.
//!
//! Components are dense per index set and sparse per polynomial: index sets
//! are few, polynomials are the big objects.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::comb::merge_sign;
use crate::error::{Error, Result};
use crate::field::Ring;
use crate::poly::Poly;

/// Homogeneous polynomial q-form on the affine cone.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyForm<F: Ring> {
    field: F,
    nvars: usize,
    grade: usize,
    total_degree: u32,
    comps: BTreeMap<Vec<u8>, Poly<F>>,
}

impl<F: Ring> PolyForm<F> {
    /// Zero form of the given shape. The grade may formally exceed the
    /// number of variables, in which case the form is identically zero.
    pub fn zero(field: F, nvars: usize, grade: usize, total_degree: u32) -> Self {
        assert!(grade as u32 <= total_degree, "coefficient degree underflow");
        PolyForm {
            field,
            nvars,
            grade,
            total_degree,
            comps: BTreeMap::new(),
        }
    }

    /// A 0-form wrapping one polynomial.
    pub fn from_poly(p: Poly<F>) -> Self {
        let field = p.field().clone();
        let nvars = p.nvars();
        let total_degree = p.degree();
        let mut comps = BTreeMap::new();
        if !p.is_zero() {
            comps.insert(Vec::new(), p);
        }
        PolyForm {
            field,
            nvars,
            grade: 0,
            total_degree,
            comps,
        }
    }

    /// The basis form dz_{i_1} ^ ... ^ dz_{i_q} for a sorted index set
    /// (0-based variable indices).
    pub fn basis(field: F, nvars: usize, indices: &[u8]) -> Self {
        let one = Poly::one(field.clone(), nvars);
        let mut form = PolyForm::zero(field, nvars, indices.len(), indices.len() as u32);
        form.comps.insert(indices.to_vec(), one);
        form
    }

    pub fn from_comps(
        field: F,
        nvars: usize,
        grade: usize,
        total_degree: u32,
        comps: impl IntoIterator<Item = (Vec<u8>, Poly<F>)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (set, p) in comps {
            if set.len() != grade {
                return Err(Error::Shape(format!(
                    "index set of size {}, expected grade {grade}",
                    set.len()
                )));
            }
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Shape("index set not strictly increasing".into()));
            }
            if set.iter().any(|&i| i as usize >= nvars) {
                return Err(Error::Shape(format!("variable index outside 0..{nvars}")));
            }
            if p.nvars() != nvars {
                return Err(Error::Shape("coefficient variable count mismatch".into()));
            }
            if p.degree() + grade as u32 != total_degree {
                return Err(Error::Shape(format!(
                    "coefficient degree {} with grade {grade} does not give total degree {total_degree}",
                    p.degree()
                )));
            }
            if p.field() != &field {
                return Err(Error::FieldMismatch);
            }
            if p.is_zero() {
                continue;
            }
            if map.insert(set, p).is_some() {
                return Err(Error::Shape("duplicate index set".into()));
            }
        }
        Ok(PolyForm {
            field,
            nvars,
            grade,
            total_degree,
            comps: map,
        })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn total_degree(&self) -> u32 {
        self.total_degree
    }

    /// Degree of the coefficient polynomials.
    pub fn coeff_degree(&self) -> u32 {
        self.total_degree - self.grade as u32
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn comps(&self) -> impl Iterator<Item = (&Vec<u8>, &Poly<F>)> {
        self.comps.iter()
    }

    pub fn coeff(&self, set: &[u8]) -> Poly<F> {
        self.comps
            .get(set)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.field.clone(), self.nvars, self.coeff_degree()))
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

    fn insert_term(&mut self, set: Vec<u8>, p: Poly<F>) {
        if p.is_zero() {
            return;
        }
        match self.comps.get_mut(&set) {
            Some(q) => {
                let sum = q.add(&p).expect("homogeneous components agree");
                if sum.is_zero() {
                    self.comps.remove(&set);
                } else {
                    *q = sum;
                }
            }
            None => {
                self.comps.insert(set, p);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if self.grade != other.grade || self.total_degree != other.total_degree {
            return Err(Error::Shape(format!(
                "adding ({}, {}) and ({}, {}) forms",
                self.grade, self.total_degree, other.grade, other.total_degree
            )));
        }
        let mut out = self.clone();
        for (set, p) in &other.comps {
            out.insert_term(set.clone(), p.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let comps = self
            .comps
            .iter()
            .map(|(s, p)| (s.clone(), p.neg()))
            .collect();
        PolyForm {
            field: self.field.clone(),
            nvars: self.nvars,
            grade: self.grade,
            total_degree: self.total_degree,
            comps,
        }
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let mut out = PolyForm::zero(
            self.field.clone(),
            self.nvars,
            self.grade,
            self.total_degree,
        );
        if self.field.is_zero(c) {
            return out;
        }
        for (s, p) in &self.comps {
            out.comps.insert(s.clone(), p.scal_mul(c));
        }
        out
    }

    /// Multiplies every coefficient by a homogeneous polynomial, raising the
    /// total degree by its degree.
    pub fn scale_poly(&self, p: &Poly<F>) -> Result<Self> {
        let mut out = PolyForm::zero(
            self.field.clone(),
            self.nvars,
            self.grade,
            self.total_degree + p.degree(),
        );
        if p.is_zero() {
            return Ok(out);
        }
        for (s, q) in &self.comps {
            out.insert_term(s.clone(), q.mul(p)?);
        }
        Ok(out)
    }

    pub fn map_scalars<G: Ring>(
        &self,
        target: G,
        f: &impl Fn(&F::Elem) -> Result<G::Elem>,
    ) -> Result<PolyForm<G>> {
        let mut comps = BTreeMap::new();
        for (s, p) in &self.comps {
            let q = p.map_scalars(target.clone(), f)?;
            if !q.is_zero() {
                comps.insert(s.clone(), q);
            }
        }
        Ok(PolyForm {
            field: target,
            nvars: self.nvars,
            grade: self.grade,
            total_degree: self.total_degree,
            comps,
        })
    }
}

fn without_index(set: &[u8], pos: usize) -> Vec<u8> {
    let mut rest = Vec::with_capacity(set.len() - 1);
    rest.extend_from_slice(&set[..pos]);
    rest.extend_from_slice(&set[pos + 1..]);
    rest
}

/// Exterior product with shuffle signs; grades and total degrees add.
///
/// Products are accumulated per target component into dense coefficient
/// tables over one shared monomial basis, so repeated contributions to the
/// same component cost one table update per term pair.
pub fn wedge_forms<F: Ring>(a: &PolyForm<F>, b: &PolyForm<F>) -> Result<PolyForm<F>> {
    a.check_compatible(b)?;
    let field = a.field.clone();
    let grade = a.grade + b.grade;
    let total_degree = a.total_degree + b.total_degree;
    let mut out = PolyForm::zero(field.clone(), a.nvars, grade, total_degree);
    if a.comps.is_empty() || b.comps.is_empty() {
        return Ok(out);
    }
    let basis = crate::poly::MonomialBasis::new(a.nvars, total_degree - grade as u32);
    assert!(a.nvars <= 8, "exponent buffer limit");
    let mut acc: BTreeMap<Vec<u8>, Vec<F::Elem>> = BTreeMap::new();
    for (sa, pa) in &a.comps {
        for (sb, pb) in &b.comps {
            if let Some((merged, negative)) = merge_sign(sa, sb) {
                let slot = acc
                    .entry(merged)
                    .or_insert_with(|| alloc::vec![field.zero(); basis.len()]);
                let mut buf = [0u8; 8];
                let buf = &mut buf[..a.nvars];
                for (ea, ca) in pa.terms() {
                    let c = if negative { field.neg(ca) } else { ca.clone() };
                    for (eb, cb) in pb.terms() {
                        for ((t, x), y) in buf.iter_mut().zip(ea.exps()).zip(eb.exps()) {
                            *t = x + y;
                        }
                        let idx = basis.index_of_exps(buf);
                        field.add_mul_assign(&mut slot[idx], &c, cb);
                    }
                }
            }
        }
    }
    for (set, coords) in acc {
        let p = Poly::from_coords(field.clone(), &basis, &coords)?;
        if !p.is_zero() {
            out.comps.insert(set, p);
        }
    }
    Ok(out)
}

/// Exterior derivative. Grade rises by one, total degree is preserved,
/// and d applied twice gives zero.
pub fn ext_d<F: Ring>(a: &PolyForm<F>) -> PolyForm<F> {
    assert!(a.grade < a.nvars, "exterior derivative of a top form");
    let mut out = PolyForm::zero(a.field.clone(), a.nvars, a.grade + 1, a.total_degree);
    for (set, p) in &a.comps {
        for k in 0..a.nvars as u8 {
            let dp = p.partial(k as usize);
            if dp.is_zero() {
                continue;
            }
            if let Some((merged, negative)) = merge_sign(&[k], set) {
                out.insert_term(merged, if negative { dp.neg() } else { dp });
            }
        }
    }
    out
}

/// Homogeneous polynomial vector field sum_k v_k d/dz_k.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyField<F: Ring> {
    field: F,
    nvars: usize,
    degree: u32,
    comps: Vec<Poly<F>>,
}

impl<F: Ring> PolyField<F> {
    pub fn new(field: F, degree: u32, comps: Vec<Poly<F>>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::Shape("empty vector field".into()));
        }
        let nvars = comps.len();
        for p in &comps {
            if p.nvars() != nvars || p.degree() != degree || p.field() != &field {
                return Err(Error::Shape(
                    "vector field components must share one homogeneous degree".into(),
                ));
            }
        }
        Ok(PolyField {
            field,
            nvars,
            degree,
            comps,
        })
    }

    /// The constant field d/dz_k.
    pub fn unit(field: F, nvars: usize, k: usize) -> Self {
        assert!(k < nvars);
        let comps = (0..nvars)
            .map(|i| {
                if i == k {
                    Poly::one(field.clone(), nvars)
                } else {
                    Poly::zero(field.clone(), nvars, 0)
                }
            })
            .collect();
        PolyField {
            field,
            nvars,
            degree: 0,
            comps,
        }
    }

    /// The radial Euler field sum_i z_i d/dz_i.
    pub fn radial(field: F, nvars: usize) -> Self {
        let comps = (0..nvars)
            .map(|i| Poly::variable(field.clone(), nvars, i))
            .collect();
        PolyField {
            field,
            nvars,
            degree: 1,
            comps,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn comp(&self, k: usize) -> &Poly<F> {
        &self.comps[k]
    }
}

/// Interior product with the constant field d/dz_k: each component containing
/// k loses it with the sign of its position.
pub fn contract_unit<F: Ring>(k: u8, a: &PolyForm<F>) -> PolyForm<F> {
    assert!(a.grade >= 1, "contraction needs grade >= 1");
    let mut out = PolyForm::zero(a.field.clone(), a.nvars, a.grade - 1, a.total_degree - 1);
    for (set, p) in &a.comps {
        if let Some(pos) = set.iter().position(|&i| i == k) {
            let term = if pos % 2 == 1 { p.neg() } else { p.clone() };
            out.insert_term(without_index(set, pos), term);
        }
    }
    out
}

/// Interior product with a polynomial vector field.
pub fn contract<F: Ring>(v: &PolyField<F>, a: &PolyForm<F>) -> Result<PolyForm<F>> {
    if v.nvars != a.nvars {
        return Err(Error::Shape("vector field variable count mismatch".into()));
    }
    assert!(a.grade >= 1, "contraction needs grade >= 1");
    let mut out = PolyForm::zero(
        a.field.clone(),
        a.nvars,
        a.grade - 1,
        a.total_degree + v.degree - 1,
    );
    for k in 0..a.nvars {
        let vk = &v.comps[k];
        if vk.is_zero() {
            continue;
        }
        let contracted = contract_unit(k as u8, a);
        for (set, p) in &contracted.comps {
            out.insert_term(set.clone(), p.mul(vk)?);
        }
    }
    Ok(out)
}

/// Iterated contraction with the constant multi-vector
/// e_{k_1} ^ ... ^ e_{k_r}; the factor with the smallest index is applied
/// first. The empty multi-vector acts as the identity.
pub fn contract_basis_multi<F: Ring>(indices: &[u8], a: &PolyForm<F>) -> PolyForm<F> {
    let mut out = a.clone();
    for &k in indices {
        out = contract_unit(k, &out);
    }
    out
}

/// Contraction with the radial Euler field. Vanishes exactly on the forms
/// that descend to twisted projective forms.
pub fn radial_contract<F: Ring>(a: &PolyForm<F>) -> PolyForm<F> {
    assert!(a.grade >= 1, "radial contraction needs grade >= 1");
    let mut out = PolyForm::zero(a.field.clone(), a.nvars, a.grade - 1, a.total_degree);
    for (set, p) in &a.comps {
        for (pos, &i) in set.iter().enumerate() {
            let xi = Poly::variable(a.field.clone(), a.nvars, i as usize);
            let mut term = p.mul(&xi).expect("same ring");
            if pos % 2 == 1 {
                term = term.neg();
            }
            out.insert_term(without_index(set, pos), term);
        }
    }
    out
}
