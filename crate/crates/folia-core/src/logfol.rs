//! Logarithmic q-forms of a degree type and everything needed to verify that
//! they define singular projective foliations.
//!
//! A parameter point consists of a positive degree vector d = (d_1,...,d_m),
//! residue vectors l^1,...,l^q annihilated by d, and homogeneous polynomials
//! F_1,...,F_m with deg F_i = d_i. The associated form is
//!
//! ```text
//! omega = sum_{|I| = q, sorted} lambda_I Fhat_I dF_{i_1} ^ ... ^ dF_{i_q}
//! ```
//!
//! with lambda the wedge of the residue vectors and Fhat_I the product of the
//! F_j with j outside I. The module verifies the descent, decomposability and
//! integrability equations exactly, decides genericity and balancedness of
//! instances, and computes fixed-degree slices of the ideals of the crossing
//! strata by pure linear algebra (no Groebner bases anywhere).

use alloc::format;
use alloc::vec::Vec;

use crate::comb::k_subsets;
use crate::error::{Error, Result};
use crate::field::{Field, Ring};
use crate::forms::{contract_basis_multi, ext_d, radial_contract, wedge_forms, PolyForm};
use crate::linalg::{Rref, SparseMatrix};
use crate::multivec::{cmd_basis, interior_d, wedge_mv, DegreeVector, MultiVector};
use crate::poly::{MonomialBasis, Poly};
use crate::rng::SplitMix64;

/// A point of the parameter space: degree vector, residue vectors, and
/// defining polynomials.
#[derive(Clone, Debug)]
pub struct LogParams<F: Ring> {
    field: F,
    n: usize,
    q: usize,
    d: DegreeVector,
    lambdas: Vec<MultiVector<F>>,
    polys: Vec<Poly<F>>,
}

impl<F: Ring> LogParams<F> {
    pub fn new(
        field: F,
        n: usize,
        q: usize,
        d: DegreeVector,
        lambdas: Vec<MultiVector<F>>,
        polys: Vec<Poly<F>>,
    ) -> Result<Self> {
        let m = d.m();
        if m < q + 1 {
            return Err(Error::Shape(format!("m = {m} parts but q + 1 = {}", q + 1)));
        }
        if lambdas.len() != q {
            return Err(Error::Shape(format!(
                "{} residue vectors, expected q = {q}",
                lambdas.len()
            )));
        }
        for l in &lambdas {
            if l.grade() != 1 || l.m() != m {
                return Err(Error::Shape(
                    "residue vectors must be grade 1 over 1..m".into(),
                ));
            }
            if l.field() != &field {
                return Err(Error::FieldMismatch);
            }
            if !interior_d(&d, l).is_zero() {
                return Err(Error::Degenerate(
                    "residue vector not annihilated by the degree vector".into(),
                ));
            }
        }
        if polys.len() != m {
            return Err(Error::Shape(format!(
                "{} polynomials, expected m = {m}",
                polys.len()
            )));
        }
        for (i, p) in polys.iter().enumerate() {
            if p.field() != &field {
                return Err(Error::FieldMismatch);
            }
            if p.nvars() != n + 1 {
                return Err(Error::Shape(format!(
                    "F_{} in {} variables, expected {}",
                    i + 1,
                    p.nvars(),
                    n + 1
                )));
            }
            if p.degree() != d.part(i) {
                return Err(Error::Shape(format!(
                    "deg F_{} = {}, expected {}",
                    i + 1,
                    p.degree(),
                    d.part(i)
                )));
            }
            if p.is_zero() {
                return Err(Error::Degenerate(format!("F_{} is zero", i + 1)));
            }
        }
        Ok(LogParams {
            field,
            n,
            q,
            d,
            lambdas,
            polys,
        })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn m(&self) -> usize {
        self.d.m()
    }

    pub fn degree_vector(&self) -> &DegreeVector {
        &self.d
    }

    pub fn total_degree(&self) -> u32 {
        self.d.total()
    }

    pub fn lambdas(&self) -> &[MultiVector<F>] {
        &self.lambdas
    }

    pub fn polys(&self) -> &[Poly<F>] {
        &self.polys
    }

    /// The wedge of the residue vectors. Zero (dependent vectors) is a
    /// degenerate input.
    pub fn lambda_tensor(&self) -> Result<MultiVector<F>> {
        let mut t = self.lambdas[0].clone();
        for l in &self.lambdas[1..] {
            t = wedge_mv(&t, l)?;
        }
        if t.is_zero() {
            return Err(Error::Degenerate("dependent residue vectors".into()));
        }
        Ok(t)
    }

    pub fn map_scalars<G: Ring>(
        &self,
        target: G,
        f: &impl Fn(&F::Elem) -> Result<G::Elem>,
    ) -> Result<LogParams<G>> {
        let lambdas = self
            .lambdas
            .iter()
            .map(|l| l.map_scalars(target.clone(), f))
            .collect::<Result<Vec<_>>>()?;
        let polys = self
            .polys
            .iter()
            .map(|p| p.map_scalars(target.clone(), f))
            .collect::<Result<Vec<_>>>()?;
        LogParams::new(target, self.n, self.q, self.d.clone(), lambdas, polys)
    }
}

/// Product of the F_j over j outside I (1-based indices). The empty
/// complement gives the constant 1.
pub fn hat_f<F: Ring>(field: &F, polys: &[Poly<F>], excluded: &[u8]) -> Result<Poly<F>> {
    let nvars = polys
        .first()
        .map(Poly::nvars)
        .ok_or_else(|| Error::Shape("no polynomials".into()))?;
    let mut acc = Poly::one(field.clone(), nvars);
    for (j, p) in polys.iter().enumerate() {
        if !excluded.contains(&(j as u8 + 1)) {
            acc = acc.mul(p)?;
        }
    }
    Ok(acc)
}

/// The differential dF as a grade-1 form of total degree deg F.
pub fn differential<F: Ring>(p: &Poly<F>) -> PolyForm<F> {
    ext_d(&PolyForm::from_poly(p.clone()))
}

/// The form `sum_I t_I Fhat_I dF_I` for an arbitrary grade-q tensor t.
/// Shared by the parametrization and the residue block of its derivative.
pub fn log_form_from_tensor<F: Ring>(
    field: &F,
    t: &MultiVector<F>,
    d: &DegreeVector,
    polys: &[Poly<F>],
) -> Result<PolyForm<F>> {
    let nvars = polys
        .first()
        .map(Poly::nvars)
        .ok_or_else(|| Error::Shape("no polynomials".into()))?;
    let q = t.grade();
    let total = d.total();
    let diffs: Vec<PolyForm<F>> = polys.iter().map(differential).collect();
    let mut omega = PolyForm::zero(field.clone(), nvars, q, total);
    for (set, coeff) in t.comps() {
        let mut term = PolyForm::from_poly(hat_f(field, polys, set)?);
        for &i in set {
            term = wedge_forms(&term, &diffs[i as usize - 1])?;
        }
        omega = omega.add(&term.scale(coeff))?;
    }
    Ok(omega)
}

/// Builds the logarithmic q-form of the parameter point. The result always
/// satisfies the descent condition; that is asserted on every call.
pub fn construct_log_form<F: Ring>(p: &LogParams<F>) -> Result<PolyForm<F>> {
    let t = p.lambda_tensor()?;
    let omega = log_form_from_tensor(&p.field, &t, &p.d, &p.polys)?;
    if !radial_contract(&omega).is_zero() {
        return Err(Error::Inconsistency(
            "constructed form does not descend".into(),
        ));
    }
    Ok(omega)
}

/// Decomposability. For q = 2 this is `omega ^ omega = 0`; in general it is
/// `i_v(omega) ^ omega = 0` for every constant coordinate (q-1)-multivector,
/// which by multilinearity covers all v.
pub fn pluecker_check<F: Ring>(omega: &PolyForm<F>, q: usize) -> Result<bool> {
    if omega.grade() != q {
        return Err(Error::Shape(format!(
            "form of grade {}, expected {q}",
            omega.grade()
        )));
    }
    if q == 2 {
        return Ok(wedge_forms(omega, omega)?.is_zero());
    }
    let universe: Vec<u8> = (0..omega.nvars() as u8).collect();
    for v in k_subsets(&universe, q - 1) {
        let contracted = contract_basis_multi(&v, omega);
        if !wedge_forms(&contracted, omega)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Integrability: `i_v(omega) ^ d(omega) = 0` for every constant coordinate
/// (q-1)-multivector v.
pub fn integrability_check<F: Ring>(omega: &PolyForm<F>, q: usize) -> Result<bool> {
    if omega.grade() != q {
        return Err(Error::Shape(format!(
            "form of grade {}, expected {q}",
            omega.grade()
        )));
    }
    let d_omega = ext_d(omega);
    let universe: Vec<u8> = (0..omega.nvars() as u8).collect();
    for v in k_subsets(&universe, q - 1) {
        let contracted = contract_basis_multi(&v, omega);
        if !wedge_forms(&contracted, &d_omega)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The polynomial identity `F * d(omega) = dF ^ omega` with F the product of
/// all the F_i.
pub fn logdiff_identity_check<F: Ring>(p: &LogParams<F>) -> Result<bool> {
    let omega = construct_log_form(p)?;
    let f = hat_f(&p.field, &p.polys, &[])?;
    let lhs = ext_d(&omega).scale_poly(&f)?;
    let rhs = wedge_forms(&differential(&f), &omega)?;
    Ok(lhs == rhs)
}

/// Genericity of a grade-2 residue tensor: every coordinate lambda_{ij} is
/// nonzero and, over all ordered triples of distinct indices with the
/// antisymmetric extension of lambda, the two families
/// `lambda_ab - lambda_ac + lambda_bc` and `lambda_ab - lambda_ac - lambda_bc`
/// never vanish. Per sorted triple i<j<k that orbit is exactly the four sign
/// patterns `lambda_ij +- lambda_ik +- lambda_jk`.
pub fn genericity_check<F: Ring>(t: &MultiVector<F>) -> bool {
    assert_eq!(t.grade(), 2, "genericity is defined for q = 2");
    let field = t.field().clone();
    let m = t.m() as u8;
    for i in 1..=m {
        for j in i + 1..=m {
            if field.is_zero(&t.coeff(&[i, j])) {
                return false;
            }
        }
    }
    for i in 1..=m {
        for j in i + 1..=m {
            for k in j + 1..=m {
                let ij = t.coeff(&[i, j]);
                let ik = t.coeff(&[i, k]);
                let jk = t.coeff(&[j, k]);
                for (s1, s2) in [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
                    let mut v = ij.clone();
                    v = field.add(&v, &field.mul(&ik, &field.from_i64(s1)));
                    v = field.add(&v, &field.mul(&jk, &field.from_i64(s2)));
                    if field.is_zero(&v) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Weaker genericity used when q != 2: all Pluecker coordinates of the
/// residue tensor are nonzero.
pub fn residues_nonzero_check<F: Ring>(t: &MultiVector<F>) -> bool {
    let field = t.field().clone();
    let m = t.m() as u8;
    let universe: Vec<u8> = (1..=m).collect();
    k_subsets(&universe, t.grade())
        .iter()
        .all(|s| !field.is_zero(&t.coeff(s)))
}

/// k-balancedness: every k of the degrees sum to less than the rest.
pub fn balanced_check(d: &DegreeVector, k: usize) -> bool {
    assert!(k >= 1 && k < d.m(), "balance index out of range");
    let total = d.total();
    let universe: Vec<u8> = (1..=d.m() as u8).collect();
    k_subsets(&universe, k).iter().all(|set| {
        let s: u32 = set.iter().map(|&i| d.part(i as usize - 1)).sum();
        2 * s < total
    })
}

/// Exact simple-normal-crossings test for hyperplane arrangements: every
/// subset of size s <= min(m, n+1) of the coefficient vectors has rank s.
/// Checking the subsets of maximal size suffices, since independence passes
/// to subsets.
pub fn nc_linear_check<F: Field>(field: &F, polys: &[Poly<F>]) -> Result<bool> {
    let nvars = polys
        .first()
        .map(Poly::nvars)
        .ok_or_else(|| Error::Shape("no polynomials".into()))?;
    if polys.iter().any(|p| p.degree() != 1) {
        return Err(Error::Shape(
            "normal crossings test needs linear forms".into(),
        ));
    }
    let m = polys.len();
    let s = m.min(nvars);
    let basis = MonomialBasis::new(nvars, 1);
    let coeff_rows: Vec<Vec<F::Elem>> = polys
        .iter()
        .map(|p| p.to_coords(&basis))
        .collect::<Result<Vec<_>>>()?;
    let universe: Vec<u8> = (1..=m as u8).collect();
    for subset in k_subsets(&universe, s) {
        let mut rref = Rref::new(field.clone(), nvars);
        for &i in &subset {
            rref.push_dense_row(coeff_rows[i as usize - 1].clone());
        }
        if rref.rank() != s {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Degree-e slice of the ideal of the codimension-k crossing stratum,
/// generated by the products Fhat_J over |J| = k-1.
#[derive(Clone, Debug)]
pub struct StratumSlice<F: Field> {
    pub k: usize,
    pub e: u32,
    /// Columns are coefficient vectors of `Fhat_J * monomial`; the column
    /// space is the slice.
    pub basis_matrix: SparseMatrix<F>,
}

impl<F: Field> StratumSlice<F> {
    /// Row-space form of the column space, for membership tests.
    pub fn row_space(&self) -> Rref<F> {
        let mut rref = Rref::new(
            self.basis_matrix.field().clone(),
            self.basis_matrix.nrows(),
        );
        let mut col_of: Vec<Vec<(u32, F::Elem)>> =
            alloc::vec![Vec::new(); self.basis_matrix.ncols()];
        for (r, row) in self.basis_matrix.rows().enumerate() {
            for (c, v) in row {
                col_of[*c as usize].push((r as u32, v.clone()));
            }
        }
        for col in col_of {
            rref.push_sparse_row(&col);
        }
        rref
    }

    pub fn dim(&self) -> usize {
        self.basis_matrix.rank()
    }
}

/// Assembles the generators-times-monomials matrix of the degree-e slice of
/// the stratum ideal. Generators of degree above e contribute nothing; when
/// none fit, the slice is the zero space.
pub fn stratum_slice<F: Field>(
    field: &F,
    polys: &[Poly<F>],
    k: usize,
    e: u32,
) -> Result<StratumSlice<F>> {
    let m = polys.len();
    if k < 1 || k > m {
        return Err(Error::Shape(format!(
            "stratum codimension {k} outside 1..={m}"
        )));
    }
    let nvars = polys[0].nvars();
    let target = MonomialBasis::new(nvars, e);
    let universe: Vec<u8> = (1..=m as u8).collect();
    let mut columns: Vec<Vec<(u32, F::Elem)>> = Vec::new();
    for j_set in k_subsets(&universe, k - 1) {
        let gen = hat_f(field, polys, &j_set)?;
        if gen.degree() > e {
            continue;
        }
        let mono = MonomialBasis::new(nvars, e - gen.degree());
        for mu in mono.iter() {
            let shifted = gen.mul(&Poly::monomial(field.clone(), mu.clone(), field.one()))?;
            let mut col = Vec::with_capacity(shifted.num_terms());
            for (exp, c) in shifted.terms() {
                col.push((target.index_of(exp) as u32, c.clone()));
            }
            col.sort_by_key(|&(r, _)| r);
            columns.push(col);
        }
    }
    let ncols = columns.len();
    let mut entries = Vec::new();
    for (c, col) in columns.into_iter().enumerate() {
        for (r, v) in col {
            entries.push((r, c as u32, v));
        }
    }
    let basis_matrix = SparseMatrix::from_entries(field.clone(), target.len(), ncols, entries)?;
    Ok(StratumSlice {
        k,
        e,
        basis_matrix,
    })
}

/// Whether every coefficient polynomial of the form lies in the degree
/// (d - q) slice of the stratum ideal, i.e. the form vanishes on the
/// codimension-k crossing stratum.
pub fn vanishes_on_stratum<F: Field>(
    field: &F,
    alpha: &PolyForm<F>,
    polys: &[Poly<F>],
    k: usize,
) -> Result<bool> {
    let slice = stratum_slice(field, polys, k, alpha.coeff_degree())?;
    let space = slice.row_space();
    let target = MonomialBasis::new(alpha.nvars(), alpha.coeff_degree());
    for (_, p) in alpha.comps() {
        let v = p.to_coords(&target)?;
        if !space.contains(&v) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Degree-e slice of `<F_{j_1}, ..., F_{j_k}>` as a row space.
fn generated_slice_rows<F: Field>(
    field: &F,
    polys: &[Poly<F>],
    subset: &[u8],
    e: u32,
    target: &MonomialBasis,
) -> Result<Rref<F>> {
    let mut rref = Rref::new(field.clone(), target.len());
    for &j in subset {
        let g = &polys[j as usize - 1];
        if g.degree() > e {
            continue;
        }
        let mono = MonomialBasis::new(g.nvars(), e - g.degree());
        for mu in mono.iter() {
            let shifted = g.mul(&Poly::monomial(field.clone(), mu.clone(), field.one()))?;
            let mut row = Vec::with_capacity(shifted.num_terms());
            for (exp, c) in shifted.terms() {
                row.push((target.index_of(exp) as u32, c.clone()));
            }
            row.sort_by_key(|&(r, _)| r);
            rref.push_sparse_row(&row);
        }
    }
    Ok(rref)
}

/// Intersection of two subspaces given by row-space RREFs, via the kernel of
/// the stacked coefficient system.
fn intersect_spaces<F: Field>(field: &F, a: &Rref<F>, b: &Rref<F>) -> Rref<F> {
    let dim = a.ncols();
    let a_rows: Vec<&Vec<F::Elem>> = a.pivot_rows().map(|(_, r)| r).collect();
    let b_rows: Vec<&Vec<F::Elem>> = b.pivot_rows().map(|(_, r)| r).collect();
    // coefficients (x, y) with sum_i x_i a_i - sum_j y_j b_j = 0
    let mut stacked = Rref::new(field.clone(), a_rows.len() + b_rows.len());
    for coord in 0..dim {
        let mut r = Vec::with_capacity(a_rows.len() + b_rows.len());
        for ar in &a_rows {
            r.push(ar[coord].clone());
        }
        for br in &b_rows {
            r.push(field.neg(&br[coord]));
        }
        stacked.push_dense_row(r);
    }
    let mut out = Rref::new(field.clone(), dim);
    for combo in stacked.kernel_basis() {
        let mut v = alloc::vec![field.zero(); dim];
        for (x, ar) in combo[..a_rows.len()].iter().zip(a_rows.iter()) {
            if !field.is_zero(x) {
                for (dst, src) in v.iter_mut().zip(ar.iter()) {
                    field.add_mul_assign(dst, x, src);
                }
            }
        }
        out.push_dense_row(v);
    }
    out
}

/// Checks, in degree e, that the intersection of the ideals of all k-fold
/// choices of the F_j equals the ideal generated by the Fhat_J with
/// |J| = k-1. Both slices are computed independently by linear algebra.
pub fn ideal_equality_check<F: Field>(
    field: &F,
    polys: &[Poly<F>],
    k: usize,
    e: u32,
) -> Result<bool> {
    let m = polys.len();
    if k < 1 || k > m {
        return Err(Error::Shape(format!("codimension {k} outside 1..={m}")));
    }
    let nvars = polys[0].nvars();
    let target = MonomialBasis::new(nvars, e);
    let universe: Vec<u8> = (1..=m as u8).collect();
    let mut intersection: Option<Rref<F>> = None;
    for subset in k_subsets(&universe, k) {
        let slice = generated_slice_rows(field, polys, &subset, e, &target)?;
        intersection = Some(match intersection {
            None => slice,
            Some(current) => intersect_spaces(field, &current, &slice),
        });
    }
    let intersection = intersection.expect("at least one subset");
    let stratum = stratum_slice(field, polys, k, e)?;
    let stratum_space = stratum.row_space();
    if stratum_space.rank() != intersection.rank() {
        return Ok(false);
    }
    // equal dimension plus one inclusion gives equality
    for (_, row) in stratum_space.pivot_rows() {
        if !intersection.contains(row) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Draws a reproducible generic parameter point: dense random F_i, residue
/// vectors from the annihilator hyperplane of d, redrawn until the
/// genericity predicates pass. For q = 2 with m > 3 that is the full
/// inequation family; otherwise all residue coordinates must be nonzero
/// (at m = q + 1 the residue tensor is projectively rigid, so for some
/// degree vectors the full family is empty while the construction is still
/// perfectly valid). All-linear instances additionally pass the exact
/// hyperplane normal-crossings test.
pub fn random_params<F: Field>(
    field: &F,
    seed: u64,
    n: usize,
    q: usize,
    d: &DegreeVector,
) -> Result<LogParams<F>> {
    let m = d.m();
    if m < q + 1 {
        return Err(Error::Shape(format!("m = {m} parts but q + 1 = {}", q + 1)));
    }
    if q < 1 || q > n {
        return Err(Error::Shape(format!("q = {q} outside 1..={n}")));
    }
    let nvars = n + 1;
    let mut rng = SplitMix64::new(seed);
    let hyper = cmd_basis(field, d);
    const BUDGET: usize = 500;
    for _ in 0..BUDGET {
        let lambdas: Vec<MultiVector<F>> = (0..q)
            .map(|_| {
                let mut v = MultiVector::zero(field.clone(), m, 1);
                for mu in &hyper {
                    let c = field.sample(&mut rng);
                    v = v.add(&mu.scale(&c)).expect("same shape");
                }
                v
            })
            .collect();
        let polys: Vec<Poly<F>> = (0..m)
            .map(|i| {
                let basis = MonomialBasis::new(nvars, d.part(i));
                let coords: Vec<F::Elem> =
                    (0..basis.len()).map(|_| field.sample(&mut rng)).collect();
                Poly::from_coords(field.clone(), &basis, &coords)
                    .expect("dense coordinates are well formed")
            })
            .collect();

        if lambdas.iter().any(MultiVector::is_zero) || polys.iter().any(Poly::is_zero) {
            continue;
        }
        let mut tensor = lambdas[0].clone();
        let mut dependent = false;
        for l in &lambdas[1..] {
            tensor = wedge_mv(&tensor, l).expect("same space");
            if tensor.is_zero() {
                dependent = true;
                break;
            }
        }
        if dependent {
            continue;
        }
        let generic = if q == 2 && m > 3 {
            genericity_check(&tensor)
        } else {
            residues_nonzero_check(&tensor)
        };
        if !generic {
            continue;
        }
        if d.parts().iter().all(|&di| di == 1) && !nc_linear_check(field, &polys)? {
            continue;
        }
        return LogParams::new(field.clone(), n, q, d.clone(), lambdas, polys);
    }
    Err(Error::Sampling(format!(
        "no generic instance after {BUDGET} draws (seed {seed})"
    )))
}
