//! Zariski tangent computations and the stability certificate.
//!
//! The coordinate model is the space of twisted projective 2-forms of total
//! degree d: affine 2-forms annihilated by the radial contraction, obtained
//! as the kernel of an exact linear system and cross-checked against the
//! closed-form dimension count. On top of it sit the perturbation system
//! (whose kernel is the ambient cone over the Zariski tangent space of the
//! foliation moduli at omega), the derivative matrix of the natural
//! parametrization, and the certificate comparing their dimensions.
//!
//! Ambient-cone accounting is used throughout: omega itself is verified to
//! lie in both the kernel and the column space, so the projective quotient
//! dimensions are the ambient ones minus one on both sides and the rank
//! equality transfers verbatim.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::comb::{binomial, k_subsets, monomial_count};
use crate::error::{Error, Result};
use crate::field::{Dual, Field, FieldDesc, PrimeField, Rationals, Ring};
use crate::forms::{contract_unit, ext_d, wedge_forms, PolyForm};
use crate::linalg::{Rref, SparseMatrix};
use crate::logfol::{
    balanced_check, construct_log_form, differential, hat_f, log_form_from_tensor, random_params,
    vanishes_on_stratum, LogParams,
};
use crate::multivec::{cmd_basis, grass_tangent_dirs, interior_d, DegreeVector, MultiVector};
use crate::poly::{MonomialBasis, Poly};
use crate::rng::SplitMix64;

/// Coordinates for affine q-forms of one total degree: pairs of a sorted
/// q-subset of the variables and a monomial of the coefficient degree.
#[derive(Clone, Debug)]
pub struct FormCoordSpace<F: Ring> {
    field: F,
    nvars: usize,
    grade: usize,
    total_degree: u32,
    sets: Vec<Vec<u8>>,
    mono: MonomialBasis,
}

impl<F: Ring> FormCoordSpace<F> {
    pub fn new(field: F, nvars: usize, grade: usize, total_degree: u32) -> Self {
        assert!(grade as u32 <= total_degree);
        let universe: Vec<u8> = (0..nvars as u8).collect();
        let sets = k_subsets(&universe, grade);
        let mono = MonomialBasis::new(nvars, total_degree - grade as u32);
        FormCoordSpace {
            field,
            nvars,
            grade,
            total_degree,
            sets,
            mono,
        }
    }

    pub fn dim(&self) -> usize {
        self.sets.len() * self.mono.len()
    }

    pub fn monomials(&self) -> &MonomialBasis {
        &self.mono
    }

    pub fn sets(&self) -> &[Vec<u8>] {
        &self.sets
    }

    fn set_offset(&self, set: &[u8]) -> usize {
        let pos = self
            .sets
            .binary_search_by(|s| s.as_slice().cmp(set))
            .expect("index set belongs to the space");
        pos * self.mono.len()
    }

    /// Sparse coordinates of a form of the right shape.
    pub fn encode_sparse(&self, form: &PolyForm<F>) -> Result<Vec<(u32, F::Elem)>> {
        if form.nvars() != self.nvars
            || form.grade() != self.grade
            || form.total_degree() != self.total_degree
        {
            return Err(Error::Shape("form does not match coordinate space".into()));
        }
        let mut out = Vec::new();
        for (set, p) in form.comps() {
            let base = self.set_offset(set);
            for (e, c) in p.terms() {
                out.push(((base + self.mono.index_of(e)) as u32, c.clone()));
            }
        }
        out.sort_by_key(|&(i, _)| i);
        Ok(out)
    }

    /// Rebuilds the form from dense coordinates.
    pub fn decode(&self, coords: &[F::Elem]) -> Result<PolyForm<F>> {
        if coords.len() != self.dim() {
            return Err(Error::Shape("coordinate vector length mismatch".into()));
        }
        let mut comps = Vec::new();
        for (s, set) in self.sets.iter().enumerate() {
            let chunk = &coords[s * self.mono.len()..(s + 1) * self.mono.len()];
            let p = Poly::from_coords(self.field.clone(), &self.mono, chunk)?;
            if !p.is_zero() {
                comps.push((set.clone(), p));
            }
        }
        PolyForm::from_comps(
            self.field.clone(),
            self.nvars,
            self.grade,
            self.total_degree,
            comps,
        )
    }
}

/// Basis of the descended forms: affine q-forms of total degree d with
/// vanishing radial contraction, realized as the canonical kernel basis of
/// the radial-contraction system inside [`FormCoordSpace`].
#[derive(Clone, Debug)]
pub struct FormBasis<F: Field> {
    space: FormCoordSpace<F>,
    /// Kernel vectors in canonical reduced form: vector j is 1 at free
    /// column j and supported elsewhere only on pivot columns.
    vectors: Vec<Vec<(u32, F::Elem)>>,
    free_cols: Vec<u32>,
}

/// Closed-form dimension of the space of twisted projective q-forms of
/// total degree d on P^n, used as an independent cross-check.
pub fn bott_dimension(n: usize, q: usize, d: u32) -> u64 {
    binomial(d as u64 + n as u64 - q as u64, d as u64) * binomial(d as u64 - 1, q as u64)
}

/// Builds the descended-form basis by imposing the radial contraction as an
/// exact linear system. Aborts if the kernel dimension disagrees with the
/// closed-form count.
pub fn twisted_form_basis<F: Field>(
    field: &F,
    n: usize,
    q: usize,
    d: u32,
) -> Result<FormBasis<F>> {
    if d as usize <= q || q > n || q == 0 {
        return Err(Error::Shape(format!(
            "twisted forms need 0 < q <= n and d > q, got n={n}, q={q}, d={d}"
        )));
    }
    let nvars = n + 1;
    let space = FormCoordSpace::new(field.clone(), nvars, q, d);
    // radial contraction lands in grade q-1, same total degree
    let target = FormCoordSpace::new(field.clone(), nvars, q - 1, d);
    let mut rref = Rref::new(field.clone(), space.dim());
    // assemble by equation rows: transpose of the per-column images
    let mut rows: Vec<Vec<(u32, F::Elem)>> = vec![Vec::new(); target.dim()];
    for (s, set) in space.sets.iter().enumerate() {
        for (mi, mu) in space.mono.iter().enumerate() {
            let col = (s * space.mono.len() + mi) as u32;
            let elem = PolyForm::from_comps(
                field.clone(),
                nvars,
                q,
                d,
                [(
                    set.clone(),
                    Poly::monomial(field.clone(), mu.clone(), field.one()),
                )],
            )?;
            let image = crate::forms::radial_contract(&elem);
            for (r, v) in target.encode_sparse(&image)? {
                rows[r as usize].push((col, v));
            }
        }
    }
    for row in rows {
        rref.push_sparse_row(&row);
    }
    let free_cols = rref.free_cols();
    let vectors: Vec<Vec<(u32, F::Elem)>> = rref
        .kernel_basis()
        .into_iter()
        .map(|dense| {
            dense
                .into_iter()
                .enumerate()
                .filter(|(_, v)| !field.is_zero(v))
                .map(|(i, v)| (i as u32, v))
                .collect()
        })
        .collect();
    let expected = bott_dimension(n, q, d);
    if vectors.len() as u64 != expected {
        return Err(Error::Inconsistency(format!(
            "descended-form dimension {} disagrees with the closed-form count {expected}",
            vectors.len()
        )));
    }
    Ok(FormBasis {
        space,
        vectors,
        free_cols,
    })
}

impl<F: Field> FormBasis<F> {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn n(&self) -> usize {
        self.space.nvars - 1
    }

    pub fn q(&self) -> usize {
        self.space.grade
    }

    pub fn total_degree(&self) -> u32 {
        self.space.total_degree
    }

    pub fn space(&self) -> &FormCoordSpace<F> {
        &self.space
    }

    pub fn affine_dim(&self) -> usize {
        self.space.dim()
    }

    /// The j-th basis element as a form.
    pub fn element(&self, j: usize) -> PolyForm<F> {
        let field = self.space.field.clone();
        let mut dense = vec![field.zero(); self.space.dim()];
        for (i, v) in &self.vectors[j] {
            dense[*i as usize] = v.clone();
        }
        self.space.decode(&dense).expect("kernel vector decodes")
    }

    /// Coordinates of a descended form in this basis. Because the kernel
    /// vectors are in reduced form, the coordinates are the values at the
    /// free columns; the expansion is then verified exactly, so a form
    /// outside the space is rejected.
    pub fn encode(&self, form: &PolyForm<F>) -> Result<Vec<F::Elem>> {
        let field = self.space.field.clone();
        let sparse = self.space.encode_sparse(form)?;
        let mut dense = vec![field.zero(); self.space.dim()];
        for (i, v) in sparse {
            dense[i as usize] = v;
        }
        let coords: Vec<F::Elem> = self
            .free_cols
            .iter()
            .map(|&f| dense[f as usize].clone())
            .collect();
        // verify: dense - sum_j coords_j vector_j = 0
        for (j, vector) in self.vectors.iter().enumerate() {
            if field.is_zero(&coords[j]) {
                continue;
            }
            let neg = field.neg(&coords[j]);
            for (i, v) in vector {
                field.add_mul_assign(&mut dense[*i as usize], &neg, v);
            }
        }
        if dense.iter().any(|v| !field.is_zero(v)) {
            return Err(Error::Degenerate(
                "form does not satisfy the descent condition".into(),
            ));
        }
        Ok(coords)
    }

    /// Expands basis coordinates back into a form.
    pub fn decode(&self, coords: &[F::Elem]) -> Result<PolyForm<F>> {
        let field = self.space.field.clone();
        if coords.len() != self.dim() {
            return Err(Error::Shape("basis coordinate length mismatch".into()));
        }
        let mut dense = vec![field.zero(); self.space.dim()];
        for (j, vector) in self.vectors.iter().enumerate() {
            if field.is_zero(&coords[j]) {
                continue;
            }
            for (i, v) in vector {
                field.add_mul_assign(&mut dense[*i as usize], &coords[j], v);
            }
        }
        self.space.decode(&dense)
    }

    /// Transposed kernel matrix: for each affine coordinate, the sparse row
    /// of basis-vector values at that coordinate.
    fn affine_rows(&self) -> Vec<Vec<(u32, F::Elem)>> {
        let mut rows: Vec<Vec<(u32, F::Elem)>> = vec![Vec::new(); self.space.dim()];
        for (j, vector) in self.vectors.iter().enumerate() {
            for (i, v) in vector {
                rows[*i as usize].push((j as u32, v.clone()));
            }
        }
        rows
    }
}

/// Number of scalar equations the perturbation system enumerates before
/// pruning: one per coefficient of the decomposability 4-forms plus one per
/// coefficient of the integrability 4-forms for each coordinate field.
pub fn perturbation_row_count(n: usize, d: u32) -> u64 {
    let nvars = n as u64 + 1;
    let sets4 = binomial(nvars, 4);
    let decomp = sets4 * monomial_count(n + 1, 2 * d - 4);
    let integ = nvars * sets4 * monomial_count(n + 1, 2 * d - 5);
    decomp + integ
}

/// Streams the rows of the perturbation system at omega over the descended
/// basis: first all coefficients of `alpha ^ omega`, then for each constant
/// coordinate field v the coefficients of `i_v omega ^ d alpha +
/// i_v alpha ^ d omega`. Zero rows are skipped; the returned count is the
/// number of rows enumerated before pruning.
#[allow(clippy::type_complexity)]
pub fn stream_perturbation_rows<F: Field>(
    omega: &PolyForm<F>,
    basis: &FormBasis<F>,
    mut sink: impl FnMut(&[(u32, F::Elem)]),
) -> Result<u64> {
    if omega.grade() != 2 || basis.q() != 2 {
        return Err(Error::Shape("perturbation system needs grade 2".into()));
    }
    if omega.total_degree() != basis.total_degree() || omega.nvars() != basis.space.nvars {
        return Err(Error::Shape("form does not match the basis shape".into()));
    }
    let field = basis.space.field.clone();
    let nvars = basis.space.nvars;
    if nvars < 4 {
        return Err(Error::Shape("ambient dimension too small".into()));
    }
    let d = omega.total_degree();
    let dim = basis.dim();
    let kmat = basis.affine_rows();
    let d_omega = ext_d(omega);
    let mut raw_rows = 0u64;

    let run_family = |target: &FormCoordSpace<F>,
                          contrib: &dyn Fn(&PolyForm<F>) -> Result<PolyForm<F>>,
                          sink: &mut dyn FnMut(&[(u32, F::Elem)])|
     -> Result<()> {
        let mut chunk: Vec<Vec<F::Elem>> = vec![vec![field.zero(); dim]; target.dim()];
        for (s, set) in basis.space.sets.iter().enumerate() {
            for (mi, mu) in basis.space.mono.iter().enumerate() {
                let affine_idx = s * basis.space.mono.len() + mi;
                let krow = &kmat[affine_idx];
                if krow.is_empty() {
                    continue;
                }
                let elem = PolyForm::from_comps(
                    field.clone(),
                    nvars,
                    2,
                    d,
                    [(
                        set.clone(),
                        Poly::monomial(field.clone(), mu.clone(), field.one()),
                    )],
                )?;
                let image = contrib(&elem)?;
                for (row, c) in target.encode_sparse(&image)? {
                    let slot = &mut chunk[row as usize];
                    for (j, kv) in krow {
                        let prod = field.mul(&c, kv);
                        slot[*j as usize] = field.add(&slot[*j as usize], &prod);
                    }
                }
            }
        }
        for row in chunk {
            let sparse: Vec<(u32, F::Elem)> = row
                .into_iter()
                .enumerate()
                .filter(|(_, v)| !field.is_zero(v))
                .map(|(j, v)| (j as u32, v))
                .collect();
            if !sparse.is_empty() {
                sink(&sparse);
            }
        }
        Ok(())
    };

    // decomposability block: alpha ^ omega
    let target_a = FormCoordSpace::new(field.clone(), nvars, 4, 2 * d);
    raw_rows += target_a.dim() as u64;
    run_family(&target_a, &|elem| wedge_forms(elem, omega), &mut sink)?;

    // integrability block, one sub-block per coordinate field
    let target_b = FormCoordSpace::new(field.clone(), nvars, 4, 2 * d - 1);
    for v in 0..nvars as u8 {
        raw_rows += target_b.dim() as u64;
        let iv_omega = contract_unit(v, omega);
        run_family(
            &target_b,
            &|elem| {
                let first = wedge_forms(&iv_omega, &ext_d(elem))?;
                let second = wedge_forms(&contract_unit(v, elem), &d_omega)?;
                first.add(&second)
            },
            &mut sink,
        )?;
    }
    Ok(raw_rows)
}

/// Materialized perturbation system with all-zero rows pruned. The kernel of
/// the returned matrix is the ambient cone over the Zariski tangent space
/// at omega in descended-basis coordinates.
pub fn perturbation_system<F: Field>(
    omega: &PolyForm<F>,
    basis: &FormBasis<F>,
) -> Result<SparseMatrix<F>> {
    let mut rows = Vec::new();
    stream_perturbation_rows(omega, basis, |row| rows.push(row.to_vec()))?;
    Ok(SparseMatrix::from_rows(
        basis.space.field.clone(),
        basis.dim(),
        rows,
    ))
}

/// Image of the polynomial direction `F'_k` (1-based k) under the derivative
/// of the parametrization, with every `F'_l` for `l != k` zero:
/// the product-rule terms over index sets avoiding k plus the differential
/// substituted into the slot of k.
pub fn drho_poly_direction<F: Ring>(
    p: &LogParams<F>,
    k: usize,
    fk_prime: &Poly<F>,
) -> Result<PolyForm<F>> {
    let field = p.field().clone();
    let m = p.m();
    if k < 1 || k > m {
        return Err(Error::Shape(format!("index {k} outside 1..={m}")));
    }
    if fk_prime.degree() != p.degree_vector().part(k - 1) {
        return Err(Error::Shape(format!(
            "direction degree {} but d_{k} = {}",
            fk_prime.degree(),
            p.degree_vector().part(k - 1)
        )));
    }
    let nvars = p.n() + 1;
    let q = p.q();
    let total = p.total_degree();
    let t = p.lambda_tensor()?;
    let polys = p.polys();
    let diffs: Vec<PolyForm<F>> = polys.iter().map(differential).collect();
    let dfk = differential(fk_prime);
    let mut out = PolyForm::zero(field.clone(), nvars, q, total);
    for (set, coeff) in t.comps() {
        let term = if set.contains(&(k as u8)) {
            // replace dF_k by dF'_k in its slot
            let mut acc = PolyForm::from_poly(hat_f(&field, polys, set)?);
            for &i in set {
                let factor = if i as usize == k { &dfk } else { &diffs[i as usize - 1] };
                acc = wedge_forms(&acc, factor)?;
            }
            acc
        } else {
            // differentiate the product Fhat_I in its F_k factor
            let mut with_k: Vec<u8> = set.clone();
            with_k.push(k as u8);
            with_k.sort_unstable();
            let hat = hat_f(&field, polys, &with_k)?;
            let mut acc = PolyForm::from_poly(hat.mul(fk_prime)?);
            for &i in set {
                acc = wedge_forms(&acc, &diffs[i as usize - 1])?;
            }
            acc
        };
        out = out.add(&term.scale(coeff))?;
    }
    Ok(out)
}

/// Column layout of the derivative matrix: residue-plane directions first,
/// then per-polynomial monomial directions.
#[derive(Clone, Debug)]
pub struct DrhoLayout {
    pub m: usize,
    /// 2(m-1) residue tangent generators.
    pub lambda_cols: usize,
    /// Monomial counts per polynomial slot.
    pub poly_cols: Vec<usize>,
}

impl DrhoLayout {
    pub fn new(n: usize, d: &DegreeVector) -> Self {
        let poly_cols = d
            .parts()
            .iter()
            .map(|&di| monomial_count(n + 1, di) as usize)
            .collect::<Vec<_>>();
        DrhoLayout {
            m: d.m(),
            lambda_cols: 2 * (d.m() - 1),
            poly_cols,
        }
    }

    pub fn total(&self) -> usize {
        self.lambda_cols + self.poly_cols.iter().sum::<usize>()
    }
}

/// Derivative matrix of the parametrization at the parameter point, in
/// descended-basis coordinates. Columns are the images of the residue-plane
/// tangent generators followed by the images of each monomial direction of
/// each polynomial slot.
pub fn drho_matrix<F: Field>(p: &LogParams<F>, basis: &FormBasis<F>) -> Result<SparseMatrix<F>> {
    if p.q() != 2 {
        return Err(Error::Shape("derivative matrix is built for q = 2".into()));
    }
    let field = p.field().clone();
    let d = p.degree_vector();
    let layout = DrhoLayout::new(p.n(), d);
    let mut entries: Vec<(u32, u32, F::Elem)> = Vec::new();
    let mut col = 0u32;

    let dirs = grass_tangent_dirs(&p.lambdas()[0], &p.lambdas()[1], d)?;
    for t in &dirs {
        let form = log_form_from_tensor(&field, t, d, p.polys())?;
        for (i, v) in basis.encode(&form)?.into_iter().enumerate() {
            if !field.is_zero(&v) {
                entries.push((i as u32, col, v));
            }
        }
        col += 1;
    }
    for k in 1..=layout.m {
        let mono = MonomialBasis::new(p.n() + 1, d.part(k - 1));
        for mu in mono.iter() {
            let direction = Poly::monomial(field.clone(), mu.clone(), field.one());
            let form = drho_poly_direction(p, k, &direction)?;
            for (i, v) in basis.encode(&form)?.into_iter().enumerate() {
                if !field.is_zero(&v) {
                    entries.push((i as u32, col, v));
                }
            }
            col += 1;
        }
    }
    debug_assert_eq!(col as usize, layout.total());
    SparseMatrix::from_entries(field, basis.dim(), layout.total(), entries)
}

/// A tangent direction of the parameter space: perturbations of the residue
/// vectors (inside the annihilator hyperplane) and of each polynomial.
#[derive(Clone, Debug)]
pub struct TangentDirection<F: Ring> {
    pub dlambdas: Vec<MultiVector<F>>,
    pub dpolys: Vec<Poly<F>>,
}

impl<F: Ring> TangentDirection<F> {
    pub fn zero(p: &LogParams<F>) -> Self {
        let field = p.field().clone();
        let nvars = p.n() + 1;
        TangentDirection {
            dlambdas: (0..p.q())
                .map(|_| MultiVector::zero(field.clone(), p.m(), 1))
                .collect(),
            dpolys: p
                .degree_vector()
                .parts()
                .iter()
                .map(|&di| Poly::zero(field.clone(), nvars, di))
                .collect(),
        }
    }
}

/// Coordinates of a vector of the annihilator hyperplane in the
/// deterministic basis `mu_k = d_k e_1 - d_1 e_k`: the coefficient of mu_k
/// is `-w_k / d_1`.
fn hyperplane_coords<F: Field>(
    field: &F,
    d: &DegreeVector,
    w: &MultiVector<F>,
) -> Result<Vec<F::Elem>> {
    if !interior_d(d, w).is_zero() {
        return Err(Error::Degenerate(
            "direction not annihilated by the degree vector".into(),
        ));
    }
    let dense = w.to_vector();
    let inv_d1 = field.inv(&field.from_i64(d.part(0) as i64));
    Ok(dense[1..]
        .iter()
        .map(|wk| field.neg(&field.mul(wk, &inv_d1)))
        .collect())
}

/// Validates the derivative matrix against an exact first-order computation:
/// the parameter point is perturbed along the direction over the dual
/// numbers, the construction is re-run there, and the epsilon part is
/// compared with the matrix-vector product. Exact equality is required.
pub fn dual_number_consistency_with<F: Field>(
    p: &LogParams<F>,
    dir: &TangentDirection<F>,
    basis: &FormBasis<F>,
    drho: &SparseMatrix<F>,
) -> Result<bool> {
    let field = p.field().clone();
    let d = p.degree_vector();
    let m = p.m();
    if dir.dlambdas.len() != p.q() || dir.dpolys.len() != m {
        return Err(Error::Shape("direction shape mismatch".into()));
    }
    let dual = Dual::new(field.clone());

    // lift the parameter point with its perturbation
    let lambdas_dual: Vec<MultiVector<Dual<F>>> = p
        .lambdas()
        .iter()
        .zip(dir.dlambdas.iter())
        .map(|(l, dl)| {
            let base = l.to_vector();
            let eps = dl.to_vector();
            let coords: Vec<_> = base
                .into_iter()
                .zip(eps)
                .map(|(v, e)| dual.with_eps(v, e))
                .collect();
            MultiVector::from_vector(dual.clone(), &coords)
        })
        .collect();
    let polys_dual: Vec<Poly<Dual<F>>> = p
        .polys()
        .iter()
        .zip(dir.dpolys.iter())
        .map(|(f, df)| {
            let mb = MonomialBasis::new(f.nvars(), f.degree());
            let base = f.to_coords(&mb)?;
            let eps = df.to_coords(&mb)?;
            let coords: Vec<_> = base
                .into_iter()
                .zip(eps)
                .map(|(v, e)| dual.with_eps(v, e))
                .collect();
            Poly::from_coords(dual.clone(), &mb, &coords)
        })
        .collect::<Result<Vec<_>>>()?;
    let p_dual = LogParams::new(
        dual.clone(),
        p.n(),
        p.q(),
        d.clone(),
        lambdas_dual,
        polys_dual,
    )?;
    let omega_dual = construct_log_form(&p_dual)?;

    // the value part must reproduce omega itself
    let value = omega_dual.map_scalars(field.clone(), &|x| Ok(x.val.clone()))?;
    if value != construct_log_form(p)? {
        return Err(Error::Inconsistency(
            "dual lift does not reproduce the base form".into(),
        ));
    }
    let eps_part = omega_dual.map_scalars(field.clone(), &|x| Ok(x.eps.clone()))?;
    let eps_coords = basis.encode(&eps_part)?;

    // assemble the direction coefficient vector in the column layout
    let layout = DrhoLayout::new(p.n(), d);
    let mut x = vec![field.zero(); layout.total()];
    let a_coords = hyperplane_coords(&field, d, &dir.dlambdas[0])?;
    let b_coords = hyperplane_coords(&field, d, &dir.dlambdas[1])?;
    for (k, c) in a_coords.into_iter().enumerate() {
        x[k] = c;
    }
    for (k, c) in b_coords.into_iter().enumerate() {
        x[m - 1 + k] = c;
    }
    let mut offset = layout.lambda_cols;
    for (k, df) in dir.dpolys.iter().enumerate() {
        let mb = MonomialBasis::new(p.n() + 1, d.part(k));
        for (i, c) in df.to_coords(&mb)?.into_iter().enumerate() {
            x[offset + i] = c;
        }
        offset += mb.len();
    }
    let image = drho.apply(&x)?;
    Ok(image == eps_coords)
}

/// One-shot variant that builds the basis and matrix itself.
pub fn dual_number_consistency<F: Field>(
    p: &LogParams<F>,
    dir: &TangentDirection<F>,
) -> Result<bool> {
    let basis = twisted_form_basis(p.field(), p.n(), p.q(), p.total_degree())?;
    let drho = drho_matrix(p, &basis)?;
    dual_number_consistency_with(p, dir, &basis, &drho)
}

/// Draws a reproducible tangent direction with residue perturbations in the
/// annihilator hyperplane and dense polynomial perturbations.
pub fn random_direction<F: Field>(
    p: &LogParams<F>,
    rng: &mut SplitMix64,
) -> TangentDirection<F> {
    let field = p.field().clone();
    let d = p.degree_vector();
    let hyper = cmd_basis(&field, d);
    let dlambdas = (0..p.q())
        .map(|_| {
            let mut v = MultiVector::zero(field.clone(), p.m(), 1);
            for mu in &hyper {
                let c = field.sample(rng);
                v = v.add(&mu.scale(&c)).expect("same shape");
            }
            v
        })
        .collect();
    let dpolys = d
        .parts()
        .iter()
        .map(|&di| {
            let mb = MonomialBasis::new(p.n() + 1, di);
            let coords: Vec<F::Elem> = (0..mb.len()).map(|_| field.sample(rng)).collect();
            Poly::from_coords(field.clone(), &mb, &coords).expect("dense coordinates")
        })
        .collect();
    TangentDirection { dlambdas, dpolys }
}

/// Sanity flags of a certificate run. All four are mathematically forced for
/// a generic instance; a false value aborts the run with a diagnostic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SanityFlags {
    pub omega_in_kernel: bool,
    pub omega_in_image: bool,
    pub image_in_kernel: bool,
    pub step1_vanishing: bool,
}

/// Outcome of a stability certificate run.
#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub n: usize,
    pub q: usize,
    pub degrees: Vec<u32>,
    pub seed: Option<u64>,
    pub field: FieldDesc,
    /// Dimension of the descended-form space.
    pub dim_ambient: usize,
    /// Ambient kernel dimension of the perturbation system.
    pub ker_dim: usize,
    /// Ambient rank of the derivative matrix.
    pub drho_rank: usize,
    pub quotient_tangent_dim: usize,
    pub quotient_image_dim: usize,
    pub sanity: SanityFlags,
    pub balanced_k2: bool,
    /// True when the degree vector is not 2-balanced; the stability theorem
    /// is silent there and the verdict is reported without any claim.
    pub theorem_silent: bool,
    pub stable: bool,
}

/// Dimension of the parameter space: sum of the projectivized polynomial
/// dimensions plus the Grassmannian of residue planes.
pub fn parameter_space_dim(n: usize, d: &DegreeVector, q: usize) -> i128 {
    let m = d.m() as i128;
    let sum: i128 = d
        .parts()
        .iter()
        .map(|&di| monomial_count(n + 1, di) as i128)
        .sum();
    sum - m + q as i128 * (m - 1 - q as i128)
}

/// Number of dual-number directions validated per certificate run.
const DUAL_CHECK_DIRECTIONS: usize = 10;

/// Runs the full stability certificate at a parameter point: builds the
/// descended basis (with its closed-form cross-check), streams the
/// perturbation system through an exact elimination, assembles the
/// derivative matrix, verifies the inclusion sanity flags, the
/// stratum-vanishing property of every kernel vector, the parameter-count
/// identity, and a sample of dual-number derivative checks. The verdict is
/// stable iff the ambient kernel dimension equals the ambient derivative
/// rank.
pub fn certify_stability<F: Field>(
    p: &LogParams<F>,
    seed: Option<u64>,
) -> Result<StabilityReport> {
    if p.q() != 2 {
        return Err(Error::Shape("certificate requires q = 2".into()));
    }
    if p.m() <= 3 || p.n() <= 3 {
        return Err(Error::Shape(format!(
            "certificate requires m > 3 and n > 3, got m = {}, n = {}",
            p.m(),
            p.n()
        )));
    }
    let field = p.field().clone();
    let d = p.degree_vector();
    let m = p.m() as i128;

    // parameter-count identity: residue block plus polynomial blocks minus
    // the scaling redundancies agree with the closed-form dimension
    let block_count: i128 = 2 * (m - 3)
        + d.parts()
            .iter()
            .map(|&di| monomial_count(p.n() + 1, di) as i128 - 1)
            .sum::<i128>();
    if block_count != parameter_space_dim(p.n(), d, 2) {
        return Err(Error::Inconsistency(
            "parameter-count identity failed".into(),
        ));
    }

    let balanced_k2 = balanced_check(d, 2);
    let basis = twisted_form_basis(&field, p.n(), 2, p.total_degree())?;
    let omega = construct_log_form(p)?;
    let omega_coords = basis.encode(&omega)?;

    let mut rref = Rref::new(field.clone(), basis.dim());
    stream_perturbation_rows(&omega, &basis, |row| {
        rref.push_sparse_row(row);
    })?;
    let ker_dim = basis.dim() - rref.rank();

    let drho = drho_matrix(p, &basis)?;
    // rank and column-space membership via the columns as rows
    let mut col_space = Rref::new(field.clone(), basis.dim());
    let mut columns: Vec<Vec<(u32, F::Elem)>> = vec![Vec::new(); drho.ncols()];
    for (r, row) in drho.rows().enumerate() {
        for (c, v) in row {
            columns[*c as usize].push((r as u32, v.clone()));
        }
    }
    let mut image_in_kernel = true;
    for colv in &columns {
        let mut dense = vec![field.zero(); basis.dim()];
        for (i, v) in colv {
            dense[*i as usize] = v.clone();
        }
        if !rref.annihilates(&dense) {
            image_in_kernel = false;
        }
        col_space.push_dense_row(dense);
    }
    let drho_rank = col_space.rank();

    let omega_in_kernel = rref.annihilates(&omega_coords);
    let omega_in_image = col_space.contains(&omega_coords);

    let mut step1_vanishing = true;
    for kv in rref.kernel_basis() {
        let alpha = basis.decode(&kv)?;
        if !vanishes_on_stratum(&field, &alpha, p.polys(), 4)? {
            step1_vanishing = false;
            break;
        }
    }

    let sanity = SanityFlags {
        omega_in_kernel,
        omega_in_image,
        image_in_kernel,
        step1_vanishing,
    };
    if !(omega_in_kernel && omega_in_image && image_in_kernel && step1_vanishing) {
        return Err(Error::Inconsistency(format!(
            "sanity flags failed: {sanity:?}, ker_dim {ker_dim}, drho_rank {drho_rank}, \
             dim {}, n {}, degrees {:?}, field {}",
            basis.dim(),
            p.n(),
            d.parts(),
            field.describe()
        )));
    }
    if drho_rank > ker_dim {
        return Err(Error::Inconsistency(format!(
            "derivative rank {drho_rank} exceeds kernel dimension {ker_dim}"
        )));
    }

    // exact first-order validation of the derivative matrix
    let mut rng = SplitMix64::new(seed.unwrap_or(0) ^ 0x5EED_D0A1);
    for _ in 0..DUAL_CHECK_DIRECTIONS {
        let dir = random_direction(p, &mut rng);
        if !dual_number_consistency_with(p, &dir, &basis, &drho)? {
            return Err(Error::Inconsistency(
                "dual-number derivative check failed".into(),
            ));
        }
    }

    Ok(StabilityReport {
        n: p.n(),
        q: 2,
        degrees: d.parts().to_vec(),
        seed,
        field: field.describe(),
        dim_ambient: basis.dim(),
        ker_dim,
        drho_rank,
        quotient_tangent_dim: ker_dim - 1,
        quotient_image_dim: drho_rank - 1,
        sanity,
        balanced_k2,
        theorem_silent: !balanced_k2,
        stable: drho_rank == ker_dim,
    })
}

/// One entry of a scan configuration.
#[derive(Clone, Debug)]
pub struct ScanEntry {
    pub n: usize,
    pub degrees: Vec<u32>,
}

/// Identifies one certificate run inside a scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanKey {
    pub n: usize,
    pub degrees: Vec<u32>,
    pub seed: u64,
    pub prime: u64,
}

#[derive(Clone, Debug)]
pub struct ScanOutcome {
    pub key: ScanKey,
    pub result: core::result::Result<StabilityReport, String>,
}

/// Runs the certificate over the product of entries, seeds, and primes.
/// Each (entry, seed) pair deterministically generates one rational generic
/// instance which is then reduced modulo each prime, so rank agreement
/// across primes is meaningful. Per-run errors are recorded and the scan
/// continues.
pub fn scan(entries: &[ScanEntry], seeds: &[u64], primes: &[u64]) -> Vec<ScanOutcome> {
    let mut out = Vec::new();
    for entry in entries {
        for &seed in seeds {
            let instance = DegreeVector::new(entry.degrees.clone())
                .and_then(|d| random_params(&Rationals, seed, entry.n, 2, &d));
            for &prime in primes {
                let key = ScanKey {
                    n: entry.n,
                    degrees: entry.degrees.clone(),
                    seed,
                    prime,
                };
                let result = (|| -> Result<StabilityReport> {
                    let params_q = instance.as_ref().map_err(Clone::clone)?;
                    let fp = PrimeField::new(prime)?;
                    let params_p =
                        params_q.map_scalars(fp, &|x| fp.reduce_rational(x))?;
                    certify_stability(&params_p, Some(seed))
                })()
                .map_err(|e| alloc::string::ToString::to_string(&e));
                out.push(ScanOutcome { key, result });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rationals;
    use crate::logfol::integrability_check;

    fn fp() -> PrimeField {
        PrimeField::new(32003).unwrap()
    }

    fn dv(parts: &[u32]) -> DegreeVector {
        DegreeVector::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn basis_dimensions_match_the_closed_form() {
        let f = fp();
        // kernel of the 9 -> 6 radial system
        let b = twisted_form_basis(&f, 2, 1, 2).unwrap();
        assert_eq!(b.dim(), 3);
        assert_eq!(b.affine_dim(), 9);

        let b = twisted_form_basis(&f, 3, 2, 3).unwrap();
        assert_eq!(b.dim(), 4);

        let b = twisted_form_basis(&f, 4, 2, 5).unwrap();
        assert_eq!(b.dim(), 126);
        assert_eq!(bott_dimension(4, 2, 5), 126);

        // every element descends and encode/decode round-trips
        for j in [0usize, 1, 2] {
            let e = b.element(j);
            assert!(crate::forms::radial_contract(&e).is_zero());
            let coords = b.encode(&e).unwrap();
            assert_eq!(coords.iter().filter(|c| **c != 0).count(), 1);
            assert_eq!(b.decode(&coords).unwrap(), e);
        }
    }

    #[test]
    fn encode_rejects_non_descended_forms() {
        let f = fp();
        let b = twisted_form_basis(&f, 3, 2, 3).unwrap();
        let raw = PolyForm::basis(f, 4, &[0, 1])
            .scale_poly(&Poly::variable(f, 4, 2))
            .unwrap();
        assert!(b.encode(&raw).is_err());
    }

    #[test]
    fn non_integrable_witness_exists() {
        // Brute-force search through sums of two descended generators on P^4.
        // The degree-3 space on P^3 is too small: every element there comes
        // from a linear projection and is integrable.
        let f = fp();
        let basis = twisted_form_basis(&f, 4, 2, 3).unwrap();
        let mut found = false;
        'outer: for i in 0..basis.dim() {
            for j in i + 1..basis.dim() {
                let alpha = basis.element(i).add(&basis.element(j)).unwrap();
                if !integrability_check(&alpha, 2).unwrap() {
                    found = true;
                    break 'outer;
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn perturbation_counts_and_kernel() {
        let f = fp();
        let d = dv(&[1, 1, 1, 1, 1]);
        let p = random_params(&f, 1, 4, 2, &d).unwrap();
        let basis = twisted_form_basis(&f, 4, 2, 5).unwrap();
        let omega = construct_log_form(&p).unwrap();

        // 5 * C(10,4) + 5 * 5 * C(9,4) rows before pruning
        assert_eq!(perturbation_row_count(4, 5), 5 * 210 + 25 * 126);
        let mut streamed = 0u64;
        let raw = stream_perturbation_rows(&omega, &basis, |_| streamed += 1).unwrap();
        assert_eq!(raw, 4200);
        assert!(streamed <= raw);

        let system = perturbation_system(&omega, &basis).unwrap();
        assert_eq!(system.ncols(), 126);
        assert_eq!(system.nrows() as u64, streamed);

        // omega lies in the kernel
        let coords = basis.encode(&omega).unwrap();
        let image = system.apply(&coords).unwrap();
        assert!(image.iter().all(|x| f.is_zero(x)));
    }

    #[test]
    fn drho_layout_and_omega_column() {
        let f = fp();
        let d = dv(&[1, 1, 1, 1, 1]);
        let p = random_params(&f, 1, 4, 2, &d).unwrap();
        let basis = twisted_form_basis(&f, 4, 2, 5).unwrap();
        let layout = DrhoLayout::new(4, &d);
        assert_eq!(layout.total(), 8 + 25);
        let drho = drho_matrix(&p, &basis).unwrap();
        assert_eq!(drho.ncols(), 33);
        assert_eq!(drho.nrows(), 126);

        // the direction F'_k = F_k reproduces omega exactly
        let omega = construct_log_form(&p).unwrap();
        for k in 1..=5usize {
            let img = drho_poly_direction(&p, k, &p.polys()[k - 1]).unwrap();
            assert_eq!(img, omega);
        }
    }

    #[test]
    fn dual_number_directions_match_the_matrix() {
        let f = fp();
        let d = dv(&[1, 1, 1, 1, 1]);
        let p = random_params(&f, 5, 4, 2, &d).unwrap();
        let basis = twisted_form_basis(&f, 4, 2, 5).unwrap();
        let drho = drho_matrix(&p, &basis).unwrap();

        // zero direction has zero epsilon part
        let zero = TangentDirection::zero(&p);
        assert!(dual_number_consistency_with(&p, &zero, &basis, &drho).unwrap());

        // perturbing l1 by l1 gives epsilon part omega
        let mut dir = TangentDirection::zero(&p);
        dir.dlambdas[0] = p.lambdas()[0].clone();
        assert!(dual_number_consistency_with(&p, &dir, &basis, &drho).unwrap());

        let mut rng = SplitMix64::new(77);
        for _ in 0..3 {
            let dir = random_direction(&p, &mut rng);
            assert!(dual_number_consistency_with(&p, &dir, &basis, &drho).unwrap());
        }
    }

    #[test]
    fn certificate_on_the_linear_quintic() {
        let f = fp();
        let d = dv(&[1, 1, 1, 1, 1]);
        let p = random_params(&f, 1, 4, 2, &d).unwrap();
        let report = certify_stability(&p, Some(1)).unwrap();
        assert_eq!(report.dim_ambient, 126);
        assert!(report.balanced_k2);
        assert!(!report.theorem_silent);
        assert!(report.stable, "rank {} vs kernel {}", report.drho_rank, report.ker_dim);
        assert_eq!(report.drho_rank, report.ker_dim);
        assert_eq!(report.quotient_tangent_dim, report.ker_dim - 1);
        assert!(report.sanity.step1_vanishing);
    }

    #[test]
    fn certificate_preconditions() {
        let f = fp();
        // m = 3 is rejected outright
        let d = dv(&[1, 1, 1]);
        let p = random_params(&f, 1, 4, 2, &d).unwrap();
        assert!(matches!(
            certify_stability(&p, None),
            Err(Error::Shape(_))
        ));
        // n = 3 as well
        let d = dv(&[1, 1, 1, 1, 1]);
        let p = random_params(&f, 1, 3, 2, &d).unwrap();
        assert!(matches!(
            certify_stability(&p, None),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn generic_descended_forms_miss_the_deep_stratum() {
        let f = fp();
        let d = dv(&[1, 1, 1, 1, 1]);
        let p = random_params(&f, 11, 4, 2, &d).unwrap();
        let basis = twisted_form_basis(&f, 4, 2, 5).unwrap();
        let probe = basis.element(0).add(&basis.element(17)).unwrap();
        assert!(
            !crate::logfol::vanishes_on_stratum(&f, &probe, p.polys(), 4).unwrap(),
            "a random descended form is not tangent, so it misses the stratum ideal"
        );
    }

    #[test]
    fn theorem_silent_run_still_reports() {
        let f = fp();
        // (1,1,1,2) is not 2-balanced: 1+2 = 3 >= 5 - 3
        let d = dv(&[1, 1, 1, 2]);
        let p = random_params(&f, 3, 4, 2, &d).unwrap();
        let report = certify_stability(&p, Some(3)).unwrap();
        assert!(!report.balanced_k2);
        assert!(report.theorem_silent);
        assert!(report.drho_rank <= report.ker_dim);
    }

    #[test]
    fn scan_is_deterministic_and_multi_prime_consistent() {
        let entries = [ScanEntry {
            n: 4,
            degrees: vec![1, 1, 1, 1, 1],
        }];
        let out = scan(&entries, &[1], &[32003, 65537]);
        assert_eq!(out.len(), 2);
        let a = out[0].result.as_ref().unwrap();
        let b = out[1].result.as_ref().unwrap();
        assert_eq!(a.ker_dim, b.ker_dim);
        assert_eq!(a.drho_rank, b.drho_rank);
        assert!(a.stable && b.stable);

        let again = scan(&entries, &[1], &[32003]);
        assert_eq!(again[0].result.as_ref().unwrap().ker_dim, a.ker_dim);
    }

    #[test]
    fn parameter_count_identity_holds() {
        for (n, parts) in [(4usize, vec![1u32, 1, 1, 1, 1]), (4, vec![1, 1, 1, 1, 1, 2])] {
            let d = dv(&parts);
            let m = d.m() as i128;
            let lhs: i128 = 2 * (m - 3)
                + d.parts()
                    .iter()
                    .map(|&di| monomial_count(n + 1, di) as i128 - 1)
                    .sum::<i128>();
            assert_eq!(lhs, parameter_space_dim(n, &d, 2));
        }
    }

    #[test]
    fn rational_certificate_small() {
        // m = 4 exercises the exact-rationals path end to end; the degree
        // vector is not 2-balanced, so the run is theorem-silent.
        let d = dv(&[1, 1, 1, 1]);
        let p = random_params(&Rationals, 2, 4, 2, &d).unwrap();
        let report = certify_stability(&p, Some(2)).unwrap();
        assert_eq!(report.field, FieldDesc::Rationals);
        assert!(report.theorem_silent);
        assert!(report.drho_rank <= report.ker_dim);
    }

    #[test]
    #[ignore = "exact-rationals confirmation of the linear quintic, ~2 min"]
    fn rational_certificate_quintic() {
        let d = dv(&[1, 1, 1, 1, 1]);
        let p = random_params(&Rationals, 2, 4, 2, &d).unwrap();
        let report = certify_stability(&p, Some(2)).unwrap();
        assert!(report.stable);
        assert_eq!(report.field, FieldDesc::Rationals);
    }
}
