//! Exterior algebra of C^m over the index set {1..m}: wedge products,
//! interior product by a degree vector, the associated Koszul complex,
//! decomposability, and tangent directions of the Grassmannian of residue
//! planes.
//!
//! Antisymmetric tensors are stored on sorted index sets only; all sign
//! bookkeeping lives in the operations. This sorted convention is canonical
//! throughout the crate: formulas stated elsewhere with unordered double
//! sums are re-derived for sorted sets before being transcribed.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::comb::{k_subsets, merge_sign};
use crate::error::{Error, Result};
use crate::field::{Field, Ring};
use crate::linalg::SparseMatrix;

/// Positive degree vector d = (d_1, ..., d_m).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeVector {
    parts: Vec<u32>,
}

impl DegreeVector {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Degenerate("empty degree vector".into()));
        }
        if parts.contains(&0) {
            return Err(Error::Degenerate("degree vector parts must be >= 1".into()));
        }
        Ok(DegreeVector { parts })
    }

    pub fn m(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> u32 {
        self.parts[i]
    }

    pub fn total(&self) -> u32 {
        self.parts.iter().sum()
    }
}

/// Antisymmetric tensor in Lambda^q C^m on sorted index sets (1-based).
#[derive(Clone, Debug, PartialEq)]
pub struct MultiVector<F: Ring> {
    field: F,
    m: usize,
    grade: usize,
    comps: BTreeMap<Vec<u8>, F::Elem>,
}

impl<F: Ring> MultiVector<F> {
    pub fn zero(field: F, m: usize, grade: usize) -> Self {
        MultiVector {
            field,
            m,
            grade,
            comps: BTreeMap::new(),
        }
    }

    /// Basis vector e_{i_1} ^ ... ^ e_{i_q} for a sorted index set.
    pub fn basis(field: F, m: usize, indices: &[u8]) -> Self {
        let one = field.one();
        let mut mv = MultiVector::zero(field, m, indices.len());
        mv.comps.insert(indices.to_vec(), one);
        mv
    }

    /// Grade-1 vector from dense coordinates (length m).
    pub fn from_vector(field: F, coords: &[F::Elem]) -> Self {
        let mut comps = BTreeMap::new();
        for (i, c) in coords.iter().enumerate() {
            if !field.is_zero(c) {
                comps.insert(alloc::vec![i as u8 + 1], c.clone());
            }
        }
        MultiVector {
            field,
            m: coords.len(),
            grade: 1,
            comps,
        }
    }

    pub fn from_comps(
        field: F,
        m: usize,
        grade: usize,
        comps: impl IntoIterator<Item = (Vec<u8>, F::Elem)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (set, c) in comps {
            if set.len() != grade {
                return Err(Error::Shape(format!(
                    "index set of size {}, expected grade {grade}",
                    set.len()
                )));
            }
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Shape("index set not strictly increasing".into()));
            }
            if set.iter().any(|&i| i == 0 || i as usize > m) {
                return Err(Error::Shape(format!("index outside 1..={m}")));
            }
            if field.is_zero(&c) {
                continue;
            }
            if map.insert(set, c).is_some() {
                return Err(Error::Shape("duplicate index set".into()));
            }
        }
        Ok(MultiVector {
            field,
            m,
            grade,
            comps: map,
        })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn comps(&self) -> impl Iterator<Item = (&Vec<u8>, &F::Elem)> {
        self.comps.iter()
    }

    pub fn coeff(&self, set: &[u8]) -> F::Elem {
        self.comps
            .get(set)
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    /// Dense coordinates of a grade-1 vector.
    pub fn to_vector(&self) -> Vec<F::Elem> {
        assert_eq!(self.grade, 1);
        let mut out = alloc::vec![self.field.zero(); self.m];
        for (set, c) in &self.comps {
            out[set[0] as usize - 1] = c.clone();
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        if self.m != other.m || self.grade != other.grade {
            return Err(Error::Shape("multivector shape mismatch".into()));
        }
        let mut comps = self.comps.clone();
        for (set, c) in &other.comps {
            match comps.get_mut(set) {
                Some(x) => {
                    *x = self.field.add(x, c);
                    if self.field.is_zero(x) {
                        comps.remove(set);
                    }
                }
                None => {
                    comps.insert(set.clone(), c.clone());
                }
            }
        }
        Ok(MultiVector {
            field: self.field.clone(),
            m: self.m,
            grade: self.grade,
            comps,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&self.field.from_i64(-1)))
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        if self.field.is_zero(c) {
            return MultiVector::zero(self.field.clone(), self.m, self.grade);
        }
        let comps = self
            .comps
            .iter()
            .map(|(s, x)| (s.clone(), self.field.mul(c, x)))
            .collect();
        MultiVector {
            field: self.field.clone(),
            m: self.m,
            grade: self.grade,
            comps,
        }
    }

    pub fn map_scalars<G: Ring>(
        &self,
        target: G,
        f: &impl Fn(&F::Elem) -> Result<G::Elem>,
    ) -> Result<MultiVector<G>> {
        let mut comps = BTreeMap::new();
        for (s, c) in &self.comps {
            let w = f(c)?;
            if !target.is_zero(&w) {
                comps.insert(s.clone(), w);
            }
        }
        Ok(MultiVector {
            field: target,
            m: self.m,
            grade: self.grade,
            comps,
        })
    }
}

/// Exterior product with shuffle signs. Grades add; when they exceed m the
/// result is the zero tensor of the formal sum grade.
pub fn wedge_mv<F: Ring>(a: &MultiVector<F>, b: &MultiVector<F>) -> Result<MultiVector<F>> {
    if a.field != b.field {
        return Err(Error::FieldMismatch);
    }
    if a.m != b.m {
        return Err(Error::Shape(format!("wedge over m={} and m={}", a.m, b.m)));
    }
    let field = a.field.clone();
    let mut out = MultiVector::zero(field.clone(), a.m, a.grade + b.grade);
    for (sa, ca) in &a.comps {
        for (sb, cb) in &b.comps {
            if let Some((merged, negative)) = merge_sign(sa, sb) {
                let mut c = field.mul(ca, cb);
                if negative {
                    c = field.neg(&c);
                }
                match out.comps.get_mut(&merged) {
                    Some(x) => {
                        *x = field.add(x, &c);
                        if field.is_zero(x) {
                            out.comps.remove(&merged);
                        }
                    }
                    None => {
                        if !field.is_zero(&c) {
                            out.comps.insert(merged, c);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Interior product of a grade-q tensor by the degree vector:
/// each index i_j of a component is removed in turn with sign (-1)^{j+1}
/// and weight d_{i_j}.
pub fn interior_d<F: Ring>(d: &DegreeVector, t: &MultiVector<F>) -> MultiVector<F> {
    assert!(t.grade >= 1, "interior product needs grade >= 1");
    assert_eq!(t.m, d.m(), "degree vector length mismatch");
    let field = t.field.clone();
    let mut out = MultiVector::zero(field.clone(), t.m, t.grade - 1);
    for (set, c) in &t.comps {
        for (j, &idx) in set.iter().enumerate() {
            let mut rest: Vec<u8> = Vec::with_capacity(set.len() - 1);
            rest.extend_from_slice(&set[..j]);
            rest.extend_from_slice(&set[j + 1..]);
            let weight = field.from_i64(d.part(idx as usize - 1) as i64);
            let mut term = field.mul(c, &weight);
            if j % 2 == 1 {
                term = field.neg(&term);
            }
            match out.comps.get_mut(&rest) {
                Some(x) => {
                    *x = field.add(x, &term);
                    if field.is_zero(x) {
                        out.comps.remove(&rest);
                    }
                }
                None => {
                    if !field.is_zero(&term) {
                        out.comps.insert(rest, term);
                    }
                }
            }
        }
    }
    out
}

/// Deterministic basis of the hyperplane `{mu : mu . d = 0}`:
/// mu_k = d_k e_1 - d_1 e_k for k = 2..m. Every element is annihilated by
/// the interior product with d.
pub fn cmd_basis<F: Ring>(field: &F, d: &DegreeVector) -> Vec<MultiVector<F>> {
    let m = d.m();
    let d1 = field.from_i64(d.part(0) as i64);
    let mut out = Vec::with_capacity(m - 1);
    for k in 2..=m {
        let dk = field.from_i64(d.part(k - 1) as i64);
        let mut coords = alloc::vec![field.zero(); m];
        coords[0] = dk;
        coords[k - 1] = field.neg(&d1);
        out.push(MultiVector::from_vector(field.clone(), &coords));
    }
    out
}

/// Matrix of the interior product from Lambda^q to Lambda^{q-1} in the sorted
/// index set bases.
pub fn interior_d_matrix<F: Field>(field: &F, d: &DegreeVector, q: usize) -> SparseMatrix<F> {
    let m = d.m();
    let universe: Vec<u8> = (1..=m as u8).collect();
    let domain = k_subsets(&universe, q);
    let codomain = k_subsets(&universe, q - 1);
    let codomain_index: BTreeMap<Vec<u8>, u32> = codomain
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, s)| (s, i as u32))
        .collect();
    let mut entries = Vec::new();
    for (col, set) in domain.iter().enumerate() {
        let image = interior_d(d, &MultiVector::basis(field.clone(), m, set));
        for (s, c) in image.comps() {
            entries.push((codomain_index[s], col as u32, c.clone()));
        }
    }
    SparseMatrix::from_entries(field.clone(), codomain.len(), domain.len(), entries)
        .expect("well-formed interior product matrix")
}

/// Exactness of the Koszul complex of d at grade q: the kernel of
/// `i_d: Lambda^q -> Lambda^{q-1}` must equal the image of
/// `i_d: Lambda^{q+1} -> Lambda^q`. Both dimensions are computed by exact
/// rank.
pub fn koszul_check<F: Field>(field: &F, d: &DegreeVector, q: usize) -> bool {
    let m = d.m();
    assert!((1..m).contains(&q), "koszul grade out of range");
    let down = interior_d_matrix(field, d, q);
    let up = interior_d_matrix(field, d, q + 1);
    let ker_dim = down.ncols() - down.rank();
    let im_dim = up.rank();
    ker_dim == im_dim
}

/// A grade-2 tensor is decomposable iff its wedge square vanishes.
pub fn is_decomposable2<F: Ring>(t: &MultiVector<F>) -> bool {
    assert_eq!(t.grade(), 2);
    wedge_mv(t, t).expect("same space").is_zero()
}

/// Tangent directions of the Grassmannian of 2-planes in `{mu : mu . d = 0}`
/// at the plane spanned by l1, l2: the 2(m-1) tensors
/// `{mu ^ l2 : mu in cmd_basis} union {l1 ^ mu : mu in cmd_basis}`.
/// Their span contains l1 ^ l2 and every returned t satisfies
/// `t ^ (l1 ^ l2) = 0` and `i_d t = 0`.
pub fn grass_tangent_dirs<F: Ring>(
    l1: &MultiVector<F>,
    l2: &MultiVector<F>,
    d: &DegreeVector,
) -> Result<Vec<MultiVector<F>>> {
    if l1.grade() != 1 || l2.grade() != 1 {
        return Err(Error::Shape("tangent directions need grade-1 vectors".into()));
    }
    if !interior_d(d, l1).is_zero() || !interior_d(d, l2).is_zero() {
        return Err(Error::Degenerate(
            "residue vectors must be annihilated by the degree vector".into(),
        ));
    }
    if wedge_mv(l1, l2)?.is_zero() {
        return Err(Error::Degenerate("dependent residue vectors".into()));
    }
    let basis = cmd_basis(l1.field(), d);
    let mut out = Vec::with_capacity(2 * basis.len());
    for mu in &basis {
        out.push(wedge_mv(mu, l2)?);
    }
    for mu in &basis {
        out.push(wedge_mv(l1, mu)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Rationals};
    use crate::rng::SplitMix64;
    use alloc::vec;

    fn dv(parts: &[u32]) -> DegreeVector {
        DegreeVector::new(parts.to_vec()).unwrap()
    }

    fn e(m: usize, set: &[u8]) -> MultiVector<Rationals> {
        MultiVector::basis(Rationals, m, set)
    }

    #[test]
    fn wedge_basics() {
        let p = wedge_mv(&e(3, &[1]), &e(3, &[2])).unwrap();
        assert_eq!(p.coeff(&[1, 2]), Rationals.from_i64(1));

        // repeated index
        assert!(wedge_mv(&e(4, &[1, 2]), &e(4, &[1, 3])).unwrap().is_zero());

        // the q=2 Koszul cycle squares to zero in m=4
        let cycle = e(4, &[1, 2])
            .sub(&e(4, &[1, 3]))
            .unwrap()
            .add(&e(4, &[2, 3]))
            .unwrap();
        assert!(wedge_mv(&cycle, &cycle).unwrap().is_zero());
    }

    #[test]
    fn interior_product_formula() {
        let d = dv(&[1, 1, 1]);
        let i = interior_d(&d, &e(3, &[1, 2]));
        // i_d(e1^e2) = d1 e2 - d2 e1
        assert_eq!(i.coeff(&[2]), Rationals.from_i64(1));
        assert_eq!(i.coeff(&[1]), Rationals.from_i64(-1));

        // the Koszul 2-cycle is annihilated
        let cycle = e(3, &[1, 2])
            .sub(&e(3, &[1, 3]))
            .unwrap()
            .add(&e(3, &[2, 3]))
            .unwrap();
        assert!(interior_d(&d, &cycle).is_zero());

        // grade 1 contracts to the weight
        let d23 = dv(&[2, 3]);
        let s = interior_d(&d23, &e(2, &[1]));
        assert_eq!(s.grade(), 0);
        assert_eq!(s.coeff(&[]), Rationals.from_i64(2));
    }

    #[test]
    fn interior_squares_to_zero() {
        let f = PrimeField::new(32003).unwrap();
        let mut rng = SplitMix64::new(11);
        for m in 3..=6usize {
            for q in 2..=m {
                let parts: Vec<u32> = (0..m).map(|_| 1 + rng.below(5) as u32).collect();
                let d = dv(&parts);
                let universe: Vec<u8> = (1..=m as u8).collect();
                let comps: Vec<(Vec<u8>, u64)> = k_subsets(&universe, q)
                    .into_iter()
                    .map(|s| (s, rng.below(32003)))
                    .collect();
                let t = MultiVector::from_comps(f, m, q, comps).unwrap();
                let once = interior_d(&d, &t);
                if q >= 2 {
                    assert!(interior_d(&d, &once).is_zero());
                }
            }
        }
    }

    #[test]
    fn cmd_basis_examples() {
        let b = cmd_basis(&Rationals, &dv(&[1, 1]));
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].coeff(&[1]), Rationals.from_i64(1));
        assert_eq!(b[0].coeff(&[2]), Rationals.from_i64(-1));

        assert_eq!(cmd_basis(&Rationals, &dv(&[1, 1, 1, 1, 1])).len(), 4);

        let d = dv(&[1, 2, 3]);
        let b = cmd_basis(&Rationals, &d);
        assert_eq!(b[0].to_vector(), vec![
            Rationals.from_i64(2),
            Rationals.from_i64(-1),
            Rationals.from_i64(0)
        ]);
        assert_eq!(b[1].to_vector(), vec![
            Rationals.from_i64(3),
            Rationals.from_i64(0),
            Rationals.from_i64(-1)
        ]);
        for mu in &b {
            assert!(interior_d(&d, mu).is_zero());
        }
    }

    #[test]
    fn koszul_exactness_small() {
        let f = PrimeField::new(32003).unwrap();
        let d = dv(&[1, 1, 1]);
        let down = interior_d_matrix(&f, &d, 2);
        assert_eq!(down.ncols() - down.rank(), 1);
        let up = interior_d_matrix(&f, &d, 3);
        assert_eq!(up.rank(), 1);
        assert!(koszul_check(&f, &d, 2));

        // exactness forces ker dim = C(m-1, q)
        let d5 = dv(&[1, 1, 1, 1, 1]);
        let down = interior_d_matrix(&f, &d5, 2);
        assert_eq!(down.ncols() - down.rank(), 6);
        assert!(koszul_check(&f, &d5, 2));
    }

    #[test]
    fn decomposability() {
        assert!(is_decomposable2(&e(4, &[1, 2])));
        let nd = e(4, &[1, 2]).add(&e(4, &[3, 4])).unwrap();
        assert!(!is_decomposable2(&nd));
        // wedge of two grade-1 vectors is always decomposable
        let mut rng = SplitMix64::new(5);
        let f = PrimeField::new(32003).unwrap();
        for _ in 0..10 {
            let a: Vec<u64> = (0..5).map(|_| rng.below(32003)).collect();
            let b: Vec<u64> = (0..5).map(|_| rng.below(32003)).collect();
            let va = MultiVector::from_vector(f, &a);
            let vb = MultiVector::from_vector(f, &b);
            let w = wedge_mv(&va, &vb).unwrap();
            if !w.is_zero() {
                assert!(is_decomposable2(&w));
            }
        }
    }

    #[test]
    fn grassmannian_tangent_directions() {
        let d = dv(&[1, 1, 1, 1, 1]);
        let basis = cmd_basis(&Rationals, &d);
        let l1 = &basis[0];
        let l2 = &basis[1];
        let dirs = grass_tangent_dirs(l1, l2, &d).unwrap();
        assert_eq!(dirs.len(), 8);

        let plane = wedge_mv(l1, l2).unwrap();
        for t in &dirs {
            assert!(wedge_mv(t, &plane).unwrap().is_zero());
            assert!(interior_d(&d, t).is_zero());
        }

        // the span is the tangent cone over Gr(2, C^{m-1}) at the plane,
        // of dimension 2(m-3) + 1 = 5: rank of the 8 x C(5,2) matrix
        let universe: Vec<u8> = (1..=5).collect();
        let sets = k_subsets(&universe, 2);
        let set_index: BTreeMap<Vec<u8>, u32> = sets
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, s)| (s, i as u32))
            .collect();
        let mut entries = Vec::new();
        for (r, t) in dirs.iter().enumerate() {
            for (s, c) in t.comps() {
                entries.push((r as u32, set_index[s], c.clone()));
            }
        }
        let mat = SparseMatrix::from_entries(Rationals, dirs.len(), sets.len(), entries).unwrap();
        assert_eq!(mat.rank(), 5);
        // and it contains the plane itself
        let mut plane_vec = vec![Rationals.from_i64(0); sets.len()];
        for (s, c) in plane.comps() {
            plane_vec[set_index[s] as usize] = c.clone();
        }
        assert!(mat.rref().contains(&plane_vec));

        // dependent vectors are rejected
        assert!(grass_tangent_dirs(l1, l1, &d).is_err());
    }

    #[test]
    fn degree_vector_validation() {
        assert!(DegreeVector::new(vec![]).is_err());
        assert!(DegreeVector::new(vec![1, 0]).is_err());
        assert_eq!(dv(&[1, 2, 3]).total(), 6);
    }
}
