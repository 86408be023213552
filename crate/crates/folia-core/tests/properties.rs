//! Property tests for the algebraic invariants the kernel relies on.

use folia_core::field::{PrimeField, Rationals, Ring};
use folia_core::forms::{ext_d, radial_contract, wedge_forms, PolyForm};
use folia_core::linalg::SparseMatrix;
use folia_core::logfol::{
    construct_log_form, integrability_check, logdiff_identity_check, pluecker_check,
    random_params, LogParams,
};
use folia_core::multivec::{
    cmd_basis, interior_d, koszul_check, wedge_mv, DegreeVector, MultiVector,
};
use folia_core::poly::{MonomialBasis, Poly};
use folia_core::rng::SplitMix64;
use proptest::prelude::*;

const P: u64 = 32003;

fn fp() -> PrimeField {
    PrimeField::new(P).unwrap()
}

fn random_tensor(rng: &mut SplitMix64, m: usize, grade: usize) -> MultiVector<PrimeField> {
    let f = fp();
    let universe: Vec<u8> = (1..=m as u8).collect();
    let comps: Vec<(Vec<u8>, u64)> = folia_core::comb::k_subsets(&universe, grade)
        .into_iter()
        .map(|s| (s, rng.below(P)))
        .collect();
    MultiVector::from_comps(f, m, grade, comps).unwrap()
}

fn random_poly(rng: &mut SplitMix64, nvars: usize, degree: u32) -> Poly<PrimeField> {
    let f = fp();
    let basis = MonomialBasis::new(nvars, degree);
    let coords: Vec<u64> = (0..basis.len()).map(|_| rng.below(P)).collect();
    Poly::from_coords(f, &basis, &coords).unwrap()
}

fn random_form(rng: &mut SplitMix64, nvars: usize, grade: usize, total: u32) -> PolyForm<PrimeField> {
    let f = fp();
    let universe: Vec<u8> = (0..nvars as u8).collect();
    let comps: Vec<(Vec<u8>, Poly<PrimeField>)> = folia_core::comb::k_subsets(&universe, grade)
        .into_iter()
        .map(|s| (s, random_poly(rng, nvars, total - grade as u32)))
        .collect();
    PolyForm::from_comps(f, nvars, grade, total, comps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Wedge is graded-anticommutative: a^b = (-1)^{pq} b^a.
    #[test]
    fn wedge_anticommutative(seed in any::<u64>(), m in 3usize..=6, p in 1usize..=2, q in 1usize..=2) {
        let mut rng = SplitMix64::new(seed);
        let a = random_tensor(&mut rng, m, p);
        let b = random_tensor(&mut rng, m, q);
        let ab = wedge_mv(&a, &b).unwrap();
        let ba = wedge_mv(&b, &a).unwrap();
        let sign = if (p * q) % 2 == 1 { -1 } else { 1 };
        prop_assert_eq!(ab, ba.scale(&fp().from_i64(sign)));
    }

    /// Wedge is associative.
    #[test]
    fn wedge_associative(seed in any::<u64>(), m in 3usize..=6) {
        let mut rng = SplitMix64::new(seed);
        let a = random_tensor(&mut rng, m, 1);
        let b = random_tensor(&mut rng, m, 1);
        let c = random_tensor(&mut rng, m, 1);
        let left = wedge_mv(&wedge_mv(&a, &b).unwrap(), &c).unwrap();
        let right = wedge_mv(&a, &wedge_mv(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    /// The interior product is a differential: i_d(i_d(t)) = 0.
    #[test]
    fn interior_product_squares_to_zero(seed in any::<u64>(), m in 3usize..=6, q in 2usize..=4) {
        prop_assume!(q <= m);
        let mut rng = SplitMix64::new(seed);
        let parts: Vec<u32> = (0..m).map(|_| 1 + rng.below(6) as u32).collect();
        let d = DegreeVector::new(parts).unwrap();
        let t = random_tensor(&mut rng, m, q);
        prop_assert!(interior_d(&d, &interior_d(&d, &t)).is_zero());
    }

    /// For grade-1 vectors inside the annihilator hyperplane the wedge is
    /// annihilated; a factor outside the hyperplane breaks it.
    #[test]
    fn annihilation_of_wedges_mirrors_factors(seed in any::<u64>(), m in 3usize..=6) {
        let mut rng = SplitMix64::new(seed);
        let f = fp();
        let parts: Vec<u32> = (0..m).map(|_| 1 + rng.below(4) as u32).collect();
        let d = DegreeVector::new(parts).unwrap();
        let hyper = cmd_basis(&f, &d);
        let draw = |rng: &mut SplitMix64| {
            let mut v = MultiVector::zero(f, m, 1);
            for mu in &hyper {
                v = v.add(&mu.scale(&rng.below(P))).unwrap();
            }
            v
        };
        let l1 = draw(&mut rng);
        let l2 = draw(&mut rng);
        let w = wedge_mv(&l1, &l2).unwrap();
        prop_assert!(interior_d(&d, &w).is_zero());

        // e_1 is never annihilated since d_1 >= 1
        let outside = MultiVector::basis(f, m, &[1]);
        if !l1.is_zero() {
            let mixed = wedge_mv(&l1, &outside).unwrap();
            if !mixed.is_zero() {
                prop_assert!(!interior_d(&d, &mixed).is_zero());
            }
        }
    }

    /// Koszul exactness at every grade for random positive degree vectors.
    #[test]
    fn koszul_exact_everywhere(seed in any::<u64>(), m in 3usize..=6) {
        let mut rng = SplitMix64::new(seed);
        let parts: Vec<u32> = (0..m).map(|_| 1 + rng.below(9) as u32).collect();
        let d = DegreeVector::new(parts).unwrap();
        for q in 1..m {
            prop_assert!(koszul_check(&fp(), &d, q));
        }
    }

    /// Euler identity for random homogeneous polynomials.
    #[test]
    fn euler_identity(seed in any::<u64>(), nvars in 2usize..=5, degree in 1u32..=4) {
        let mut rng = SplitMix64::new(seed);
        let p = random_poly(&mut rng, nvars, degree);
        prop_assert!(p.euler_identity_check());
    }

    /// d^2 = 0 and the graded Leibniz rule on random forms.
    #[test]
    fn de_rham_identities(seed in any::<u64>(), ga in 1usize..=2) {
        let mut rng = SplitMix64::new(seed);
        let nvars = 4;
        let a = random_form(&mut rng, nvars, ga, ga as u32 + 2);
        let b = random_form(&mut rng, nvars, 1, 3);
        prop_assert!(ext_d(&ext_d(&a)).is_zero());
        let lhs = ext_d(&wedge_forms(&a, &b).unwrap());
        let da_b = wedge_forms(&ext_d(&a), &b).unwrap();
        let a_db = wedge_forms(&a, &ext_d(&b)).unwrap();
        let rhs = if ga % 2 == 1 {
            da_b.sub(&a_db).unwrap()
        } else {
            da_b.add(&a_db).unwrap()
        };
        prop_assert_eq!(lhs, rhs);
    }

    /// Exact rank-nullity and exact kernels for random sparse matrices.
    #[test]
    fn rank_nullity_and_kernel(seed in any::<u64>(), nrows in 1usize..=8, ncols in 1usize..=8) {
        let mut rng = SplitMix64::new(seed);
        let f = fp();
        let mut entries = Vec::new();
        for r in 0..nrows as u32 {
            for c in 0..ncols as u32 {
                if rng.below(2) == 0 {
                    entries.push((r, c, rng.below(P)));
                }
            }
        }
        let m = SparseMatrix::from_entries(f, nrows, ncols, entries).unwrap();
        let ker = m.kernel_basis();
        prop_assert_eq!(m.rank() + ker.len(), ncols);
        for v in &ker {
            prop_assert!(m.apply(v).unwrap().iter().all(|x| f.is_zero(x)));
        }
    }

    /// Rank over Q agrees with rank modulo the default prime on random
    /// small-integer matrices.
    #[test]
    fn multi_prime_rank_agreement(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let q = Rationals;
        let f = fp();
        let mut entries = Vec::new();
        for r in 0..6u32 {
            for c in 0..6u32 {
                if rng.below(2) == 0 {
                    entries.push((r, c, q.from_i64(rng.signed(40))));
                }
            }
        }
        let mq = SparseMatrix::from_entries(q, 6, 6, entries).unwrap();
        let mp = mq.map_scalars(f, |x| f.reduce_rational(x)).unwrap();
        prop_assert_eq!(mq.rank(), mp.rank());
    }

    /// Constructed log forms satisfy all four defining identities, and the
    /// construction is multilinear in each argument.
    #[test]
    fn log_form_identities(seed in any::<u64>(), m in 3usize..=5, q in 1usize..=3) {
        prop_assume!(m > q);
        let mut rng = SplitMix64::new(seed);
        let f = fp();
        let n = 3 + (rng.below(2) as usize);
        let parts: Vec<u32> = (0..m).map(|_| 1 + rng.below(2) as u32).collect();
        let d = DegreeVector::new(parts).unwrap();
        let p = random_params(&f, rng.next_u64(), n, q, &d).unwrap();
        let omega = construct_log_form(&p).unwrap();

        prop_assert!(radial_contract(&omega).is_zero());
        prop_assert!(pluecker_check(&omega, q).unwrap());
        prop_assert!(integrability_check(&omega, q).unwrap());
        prop_assert!(logdiff_identity_check(&p).unwrap());

        // scaling one residue vector scales the form
        let c = 2 + rng.below(P - 2);
        let mut lambdas = p.lambdas().to_vec();
        lambdas[0] = lambdas[0].scale(&c);
        let scaled = LogParams::new(f, n, q, d.clone(), lambdas, p.polys().to_vec()).unwrap();
        prop_assert_eq!(construct_log_form(&scaled).unwrap(), omega.scale(&c));

        // scaling one polynomial scales the form, since each F_i appears
        // exactly once per term
        let mut polys = p.polys().to_vec();
        polys[0] = polys[0].scal_mul(&c);
        let scaled = LogParams::new(f, n, q, d.clone(), p.lambdas().to_vec(), polys).unwrap();
        prop_assert_eq!(construct_log_form(&scaled).unwrap(), omega.scale(&c));
    }
}

#[test]
fn monomial_basis_counts_up_to_the_stated_range() {
    for n in 0..=6usize {
        for e in 0..=8u32 {
            let count = folia_core::poly::monomial_basis(n, e).len() as u64;
            assert_eq!(count, folia_core::comb::binomial(n as u64 + e as u64, e as u64));
        }
    }
}
