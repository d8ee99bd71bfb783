use num_traits::Zero;
use proptest::prelude::*;
use quaddr_exact::{LaurentPoly, Ring, RingHom, SparseMatrix, Var};

/// Fraction-free elimination over i128: an independent rank.
fn bareiss_rank(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let (m, n) = (a.len(), a.first().map_or(0, |r| r.len()));
    let (mut rank, mut prev) = (0, 1i128);
    for col in 0..n {
        let Some(p) = (rank..m).find(|&i| a[i][col] != 0) else { continue };
        a.swap(rank, p);
        for i in rank + 1..m {
            for j in col + 1..n {
                a[i][j] = (a[rank][col] * a[i][j] - a[i][col] * a[rank][j]) / prev;
            }
            a[i][col] = 0;
        }
        prev = a[rank][col];
        rank += 1;
    }
    rank
}

fn matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..6, 1usize..6).prop_flat_map(|(m, n)| prop::collection::vec(prop::collection::vec(-3i64..=3, n), m))
}

fn ring() -> std::sync::Arc<Ring> {
    Ring::new(vec![Var::laurent("t"), Var::poly("x")])
}

fn poly() -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((-2i32..=2, 0i32..=2, -3i64..=3), 0..4).prop_map(|terms| {
        let r = ring();
        let mut p = LaurentPoly::zero(&r);
        for (a, b, c) in terms {
            p.add_term(vec![a, b], quaddr_exact::rational::int(c));
        }
        p
    })
}

proptest! {
    #[test]
    fn rank_matches_fraction_free_elimination(rows in matrix()) {
        prop_assert_eq!(SparseMatrix::from_dense(&rows).rank(), bareiss_rank(&rows));
    }

    #[test]
    fn kernel_has_complementary_dimension_and_is_annihilated(rows in matrix()) {
        let a = SparseMatrix::from_dense(&rows);
        let ki = a.kernel_and_image();
        prop_assert_eq!(ki.rank + ki.kernel.len(), a.cols());
        for v in &ki.kernel {
            prop_assert!(a.mul_vec(v).values().all(|x| x.is_zero()));
        }
        prop_assert_eq!(a.transpose().rank(), ki.rank);
    }

    #[test]
    fn partials_obey_the_product_rule(f in poly(), g in poly(), i in 0usize..2) {
        let lhs = f.try_mul(&g).unwrap().partial(i);
        let rhs = f.partial(i).try_mul(&g).unwrap().try_add(&f.try_mul(&g.partial(i)).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn substitution_is_multiplicative(f in poly(), g in poly(), a in -2i32..=2) {
        let r = ring();
        let image = format!("t^{a}*x + 1");
        let h = RingHom::parse(&r, &r, &["t^-1", image.as_str()]).unwrap();
        let fg = h.apply(&f.try_mul(&g).unwrap()).unwrap();
        prop_assert_eq!(fg, h.apply(&f).unwrap().try_mul(&h.apply(&g).unwrap()).unwrap());
    }
}
