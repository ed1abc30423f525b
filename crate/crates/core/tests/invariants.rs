use phinabla::marmora::{extract, wd_extract};
use phinabla::module::{series_matrix, GaugeChange};
use phinabla::oracle_kit::{algebraic_weight, axiom_filtrations, same_flag, verify_monodromy_axioms, IndexedFiltration};
use phinabla::weil_deligne::{monodromy_filtration, polynomial_weights, Verdict};
use phinabla::{Convention, Matrix, PhiNablaModule, QMatrix, QuadMatrix, Quadratic, Rational, RingParams, WeilDeligneRep};
use proptest::prelude::*;

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn params() -> RingParams {
    RingParams::laurent(5, 20, 32).unwrap()
}

fn kt(pr: &RingParams) -> PhiNablaModule {
    let a = series_matrix(pr, &[vec![vec![(0, q(1))], vec![]], vec![vec![], vec![(0, q(5))]]]);
    let g = series_matrix(pr, &[vec![vec![], vec![(-1, q(1))]], vec![vec![], vec![]]]);
    PhiNablaModule::new(pr.clone(), 2, Some(a), Some(g), "KT").unwrap()
}

fn elementary(pr: &RingParams, lower: bool, c: i64, k: i64) -> GaugeChange {
    let mut rows = vec![vec![vec![(0, q(1))], vec![]], vec![vec![], vec![(0, q(1))]]];
    if lower {
        rows[1][0] = vec![(k, q(c))];
    } else {
        rows[0][1] = vec![(k, q(c))];
    }
    GaugeChange::new(series_matrix(pr, &rows)).unwrap()
}

fn quad(m: &QMatrix) -> QuadMatrix {
    m.map(&Quadratic::from_integer(0), |x| Quadratic::rational(x.clone()))
}

fn rows(m: &QMatrix) -> Vec<Vec<Rational>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].clone()).collect()).collect()
}

/// Strictly upper triangular entries conjugated by a product of elementary
/// matrices.
fn nilpotent(d: usize, entries: &[i64], ops: &[(usize, usize, i64)]) -> QMatrix {
    let mut n = Matrix::zeros(d, d, &q(0));
    let mut it = entries.iter();
    for i in 0..d {
        for j in i + 1..d {
            n[(i, j)] = q(*it.next().unwrap());
        }
    }
    let mut u = Matrix::identity(d, &q(1));
    for &(i, j, c) in ops {
        let (i, j) = (i % d, j % d);
        if i != j {
            let mut e = Matrix::identity(d, &q(1));
            e[(i, j)] = q(c);
            u = u.mul(&e);
        }
    }
    u.mul(&n).mul(&u.inverse().unwrap())
}

fn as_indexed(n: &QMatrix) -> (IndexedFiltration, i64) {
    let f = monodromy_filtration(&quad(n)).unwrap();
    let spaces = (-f.s..f.s)
        .map(|k| {
            f.get(k)
                .basis_vectors()
                .into_iter()
                .map(|v| v.iter().map(|x| x.to_rational().unwrap()).collect())
                .collect()
        })
        .collect();
    (IndexedFiltration { dim: n.nrows(), lowest: -f.s, spaces }, f.s)
}

fn nilpotent_strategy(max_dim: usize) -> impl Strategy<Value = QMatrix> {
    (1..=max_dim).prop_flat_map(|d| {
        let m = d * (d - 1) / 2;
        (
            Just(d),
            prop::collection::vec(-2i64..=2, m),
            prop::collection::vec((0usize..6, 0usize..6, -2i64..=2), 0..6),
        )
            .prop_map(|(d, e, ops)| nilpotent(d, &e, &ops))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gauge_preserves_compatibility_and_wd(c1 in -3i64..=3, c2 in -3i64..=3, k1 in -1i64..=1, k2 in -1i64..=1) {
        let pr = params();
        let m = kt(&pr);
        let g = elementary(&pr, false, c1, k1).then(&elementary(&pr, true, c2, k2));
        let gm = m.gauge(&g).unwrap();
        let r = gm.check_compatibility().unwrap();
        prop_assert!(r.compatible && r.residual.is_zero());
        // The back-transform recovers the original matrices.
        let back = gm.gauge(&g.inverse()).unwrap();
        prop_assert_eq!(back.frobenius(), m.frobenius());
        prop_assert_eq!(back.connection(), m.connection());
    }

    #[test]
    fn filtration_satisfies_axioms(n in nilpotent_strategy(6)) {
        let (f, _) = as_indexed(&n);
        let check = verify_monodromy_axioms(&rows(&n), &f);
        prop_assert!(check.holds(), "{:?}", check.violations);
    }

    #[test]
    fn filtration_is_the_unique_one(n in nilpotent_strategy(4)) {
        let (f, s) = as_indexed(&n);
        let all = axiom_filtrations(&rows(&n));
        prop_assert_eq!(all.len(), 1);
        prop_assert!(same_flag(&all[0], &f, s + 1));
    }

    #[test]
    fn quadratic_weights_match_oracle(p in prop::sample::select(vec![2u64, 3, 5, 7, 11]), a in -6i64..=6) {
        prop_assume!(a * a <= 4 * p as i64);
        let poly = [p as i64, -a, 1];
        let oracle = algebraic_weight(&poly, p).unwrap();
        let f: Vec<Rational> = poly.iter().map(|&c| q(c)).collect();
        let mut ours: Vec<_> = polynomial_weights(&f, p, Convention::Geometric).unwrap().into_iter().map(|w| w.weight).collect();
        ours.sort();
        prop_assert_eq!(&ours, &oracle);
        prop_assert_eq!(ours, vec![Some(q(1)), Some(q(1))]);
    }

    #[test]
    fn twist_moves_weights(n in -3i64..=3) {
        let rep = wd_extract(&kt(&params()), 24).unwrap();
        let tw = rep.twist(n);
        let before: Vec<_> = rep.weights().unwrap().into_iter().map(|w| w.weight.unwrap()).collect();
        let after: Vec<_> = tw.weights().unwrap().into_iter().map(|w| w.weight.unwrap()).collect();
        for (b, a) in before.iter().zip(&after) {
            prop_assert_eq!(a.clone(), b - q(2 * n));
        }
        prop_assert_eq!(tw.quasi_purity_check(1 - 2 * n).unwrap().verdict, Verdict::QuasiPure);
        // Twisting the module first gives the same representation.
        let direct = wd_extract(&kt(&params()).tate_twist(n), 24).unwrap();
        prop_assert_eq!(direct.phi(), tw.phi());
    }
}

#[test]
fn direct_sum_adds_graded_ranks() {
    let rep = wd_extract(&kt(&params()), 24).unwrap();
    let sum = rep.direct_sum(&rep).unwrap();
    let f = sum.monodromy_filtration().unwrap();
    assert_eq!(f.graded_ranks(), vec![(-1, 2), (1, 2)]);
    assert_eq!(sum.quasi_purity_check(1).unwrap().verdict, Verdict::QuasiPure);
}

#[test]
fn arithmetic_convention_round_trip() {
    let rep = wd_extract(&kt(&params()), 24).unwrap();
    let arith = rep.to_convention(Convention::Arithmetic);
    assert_eq!(arith.to_convention(Convention::Geometric), rep);
    assert_eq!(arith.quasi_purity_check(1).unwrap().verdict, Verdict::QuasiPure);
}

#[test]
fn non_equivariant_monodromy_is_rejected() {
    let phi = quad(&Matrix::identity(2, &q(1)));
    let mut n = Matrix::zeros(2, 2, &q(0));
    n[(0, 1)] = q(1);
    assert!(WeilDeligneRep::new(5, phi, quad(&n), None, Convention::Geometric).is_err());
}

#[test]
fn extraction_survives_higher_precision() {
    let lo = extract(&kt(&params()), 24).unwrap();
    let hi = extract(&kt(&RingParams::laurent(5, 40, 64).unwrap()), 24).unwrap();
    assert_eq!(lo.rep.phi(), hi.rep.phi());
    assert_eq!(lo.rep.monodromy(), hi.rep.monodromy());
    assert_eq!((lo.e, lo.level), (hi.e, hi.level));
}
