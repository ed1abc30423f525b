use phinabla::diagnostics::{
    excision_weight_filtration, rank_profile, reduction_type, semistable_weight_filtration, AbelianVarietyDatum,
    OpenCurveDatum, ReductionType,
};
use phinabla::module::series_matrix;
use phinabla::{Error, Matrix, PhiNablaModule, Rational, RingParams};
use proptest::prelude::*;

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn params() -> RingParams {
    RingParams::laurent(5, 20, 32).unwrap()
}

fn symplectic(pr: &RingParams) -> phinabla::SeriesMatrix {
    series_matrix(pr, &[vec![vec![], vec![(0, q(1))]], vec![vec![(0, q(-1))], vec![]]])
}

fn good(a: i64) -> AbelianVarietyDatum {
    let pr = params();
    let c = Matrix::from_rows(vec![vec![q(0), q(-5)], vec![q(1), q(a)]], &q(0));
    let m = PhiNablaModule::constant(&pr, &c, "good").unwrap().tate_twist(1);
    AbelianVarietyDatum::new(m, None, Some(symplectic(&pr))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    // Every Hasse-admissible trace gives good reduction with pure weight -1.
    #[test]
    fn good_reduction_for_every_trace(a in -4i64..=4) {
        let d = good(a);
        let prof = rank_profile(&d).unwrap();
        prop_assert_eq!((prof.n, prof.mu, prof.alpha, prof.lambda), (1, 0, 1, 0));
        prop_assert_eq!(prof.mu + prof.alpha + prof.lambda, prof.n);
        prop_assert_eq!(reduction_type(&d).unwrap().verdict, ReductionType::Good);
        let w = semistable_weight_filtration(&d, 24).unwrap();
        prop_assert!(w.graded.iter().all(|g| g.report.pure));
        prop_assert!(w.monodromy_match);
    }
}

#[test]
fn missing_pairing_matters_only_with_constant_part() {
    let pr = params();
    let c = Matrix::from_rows(vec![vec![q(0), q(-5)], vec![q(1), q(2)]], &q(0));
    let m = PhiNablaModule::constant(&pr, &c, "good").unwrap().tate_twist(1);
    let d = AbelianVarietyDatum::new(m, None, None).unwrap();
    assert!(matches!(rank_profile(&d), Err(Error::MissingPairing)));
}

#[test]
fn excision_rank_counts_boundary_kernel() {
    let pr = params();
    let h1 = PhiNablaModule::constant(&pr, &Matrix::from_rows(vec![vec![q(0), q(-5)], vec![q(1), q(2)]], &q(0)), "h1")
        .unwrap();
    for points in 1..=3usize {
        let h0 = PhiNablaModule::trivial(&pr, points).tate_twist(-1);
        let h2 = PhiNablaModule::trivial(&pr, 1).tate_twist(-1);
        let delta = series_matrix(&pr, &[vec![vec![(0, q(1))]; points]]);
        let c = OpenCurveDatum::new(h1.clone(), h0, h2, delta).unwrap();
        let r = excision_weight_filtration(&c, 24).unwrap();
        assert_eq!(r.gr2.dim(), points - 1);
        assert_eq!(r.rank, 2 + points - 1);
        assert!(r.gr2_report.pure);
    }
}
