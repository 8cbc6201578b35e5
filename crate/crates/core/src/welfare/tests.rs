use super::*;
use crate::budget::{Budget, PriceChange};
use crate::diff::DerivativeScheme;
use crate::error::Error;
use crate::oracle::{
    population_cv, surface_from_population, CobbDouglasPopulation, LinearHeteroPopulation,
    OdeConfig, PopulationSurface,
};
use crate::quadrature::QuadratureRule;
use crate::surface::{AffineSurface, ShareView};

fn l0() -> PopulationSurface<LinearHeteroPopulation> {
    surface_from_population(LinearHeteroPopulation::l0(), 4, DerivativeScheme::default()).unwrap()
}

fn bstar() -> Budget {
    Budget::two_good(1.0, 2.0).unwrap()
}

fn l0_change(dp: f64) -> PriceChange {
    PriceChange::scalar(1.0, 1.0 + dp, 2.0).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn compensated_moment_of_l0() {
    let v = compensated_moment_fo(&l0(), 1, &bstar(), 0.1).unwrap();
    assert!(close(v, 0.5 + (-1.0 + 11.0 / 36.0) * 0.1, 1e-13), "{v}");
    assert!(close(
        compensated_moment_fo(&l0(), 2, &bstar(), 0.0).unwrap(),
        4.0 / 9.0,
        1e-14
    ));
}

#[test]
fn compensated_moment_order_overflow() {
    let s = surface_from_population(LinearHeteroPopulation::l0(), 2, DerivativeScheme::default())
        .unwrap();
    assert!(matches!(
        compensated_moment_fo(&s, 2, &bstar(), 0.1),
        Err(Error::Order { .. })
    ));
}

#[test]
fn quasi_linear_compensated_moment_is_exact() {
    // Demand 2 − p for every type: compensated and uncompensated demand coincide.
    let pop = LinearHeteroPopulation::new(2.0, 2.0, 1.0, vec![(0.0, 1.0)]).unwrap();
    let s = surface_from_population(pop, 3, DerivativeScheme::default()).unwrap();
    let v = compensated_moment_fo(&s, 1, &bstar(), 0.25).unwrap();
    assert!(close(v, 2.0 - 1.25, 1e-14));
}

#[test]
fn compensated_share_moment_cobb_douglas() {
    let w = ShareView::new(
        surface_from_population(
            CobbDouglasPopulation::cd(0.5).unwrap(),
            3,
            DerivativeScheme::default(),
        )
        .unwrap(),
    );
    let b = Budget::two_good(1.0, 3.0).unwrap();
    assert!(close(
        compensated_share_moment(&w, 1, &b, 0.1).unwrap(),
        0.525,
        1e-14
    ));
    assert!(close(
        compensated_share_moment(&w, 1, &b, 0.0).unwrap(),
        0.5,
        1e-14
    ));
}

#[test]
fn local_cv_fixture_values() {
    let s = l0();
    let pc = l0_change(0.1);
    assert!(close(
        cv_moment_local(&s, 1, &pc).unwrap(),
        0.0465277777777778,
        1e-13
    ));
    // Δp² [M2 + (Δp/2)(D_p M2 + (2/3) D_y M3)] with D_p M2 = −1, D_y M3 = 3 · 5/18
    let want = 0.01 * (4.0 / 9.0 + 0.05 * (-1.0 + 2.0 / 3.0 * 5.0 / 6.0));
    assert!(close(cv_moment_local(&s, 2, &pc).unwrap(), want, 1e-14));
    assert_eq!(cv_moment_local(&s, 1, &l0_change(0.0)).unwrap(), 0.0);
}

#[test]
fn first_order_and_ra() {
    let s = l0();
    assert!(close(
        cv_first_order(&s, &l0_change(0.1)).unwrap(),
        0.05,
        1e-15
    ));
    assert!(close(
        cv_first_order(&s, &l0_change(0.2)).unwrap(),
        2.0 * cv_first_order(&s, &l0_change(0.1)).unwrap(),
        1e-15
    ));
    assert!(close(cv_ra(&s, &l0_change(0.1)).unwrap(), 0.04625, 1e-14));
    let gap =
        cv_moment_local(&s, 1, &l0_change(0.1)).unwrap() - cv_ra(&s, &l0_change(0.1)).unwrap();
    assert!(close(gap, 0.005 / 18.0, 1e-14));
}

#[test]
fn ra_is_exact_for_a_single_type() {
    let s = surface_from_population(
        CobbDouglasPopulation::cd(0.3).unwrap(),
        2,
        DerivativeScheme::default(),
    )
    .unwrap();
    let pc = PriceChange::scalar(1.2, 1.5, 2.0).unwrap();
    assert!(close(
        cv_ra(&s, &pc).unwrap(),
        cv_moment_local(&s, 1, &pc).unwrap(),
        1e-15
    ));
}

#[test]
fn path_approximation_on_l0() {
    let s = l0();
    let v = cv_path(&s, &l0_change(0.1), &QuadratureRule::default()).unwrap();
    // Δp ∫ (1/2 − Δp t) dt + (Δp²/2) ∫ (11/18 − Δp t)(1 − t) dt
    let want = 0.1 * 0.45 + 0.005 * (11.0 / 36.0 - 0.1 / 6.0);
    assert!(close(v, want, 1e-14), "{v} vs {want}");
    let c = AffineSurface::constant(bstar(), 0.7, 2);
    let zero_dy =
        AffineSurface::two_good(bstar(), vec![0.7, 0.49], vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
    assert!(close(
        cv_path(&zero_dy, &l0_change(0.1), &QuadratureRule::default()).unwrap(),
        0.07,
        1e-15
    ));
    assert!(cv_path(&c, &l0_change(0.0), &QuadratureRule::default()).unwrap() == 0.0);
}

#[test]
fn path_reports_domain_exit() {
    let s = l0();
    let pc = PriceChange::scalar(1.0, -0.5, 2.0);
    assert!(pc.is_err());
    // Price path stays positive but the surface refuses budgets with income effects beyond the
    // fixture's dimension.
    let s2 = Budget::new(vec![1.0, 1.0], 2.0).unwrap();
    let pc2 = PriceChange::from_delta(s2, &[0.1, 0.0]).unwrap();
    assert!(cv_path(&s, &pc2, &QuadratureRule::default()).is_err());
}

#[test]
fn local_bounds() {
    let s = l0();
    let (lo, hi) = hn_bounds_local(&s, &l0_change(0.1), 1.0 / 3.0, 2.0 / 3.0).unwrap();
    assert!(close(lo, 0.05 + 0.005 * (-1.0 + 0.5 / 3.0), 1e-14));
    assert!(close(hi, 0.05 + 0.005 * (-1.0 + 1.0 / 3.0), 1e-14));
    let robust = cv_moment_local(&s, 1, &l0_change(0.1)).unwrap();
    assert!(lo <= robust && robust <= hi);
    let (a, b) = hn_bounds_local(&s, &l0_change(0.1), 0.5, 0.5).unwrap();
    assert!(close(a, cv_ra(&s, &l0_change(0.1)).unwrap(), 1e-15) && a == b);
    assert!(matches!(
        hn_bounds_local(&s, &l0_change(0.1), 0.7, 0.2),
        Err(Error::Argument(_))
    ));
}

#[test]
fn path_bounds_are_monotone_and_contain_exact_mean() {
    let s = l0();
    let q = QuadratureRule::default();
    let pc = l0_change(0.1);
    let cs = hn_bounds_path(&s, &pc, 0.0, &q).unwrap();
    assert!(close(cs, 0.1 * 0.45, 1e-15));
    let lo = hn_bounds_path(&s, &pc, 1.0 / 3.0, &q).unwrap();
    let hi = hn_bounds_path(&s, &pc, 2.0 / 3.0, &q).unwrap();
    assert!(cs < lo && lo < hi);
    let exact = population_cv(&LinearHeteroPopulation::l0(), &pc, &OdeConfig::default())
        .unwrap()
        .mean;
    assert!(lo <= exact && exact <= hi, "{lo} {exact} {hi}");
}

#[test]
fn chebyshev_extremes_recover_worst_case() {
    let s = l0();
    let q = QuadratureRule::default();
    let pc = l0_change(0.1);
    let c = chebyshev_bounds(&s, &pc, 0.0, 1.0, 1.0, 0.0, &q).unwrap();
    assert!(close(
        c.lower,
        hn_bounds_path(&s, &pc, 0.0, &q).unwrap(),
        1e-12
    ));
    assert!(close(
        c.upper,
        hn_bounds_path(&s, &pc, 1.0, &q).unwrap(),
        1e-12
    ));
    let inner = chebyshev_bounds(&s, &pc, 0.0, 1.0, 0.5, 0.5, &q).unwrap();
    assert!(inner.lower > c.lower && inner.upper < c.upper);
    assert!(inner.lower <= inner.upper + 1e-15);
    assert!(chebyshev_bounds(&s, &pc, 0.0, 1.0, 1.5, 0.5, &q).is_err());
    assert!(chebyshev_bounds(&s, &l0_change(-0.1), 0.0, 1.0, 0.5, 0.5, &q).is_err());
}

#[test]
fn chebyshev_collapses_for_uniform_income_effects() {
    let a = 0.4;
    let pop = LinearHeteroPopulation::new(0.5, 1.5, 1.0, vec![(a, 1.0)]).unwrap();
    let s = surface_from_population(pop.clone(), 3, DerivativeScheme::default()).unwrap();
    let q = QuadratureRule::default();
    let pc = l0_change(0.1);
    let c = chebyshev_bounds(&s, &pc, 0.0, 1.0, a, a, &q).unwrap();
    let exact = population_cv(&pop, &pc, &OdeConfig::default())
        .unwrap()
        .mean;
    assert!(
        close(c.lower, exact, 1e-12) && close(c.upper, exact, 1e-12),
        "{c:?} {exact}"
    );
}

#[test]
fn variance_kinds() {
    let s = l0();
    let degenerate = surface_from_population(
        CobbDouglasPopulation::cd(0.3).unwrap(),
        3,
        DerivativeScheme::default(),
    )
    .unwrap();
    let pc = l0_change(0.1);
    assert!(
        cv_variance(&degenerate, &pc, VarianceKind::FirstOrder)
            .unwrap()
            .abs()
            < 1e-16
    );
    // For a single type both second-order kinds leave only the squared
    // second-order term: −Δp⁴ (q_p + q q_y)² / 4.
    let (q, qp, qy) = (0.6, -0.6, 0.3);
    let residual = -1e-4 * (qp + q * qy) * (qp + q * qy) / 4.0;
    for kind in [VarianceKind::Robust, VarianceKind::AdditiveSeparable] {
        assert!(close(
            cv_variance(&degenerate, &pc, kind).unwrap(),
            residual,
            1e-16
        ));
    }
    let dp = 1e-4;
    let v = cv_variance(&s, &l0_change(dp), VarianceKind::Robust).unwrap() / (dp * dp);
    assert!(close(v, 7.0 / 36.0, 1e-4));
    assert!(close(
        cv_variance(&s, &pc, VarianceKind::FirstOrder).unwrap(),
        0.01 * 7.0 / 36.0,
        1e-15
    ));
    let short =
        surface_from_population(LinearHeteroPopulation::l0(), 2, DerivativeScheme::default())
            .unwrap();
    assert!(matches!(
        cv_variance(&short, &pc, VarianceKind::Robust),
        Err(Error::Order { .. })
    ));
}

#[test]
fn cv_decomposition_fixtures() {
    let s = l0();
    let d = cv_decompose(&s, &l0_change(0.1)).unwrap();
    assert!(close(d.a3, 0.005 * (7.0 / 36.0) / 2.0, 1e-15));
    assert!(close(d.total(), 0.005 * (-1.0 + 11.0 / 36.0), 1e-15));

    // q = c y / p: homothetic and degenerate.
    let homothetic = surface_from_population(
        CobbDouglasPopulation::cd(0.4).unwrap(),
        2,
        DerivativeScheme::default(),
    )
    .unwrap();
    let pc = PriceChange::scalar(1.3, 1.4, 2.5).unwrap();
    let d = cv_decompose(&homothetic, &pc).unwrap();
    assert!(d.a2.abs() < 1e-16 && d.a3.abs() < 1e-16 && d.a4.abs() < 1e-16);

    let single = surface_from_population(
        LinearHeteroPopulation::new(0.5, 0.5, 1.0, vec![(0.3, 1.0)]).unwrap(),
        2,
        DerivativeScheme::default(),
    )
    .unwrap();
    let d = cv_decompose(&single, &l0_change(0.1)).unwrap();
    assert!(d.a3.abs() < 1e-16 && d.a4.abs() < 1e-16 && d.a2.abs() > 1e-6);
}

#[test]
fn decomposition_flags_inconsistent_surfaces() {
    // An inconsistent surface cannot break an algebraic identity, so the check only guards
    // against non-finite inputs.
    let s = AffineSurface::two_good(bstar(), vec![f64::NAN, 1.0], vec![0.0, 0.0], vec![0.0, 0.0])
        .unwrap();
    assert!(matches!(
        cv_decompose(&s, &l0_change(0.1)),
        Err(Error::InternalConsistency { .. })
    ));
}

#[test]
fn price_index_cobb_douglas() {
    let w = ShareView::new(
        surface_from_population(
            CobbDouglasPopulation::cd(0.5).unwrap(),
            2,
            DerivativeScheme::default(),
        )
        .unwrap(),
    );
    let b = Budget::two_good(1.0, 2.0).unwrap();
    let v = price_index(&w, 0.1, &b).unwrap();
    assert!(close(v, 0.05125, 1e-15));
    assert!((v - (0.05f64.exp() - 1.0)).abs() <= 3e-5);
    assert_eq!(price_index(&w, 0.0, &b).unwrap(), 0.0);
    let zero = ShareView::new(
        surface_from_population(
            CobbDouglasPopulation::cd(0.0).unwrap(),
            2,
            DerivativeScheme::default(),
        )
        .unwrap(),
    );
    assert_eq!(price_index(&zero, 0.1, &b).unwrap(), 0.0);
}

#[test]
fn price_index_decomposition_homothetic() {
    let pop = CobbDouglasPopulation::new(vec![(vec![0.2], 0.5), (vec![0.6], 0.5)]).unwrap();
    let w = ShareView::new(surface_from_population(pop, 2, DerivativeScheme::default()).unwrap());
    let b = Budget::two_good(1.4, 2.0).unwrap();
    let d = price_index_decompose(&w, 0.1, &b, &DerivativeScheme::central()).unwrap();
    assert!(d.terms.a2.abs() < 1e-15 && d.terms.a4.abs() < 1e-15);
    assert!(close(d.terms.a3, 0.005 * 0.04, 1e-15));
    let idx = price_index(&w, 0.1, &b).unwrap();
    assert!(close(d.terms.total(), idx - 0.4 * 0.1, 1e-15));
    assert!(d.homotheticity_correction.representative.abs() < 1e-8);
    assert!(d.homotheticity_correction.heterogeneity.abs() < 1e-8);

    let single = ShareView::new(
        surface_from_population(
            CobbDouglasPopulation::cd(0.35).unwrap(),
            2,
            DerivativeScheme::default(),
        )
        .unwrap(),
    );
    let d = price_index_decompose(&single, 0.1, &b, &DerivativeScheme::central()).unwrap();
    assert!(d.terms.a3.abs() < 1e-15 && d.terms.a4.abs() < 1e-15);
}

#[test]
fn tax_fixture_values() {
    let s = l0();
    assert!(close(
        tax_deadweight(&s, &bstar(), 0.1, 0.1).unwrap(),
        -43.0 / 36.0 * 0.01,
        1e-15
    ));
    assert_eq!(tax_deadweight(&s, &bstar(), 0.1, 0.0).unwrap(), 0.0);
    let ql = surface_from_population(
        LinearHeteroPopulation::new(1.0, 2.0, 0.7, vec![(0.0, 1.0)]).unwrap(),
        2,
        DerivativeScheme::default(),
    )
    .unwrap();
    assert!(close(
        tax_deadweight(&ql, &bstar(), 0.2, 0.3).unwrap(),
        -0.7 * 0.06,
        1e-15
    ));
}

#[test]
fn many_good_cobb_douglas() {
    let alpha: f64 = 0.3;
    let s = surface_from_population(
        CobbDouglasPopulation::cd2(alpha).unwrap(),
        2,
        DerivativeScheme::default(),
    )
    .unwrap();
    let (p1, p2, y) = (1.2, 0.8, 2.5);
    let b = Budget::new(vec![p1, p2], y).unwrap();
    let j = compensated_jacobian_multigood(&s, &b).unwrap();
    let c = alpha * (1.0 - alpha);
    assert!(close(j.matrix[(0, 0)], -c * y / (p1 * p1), 1e-14));
    assert!(close(j.matrix[(0, 1)], c * y / (p1 * p2), 1e-14));
    assert_eq!(j.matrix[(0, 1)], j.matrix[(1, 0)]);
    assert!(j.negative_semidefinite);

    let zero = surface_from_population(
        CobbDouglasPopulation::cd2(1.0).unwrap(),
        2,
        DerivativeScheme::default(),
    )
    .unwrap();
    assert!(
        compensated_jacobian_multigood(&zero, &b)
            .unwrap()
            .matrix
            .abs()
            .max()
            < 1e-15
    );
}

#[test]
fn many_good_mean_cv() {
    let s = surface_from_population(
        CobbDouglasPopulation::cd2(0.3).unwrap(),
        2,
        DerivativeScheme::default(),
    )
    .unwrap();
    let b = Budget::new(vec![1.0, 1.0], 2.0).unwrap();
    assert_eq!(
        cv_mean_multigood(
            &s,
            &PriceChange::from_delta(b.clone(), &[0.0, 0.0]).unwrap()
        )
        .unwrap(),
        0.0
    );
    let pc = PriceChange::from_delta(b, &[0.1, 0.05]).unwrap();
    let approx = cv_mean_multigood(&s, &pc).unwrap();
    let exact = population_cv(
        &CobbDouglasPopulation::cd2(0.3).unwrap(),
        &pc,
        &OdeConfig::default(),
    )
    .unwrap()
    .mean;
    assert!((approx - exact).abs() < 2e-4, "{approx} vs {exact}");

    assert!(cv_mean_multigood(&s, &l0_change(0.1)).is_err());
}

#[test]
fn report_assembly() {
    let s = l0();
    let r = welfare_report(&s, &l0_change(0.1), &ReportOptions::default()).unwrap();
    assert!(close(
        r.robust - r.first_order,
        r.decomposition.total(),
        1e-12
    ));
    assert!(r.bounds.lower <= r.bounds.upper);
    assert_eq!(r.bounds.kind, BoundsKind::WorstCase);
    assert_eq!(r.moments.len(), 3);
    assert_eq!(WelfareReport::CSV_HEADER.len(), r.csv_record().len());

    let zero = welfare_report(&s, &l0_change(0.0), &ReportOptions::default()).unwrap();
    assert!(
        zero.robust == 0.0
            && zero.path == 0.0
            && zero.bounds.upper == 0.0
            && zero.variance.robust == Some(0.0)
    );
    assert!(zero.moments.iter().all(|m| *m == 0.0) && zero.decomposition.total() == 0.0);

    let opts = ReportOptions {
        bounds: Some(BoundsSpec {
            lower: 0.0,
            upper: 1.0,
            thresholds: Some((0.5, 0.5)),
        }),
        ..ReportOptions::default()
    };
    let cheb = welfare_report(&s, &l0_change(0.1), &opts).unwrap();
    assert_eq!(cheb.bounds.kind, BoundsKind::Chebyshev);
    let json = serde_json::to_value(&cheb).unwrap();
    for key in [
        "first_order",
        "ra",
        "robust",
        "path",
        "bounds",
        "variance",
        "decomposition",
        "moments",
    ] {
        assert!(json.get(key).is_some(), "{key}");
    }
    assert!(json["decomposition"].get("A1").is_some());
    assert!(json["variance"].get("additive").is_some());
}
