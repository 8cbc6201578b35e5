use welfare_moments::estimation::synthetic::ExpPolyDgp;
use welfare_moments::estimation::{
    first_stage, fit_moment_surface, fit_moment_surfaces, fitted_surface, BasisSpec, MomentFit,
};
use welfare_moments::welfare::cv_moment_local;
use welfare_moments::{PriceChange, QuantitySurface, ShareSurface};

fn exogenous() -> ExpPolyDgp {
    ExpPolyDgp {
        alpha: 0.2f64.ln(),
        beta: vec![-0.5, 0.05, 0.02],
        gamma: vec![0.3, -0.05, 0.03],
        endogeneity: 0.0,
        noise: 0.1,
        shock: 0.1,
        first_stage: [0.0, 0.5, 0.0],
        log_p_range: (-1.0, 1.0),
        log_z_range: (-2.0, 2.0),
    }
}

fn endogenous() -> ExpPolyDgp {
    ExpPolyDgp {
        endogeneity: 1.0,
        shock: 0.3,
        ..exogenous()
    }
}

fn coefficients(f: &MomentFit) -> Vec<f64> {
    let mut v = vec![f.alpha];
    v.extend(f.beta.iter().flatten());
    v.extend(&f.gamma);
    v
}

#[test]
fn planted_coefficients_are_recovered() {
    let dgp = exogenous();
    let ds = dgp.simulate(20_000, 17).unwrap();
    let fs = first_stage(&ds).unwrap();
    assert!((fs.delta1 - 0.5).abs() < 0.01);
    let fits = fit_moment_surfaces(&ds, &[0], 3, &BasisSpec::default(), Some(&fs)).unwrap();
    for f in &fits {
        let planted = dgp.planted_fit(f.order);
        let err = coefficients(f)
            .iter()
            .zip(coefficients(&planted))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.05, "order {}: max coefficient error {err}", f.order);
    }

    let truth = dgp.truth(3).unwrap();
    let fitted = fitted_surface(&fits, 0).unwrap();
    let b = ds.median_budget().unwrap();
    let rel = |a: f64, t: f64| ((a - t) / t).abs();
    for n in 1..=3 {
        assert!(
            rel(
                fitted.share_moment(n, &b).unwrap(),
                truth.share_moment(n, &b).unwrap()
            ) < 0.01
        );
        assert!(
            rel(
                fitted.d_log_price(n, &b, 0).unwrap(),
                truth.d_log_price(n, &b, 0).unwrap()
            ) < 0.01
        );
        assert!(
            rel(
                fitted.d_log_income(n, &b).unwrap(),
                truth.d_log_income(n, &b).unwrap()
            ) < 0.01
        );
    }

    let pc = PriceChange::scalar(b.price(0), b.price(0) + 0.05, b.income()).unwrap();
    let cv_hat = cv_moment_local(&QuantitySurface::new(&fitted), 1, &pc).unwrap();
    let cv_true = cv_moment_local(&QuantitySurface::new(&truth), 1, &pc).unwrap();
    assert!(rel(cv_hat, cv_true) < 0.01, "{cv_hat} vs {cv_true}");
}

#[test]
fn fitted_moments_are_positive_on_the_sample_hull() {
    let ds = exogenous().simulate(5_000, 3).unwrap();
    let fits = fit_moment_surfaces(
        &ds,
        &[0],
        2,
        &BasisSpec {
            include_control: false,
            ..Default::default()
        },
        None,
    )
    .unwrap();
    let s = fitted_surface(&fits, 0).unwrap();
    for i in (0..ds.len()).step_by(97) {
        let b = ds.budget(i).unwrap();
        assert!(s.share_moment(1, &b).unwrap() > 0.0 && s.share_moment(2, &b).unwrap() > 0.0);
    }
}

#[test]
fn control_function_removes_expenditure_bias() {
    let dgp = endogenous();
    let ds = dgp.simulate(20_000, 29).unwrap();
    let b = ds.median_budget().unwrap();
    let truth = dgp.truth(1).unwrap().d_log_income(1, &b).unwrap();

    let fs = first_stage(&ds).unwrap();
    let with = fit_moment_surface(&ds, 0, 1, &BasisSpec::default(), Some(&fs)).unwrap();
    let without = fit_moment_surface(
        &ds,
        0,
        1,
        &BasisSpec {
            include_control: false,
            ..Default::default()
        },
        None,
    )
    .unwrap();
    let slope = |f: MomentFit| {
        fitted_surface(&[f], 0)
            .unwrap()
            .d_log_income(1, &b)
            .unwrap()
    };
    let bias_with = (slope(with) - truth).abs();
    let bias_without = (slope(without) - truth).abs();
    assert!(
        bias_with <= 0.5 * bias_without,
        "with {bias_with}, without {bias_without}"
    );
}

#[test]
fn fits_are_deterministic() {
    let ds = exogenous().simulate(2_000, 1).unwrap();
    let basis = BasisSpec {
        include_control: false,
        ..Default::default()
    };
    let a = fit_moment_surfaces(&ds, &[0], 3, &basis, None).unwrap();
    let b = fit_moment_surfaces(&ds, &[0], 3, &basis, None).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}
