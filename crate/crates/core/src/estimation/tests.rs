use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use super::*;
use crate::surface::{LogVar, ShareSurface};

fn household(shares: Vec<f64>, log_prices: Vec<f64>, log_y: f64, log_z: f64) -> Household {
    Household {
        shares,
        log_prices,
        log_y,
        log_z,
    }
}

fn one_good(rows: Vec<Household>) -> Dataset {
    Dataset::new(vec!["food".into()], rows).unwrap()
}

fn constant_share_data(n: usize, w: f64) -> Dataset {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    one_good(
        (0..n)
            .map(|_| {
                let lp = rng.random_range(-0.3..0.3);
                let lz = rng.random_range(0.0..1.0);
                household(
                    vec![w],
                    vec![lp],
                    0.5 + 0.8 * lz + rng.random_range(-0.2..0.2),
                    lz,
                )
            })
            .collect(),
    )
}

const NO_CONTROL: BasisSpec = BasisSpec {
    price_degree: 3,
    income_degree: 3,
    include_control: false,
};

#[test]
fn dataset_validation() {
    assert!(Dataset::new(
        vec!["a".into()],
        vec![household(vec![1.2], vec![0.0], 0.0, 0.0)]
    )
    .is_err());
    assert!(Dataset::new(
        vec!["a".into(), "b".into()],
        vec![household(vec![0.6, 0.5], vec![0.0, 0.0], 0.0, 0.0)]
    )
    .is_err());
    assert!(Dataset::new(
        vec!["a".into()],
        vec![household(vec![0.2, 0.1], vec![0.0], 0.0, 0.0)]
    )
    .is_err());
    let ds = one_good(vec![
        household(vec![0.1], vec![0.0], 1.0, 0.0),
        household(vec![0.2], vec![0.2], 3.0, 0.0),
        household(vec![0.3], vec![0.4], 2.0, 0.0),
    ]);
    let b = ds.median_budget().unwrap();
    assert!((b.price(0) - 0.2f64.exp()).abs() < 1e-15 && (b.income() - 2.0f64.exp()).abs() < 1e-14);
    assert_eq!(ds.resample(&[2, 2]).rows()[1].shares, vec![0.3]);
}

#[test]
fn first_stage_exact_relation() {
    let ds = one_good(
        (0..50)
            .map(|i| {
                let lz = i as f64 / 10.0;
                household(vec![0.2], vec![0.3], 1.0 + 0.5 * lz, lz)
            })
            .collect(),
    );
    let fs = first_stage(&ds).unwrap();
    assert!((fs.delta0 - 1.0).abs() < 1e-12 && (fs.delta1 - 0.5).abs() < 1e-12);
    assert_eq!(fs.delta2, vec![0.0]);
    assert_eq!(fs.dropped, vec!["log_p_food".to_string()]);
    assert!(fs.residuals.iter().all(|e| e.abs() < 1e-12));
}

#[test]
fn first_stage_matches_normal_equations() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 0.1).unwrap();
    let rows: Vec<Household> = (0..10_000)
        .map(|_| {
            let lz: f64 = rng.random_range(0.0..2.0);
            let lp: f64 = rng.random_range(-0.5..0.5);
            household(
                vec![0.2],
                vec![lp],
                0.3 + 0.7 * lz - 0.2 * lp + noise.sample(&mut rng),
                lz,
            )
        })
        .collect();
    let ds = one_good(rows);
    let fs = first_stage(&ds).unwrap();
    assert!((fs.delta1 - 0.7).abs() < 0.01);

    // Direct 3x3 normal-equation solve by Cramer's rule.
    let mut xtx = [[0.0; 3]; 3];
    let mut xty = [0.0; 3];
    for r in ds.rows() {
        let x = [1.0, r.log_z, r.log_prices[0]];
        for i in 0..3 {
            xty[i] += x[i] * r.log_y;
            for j in 0..3 {
                xtx[i][j] += x[i] * x[j];
            }
        }
    }
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(xtx);
    let coef: Vec<f64> = (0..3)
        .map(|c| {
            let mut m = xtx;
            for (i, row) in m.iter_mut().enumerate() {
                row[c] = xty[i];
            }
            det(m) / d
        })
        .collect();
    assert!((fs.delta0 - coef[0]).abs() < 1e-9);
    assert!((fs.delta1 - coef[1]).abs() < 1e-9);
    assert!((fs.delta2[0] - coef[2]).abs() < 1e-9);
    let mean = fs.residuals.iter().sum::<f64>() / fs.residuals.len() as f64;
    assert!(mean.abs() <= 1e-10);
}

#[test]
fn first_stage_singular_designs() {
    let ds = one_good(vec![
        household(vec![0.2], vec![0.1], 1.0, 0.5),
        household(vec![0.2], vec![0.2], 1.2, 0.7),
    ]);
    assert!(matches!(
        first_stage(&ds),
        Err(Error::SingularDesign { .. })
    ));

    let ds = one_good(
        (0..20)
            .map(|i| {
                let v = i as f64 / 7.0;
                household(vec![0.2], vec![2.0 * v], 1.0 + v.sin(), v)
            })
            .collect(),
    );
    match first_stage(&ds) {
        Err(Error::SingularDesign { columns }) => {
            assert_eq!(columns, vec!["log_z".to_string(), "log_p_food".to_string()])
        }
        other => panic!("expected a singular design, got {other:?}"),
    }
}

#[test]
fn constant_shares_fit_exactly() {
    let ds = constant_share_data(500, 0.4);
    let f1 = fit_moment_surface(&ds, 0, 1, &NO_CONTROL, None).unwrap();
    assert!((f1.alpha - 0.4f64.ln()).abs() < 1e-8);
    assert!(f1.beta[0].iter().chain(&f1.gamma).all(|c| c.abs() < 1e-8));
    assert_eq!(f1.control, None);
    let f2 = fit_moment_surface(&ds, 0, 2, &NO_CONTROL, None).unwrap();
    assert!((f2.alpha - 0.16f64.ln()).abs() < 1e-8);

    let fs = first_stage(&ds).unwrap();
    let with = fit_moment_surface(&ds, 0, 1, &BasisSpec::default(), Some(&fs)).unwrap();
    assert!(with.control.unwrap().abs() < 1e-8);
    assert!(fit_moment_surface(&ds, 0, 1, &BasisSpec::default(), None).is_err());

    let s = fitted_surface(&[f1, f2], 0).unwrap();
    let b = crate::Budget::two_good(1.0, 2.0).unwrap();
    assert!((s.share_moment(1, &b).unwrap() - 0.4).abs() < 1e-8);
    assert!(s.d_log_price(1, &b, 0).unwrap().abs() < 1e-8);
    assert!(s.d_log_income(1, &b).unwrap().abs() < 1e-8);
    assert_eq!(s.share_moment(3, &b), Err(Error::MissingOrder(3)));
}

#[test]
fn degenerate_shares() {
    let ds = constant_share_data(100, 0.0);
    assert!(matches!(
        fit_moment_surface(&ds, 0, 1, &NO_CONTROL, None),
        Err(Error::DegenerateData(_))
    ));
    assert!(fit_moment_surface(&ds, 0, 0, &NO_CONTROL, None).is_err());
}

fn toy_fit(order: usize) -> MomentFit {
    MomentFit {
        good: 0,
        order,
        alpha: -1.0 * order as f64,
        beta: vec![vec![0.3, -0.2, 0.1], vec![0.05, 0.0, 0.0]],
        gamma: vec![-0.4, 0.15, 0.02],
        control: Some(0.7),
        rss: 0.0,
        iters: 0,
    }
}

#[test]
fn order_gaps_are_reported() {
    assert_eq!(
        fitted_surface(&[toy_fit(1), toy_fit(3)], 0).unwrap_err(),
        Error::MissingOrder(2)
    );
    assert_eq!(
        fitted_surface(&[toy_fit(2)], 0).unwrap_err(),
        Error::MissingOrder(1)
    );
    assert_eq!(fitted_surface(&[], 0).unwrap_err(), Error::MissingOrder(1));
}

#[test]
fn analytic_log_derivatives() {
    let s = fitted_surface(&[toy_fit(1), toy_fit(2)], 0).unwrap();
    let b = crate::Budget::new(vec![1.3, 0.8], 2.4).unwrap();
    let h = 1e-5;
    let shift = |dlp0: f64, dlp1: f64, dly: f64| {
        crate::Budget::new(
            vec![b.price(0) * dlp0.exp(), b.price(1) * dlp1.exp()],
            b.income() * dly.exp(),
        )
        .unwrap()
    };
    let w = |bb: &crate::Budget| s.share_moment(1, bb).unwrap();
    let num_p = (w(&shift(h, 0.0, 0.0)) - w(&shift(-h, 0.0, 0.0))) / (2.0 * h);
    let num_y = (w(&shift(0.0, 0.0, h)) - w(&shift(0.0, 0.0, -h))) / (2.0 * h);
    assert!((s.d_log_price(1, &b, 0).unwrap() - num_p).abs() < 1e-8);
    assert!((s.d_log_income(1, &b).unwrap() - num_y).abs() < 1e-8);

    let dy = |bb: &crate::Budget| s.d_log_income(1, bb).unwrap();
    let num_yy = (dy(&shift(0.0, 0.0, h)) - dy(&shift(0.0, 0.0, -h))) / (2.0 * h);
    let num_py = (dy(&shift(h, 0.0, 0.0)) - dy(&shift(-h, 0.0, 0.0))) / (2.0 * h);
    let d2 = |a, c| s.d2_log(1, &b, a, c).unwrap().unwrap();
    assert!((d2(LogVar::Income, LogVar::Income) - num_yy).abs() < 1e-7);
    assert!((d2(LogVar::Price(0), LogVar::Income) - num_py).abs() < 1e-7);
    let dp1 = |bb: &crate::Budget| s.d_log_price(1, bb, 1).unwrap();
    let num_11 = (dp1(&shift(0.0, h, 0.0)) - dp1(&shift(0.0, -h, 0.0))) / (2.0 * h);
    assert!((d2(LogVar::Price(1), LogVar::Price(1)) - num_11).abs() < 1e-7);
    assert!(s
        .share_moment(1, &crate::Budget::two_good(1.0, 2.0).unwrap())
        .is_err());
}

fn uniform_column(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    one_good(
        (0..n)
            .map(|_| household(vec![rng.random::<f64>()], vec![0.0], 0.0, 0.0))
            .collect(),
    )
}

fn share_mean(ds: &Dataset) -> Result<f64> {
    Ok(ds.rows().iter().map(|r| r.shares[0]).sum::<f64>() / ds.len() as f64)
}

#[test]
fn bootstrap_constant_statistic() {
    let ds = constant_share_data(50, 0.3);
    let stat = |d: &Dataset| share_mean(d).map(|m| 10.0 * m);
    let r = bootstrap(&ds, stat, &BootstrapConfig::with_seed(1)).unwrap();
    assert!(
        (r.point - 3.0).abs() < 1e-12
            && (r.lower - 3.0).abs() < 1e-12
            && (r.upper - 3.0).abs() < 1e-12
    );
}

#[test]
fn bootstrap_width_matches_normal_approximation() {
    let ds = uniform_column(10_000, 5);
    let cfg = BootstrapConfig::new(200, 0.9, 2024).unwrap();
    let r = bootstrap(&ds, share_mean, &cfg).unwrap();
    let normal = 2.0 * 1.6449 * (1.0f64 / 12.0).sqrt() / 100.0;
    assert!((normal - 0.0095).abs() < 1e-4);
    let width = r.upper - r.lower;
    assert!(width > 0.008 && width < 0.011, "width {width}");
    assert_eq!(bootstrap(&ds, share_mean, &cfg).unwrap(), r);
}

#[test]
fn bootstrap_failures() {
    let ds = uniform_column(200, 9);
    let cfg = BootstrapConfig::with_seed(4);
    let full = share_mean(&ds).unwrap();
    // Fails on roughly half of the resamples but not on the full sample.
    let fragile = |d: &Dataset| {
        let m = share_mean(d)?;
        if m < full {
            Err(Error::DegenerateData("planted".into()))
        } else {
            Ok(m)
        }
    };
    assert!(matches!(
        bootstrap(&ds, fragile, &cfg),
        Err(Error::BootstrapInstability {
            replications: 200,
            ..
        })
    ));
    let rare = |d: &Dataset| {
        if d.rows()[0].shares[0] < 0.02 {
            Ok(f64::NAN)
        } else {
            share_mean(d)
        }
    };
    let r = bootstrap(&ds, rare, &cfg).unwrap();
    assert!(r.failures < 20);
    assert!(BootstrapConfig::new(1, 0.9, 0).is_err());
    assert!(BootstrapConfig::new(10, 1.0, 0).is_err());
}

#[test]
fn streams_are_independent_of_schedule() {
    let a = bootstrap::resample_indices(100, 7, 3);
    assert_eq!(a, bootstrap::resample_indices(100, 7, 3));
    assert_ne!(a, bootstrap::resample_indices(100, 7, 4));
}
