//! Cross-sections drawn from an oracle population.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use welfare_moments::estimation::{Dataset, Household};
use welfare_moments::oracle::{draw_agent, AnyPopulation, DemandClosure, Population};
use welfare_moments::Budget;

use crate::config::SimulateConfig;
use crate::error::{CliError, CliResult};

/// `x` for a single priced good, `x1, x2, …` otherwise.
pub fn default_goods(k: usize) -> Vec<String> {
    if k == 1 {
        vec!["x".into()]
    } else {
        (1..=k).map(|i| format!("x{i}")).collect()
    }
}

fn draw_range(rng: &mut ChaCha20Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn check_range(name: &str, [lo, hi]: [f64; 2]) -> CliResult<()> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(CliError::Config(format!(
            "simulate.{name} must be a finite [lo, hi] with lo <= hi"
        )));
    }
    Ok(())
}

/// Draws `cfg.n` households. Each row gets its own type, uniform log prices
/// and log instrument, and `log y = log z + v` with uniform `v`.
pub fn simulate(
    pop: &AnyPopulation,
    goods: Vec<String>,
    cfg: &SimulateConfig,
    seed: u64,
) -> CliResult<Dataset> {
    let k = pop.goods();
    if goods.len() != k {
        return Err(CliError::Config(format!(
            "{} has {k} priced good(s) but {} name(s) were given",
            pop.name(),
            goods.len()
        )));
    }
    if cfg.n == 0 {
        return Err(CliError::Config("simulate.n must be positive".into()));
    }
    check_range("log_p_range", cfg.log_p_range)?;
    check_range("log_z_range", cfg.log_z_range)?;
    if !(cfg.income_noise >= 0.0 && cfg.income_noise.is_finite()) {
        return Err(CliError::Config(
            "simulate.income_noise must be nonnegative".into(),
        ));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let log_prices: Vec<f64> = (0..k)
            .map(|_| draw_range(&mut rng, cfg.log_p_range))
            .collect();
        let log_z = draw_range(&mut rng, cfg.log_z_range);
        let log_y = log_z + draw_range(&mut rng, [-cfg.income_noise, cfg.income_noise]);
        let agent = draw_agent(pop, &mut rng);
        let prices: Vec<f64> = log_prices.iter().map(|l| l.exp()).collect();
        let y = log_y.exp();
        let b = Budget::new(prices.clone(), y)?;
        let shares = (0..k)
            .map(|j| agent.quantity(j, &b).map(|q| prices[j] * q / y))
            .collect::<welfare_moments::Result<Vec<f64>>>()?;
        rows.push(Household {
            shares,
            log_prices,
            log_y,
            log_z,
        });
    }
    Ok(Dataset::new(goods, rows)?)
}
