//! Run configuration: a JSON file whose every field can be overridden by a flag.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use welfare_moments::estimation::BasisSpec;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Oracle population name (`L0`, `Q0`, `CD(α)`, `CD2(α)`).
    pub population: Option<String>,
    /// Input CSV in the household schema.
    pub data: Option<PathBuf>,
    /// A `fits.json` written by `estimate`.
    pub fits: Option<PathBuf>,
    /// Names of the modeled goods.
    pub goods: Vec<String>,
    /// Good whose price changes; defaults to the first.
    pub good: Option<String>,
    /// Highest fitted share moment.
    pub max_order: usize,
    pub basis: BasisSpec,
    pub sweep: SweepConfig,
    pub bounds: BoundsConfig,
    pub bootstrap: Option<BootstrapSettings>,
    pub seed: Option<u64>,
    pub quadrature_nodes: usize,
    pub ode_steps: usize,
    pub rationality: RationalityConfig,
    pub simulate: SimulateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            population: None,
            data: None,
            fits: None,
            goods: Vec::new(),
            good: None,
            max_order: 3,
            basis: BasisSpec::default(),
            sweep: SweepConfig::default(),
            bounds: BoundsConfig::default(),
            bootstrap: None,
            seed: None,
            quadrature_nodes: 32,
            ode_steps: 1024,
            rationality: RationalityConfig::default(),
            simulate: SimulateConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Base price of the changing good.
    pub p0: Option<f64>,
    /// Base income.
    pub y: Option<f64>,
    /// Full base price vector, for several priced goods.
    pub prices: Option<Vec<f64>>,
    pub dp: Vec<f64>,
    pub dp_range: Option<DpRange>,
}

/// `steps` equispaced changes from `start` to `stop`, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpRange {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepConfig {
    /// The explicit list followed by the range, in order.
    pub fn changes(&self) -> CliResult<Vec<f64>> {
        let mut out = self.dp.clone();
        if let Some(r) = self.dp_range {
            match r.steps {
                0 => return Err(CliError::Config("dp_range needs at least one step".into())),
                1 => out.push(r.start),
                n => out.extend(
                    (0..n).map(|i| r.start + (r.stop - r.start) * i as f64 / (n - 1) as f64),
                ),
            }
        }
        if out.is_empty() {
            return Err(CliError::Config(
                "the price-change sweep is empty; pass --dp or --dp-range".into(),
            ));
        }
        if let Some(v) = out.iter().find(|v| !v.is_finite()) {
            return Err(CliError::Config(format!("price change {v} is not finite")));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    /// Lower income-effect bound; defaults to 0.
    pub lower: Option<f64>,
    /// Upper income-effect bound; defaults to `1/p`.
    pub upper: Option<f64>,
    pub z: Option<f64>,
    pub k: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapSettings {
    pub replications: usize,
    pub level: f64,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        Self {
            replications: 200,
            level: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RationalityConfig {
    pub degree: usize,
    /// Grid points for the LP; defaults to `20 (degree + 1)`.
    pub grid: Option<usize>,
    /// Explicit `(price, income)` budgets.
    pub budgets: Vec<[f64; 2]>,
    /// Price range of the default budget grid.
    pub p_range: [f64; 2],
    /// Income range of the default budget grid.
    pub y_range: [f64; 2],
    /// Points per axis of the default budget grid.
    pub steps: usize,
    /// Support box override `[q_min, q_max]`.
    pub support: Option<[f64; 2]>,
}

impl Default for RationalityConfig {
    fn default() -> Self {
        Self {
            degree: 2,
            grid: None,
            budgets: Vec::new(),
            p_range: [1.0, 1.3],
            y_range: [1.5, 2.2],
            steps: 5,
            support: None,
        }
    }
}

impl RationalityConfig {
    pub fn grid_size(&self) -> usize {
        self.grid.unwrap_or(20 * (self.degree + 1))
    }

    /// Explicit budgets when given, otherwise the `steps × steps` grid.
    pub fn budget_points(&self) -> CliResult<Vec<[f64; 2]>> {
        if !self.budgets.is_empty() {
            return Ok(self.budgets.clone());
        }
        if self.steps == 0 {
            return Err(CliError::Config(
                "rationality grid needs at least one step".into(),
            ));
        }
        let axis = |[lo, hi]: [f64; 2]| -> Vec<f64> {
            if self.steps == 1 {
                vec![0.5 * (lo + hi)]
            } else {
                (0..self.steps)
                    .map(|i| lo + (hi - lo) * i as f64 / (self.steps - 1) as f64)
                    .collect()
            }
        };
        let ys = axis(self.y_range);
        Ok(axis(self.p_range)
            .into_iter()
            .flat_map(|p| ys.iter().map(move |y| [p, *y]))
            .collect())
    }
}

/// Design of simulated cross-sections: log prices and log instruments are
/// uniform, and `log y = log z + v` with `v ~ U(−income_noise, income_noise)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub n: usize,
    pub log_p_range: [f64; 2],
    pub log_z_range: [f64; 2],
    pub income_noise: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            n: 20_000,
            log_p_range: [-0.1, 0.1],
            log_z_range: [1.25, 1.45],
            income_noise: 0.02,
        }
    }
}

/// Long-form flags; each one overrides the matching config field.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub population: Option<String>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub fits: Option<PathBuf>,
    /// Comma-separated good names.
    #[arg(long, value_delimiter = ',')]
    pub goods: Option<Vec<String>>,
    #[arg(long)]
    pub good: Option<String>,
    #[arg(long)]
    pub max_order: Option<usize>,
    /// Sets both the price and the income degree.
    #[arg(long)]
    pub basis_degree: Option<usize>,
    #[arg(long)]
    pub price_degree: Option<usize>,
    #[arg(long)]
    pub income_degree: Option<usize>,
    /// Drop the control-function residual from the basis.
    #[arg(long)]
    pub no_control: bool,
    #[arg(long)]
    pub p0: Option<f64>,
    #[arg(long)]
    pub y: Option<f64>,
    /// Comma-separated base prices of all priced goods.
    #[arg(long, value_delimiter = ',')]
    pub prices: Option<Vec<f64>>,
    /// Comma-separated price changes.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub dp: Option<Vec<f64>>,
    /// `start:stop:steps`.
    #[arg(long, allow_hyphen_values = true)]
    pub dp_range: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub bounds_lower: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub bounds_upper: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold_z: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold_k: Option<f64>,
    /// Enables the bootstrap with this many replications.
    #[arg(long)]
    pub bootstrap_reps: Option<usize>,
    #[arg(long)]
    pub bootstrap_level: Option<f64>,
    #[arg(long)]
    pub quadrature_nodes: Option<usize>,
    #[arg(long)]
    pub ode_steps: Option<usize>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    /// Number of simulated households.
    #[arg(long)]
    pub n: Option<usize>,
}

fn parse_range(s: &str) -> CliResult<DpRange> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::Config(format!("--dp-range expects start:stop:steps, got '{s}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok(DpRange {
        start: parts[0].trim().parse().map_err(|_| bad())?,
        stop: parts[1].trim().parse().map_err(|_| bad())?,
        steps: parts[2].trim().parse().map_err(|_| bad())?,
    })
}

impl Flags {
    /// Reads the config file, if any, and applies the flags on top.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => RunConfig::default(),
        };
        self.apply(&mut cfg)?;
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut RunConfig) -> CliResult<()> {
        fn set<T: Clone>(slot: &mut T, v: &Option<T>) {
            if let Some(v) = v {
                *slot = v.clone();
            }
        }
        fn set_opt<T: Clone>(slot: &mut Option<T>, v: &Option<T>) {
            if v.is_some() {
                *slot = v.clone();
            }
        }
        set_opt(&mut cfg.seed, &self.seed);
        set_opt(&mut cfg.population, &self.population);
        set_opt(&mut cfg.data, &self.data);
        set_opt(&mut cfg.fits, &self.fits);
        set(&mut cfg.goods, &self.goods);
        set_opt(&mut cfg.good, &self.good);
        set(&mut cfg.max_order, &self.max_order);
        if let Some(d) = self.basis_degree {
            cfg.basis.price_degree = d;
            cfg.basis.income_degree = d;
        }
        set(&mut cfg.basis.price_degree, &self.price_degree);
        set(&mut cfg.basis.income_degree, &self.income_degree);
        if self.no_control {
            cfg.basis.include_control = false;
        }
        set_opt(&mut cfg.sweep.p0, &self.p0);
        set_opt(&mut cfg.sweep.y, &self.y);
        set_opt(&mut cfg.sweep.prices, &self.prices);
        if let Some(dp) = &self.dp {
            cfg.sweep.dp = dp.clone();
            if self.dp_range.is_none() {
                cfg.sweep.dp_range = None;
            }
        }
        if let Some(r) = &self.dp_range {
            cfg.sweep.dp_range = Some(parse_range(r)?);
            if self.dp.is_none() {
                cfg.sweep.dp.clear();
            }
        }
        set_opt(&mut cfg.bounds.lower, &self.bounds_lower);
        set_opt(&mut cfg.bounds.upper, &self.bounds_upper);
        set_opt(&mut cfg.bounds.z, &self.threshold_z);
        set_opt(&mut cfg.bounds.k, &self.threshold_k);
        if self.bootstrap_reps.is_some() || self.bootstrap_level.is_some() {
            let b = cfg.bootstrap.get_or_insert_with(BootstrapSettings::default);
            set(&mut b.replications, &self.bootstrap_reps);
            set(&mut b.level, &self.bootstrap_level);
        }
        set(&mut cfg.quadrature_nodes, &self.quadrature_nodes);
        set(&mut cfg.ode_steps, &self.ode_steps);
        set(&mut cfg.rationality.degree, &self.degree);
        set_opt(&mut cfg.rationality.grid, &self.grid);
        set(&mut cfg.simulate.n, &self.n);
        Ok(())
    }
}

pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Canonical serialization: keys sorted at every level.
pub fn canonical_json(cfg: &RunConfig) -> String {
    // serde_json's default map is ordered by key, so a round trip through
    // `Value` sorts every object.
    let value = serde_json::to_value(cfg).expect("configs serialize");
    serde_json::to_string(&value).expect("values serialize")
}

/// SHA-256 of the canonical serialization, hex encoded.
pub fn config_hash(cfg: &RunConfig) -> String {
    let digest = Sha256::digest(canonical_json(cfg).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
