use std::path::Path;

use clap::Subcommand;
use rayon::prelude::*;
use welfare_moments::estimation::{
    bootstrap_many, first_stage, fit_moment_surfaces, fitted_surface, BootstrapConfig, Dataset,
    FittedSurface, MomentFit,
};
use welfare_moments::oracle::{
    population_cv, surface_from_population, AnyPopulation, OdeConfig, Population, PopulationSurface,
};
use welfare_moments::rationality::{
    degree1_cone_test, lp_violation_search, RationalityVerdict, SupportBox,
};
use welfare_moments::welfare::{
    cv_first_order, cv_moment_local, cv_path, cv_ra, welfare_report, BoundsSpec, ReportOptions,
    WelfareReport,
};
use welfare_moments::{
    Budget, DerivativeScheme, MomentSurface, PriceChange, QuadratureRule, QuantitySurface,
};

use crate::bundle::{LabeledInterval, Metadata, ReportBundle};
use crate::config::{Flags, RunConfig};
use crate::error::{CliError, CliResult};
use crate::ingest::{dataset_csv, ingest_csv};
use crate::simulate::{default_goods, simulate};

/// Oracle surfaces carry exact moments up to this order.
pub const POPULATION_MAX_ORDER: usize = 5;

/// Income used for oracle populations when none is configured.
pub const DEFAULT_INCOME: f64 = 2.0;

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Draw a household cross-section from an oracle population.
    Simulate(Flags),
    /// Fit share-moment surfaces to a household CSV.
    Estimate(Flags),
    /// Welfare reports over a price-change sweep.
    Welfare(Flags),
    /// Rationalizability verdicts over a budget grid.
    Rationality(Flags),
    /// Approximation errors against the exact oracle CV.
    OracleCheck(Flags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Estimate(_) => "estimate",
            Command::Welfare(_) => "welfare",
            Command::Rationality(_) => "rationality",
            Command::OracleCheck(_) => "oracle-check",
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Command::Simulate(f)
            | Command::Estimate(f)
            | Command::Welfare(f)
            | Command::Rationality(f)
            | Command::OracleCheck(f) => f,
        }
    }
}

/// Files produced by a run, in the order they should be written. Without
/// `--out` the first one goes to standard output.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub files: Vec<(String, Vec<u8>)>,
    pub warnings: Vec<String>,
}

pub fn run(command: &Command, cfg: &RunConfig) -> CliResult<RunOutput> {
    match command {
        Command::Simulate(_) => run_simulate(cfg),
        Command::Estimate(_) => run_estimate(cfg),
        Command::Welfare(_) => run_welfare(cfg),
        Command::Rationality(_) => run_rationality(cfg),
        Command::OracleCheck(_) => run_oracle_check(cfg),
    }
}

/// Writes the files of `output` into `dir`, creating it if needed.
pub fn write_output(output: &RunOutput, dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for (name, bytes) in &output.files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

fn require_seed(cfg: &RunConfig, what: &str) -> CliResult<u64> {
    cfg.seed
        .ok_or_else(|| CliError::Config(format!("{what} is stochastic and needs --seed")))
}

fn population(cfg: &RunConfig) -> CliResult<AnyPopulation> {
    let name = cfg
        .population
        .as_deref()
        .ok_or_else(|| CliError::Config("this command needs --population".into()))?;
    Ok(AnyPopulation::from_name(name)?)
}

fn bootstrap_config(cfg: &RunConfig, what: &str) -> CliResult<Option<BootstrapConfig>> {
    match cfg.bootstrap {
        None => Ok(None),
        Some(b) => {
            let seed = require_seed(cfg, what)?;
            Ok(Some(BootstrapConfig::new(b.replications, b.level, seed)?))
        }
    }
}

fn load_data(cfg: &RunConfig, warnings: &mut Vec<String>) -> CliResult<Dataset> {
    let path = cfg.data.as_ref().expect("caller checked");
    let goods = (!cfg.goods.is_empty()).then_some(cfg.goods.as_slice());
    let ingested = ingest_csv(path, goods)?;
    warnings.extend(ingested.warnings);
    if ingested.dropped > 0 {
        warnings.push(format!(
            "dropped {} row(s) with nonpositive expenditure or instrument",
            ingested.dropped
        ));
    }
    Ok(ingested.dataset)
}

/// Every good, orders `1..=max_order`.
fn estimate_fits(ds: &Dataset, cfg: &RunConfig) -> welfare_moments::Result<Vec<MomentFit>> {
    let fs = if cfg.basis.include_control {
        Some(first_stage(ds)?)
    } else {
        None
    };
    let goods: Vec<usize> = (0..ds.n_goods()).collect();
    fit_moment_surfaces(ds, &goods, cfg.max_order, &cfg.basis, fs.as_ref())
}

fn good_fits(ds: &Dataset, good: usize, cfg: &RunConfig) -> welfare_moments::Result<FittedSurface> {
    let fs = if cfg.basis.include_control {
        Some(first_stage(ds)?)
    } else {
        None
    };
    let fits = fit_moment_surfaces(ds, &[good], cfg.max_order, &cfg.basis, fs.as_ref())?;
    fitted_surface(&fits, good)
}

enum Source {
    Population(PopulationSurface<AnyPopulation>),
    Fitted {
        surface: QuantitySurface<FittedSurface>,
        data: Option<Dataset>,
        fits: Vec<MomentFit>,
    },
}

struct Resolved {
    source: Source,
    goods: Vec<String>,
    good: usize,
}

impl Resolved {
    fn surface(&self) -> &dyn MomentSurface {
        match &self.source {
            Source::Population(s) => s,
            Source::Fitted { surface, .. } => surface,
        }
    }

    fn n_prices(&self) -> usize {
        self.goods.len()
    }

    fn data(&self) -> Option<&Dataset> {
        match &self.source {
            Source::Fitted { data, .. } => data.as_ref(),
            Source::Population(_) => None,
        }
    }
}

fn good_index(goods: &[String], good: Option<&str>) -> CliResult<usize> {
    match good {
        None => Ok(0),
        Some(name) => goods.iter().position(|g| g == name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown good '{name}'; goods are {}",
                goods.join(", ")
            ))
        }),
    }
}

fn read_fits(path: &Path) -> CliResult<(Vec<String>, Vec<MomentFit>)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bundle: ReportBundle = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let fits = bundle
        .fits
        .ok_or_else(|| CliError::Config(format!("{}: no fits in bundle", path.display())))?;
    let goods = bundle
        .goods
        .ok_or_else(|| CliError::Config(format!("{}: no goods in bundle", path.display())))?;
    Ok((goods, fits))
}

fn resolve(cfg: &RunConfig, warnings: &mut Vec<String>) -> CliResult<Resolved> {
    let sources = [
        cfg.population.is_some(),
        cfg.data.is_some(),
        cfg.fits.is_some(),
    ];
    match sources.iter().filter(|s| **s).count() {
        0 => {
            return Err(CliError::Config(
                "give one of --population, --data or --fits".into(),
            ))
        }
        1 => {}
        _ => {
            return Err(CliError::Config(
                "--population, --data and --fits are mutually exclusive".into(),
            ))
        }
    }
    if cfg.population.is_some() {
        let pop = population(cfg)?;
        let goods = if cfg.goods.is_empty() {
            default_goods(pop.goods())
        } else {
            cfg.goods.clone()
        };
        if goods.len() != pop.goods() {
            return Err(CliError::Config(format!(
                "{} has {} priced good(s) but {} name(s) were given",
                pop.name(),
                pop.goods(),
                goods.len()
            )));
        }
        let good = good_index(&goods, cfg.good.as_deref())?;
        let s = surface_from_population(pop, POPULATION_MAX_ORDER, DerivativeScheme::default())?
            .with_good(good);
        return Ok(Resolved {
            source: Source::Population(s),
            goods,
            good,
        });
    }
    if let Some(path) = &cfg.fits {
        let (goods, fits) = read_fits(path)?;
        let good = good_index(&goods, cfg.good.as_deref())?;
        let surface = fitted_surface(&fits, good)?.quantities();
        return Ok(Resolved {
            source: Source::Fitted {
                surface,
                data: None,
                fits,
            },
            goods,
            good,
        });
    }
    let ds = load_data(cfg, warnings)?;
    let goods = ds.goods().to_vec();
    let good = good_index(&goods, cfg.good.as_deref())?;
    let fitted = good_fits(&ds, good, cfg)?;
    let fits = fitted.fits().to_vec();
    Ok(Resolved {
        source: Source::Fitted {
            surface: fitted.quantities(),
            data: Some(ds),
            fits,
        },
        goods,
        good,
    })
}

/// The base budget of the sweep: configured prices or `p0` for the
/// changing good and 1 elsewhere; configured income, the median income of
/// the data, or [`DEFAULT_INCOME`] for populations.
fn base_budget(cfg: &RunConfig, r: &Resolved) -> CliResult<Budget> {
    let k = r.n_prices();
    let mut prices = match &cfg.sweep.prices {
        Some(p) if p.len() != k => {
            return Err(CliError::Config(format!(
                "sweep.prices has {} entries for {k} good(s)",
                p.len()
            )));
        }
        Some(p) => p.clone(),
        None => vec![1.0; k],
    };
    if let Some(p0) = cfg.sweep.p0 {
        prices[r.good] = p0;
    }
    let y = match (cfg.sweep.y, &r.source) {
        (Some(y), _) => y,
        (None, Source::Population(_)) => DEFAULT_INCOME,
        (None, Source::Fitted { data: Some(ds), .. }) => ds.median_budget()?.income(),
        (None, Source::Fitted { data: None, .. }) => {
            return Err(CliError::Config(
                "set --y when reading fitted surfaces".into(),
            ));
        }
    };
    Ok(Budget::new(prices, y)?)
}

fn price_change(base: &Budget, good: usize, dp: f64) -> welfare_moments::Result<PriceChange> {
    let mut delta = vec![0.0; base.dim()];
    delta[good] = dp;
    PriceChange::from_delta(base.clone(), &delta)
}

fn report_options(cfg: &RunConfig, base: &Budget, good: usize) -> CliResult<ReportOptions> {
    let quadrature = QuadratureRule::gauss_legendre(cfg.quadrature_nodes)?;
    let b = cfg.bounds;
    let thresholds = match (b.z, b.k) {
        (Some(z), Some(k)) => Some((z, k)),
        (None, None) => None,
        _ => {
            return Err(CliError::Config(
                "probability thresholds need both z and k".into(),
            ))
        }
    };
    let bounds = if b.lower.is_none() && b.upper.is_none() && thresholds.is_none() {
        None
    } else {
        Some(BoundsSpec {
            lower: b.lower.unwrap_or(0.0),
            upper: b.upper.unwrap_or(1.0 / base.price(good)),
            thresholds,
        })
    };
    Ok(ReportOptions { bounds, quadrature })
}

fn run_simulate(cfg: &RunConfig) -> CliResult<RunOutput> {
    let seed = require_seed(cfg, "simulate")?;
    let pop = population(cfg)?;
    let goods = if cfg.goods.is_empty() {
        default_goods(pop.goods())
    } else {
        cfg.goods.clone()
    };
    let ds = simulate(&pop, goods, &cfg.simulate, seed)?;
    Ok(RunOutput {
        files: vec![("draws.csv".into(), dataset_csv(&ds)?)],
        warnings: Vec::new(),
    })
}

fn jensen_diagnostics(fits: &[MomentFit], ds: &Dataset) -> welfare_moments::Result<Vec<String>> {
    let b = ds.median_budget()?;
    let mut out = Vec::new();
    for (k, name) in ds.goods().iter().enumerate() {
        let s = fitted_surface(fits, k)?.quantities();
        if s.max_order() < 2 {
            continue;
        }
        let (m1, m2) = (s.moment(1, &b)?, s.moment(2, &b)?);
        if m2 < m1 * m1 {
            out.push(format!(
                "{name}: fitted M2 = {m2} is below M1^2 = {} at the median budget",
                m1 * m1
            ));
        }
    }
    Ok(out)
}

fn run_estimate(cfg: &RunConfig) -> CliResult<RunOutput> {
    if cfg.data.is_none() {
        return Err(CliError::Config("estimate needs --data".into()));
    }
    let boot = bootstrap_config(cfg, "the bootstrap")?;
    let mut warnings = Vec::new();
    let ds = load_data(cfg, &mut warnings)?;
    let fits = estimate_fits(&ds, cfg)?;
    let mut bundle = ReportBundle::new(Metadata::new("estimate", cfg));
    bundle.diagnostics = jensen_diagnostics(&fits, &ds)?;
    if let Some(boot) = boot {
        // Mean demand and its own-price slope at the median budget.
        let b = ds.median_budget()?;
        let k = ds.n_goods();
        let stat = |d: &Dataset| -> welfare_moments::Result<Vec<f64>> {
            let f = estimate_fits(d, cfg)?;
            let mut out = Vec::with_capacity(2 * k);
            for g in 0..k {
                let s = fitted_surface(&f, g)?.quantities();
                out.push(s.moment(1, &b)?);
                out.push(s.d_own_price(1, &b)?);
            }
            Ok(out)
        };
        let intervals = bootstrap_many(&ds, stat, &boot)?;
        let labels = ds
            .goods()
            .iter()
            .flat_map(|g| [format!("M1[{g}]"), format!("d_price_M1[{g}]")]);
        bundle.intervals = Some(
            labels
                .zip(intervals)
                .map(|(label, interval)| LabeledInterval { label, interval })
                .collect(),
        );
    }
    bundle.goods = Some(ds.goods().to_vec());
    bundle.fits = Some(fits);
    Ok(RunOutput {
        files: vec![("fits.json".into(), bundle.to_json())],
        warnings,
    })
}

fn sweep_csv(reports: &[WelfareReport]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::io("<csv>", e);
    w.write_record(WelfareReport::CSV_HEADER).map_err(io)?;
    for r in reports {
        w.write_record(r.csv_record()).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::io("<csv>", e))
}

fn run_welfare(cfg: &RunConfig) -> CliResult<RunOutput> {
    let changes = cfg.sweep.changes()?;
    let boot = bootstrap_config(cfg, "the bootstrap")?;
    if boot.is_some() && cfg.data.is_none() {
        return Err(CliError::Config(
            "the bootstrap resamples households and needs --data".into(),
        ));
    }
    let mut warnings = Vec::new();
    let r = resolve(cfg, &mut warnings)?;
    let base = base_budget(cfg, &r)?;
    let opts = report_options(cfg, &base, r.good)?;
    let s = r.surface();
    let reports: Vec<WelfareReport> = changes
        .par_iter()
        .map(|dp| welfare_report(s, &price_change(&base, r.good, *dp)?, &opts))
        .collect::<welfare_moments::Result<_>>()?;

    let mut bundle = ReportBundle::new(Metadata::new("welfare", cfg));
    bundle.goods = Some(r.goods.clone());
    if let (Some(boot), Some(ds)) = (boot, r.data()) {
        let stat = |d: &Dataset| -> welfare_moments::Result<Vec<f64>> {
            let s = good_fits(d, r.good, cfg)?.quantities();
            changes
                .iter()
                .map(|dp| cv_moment_local(&s, 1, &price_change(&base, r.good, *dp)?))
                .collect()
        };
        let intervals = bootstrap_many(ds, stat, &boot)?;
        bundle.intervals = Some(
            changes
                .iter()
                .zip(intervals)
                .map(|(dp, interval)| LabeledInterval {
                    label: format!("robust[dp={dp}]"),
                    interval,
                })
                .collect(),
        );
    }
    if let Source::Fitted { fits, .. } = &r.source {
        bundle.fits = Some(fits.clone());
    }
    let csv = sweep_csv(&reports)?;
    bundle.reports = reports;
    Ok(RunOutput {
        files: vec![
            ("report.json".into(), bundle.to_json()),
            ("sweep.csv".into(), csv),
        ],
        warnings,
    })
}

fn support_box(cfg: &RunConfig, r: &Resolved, b: &Budget) -> CliResult<SupportBox> {
    if let Some([lo, hi]) = cfg.rationality.support {
        return Ok(SupportBox::new(lo, hi)?);
    }
    match &r.source {
        Source::Population(s) => Ok(SupportBox::from_population(s.population(), r.good, b)?),
        Source::Fitted { data: Some(ds), .. } => {
            let obs = (0..ds.len())
                .map(|i| {
                    let bi = ds.budget(i)?;
                    let q = ds.rows()[i].shares[r.good] * bi.income() / bi.price(r.good);
                    Ok((bi, q))
                })
                .collect::<welfare_moments::Result<Vec<_>>>()?;
            Ok(SupportBox::empirical(&obs, b)?)
        }
        Source::Fitted { data: None, .. } => Err(CliError::Config(
            "fitted surfaces carry no support; set rationality.support".into(),
        )),
    }
}

fn run_rationality(cfg: &RunConfig) -> CliResult<RunOutput> {
    let rc = &cfg.rationality;
    if rc.degree == 0 {
        return Err(CliError::Config(
            "rationality.degree must be at least 1".into(),
        ));
    }
    let points = rc.budget_points()?;
    let mut warnings = Vec::new();
    let r = resolve(cfg, &mut warnings)?;
    let template = match &cfg.sweep.prices {
        Some(p) if p.len() == r.n_prices() => p.clone(),
        Some(p) => {
            return Err(CliError::Config(format!(
                "sweep.prices has {} entries for {} good(s)",
                p.len(),
                r.n_prices()
            )));
        }
        None => vec![1.0; r.n_prices()],
    };
    let s = r.surface();
    let grid = rc.grid_size();
    let per_budget: Vec<Vec<RationalityVerdict>> = points
        .par_iter()
        .map(|[p, y]| -> CliResult<Vec<RationalityVerdict>> {
            let mut prices = template.clone();
            prices[r.good] = *p;
            let b = Budget::new(prices, *y)?;
            let bx = support_box(cfg, &r, &b)?;
            let mut out = vec![degree1_cone_test(s, &b, &bx)?];
            for d in 2..=rc.degree {
                out.push(lp_violation_search(s, &b, d, &bx, grid)?);
            }
            Ok(out)
        })
        .collect::<CliResult<_>>()?;
    let verdicts: Vec<RationalityVerdict> = per_budget.into_iter().flatten().collect();
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    let mut bundle = ReportBundle::new(Metadata::new("rationality", cfg));
    bundle.goods = Some(r.goods.clone());
    if failed > 0 {
        bundle.diagnostics.push(format!(
            "{failed} of {} verdict(s) reject rationalizability",
            verdicts.len()
        ));
    }
    bundle.verdicts = Some(verdicts);
    Ok(RunOutput {
        files: vec![("verdicts.json".into(), bundle.to_json())],
        warnings,
    })
}

/// Columns of the oracle-check table.
pub const ORACLE_CHECK_HEADER: [&str; 8] = [
    "dp",
    "exact",
    "first_order",
    "ra",
    "robust",
    "path",
    "err_ra",
    "err_robust",
];

fn run_oracle_check(cfg: &RunConfig) -> CliResult<RunOutput> {
    if cfg.data.is_some() || cfg.fits.is_some() {
        return Err(CliError::Config(
            "oracle-check compares against an oracle; use --population".into(),
        ));
    }
    let changes = cfg.sweep.changes()?;
    let mut warnings = Vec::new();
    let r = resolve(cfg, &mut warnings)?;
    let Source::Population(s) = &r.source else {
        unreachable!("population source checked above")
    };
    let base = base_budget(cfg, &r)?;
    let ode = OdeConfig::new(cfg.ode_steps)?;
    let quad = QuadratureRule::gauss_legendre(cfg.quadrature_nodes)?;
    let rows: Vec<[f64; 8]> = changes
        .par_iter()
        .map(|dp| -> welfare_moments::Result<[f64; 8]> {
            let pc = price_change(&base, r.good, *dp)?;
            let exact = population_cv(s.population(), &pc, &ode)?.mean;
            let first_order = cv_first_order(s, &pc)?;
            let ra = cv_ra(s, &pc)?;
            let robust = cv_moment_local(s, 1, &pc)?;
            let path = cv_path(s, &pc, &quad)?;
            Ok([
                *dp,
                exact,
                first_order,
                ra,
                robust,
                path,
                (ra - exact).abs(),
                (robust - exact).abs(),
            ])
        })
        .collect::<welfare_moments::Result<_>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::io("<csv>", e);
    w.write_record(ORACLE_CHECK_HEADER).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(|x| format!("{x}")))
            .map_err(io)?;
    }
    let csv = w.into_inner().map_err(|e| CliError::io("<csv>", e))?;
    Ok(RunOutput {
        files: vec![("oracle_check.csv".into(), csv)],
        warnings,
    })
}
