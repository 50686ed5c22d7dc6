use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use htheory::dist::{background_log_density, signal_log_density, DensityCurve};
use htheory::matrix::{ChainSpec, CovMatrix};
use htheory::pipeline::{
    aggregate, background_series, correlation, load_prices, log_returns, model_scan, normalize,
    optimal_window, price_table, recovered_return_check, rotate_whiten, synthetic_returns,
    FitReport, Histogram, SyntheticSpec, WindowSummary,
};
use htheory::sde::{simulate_hierarchy, SdeParams};
use htheory::{HModel, ModelClass};
use log::info;

use crate::failure::Failure;
use crate::{Density, EvalArgs, FitArgs, ModelArgs, ReportArgs, SimKind, SimulateArgs};

/// β per level from `--beta` and `--levels`.
fn betas(m: &ModelArgs) -> Result<Vec<f64>, Failure> {
    let n = m.levels.unwrap_or(m.beta.len());
    if n == 0 {
        return Err(Failure::usage("--levels must be at least 1"));
    }
    match m.beta.len() {
        1 => Ok(vec![m.beta[0]; n]),
        k if k == n => Ok(m.beta.clone()),
        k => Err(Failure::usage(format!("{k} β values given for {n} levels"))),
    }
}

fn model(m: &ModelArgs) -> Result<HModel, Failure> {
    Ok(HModel::new(m.class, betas(m)?, m.eps0)?)
}

/// Writes `bytes` to `path`, or to standard output.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes)
            .map_err(|e| Failure::data(e).context(format!("writing {}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn check_parent(path: Option<&Path>) -> Result<(), Failure> {
    if let Some(dir) = path
        .and_then(Path::parent)
        .filter(|d| !d.as_os_str().is_empty())
    {
        if !dir.is_dir() {
            return Err(Failure::usage(format!(
                "directory {} does not exist",
                dir.display()
            )));
        }
    }
    Ok(())
}

pub fn simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let beta = betas(&a.model)?;
    check_parent(a.output.as_deref())?;
    if a.steps == 0 {
        return Err(Failure::usage("--steps must be positive"));
    }
    let mut buf = Vec::new();
    match a.kind {
        SimKind::Matrix => {
            if !(a.daily_vol > 0.0 && a.daily_vol.is_finite()) {
                return Err(Failure::usage("--daily-vol must be positive"));
            }
            let sigma0 = CovMatrix::scaled_identity(a.assets, a.model.eps0);
            let chain = ChainSpec::new(a.model.class, beta, sigma0)?;
            let spec = SyntheticSpec::geometric(chain, a.steps, a.fast_block, a.block_ratio);
            let returns = synthetic_returns(&spec, a.seed)?;
            price_table(&returns, a.daily_vol)
                .write_csv(&mut buf)
                .map_err(Failure::data)?;
        }
        SimKind::Sde => {
            let s = match a.model.class {
                ModelClass::Wishart => 0.5,
                ModelClass::InverseWishart => 1.0,
            };
            let levels = beta.len();
            let mut p = SdeParams::geometric(
                levels,
                a.gamma1,
                a.gamma_ratio,
                1.0,
                s,
                a.model.eps0,
                a.steps,
            );
            p.kappa = p
                .gamma
                .iter()
                .zip(&beta)
                .map(|(g, b)| (2.0 * g / b).sqrt())
                .collect();
            if let Some(dt) = a.dt {
                p.dt = dt;
            }
            p.record_every = a.record_every;
            p.validate()?;
            simulate_hierarchy(&p, a.seed)?
                .write_csv(&mut buf)
                .map_err(Failure::data)?;
        }
    }
    emit(a.output.as_deref(), &buf)
}

pub fn eval(a: &EvalArgs) -> Result<(), Failure> {
    let m = model(&a.model)?;
    check_parent(a.output.as_deref())?;
    let grid = a.grid.points();
    let curve = match a.density {
        Density::Signal => DensityCurve::signal(&m, &grid)?,
        Density::Background => {
            if a.grid.lo <= 0.0 {
                return Err(Failure::usage("background grids must be positive"));
            }
            DensityCurve::background(&m, &grid)?
        }
    };
    let mut buf = Vec::new();
    curve.write_csv(&mut buf).map_err(Failure::data)?;
    emit(a.output.as_deref(), &buf)
}

/// `x,empirical,model` rows over the occupied bins of `hist`.
fn comparison_csv<F>(hist: &Histogram, ln_model: F) -> Result<String, Failure>
where
    F: Fn(f64) -> Result<f64, htheory::DistError>,
{
    let mut s = String::from("x,empirical,model\n");
    for (x, d) in hist.centers().into_iter().zip(hist.densities()) {
        if d > 0.0 {
            let _ = writeln!(s, "{x},{d:e},{:e}", ln_model(x)?.exp());
        }
    }
    Ok(s)
}

pub fn fit(a: &FitArgs) -> Result<(), Failure> {
    if a.max_levels == 0 {
        return Err(Failure::usage("--max-levels must be at least 1"));
    }
    if !(a.eps0 > 0.0 && a.eps0.is_finite()) {
        return Err(Failure::usage("--eps0 must be positive"));
    }
    if a.step == 0 {
        return Err(Failure::usage("--step must be positive"));
    }
    match a.window {
        Some(l) if l < 2 => return Err(Failure::usage("--window must be at least 2")),
        None if a.l_min < 2 || a.l_min > a.l_max => {
            return Err(Failure::usage("need 2 <= --l-min <= --l-max"))
        }
        _ => {}
    }
    if a.output_dir.exists() && !a.output_dir.is_dir() {
        return Err(Failure::usage(format!(
            "{} is not a directory",
            a.output_dir.display()
        )));
    }

    let prices = load_prices(&a.input)?;
    info!(
        "{} assets over {} dates",
        prices.assets(),
        prices.dates.len()
    );
    let n = normalize(&log_returns(&prices, 1)?)?;
    let w = rotate_whiten(&n, &correlation(&n)?)?;
    let agg = aggregate(&w)?;
    let ow = match a.window {
        Some(_) => None,
        None => Some(optimal_window(&w, a.l_min..=a.l_max)?),
    };
    let window = a
        .window
        .unwrap_or_else(|| ow.as_ref().map_or(a.l_min, |o| o.chosen_window()));
    if let Some(o) = &ow {
        if o.no_background_structure {
            log::warn!("no background structure: most assets show a flat window profile");
        }
    }
    let bg = background_series(&agg, window, a.step)?;
    let mut report: FitReport = model_scan(&bg, a.max_levels, a.eps0)?;
    report.optimal_window = ow.as_ref().map(WindowSummary::from);
    report.recovered_return_kl = Some(recovered_return_check(&agg, &bg)?);

    let sel = &report.selected;
    let best = HModel::common(sel.model_class, sel.levels, sel.beta_star, a.eps0)?;
    let background_csv = comparison_csv(&bg.histogram, |e| background_log_density(&best, e))?;
    let returns_csv = comparison_csv(&Histogram::returns(&agg.values)?, |x| {
        signal_log_density(&best, x)
    })?;
    let json = serde_json::to_string_pretty(&report).map_err(Failure::numerical)?;

    fs::create_dir_all(&a.output_dir)?;
    for (name, body) in [
        ("report.json", json + "\n"),
        ("background_density.csv", background_csv),
        ("return_density.csv", returns_csv),
    ] {
        let path = a.output_dir.join(name);
        fs::write(&path, body)
            .map_err(|e| Failure::data(e).context(format!("writing {}", path.display())))?;
    }
    print!("{}", report.render_table());
    Ok(())
}

pub fn report(a: &ReportArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.input)
        .map_err(|e| Failure::data(e).context(format!("reading {}", a.input.display())))?;
    let report: FitReport = serde_json::from_str(&text)
        .map_err(|e| Failure::data(e).context(format!("parsing {}", a.input.display())))?;
    print!("{}", report.render_table());
    Ok(())
}
