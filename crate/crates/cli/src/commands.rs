//! One function per subcommand.

use icboot_core::io::{breast_data_checksum, BREAST_DATA_VERSION};
use icboot_core::limit::ks_distance;
use icboot_core::rng::{child_seed, Purpose};
use icboot_core::sim::{
    figure2_quantile_trajectory, rate_bandwidth, simulated_bmse_curve, DensityData,
};
use icboot_core::{
    basic_ci, bmse_curve, bootstrap_roots, coverage_experiment, empirical_quantile,
    figure1_density_data, load_breast_cancer, npmle_dataset, parse_dataset, select_bandwidth,
    simulate_chernoff, true_mse_curve, BootstrapConfig, BootstrapScheme, ChernoffConfig, Dataset,
    DatasetFormat, Design, EventLaw, ExperimentConfig, IcmOptions, RootEstimator, Scenario,
};

use crate::config::Settings;
use crate::output::{num, two, Csv, OutDir, Table};
use crate::CliError;

pub const SIDECAR: &str = "run_config.txt";
pub const DEFAULT_OUT: &str = "icboot_out";
const DEFAULT_SCENARIO: &str = "exp/cs:2";

/// A bandwidth setting before the sample size is known.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Bandwidth {
    Fixed(f64),
    /// `n^{-1/5}`
    Rate,
    /// Minimizer of the bootstrap MSE curve.
    Auto,
}

impl Bandwidth {
    fn parse(text: &str, allow_auto: bool) -> Result<Self, CliError> {
        match text {
            "rate" => Ok(Bandwidth::Rate),
            "auto" if allow_auto => Ok(Bandwidth::Auto),
            _ => match text.parse::<f64>() {
                Ok(h) if h > 0.0 && h.is_finite() => Ok(Bandwidth::Fixed(h)),
                _ => Err(CliError::Input(format!("invalid bandwidth '{text}'"))),
            },
        }
    }

    fn resolve(self, n: usize) -> f64 {
        match self {
            Bandwidth::Fixed(h) => h,
            Bandwidth::Rate => rate_bandwidth(n),
            Bandwidth::Auto => unreachable!("auto bandwidths are selected from data"),
        }
    }
}

/// Parses `law/design`: laws `exp`, `exp:<rate>`, `folded-normal`;
/// designs `cs:<b>`, `case2:<b>`, `mixed:<kmax>:<b>`.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let bad = || CliError::Input(format!("invalid scenario '{text}'"));
    let (law, design) = text.split_once('/').ok_or_else(bad)?;
    let law_parts: Vec<&str> = law.split(':').collect();
    let law = match law_parts.as_slice() {
        ["exp"] => EventLaw::Exponential(1.0),
        ["exp", rate] => EventLaw::Exponential(rate.parse().map_err(|_| bad())?),
        ["folded-normal"] => EventLaw::FoldedNormal,
        _ => return Err(bad()),
    };
    let parts: Vec<&str> = design.split(':').collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
    let design = match parts.as_slice() {
        ["cs", b] => Design::CurrentStatus { b: num(b)? },
        ["case2", b] => Design::Case2 { b: num(b)? },
        ["mixed", k, b] => Design::Mixed {
            kmax: k.parse().map_err(|_| bad())?,
            b: num(b)?,
        },
        _ => return Err(bad()),
    };
    let scenario = Scenario { law, design };
    scenario.validate()?;
    Ok(scenario)
}

fn scheme_label(scheme: &BootstrapScheme) -> &'static str {
    match scheme {
        BootstrapScheme::FromNpmle => "npmle",
        BootstrapScheme::FromSmle(_) => "smle",
    }
}

fn bandwidth_field(scheme: &BootstrapScheme) -> String {
    scheme.bandwidth().map(num).unwrap_or_default()
}

fn estimator(s: &mut Settings, default: &str) -> Result<RootEstimator, CliError> {
    match s.string("estimator", Some(default))?.as_str() {
        "npmle" => Ok(RootEstimator::Npmle),
        "one-step" => Ok(RootEstimator::OneStep),
        other => Err(CliError::Input(format!("unknown estimator '{other}'"))),
    }
}

fn level(s: &mut Settings) -> Result<f64, CliError> {
    let level: f64 = s.parsed("level", Some(0.9))?;
    if !(level > 0.0 && level < 1.0) {
        return Err(CliError::Input(format!("level {level} must lie in (0, 1)")));
    }
    Ok(level)
}

struct Run {
    out: OutDir,
    seed: u64,
}

fn start(s: &mut Settings) -> Result<Run, CliError> {
    let dir = s.string("out", Some(DEFAULT_OUT))?;
    let seed = s.parsed("seed", Some(0u64))?;
    Ok(Run {
        out: OutDir::create(&dir)?,
        seed,
    })
}

fn finish(run: &Run, s: &Settings, command: &str) -> Result<(), CliError> {
    run.out.write(SIDECAR, &s.sidecar(command))
}

fn load_input(s: &mut Settings) -> Result<Dataset, CliError> {
    let path = s.string("input", None)?;
    let format: DatasetFormat = s.string("format", None)?.parse()?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))?;
    let data = parse_dataset(&text, format)?;
    s.note("subjects", data.len());
    Ok(data)
}

/// Distinct finite positive examination times.
fn observation_times(data: &Dataset) -> Result<Vec<f64>, CliError> {
    let mut times: Vec<f64> = data
        .subjects()?
        .iter()
        .flat_map(|sub| sub.times().to_vec())
        .filter(|t| *t > 0.0 && t.is_finite())
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    Ok(times)
}

pub fn fit(s: &mut Settings) -> Result<(), CliError> {
    let run = start(s)?;
    let data = load_input(s)?;
    let npmle = npmle_dataset(&data, IcmOptions::default())?;
    let mut csv = Csv::new(&["s", "cumulative"]);
    let mut table = Table::new(&["s", "F(s)"]);
    for t in observation_times(&data)? {
        let f = npmle.eval(t);
        csv.row(&[num(t), num(f)]);
        table.row(vec![two(t), two(f)]);
    }
    run.out.write("npmle.csv", &csv.into_string())?;
    print!("{}", table.render());
    finish(&run, s, "fit")
}

/// Settings of a bootstrap MSE bandwidth search.
struct BmseSearch {
    source: BootstrapScheme,
    grid: Vec<f64>,
}

fn bmse_search(
    s: &mut Settings,
    n: usize,
    h0_default: &str,
    grid_default: &str,
) -> Result<BmseSearch, CliError> {
    let grid = s.grid("h_grid", grid_default)?;
    let source = match s.string("bmse_source", Some("smle"))?.as_str() {
        "npmle" => BootstrapScheme::FromNpmle,
        "smle" => {
            let h0 = Bandwidth::parse(&s.string("h0", Some(h0_default))?, false)?.resolve(n);
            s.note("h0_value", num(h0));
            BootstrapScheme::FromSmle(h0)
        }
        other => return Err(CliError::Input(format!("unknown BMSE source '{other}'"))),
    };
    Ok(BmseSearch { source, grid })
}

/// The BMSE curve and its minimizer.
fn select(
    data: &Dataset,
    t0: f64,
    search: &BmseSearch,
    boot: usize,
    seed: u64,
) -> Result<(Vec<(f64, f64)>, f64), CliError> {
    let curve = bmse_curve(data, t0, search.source, &search.grid, boot, seed)?;
    let h = select_bandwidth(&curve)?;
    Ok((curve, h))
}

fn write_bandwidth_files(run: &Run, t0: f64, curve: &[(f64, f64)], h: f64) -> Result<(), CliError> {
    let mut csv = Csv::new(&["h", "bmse"]);
    for &(g, v) in curve {
        csv.row(&[num(g), num(v)]);
    }
    run.out.write("bmse.csv", &csv.into_string())?;
    let mut sel = Csv::new(&["t0", "selected_h"]);
    sel.row(&[num(t0), num(h)]);
    run.out.write("bandwidth.csv", &sel.into_string())
}

pub fn bandwidth(s: &mut Settings) -> Result<(), CliError> {
    let run = start(s)?;
    let data = load_input(s)?;
    let t0: f64 = s.parsed("t0", None)?;
    let boot = s.parsed("boot", Some(500usize))?;
    let search = bmse_search(s, data.len(), "rate", "0.05:1:0.05")?;
    let (curve, h) = select(&data, t0, &search, boot, run.seed)?;
    write_bandwidth_files(&run, t0, &curve, h)?;
    println!("selected bandwidth at t0 = {}: {}", two(t0), two(h));
    finish(&run, s, "bandwidth")
}

pub fn ci(s: &mut Settings) -> Result<(), CliError> {
    let run = start(s)?;
    let data = load_input(s)?;
    let n = data.len();
    let t0: f64 = s.parsed("t0", None)?;
    let level = level(s)?;
    let boot = s.parsed("boot", Some(500usize))?;
    let est = estimator(s, "npmle")?;
    let scheme = match s.string("scheme", Some("smle"))?.as_str() {
        "npmle" => BootstrapScheme::FromNpmle,
        "smle" => {
            let h = match Bandwidth::parse(&s.string("bandwidth", Some("rate"))?, true)? {
                Bandwidth::Auto => {
                    let search = bmse_search(s, n, "rate", "0.05:1:0.05")?;
                    let (curve, h) = select(&data, t0, &search, boot, run.seed)?;
                    write_bandwidth_files(&run, t0, &curve, h)?;
                    h
                }
                fixed => fixed.resolve(n),
            };
            BootstrapScheme::FromSmle(h)
        }
        other => return Err(CliError::Input(format!("unknown scheme '{other}'"))),
    };
    let cfg = BootstrapConfig::new(scheme, boot, run.seed).with_estimator(est);
    let res = bootstrap_roots(&data, t0, &cfg)?;
    let (lo, hi) = basic_ci(&res, level)?;
    let mut csv = Csv::new(&[
        "t0",
        "estimate",
        "lower",
        "upper",
        "level",
        "scheme",
        "bandwidth",
        "replicates",
        "failed",
    ]);
    csv.row(&[
        num(t0),
        num(res.estimate),
        num(lo),
        num(hi),
        num(level),
        scheme_label(&scheme).into(),
        bandwidth_field(&scheme),
        boot.to_string(),
        res.failed.len().to_string(),
    ]);
    run.out.write("ci.csv", &csv.into_string())?;
    let mut table = Table::new(&["t0", "estimate", "lower", "upper", "level"]);
    table.row(vec![
        two(t0),
        two(res.estimate),
        two(lo),
        two(hi),
        two(level),
    ]);
    print!("{}", table.render());
    finish(&run, s, "ci")
}

fn scenario(s: &mut Settings) -> Result<Scenario, CliError> {
    parse_scenario(&s.string("scenario", Some(DEFAULT_SCENARIO))?)
}

fn sim_scheme(s: &mut Settings, n: usize, bw_default: &str) -> Result<BootstrapScheme, CliError> {
    match s.string("scheme", Some("smle"))?.as_str() {
        "npmle" => Ok(BootstrapScheme::FromNpmle),
        "smle" => {
            let h = Bandwidth::parse(&s.string("bandwidth", Some(bw_default))?, false)?;
            Ok(BootstrapScheme::FromSmle(h.resolve(n)))
        }
        other => Err(CliError::Input(format!("unknown scheme '{other}'"))),
    }
}

pub fn coverage(s: &mut Settings) -> Result<(), CliError> {
    let run = start(s)?;
    let sc = scenario(s)?;
    let n = s.parsed("n", Some(100usize))?;
    let t0 = s.parsed("t0", Some(1.0f64))?;
    let level = level(s)?;
    let scheme = sim_scheme(s, n, "rate")?;
    let cfg = ExperimentConfig {
        scenario: sc,
        n,
        t0,
        level,
        reps: s.parsed("reps", Some(500usize))?,
        replicates: s.parsed("boot", Some(500usize))?,
        scheme,
        seed: run.seed,
    };
    let report = coverage_experiment(&cfg)?;
    let mut csv = Csv::new(&[
        "n",
        "t0",
        "level",
        "scheme",
        "bandwidth",
        "coverage",
        "mean_length",
        "reps",
        "failures",
    ]);
    csv.row(&[
        n.to_string(),
        num(t0),
        num(level),
        scheme_label(&scheme).into(),
        bandwidth_field(&scheme),
        num(report.coverage),
        num(report.mean_length),
        report.reps.to_string(),
        report.failures.to_string(),
    ]);
    run.out.write("coverage.csv", &csv.into_string())?;
    let mut table = Table::new(&["n", "scheme", "coverage", "length", "failures"]);
    table.row(vec![
        n.to_string(),
        scheme_label(&scheme).into(),
        two(report.coverage),
        two(report.mean_length),
        report.failures.to_string(),
    ]);
    print!("{}", table.render());
    finish(&run, s, "simulate coverage")
}

fn chernoff_quantiles(draws: &[f64]) -> Result<Vec<(f64, f64)>, CliError> {
    (1..=19)
        .map(|k| {
            let p = k as f64 / 20.0;
            Ok((p, empirical_quantile(draws, p)?))
        })
        .collect()
}

pub fn chernoff(s: &mut Settings) -> Result<(), CliError> {
    let run = start(s)?;
    let defaults = ChernoffConfig::default();
    let cfg = ChernoffConfig {
        half_width: s.parsed("half_width", Some(defaults.half_width))?,
        dt: s.parsed("dt", Some(defaults.dt))?,
        replicates: s.parsed("replicates", Some(defaults.replicates))?,
        seed: run.seed,
    };
    let draws = simulate_chernoff(&cfg)?;
    let mut csv = Csv::new(&["p", "quantile"]);
    let mut table = Table::new(&["p", "quantile"]);
    for (p, q) in chernoff_quantiles(&draws)? {
        csv.row(&[num(p), num(q)]);
        table.row(vec![two(p), two(q)]);
    }
    run.out
        .write("chernoff_quantiles.csv", &csv.into_string())?;
    print!("{}", table.render());
    finish(&run, s, "simulate chernoff")
}

pub fn fig1(s: &mut Settings) -> Result<(), CliError> {
    let run = start(s)?;
    let sc = scenario(s)?;
    let n = s.parsed("n", Some(500usize))?;
    let scheme = sim_scheme(s, n, "0.3")?;
    let cfg = ExperimentConfig {
        scenario: sc,
        n,
        t0: s.parsed("t0", Some(1.0f64))?,
        level: 0.9,
        reps: s.parsed("reps", Some(10_000usize))?,
        replicates: s.parsed("boot", Some(10_000usize))?,
        scheme,
        seed: run.seed,
    };
    let DensityData {
        mc_roots,
        boot_roots,
    } = figure1_density_data(&cfg)?;
    let mut csv = Csv::new(&["sample", "root"]);
    for r in &mc_roots {
        csv.row(&["monte_carlo".into(), num(*r)]);
    }
    for r in &boot_roots {
        csv.row(&["bootstrap".into(), num(*r)]);
    }
    run.out.write("fig1.csv", &csv.into_string())?;
    println!(
        "KS distance between sampling and bootstrap roots: {}",
        two(ks_distance(&mc_roots, &boot_roots))
    );
    finish(&run, s, "figures fig1")
}

pub fn fig2(s: &mut Settings) -> Result<(), CliError> {
    let run = start(s)?;
    let sc = scenario(s)?;
    let t0 = s.parsed("t0", Some(1.0f64))?;
    let n_grid: Vec<usize> = s
        .grid("n_grid", "500:5000:500")?
        .into_iter()
        .map(|x| {
            if x >= 1.0 && x.fract() == 0.0 {
                Ok(x as usize)
            } else {
                Err(CliError::Input(format!(
                    "sample size {x} is not a positive integer"
                )))
            }
        })
        .collect::<Result<_, _>>()?;
    let bw = Bandwidth::parse(&s.string("bandwidth", Some("0.3"))?, false)?;
    let boot = s.parsed("boot", Some(500usize))?;
    let chernoff = ChernoffConfig {
        replicates: s.parsed("chernoff_replicates", Some(100_000usize))?,
        seed: child_seed(run.seed, Purpose::Chernoff, 0),
        ..ChernoffConfig::default()
    };
    let q95 = empirical_quantile(&simulate_chernoff(&chernoff)?, 0.95)?;
    let npmle = figure2_quantile_trajectory(
        &sc,
        t0,
        |_| BootstrapScheme::FromNpmle,
        &n_grid,
        boot,
        run.seed,
        q95,
    )?;
    let smle = figure2_quantile_trajectory(
        &sc,
        t0,
        |n| BootstrapScheme::FromSmle(bw.resolve(n)),
        &n_grid,
        boot,
        run.seed,
        q95,
    )?;
    let mut csv = Csv::new(&["n", "npmle_q95", "smle_q95", "reference"]);
    let mut table = Table::new(&["n", "npmle_q95", "smle_q95", "reference"]);
    for (a, b) in npmle.points.iter().zip(&smle.points) {
        csv.row(&[a.0.to_string(), num(a.1), num(b.1), num(smle.reference)]);
        table.row(vec![
            a.0.to_string(),
            two(a.1),
            two(b.1),
            two(smle.reference),
        ]);
    }
    run.out.write("fig2.csv", &csv.into_string())?;
    print!("{}", table.render());
    finish(&run, s, "figures fig2")
}

pub fn fig3(s: &mut Settings) -> Result<(), CliError> {
    let run = start(s)?;
    let sc = scenario(s)?;
    let n = s.parsed("n", Some(1000usize))?;
    let t0 = s.parsed("t0", Some(1.0f64))?;
    let grid = s.grid("h_grid", "0.05:1:0.05")?;
    let h0s: Vec<f64> = s.list("h0_list", Some("0.3,0.4,0.5,0.6,0.7"))?;
    let reps = s.parsed("reps", Some(500usize))?;
    let boot = s.parsed("boot", Some(500usize))?;
    let truth_seed = child_seed(run.seed, Purpose::Experiment, u64::MAX);
    let mut curves = vec![(
        "true".to_string(),
        true_mse_curve(&sc, n, t0, &grid, reps, truth_seed)?,
    )];
    curves.push((
        "bmse_npmle".to_string(),
        simulated_bmse_curve(
            &sc,
            n,
            t0,
            BootstrapScheme::FromNpmle,
            &grid,
            boot,
            run.seed,
        )?,
    ));
    for h0 in h0s {
        let source = BootstrapScheme::FromSmle(h0);
        curves.push((
            format!("bmse_smle_{h0}"),
            simulated_bmse_curve(&sc, n, t0, source, &grid, boot, run.seed)?,
        ));
    }
    let mut csv = Csv::new(&["curve", "h", "mse"]);
    let mut table = Table::new(&["curve", "argmin"]);
    for (name, curve) in &curves {
        for &(h, v) in curve {
            csv.row(&[name.clone(), num(h), num(v)]);
        }
        table.row(vec![name.clone(), two(select_bandwidth(curve)?)]);
    }
    run.out.write("fig3.csv", &csv.into_string())?;
    print!("{}", table.render());
    finish(&run, s, "figures fig3")
}

pub fn realdata(s: &mut Settings) -> Result<(), CliError> {
    let run = start(s)?;
    s.note("dataset_version", BREAST_DATA_VERSION);
    s.note("dataset_sha256", breast_data_checksum());
    let t0s: Vec<f64> = s.list("t0", Some("20,30"))?;
    let levels: Vec<f64> = s.list("level", Some("0.9,0.95"))?;
    if let Some(l) = levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(CliError::Input(format!("level {l} must lie in (0, 1)")));
    }
    let schemes: Vec<&str> = match s.string("scheme", Some("both"))?.as_str() {
        "both" => vec!["npmle", "smle"],
        "npmle" => vec!["npmle"],
        "smle" => vec!["smle"],
        other => return Err(CliError::Input(format!("unknown scheme '{other}'"))),
    };
    let bw = if schemes.contains(&"smle") {
        Some(Bandwidth::parse(&s.string("bandwidth", Some("10"))?, true)?)
    } else {
        None
    };
    let boot = s.parsed("boot", Some(500usize))?;
    let est = estimator(s, "npmle")?;
    let search = if bw == Some(Bandwidth::Auto) {
        Some(bmse_search(s, 0, "10", "1:20:1")?)
    } else {
        None
    };
    let (radio, chemo) = load_breast_cancer();
    let mut csv = Csv::new(&[
        "group",
        "t0",
        "estimate",
        "scheme",
        "bandwidth",
        "level",
        "lower",
        "upper",
    ]);
    let mut table = Table::new(&[
        "group", "t0", "estimate", "scheme", "level", "lower", "upper",
    ]);
    for (group, data) in [("radiotherapy", &radio), ("radio_chemo", &chemo)] {
        for &t0 in &t0s {
            for &name in &schemes {
                let scheme = match name {
                    "npmle" => BootstrapScheme::FromNpmle,
                    _ => BootstrapScheme::FromSmle(match bw.expect("smle has a bandwidth") {
                        Bandwidth::Auto => {
                            let search = search.as_ref().expect("auto has a search");
                            select(data, t0, search, boot, run.seed)?.1
                        }
                        fixed => fixed.resolve(data.len()),
                    }),
                };
                let cfg = BootstrapConfig::new(scheme, boot, run.seed).with_estimator(est);
                let res = bootstrap_roots(data, t0, &cfg)?;
                for &level in &levels {
                    let (lo, hi) = basic_ci(&res, level)?;
                    csv.row(&[
                        group.into(),
                        num(t0),
                        num(res.estimate),
                        name.into(),
                        bandwidth_field(&scheme),
                        num(level),
                        num(lo),
                        num(hi),
                    ]);
                    table.row(vec![
                        group.into(),
                        two(t0),
                        two(res.estimate),
                        name.into(),
                        two(level),
                        two(lo),
                        two(hi),
                    ]);
                }
            }
        }
    }
    run.out.write("table5.csv", &csv.into_string())?;
    print!("{}", table.render());
    finish(&run, s, "realdata")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenarios() {
        assert_eq!(
            parse_scenario("exp/cs:2").unwrap(),
            Scenario::exponential_current_status()
        );
        let sc = parse_scenario("folded-normal/mixed:3:2").unwrap();
        assert_eq!(sc.law, EventLaw::FoldedNormal);
        assert_eq!(sc.design, Design::Mixed { kmax: 3, b: 2.0 });
        assert_eq!(
            parse_scenario("exp:2.5/case2:1").unwrap().law,
            EventLaw::Exponential(2.5)
        );
        for bad in ["exp", "exp/cs", "gamma/cs:2", "exp/cs:-1", "exp/mixed:0:2"] {
            assert!(parse_scenario(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn bandwidth_specs() {
        assert_eq!(
            Bandwidth::parse("0.3", false).unwrap(),
            Bandwidth::Fixed(0.3)
        );
        assert_eq!(Bandwidth::parse("auto", true).unwrap(), Bandwidth::Auto);
        assert!(Bandwidth::parse("auto", false).is_err());
        assert!(Bandwidth::parse("0", false).is_err());
        assert!((Bandwidth::Rate.resolve(32) - 0.5).abs() < 1e-15);
    }
}
