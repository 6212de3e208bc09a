use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::time::Instant;

use expband::tac::demand::{self, DemandParams, SIMULATION_PRICES};
use expband::tac::expar::{self, ExpArParams, ExpArPattern};
use expband::tac::{fit_separable, ExpDecayPattern, GridAxis, SeparablePattern};
use expband::{
    band, classify, fit_fixed_k, fit_line_minimax, fit_quartet, fit_with, parse_series,
    series_to_delimited, AlternationCertificate, Approximant, Dataset64, FitError, FitOptions,
    FitReport64,
};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::document::{
    BandDoc, CertificateDoc, DataDoc, InputInfo, ModelDoc, ReportDocument, SearchDoc, TacDoc,
    TaxonomyDoc,
};
use crate::{
    BandArgs, Cli, Command, CommonArgs, DemandSimArgs, ExparSimArgs, MinimaxArgs, Norm, TacArgs,
    TacModel,
};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

pub fn run(cli: Cli, argv: Vec<String>) -> CliResult<()> {
    let start = Instant::now();
    let (mut doc, out) = match cli.command {
        Command::FitMinimax(a) => {
            let out = a.common.output.out.clone();
            (fit_minimax(a)?, out)
        }
        Command::FitLine(a) => {
            let out = a.output.out.clone();
            (fit_line(a)?, out)
        }
        Command::FitQuartet(a) => {
            let out = a.output.out.clone();
            (fit_quartet_cmd(a)?, out)
        }
        Command::Classify(a) => {
            let out = a.output.out.clone();
            (classify_cmd(a)?, out)
        }
        Command::Band(a) => {
            let out = a.common.output.out.clone();
            (band_cmd(a)?, out)
        }
        Command::FitTac(a) => {
            let out = a.output.out.clone();
            (fit_tac(a)?, out)
        }
        Command::SimulateDemand(a) => {
            let out = a.output.out.clone();
            (simulate_demand(a)?, out)
        }
        Command::SimulateExpar(a) => {
            let out = a.output.out.clone();
            (simulate_expar(a)?, out)
        }
    };
    doc.version = env!("CARGO_PKG_VERSION");
    doc.argv = argv;
    doc.timing.elapsed_seconds = start.elapsed().as_secs_f64();
    let text = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
    match out {
        Some(path) => std::fs::write(&path, text).map_err(|e| io_error(&path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("stdout: {e}"))),
    }
}

fn read_input(path: &Path) -> CliResult<(String, InputInfo)> {
    let mut bytes = Vec::new();
    if path.as_os_str() == "-" {
        std::io::stdin()
            .read_to_end(&mut bytes)
            .map_err(|e| io_error(path, e))?;
    } else {
        bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
    }
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Input(format!("{}: not UTF-8 text", path.display())))?;
    let info = InputInfo {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
        rows: 0,
    };
    Ok((text, info))
}

fn load_dataset(path: &Path) -> CliResult<(Dataset64, InputInfo)> {
    let (text, mut info) = read_input(path)?;
    let data = Dataset64::parse(&text)?;
    info.rows = data.len();
    Ok((data, info))
}

fn require_max_norm(norm: Norm, command: &str) -> CliResult<()> {
    match norm {
        Norm::Max => Ok(()),
        Norm::L2 => Err(CliError::Input(format!(
            "--norm l2 is only available for fit-tac, not {command}"
        ))),
    }
}

fn new_doc(command: &str, input: Option<InputInfo>, norm: Norm) -> ReportDocument {
    ReportDocument {
        command: command.to_string(),
        input,
        norm: Some(match norm {
            Norm::Max => "max",
            Norm::L2 => "l2",
        }),
        ..Default::default()
    }
}

/// Fills the approximation, certificate and band fields, and writes the
/// plot file when requested.
fn describe_approximant(
    doc: &mut ReportDocument,
    data: &Dataset64,
    approx: &Approximant<f64>,
    cert: &AlternationCertificate<f64>,
    plot: Option<&Path>,
) -> CliResult<()> {
    let fitted = approx.values_on(data)?;
    let (upper, lower) = band(approx, data)?;
    if let Some(path) = plot {
        write_plot(path, data.t(), data.values(), &fitted, &lower, &upper, &cert.indices)?;
    }
    doc.model = Some(ModelDoc::from(approx));
    doc.error = Some(cert.error);
    doc.certificate = Some(CertificateDoc::from(cert));
    doc.band = Some(BandDoc {
        fitted,
        lower,
        upper,
    });
    Ok(())
}

fn describe_report(
    doc: &mut ReportDocument,
    data: &Dataset64,
    report: &FitReport64,
    plot: Option<&Path>,
) -> CliResult<()> {
    describe_approximant(doc, data, &report.approximant, &report.certificate, plot)?;
    doc.error = Some(report.error);
    doc.taxonomy = Some(TaxonomyDoc::from(&report.taxonomy));
    doc.quartet = report.quartet;
    if report.search_k.is_some() || report.evals > 0 {
        doc.search = Some(SearchDoc {
            k: report.search_k,
            bracket_width: report.k_bracket,
            evals: report.evals,
        });
    }
    doc.alternatives = report.alternatives.iter().map(Into::into).collect();
    doc.warnings = report.warnings.clone();
    Ok(())
}

fn fit_minimax(a: MinimaxArgs) -> CliResult<ReportDocument> {
    require_max_norm(a.common.norm, "fit-minimax")?;
    let (data, info) = load_dataset(&a.common.data)?;
    let options = FitOptions {
        bracket_tol: a.tol,
        k_range: a.k_min.zip(a.k_max),
    };
    let report = fit_with(&data, &options)?;
    let mut doc = new_doc("fit-minimax", Some(info), a.common.norm);
    describe_report(&mut doc, &data, &report, a.common.plot.as_deref())?;
    Ok(doc)
}

fn fit_line(a: CommonArgs) -> CliResult<ReportDocument> {
    require_max_norm(a.norm, "fit-line")?;
    let (data, info) = load_dataset(&a.data)?;
    let (model, cert) = fit_line_minimax(&data)?;
    let mut doc = new_doc("fit-line", Some(info), a.norm);
    describe_approximant(&mut doc, &data, &Approximant::Model(model), &cert, a.plot.as_deref())?;
    Ok(doc)
}

fn fit_quartet_cmd(a: CommonArgs) -> CliResult<ReportDocument> {
    require_max_norm(a.norm, "fit-quartet")?;
    let (data, info) = load_dataset(&a.data)?;
    let report = fit_quartet(&data)?;
    let mut doc = new_doc("fit-quartet", Some(info), a.norm);
    describe_report(&mut doc, &data, &report, a.plot.as_deref())?;
    Ok(doc)
}

fn classify_cmd(a: CommonArgs) -> CliResult<ReportDocument> {
    require_max_norm(a.norm, "classify")?;
    if a.plot.is_some() {
        return Err(CliError::Input("classify has no fit to plot".into()));
    }
    let (data, info) = load_dataset(&a.data)?;
    let taxonomy = classify(&data)?;
    let mut doc = new_doc("classify", Some(info), a.norm);
    doc.taxonomy = Some(TaxonomyDoc::from(&taxonomy));
    Ok(doc)
}

fn band_cmd(a: BandArgs) -> CliResult<ReportDocument> {
    require_max_norm(a.common.norm, "band")?;
    let (data, info) = load_dataset(&a.common.data)?;
    let mut doc = new_doc("band", Some(info), a.common.norm);
    let plot = a.common.plot.as_deref();
    match a.k {
        None => {
            let report = fit_with(&data, &FitOptions::default())?;
            describe_report(&mut doc, &data, &report, plot)?;
        }
        Some(0.0) => {
            let (model, cert) = fit_line_minimax(&data)?;
            describe_approximant(&mut doc, &data, &Approximant::Model(model), &cert, plot)?;
        }
        Some(k) => {
            let (model, cert) = fit_fixed_k(k, &data)?;
            describe_approximant(&mut doc, &data, &Approximant::Model(model), &cert, plot)?;
        }
    }
    Ok(doc)
}

fn write_plot(
    path: &Path,
    t: &[f64],
    y: &[f64],
    fitted: &[f64],
    lower: &[f64],
    upper: &[f64],
    extremal: &[usize],
) -> CliResult<()> {
    let mut text = String::from("t,T,fit,residual,lower,upper,extremal\n");
    for i in 0..t.len() {
        let mark = u8::from(extremal.contains(&i));
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            t[i],
            y[i],
            fitted[i],
            y[i] - fitted[i],
            lower[i],
            upper[i],
            mark
        ));
    }
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

struct GridOverride {
    name: String,
    lo: f64,
    hi: f64,
    points: Option<usize>,
}

fn parse_grid(spec: &str) -> CliResult<GridOverride> {
    let bad = || CliError::Input(format!("--grid `{spec}`: expected name=lo:hi[:points]"));
    let (name, range) = spec.split_once('=').ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    if name.is_empty() || !(2..=3).contains(&parts.len()) {
        return Err(bad());
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    Ok(GridOverride {
        name: name.trim().to_string(),
        lo: num(parts[0])?,
        hi: num(parts[1])?,
        points: match parts.get(2) {
            Some(p) => Some(p.trim().parse().map_err(|_| bad())?),
            None => None,
        },
    })
}

fn apply_grid(mut axes: Vec<GridAxis<f64>>, specs: &[String]) -> CliResult<Vec<GridAxis<f64>>> {
    for spec in specs {
        let g = parse_grid(spec)?;
        let names: Vec<String> = axes.iter().map(|a| a.name.clone()).collect();
        let axis = axes.iter_mut().find(|a| a.name == g.name).ok_or_else(|| {
            CliError::Input(format!("--grid: unknown parameter `{}` (expected one of {names:?})", g.name))
        })?;
        axis.lo = g.lo;
        axis.hi = g.hi;
        if let Some(p) = g.points {
            axis.points = p;
        }
    }
    Ok(axes)
}

fn fit_tac(a: TacArgs) -> CliResult<ReportDocument> {
    if a.norm != Norm::L2 {
        return Err(CliError::Input("fit-tac minimises the sum of squares; use --norm l2".into()));
    }
    let plot = a.plot.as_deref();
    match a.model {
        TacModel::Exp => {
            let (data, info) = load_dataset(&a.data)?;
            let span = data.span();
            let axes = apply_grid(vec![GridAxis::new("d", -20.0 / span, -0.01 / span)], &a.grid)?;
            let pattern = ExpDecayPattern {
                x: data.t().to_vec(),
                y: data.values().to_vec(),
            };
            let fit = fit_separable(&pattern, &axes, a.tol)?;
            let (am, d, bm) = (fit.linear[0], fit.nonlinear[0], fit.linear[1]);
            let fitted: Vec<f64> = data.t().iter().map(|&x| am * (d * x).exp() + bm).collect();
            let mut doc = new_doc("fit-tac", Some(info), a.norm);
            doc.model = Some(ModelDoc {
                kind: "exponential",
                a: Some(am),
                k: Some(d),
                b: Some(bm),
                values: None,
            });
            finish_tac(&mut doc, "exp", &pattern, &fit, data.t(), data.values(), &fitted, plot)?;
            Ok(doc)
        }
        TacModel::Demand => {
            let (data, info) = load_dataset(&a.data)?;
            let axes = apply_grid(vec![demand::default_axis()], &a.grid)?;
            let fit = demand::fit_demand(&data, &axes[0], a.tol)?;
            let logq: Vec<f64> = data.values().iter().map(|q| q.log10()).collect();
            let fitted: Vec<f64> = data.t().iter().map(|&c| fit.params.log10_demand(c)).collect();
            let pattern = ExpDecayPattern {
                x: data.t().to_vec(),
                y: logq.clone(),
            };
            let mut doc = new_doc("fit-tac", Some(info), a.norm);
            doc.params = BTreeMap::from([
                ("q0".to_string(), json!(fit.params.q0)),
                ("k".to_string(), json!(fit.params.k)),
                ("alpha".to_string(), json!(fit.params.alpha)),
            ]);
            finish_tac(&mut doc, "demand", &pattern, &fit.separable, data.t(), &logq, &fitted, plot)?;
            Ok(doc)
        }
        TacModel::Expar => {
            let (text, mut info) = read_input(&a.data)?;
            let series: Vec<f64> = parse_series(&text)?;
            info.rows = series.len();
            let axes = apply_grid(expar::default_axes(a.order), &a.grid)?;
            let fit = expar::fit_expar(&series, a.order, a.delay, &axes, a.tol)?;
            let lag = fit.params.lag();
            let fitted: Vec<f64> = (lag..series.len()).map(|i| fit.params.step(&series[..i])).collect();
            let t: Vec<f64> = (lag..series.len()).map(|i| i as f64).collect();
            let pattern = ExpArPattern::new(&series, a.order, a.delay)?;
            let mut doc = new_doc("fit-tac", Some(info), a.norm);
            doc.params = expar_params(&fit.params);
            finish_tac(&mut doc, "expar", &pattern, &fit.separable, &t, &series[lag..], &fitted, plot)?;
            Ok(doc)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finish_tac<P: SeparablePattern<f64>>(
    doc: &mut ReportDocument,
    model: &'static str,
    pattern: &P,
    fit: &expband::tac::SeparableFit<f64>,
    t: &[f64],
    y: &[f64],
    fitted: &[f64],
    plot: Option<&Path>,
) -> CliResult<()> {
    let r = y
        .iter()
        .zip(fitted)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let lower: Vec<f64> = fitted.iter().map(|f| f - r).collect();
    let upper: Vec<f64> = fitted.iter().map(|f| f + r).collect();
    if let Some(path) = plot {
        write_plot(path, t, y, fitted, &lower, &upper, &[])?;
    }
    doc.rss = Some(fit.rss);
    doc.mse = Some(fit.mse);
    doc.tac = Some(TacDoc::new(model, fit, pattern.nonlinear_names(), pattern.linear_names()));
    doc.band = Some(BandDoc {
        fitted: fitted.to_vec(),
        lower,
        upper,
    });
    Ok(())
}

fn expar_params(p: &ExpArParams<f64>) -> BTreeMap<String, serde_json::Value> {
    BTreeMap::from([
        ("c0".to_string(), json!(p.c0)),
        ("c".to_string(), json!(p.c)),
        ("pi".to_string(), json!(p.pi)),
        ("gamma".to_string(), json!(p.gamma)),
        ("z".to_string(), json!(p.z)),
        ("delay".to_string(), json!(p.delay)),
    ])
}

fn simulate_demand(a: DemandSimArgs) -> CliResult<ReportDocument> {
    let prices = if a.prices.is_empty() {
        SIMULATION_PRICES.to_vec()
    } else {
        a.prices
    };
    let params = DemandParams {
        q0: a.q0,
        k: a.k,
        alpha: a.alpha,
    };
    let data = demand::simulate(&params, &prices, a.sd, a.seed.seed)?;
    if let Some(path) = &a.data_out {
        std::fs::write(path, data.to_delimited()).map_err(|e| io_error(path, e))?;
    }
    let mut doc = new_doc("simulate-demand", None, Norm::L2);
    doc.norm = None;
    doc.seed = Some(a.seed.seed);
    doc.params = BTreeMap::from([
        ("q0".to_string(), json!(a.q0)),
        ("k".to_string(), json!(a.k)),
        ("alpha".to_string(), json!(a.alpha)),
        ("sd".to_string(), json!(a.sd)),
    ]);
    doc.data = Some(DataDoc {
        t: Some(data.t().to_vec()),
        values: data.values().to_vec(),
    });
    Ok(doc)
}

fn simulate_expar(a: ExparSimArgs) -> CliResult<ReportDocument> {
    let params = ExpArParams {
        c0: a.c0,
        c: a.c,
        pi: a.pi,
        gamma: a.gamma,
        z: a.z,
        delay: a.delay,
    };
    let series = expar::generate(&params, &a.initial, a.count, a.noise, a.seed.seed)?;
    if let Some(path) = &a.data_out {
        std::fs::write(path, series_to_delimited(&series)).map_err(|e| io_error(path, e))?;
    }
    let mut doc = new_doc("simulate-expar", None, Norm::L2);
    doc.norm = None;
    doc.seed = Some(a.seed.seed);
    doc.params = expar_params(&params);
    doc.params.insert("noise".to_string(), json!(a.noise));
    doc.data = Some(DataDoc {
        t: None,
        values: series,
    });
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use expband::certify;

    #[test]
    fn grid_spec_parsing() {
        let g = parse_grid("gamma=0.5:2:15").unwrap();
        assert_eq!((g.name.as_str(), g.lo, g.hi, g.points), ("gamma", 0.5, 2.0, Some(15)));
        let g = parse_grid("d=-5:-0.001").unwrap();
        assert_eq!((g.lo, g.hi, g.points), (-5.0, -0.001, None));
        for bad in ["gamma", "=1:2", "g=1", "g=1:2:3:4", "g=a:2", "g=1:2:x"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn grid_override_by_name() {
        let axes = apply_grid(expar::default_axes(2), &["z2=2:6:12".to_string()]).unwrap();
        assert_eq!((axes[2].lo, axes[2].hi, axes[2].points), (2.0, 6.0, 12));
        assert_eq!(axes[0].points, 10);
        assert!(apply_grid(expar::default_axes(2), &["w=1:2".to_string()]).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(FitError::RankDeficient).exit_code(), 3);
        assert_eq!(CliError::from(FitError::ZeroRate).exit_code(), 2);
    }

    #[test]
    fn certify_marks_plot_rows() {
        let dir = std::env::temp_dir().join(format!("expband-plot-{}", std::process::id()));
        let d = Dataset64::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        let (m, _) = fit_line_minimax(&d).unwrap();
        let cert = certify(&Approximant::Model(m), &d).unwrap();
        let fitted = m.evaluate(d.t()).unwrap();
        write_plot(&dir, d.t(), d.values(), &fitted, &fitted, &fitted, &cert.indices).unwrap();
        let text = std::fs::read_to_string(&dir).unwrap();
        std::fs::remove_file(&dir).unwrap();
        let marks: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
        assert_eq!(marks, vec!["1", "1", "1"]);
    }
}
