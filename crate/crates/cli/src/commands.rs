use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bcr_core::artifact;
use bcr_core::data::{read_numeric_csv, ResponseColumn};
use bcr_core::simbench::{run_replicates, Method, MetricsReport, ScenarioId, SimConfig};
use bcr_core::{fit_ensemble, load_csv, standardize, BcrError, CsvOptions, Ensemble};
use log::info;

use crate::args::{EnsembleFlags, FitArgs, MethodChoice, PredictArgs, ReportArgs, SimulateArgs, TableFormat};
use crate::config::FileConfig;
use crate::error::CliError;

const DEFAULT_REPLICATES: usize = 100;
const DEFAULT_SEED: u64 = 0;

fn sim_config(flags: &EnsembleFlags) -> SimConfig {
    SimConfig {
        m_min: flags.m_min,
        m_max: flags.m_max,
        s: flags.s,
        psi_low: flags.psi_low,
        psi_high: flags.psi_high,
        prior_variance: flags.prior_variance,
        level: flags.level.unwrap_or(0.95),
    }
}

fn csv_options(no_header: bool) -> CsvOptions {
    CsvOptions {
        has_header: !no_header,
    }
}

/// Attaches `path` to bare I/O errors from the core loaders.
fn with_path(path: &Path) -> impl Fn(BcrError) -> CliError + '_ {
    move |e| match e {
        BcrError::Io(io) => CliError::io(path, io),
        other => other.into(),
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

pub fn fit(args: &FitArgs, file: &FileConfig) -> Result<(), CliError> {
    let start = Instant::now();
    let response: ResponseColumn = args
        .response
        .as_deref()
        .or(file.response.as_deref())
        .unwrap_or("0")
        .parse()
        .expect("infallible");
    let data = load_csv(&args.data, &response, csv_options(args.no_header)).map_err(with_path(&args.data))?;
    let (std_data, stats) = standardize(&data);
    let seed = args.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let flags = file.merge_ensemble(&args.ensemble);
    let cfg = sim_config(&flags).ensemble_config(data.n(), data.p(), seed);
    info!("fitting {} members on n = {}, p = {}", cfg.s, data.n(), data.p());
    let ens = fit_ensemble(&std_data.x, &std_data.y, &cfg)?.with_stats(stats);
    artifact::save(&ens, &args.out)?;
    print!("{}", fit_summary(&ens, data.n(), start.elapsed().as_secs_f64(), &args.out));
    Ok(())
}

fn fit_summary(ens: &Ensemble, n: usize, secs: f64, out: &Path) -> String {
    let cfg = ens.config();
    let mut s = String::new();
    let _ = writeln!(s, "data: n = {n}, p = {}", ens.p());
    let _ = writeln!(
        s,
        "ensemble: s = {}, window [{}, {}], {} dropped",
        cfg.s,
        cfg.m_min,
        cfg.m_max,
        ens.dropped().len()
    );
    let mut order: Vec<usize> = (0..ens.members().len()).collect();
    order.sort_by(|&a, &b| ens.weights()[b].total_cmp(&ens.weights()[a]));
    let _ = writeln!(s, "top weights:");
    for &k in order.iter().take(5) {
        let m = &ens.members()[k];
        let _ = writeln!(
            s,
            "  member {:>4}  m = {:>4}  psi = {:.3}  weight = {:.4}",
            m.index,
            m.projection.m(),
            m.projection.spec().psi,
            ens.weights()[k]
        );
    }
    let _ = writeln!(s, "wall time: {secs:.2} s");
    let _ = writeln!(s, "model written to {}", out.display());
    s
}

pub fn predict(args: &PredictArgs, file: &FileConfig) -> Result<(), CliError> {
    let ens = artifact::load(&args.model).map_err(with_path(&args.model))?;
    let table = read_numeric_csv(&args.data, csv_options(args.no_header)).map_err(with_path(&args.data))?;
    let drop = match &args.response {
        Some(sel) => Some(table.column_index(&sel.parse().expect("infallible"))?),
        None => None,
    };
    let (x, _, _) = table.split(drop);
    let level = args
        .level
        .or(file.level)
        .unwrap_or(ens.config().interval_level);
    let preds = ens.predict_original(&x, level)?;
    let mut out = String::from("mean,lo,hi\n");
    for p in &preds {
        let _ = writeln!(out, "{},{},{}", p.mean, p.lo, p.hi);
    }
    write_output(args.out.as_deref(), out.as_bytes())
}

fn parse_scenarios(list: &str) -> Result<Vec<ScenarioId>, CliError> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<ScenarioId>().map_err(CliError::from))
        .collect()
}

pub fn report_path(dir: &Path, report: &MetricsReport, ext: &str) -> PathBuf {
    dir.join(format!("{}_{}.{ext}", report.scenario, report.method))
}

pub fn simulate(args: &SimulateArgs, file: &FileConfig) -> Result<(), CliError> {
    let list = args
        .scenario
        .as_deref()
        .or(file.scenario.as_deref())
        .ok_or_else(|| CliError::Usage("no scenario given (--scenario)".into()))?;
    let scenarios = parse_scenarios(list)?;
    if scenarios.is_empty() {
        return Err(CliError::Usage("empty scenario list".into()));
    }
    let methods = match args.method.or(file.method()?).unwrap_or(MethodChoice::Both) {
        MethodChoice::Bcr => vec![Method::Bcr],
        MethodChoice::Ridge => vec![Method::Ridge],
        MethodChoice::Both => vec![Method::Bcr, Method::Ridge],
    };
    let replicates = args.replicates.or(file.replicates).unwrap_or(DEFAULT_REPLICATES);
    let seed = args.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let cfg = sim_config(&file.merge_ensemble(&args.ensemble));
    fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;

    for id in scenarios {
        let sc = bcr_core::simbench::scenario(id);
        for &method in &methods {
            info!("{id} / {method}: {replicates} replicates");
            let report = run_replicates(&sc, method, replicates, &cfg, seed)?;
            let mut json = serde_json::to_vec_pretty(&report).expect("report serializes");
            json.push(b'\n');
            let path = report_path(&args.out, &report, "json");
            fs::write(&path, json).map_err(|e| CliError::io(&path, e))?;
            let csv = format!("{}\n{}\n", MetricsReport::CSV_HEADER, report.csv_row());
            let path = report_path(&args.out, &report, "csv");
            fs::write(&path, csv).map_err(|e| CliError::io(&path, e))?;
            println!(
                "{} {}: mspe {:.4} (boot se {:.4}), coverage {:.3}, median PI length {:.3}",
                report.scenario,
                report.method,
                report.mspe_mean,
                report.mspe_boot_se,
                report.coverage,
                report.pi_len_median
            );
            eprintln!("  wall time {:.2} s", report.wall_time_s);
        }
    }
    Ok(())
}

fn collect_report_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .map_err(|e| CliError::io(input, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

pub fn report(args: &ReportArgs) -> Result<(), CliError> {
    let mut reports = Vec::new();
    for path in collect_report_files(&args.inputs)? {
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let r: MetricsReport = serde_json::from_str(&text).map_err(|e| CliError::Report {
            path: path.clone(),
            message: e.to_string(),
        })?;
        reports.push(r);
    }
    let table = match args.format {
        TableFormat::Csv => {
            let mut s = format!("{}\n", MetricsReport::CSV_HEADER);
            for r in &reports {
                let _ = writeln!(s, "{}", r.csv_row());
            }
            s
        }
        TableFormat::Markdown => markdown_table(&reports),
    };
    write_output(args.out.as_deref(), table.as_bytes())
}

fn markdown_table(reports: &[MetricsReport]) -> String {
    let mut s = String::from(
        "| scenario | method | n | p | R | MSPE | boot se | MSPE x 0.1 | coverage | median PI | PI 2.5% | PI 97.5% |\n\
         |---|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n",
    );
    for r in reports {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} |",
            r.scenario,
            r.method,
            r.n,
            r.p,
            r.n_replicates,
            r.mspe_mean,
            r.mspe_boot_se,
            r.mspe_table_units,
            r.coverage,
            r.pi_len_median,
            r.pi_len_q025,
            r.pi_len_q975
        );
    }
    s.push_str("\nMSPE x 0.1 is the raw MSPE divided by ten (an entry of 0.12 means MSPE 1.2).\n");
    s
}
