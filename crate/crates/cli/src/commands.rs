use std::path::{Path, PathBuf};

use loadcast::evaluation::{fit_selected, metrics, prepare_training, run_framework, DatasetBundle};
use loadcast::features::{assemble_for_span, CalendarSpec, FeatureOptions, HUMIDITY};
use loadcast::hybrid::{ModelBundle, ModelSpec};
use loadcast::io::{
    fmt_f64, format_timestamp, read_demand_csv, read_future_exog_csv, read_occupancy_csv, read_weather_csv, write_csv,
    write_text,
};
use loadcast::series::{fill_gaps, log_transform, HourlyTimeSeries};
use loadcast::synth::{self, ScenarioSpec};

use crate::config::RunConfig;
use crate::error::{usage, CliResult};
use crate::plot::{write_plot_csv, write_svg};

pub const COMPARISON_CSV: &str = "comparison.csv";
pub const COMPARISON_JSON: &str = "comparison.json";
pub const MODEL_JSON: &str = "model.json";
pub const TEST_PLOT_CSV: &str = "test_plot.csv";
pub const TEST_PLOT_SVG: &str = "test_plot.svg";
pub const FORECAST_CSV: &str = "forecast.csv";
pub const FORECAST_PLOT_CSV: &str = "forecast_plot.csv";
pub const FORECAST_PLOT_SVG: &str = "forecast_plot.svg";
pub const FORECAST_REPORT_JSON: &str = "forecast_report.json";
pub const CLEANED_CSV: &str = "cleaned.csv";
pub const CLEANING_REPORT_JSON: &str = "cleaning_report.json";
pub const SELECTION_CSV: &str = "selection.csv";
pub const SELECTION_TXT: &str = "selection.txt";
pub const GENERATED_CONFIG: &str = "loadcast.conf";

fn out_dir(cfg: &RunConfig) -> CliResult<&Path> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| loadcast::Error::io(&cfg.out_dir, e))?;
    Ok(&cfg.out_dir)
}

fn json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value).map_err(loadcast::Error::from)? + "\n")
}

fn feature_options(cfg: &RunConfig) -> FeatureOptions {
    FeatureOptions {
        time_origin: None,
        include_humidity: cfg.include_humidity,
        building_area: cfg.building_area.clone(),
        annual_energy_kbtu: cfg.annual_energy_kbtu.clone(),
    }
}

/// Demand with its feature matrix, plus the calendar for later spans.
fn load_dataset(cfg: &RunConfig) -> CliResult<(DatasetBundle, CalendarSpec)> {
    let demand = read_demand_csv(cfg.require(&cfg.demand, "demand")?)?.series;
    let weather = read_weather_csv(cfg.require(&cfg.weather, "weather")?)?;
    let occupancy = read_occupancy_csv(cfg.require(&cfg.occupancy, "occupancy")?)?;
    let calendar = CalendarSpec::read(cfg.require(&cfg.calendar, "calendar")?)?;
    let features = assemble_for_span(
        demand.start(),
        demand.len(),
        &weather,
        &occupancy,
        &calendar,
        &feature_options(cfg),
    )?;
    Ok((DatasetBundle::new(demand, features)?, calendar))
}

pub fn clean(cfg: &RunConfig, input: Option<PathBuf>, with_log: bool) -> CliResult<()> {
    let input = input.or_else(|| cfg.demand.clone());
    let demand = read_demand_csv(cfg.require(&input, "demand")?)?;
    let (cleaned, report) = fill_gaps(&demand.series)?;
    let logged = if with_log { Some(log_transform(&cleaned)?) } else { None };
    let dir = out_dir(cfg)?;
    let mut header = vec!["timestamp", "kw"];
    if with_log {
        header.push("log_kw");
    }
    let rows = (0..cleaned.len()).map(|i| {
        let mut row = vec![format_timestamp(cleaned.timestamp(i)), fmt_f64(cleaned.values()[i])];
        if let Some(l) = &logged {
            row.push(fmt_f64(l.values()[i]));
        }
        row
    });
    write_csv(&dir.join(CLEANED_CSV), &header, rows)?;
    write_text(&dir.join(CLEANING_REPORT_JSON), &json(&report)?)?;
    println!(
        "{} hourly rows (input cadence {} min); filled {} single and {} multi-hour values",
        cleaned.len(),
        demand.cadence_minutes,
        report.single_hour_fills,
        report.multi_hour_fills
    );
    Ok(())
}

pub fn select(cfg: &RunConfig) -> CliResult<()> {
    let (bundle, _) = load_dataset(cfg)?;
    let split = cfg.split.resolve(bundle.demand.start(), bundle.demand.len())?;
    let mut options = cfg.framework_options();
    options.lasso_selection = true;
    let prep = prepare_training(&bundle, split.train.clone(), &options)?;
    let cv = prep.lasso.as_ref().ok_or_else(|| usage("no usable columns to select from"))?;

    let mut text = format!(
        "training rows: {}..{}\nlambda rule: {:?}\nbest lambda: {}\nlambda_min: {}\nlambda_1se: {}\nintercept: {}\n",
        split.train.start,
        split.train.end,
        cv.rule,
        fmt_f64(cv.best_lambda),
        fmt_f64(cv.lambda_min),
        fmt_f64(cv.lambda_1se),
        fmt_f64(cv.fit.intercept),
    );
    if !prep.unusable.is_empty() {
        text += &format!("unusable on the training range: {}\n", prep.unusable.join(", "));
    }
    text += "coefficients:\n";
    for (name, coef) in cv.fit.column_names.iter().zip(&cv.fit.coefficients) {
        text += &format!("  {name} = {}\n", fmt_f64(*coef));
    }
    text += &format!("retained: {}\n", cv.retained.join(", "));
    let rows = cv
        .fit
        .column_names
        .iter()
        .zip(&cv.column_variables)
        .zip(&cv.fit.coefficients)
        .map(|((c, v), b)| vec![c.clone(), v.clone(), fmt_f64(*b), cv.retained.contains(v).to_string()]);
    let dir = out_dir(cfg)?;
    write_csv(&dir.join(SELECTION_CSV), &["column", "variable", "coefficient", "retained"], rows)?;
    write_text(&dir.join(SELECTION_TXT), &text)?;
    print!("{text}");
    Ok(())
}

pub fn compare(cfg: &RunConfig) -> CliResult<()> {
    let (bundle, _) = load_dataset(cfg)?;
    let split = cfg.split.resolve(bundle.demand.start(), bundle.demand.len())?;
    let candidates: Vec<ModelSpec> = cfg.candidates.iter().map(|c| cfg.prepared(c)).collect();
    log::info!("comparing {} candidates on {}", candidates.len(), split.label);
    let run = run_framework(&bundle, &candidates, &split, &cfg.framework_options(), cfg.seed)?;
    let csv = run.table.to_csv_string()?;

    // every file is written after all fits finish
    let dir = out_dir(cfg)?;
    write_text(&dir.join(COMPARISON_CSV), &csv)?;
    write_text(&dir.join(COMPARISON_JSON), &(run.table.to_json()? + "\n"))?;
    print!("{csv}");

    let best = run.best()?;
    let model = run.models[best].clone().expect("best row has a model");
    let forecast = run.forecasts[best].as_ref().expect("best row has a forecast");
    let name = &run.table.rows[best].model;
    let saved = ModelBundle::new(
        name,
        run.preparation.columns.clone(),
        bundle.demand.start(),
        split.train.len(),
        model,
    );
    saved.save(&dir.join(MODEL_JSON))?;
    let actual = &run.preparation.clean.values()[split.test.clone()];
    write_plot_csv(&dir.join(TEST_PLOT_CSV), &forecast.kw, Some(actual))?;
    if cfg.svg {
        write_svg(&dir.join(TEST_PLOT_SVG), &format!("{name} on {}", split.label), &forecast.kw, Some(actual))?;
    }
    println!("selected {name}");
    Ok(())
}

pub fn forecast(cfg: &RunConfig, model_path: Option<PathBuf>, candidate: Option<ModelSpec>) -> CliResult<()> {
    let future_path = cfg.require(&cfg.future, "future")?;
    let future = read_future_exog_csv(future_path)?;
    let calendar_path = cfg.require(&cfg.calendar, "calendar")?;
    let calendar = CalendarSpec::read(calendar_path)?;

    let model_path = model_path.or_else(|| if candidate.is_some() { None } else { cfg.model.clone() });
    let saved = match (model_path, candidate.or_else(|| cfg.forecast_model.clone())) {
        (Some(p), _) => {
            let p = Some(p);
            ModelBundle::load(cfg.require(&p, "model")?)?
        }
        (None, Some(spec)) => {
            // fit on the whole history
            let (bundle, _) = load_dataset(cfg)?;
            let n = bundle.demand.len();
            let spec = cfg.prepared(&spec);
            let (model, prep) = fit_selected(&bundle, &spec, 0..n, &cfg.framework_options())?;
            ModelBundle::new(&spec.name, prep.columns, bundle.demand.start(), n, model)
        }
        (None, None) => return Err(usage("forecast needs a saved model (--model) or a candidate (--candidate)")),
    };
    if future.start != saved.forecast_start() {
        return Err(usage(format!(
            "future exogenous data starts at {} but the model's training ends before {}",
            format_timestamp(future.start),
            format_timestamp(saved.forecast_start())
        )));
    }
    let options = FeatureOptions {
        time_origin: Some(saved.train_start),
        include_humidity: saved.feature_columns.iter().any(|c| c == HUMIDITY),
        ..feature_options(cfg)
    };
    let x = assemble_for_span(future.start, future.len(), &future.weather, &future.occupancy, &calendar, &options)?
        .select_columns(&saved.feature_columns)?;
    let fc = saved.model.forecast(&x)?;
    log::info!("{} forecast over {} hours", saved.name, fc.kw.len());

    let dir = out_dir(cfg)?;
    let rows = (0..fc.kw.len()).map(|i| {
        vec![
            format_timestamp(fc.kw.timestamp(i)),
            fmt_f64(fc.kw.values()[i]),
            fmt_f64(fc.exog_log[i]),
            fmt_f64(fc.residual_log[i]),
        ]
    });
    write_csv(&dir.join(FORECAST_CSV), &["timestamp", "forecast_kw", "exog_log", "residual_log"], rows)?;
    let actual = future.actual_kw.as_deref();
    write_plot_csv(&dir.join(FORECAST_PLOT_CSV), &fc.kw, actual)?;
    if cfg.svg {
        write_svg(&dir.join(FORECAST_PLOT_SVG), &format!("{} forecast", saved.name), &fc.kw, actual)?;
    }
    if let Some(a) = actual {
        let actual = HourlyTimeSeries::new(future.start, a.to_vec())?;
        let report = metrics(&actual, &fc.kw, saved.model.n_regressors(), cfg.threshold_kw)?;
        write_text(&dir.join(FORECAST_REPORT_JSON), &json(&report)?)?;
        println!(
            "{}: {} hours, NRMSE {:.3}%, peak {:.2}%, energy {}",
            saved.name,
            fc.kw.len(),
            report.nrmse_pct,
            report.peak_pct,
            report.energy_pct.map_or("n/a".into(), |e| format!("{e:.2}%"))
        );
    } else {
        println!("{}: {} hours forecast", saved.name, fc.kw.len());
    }
    Ok(())
}

/// Run configuration pointing at the files a simulation wrote.
fn generated_config(spec: &ScenarioSpec) -> String {
    let train_years = spec.years - spec.holdout_years;
    let mut text = format!(
        "# written by `loadcast simulate`\n[data]\ndemand = {}\nweather = {}\noccupancy = {}\ncalendar = {}\n",
        synth::files::DEMAND,
        synth::files::WEATHER,
        synth::files::OCCUPANCY,
        synth::files::CALENDAR
    );
    if spec.holdout_years > 0 {
        text += &format!("future = {}\nmodel = results/{MODEL_JSON}\n", synth::files::FUTURE);
    }
    if train_years >= 2 {
        text += &format!("\n[split]\ntrain_years = 1\ntest_years = {}\n", train_years - 1);
    }
    text += &format!("\n[output]\ndir = results\n\n[run]\nseed = {}\n", spec.seed);
    text
}

pub fn simulate(cfg: &RunConfig, scenario: Option<PathBuf>, seed_override: Option<u64>) -> CliResult<()> {
    let mut spec = match &scenario {
        Some(_) => ScenarioSpec::read(cfg.require(&scenario, "scenario")?)?,
        None => ScenarioSpec::default(),
    };
    if let Some(s) = seed_override {
        spec.seed = s;
    }
    let bundle = synth::generate(&spec)?;
    let dir = out_dir(cfg)?;
    synth::write_bundle(&bundle, dir)?;
    write_text(&dir.join(GENERATED_CONFIG), &generated_config(&spec))?;
    println!(
        "{} hours from {} (residual sd {:.4}) written to {}",
        bundle.demand.len(),
        format_timestamp(spec.start),
        bundle.truth.residual_sd,
        dir.display()
    );
    Ok(())
}
