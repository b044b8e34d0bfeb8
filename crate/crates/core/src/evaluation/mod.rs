//! Forecast metrics, train/test splits and the model-comparison harness.
//!
//! [`run_framework`] cleans and log-transforms the demand, selects variables
//! with the cross-validated LASSO on the training range only, fits every
//! candidate, forecasts the test range and ranks the results.

mod metrics;
mod split;
mod table;

pub use metrics::{fit_adj_r2, metrics, peak_time_of_day, whole_year_hours, EvaluationReport};
pub use split::SplitSpec;
pub use table::{select_best, ComparisonRow, ComparisonTable, RankKey, RowStatus, SelectionRule, CSV_COLUMNS};

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::hybrid::{FittedModel, ModelForecast, ModelSpec};
use crate::linear::{collinear_columns, cv_lasso, select_variables, CvOptions, LassoCvResult};
use crate::sarima::SearchConstraints;
use crate::series::{fill_gaps, log_transform, CleaningReport, HourlyTimeSeries};

/// Demand in kW with its aligned feature matrix.
#[derive(Debug, Clone)]
pub struct DatasetBundle {
    pub demand: HourlyTimeSeries,
    pub features: FeatureMatrix,
}

impl DatasetBundle {
    pub fn new(demand: HourlyTimeSeries, features: FeatureMatrix) -> Result<Self> {
        if demand.len() != features.n_rows() {
            return Err(Error::LengthMismatch {
                expected: demand.len(),
                actual: features.n_rows(),
            });
        }
        if demand.start() != features.start() {
            return Err(Error::InvalidInput(format!(
                "demand starts at {} but features at {}",
                demand.start(),
                features.start()
            )));
        }
        Ok(Self { demand, features })
    }
}

#[derive(Debug, Clone)]
pub struct FrameworkOptions {
    pub cv: CvOptions,
    pub constraints: SearchConstraints,
    pub threshold_kw: Option<f64>,
    pub rule: SelectionRule,
    /// Run the LASSO screen; otherwise every usable column is kept.
    pub lasso_selection: bool,
}

impl Default for FrameworkOptions {
    fn default() -> Self {
        Self {
            cv: CvOptions::default(),
            constraints: SearchConstraints::default(),
            threshold_kw: None,
            rule: SelectionRule::default(),
            lasso_selection: true,
        }
    }
}

/// Training-range preparation shared by all candidates.
#[derive(Debug, Clone)]
pub struct Preparation {
    pub cleaning: CleaningReport,
    /// Cleaned demand in kW.
    pub clean: HourlyTimeSeries,
    /// Cleaned, log-transformed demand over the whole bundle.
    pub y_log: HourlyTimeSeries,
    /// Columns removed before selection: constant or collinear on the
    /// training range.
    pub unusable: Vec<String>,
    pub lasso: Option<LassoCvResult>,
    /// Design columns handed to the candidates.
    pub columns: Vec<String>,
}

/// Cleaning, usable-column screening and LASSO selection on the training
/// range.
pub fn prepare(bundle: &DatasetBundle, split: &SplitSpec, options: &FrameworkOptions) -> Result<Preparation> {
    if split.test.end > bundle.demand.len() {
        return Err(Error::InvalidInput(format!(
            "split {} needs {} rows, data has {}",
            split.label,
            split.test.end,
            bundle.demand.len()
        )));
    }
    prepare_training(bundle, split.train.clone(), options)
}

/// [`prepare`] for a bare training range, e.g. when fitting on all history.
pub fn prepare_training(bundle: &DatasetBundle, train: Range<usize>, options: &FrameworkOptions) -> Result<Preparation> {
    if train.is_empty() || train.end > bundle.demand.len() {
        return Err(Error::InvalidInput(format!(
            "training rows {train:?} outside the {} available",
            bundle.demand.len()
        )));
    }
    let (clean, cleaning) = fill_gaps(&bundle.demand)?;
    let y_log = log_transform(&clean)?;
    let y_train = &y_log.values()[train.clone()];

    let train_x = bundle.features.slice_rows(train)?;
    let varying = train_x.without_constant_columns();
    let mut unusable: Vec<String> = train_x
        .column_names()
        .into_iter()
        .filter(|c| varying.column(c).is_none())
        .collect();
    let collinear = collinear_columns(&varying);
    if !collinear.is_empty() {
        log::warn!("dropping collinear columns: {}", collinear.join(", "));
    }
    unusable.extend(collinear.iter().cloned());
    let keep: Vec<String> = varying.column_names().into_iter().filter(|c| !collinear.contains(c)).collect();
    let usable = varying.select_columns(&keep)?;

    let (lasso, columns) = if options.lasso_selection && usable.n_columns() > 0 {
        let cv = cv_lasso(&usable, y_train, &options.cv)?;
        let retained = select_variables(&cv)?;
        let columns = usable.select_variables(&retained)?.column_names();
        log::info!("LASSO kept {} of {} variables at lambda {:.4e}", retained.len(), usable.variables().len(), cv.best_lambda);
        (Some(cv), columns)
    } else {
        (None, usable.column_names())
    };
    Ok(Preparation {
        cleaning,
        clean,
        y_log,
        unusable,
        lasso,
        columns,
    })
}

/// Everything produced by one framework run.
#[derive(Debug, Clone)]
pub struct FrameworkRun {
    pub table: ComparisonTable,
    pub preparation: Preparation,
    /// Aligned with `table.rows`.
    pub models: Vec<Option<FittedModel>>,
    pub forecasts: Vec<Option<ModelForecast>>,
}

impl FrameworkRun {
    /// Index of the selected row.
    pub fn best(&self) -> Result<usize> {
        select_best(&self.table)
    }
}

/// Fits one candidate on the training rows after the same preparation the
/// framework applies.
pub fn fit_selected(
    bundle: &DatasetBundle,
    spec: &ModelSpec,
    train: Range<usize>,
    options: &FrameworkOptions,
) -> Result<(FittedModel, Preparation)> {
    let prep = prepare_training(bundle, train.clone(), options)?;
    let x = bundle.features.select_columns(&prep.columns)?.slice_rows(train.clone())?;
    let model = spec
        .clone()
        .with_constraints(&options.constraints)
        .fit(&x, &prep.y_log.values()[train])?;
    Ok((model, prep))
}

struct Outcome {
    row: ComparisonRow,
    model: Option<FittedModel>,
    forecast: Option<ModelForecast>,
}

fn evaluate(
    spec: &ModelSpec,
    x_train: &FeatureMatrix,
    y_train: &[f64],
    x_test: &FeatureMatrix,
    actual: &HourlyTimeSeries,
    split: &SplitSpec,
    options: &FrameworkOptions,
) -> Result<(FittedModel, ModelForecast, EvaluationReport)> {
    let model = spec.fit(x_train, y_train)?;
    let forecast = model.forecast(x_test)?;
    let e = model.n_regressors();
    let mut report = metrics(actual, &forecast.kw, e, options.threshold_kw)?;
    // adjusted R² of the training fit, on the log scale the models are fit in
    let fitted: Vec<f64> = y_train.iter().zip(model.residuals()).map(|(y, r)| y - r).collect();
    report.adj_r2 = fit_adj_r2(y_train, &fitted, e)?;
    log::debug!("{} on {}: nrmse {:.3}%", spec.name, split.label, report.nrmse_pct);
    Ok((model, forecast, report))
}

/// Fits, forecasts and ranks every candidate. Candidate failures are
/// recorded in their rows; an error is returned only when the data cannot
/// be prepared. The seed is recorded with the table; every estimator here
/// is deterministic.
pub fn run_framework(
    bundle: &DatasetBundle,
    candidates: &[ModelSpec],
    split: &SplitSpec,
    options: &FrameworkOptions,
    seed: u64,
) -> Result<FrameworkRun> {
    if candidates.is_empty() {
        return Err(Error::InvalidInput("candidate list is empty".into()));
    }
    let prep = prepare(bundle, split, options)?;
    let x = bundle.features.select_columns(&prep.columns)?;
    let x_train = x.slice_rows(split.train.clone())?;
    let x_test = x.slice_rows(split.test.clone())?;
    let y_train = &prep.y_log.values()[split.train.clone()];
    let actual = prep.clean.slice(split.test.start, split.test.end)?;

    let outcomes: Vec<Outcome> = candidates
        .par_iter()
        .map(|spec| {
            let spec = spec.clone().with_constraints(&options.constraints);
            match evaluate(&spec, &x_train, y_train, &x_test, &actual, split, options) {
                Ok((model, forecast, report)) => Outcome {
                    row: ComparisonRow {
                        model: spec.name.clone(),
                        set_length: split.label.clone(),
                        residual_order: model.residual_model().map(|f| f.order.to_string()),
                        status: RowStatus::Ok,
                        report: Some(report),
                    },
                    model: Some(model),
                    forecast: Some(forecast),
                },
                Err(e) => {
                    log::warn!("candidate {} failed: {e}", spec.name);
                    Outcome {
                        row: ComparisonRow {
                            model: spec.name.clone(),
                            set_length: split.label.clone(),
                            residual_order: None,
                            status: RowStatus::Failed(e.to_string()),
                            report: None,
                        },
                        model: None,
                        forecast: None,
                    }
                }
            }
        })
        .collect();

    let mut rows = Vec::with_capacity(outcomes.len());
    let mut models = Vec::with_capacity(outcomes.len());
    let mut forecasts = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        rows.push(o.row);
        models.push(o.model);
        forecasts.push(o.forecast);
    }
    let table = ComparisonTable::new(rows, &options.rule, seed, &prep.columns);
    Ok(FrameworkRun {
        table,
        preparation: prep,
        models,
        forecasts,
    })
}
