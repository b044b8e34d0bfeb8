//! Two-stage hybrids: an exogenous regression fitted to log demand, then a
//! seasonal ARIMA fitted to that regression's residuals.
//!
//! Both stages live in log space. A forecast is the sum of the exogenous
//! prediction and the residual forecast, exponentiated once at the end. As the
//! residual forecast decays to its long-run level, long-horizon forecasts are
//! driven by the exogenous model.
//!
//! [`ModelSpec`] names every candidate the comparison harness knows about,
//! from plain `MLR` to `GAM1+SARIMA(5,1,1)(1,0,0)24`.

mod bundle;

pub use bundle::{ModelBundle, BUNDLE_FORMAT, BUNDLE_VERSION};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::gam::{fit_gam, predict_gam, GamConfig, GamFit};
use crate::linear::{fit_ols, OlsFit};
use crate::sarima::{fit_auto, fit_sarima, forecast_sarima, SarimaFit, SarimaOrder, SearchConstraints};
use crate::series::HourlyTimeSeries;

/// Season length used by the automatic seasonal search on hourly data.
pub const DAILY_PERIOD: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExogSpec {
    Ols,
    Gam { config: GamConfig },
}

/// Fitted first stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExogModel {
    Ols { fit: OlsFit },
    Gam { fit: GamFit },
}

impl ExogModel {
    /// GAM smooths naming columns absent from `x` (dropped by selection) are
    /// skipped, leaving those variables out of the model entirely.
    pub fn fit(spec: &ExogSpec, x: &FeatureMatrix, y: &[f64]) -> Result<Self> {
        match spec {
            ExogSpec::Ols => Ok(Self::Ols { fit: fit_ols(x, y)? }),
            ExogSpec::Gam { config } => {
                let config = config.restricted_to(&x.column_names());
                Ok(Self::Gam {
                    fit: fit_gam(x, y, &config)?,
                })
            }
        }
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        match self {
            Self::Ols { fit } => fit.predict(x),
            Self::Gam { fit } => predict_gam(fit, x),
        }
    }

    /// In-sample fitted values; empty on a deserialized model.
    pub fn fitted(&self) -> &[f64] {
        match self {
            Self::Ols { fit } => &fit.fitted,
            Self::Gam { fit } => &fit.fitted,
        }
    }

    pub fn residuals(&self) -> &[f64] {
        match self {
            Self::Ols { fit } => &fit.residuals,
            Self::Gam { fit } => &fit.residuals,
        }
    }

    /// Regressor count for adjusted R²: slopes for OLS, edf less the
    /// intercept for a GAM.
    pub fn n_regressors(&self) -> f64 {
        match self {
            Self::Ols { fit } => fit.betas.len() as f64,
            Self::Gam { fit } => fit.edf - 1.0,
        }
    }

    /// Feature columns the model reads at prediction time.
    pub fn columns(&self) -> Vec<String> {
        match self {
            Self::Ols { fit } => fit.column_names.clone(),
            Self::Gam { fit } => {
                let mut c = fit.linear_names.clone();
                c.extend(fit.smooths.iter().map(|s| s.column.clone()));
                c
            }
        }
    }
}

/// How the residual process is specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResidualSpec {
    Fixed {
        order: SarimaOrder,
    },
    /// Stepwise AICc search, plus the seasonal grid when a period is given.
    Search {
        constraints: SearchConstraints,
        seasonal_period: Option<usize>,
    },
}

impl ResidualSpec {
    pub fn fit(&self, series: &[f64]) -> Result<SarimaFit> {
        match self {
            Self::Fixed { order } => fit_sarima(series, order),
            Self::Search {
                constraints,
                seasonal_period,
            } => Ok(fit_auto(series, constraints, *seasonal_period)?.fit),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridModel {
    pub exog_model: ExogModel,
    /// Fitted to `exog_model.residuals()`.
    pub residual_model: SarimaFit,
    /// Both stages are fitted to log demand.
    pub log_scale: bool,
}

/// Stage 1 on `(x, y_log)`, stage 2 on `r = y_log - ŷ`.
pub fn fit_hybrid(x: &FeatureMatrix, y_log: &[f64], exog: &ExogSpec, residual: &ResidualSpec) -> Result<HybridModel> {
    let exog_model = ExogModel::fit(exog, x, y_log)?;
    let residual_model = residual.fit(exog_model.residuals())?;
    Ok(HybridModel {
        exog_model,
        residual_model,
        log_scale: true,
    })
}

impl HybridModel {
    /// In-sample log-scale residuals: the stage-2 innovations, and the raw
    /// stage-1 residuals before the residual model's conditional start.
    pub fn residuals(&self) -> Vec<f64> {
        let r = self.exog_model.residuals();
        let start = self.residual_model.conditional_start;
        r.iter()
            .zip(&self.residual_model.residuals)
            .enumerate()
            .map(|(t, (&raw, &e))| if t < start { raw } else { e })
            .collect()
    }

    pub fn n_regressors(&self) -> f64 {
        self.exog_model.n_regressors() + sarima_regressors(&self.residual_model)
    }
}

fn sarima_regressors(fit: &SarimaFit) -> f64 {
    (fit.order.n_arma() + usize::from(fit.order.has_mean())) as f64
}

/// Log-scale components of a forecast and the back-transformed result.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelForecast {
    pub exog_log: Vec<f64>,
    pub residual_log: Vec<f64>,
    pub log: Vec<f64>,
    pub kw: HourlyTimeSeries,
}

fn check_horizon(x: &FeatureMatrix, horizon: usize) -> Result<()> {
    if x.n_rows() != horizon {
        return Err(Error::LengthMismatch {
            expected: horizon,
            actual: x.n_rows(),
        });
    }
    if horizon == 0 {
        return Err(Error::InvalidInput("forecast horizon must be at least 1".into()));
    }
    Ok(())
}

fn assemble(x: &FeatureMatrix, exog_log: Vec<f64>, residual_log: Vec<f64>) -> Result<ModelForecast> {
    let log: Vec<f64> = exog_log.iter().zip(&residual_log).map(|(a, b)| a + b).collect();
    let kw: Vec<f64> = log.iter().map(|v| v.exp()).collect();
    if let Some(i) = kw.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Model(format!("forecast overflowed at step {}", i + 1)));
    }
    Ok(ModelForecast {
        exog_log,
        residual_log,
        log,
        kw: HourlyTimeSeries::new(x.start(), kw)?,
    })
}

pub fn forecast_hybrid(model: &HybridModel, x_future: &FeatureMatrix, horizon: usize) -> Result<ModelForecast> {
    check_horizon(x_future, horizon)?;
    let exog = model.exog_model.predict(x_future)?;
    let resid = forecast_sarima(&model.residual_model, horizon)?;
    assemble(x_future, exog, resid)
}

/// Residual-model family of a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualFamily {
    /// Non-seasonal search.
    Arima,
    /// Non-seasonal search followed by the daily seasonal grid.
    Sarima,
}

/// A named candidate: optional exogenous stage, optional residual stage.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub exog: Option<ExogSpec>,
    pub residual: Option<ResidualSpec>,
}

impl ModelSpec {
    /// The eight default candidate families.
    pub fn defaults() -> Vec<ModelSpec> {
        ["MLR", "GAM1", "GAM2", "SARIMA", "MLR+SARIMA", "GAM1+SARIMA", "GAM2+ARIMA", "GAM2+SARIMA"]
            .iter()
            .map(|s| s.parse().expect("default candidate names parse"))
            .collect()
    }

    pub fn with_constraints(mut self, constraints: &SearchConstraints) -> Self {
        if let Some(ResidualSpec::Search { constraints: c, .. }) = &mut self.residual {
            *c = constraints.clone();
        }
        self
    }

    pub fn is_hybrid(&self) -> bool {
        self.exog.is_some() && self.residual.is_some()
    }

    pub fn fit(&self, x: &FeatureMatrix, y_log: &[f64]) -> Result<FittedModel> {
        if x.n_rows() != y_log.len() {
            return Err(Error::LengthMismatch {
                expected: x.n_rows(),
                actual: y_log.len(),
            });
        }
        match (&self.exog, &self.residual) {
            (Some(e), Some(r)) => Ok(FittedModel::Hybrid {
                model: fit_hybrid(x, y_log, e, r)?,
            }),
            (Some(e), None) => Ok(FittedModel::Exog {
                model: ExogModel::fit(e, x, y_log)?,
            }),
            (None, Some(r)) => Ok(FittedModel::Sarima { fit: r.fit(y_log)? }),
            (None, None) => Err(Error::InvalidInput(format!("candidate `{}` has no model stage", self.name))),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn parse_residual(part: &str) -> std::result::Result<ResidualSpec, String> {
    let upper = part.to_ascii_uppercase();
    let (family, rest) = if let Some(rest) = upper.strip_prefix("SARIMA") {
        (ResidualFamily::Sarima, rest)
    } else if let Some(rest) = upper.strip_prefix("ARIMA") {
        (ResidualFamily::Arima, rest)
    } else {
        return Err(format!("unknown residual model `{part}`"));
    };
    if rest.is_empty() {
        return Ok(ResidualSpec::Search {
            constraints: SearchConstraints::default(),
            seasonal_period: match family {
                ResidualFamily::Sarima => Some(DAILY_PERIOD),
                ResidualFamily::Arima => None,
            },
        });
    }
    let order: SarimaOrder = rest.parse()?;
    if family == ResidualFamily::Arima && order.is_seasonal() {
        return Err(format!("`{part}`: ARIMA takes no seasonal order; use SARIMA"));
    }
    Ok(ResidualSpec::Fixed { order })
}

impl FromStr for ModelSpec {
    type Err = String;

    /// `MLR`, `GAM1`, `GAM2`, `ARIMA`, `SARIMA`, `SARIMAX` (= `MLR+SARIMA`),
    /// and `<exog>+<residual>` combinations; residual parts may carry a
    /// fixed order such as `SARIMA(5,1,1)(1,0,0)24`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let name: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if name.is_empty() {
            return Err("empty candidate name".into());
        }
        let canonical = if name.eq_ignore_ascii_case("SARIMAX") {
            "MLR+SARIMA".to_string()
        } else {
            name.clone()
        };
        let (head, tail) = match canonical.split_once('+') {
            Some((h, t)) => (h.to_string(), Some(t.to_string())),
            None => (canonical.clone(), None),
        };
        let exog = match head.to_ascii_uppercase().as_str() {
            "MLR" => Some(ExogSpec::Ols),
            "GAM1" => Some(ExogSpec::Gam { config: GamConfig::gam1() }),
            "GAM2" => Some(ExogSpec::Gam { config: GamConfig::gam2() }),
            _ => None,
        };
        let residual = match (&exog, tail) {
            (Some(_), Some(t)) => Some(parse_residual(&t)?),
            (Some(_), None) => None,
            (None, None) => Some(parse_residual(&head)?),
            (None, Some(_)) => return Err(format!("unknown exogenous model `{head}` in `{name}`")),
        };
        Ok(ModelSpec {
            name: name.to_ascii_uppercase().replace("SARIMAX", "MLR+SARIMA"),
            exog,
            residual,
        })
    }
}

/// Any fitted candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    Exog { model: ExogModel },
    Sarima { fit: SarimaFit },
    Hybrid { model: HybridModel },
}

impl FittedModel {
    /// In-sample log-scale residuals of a freshly fitted model. A SARIMA
    /// fitted directly to the series contributes raw (zero) residuals before
    /// its conditional start.
    pub fn residuals(&self) -> Vec<f64> {
        match self {
            Self::Exog { model } => model.residuals().to_vec(),
            Self::Sarima { fit } => fit.residuals.clone(),
            Self::Hybrid { model } => model.residuals(),
        }
    }

    pub fn n_regressors(&self) -> f64 {
        match self {
            Self::Exog { model } => model.n_regressors(),
            Self::Sarima { fit } => sarima_regressors(fit),
            Self::Hybrid { model } => model.n_regressors(),
        }
    }

    /// Feature columns needed at forecast time; empty for pure SARIMA.
    pub fn columns(&self) -> Vec<String> {
        match self {
            Self::Exog { model } => model.columns(),
            Self::Sarima { .. } => Vec::new(),
            Self::Hybrid { model } => model.exog_model.columns(),
        }
    }

    pub fn residual_model(&self) -> Option<&SarimaFit> {
        match self {
            Self::Exog { .. } => None,
            Self::Sarima { fit } => Some(fit),
            Self::Hybrid { model } => Some(&model.residual_model),
        }
    }

    /// Forecasts the `x_future.n_rows()` hours following the training data.
    pub fn forecast(&self, x_future: &FeatureMatrix) -> Result<ModelForecast> {
        let horizon = x_future.n_rows();
        check_horizon(x_future, horizon)?;
        match self {
            Self::Exog { model } => assemble(x_future, model.predict(x_future)?, vec![0.0; horizon]),
            Self::Sarima { fit } => assemble(x_future, vec![0.0; horizon], forecast_sarima(fit, horizon)?),
            Self::Hybrid { model } => forecast_hybrid(model, x_future, horizon),
        }
    }
}
