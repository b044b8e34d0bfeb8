//! Run configuration: a sectioned `key = value` file, overridden by flags.
//!
//! ```text
//! [data]
//! demand = demand.csv
//! weather = weather.csv
//! occupancy = occupancy.csv
//! calendar = calendar.txt
//! future = future_exog.csv
//! model = results/model.json
//!
//! [split]
//! train_years = 1
//! test_years = 2          # or: train_fraction = 0.9
//!
//! [features]
//! include_humidity = true
//! building_area = 2019:1.2e6, 2020:1.25e6
//! annual_energy_kbtu = 2019:9.1e7
//!
//! [lasso]
//! enabled = true
//! folds = 10
//! grid_size = 100
//! grid_ratio = 1e-4
//! lambdas = 0.1, 0.01     # explicit grid instead of the automatic one
//! rule = one_se           # or: min
//!
//! [models]
//! candidates = MLR, GAM1, GAM2+SARIMA, GAM1+SARIMA(5,1,1)(1,0,0)24
//! forecast_model = GAM1+SARIMA
//! gam_basis_dim = 10
//! max_p = 5
//! max_q = 5
//! max_d = 2
//! d = 0
//!
//! [output]
//! dir = results
//! threshold_kw = 5000
//! svg = true
//!
//! [run]
//! seed = 42
//! log_level = info
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use loadcast::evaluation::{FrameworkOptions, SplitSpec};
use loadcast::gam::GamConfig;
use loadcast::hybrid::{ExogSpec, ModelSpec};
use loadcast::kv::KvFile;
use loadcast::linear::{CvOptions, LambdaGrid, LambdaRule};
use loadcast::sarima::SearchConstraints;

use crate::error::{usage, CliResult};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUT_DIR: &str = "loadcast-out";

#[derive(Debug, Clone, PartialEq)]
pub enum SplitChoice {
    /// Test runs to the end of the data when `test_years` is `None`.
    Years { train: u32, test: Option<u32> },
    Fraction(f64),
}

impl SplitChoice {
    pub fn resolve(&self, start: NaiveDateTime, available: usize) -> CliResult<SplitSpec> {
        match *self {
            SplitChoice::Years { train, test: Some(test) } => Ok(SplitSpec::by_years(start, train, test, available)?),
            SplitChoice::Years { train, test: None } => {
                let end = start
                    .checked_add_months(chrono::Months::new(12 * train))
                    .ok_or_else(|| usage("training span out of range"))?;
                let cut = (end - start).num_hours() as usize;
                if cut >= available {
                    return Err(usage(format!(
                        "{train}y of training needs more than the {available} hours of demand data"
                    )));
                }
                Ok(SplitSpec::new(0..cut, cut..available, &format!("{train}y-train/{}h-test", available - cut))?)
            }
            SplitChoice::Fraction(f) => Ok(SplitSpec::by_fraction(available, f)?),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub demand: Option<PathBuf>,
    pub weather: Option<PathBuf>,
    pub occupancy: Option<PathBuf>,
    pub calendar: Option<PathBuf>,
    pub future: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub split: SplitChoice,
    pub include_humidity: bool,
    pub building_area: BTreeMap<i32, f64>,
    pub annual_energy_kbtu: BTreeMap<i32, f64>,
    pub lasso_selection: bool,
    pub cv: CvOptions,
    pub candidates: Vec<ModelSpec>,
    pub forecast_model: Option<ModelSpec>,
    pub gam_basis_dim: Option<usize>,
    pub constraints: SearchConstraints,
    pub threshold_kw: Option<f64>,
    pub svg: bool,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub log_level: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            demand: None,
            weather: None,
            occupancy: None,
            calendar: None,
            future: None,
            model: None,
            split: SplitChoice::Years { train: 1, test: None },
            include_humidity: true,
            building_area: BTreeMap::new(),
            annual_energy_kbtu: BTreeMap::new(),
            lasso_selection: true,
            cv: CvOptions::default(),
            candidates: ModelSpec::defaults(),
            forecast_model: None,
            gam_basis_dim: None,
            constraints: SearchConstraints::default(),
            threshold_kw: None,
            svg: false,
            seed: DEFAULT_SEED,
            out_dir: PathBuf::from(DEFAULT_OUT_DIR),
            log_level: "info".into(),
        }
    }
}

/// Splits on commas outside parentheses, so fixed orders such as
/// `SARIMA(1,0,1)(1,0,0)24` stay whole.
pub fn split_candidates(list: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in list.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    out.push(cur);
    out.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

pub fn parse_candidates(list: &str) -> CliResult<Vec<ModelSpec>> {
    let names = split_candidates(list);
    if names.is_empty() {
        return Err(usage("candidate list is empty"));
    }
    names
        .iter()
        .map(|n| n.parse::<ModelSpec>().map_err(|e| usage(format!("bad candidate `{n}`: {e}"))))
        .collect()
}

/// `year:value` pairs separated by commas.
fn parse_yearly(kv: &KvFile, key: &str) -> CliResult<BTreeMap<i32, f64>> {
    let Some(entry) = kv.get(Some("features"), key) else {
        return Ok(BTreeMap::new());
    };
    let bad = |item: &str| usage(format!("{}: bad `year:value` item `{item}` for `{key}`", kv.location(entry)));
    entry
        .value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (y, v) = item.split_once(':').ok_or_else(|| bad(item))?;
            Ok((y.trim().parse().map_err(|_| bad(item))?, v.trim().parse().map_err(|_| bad(item))?))
        })
        .collect()
}

fn parse_bool(kv: &KvFile, section: &str, key: &str) -> CliResult<Option<bool>> {
    let Some(e) = kv.get(Some(section), key) else { return Ok(None) };
    match e.value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(Some(true)),
        "false" | "no" | "0" | "off" => Ok(Some(false)),
        other => Err(usage(format!("{}: expected a boolean for `{key}`, got `{other}`", kv.location(e)))),
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let kv = KvFile::read(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_kv(&kv, &base)
    }

    pub fn from_kv(kv: &KvFile, base: &Path) -> CliResult<Self> {
        let mut c = Self::default();
        let path = |key: &str| kv.get(Some("data"), key).map(|e| base.join(&e.value));
        c.demand = path("demand");
        c.weather = path("weather");
        c.occupancy = path("occupancy");
        c.calendar = path("calendar");
        c.future = path("future");
        c.model = path("model");

        let train_years: Option<u32> = kv.get_parsed(Some("split"), "train_years")?;
        let test_years: Option<u32> = kv.get_parsed(Some("split"), "test_years")?;
        let fraction: Option<f64> = kv.get_parsed(Some("split"), "train_fraction")?;
        c.split = match (fraction, train_years, test_years) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(usage("give either train_fraction or train_years/test_years, not both"))
            }
            (Some(f), None, None) => SplitChoice::Fraction(f),
            (None, t, test) => SplitChoice::Years {
                train: t.unwrap_or(1),
                test,
            },
        };

        if let Some(b) = parse_bool(kv, "features", "include_humidity")? {
            c.include_humidity = b;
        }
        c.building_area = parse_yearly(kv, "building_area")?;
        c.annual_energy_kbtu = parse_yearly(kv, "annual_energy_kbtu")?;

        if let Some(b) = parse_bool(kv, "lasso", "enabled")? {
            c.lasso_selection = b;
        }
        if let Some(k) = kv.get_parsed(Some("lasso"), "folds")? {
            c.cv.folds = k;
        }
        if let Some(l) = kv.get_list(Some("lasso"), "lambdas")? {
            c.cv.grid = LambdaGrid::Explicit(l);
        } else {
            let (count, ratio) = match c.cv.grid {
                LambdaGrid::Auto { count, ratio } => (count, ratio),
                LambdaGrid::Explicit(_) => unreachable!("default grid is automatic"),
            };
            c.cv.grid = LambdaGrid::Auto {
                count: kv.get_parsed(Some("lasso"), "grid_size")?.unwrap_or(count),
                ratio: kv.get_parsed(Some("lasso"), "grid_ratio")?.unwrap_or(ratio),
            };
        }
        if let Some(e) = kv.get(Some("lasso"), "rule") {
            c.cv.rule = match e.value.as_str() {
                "one_se" | "1se" => LambdaRule::OneStandardError,
                "min" => LambdaRule::MinMse,
                other => return Err(usage(format!("{}: unknown LASSO rule `{other}`", kv.location(e)))),
            };
        }

        if let Some(e) = kv.get(Some("models"), "candidates") {
            c.candidates = parse_candidates(&e.value)?;
        }
        if let Some(e) = kv.get(Some("models"), "forecast_model") {
            c.forecast_model = Some(e.value.parse().map_err(|m| usage(format!("{}: {m}", kv.location(e))))?);
        }
        c.gam_basis_dim = kv.get_parsed(Some("models"), "gam_basis_dim")?;
        let sc = &mut c.constraints;
        sc.max_p = kv.get_parsed(Some("models"), "max_p")?.unwrap_or(sc.max_p);
        sc.max_q = kv.get_parsed(Some("models"), "max_q")?.unwrap_or(sc.max_q);
        sc.max_d = kv.get_parsed(Some("models"), "max_d")?.unwrap_or(sc.max_d);
        sc.d = kv.get_parsed(Some("models"), "d")?;

        if let Some(e) = kv.get(Some("output"), "dir") {
            c.out_dir = base.join(&e.value);
        }
        c.threshold_kw = kv.get_parsed(Some("output"), "threshold_kw")?;
        if let Some(b) = parse_bool(kv, "output", "svg")? {
            c.svg = b;
        }
        if let Some(s) = kv.get_parsed(Some("run"), "seed")? {
            c.seed = s;
        }
        if let Some(e) = kv.get(Some("run"), "log_level") {
            c.log_level = e.value.clone();
        }
        Ok(c)
    }

    pub fn framework_options(&self) -> FrameworkOptions {
        FrameworkOptions {
            cv: self.cv.clone(),
            constraints: self.constraints.clone(),
            threshold_kw: self.threshold_kw,
            lasso_selection: self.lasso_selection,
            ..FrameworkOptions::default()
        }
    }

    /// Candidate with the configured GAM basis dimension applied.
    pub fn prepared(&self, spec: &ModelSpec) -> ModelSpec {
        let mut spec = spec.clone();
        if let (Some(k), Some(ExogSpec::Gam { config })) = (self.gam_basis_dim, spec.exog.as_mut()) {
            *config = GamConfig {
                smooth_terms: config
                    .smooth_terms
                    .iter()
                    .map(|t| loadcast::gam::SmoothSpec {
                        basis_dim: k,
                        ..t.clone()
                    })
                    .collect(),
            };
        }
        spec
    }

    /// The path configured under `key`, which must exist.
    pub fn require<'a>(&self, path: &'a Option<PathBuf>, key: &str) -> CliResult<&'a Path> {
        let p = path
            .as_deref()
            .ok_or_else(|| usage(format!("no `{key}` file configured (set it under [data] or pass a flag)")))?;
        if !p.exists() {
            return Err(usage(format!("{key} file {} does not exist", p.display())));
        }
        Ok(p)
    }
}
