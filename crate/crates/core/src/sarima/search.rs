//! AICc order search: a stepwise walk over `(p, q)` followed by a small
//! exhaustive grid over the seasonal orders.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_sarima, SarimaFit, SarimaOrder};
use crate::diff::difference;
use crate::error::{Error, Result};
use crate::stats::variance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConstraints {
    pub max_p: usize,
    pub max_q: usize,
    pub max_d: usize,
    /// Fixed differencing order; chosen from the data when `None`.
    pub d: Option<usize>,
}

impl Default for SearchConstraints {
    fn default() -> Self {
        Self {
            max_p: 5,
            max_q: 5,
            max_d: 2,
            d: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub order: SarimaOrder,
    pub aicc: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub order: SarimaOrder,
    pub fit: SarimaFit,
    /// Every order evaluated, in evaluation order.
    pub candidates: Vec<Candidate>,
}

/// Smallest `d <= max_d` after which a further difference no longer cuts the
/// variance by more than 5%.
pub fn select_d(series: &[f64], max_d: usize) -> usize {
    let mut current = series.to_vec();
    for d in 0..max_d {
        let v = variance(&current);
        let Ok(next) = difference(&current, 1, 0, 1) else { return d };
        if !(v > 0.0) || variance(&next) > 0.95 * v {
            return d;
        }
        current = next;
    }
    max_d
}

/// Fits every order not yet in `cache`, concurrently, keeping insertion
/// order deterministic.
fn evaluate(
    series: &[f64],
    orders: &[SarimaOrder],
    cache: &mut BTreeMap<SarimaOrder, Option<SarimaFit>>,
    log: &mut Vec<Candidate>,
) {
    let mut todo: Vec<SarimaOrder> = Vec::new();
    for o in orders {
        if !cache.contains_key(o) && !todo.contains(o) {
            todo.push(*o);
        }
    }
    let fits: Vec<(SarimaOrder, Result<SarimaFit>)> =
        todo.par_iter().map(|o| (*o, fit_sarima(series, o))).collect();
    for (o, r) in fits {
        match r {
            Ok(f) if f.aicc.is_finite() => {
                log.push(Candidate {
                    order: o,
                    aicc: Some(f.aicc),
                    error: None,
                });
                cache.insert(o, Some(f));
            }
            Ok(f) => {
                log.push(Candidate {
                    order: o,
                    aicc: None,
                    error: Some(format!("non-finite AICc {}", f.aicc)),
                });
                cache.insert(o, None);
            }
            Err(e) => {
                log::warn!("SARIMA{o} failed: {e}");
                log.push(Candidate {
                    order: o,
                    aicc: None,
                    error: Some(e.to_string()),
                });
                cache.insert(o, None);
            }
        }
    }
}

fn best(cache: &BTreeMap<SarimaOrder, Option<SarimaFit>>) -> Option<(SarimaOrder, f64)> {
    // BTreeMap order breaks ties towards smaller orders
    cache
        .iter()
        .filter_map(|(o, f)| f.as_ref().map(|f| (*o, f.aicc)))
        .fold(None, |acc: Option<(SarimaOrder, f64)>, (o, a)| match acc {
            Some((_, b)) if b <= a => acc,
            _ => Some((o, a)),
        })
}

/// Greedy walk over `(p, q)` from `{(0,d,0), (1,d,1), (2,d,2), (0,d,5)}`,
/// moving to the best `p±1` / `q±1` neighbor while AICc improves.
pub fn stepwise_order_search(series: &[f64], constraints: &SearchConstraints) -> Result<SearchResult> {
    let d = constraints.d.unwrap_or_else(|| select_d(series, constraints.max_d));
    let ok = |p: usize, q: usize| p <= constraints.max_p && q <= constraints.max_q;
    let starts: Vec<SarimaOrder> = [(0, 0), (1, 1), (2, 2), (0, 5)]
        .into_iter()
        .filter(|&(p, q)| ok(p, q))
        .map(|(p, q)| SarimaOrder::arima(p, d, q))
        .collect();
    let mut cache = BTreeMap::new();
    let mut log = Vec::new();
    evaluate(series, &starts, &mut cache, &mut log);
    let mut current = best(&cache).ok_or(Error::NoSuccessfulCandidate)?;
    loop {
        let (p, q) = (current.0.p, current.0.q);
        let mut next = Vec::new();
        for (dp, dq) in [(1i32, 0i32), (-1, 0), (0, 1), (0, -1)] {
            let (np, nq) = (p as i32 + dp, q as i32 + dq);
            if np >= 0 && nq >= 0 && ok(np as usize, nq as usize) {
                next.push(SarimaOrder::arima(np as usize, d, nq as usize));
            }
        }
        evaluate(series, &next, &mut cache, &mut log);
        let candidate = best(&cache).ok_or(Error::NoSuccessfulCandidate)?;
        if candidate.0 == current.0 {
            break;
        }
        current = candidate;
    }
    let fit = cache.remove(&current.0).flatten().ok_or(Error::NoSuccessfulCandidate)?;
    Ok(SearchResult {
        order: current.0,
        fit,
        candidates: log,
    })
}

/// Exhaustive AICc search over `P, D, Q ∈ {0, 1}` holding `(p, d, q)`.
pub fn seasonal_order_grid(series: &[f64], base: &SarimaOrder, m: usize) -> Result<SearchResult> {
    let mut orders = Vec::new();
    for sp in 0..=1 {
        for sd in 0..=1 {
            for sq in 0..=1 {
                let o = base.with_seasonal(sp, sd, sq, m);
                if o.validate().is_ok() {
                    orders.push(o);
                }
            }
        }
    }
    let mut cache = BTreeMap::new();
    let mut log = Vec::new();
    evaluate(series, &orders, &mut cache, &mut log);
    let (order, _) = best(&cache).ok_or(Error::NoSuccessfulCandidate)?;
    let fit = cache.remove(&order).flatten().ok_or(Error::NoSuccessfulCandidate)?;
    Ok(SearchResult {
        order,
        fit,
        candidates: log,
    })
}

/// Stepwise non-seasonal search, then the seasonal grid when `m` is given.
pub fn fit_auto(series: &[f64], constraints: &SearchConstraints, m: Option<usize>) -> Result<SearchResult> {
    let base = stepwise_order_search(series, constraints)?;
    let Some(m) = m else { return Ok(base) };
    let mut seasonal = seasonal_order_grid(series, &base.order, m)?;
    let mut candidates = base.candidates;
    candidates.append(&mut seasonal.candidates);
    Ok(SearchResult {
        candidates,
        ..seasonal
    })
}
