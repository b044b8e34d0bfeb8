use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(p,d,q)(P,D,Q)m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SarimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    #[serde(rename = "P")]
    pub sp: usize,
    #[serde(rename = "D")]
    pub sd: usize,
    #[serde(rename = "Q")]
    pub sq: usize,
    pub m: usize,
}

/// Guard on the number of ARMA coefficients.
pub const MAX_ARMA_TERMS: usize = 12;

impl SarimaOrder {
    pub fn new(p: usize, d: usize, q: usize, sp: usize, sd: usize, sq: usize, m: usize) -> Result<Self> {
        let o = Self { p, d, q, sp, sd, sq, m };
        o.validate()?;
        Ok(o)
    }

    pub fn arima(p: usize, d: usize, q: usize) -> Self {
        Self {
            p,
            d,
            q,
            sp: 0,
            sd: 0,
            sq: 0,
            m: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_seasonal() && self.m < 2 {
            return Err(Error::InvalidOrder(format!("{self}: seasonal terms need m >= 2")));
        }
        if self.m == 0 {
            return Err(Error::InvalidOrder("season length must be positive".into()));
        }
        if self.n_arma() > MAX_ARMA_TERMS {
            return Err(Error::InvalidOrder(format!(
                "{self}: p+q+P+Q must not exceed {MAX_ARMA_TERMS}"
            )));
        }
        Ok(())
    }

    pub fn is_seasonal(&self) -> bool {
        self.sp + self.sd + self.sq > 0
    }

    pub fn n_arma(&self) -> usize {
        self.p + self.q + self.sp + self.sq
    }

    /// Observations consumed by differencing.
    pub fn n_diff(&self) -> usize {
        self.d + self.sd * self.m
    }

    /// Highest lag of the expanded AR polynomial.
    pub fn ar_span(&self) -> usize {
        self.p + self.sp * self.m
    }

    pub fn ma_span(&self) -> usize {
        self.q + self.sq * self.m
    }

    /// A mean is estimated only for undifferenced models.
    pub fn has_mean(&self) -> bool {
        self.d + self.sd == 0
    }

    pub fn with_seasonal(self, sp: usize, sd: usize, sq: usize, m: usize) -> Self {
        Self { sp, sd, sq, m, ..self }
    }
}

impl fmt::Display for SarimaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)?;
        if self.is_seasonal() {
            write!(f, "({},{},{}){}", self.sp, self.sd, self.sq, self.m)?;
        }
        Ok(())
    }
}

fn triple(s: &str) -> std::result::Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated orders, got `{s}`"));
    }
    let mut out = [0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("bad order `{p}`"))?;
    }
    Ok(out)
}

impl FromStr for SarimaOrder {
    type Err = String;

    /// Parses `(p,d,q)` or `(p,d,q)(P,D,Q)m`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        let rest = s.strip_prefix('(').ok_or_else(|| format!("order must start with `(`: `{s}`"))?;
        let (first, rest) = rest.split_once(')').ok_or_else(|| format!("unclosed order `{s}`"))?;
        let [p, d, q] = triple(first)?;
        let mut order = SarimaOrder::arima(p, d, q);
        if !rest.is_empty() {
            let rest = rest
                .strip_prefix('(')
                .ok_or_else(|| format!("unexpected text after order: `{rest}`"))?;
            let (second, m) = rest.split_once(')').ok_or_else(|| format!("unclosed seasonal order `{s}`"))?;
            let [sp, sd, sq] = triple(second)?;
            let m: usize = m.trim().parse().map_err(|_| format!("bad season length `{m}`"))?;
            order = order.with_seasonal(sp, sd, sq, m);
        }
        order.validate().map_err(|e| e.to_string())?;
        Ok(order)
    }
}
