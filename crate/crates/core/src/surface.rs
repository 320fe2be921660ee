//! Time changes `t ↦ Y(t)` and implied-volatility surfaces
//! `(κ, t) ↦ Y_BS(κ, C_f(κ, Y(t))) / √t`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::blackscholes::ybs;
use crate::density::LogConcaveDensity;
use crate::error::{Error, Result};

/// A nondecreasing map from time to total standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeChange {
    /// `ln(1 + t)`.
    Log1p,
    /// `σ√t`.
    SigmaSqrt(f64),
    /// `a·t`.
    Linear(f64),
    /// Linear interpolation through `(ts[i], ys[i])`, constant outside.
    Piecewise { ts: Vec<f64>, ys: Vec<f64> },
}

impl TimeChange {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeChange::Log1p => t.ln_1p(),
            TimeChange::SigmaSqrt(s) => s * t.max(0.0).sqrt(),
            TimeChange::Linear(a) => a * t,
            TimeChange::Piecewise { ts, ys } => {
                if t <= ts[0] {
                    return ys[0];
                }
                let n = ts.len();
                if t >= ts[n - 1] {
                    return ys[n - 1];
                }
                let i = ts.partition_point(|&x| x <= t) - 1;
                let w = (t - ts[i]) / (ts[i + 1] - ts[i]);
                ys[i] + w * (ys[i + 1] - ys[i])
            }
        }
    }

    pub fn piecewise(ts: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if ts.is_empty() || ts.len() != ys.len() || ts.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("piecewise time change needs increasing ts matching ys".into()));
        }
        Ok(TimeChange::Piecewise { ts, ys })
    }
}

impl FromStr for TimeChange {
    type Err = Error;

    /// Accepts `log1p`, `sqrt:<σ>` and `linear:<a>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unrecognised time change '{s}'"));
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad());
        match s.split_once(':') {
            None if s == "log1p" => Ok(TimeChange::Log1p),
            Some(("sqrt", v)) => Ok(TimeChange::SigmaSqrt(num(v)?)),
            Some(("linear", v)) => Ok(TimeChange::Linear(num(v)?)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for TimeChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeChange::Log1p => write!(f, "log1p"),
            TimeChange::SigmaSqrt(s) => write!(f, "sqrt:{s}"),
            TimeChange::Linear(a) => write!(f, "linear:{a}"),
            TimeChange::Piecewise { ts, .. } => write!(f, "piecewise({} knots)", ts.len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceRow {
    pub kappa: f64,
    pub t: f64,
    pub price: f64,
    pub implied_vol: f64,
}

/// Prices and implied volatilities on the product grid, ordered by `t` then `κ`.
pub fn implied_vol_surface(
    density: &LogConcaveDensity,
    y: &TimeChange,
    kappas: &[f64],
    ts: &[f64],
) -> Result<Vec<SurfaceRow>> {
    let cells: Vec<(f64, f64)> = ts.iter().flat_map(|&t| kappas.iter().map(move |&k| (k, t))).collect();
    cells
        .par_iter()
        .map(|&(kappa, t)| {
            let yt = y.eval(t);
            if yt < 0.0 {
                return Err(Error::InvalidParameter(format!("Y({t}) = {yt} is negative")));
            }
            let price = density.surface_price(kappa, yt)?;
            let implied_vol = if yt == 0.0 {
                0.0
            } else if kappa <= 0.0 {
                f64::INFINITY
            } else {
                ybs(kappa, price)? / t.sqrt()
            };
            Ok(SurfaceRow { kappa, t, price, implied_vol })
        })
        .collect()
}
