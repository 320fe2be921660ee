//! Parsing of numeric grids given on the command line.

use callspace::{Error, Result};

/// `a:b:n` gives `n ≥ 2` equally spaced points from `a` to `b` inclusive;
/// `log:a:b:n` spaces them geometrically (requires `0 < a < b`).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::InvalidParameter(format!("grid '{spec}': {why}"));
    let (log, rest) = match spec.strip_prefix("log:") {
        Some(rest) => (true, rest),
        None => (false, spec),
    };
    let parts: Vec<&str> = rest.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected a:b:n or log:a:b:n"));
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad("start is not a number"))?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad("end is not a number"))?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad("count is not an integer"))?;
    if n < 2 {
        return Err(bad("need at least two points"));
    }
    if !a.is_finite() || !b.is_finite() || !(a < b) {
        return Err(bad("need finite a < b"));
    }
    let last = (n - 1) as f64;
    if log {
        if !(a > 0.0) {
            return Err(bad("log grids need a > 0"));
        }
        let (la, lb) = (a.ln(), b.ln());
        let mut pts: Vec<f64> = (0..n).map(|i| (la + (lb - la) * i as f64 / last).exp()).collect();
        pts[0] = a;
        pts[n - 1] = b;
        Ok(pts)
    } else {
        let mut pts: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / last).collect();
        pts[n - 1] = b;
        Ok(pts)
    }
}

/// A grid, or a comma-separated list of values (a single value is a list of one).
pub fn parse_points(spec: &str) -> Result<Vec<f64>> {
    if spec.contains(':') {
        return parse_grid(spec);
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("'{s}' is not a number")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_log_grids() {
        assert_eq!(parse_grid("0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = parse_grid("log:0.1:10:3").unwrap();
        assert_eq!(g[0], 0.1);
        assert!((g[1] - 1.0).abs() < 1e-15);
        assert_eq!(g[2], 10.0);
    }

    #[test]
    fn rejects_bad_grids() {
        for bad in ["0:1:1", "1:0:5", "log:0:1:5", "a:b:c", "0:1"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn point_lists() {
        assert_eq!(parse_points("0.25,0.5,1").unwrap(), vec![0.25, 0.5, 1.0]);
        assert_eq!(parse_points("2").unwrap(), vec![2.0]);
        assert_eq!(parse_points("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
    }
}
