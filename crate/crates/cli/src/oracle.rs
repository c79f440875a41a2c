//! Brute-force trend statistics over a plain series.
//!
//! Everything here is computed straight from the definitions, in plain f64,
//! with no code shared with the engine's trend module. The point is to have
//! a second, independently written answer to check the engine against, both
//! from tests and from the command line.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n: usize,
    pub s: i64,
    pub var_s: f64,
    pub z: f64,
    pub sen_slope: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("line {line}: {value:?} is not a number")]
    Malformed { line: usize, value: String },
    #[error("line {line}: value is not finite")]
    NonFinite { line: usize },
    #[error("need at least 2 values, got {have}")]
    SeriesTooShort { have: usize },
}

/// Parse a series file: numbers separated by newlines, spaces, tabs, or
/// commas; everything after '#' on a line is a comment.
pub fn parse_series(text: &str) -> Result<Vec<f64>, OracleError> {
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        for token in line.split([',', ' ', '\t']).filter(|t| !t.is_empty()) {
            let x: f64 = token.parse().map_err(|_| OracleError::Malformed {
                line: i + 1,
                value: token.to_string(),
            })?;
            if !x.is_finite() {
                return Err(OracleError::NonFinite { line: i + 1 });
            }
            values.push(x);
        }
    }
    Ok(values)
}

/// Mann-Kendall S, tie-corrected variance, continuity-corrected Z, and the
/// all-pairs median slope, all by direct enumeration over unit-spaced
/// observations.
pub fn brute_force_trend(values: &[f64]) -> Result<OracleReport, OracleError> {
    let n = values.len();
    if n < 2 {
        return Err(OracleError::SeriesTooShort { have: n });
    }

    let mut s: i64 = 0;
    let mut slopes = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            if values[j] > values[i] {
                s += 1;
            } else if values[j] < values[i] {
                s -= 1;
            }
            slopes.push((values[j] - values[i]) / (j - i) as f64);
        }
    }

    let mut var_s = (n * (n - 1) * (2 * n + 5)) as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && sorted[j] == sorted[i] {
            j += 1;
        }
        let ties = j - i;
        if ties > 1 {
            var_s -= (ties * (ties - 1) * (2 * ties + 5)) as f64;
        }
        i = j;
    }
    var_s /= 18.0;

    let z = if var_s > 0.0 {
        match s.cmp(&0) {
            std::cmp::Ordering::Greater => (s as f64 - 1.0) / var_s.sqrt(),
            std::cmp::Ordering::Less => (s as f64 + 1.0) / var_s.sqrt(),
            std::cmp::Ordering::Equal => 0.0,
        }
    } else {
        0.0
    };

    slopes.sort_by(f64::total_cmp);
    let m = slopes.len();
    let sen_slope = if m % 2 == 1 {
        slopes[m / 2]
    } else {
        (slopes[m / 2 - 1] + slopes[m / 2]) / 2.0
    };

    Ok(OracleReport {
        n,
        s,
        var_s,
        z,
        sen_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use lookout_core::{mann_kendall_z, sen_slope, LambdaSeries};

    #[test]
    fn monotone_ramp() {
        let r = brute_force_trend(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.s, 3);
        assert_eq!(r.var_s, 66.0 / 18.0);
        assert_eq!(r.z, 2.0 / (66.0f64 / 18.0).sqrt());
        assert_eq!(r.sen_slope, 1.0);
    }

    #[test]
    fn tie_group_shrinks_the_variance() {
        let r = brute_force_trend(&[1.0, 2.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.s, 5);
        assert_eq!(r.var_s, 138.0 / 18.0);
        assert_eq!(r.sen_slope, (0.5 + 2.0 / 3.0) / 2.0);
    }

    #[test]
    fn short_series_is_rejected() {
        assert_eq!(
            brute_force_trend(&[1.0]).unwrap_err(),
            OracleError::SeriesTooShort { have: 1 }
        );
    }

    #[test]
    fn agrees_with_the_engine_on_a_mixed_series() {
        let values = [
            0.42, 0.17, 0.17, 0.88, 0.35, 0.91, 0.91, 0.91, 0.05, 0.63, 0.63, 0.29, 0.74, 0.5,
        ];
        let r = brute_force_trend(&values).unwrap();
        let times: Vec<f64> = (1..=values.len()).map(|i| i as f64).collect();
        let series = LambdaSeries::new(values.to_vec(), times).unwrap();
        let mk = mann_kendall_z(&series, 0.05).unwrap();
        assert_eq!(r.s, mk.s);
        assert_abs_diff_eq!(r.var_s, mk.var_s, epsilon = 1e-9);
        assert_abs_diff_eq!(r.z, mk.z, epsilon = 1e-9);
        assert_abs_diff_eq!(r.sen_slope, sen_slope(&series).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn series_parsing_handles_separators_and_comments() {
        let text = "1.0, 2.0\n# full comment line\n3.0\t4.0 5e-1 # trailing\n\n";
        assert_eq!(parse_series(text).unwrap(), vec![1.0, 2.0, 3.0, 4.0, 0.5]);
    }

    #[test]
    fn series_parsing_reports_the_offending_line() {
        let err = parse_series("1.0\n2.0\nbogus\n").unwrap_err();
        assert_eq!(
            err,
            OracleError::Malformed {
                line: 3,
                value: "bogus".into()
            }
        );
        let err = parse_series("1.0\ninf\n").unwrap_err();
        assert_eq!(err, OracleError::NonFinite { line: 2 });
    }
}
