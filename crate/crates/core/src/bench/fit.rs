//! Six-model regression and scaling-exponent estimates.

use serde::Serialize;

use crate::error::{Error, Result};

pub const NLS_RELATIVE_STEP: f64 = 1e-9;
pub const NLS_MAX_ITERATIONS: usize = 200;

/// Model forms, listed from fewest to most parameters; this order also
/// breaks R² ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Model {
    Constant,
    Logarithmic,
    Linear,
    Linearithmic,
    Quadratic,
    Power,
}

impl Model {
    pub const ALL: [Model; 6] = [
        Model::Power,
        Model::Quadratic,
        Model::Linearithmic,
        Model::Linear,
        Model::Logarithmic,
        Model::Constant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Model::Power => "Power",
            Model::Quadratic => "Quadratic",
            Model::Linearithmic => "Linearithmic",
            Model::Linear => "Linear",
            Model::Logarithmic => "Logarithmic",
            Model::Constant => "Constant",
        }
    }

    /// Basis function of the one-parameter forms `a·f(n)`.
    fn basis(self, n: f64) -> f64 {
        match self {
            Model::Quadratic => n * n,
            Model::Linearithmic => n * n.ln(),
            Model::Linear => n,
            Model::Logarithmic => n.ln(),
            Model::Constant => 1.0,
            Model::Power => unreachable!("two-parameter form"),
        }
    }

    pub fn evaluate(self, coeffs: &[f64], n: f64) -> f64 {
        match self {
            Model::Power => coeffs[0] * n.powf(coeffs[1]),
            other => coeffs[0] * other.basis(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelFit {
    pub name: &'static str,
    #[serde(skip)]
    pub model: Model,
    pub coeffs: Vec<f64>,
    pub rmse: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub models: Vec<ModelFit>,
    pub best: &'static str,
    /// Models that could not be fit, with the reason.
    pub rejected: Vec<(String, String)>,
}

impl FitReport {
    pub fn get(&self, model: Model) -> Option<&ModelFit> {
        self.models.iter().find(|m| m.model == model)
    }
}

fn check_series(series: &[(f64, f64)], min_points: usize) -> Result<()> {
    if series.len() < min_points {
        return Err(Error::Fit(format!(
            "need at least {min_points} points, got {}",
            series.len()
        )));
    }
    if series
        .iter()
        .any(|&(n, y)| !n.is_finite() || !y.is_finite() || n <= 0.0)
    {
        return Err(Error::Fit("sizes must be positive and values finite".into()));
    }
    Ok(())
}

/// Least-squares line `y = c + m·x`; returns (c, m).
fn line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let m = sxy / sxx;
    (my - m * mx, m)
}

fn goodness(model: Model, coeffs: &[f64], series: &[(f64, f64)]) -> (f64, f64) {
    let n = series.len() as f64;
    let mean = series.iter().map(|p| p.1).sum::<f64>() / n;
    let ss_res: f64 = series
        .iter()
        .map(|&(x, y)| (y - model.evaluate(coeffs, x)).powi(2))
        .sum();
    let ss_tot: f64 = series.iter().map(|&(_, y)| (y - mean).powi(2)).sum();
    let rmse = (ss_res / n).sqrt();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res <= f64::EPSILON * series.iter().map(|p| p.1 * p.1).sum::<f64>() {
        // A flat series has no variance to explain; an exact fit scores 0.
        0.0
    } else {
        -ss_res / series.iter().map(|p| p.1 * p.1).sum::<f64>()
    };
    (rmse, r2)
}

pub fn fit_models(series: &[(f64, f64)]) -> Result<FitReport> {
    check_series(series, 4)?;
    let mut sizes: Vec<f64> = series.iter().map(|p| p.0).collect();
    sizes.sort_by(f64::total_cmp);
    sizes.dedup();
    if sizes.len() < 4 {
        return Err(Error::Fit("need at least 4 distinct sizes".into()));
    }
    let positive = series.iter().all(|p| p.1 > 0.0);
    let mut models = Vec::new();
    let mut rejected = Vec::new();
    for model in Model::ALL {
        if !positive && matches!(model, Model::Power | Model::Logarithmic) {
            rejected.push((model.name().to_string(), "non-positive values".to_string()));
            continue;
        }
        let coeffs = match model {
            Model::Power => {
                let xs: Vec<f64> = series.iter().map(|p| p.0.ln()).collect();
                let ys: Vec<f64> = series.iter().map(|p| p.1.ln()).collect();
                let (c, m) = line(&xs, &ys);
                vec![c.exp(), m]
            }
            other => {
                let sfy: f64 = series.iter().map(|&(n, y)| other.basis(n) * y).sum();
                let sff: f64 = series.iter().map(|&(n, _)| other.basis(n).powi(2)).sum();
                if sff == 0.0 {
                    rejected.push((model.name().to_string(), "degenerate basis".to_string()));
                    continue;
                }
                vec![sfy / sff]
            }
        };
        let (rmse, r2) = goodness(model, &coeffs, series);
        models.push(ModelFit {
            name: model.name(),
            model,
            coeffs,
            rmse,
            r2,
        });
    }
    let best = models
        .iter()
        .fold(None::<&ModelFit>, |best, m| match best {
            None => Some(m),
            Some(b) if m.r2 > b.r2 + 1e-12 => Some(m),
            Some(b) if (m.r2 - b.r2).abs() <= 1e-12 && m.model < b.model => Some(m),
            Some(b) => Some(b),
        })
        .map(|m| m.name)
        .ok_or_else(|| Error::Fit("no model could be fit".into()))?;
    Ok(FitReport { models, best, rejected })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentReport {
    pub polyfit: f64,
    /// `None` when the nonlinear fit was rejected or failed.
    pub nls: Option<f64>,
    pub local: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nls_error: Option<String>,
}

pub fn estimate_exponents(series: &[(f64, f64)]) -> Result<ExponentReport> {
    check_series(series, 2)?;
    if series.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Fit("sizes must be strictly increasing".into()));
    }
    if series.iter().any(|p| p.1 <= 0.0) {
        return Err(Error::Fit("values must be positive".into()));
    }
    let xs: Vec<f64> = series.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = series.iter().map(|p| p.1.ln()).collect();
    let (c, polyfit) = line(&xs, &ys);
    let slopes: Vec<f64> = (1..series.len())
        .map(|i| (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]))
        .collect();
    let local = crate::stats::median(&slopes);
    let (nls, nls_error) = if series.len() < 3 {
        (None, Some("nonlinear fit needs at least 3 points".to_string()))
    } else {
        match power_nls(series, c, polyfit) {
            Ok(b) => (Some(b), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    Ok(ExponentReport {
        polyfit,
        nls,
        local,
        nls_error,
    })
}

/// Levenberg-Marquardt fit of `y = exp(θ₀)·n^θ₁` in the original scale,
/// started from the log-log line. Stops when an accepted step is smaller
/// than `NLS_RELATIVE_STEP` relative to θ, or after `NLS_MAX_ITERATIONS`.
fn power_nls(series: &[(f64, f64)], log_a: f64, b: f64) -> Result<f64> {
    let sse = |t: [f64; 2]| -> f64 {
        series
            .iter()
            .map(|&(n, y)| (y - (t[0] + t[1] * n.ln()).exp()).powi(2))
            .sum()
    };
    let mut theta = [log_a, b];
    let mut current = sse(theta);
    let mut mu = 1e-3;
    for _ in 0..NLS_MAX_ITERATIONS {
        if current == 0.0 {
            break;
        }
        // Normal equations J^T J and J^T r.
        let (mut a00, mut a01, mut a11, mut g0, mut g1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(n, y) in series {
            let f = (theta[0] + theta[1] * n.ln()).exp();
            let (j0, j1) = (f, f * n.ln());
            let r = y - f;
            a00 += j0 * j0;
            a01 += j0 * j1;
            a11 += j1 * j1;
            g0 += j0 * r;
            g1 += j1 * r;
        }
        let mut accepted = false;
        while mu < 1e20 {
            let (d00, d11) = (a00 * (1.0 + mu), a11 * (1.0 + mu));
            let det = d00 * d11 - a01 * a01;
            if det == 0.0 || !det.is_finite() {
                mu *= 10.0;
                continue;
            }
            let step = [(g0 * d11 - g1 * a01) / det, (d00 * g1 - a01 * g0) / det];
            let trial = [theta[0] + step[0], theta[1] + step[1]];
            let value = sse(trial);
            if value.is_finite() && value <= current {
                let size = (step[0] * step[0] + step[1] * step[1]).sqrt();
                let scale = (theta[0] * theta[0] + theta[1] * theta[1]).sqrt().max(1e-12);
                theta = trial;
                current = value;
                mu = (mu / 10.0).max(1e-12);
                accepted = true;
                if size / scale < NLS_RELATIVE_STEP {
                    return Ok(theta[1]);
                }
                break;
            }
            mu *= 10.0;
        }
        if !accepted {
            // No descent direction left: the current point is a minimum.
            break;
        }
    }
    if theta[1].is_finite() {
        Ok(theta[1])
    } else {
        Err(Error::Fit("nonlinear fit diverged".into()))
    }
}

/// Parse a two-column series (`size value` per line, whitespace or comma
/// separated; `#` comments and a non-numeric header line are skipped).
pub fn parse_series(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let parsed: Option<(f64, f64)> = match fields.as_slice() {
            [n, y] => n.parse().ok().zip(y.parse().ok()),
            _ => None,
        };
        match parsed {
            Some(p) => out.push(p),
            None if out.is_empty() && i == 0 => continue,
            None => return Err(Error::Parse(format!("line {}: expected two numbers", i + 1))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(a: f64, b: f64) -> Vec<(f64, f64)> {
        [500.0, 1000.0, 2000.0, 4000.0, 8000.0]
            .iter()
            .map(|&n| (n, a * f64::powf(n, b)))
            .collect()
    }

    #[test]
    fn exact_quadratic() {
        let series: Vec<_> = [10.0, 20.0, 40.0, 80.0].iter().map(|&n| (n, 3.0 * n * n)).collect();
        let report = fit_models(&series).unwrap();
        let q = report.get(Model::Quadratic).unwrap();
        assert!((q.coeffs[0] - 3.0).abs() < 1e-12);
        assert!((q.r2 - 1.0).abs() < 1e-12);
        assert!((report.get(Model::Power).unwrap().coeffs[1] - 2.0).abs() < 1e-6);
        assert_eq!(report.best, "Quadratic");
    }

    #[test]
    fn constant_series() {
        let series: Vec<_> = [1.0, 2.0, 3.0, 4.0].iter().map(|&n| (n, 7.0)).collect();
        let report = fit_models(&series).unwrap();
        let c = report.get(Model::Constant).unwrap();
        assert_eq!(c.coeffs, vec![7.0]);
        assert_eq!(c.r2, 0.0);
        assert_eq!(report.best, "Constant");
    }

    #[test]
    fn r2_ordering_on_cubic_data() {
        let report = fit_models(&synthetic(2.0, 3.0)).unwrap();
        let r2 = |m| report.get(m).unwrap().r2;
        assert!(r2(Model::Power) >= r2(Model::Quadratic));
        assert!(r2(Model::Quadratic) > r2(Model::Linear));
        assert!(r2(Model::Linear) > r2(Model::Logarithmic));
        assert!(r2(Model::Logarithmic) > r2(Model::Constant));
        assert_eq!(report.best, "Power");
    }

    #[test]
    fn power_recovery() {
        for b in [1.0, 1.05, 2.0, 3.01] {
            let report = fit_models(&synthetic(4.29e-10, b)).unwrap();
            let p = report.get(Model::Power).unwrap();
            assert!((p.coeffs[1] - b).abs() < 1e-6);
            assert!((p.coeffs[0] / 4.29e-10 - 1.0).abs() < 5e-4);
            let e = estimate_exponents(&synthetic(4.29e-10, b)).unwrap();
            for v in [e.polyfit, e.nls.unwrap(), e.local] {
                assert!((v - b).abs() < 0.01, "{e:?}");
            }
        }
    }

    #[test]
    fn noisy_series_nls_converges() {
        let noise = [1.2, 0.8, 1.1, 0.9, 1.3];
        let series: Vec<_> = synthetic(1e-6, 2.5)
            .iter()
            .zip(noise)
            .map(|(&(n, y), k)| (n, y * k))
            .collect();
        let e = estimate_exponents(&series).unwrap();
        assert!(e.nls.is_some());
        assert!((e.polyfit - 2.5).abs() < 0.3);
    }

    #[test]
    fn two_points() {
        let e = estimate_exponents(&[(10.0, 100.0), (100.0, 10_000.0)]).unwrap();
        assert!((e.polyfit - 2.0).abs() < 1e-12);
        assert!((e.local - 2.0).abs() < 1e-12);
        assert!(e.nls.is_none() && e.nls_error.is_some());
        assert!(fit_models(&[(10.0, 100.0), (100.0, 10_000.0)]).is_err());
    }

    #[test]
    fn non_positive_values_reject_some_models() {
        let series = [(1.0, 0.0), (2.0, 1.0), (3.0, 2.0), (4.0, 3.0)];
        let report = fit_models(&series).unwrap();
        assert!(report.get(Model::Power).is_none());
        assert!(report.get(Model::Logarithmic).is_none());
        assert_eq!(report.rejected.len(), 2);
    }

    #[test]
    fn deterministic() {
        let series = synthetic(3.3, 1.7);
        assert_eq!(fit_models(&series).unwrap(), fit_models(&series).unwrap());
    }

    #[test]
    fn series_parsing() {
        let s = parse_series("# size mean_runtime\n10 1.5e-3\n20, 3e-3\n").unwrap();
        assert_eq!(s, vec![(10.0, 1.5e-3), (20.0, 3e-3)]);
        assert_eq!(parse_series("size,y\n1,2\n").unwrap(), vec![(1.0, 2.0)]);
        assert!(parse_series("1 2\nx y\n").is_err());
    }
}
