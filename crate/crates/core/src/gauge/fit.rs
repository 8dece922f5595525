//! Log-log regression of sampled nets against the gauge.

use serde::Serialize;

/// Verdict tiers shared by numbers and function nets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    Zero,
    Infinitesimal,
    FiniteInvertible,
    Infinite,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Moderate {
    Yes(u32),
    No,
    Undetermined,
}

/// How a verdict was obtained. `Heuristic` verdicts come from sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certainty {
    Exact,
    Bound,
    Heuristic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub class: Class,
    pub moderate: Moderate,
    pub certainty: Certainty,
    /// Fitted exponent `b` in `|x_eps| ~ rho_eps^b` when sampled.
    pub slope: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitConfig {
    /// RMS residual above which the raw fit is rejected, in decimal decades.
    pub residual_tol: f64,
    /// Slopes within this distance of zero count as order one.
    pub slope_tol: f64,
    /// Slopes at or above this count as negligible.
    pub negligible_slope: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { residual_tol: 0.1, slope_tol: 0.05, negligible_slope: 10.0 }
    }
}

/// `eps = 2^-k` for `k = 4..=20`, decreasing.
pub fn default_schedule() -> Vec<f64> {
    (4..=20).map(|k| (2.0f64).powi(-k)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_decades: f64,
}

pub fn least_squares(points: &[(f64, f64)]) -> Option<LineFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Some(LineFit { slope, intercept, residual_decades: (ss / n).sqrt() / std::f64::consts::LN_10 })
}

/// Classifies a sampled net. `samples` holds `(rho_eps, x_eps)` ordered by
/// decreasing `eps`.
pub fn classify_samples(samples: &[(f64, f64)], cfg: &FitConfig) -> Classification {
    let heuristic = |class, moderate, slope| Classification {
        class,
        moderate,
        certainty: Certainty::Heuristic,
        slope,
    };
    if samples.iter().any(|(_, v)| v.is_nan()) || samples.is_empty() {
        return heuristic(Class::Undetermined, Moderate::Undetermined, None);
    }
    if samples.iter().any(|(_, v)| v.is_infinite()) {
        return heuristic(Class::Infinite, Moderate::No, None);
    }
    let tail = &samples[samples.len() / 2..];
    if tail.iter().all(|(_, v)| *v == 0.0) {
        return heuristic(Class::Zero, Moderate::Yes(0), None);
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, v)| *v != 0.0)
        .map(|(r, v)| (r.ln(), v.abs().ln()))
        .collect();
    if pts.len() < 3 {
        return heuristic(Class::Undetermined, Moderate::Undetermined, None);
    }
    let Some(raw) = least_squares(&pts) else {
        return heuristic(Class::Undetermined, Moderate::Undetermined, None);
    };
    let moderate_from = |s: f64| Moderate::Yes((-s - cfg.slope_tol).max(0.0).ceil() as u32);
    if raw.residual_decades <= cfg.residual_tol {
        let s = raw.slope;
        let class = if s >= cfg.negligible_slope {
            Class::Zero
        } else if s > cfg.slope_tol {
            Class::Infinitesimal
        } else if s < -cfg.slope_tol {
            Class::Infinite
        } else {
            Class::FiniteInvertible
        };
        return heuristic(class, moderate_from(s), Some(s));
    }
    // oscillating or irregular: fit the running sup over smaller eps
    let mut env = vec![0.0f64; samples.len()];
    let mut run = 0.0f64;
    for i in (0..samples.len()).rev() {
        run = run.max(samples[i].1.abs());
        env[i] = run;
    }
    let env_pts: Vec<(f64, f64)> = samples
        .iter()
        .zip(&env)
        .filter(|(_, m)| **m > 0.0)
        .map(|((r, _), m)| (r.ln(), m.ln()))
        .collect();
    match least_squares(&env_pts) {
        Some(fit) => {
            let class = if fit.slope >= cfg.negligible_slope {
                Class::Zero
            } else if fit.slope > cfg.slope_tol {
                Class::Infinitesimal
            } else {
                Class::Undetermined
            };
            heuristic(class, moderate_from(fit.slope), Some(fit.slope))
        }
        None => heuristic(Class::Undetermined, Moderate::Undetermined, None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        default_schedule().into_iter().map(|e| (e, f(e))).collect()
    }

    #[test]
    fn power_laws() {
        let c = classify_samples(&sample(|e| 3.0 / (e * e)), &FitConfig::default());
        assert_eq!(c.class, Class::Infinite);
        assert_eq!(c.moderate, Moderate::Yes(2));
        let c = classify_samples(&sample(|e| e.sqrt()), &FitConfig::default());
        assert_eq!(c.class, Class::Infinitesimal);
        assert_eq!(c.moderate, Moderate::Yes(0));
    }

    #[test]
    fn oscillating_net_uses_envelope() {
        let c = classify_samples(&sample(|e| e * (1.0 / e).sin()), &FitConfig::default());
        assert_eq!(c.moderate, Moderate::Yes(0));
        assert_eq!(c.class, Class::Infinitesimal);
    }

    #[test]
    fn overflow_and_underflow() {
        let c = classify_samples(&sample(|e| (1.0 / e).exp()), &FitConfig::default());
        assert_eq!((c.class, c.moderate), (Class::Infinite, Moderate::No));
        let c = classify_samples(&sample(|e| (-1.0 / e).exp()), &FitConfig::default());
        assert_eq!(c.class, Class::Zero);
    }
}
