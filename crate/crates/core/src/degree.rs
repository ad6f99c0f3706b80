//! Cumulative degree distributions and least-squares model fits.
//!
//! Both models are fitted as straight lines in log space with every support
//! point weighted equally:
//!
//! * exponential `P(K ≥ k) = a·e^(−λk)`: `ln P` against `k`,
//! * power law `P(K ≥ k) = a·k^(−α)`: `ln P` against `ln k`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Snapshot;

/// Empirical survival function `P(K ≥ k)` over the distinct positive degrees.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulativeDegreeDistribution {
    support: Vec<f64>,
    survival: Vec<f64>,
    /// Isolated nodes left out of the degree sequence.
    isolated: usize,
}

impl CumulativeDegreeDistribution {
    /// Arbitrary curve, e.g. synthetic test data. Support must be positive and
    /// strictly increasing; survival values positive and non-increasing.
    pub fn from_points(support: Vec<f64>, survival: Vec<f64>) -> Result<Self> {
        if support.len() != survival.len() {
            return Err(Error::InvalidParams(format!(
                "{} support points but {} survival values",
                support.len(),
                survival.len()
            )));
        }
        if support.iter().any(|&k| !(k > 0.0)) || support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams(
                "support must be positive and strictly increasing".into(),
            ));
        }
        if survival.iter().any(|&p| !(p > 0.0)) || survival.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParams(
                "survival values must be positive and non-increasing".into(),
            ));
        }
        Ok(Self {
            support,
            survival,
            isolated: 0,
        })
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn survival(&self) -> &[f64] {
        &self.survival
    }

    pub fn isolated(&self) -> usize {
        self.isolated
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// `P(K ≥ k)` for any `k`, including values between support points.
    pub fn survival_at(&self, k: f64) -> f64 {
        match self.support.iter().position(|&s| s >= k) {
            Some(i) => self.survival[i],
            None => 0.0,
        }
    }
}

pub fn cumulative_distribution(g: &Snapshot) -> Result<CumulativeDegreeDistribution> {
    if g.n() < 2 || g.m() == 0 {
        return Err(Error::undefined(
            "degree distribution",
            format!("degenerate graph with N={} and E={}", g.n(), g.m()),
        ));
    }
    let mut degrees: Vec<usize> = g.degrees().into_iter().filter(|&d| d > 0).collect();
    let isolated = g.n() - degrees.len();
    if isolated > 0 {
        log::debug!("{isolated} isolated nodes excluded from the degree sequence");
    }
    degrees.sort_unstable();
    let total = degrees.len() as f64;
    let mut support = Vec::new();
    let mut survival = Vec::new();
    let mut i = 0;
    while i < degrees.len() {
        let k = degrees[i];
        support.push(k as f64);
        survival.push((degrees.len() - i) as f64 / total);
        while i < degrees.len() && degrees[i] == k {
            i += 1;
        }
    }
    Ok(CumulativeDegreeDistribution {
        support,
        survival,
        isolated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeModel {
    Exponential,
    PowerLaw,
}

impl fmt::Display for DegreeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DegreeModel::Exponential => "exponential",
            DegreeModel::PowerLaw => "power_law",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: DegreeModel,
    pub amplitude: f64,
    /// λ for the exponential model, α for the power law.
    pub rate_or_exponent: f64,
    /// Sum of squared residuals of `ln P`.
    pub sse: f64,
    pub r_squared: f64,
    /// Fewer than three support points.
    pub low_confidence: bool,
}

impl FitResult {
    /// Model prediction of `P(K ≥ k)`.
    pub fn predict(&self, k: f64) -> f64 {
        match self.model {
            DegreeModel::Exponential => self.amplitude * (-self.rate_or_exponent * k).exp(),
            DegreeModel::PowerLaw => self.amplitude * k.powf(-self.rate_or_exponent),
        }
    }

    /// Regressor used for `k` in the log-space fit.
    pub fn regressor(model: DegreeModel, k: f64) -> f64 {
        match model {
            DegreeModel::Exponential => k,
            DegreeModel::PowerLaw => k.ln(),
        }
    }
}

pub fn fit(dist: &CumulativeDegreeDistribution, model: DegreeModel) -> Result<FitResult> {
    let n = dist.len();
    if n < 2 {
        return Err(Error::FitImpossible(format!(
            "{n} support point(s); at least 2 are required"
        )));
    }
    let x: Vec<f64> = dist
        .support
        .iter()
        .map(|&k| FitResult::regressor(model, k))
        .collect();
    let y: Vec<f64> = dist.survival.iter().map(|p| p.ln()).collect();
    let len = n as f64;
    let x_mean = x.iter().sum::<f64>() / len;
    let y_mean = y.iter().sum::<f64>() / len;
    let sxx: f64 = x.iter().map(|v| (v - x_mean).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - x_mean) * (b - y_mean)).sum();
    let syy: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let sse: f64 = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(FitResult {
        model,
        amplitude: intercept.exp(),
        rate_or_exponent: -slope,
        sse,
        r_squared,
        low_confidence: n < 3,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Exponential,
    PowerLaw,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Exponential => "exponential",
            Verdict::PowerLaw => "power_law",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// Absent when the distribution has a single support point.
    pub exponential: Option<FitResult>,
    pub power_law: Option<FitResult>,
}

/// r² difference below which neither model is preferred.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Fits both models and picks the one with the higher r².
pub fn classify(g: &Snapshot) -> Result<Classification> {
    let dist = cumulative_distribution(g)?;
    if dist.len() < 2 {
        return Ok(Classification {
            verdict: Verdict::Inconclusive,
            exponential: None,
            power_law: None,
        });
    }
    let exponential = fit(&dist, DegreeModel::Exponential)?;
    let power_law = fit(&dist, DegreeModel::PowerLaw)?;
    let delta = power_law.r_squared - exponential.r_squared;
    let verdict = if delta.abs() < TIE_TOLERANCE {
        Verdict::Inconclusive
    } else if delta > 0.0 {
        Verdict::PowerLaw
    } else {
        Verdict::Exponential
    };
    Ok(Classification {
        verdict,
        exponential: Some(exponential),
        power_law: Some(power_law),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, Model};

    #[test]
    fn survival_of_small_graphs() {
        let star = generate(Model::Star { n: 4 }, 0).unwrap();
        let d = cumulative_distribution(&star).unwrap();
        assert_eq!(d.support(), &[1.0, 3.0]);
        assert_eq!(d.survival_at(1.0), 1.0);
        assert_eq!(d.survival_at(2.0), 0.25);
        assert_eq!(d.survival_at(3.0), 0.25);
        assert_eq!(d.survival_at(4.0), 0.0);

        let k4 = generate(Model::Complete { n: 4 }, 0).unwrap();
        let d = cumulative_distribution(&k4).unwrap();
        assert_eq!((d.support(), d.survival()), (&[3.0][..], &[1.0][..]));

        let p3 = generate(Model::Path { n: 3 }, 0).unwrap();
        let d = cumulative_distribution(&p3).unwrap();
        assert_eq!(d.survival(), &[1.0, 1.0 / 3.0]);
    }

    #[test]
    fn isolated_nodes_are_excluded() {
        let g = Snapshot::from_edges(5, [(0, 1), (1, 2)]).unwrap();
        let d = cumulative_distribution(&g).unwrap();
        assert_eq!(d.isolated(), 2);
        assert_eq!(d.survival(), &[1.0, 1.0 / 3.0]);
        assert!(cumulative_distribution(&Snapshot::from_edges(3, []).unwrap()).is_err());
    }

    #[test]
    fn exact_exponential_is_recovered() {
        let k: Vec<f64> = (1..=10).map(f64::from).collect();
        let p = k.iter().map(|k| (-k / 2.0).exp()).collect();
        let d = CumulativeDegreeDistribution::from_points(k, p).unwrap();
        let f = fit(&d, DegreeModel::Exponential).unwrap();
        assert!((f.rate_or_exponent - 0.5).abs() < 1e-9);
        assert!((f.amplitude - 1.0).abs() < 1e-9);
        assert!(f.sse < 1e-9);
        assert!(!f.low_confidence);
    }

    #[test]
    fn exact_power_law_is_recovered() {
        let k: Vec<f64> = (1..=10).map(f64::from).collect();
        let p = k.iter().map(|k| k.powi(-2)).collect();
        let d = CumulativeDegreeDistribution::from_points(k, p).unwrap();
        let f = fit(&d, DegreeModel::PowerLaw).unwrap();
        assert!((f.rate_or_exponent - 2.0).abs() < 1e-9);
        assert!(f.sse < 1e-9);
        assert!((f.predict(3.0) - 1.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_points() {
        let d = CumulativeDegreeDistribution::from_points(vec![2.0], vec![1.0]).unwrap();
        assert!(matches!(
            fit(&d, DegreeModel::Exponential),
            Err(Error::FitImpossible(_))
        ));
        let d = CumulativeDegreeDistribution::from_points(vec![1.0, 2.0], vec![1.0, 0.5]).unwrap();
        assert!(fit(&d, DegreeModel::PowerLaw).unwrap().low_confidence);
    }

    #[test]
    fn regular_graph_is_inconclusive() {
        let ring = generate(Model::Ring { n: 30, k: 4 }, 0).unwrap();
        let c = classify(&ring).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert!(c.exponential.is_none());
    }

    #[test]
    fn preferential_attachment_prefers_power_law() {
        let g = generate(Model::PreferentialAttachment { n: 2000, m: 2 }, 1).unwrap();
        assert_eq!(classify(&g).unwrap().verdict, Verdict::PowerLaw);
    }

    #[test]
    fn sparse_random_graph_prefers_exponential() {
        let g = generate(Model::ErdosRenyi { n: 2000, p: 2.6 / 1999.0 }, 1).unwrap();
        assert_eq!(classify(&g).unwrap().verdict, Verdict::Exponential);
    }
}
