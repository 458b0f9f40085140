use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::number;
use crate::graded::MultiIndex;

/// Slack used when comparing the fitted growth exponent with its thresholds.
pub const GROWTH_SLACK: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct DenominatorEntry {
    pub component: usize,
    pub index: Option<MultiIndex>,
    pub degree: usize,
    /// Modulus of the denominator.
    pub modulus: f64,
    pub resonant: bool,
}

/// Growth class of the denominators, fitted as `|den| ≥ C·i^β`.
#[derive(Clone, Debug, PartialEq)]
pub enum Growth {
    Big { c: f64, beta: f64 },
    Relative { c: f64, alpha: f64, beta: f64 },
    Siegel { c: f64, tau: f64 },
    Unclassified,
}

impl Growth {
    pub fn label(&self) -> &'static str {
        match self {
            Growth::Big { .. } => "big",
            Growth::Relative { .. } => "relative",
            Growth::Siegel { .. } => "siegel",
            Growth::Unclassified => "unclassified",
        }
    }

    /// Loss exponent `α = m − β` (zero for big denominators).
    pub fn alpha(&self) -> Option<f64> {
        match self {
            Growth::Big { .. } => Some(0.0),
            Growth::Relative { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Growth::Big { c, beta } => {
                json!({"class": "big", "C": number(*c), "beta": number(*beta), "alpha": number(0.0)})
            }
            Growth::Relative { c, alpha, beta } => {
                json!({"class": "relative", "C": number(*c), "alpha": number(*alpha), "beta": number(*beta)})
            }
            Growth::Siegel { c, tau } => json!({"class": "siegel", "C": number(*c), "tau": number(*tau)}),
            Growth::Unclassified => json!({"class": "unclassified"}),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenominatorProfile {
    pub entries: Vec<DenominatorEntry>,
    pub m: usize,
    pub growth: Growth,
}

impl DenominatorProfile {
    /// Smallest non-resonant modulus per degree.
    pub fn minima(&self) -> BTreeMap<usize, f64> {
        per_degree_minima(&self.entries)
    }

    pub fn resonant(&self) -> impl Iterator<Item = &DenominatorEntry> {
        self.entries.iter().filter(|e| e.resonant)
    }
}

fn per_degree_minima(entries: &[DenominatorEntry]) -> BTreeMap<usize, f64> {
    let mut minima: BTreeMap<usize, f64> = BTreeMap::new();
    for e in entries.iter().filter(|e| !e.resonant && e.modulus > 0.0 && e.degree > 0) {
        let slot = minima.entry(e.degree).or_insert(f64::INFINITY);
        *slot = slot.min(e.modulus);
    }
    minima
}

/// Fits `|den| ≥ C·i^β` in log-log coordinates with the lower-bounding line of
/// largest mean (an edge of the lower convex hull of the per-degree minima),
/// then labels the profile against the order `m` of the operator.
pub fn classify_denominators(entries: Vec<DenominatorEntry>, m: usize) -> DenominatorProfile {
    let minima = per_degree_minima(&entries);
    let growth = fit_growth(&minima, m as f64);
    DenominatorProfile { entries, m, growth }
}

/// Slope of the lower hull edge above the mean abscissa; `pts` sorted by `x`.
fn lower_hull_slope(pts: &[(f64, f64)]) -> f64 {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mean = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    hull.windows(2).find(|w| w[1].0 >= mean).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).unwrap_or(0.0)
}

fn fit_growth(minima: &BTreeMap<usize, f64>, m: f64) -> Growth {
    if minima.is_empty() {
        return Growth::Unclassified;
    }
    let pts: Vec<(f64, f64)> = minima.iter().map(|(&i, &v)| ((i as f64).ln(), v.ln())).collect();
    let beta = lower_hull_slope(&pts);
    let c = minima.iter().map(|(&i, &v)| v / (i as f64).powf(beta)).fold(f64::INFINITY, f64::min);
    if beta >= m - GROWTH_SLACK {
        Growth::Big { c, beta }
    } else if beta > -GROWTH_SLACK {
        Growth::Relative { c, alpha: m - beta.max(0.0), beta }
    } else {
        Growth::Siegel { c, tau: -beta }
    }
}
