use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distance {
    /// Hausdorff distance of the windowed sets; infinite when only one of
    /// them is empty.
    pub hausdorff: f64,
    /// `max_j |a_j - b_j|` over the common low-lying indices.
    pub max_pairwise: f64,
    pub count_a: usize,
    pub count_b: usize,
}

fn one_sided(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .map(|x| b.iter().map(|y| (x - y).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Distances between two sorted spectra restricted to `[lo, hi]`.
pub fn spectral_distance(a: &[f64], b: &[f64], window: (f64, f64)) -> Result<Distance> {
    let (lo, hi) = window;
    let inside = |v: &[f64]| -> Vec<f64> { v.iter().copied().filter(|x| *x >= lo && *x <= hi).collect() };
    let (wa, wb) = (inside(a), inside(b));
    if wa.is_empty() && wb.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let hausdorff = if wa.is_empty() || wb.is_empty() {
        f64::INFINITY
    } else {
        one_sided(&wa, &wb).max(one_sided(&wb, &wa))
    };
    let max_pairwise = wa
        .iter()
        .zip(&wb)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(Distance {
        hausdorff,
        max_pairwise,
        count_a: wa.len(),
        count_b: wb.len(),
    })
}

/// Like [`spectral_distance`], but each windowed eigenvalue is matched
/// against the whole other spectrum, so a partner just outside the window
/// still counts.
pub fn matched_distance(a: &[f64], b: &[f64], window: (f64, f64)) -> Result<Distance> {
    let strict = spectral_distance(a, b, window)?;
    let (lo, hi) = window;
    let inside = |v: &[f64]| -> Vec<f64> { v.iter().copied().filter(|x| *x >= lo && *x <= hi).collect() };
    let (wa, wb) = (inside(a), inside(b));
    let hausdorff = if a.is_empty() || b.is_empty() {
        f64::INFINITY
    } else {
        one_sided(&wa, b).max(one_sided(&wb, a))
    };
    Ok(Distance { hausdorff, ..strict })
}

/// Least-squares line through `(ln eps, ln d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

pub fn convergence_fit(pairs: &[(f64, f64)]) -> Result<Fit> {
    if let Some(&(_, d)) = pairs.iter().find(|(_, d)| !(*d > 0.0) || !d.is_finite()) {
        return Err(Error::NonPositiveDistance(d));
    }
    let mut eps: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    if eps.len() < 3 {
        return Err(Error::InvalidInput("convergence fit needs at least three distinct eps".into()));
    }
    let pts: Vec<(f64, f64)> = pairs.iter().map(|&(e, d)| (e.ln(), d.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(Fit {
        slope,
        intercept,
        residual,
    })
}

/// Slope `ln(d1/d2) / ln(e1/e2)` from two points.
pub fn two_point_slope(e1: f64, d1: f64, e2: f64, d2: f64) -> Result<f64> {
    for d in [d1, d2] {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NonPositiveDistance(d));
        }
    }
    if e1 == e2 {
        return Err(Error::InvalidInput("two-point slope needs distinct eps".into()));
    }
    Ok((d1 / d2).ln() / (e1 / e2).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let d = spectral_distance(&[1.0, 2.0], &[1.0, 2.0], (0.0, 3.0)).unwrap();
        assert_eq!(d.hausdorff, 0.0);
        let d = spectral_distance(&[1.0, 2.0], &[1.1, 2.2], (0.0, 3.0)).unwrap();
        assert!((d.hausdorff - 0.2).abs() < 1e-12);
        assert!((d.max_pairwise - 0.2).abs() < 1e-12);
        assert!(matches!(
            spectral_distance(&[5.0], &[6.0], (0.0, 3.0)),
            Err(Error::EmptyWindow)
        ));
        // 3.05 falls outside the window but partners 2.95 inside it
        let a = [1.0, 2.95];
        let b = [1.0, 3.05];
        assert!(spectral_distance(&a, &b, (0.0, 3.0)).unwrap().hausdorff > 1.0);
        assert!((matched_distance(&a, &b, (0.0, 3.0)).unwrap().hausdorff - 0.1).abs() < 1e-12);
    }

    #[test]
    fn power_laws() {
        let sq: Vec<(f64, f64)> = [0.2, 0.1, 0.05].iter().map(|&e| (e, 3.0 * e * e)).collect();
        assert!((convergence_fit(&sq).unwrap().slope - 2.0).abs() < 1e-12);
        let lin: Vec<(f64, f64)> = [0.4, 0.2, 0.1, 0.05].iter().map(|&e| (e, 0.7 * e)).collect();
        assert!((convergence_fit(&lin).unwrap().slope - 1.0).abs() < 1e-12);
        assert!(matches!(
            convergence_fit(&[(0.1, 1.0), (0.2, 0.0), (0.3, 1.0)]),
            Err(Error::NonPositiveDistance(_))
        ));
        assert!((two_point_slope(0.2, 0.04, 0.1, 0.01).unwrap() - 2.0).abs() < 1e-12);
    }
}
