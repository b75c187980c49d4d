//! Bjontegaard delta rate.
//!
//! log10(bitrate) is interpolated as a function of quality — by default
//! with a shape-preserving monotone piecewise cubic (Fritsch-Carlson
//! slopes, the modern committee practice), optionally with the classic
//! least-squares cubic polynomial fit — and both curves are integrated
//! analytically over the overlapping quality interval:
//! `percent = (10^(delta/interval) - 1) * 100`, negative = bitrate saving.

use crate::error::{Error, Result};
use crate::rd::{MetricKind, RdCurve};

/// Interpolation backend for the log-rate curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BdInterpolation {
    /// Monotone piecewise cubic Hermite (PCHIP).
    #[default]
    Pchip,
    /// Classic least-squares cubic polynomial (exact fit on 4 points).
    CubicFit,
}

impl BdInterpolation {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "pchip" => Ok(BdInterpolation::Pchip),
            "cubic" | "cubic-fit" => Ok(BdInterpolation::CubicFit),
            other => Err(Error::Config(format!("unknown interpolation {other:?}"))),
        }
    }
}

/// BD-rate outcome: percent bitrate difference at equal quality over the
/// curves' common quality interval.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BdRateResult {
    pub percent: f64,
    pub metric: MetricKind,
    pub overlap: (f64, f64),
}

/// Interpolant of log10(bitrate) over quality, exposed so the analytic
/// integral can be cross-checked by quadrature.
#[derive(Debug, Clone)]
pub enum RateInterpolant {
    Pchip {
        xs: Vec<f64>,
        ys: Vec<f64>,
        slopes: Vec<f64>,
    },
    Poly {
        coeffs: [f64; 4],
    },
}

impl RateInterpolant {
    /// Build from (quality, log10 rate) samples sorted by quality.
    pub fn fit(samples: &[(f64, f64)], interp: BdInterpolation) -> Result<Self> {
        let xs: Vec<f64> = samples.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = samples.iter().map(|p| p.1).collect();
        match interp {
            BdInterpolation::Pchip => {
                let slopes = pchip_slopes(&xs, &ys);
                Ok(RateInterpolant::Pchip { xs, ys, slopes })
            }
            BdInterpolation::CubicFit => {
                let coeffs = cubic_lsq(&xs, &ys)?;
                Ok(RateInterpolant::Poly { coeffs })
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            RateInterpolant::Pchip { xs, ys, slopes } => {
                let i = interval_index(xs, x);
                let h = xs[i + 1] - xs[i];
                let u = x - xs[i];
                let d = (ys[i + 1] - ys[i]) / h;
                let c2 = (3.0 * d - 2.0 * slopes[i] - slopes[i + 1]) / h;
                let c3 = (slopes[i] + slopes[i + 1] - 2.0 * d) / (h * h);
                ys[i] + slopes[i] * u + c2 * u * u + c3 * u * u * u
            }
            RateInterpolant::Poly { coeffs } => {
                coeffs[0] + x * (coeffs[1] + x * (coeffs[2] + x * coeffs[3]))
            }
        }
    }

    /// Exact integral over [lo, hi] (must lie inside the sample range for
    /// the PCHIP variant).
    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        match self {
            RateInterpolant::Pchip { xs, ys, slopes } => {
                let mut total = 0.0;
                for i in 0..xs.len() - 1 {
                    let a = lo.max(xs[i]);
                    let b = hi.min(xs[i + 1]);
                    if b <= a {
                        continue;
                    }
                    let h = xs[i + 1] - xs[i];
                    let d = (ys[i + 1] - ys[i]) / h;
                    let c2 = (3.0 * d - 2.0 * slopes[i] - slopes[i + 1]) / h;
                    let c3 = (slopes[i] + slopes[i + 1] - 2.0 * d) / (h * h);
                    let anti = |u: f64| {
                        ys[i] * u
                            + slopes[i] * u * u / 2.0
                            + c2 * u * u * u / 3.0
                            + c3 * u * u * u * u / 4.0
                    };
                    total += anti(b - xs[i]) - anti(a - xs[i]);
                }
                total
            }
            RateInterpolant::Poly { coeffs } => {
                let anti = |x: f64| {
                    x * (coeffs[0]
                        + x * (coeffs[1] / 2.0 + x * (coeffs[2] / 3.0 + x * coeffs[3] / 4.0)))
                };
                anti(hi) - anti(lo)
            }
        }
    }
}

fn interval_index(xs: &[f64], x: f64) -> usize {
    // Clamp to the outermost intervals; BD evaluation stays inside.
    if x <= xs[0] {
        return 0;
    }
    for i in 0..xs.len() - 1 {
        if x < xs[i + 1] {
            return i;
        }
    }
    xs.len() - 2
}

/// Fritsch-Carlson monotone slopes (the scipy PchipInterpolator rules).
fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = (0..n - 1).map(|i| xs[i + 1] - xs[i]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    let mut m = vec![0.0; n];
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    // Callers guarantee n >= 4 (the BD-rate minimum).
    m[0] = edge_slope(h[0], h[1], d[0], d[1]);
    m[n - 1] = edge_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    m
}

fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// Least-squares cubic through (xs, ys) via the 4x4 normal equations.
fn cubic_lsq(xs: &[f64], ys: &[f64]) -> Result<[f64; 4]> {
    let mut ata = [[0.0f64; 4]; 4];
    let mut atb = [0.0f64; 4];
    for (&x, &y) in xs.iter().zip(ys) {
        let powers = [1.0, x, x * x, x * x * x];
        for r in 0..4 {
            for c in 0..4 {
                ata[r][c] += powers[r] * powers[c];
            }
            atb[r] += powers[r] * y;
        }
    }
    solve4(ata, atb)
        .ok_or_else(|| Error::Data("degenerate cubic fit (repeated quality values?)".into()))
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&r1, &r2| {
            a[r1][col]
                .abs()
                .partial_cmp(&a[r2][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            let pivot_row = upper[col];
            for (dst, src) in lower[0][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= f * src;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 4];
    for row in (0..4).rev() {
        let mut acc = b[row];
        for c in row + 1..4 {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// (quality, log10 bitrate) samples for one curve under one metric,
/// sorted by quality, with the data checks the interpolation needs.
pub(crate) fn curve_samples(curve: &RdCurve, metric: MetricKind) -> Result<Vec<(f64, f64)>> {
    curve.validate_for_bd()?;
    let mut samples = Vec::with_capacity(curve.points.len());
    for point in &curve.points {
        let quality = metric.extract(&point.metrics).ok_or_else(|| {
            Error::Data(format!(
                "curve {}/{}/{}: metric {} missing at qp {}",
                curve.sequence,
                curve.codec,
                curve.label,
                metric.name(),
                point.qp
            ))
        })?;
        if !quality.is_finite() {
            return Err(Error::Data(format!(
                "curve {}/{}/{}: metric {} is not finite at qp {}",
                curve.sequence,
                curve.codec,
                curve.label,
                metric.name(),
                point.qp
            )));
        }
        samples.push((quality, point.bitrate_kbps.log10(), point.qp));
    }
    samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut offending = Vec::new();
    for pair in samples.windows(2) {
        if pair[1].0 <= pair[0].0 {
            offending.push(format!(
                "quality {} at qp {} vs {} at qp {}",
                pair[0].0, pair[0].2, pair[1].0, pair[1].2
            ));
        }
    }
    if !offending.is_empty() {
        return Err(Error::Data(format!(
            "curve {}/{}/{}: quality values are not strictly monotone: {}",
            curve.sequence,
            curve.codec,
            curve.label,
            offending.join("; ")
        )));
    }
    Ok(samples.into_iter().map(|(q, r, _)| (q, r)).collect())
}

/// Bjontegaard delta rate of `test` against `baseline` under `metric`.
pub fn bd_rate(
    baseline: &RdCurve,
    test: &RdCurve,
    metric: MetricKind,
    interp: BdInterpolation,
) -> Result<BdRateResult> {
    let base = curve_samples(baseline, metric)?;
    let tst = curve_samples(test, metric)?;
    let lo = base[0].0.max(tst[0].0);
    let hi = base[base.len() - 1].0.min(tst[tst.len() - 1].0);
    // Quality values are validated finite, so >= is the full complement.
    if lo >= hi {
        return Err(Error::Overlap(format!(
            "baseline spans [{}, {}], test spans [{}, {}] on {}",
            base[0].0,
            base[base.len() - 1].0,
            tst[0].0,
            tst[tst.len() - 1].0,
            metric.name()
        )));
    }
    let fb = RateInterpolant::fit(&base, interp)?;
    let ft = RateInterpolant::fit(&tst, interp)?;
    let delta = (ft.integrate(lo, hi) - fb.integrate(lo, hi)) / (hi - lo);
    Ok(BdRateResult {
        percent: (10f64.powf(delta) - 1.0) * 100.0,
        metric,
        overlap: (lo, hi),
    })
}
