//! Least-squares power laws y ≈ A·x^k.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub amplitude: f64,
    /// RMS residual of ln y.
    pub residual: f64,
}

/// Fits ln|y| = ln A + k·ln x over pairs with x > 0 and y ≠ 0; None with
/// fewer than 3 usable pairs.
pub fn power_fit(xs: &[f64], ys: &[f64]) -> Option<PowerFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && y.abs() > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.abs().ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in &pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let k = sxy / sxx;
    let c = my - k * mx;
    let rss: f64 = pts.iter().map(|(x, y)| (y - c - k * x).powi(2)).sum();
    Some(PowerFit { exponent: k, amplitude: c.exp(), residual: (rss / m).sqrt() })
}

/// n points log-spaced on [a, b].
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let xs = log_grid(2.0, 200.0, 20);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-1.7)).collect();
        let f = power_fit(&xs, &ys).unwrap();
        assert!((f.exponent + 1.7).abs() < 1e-12);
        assert!((f.amplitude - 3.0).abs() < 1e-10);
        assert!(f.residual < 1e-12);
        assert!(power_fit(&xs, &vec![0.0; 20]).is_none());
    }
}
