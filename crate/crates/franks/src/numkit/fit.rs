//! Log–log slope fitting for scaling-law checks.

/// Least-squares line through `(ln x, ln y)`; returns `(slope, intercept)`.
///
/// Panics if any sample is non-positive.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two samples");
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            assert!(x > 0.0 && y > 0.0, "log-log fit needs positive data");
            (x.ln(), y.ln())
        })
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

#[cfg(test)]
mod tests {
    use super::fit_loglog;

    #[test]
    fn recovers_pure_power_law() {
        let xs = [0.4f64, 0.2, 0.1, 0.05];
        let ys: Vec<f64> = xs.iter().map(|&x| 3.0 * x.powf(2.5)).collect();
        let (slope, intercept) = fit_loglog(&xs, &ys);
        assert!((slope - 2.5).abs() < 1e-12);
        assert!((intercept.exp() - 3.0).abs() < 1e-12);
    }
}
