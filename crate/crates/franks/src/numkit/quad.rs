//! Quadrature on uniform grids.
//!
//! Composite Simpson weights on the stored ODE node grid keep nested
//! integrals within the order-4 accuracy budget of the integrator.

/// Cumulative integral at every node of a uniform grid.
///
/// Even-indexed prefixes use composite Simpson; odd-indexed prefixes add a
/// half-panel correction from the quadratic through the three surrounding
/// nodes. Requires an odd node count (even panel count) for the final value
/// to be pure Simpson.
pub fn cumulative_integral(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 3, "need at least three nodes");
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    let mut i = 0;
    while i + 2 < n {
        // Quadratic through nodes i, i+1, i+2 integrated over each half.
        let (v0, v1, v2) = (values[i], values[i + 1], values[i + 2]);
        let first = h / 12.0 * (5.0 * v0 + 8.0 * v1 - v2);
        let both = h / 3.0 * (v0 + 4.0 * v1 + v2);
        out[i + 1] = acc + first;
        out[i + 2] = acc + both;
        acc += both;
        i += 2;
    }
    if i + 1 < n {
        // Odd tail panel: integrate the quadratic through the last three
        // nodes over its second half.
        let (v0, v1, v2) = (values[i - 1], values[i], values[i + 1]);
        out[i + 1] = acc + h / 12.0 * (-v0 + 8.0 * v1 + 5.0 * v2);
    }
    out
}

/// Definite integral over the whole grid.
pub fn integral(values: &[f64], h: f64) -> f64 {
    *cumulative_integral(values, h).last().unwrap()
}

/// Integrate a closure over `[a, b]` with `panels` Simpson panels
/// (`2·panels + 1` evaluations).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = 2 * panels.max(1);
    let h = (b - a) / n as f64;
    let values: Vec<f64> = (0..=n).map(|i| f(a + h * i as f64)).collect();
    integral(&values, h)
}
