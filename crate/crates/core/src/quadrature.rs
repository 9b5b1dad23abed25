//! Composite Simpson quadrature on an interval.

/// Integrate `f` over `[a, b]` with composite Simpson on `nodes` equally spaced
/// points. `nodes` must be odd and at least 3; an even count is bumped by one.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, nodes: usize) -> f64 {
    let n = if nodes < 3 {
        3
    } else if nodes % 2 == 0 {
        nodes + 1
    } else {
        nodes
    };
    let h = (b - a) / (n - 1) as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n - 1 {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}
