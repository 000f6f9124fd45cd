//! Finite-difference derivatives for checking analytic slopes.

/// Central difference with one Richardson extrapolation step:
/// `(4·D(h/2) - D(h)) / 3`, accurate to `O(h⁴)`.
pub fn richardson_central<F>(mut f: F, x: f64, h: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let mut central = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let coarse = central(h);
    let fine = central(0.5 * h);
    (4.0 * fine - coarse) / 3.0
}

/// Step proportional to the local length scale `scale`.
pub fn relative_step(scale: f64) -> f64 {
    1e-3 * scale.abs().max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_quartics() {
        let d = richardson_central(|x| x.powi(4) - 3.0 * x * x, 1.7, 0.1);
        let exact = 4.0 * 1.7f64.powi(3) - 6.0 * 1.7;
        assert!((d - exact).abs() < 1e-11);
    }

    #[test]
    fn smooth_transcendental() {
        let d = richardson_central(f64::exp, 0.3, relative_step(1.0));
        assert!((d / 0.3f64.exp() - 1.0).abs() < 1e-12);
    }
}
