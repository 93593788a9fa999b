use crate::error::{Error, Result};

/// How the node spacing `h` enters the Simpson weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Spacing {
    /// `h = (t2 - t1) / (n - 1)`: the actual distance between the `n` nodes.
    #[default]
    Nodes,
    /// `h = (t2 - t1) / n`, as printed in the original experiment write-up.
    /// Scales every weight by `(n - 1) / n`.
    Literal,
}

impl Spacing {
    pub fn step(self, n: usize, t1: f64, t2: f64) -> f64 {
        match self {
            Spacing::Nodes => (t2 - t1) / (n - 1) as f64,
            Spacing::Literal => (t2 - t1) / n as f64,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Spacing::Nodes => "nodes",
            Spacing::Literal => "literal",
        }
    }
}

/// Composite Simpson weights `(h/3)(1, 4, 2, 4, ..., 2, 4, 1)` on `n` nodes.
pub fn simpson_weights(n: usize, t1: f64, t2: f64) -> Result<Vec<f64>> {
    simpson_weights_with(n, t1, t2, Spacing::Nodes)
}

pub fn simpson_weights_with(n: usize, t1: f64, t2: f64, spacing: Spacing) -> Result<Vec<f64>> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "Simpson's rule needs an odd number of nodes >= 3, got {n}"
        )));
    }
    if !(t1.is_finite() && t2.is_finite()) || t2 <= t1 {
        return Err(Error::InvalidParameter(format!(
            "invalid interval [{t1}, {t2}]"
        )));
    }
    let third = spacing.step(n, t1, t2) / 3.0;
    Ok((0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                third
            } else if i % 2 == 1 {
                4.0 * third
            } else {
                2.0 * third
            }
        })
        .collect())
}

/// `n` uniform points on `[a, b]`, endpoints included.
pub fn uniform_grid(n: usize, a: f64, b: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + i as f64 * h })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(f: impl Fn(f64) -> f64, n: usize, a: f64, b: f64) -> f64 {
        let w = simpson_weights(n, a, b).unwrap();
        uniform_grid(n, a, b)
            .iter()
            .zip(&w)
            .map(|(&t, &wi)| wi * f(t))
            .sum()
    }

    #[test]
    fn single_panel() {
        let w = simpson_weights(3, 0.0, 1.0).unwrap();
        let expected = [1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-16);
        }
    }

    #[test]
    fn two_panels_sum_to_length() {
        let w = simpson_weights(5, 0.0, 1.0).unwrap();
        let expected = [1.0 / 12.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 12.0];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-16);
        }
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cosine_over_half_period() {
        let half_pi = std::f64::consts::FRAC_PI_2;
        let v = integrate(f64::cos, 2001, -half_pi, half_pi);
        assert!((v - 2.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn exact_on_cubics() {
        // ∫_{-1}^{2} (1 - 2t + 3t^2 - t^3) dt = 3 - 3 + 9 - 15/4
        let v = integrate(|t| 1.0 - 2.0 * t + 3.0 * t * t - t * t * t, 7, -1.0, 2.0);
        let exact = 9.0 - 15.0 / 4.0;
        assert!((v - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn literal_spacing_scales_weights() {
        let a = simpson_weights_with(11, 0.0, 2.0, Spacing::Nodes).unwrap();
        let b = simpson_weights_with(11, 0.0, 2.0, Spacing::Literal).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((y / x - 10.0 / 11.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_node_counts() {
        assert!(simpson_weights(4, 0.0, 1.0).is_err());
        assert!(simpson_weights(1, 0.0, 1.0).is_err());
        assert!(simpson_weights(5, 1.0, 0.0).is_err());
    }

    #[test]
    fn grid_includes_endpoints() {
        let g = uniform_grid(5, -6.0, 6.0);
        assert_eq!(g, vec![-6.0, -3.0, 0.0, 3.0, 6.0]);
        assert_eq!(uniform_grid(1, 2.0, 3.0), vec![2.0]);
    }
}
