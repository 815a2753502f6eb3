use crate::Scalar;

/// Gaussian tail probability `Q(x) = P(N(0,1) > x) = erfc(x/√2)/2`.
#[inline]
pub fn q_function<T: Scalar>(x: T) -> T {
    T::lit(0.5) * (x * T::FRAC_1_SQRT_2()).erfc()
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    // Reference values from a 40-digit erfc.
    const TABLE: &[(f64, f64)] = &[
        (-8.0, 0.9999999999999993779039426),
        (-3.0, 0.9986501019683699054733482),
        (-1.0, 0.8413447460685429485852325),
        (-0.5, 0.6914624612740131036377046),
        (0.0, 0.5),
        (0.5, 0.3085375387259868963622954),
        (1.0, 0.1586552539314570514147675),
        (1.5, 0.06680720126885806600449404),
        (2.0, 0.02275013194817920720028264),
        (3.0, 0.001349898031630094526651815),
        (4.0, 3.167124183311992125377076e-5),
        (5.0, 2.866515718791939116737523e-7),
        (6.0, 9.865876450376981407008641e-10),
        (7.0, 1.279812543885835004383624e-12),
        (8.0, 6.220960574271784123515995e-16),
    ];

    #[test]
    fn matches_high_precision_table() {
        for &(x, want) in TABLE {
            let got = q_function(x);
            let rel = ((got - want) / want).abs();
            assert!(rel <= 1e-14, "Q({x}) = {got:e}, want {want:e}, rel {rel:e}");
        }
    }

    #[test]
    fn q_of_zero_is_half() {
        assert_eq!(q_function(0.0_f64), 0.5);
        assert_eq!(q_function(0.0_f32), 0.5);
    }

    #[test]
    fn reflection() {
        for x in [0.5, 1.0, 2.0, 3.7, 6.1] {
            assert!((q_function(x) + q_function(-x) - 1.0_f64).abs() <= 1e-15);
        }
    }

    #[test]
    fn monotone_decreasing() {
        let mut prev = q_function(-9.0_f64);
        for i in 1..=1800 {
            let q = q_function(-9.0 + i as f64 * 0.01);
            assert!(q <= prev);
            prev = q;
        }
    }

    #[test]
    fn single_precision_is_close() {
        for &(x, want) in TABLE.iter().filter(|(x, _)| x.abs() <= 4.0) {
            let got = q_function(x as f32) as f64;
            assert!(((got - want) / want).abs() < 1e-5);
        }
    }
}
