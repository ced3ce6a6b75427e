use super::{check_count, check_probability, DesignError, Result};

/// Standard error of a difference in two proportions.
pub fn se_two_proportion(p1: f64, p2: f64, n1: usize, n2: usize) -> Result<f64> {
    check_probability("p1", p1)?;
    check_probability("p2", p2)?;
    check_count("n1", n1, 1)?;
    check_count("n2", n2, 1)?;
    Ok((p1 * (1.0 - p1) / n1 as f64 + p2 * (1.0 - p2) / n2 as f64).sqrt())
}

/// Upper bound on [`se_two_proportion`], reached when both rates are 0.5.
pub fn se_conservative_binary(n1: usize, n2: usize) -> Result<f64> {
    check_count("n1", n1, 2)?;
    check_count("n2", n2, 2)?;
    Ok((0.25 / n1 as f64 + 0.25 / n2 as f64).sqrt())
}

pub fn se_two_mean(sd: f64, n1: usize, n2: usize) -> Result<f64> {
    if !(sd.is_finite() && sd > 0.0) {
        return Err(DesignError::NonPositiveSd(sd));
    }
    check_count("n1", n1, 2)?;
    check_count("n2", n2, 2)?;
    Ok(sd * (1.0 / n1 as f64 + 1.0 / n2 as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pilot_and_trial_values() {
        let se = se_two_proportion(0.94, 0.90, 100, 100).unwrap();
        assert!((se - 0.0383).abs() < 5e-5);
        assert_eq!((se * 100.0).round() / 100.0, 0.04);
        let se = se_two_proportion(0.5, 0.5, 63, 63).unwrap();
        assert!((se - 0.0891).abs() < 5e-5);
        assert_eq!(se_two_proportion(0.0, 0.0, 10, 10).unwrap(), 0.0);
        assert!(se_two_proportion(0.5, 0.5, 0, 10).is_err());
        assert!(se_two_proportion(1.5, 0.5, 10, 10).is_err());
    }

    #[test]
    fn conservative_bound() {
        let se = se_conservative_binary(63, 63).unwrap();
        assert!((se - 0.089).abs() < 5e-4);
        assert_eq!(se, se_two_proportion(0.5, 0.5, 63, 63).unwrap());
        let se = se_conservative_binary(100, 100).unwrap();
        assert!((se - 0.0707).abs() < 5e-5);
        assert_eq!(se, se_two_proportion(0.5, 0.5, 100, 100).unwrap());
        assert!(se_conservative_binary(1, 100).is_err());

        let mut last = f64::INFINITY;
        for n in [100, 10_000, 1_000_000] {
            let se = se_conservative_binary(n, n).unwrap();
            assert!(se < last);
            last = se;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn two_means() {
        assert_eq!(se_two_mean(1.0, 2, 2).unwrap(), 1.0);
        assert!((se_two_mean(0.5, 50, 50).unwrap() - 0.1).abs() < 1e-15);
        assert!(se_two_mean(0.0, 50, 50).is_err());
        assert!(se_two_mean(-1.0, 50, 50).is_err());
    }

    proptest! {
        #[test]
        fn doubling_n_divides_se_by_sqrt2(sd in 0.01f64..100.0, n1 in 2usize..10_000, n2 in 2usize..10_000) {
            let a = se_two_mean(sd, n1, n2).unwrap();
            let b = se_two_mean(sd, 2 * n1, 2 * n2).unwrap();
            prop_assert!((a / b - std::f64::consts::SQRT_2).abs() < 1e-12);
        }

        #[test]
        fn conservative_bounds_every_rate(p1 in 0.0f64..=1.0, p2 in 0.0f64..=1.0, n1 in 2usize..1000, n2 in 2usize..1000) {
            let se = se_two_proportion(p1, p2, n1, n2).unwrap();
            prop_assert!(se <= se_conservative_binary(n1, n2).unwrap() + 1e-15);
        }
    }
}
