//! Small floating-point helpers for tolerance contracts stated in ulps.

/// Number of representable doubles strictly between `a` and `b` plus one;
/// zero when they are bitwise equal. Both arguments must be finite and of the
/// same sign (or zero), which is all the tolerance contracts here need.
pub fn ulps_between(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    let key = |x: f64| {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    };
    key(a).abs_diff(key(b))
}

/// True when `a` and `b` are within `n` ulps of each other.
pub fn within_ulps(a: f64, b: f64, n: u64) -> bool {
    ulps_between(a, b) <= n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacent_values_are_one_ulp_apart() {
        let x = 1.0_f64;
        let next = f64::from_bits(x.to_bits() + 1);
        assert_eq!(ulps_between(x, next), 1);
        assert_eq!(ulps_between(x, x), 0);
        assert!(within_ulps(1.0, 1.0 + f64::EPSILON, 4));
        assert!(!within_ulps(1.0, 1.0 + 10.0 * f64::EPSILON, 4));
    }

    #[test]
    fn works_across_zero() {
        assert_eq!(ulps_between(0.0, -0.0), 0);
        assert_eq!(ulps_between(f64::MIN_POSITIVE, 0.0), 1 << 52);
    }
}
