//! Slack-tolerant comparisons for inequality checks.

/// Default relative slack: absorbs rounding only.
pub const DEFAULT_SLACK: f64 = 1e-12;

/// Absolute floor added to every right-hand side.
pub const ABS_FLOOR: f64 = 1e-300;

/// `lhs <= rhs (1 + slack) + 1e-300`; false if either side is not finite.
#[inline]
pub fn holds(lhs: f64, rhs: f64, slack: f64) -> bool {
    lhs.is_finite() && rhs.is_finite() && lhs <= rhs * (1.0 + slack) + ABS_FLOOR
}

/// `lhs / rhs`, with `0/0 = 0` and `x/0 = inf` for `x > 0`.
#[inline]
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_semantics() {
        assert!(holds(0.0, 0.0, 0.0));
        assert!(holds(1.0 + 1e-13, 1.0, 1e-12));
        assert!(!holds(1.0 + 1e-11, 1.0, 1e-12));
        assert!(!holds(f64::NAN, 1.0, 1e-12));
        assert!(!holds(1.0, f64::INFINITY, 1e-12));
        assert!(!holds(0.6, 1.0, -0.5));
        assert_eq!(ratio(0.0, 0.0), 0.0);
        assert_eq!(ratio(1.0, 0.0), f64::INFINITY);
    }
}
