//! Price-of-fairness metrics and the hybrid rule's utility functions.
//!
//! The hybrid utilities come in three forms: the strict lexicographic hybrid
//! (zero outside its acceptance set), the relaxed two-class piecewise form,
//! and the multi-class generalization with signed offsets. The two-class form
//! is continuous across the region boundary; the multi-class form is
//! implemented verbatim and is *not* continuous at every boundary for three
//! or more classes (see the regression test pinning utilities (5,4,3) with
//! delta 2, where the fair branch yields 15 against a utilitarian-side 16).

use super::{FairnessError, Region};
use crate::solver::VALUE_EPS;

/// Price of fairness `(u_E - u_f) / u_E`, with the `0/0 -> 0` convention.
/// Both utilities must be measured with the original edge weights; a fair
/// utility exceeding the efficient one signals a solver bug.
pub fn pof(u_efficient: f64, u_fair: f64) -> Result<f64, FairnessError> {
    if u_fair > u_efficient + VALUE_EPS {
        return Err(FairnessError::FairExceedsEfficient {
            u_efficient,
            u_fair,
        });
    }
    if u_efficient == 0.0 {
        return Ok(0.0);
    }
    Ok(((u_efficient - u_fair) / u_efficient).max(0.0))
}

/// Fraction of the maximum highly sensitized utility, `u_H(M) / u_H(M_F)`,
/// with the `0/0 -> 1` convention (no fair utility to lose).
pub fn percent_fair(u_h_of_m: f64, u_h_of_mf: f64) -> f64 {
    if u_h_of_mf == 0.0 {
        1.0
    } else {
        u_h_of_m / u_h_of_mf
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Which branch of the hybrid utility a class-utility vector falls in:
/// fair when `max - min <= delta`, utilitarian otherwise. This is the exact
/// condition used by [`u_delta_multi`].
pub fn delta_region(utilities: &[f64], delta: f64) -> Region {
    let max = utilities.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = utilities.iter().cloned().fold(f64::INFINITY, f64::min);
    if max - min <= delta {
        Region::Fair
    } else {
        Region::Utilitarian
    }
}

/// Relaxed two-class hybrid utility with the prioritized class first:
/// `u_L + u_H - delta` when `u_L - u_H > delta`, `2 u_H` in the fair band,
/// `u_L + u_H + delta` when `u_H - u_L > delta`.
pub fn u_delta_two_class(u_h: f64, u_l: f64, delta: f64) -> f64 {
    // Written with the same association as the multi-class form so the
    // two-class reduction is an exact float identity.
    if u_l - u_h > delta {
        u_h + (u_l + -delta)
    } else if u_h - u_l > delta {
        u_h + (u_l + delta)
    } else {
        2.0 * u_h
    }
}

/// Multi-class hybrid utility, classes ordered most-preferred first:
/// `k * u_1` when `max - min <= delta`, otherwise
/// `u_1 + sum_{i>=2} (u_i + sgn(u_1 - u_i) * delta)` with `sgn(0) = 0`.
pub fn u_delta_multi(utilities: &[f64], delta: f64) -> f64 {
    assert!(!utilities.is_empty(), "need at least one class");
    match delta_region(utilities, delta) {
        Region::Fair => utilities.len() as f64 * utilities[0],
        _ => {
            let u1 = utilities[0];
            let mut acc = u1;
            for &u in &utilities[1..] {
                acc += u + sgn(u1 - u) * delta;
            }
            acc
        }
    }
}

/// Strict lexicographic hybrid utility: inside the fair band it pays
/// `u_1 + u_2` only when `u_1` attains its global maximum (zero otherwise);
/// outside the band it is plain utilitarian.
pub fn u_delta_strict(u_1: f64, u_2: f64, delta: f64, u_1_max: f64) -> f64 {
    if (u_1 - u_2).abs() <= delta {
        if (u_1 - u_1_max).abs() <= VALUE_EPS {
            u_1 + u_2
        } else {
            0.0
        }
    } else {
        u_1 + u_2
    }
}

/// Worst-case price of fairness of the hybrid rule:
/// `2 ((|P| - 1) - Z) delta / u_E`, where `Z` counts classes the efficient
/// outcome already favors less than class 1.
pub fn hybrid_pof_bound(
    num_classes: usize,
    z: usize,
    delta: f64,
    u_efficient: f64,
) -> Result<f64, FairnessError> {
    assert!(num_classes >= 1 && z <= num_classes - 1, "Z must not exceed |P|-1");
    if u_efficient <= 0.0 {
        return Err(FairnessError::DegenerateBound);
    }
    Ok(2.0 * ((num_classes - 1 - z) as f64) * delta / u_efficient)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pof_basic_values() {
        assert_eq!(pof(4.0, 2.0).unwrap(), 0.5);
        assert_eq!(pof(7.25, 7.25).unwrap(), 0.0);
        assert_eq!(pof(0.0, 0.0).unwrap(), 0.0);
        assert!(matches!(
            pof(1.0, 2.0),
            Err(FairnessError::FairExceedsEfficient { .. })
        ));
    }

    #[test]
    fn percent_fair_conventions() {
        assert_eq!(percent_fair(1.0, 2.0), 0.5);
        assert_eq!(percent_fair(0.0, 0.0), 1.0);
        assert_eq!(percent_fair(3.0, 3.0), 1.0);
    }

    #[test]
    fn two_class_branches() {
        assert_eq!(u_delta_two_class(3.0, 3.0, 2.0), 6.0);
        assert_eq!(u_delta_two_class(1.0, 5.0, 2.0), 4.0);
        assert_eq!(u_delta_two_class(5.0, 1.0, 2.0), 8.0);
    }

    #[test]
    fn multi_reduces_to_two_class() {
        // Spot values; the exhaustive property lives in the acceptance suite.
        for (h, l, d) in [(3.0, 3.0, 2.0), (1.0, 5.0, 2.0), (5.0, 1.0, 2.0), (0.0, 0.0, 0.0)] {
            assert_eq!(u_delta_multi(&[h, l], d), u_delta_two_class(h, l, d));
        }
    }

    #[test]
    fn multi_fair_branch() {
        assert_eq!(u_delta_multi(&[5.0, 5.0, 3.0], 2.0), 15.0);
    }

    #[test]
    fn multi_boundary_discontinuity_pinned() {
        // (5,4,3) with delta 2 sits on the fair boundary: the fair branch
        // scores 15 while the utilitarian formula at the same point gives 16.
        let fair = u_delta_multi(&[5.0, 4.0, 3.0], 2.0);
        assert_eq!(fair, 15.0);
        let utilitarian_formula = 5.0 + (4.0 + 2.0) + (3.0 + 2.0);
        assert_eq!(utilitarian_formula, 16.0);
        assert_ne!(fair, utilitarian_formula);
    }

    #[test]
    fn strict_branches() {
        // fair-region point not maximizing u_1 gets zero
        assert_eq!(u_delta_strict(2.0, 3.0, 2.0, 5.0), 0.0);
        assert_eq!(u_delta_strict(5.0, 4.0, 2.0, 5.0), 9.0);
        // utilitarian-region point keeps its value
        assert_eq!(u_delta_strict(1.0, 9.0, 2.0, 5.0), 10.0);
    }

    #[test]
    fn hybrid_bound_values() {
        assert_eq!(hybrid_pof_bound(2, 0, 5.0, 100.0).unwrap(), 0.1);
        assert_eq!(hybrid_pof_bound(2, 1, 7.0, 3.0).unwrap(), 0.0);
        assert_eq!(hybrid_pof_bound(4, 1, 1.0, 8.0).unwrap(), 0.5);
        assert!(matches!(
            hybrid_pof_bound(2, 0, 1.0, 0.0),
            Err(FairnessError::DegenerateBound)
        ));
    }
}
