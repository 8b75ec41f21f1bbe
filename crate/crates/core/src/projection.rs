//! Euclidean projections.

use crate::error::{Error, Result};
use crate::problem::FeasibleSet;

/// Projects `x` onto `set` in place. For boxes this is the componentwise
/// clamp, for the whole space the identity.
pub fn project_in_place(x: &mut [f64], set: &FeasibleSet) {
    if let FeasibleSet::Box { lower, upper } = set {
        for (i, v) in x.iter_mut().enumerate() {
            let (l, u) = (lower.at(i), upper.at(i));
            if *v < l {
                *v = l;
            } else if *v > u {
                *v = u;
            }
        }
    }
}

/// `argmin_{u ∈ set} ‖u − x‖`.
pub fn project_set(x: &[f64], set: &FeasibleSet) -> Result<Vec<f64>> {
    if let FeasibleSet::Box { lower, upper } = set {
        for bound in [lower, upper] {
            if let crate::problem::Bound::PerCoordinate(v) = bound {
                if v.len() != x.len() {
                    return Err(Error::DimensionMismatch {
                        expected: v.len(),
                        got: x.len(),
                    });
                }
            }
        }
    }
    let mut out = x.to_vec();
    project_in_place(&mut out, set);
    Ok(out)
}

/// `Π_[a,b](t) = max(a, min(t, b))`.
pub fn clamp_interval(t: f64, a: f64, b: f64) -> Result<f64> {
    if !(a <= b) {
        return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}]")));
    }
    Ok(a.max(t.min(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist;
    use crate::problem::Bound;
    use proptest::prelude::*;

    #[test]
    fn box_projection() {
        let half_line = FeasibleSet::lower_bounded(-2.0);
        assert_eq!(
            project_set(&[-3.0, 0.0, 5.0], &half_line).unwrap(),
            vec![-2.0, 0.0, 5.0]
        );
        let orthant = FeasibleSet::nonnegative_orthant();
        assert_eq!(project_set(&[-1.0, 2.0], &orthant).unwrap(), vec![0.0, 2.0]);
        let x = [-1e300, 3.5, f64::MAX];
        assert_eq!(
            project_set(&x, &FeasibleSet::WholeSpace).unwrap(),
            x.to_vec()
        );
    }

    #[test]
    fn per_coordinate_dimension_checked() {
        let set =
            FeasibleSet::boxed(Bound::PerCoordinate(vec![0.0; 3]), Bound::Uniform(1.0)).unwrap();
        assert!(project_set(&[0.5; 2], &set).is_err());
        assert_eq!(
            project_set(&[-1.0, 0.5, 2.0], &set).unwrap(),
            vec![0.0, 0.5, 1.0]
        );
    }

    #[test]
    fn interval_clamp() {
        assert_eq!(clamp_interval(0.3, 0.55, 4.9).unwrap(), 0.55);
        assert_eq!(clamp_interval(10.0, 0.55, 4.9).unwrap(), 4.9);
        assert_eq!(clamp_interval(1.2, 0.55, 4.9).unwrap(), 1.2);
        assert!(clamp_interval(1.0, 2.0, 1.0).is_err());
    }

    fn arb_box() -> impl Strategy<Value = FeasibleSet> {
        prop::collection::vec((-5.0f64..5.0, 0.0f64..5.0, any::<bool>(), any::<bool>()), 6)
            .prop_map(|spec| {
                let lower = spec
                    .iter()
                    .map(|&(l, _, lo_inf, _)| if lo_inf { f64::NEG_INFINITY } else { l })
                    .collect();
                let upper = spec
                    .iter()
                    .map(|&(l, w, _, up_inf)| if up_inf { f64::INFINITY } else { l + w })
                    .collect();
                FeasibleSet::boxed(Bound::PerCoordinate(lower), Bound::PerCoordinate(upper))
                    .unwrap()
            })
    }

    proptest! {
        #[test]
        fn idempotent(set in arb_box(), x in prop::collection::vec(-10.0f64..10.0, 6)) {
            let once = project_set(&x, &set).unwrap();
            prop_assert!(set.contains(&once));
            prop_assert_eq!(project_set(&once, &set).unwrap(), once);
        }

        #[test]
        fn non_expansive(
            set in arb_box(),
            x in prop::collection::vec(-10.0f64..10.0, 6),
            y in prop::collection::vec(-10.0f64..10.0, 6),
        ) {
            let px = project_set(&x, &set).unwrap();
            let py = project_set(&y, &set).unwrap();
            prop_assert!(dist(&px, &py) <= dist(&x, &y) + 1e-12);
        }

        #[test]
        fn clamp_in_interval(t in -1e6f64..1e6, a in -10.0f64..10.0, w in 0.0f64..10.0) {
            let c = clamp_interval(t, a, a + w).unwrap();
            prop_assert!(c >= a && c <= a + w);
        }
    }
}
