/// Fills gaps in a daily series.
///
/// Interior gaps are linear between the nearest present neighbours;
/// leading and trailing gaps repeat the nearest present value. Present
/// values are copied unchanged. Returns `None` when nothing is present.
pub fn interpolate_missing(series: &[Option<f64>]) -> Option<Vec<f64>> {
    let present: Vec<(usize, f64)> = series
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .collect();
    let (&(first_i, first_v), &(last_i, last_v)) = (present.first()?, present.last()?);

    let mut out = vec![0.0; series.len()];
    out[..first_i].fill(first_v);
    out[last_i + 1..].fill(last_v);
    for pair in present.windows(2) {
        let (i0, v0) = pair[0];
        let (i1, v1) = pair[1];
        out[i0] = v0;
        let span = (i1 - i0) as f64;
        for (k, slot) in out.iter_mut().enumerate().take(i1).skip(i0 + 1) {
            let w = (k - i0) as f64 / span;
            *slot = v0 + (v1 - v0) * w;
        }
    }
    out[last_i] = last_v;
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn midpoint() {
        assert_eq!(
            interpolate_missing(&[Some(1.0), None, Some(3.0)]).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn constant_head_fill() {
        assert_eq!(
            interpolate_missing(&[None, None, Some(5.0), Some(7.0)]).unwrap(),
            vec![5.0, 5.0, 5.0, 7.0]
        );
    }

    #[test]
    fn two_interior_points() {
        assert_eq!(
            interpolate_missing(&[Some(4.0), None, None, Some(10.0)]).unwrap(),
            vec![4.0, 6.0, 8.0, 10.0]
        );
    }

    #[test]
    fn constant_tail_fill() {
        assert_eq!(
            interpolate_missing(&[Some(2.0), None, None]).unwrap(),
            vec![2.0, 2.0, 2.0]
        );
    }

    #[test]
    fn all_absent() {
        assert_eq!(interpolate_missing(&[None, None]), None);
    }

    fn series() -> impl Strategy<Value = Vec<Option<f64>>> {
        proptest::collection::vec(
            prop_oneof![Just(None), (-50.0f64..50.0).prop_map(Some)],
            1..60,
        )
        .prop_filter("needs a value", |s| s.iter().any(Option::is_some))
    }

    proptest! {
        #[test]
        fn present_values_kept_and_gaps_linear(s in series()) {
            let out = interpolate_missing(&s).unwrap();
            prop_assert_eq!(out.len(), s.len());
            for (o, v) in out.iter().zip(&s) {
                if let Some(v) = v {
                    prop_assert_eq!(o, v);
                }
            }
            // Second differences vanish inside every filled interior gap.
            let idx: Vec<usize> = s.iter().enumerate().filter(|(_, v)| v.is_some()).map(|(i, _)| i).collect();
            for pair in idx.windows(2) {
                for k in pair[0] + 1..pair[1] {
                    let d2 = out[k + 1] - 2.0 * out[k] + out[k - 1];
                    prop_assert!(d2.abs() < 1e-9, "second difference {} at {}", d2, k);
                }
            }
        }
    }
}
