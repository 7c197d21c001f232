use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Kendall's tau-b, the tie-adjusted rank correlation, in `O(n log n)`
/// (Knight's merge-sort algorithm).
///
/// ```
/// use bdar::inference::kendall_tau;
/// let tau = kendall_tau(&[1, 2, 3, 4], &[1, 3, 2, 4])?;
/// assert!((tau - 2.0 / 3.0).abs() < 1e-12);
/// # Ok::<(), bdar::Error>(())
/// ```
pub fn kendall_tau<T: PartialOrd + Copy>(x: &[T], y: &[T]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "sequences differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidArgument("Kendall's tau needs at least 2 pairs".into()));
    }
    let cmp = |a: &T, b: &T| {
        a.partial_cmp(b)
            .ok_or_else(|| Error::InvalidArgument("incomparable value".into()))
    };
    for v in x.iter().chain(y) {
        cmp(v, v)?;
    }
    let order = |a: &T, b: &T| a.partial_cmp(b).unwrap_or(Ordering::Equal);

    let mut pairs: Vec<(T, T)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| order(&a.0, &b.0).then_with(|| order(&a.1, &b.1)));

    let n0 = (n * (n - 1) / 2) as u64;
    let mut tied_x = 0u64;
    let mut tied_xy = 0u64;
    let (mut run_x, mut run_xy) = (1u64, 1u64);
    for k in 1..n {
        let same_x = order(&pairs[k].0, &pairs[k - 1].0) == Ordering::Equal;
        let same_y = order(&pairs[k].1, &pairs[k - 1].1) == Ordering::Equal;
        if same_x {
            run_x += 1;
            run_xy = if same_y { run_xy + 1 } else { 1 };
        } else {
            tied_x += run_x * (run_x - 1) / 2;
            run_x = 1;
            run_xy = 1;
        }
        if same_x && same_y {
            tied_xy += run_xy - 1;
        }
    }
    tied_x += run_x * (run_x - 1) / 2;

    let mut ys: Vec<T> = pairs.iter().map(|p| p.1).collect();
    let mut buf = ys.clone();
    let swaps = merge_count(&mut ys, &mut buf, &order);

    let mut tied_y = 0u64;
    let mut run = 1u64;
    for k in 1..n {
        if order(&ys[k], &ys[k - 1]) == Ordering::Equal {
            run += 1;
        } else {
            tied_y += run * (run - 1) / 2;
            run = 1;
        }
    }
    tied_y += run * (run - 1) / 2;

    let denom_x = (n0 - tied_x) as f64;
    let denom_y = (n0 - tied_y) as f64;
    if denom_x == 0.0 || denom_y == 0.0 {
        return Err(Error::InvalidArgument(
            "Kendall's tau is undefined for a constant sequence".into(),
        ));
    }
    let numer = n0 as f64 - tied_x as f64 - tied_y as f64 + tied_xy as f64 - 2.0 * swaps as f64;
    Ok((numer / (denom_x * denom_y).sqrt()).clamp(-1.0, 1.0))
}

/// Stable merge sort of `v` returning the number of inversions.
fn merge_count<T: Copy, F: Fn(&T, &T) -> Ordering>(v: &mut [T], buf: &mut [T], order: &F) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps =
        merge_count(&mut v[..mid], &mut buf[..mid], order) + merge_count(&mut v[mid..], &mut buf[mid..], order);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if order(&v[j], &v[i]) == Ordering::Less {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..].copy_from_slice(&v[j..]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Serial tau-b between `z_t` and `z_{t-lag}`.
pub fn serial_kendall_tau<T: PartialOrd + Copy>(z: &[T], lag: usize) -> Result<f64> {
    if lag == 0 || lag + 2 > z.len() {
        return Err(Error::InvalidArgument(format!(
            "lag {lag} needs 1 <= lag <= len - 2 for a series of length {}",
            z.len()
        )));
    }
    kendall_tau(&z[lag..], &z[..z.len() - lag])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(x: &[i32], y: &[i32]) -> Option<f64> {
        let (mut c, mut d, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
        for i in 0..x.len() {
            for j in 0..i {
                let a = (x[i] - x[j]).signum();
                let b = (y[i] - y[j]).signum();
                match (a, b) {
                    (0, 0) => {}
                    (0, _) => tx += 1,
                    (_, 0) => ty += 1,
                    _ if a == b => c += 1,
                    _ => d += 1,
                }
            }
        }
        let den = (((c + d + tx) * (c + d + ty)) as f64).sqrt();
        (den > 0.0).then(|| (c - d) as f64 / den)
    }

    #[test]
    fn reference_values() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(kendall_tau(&x, &x).unwrap(), 1.0);
        let r = [5.0, 4.0, 3.0, 2.0, 1.0];
        assert_eq!(kendall_tau(&x, &r).unwrap(), -1.0);
        assert!((kendall_tau(&[1, 2, 3, 4], &[1, 3, 2, 4]).unwrap() - 0.667).abs() < 0.001);
    }

    #[test]
    fn errors() {
        assert!(kendall_tau(&[1, 1, 1], &[1, 2, 3]).is_err());
        assert!(kendall_tau(&[1, 2], &[1]).is_err());
        assert!(kendall_tau(&[1], &[1]).is_err());
        assert!(kendall_tau(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
        assert!(serial_kendall_tau(&[1, 2, 3], 2).is_err());
    }

    #[test]
    fn serial_pairs_with_lagged_values() {
        let z = [1, 2, 2, 3, 1, 4, 4, 2];
        assert_eq!(
            serial_kendall_tau(&z, 1).unwrap(),
            kendall_tau(&z[1..], &z[..7]).unwrap()
        );
    }

    proptest! {
        #[test]
        fn matches_pair_counting(pairs in prop::collection::vec((0i32..4, 0i32..5), 2..60)) {
            let x: Vec<i32> = pairs.iter().map(|p| p.0).collect();
            let y: Vec<i32> = pairs.iter().map(|p| p.1).collect();
            match brute_force(&x, &y) {
                Some(t) => prop_assert!((kendall_tau(&x, &y).unwrap() - t).abs() < 1e-12),
                None => prop_assert!(kendall_tau(&x, &y).is_err()),
            }
        }
    }
}
