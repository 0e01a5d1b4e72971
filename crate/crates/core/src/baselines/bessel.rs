use crate::error::{Error, Result};

/// Largest argument accepted by [`bessel_j`].
pub const MAX_ARGUMENT: f64 = 50.0;

/// Below this the alternating power series loses at most a few digits to
/// cancellation (largest term near 4e3 at x = 12).
const SERIES_LIMIT: f64 = 12.0;

/// Bessel function of the first kind, order 0 or 1, for `0 ≤ x ≤ 50`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    if order > 1 {
        return Err(Error::invalid("order", format!("{order} not in {{0, 1}}")));
    }
    if !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::invalid(
            "x",
            format!("{x} outside [0, {MAX_ARGUMENT}]"),
        ));
    }
    Ok(if x <= SERIES_LIMIT {
        series(order, x)
    } else {
        miller(x)[order as usize]
    })
}

pub fn j0(x: f64) -> Result<f64> {
    bessel_j(0, x)
}

pub fn j1(x: f64) -> Result<f64> {
    bessel_j(1, x)
}

/// `Σ_k (−1)^k (x/2)^{2k+ν} / (k! (k+ν)!)`.
pub(crate) fn series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = if order == 0 { 1.0 } else { half };
    let mut sum = term;
    let nu = order as f64;
    for k in 1..200 {
        let k = k as f64;
        term *= q / (k * (k + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && k > half {
            break;
        }
    }
    sum
}

/// `[J0(x), J1(x)]` by Miller's backward recurrence, normalized with
/// `J0 + 2 Σ J_{2k} = 1`.
pub(crate) fn miller(x: f64) -> [f64; 2] {
    let start = 2 * ((x + 30.0 + (40.0 * x).sqrt()) as usize / 2 + 1);
    let mut above = 0.0;
    let mut current = 1e-30;
    let mut norm = 2.0 * current;
    let mut j1 = 0.0;
    for k in (1..=start).rev() {
        let below = 2.0 * k as f64 / x * current - above;
        above = current;
        current = below;
        // current is J_{k-1}
        match k - 1 {
            0 => {}
            1 => j1 = current,
            i if i % 2 == 0 => norm += 2.0 * current,
            _ => {}
        }
        if current.abs() > 1e250 {
            current *= 1e-250;
            above *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += current;
    [current / norm, j1 / norm]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_zero() {
        assert_eq!(j0(0.0).unwrap(), 1.0);
        assert_eq!(j1(0.0).unwrap(), 0.0);
    }

    #[test]
    fn range_checked() {
        assert!(j0(-0.1).is_err());
        assert!(j0(50.1).is_err());
        assert!(bessel_j(2, 1.0).is_err());
        assert!(j1(50.0).is_ok());
    }

    #[test]
    fn j0_at_one_against_partial_sum() {
        // alternating series with decreasing terms: tail below the first omitted term
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 0..=12 {
            if k > 0 {
                term *= -0.25 / (k as f64 * k as f64);
            }
            sum += term;
        }
        let first_omitted = 0.25f64.powi(13) / (1..=13).map(|k| k as f64).product::<f64>().powi(2);
        assert!(first_omitted < 1e-13);
        assert!((j0(1.0).unwrap() - sum).abs() <= first_omitted + 1e-16);
    }

    #[test]
    fn series_and_recurrence_agree_on_overlap() {
        for i in 0..=80 {
            let x = 4.0 + 0.1 * i as f64;
            let [a0, a1] = miller(x);
            assert!((series(0, x) - a0).abs() < 1e-12, "J0({x})");
            assert!((series(1, x) - a1).abs() < 1e-12, "J1({x})");
        }
    }

    #[test]
    fn matches_libm_across_range() {
        for i in 0..=500 {
            let x = 0.1 * i as f64;
            assert!((j0(x).unwrap() - libm::j0(x)).abs() < 1e-12, "J0({x})");
            assert!((j1(x).unwrap() - libm::j1(x)).abs() < 1e-12, "J1({x})");
        }
    }

    #[test]
    fn first_zero_of_j0() {
        assert!(j0(2.4).unwrap() > 0.0);
        assert!(j0(2.41).unwrap() < 0.0);
        assert!(j0(2.404_825_557_695_773).unwrap().abs() < 1e-10);
    }
}
