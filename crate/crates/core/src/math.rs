//! Float helpers routed through `libm` so results do not depend on the
//! platform math library.

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// Correctly rounded either way; the std version lets loops vectorize.
#[cfg(feature = "std")]
#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

#[cfg(not(feature = "std"))]
#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

/// Exact floor. Magnitudes from 2^52 up are already integral, and NaN
/// falls through unchanged.
#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    const INTEGRAL: f64 = 4_503_599_627_370_496.0;
    if x.abs() < INTEGRAL {
        let t = x as i64 as f64;
        if t > x {
            t - 1.0
        } else if t == x {
            x
        } else {
            t
        }
    } else {
        x
    }
}

/// Rounds half-up and saturates to `0..=255`. The saturating cast truncates,
/// which equals the floor for every value it does not clamp to zero.
#[inline]
pub(crate) fn to_u8(x: f64) -> u8 {
    (x + 0.5) as u8
}

/// Index into `0..len` after mirroring out-of-range coordinates across the
/// border, repeating the edge sample (`-1 -> 0`, `len -> len - 1`).
#[inline]
pub(crate) fn reflect(i: isize, len: usize) -> usize {
    debug_assert!(len > 0);
    let n = len as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m >= n { period - 1 - m } else { m }) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflect_mirrors_with_edge_repeat() {
        assert_eq!(reflect(-1, 5), 0);
        assert_eq!(reflect(-2, 5), 1);
        assert_eq!(reflect(5, 5), 4);
        assert_eq!(reflect(6, 5), 3);
        assert_eq!(reflect(3, 5), 3);
        // single-sample axis folds onto itself
        for i in -7..7 {
            assert_eq!(reflect(i, 1), 0);
        }
    }

    #[test]
    fn floor_matches_libm() {
        let cases = [
            0.0,
            -0.0,
            0.5,
            -0.5,
            1.0,
            -1.0,
            2.999_999,
            -2.000_001,
            1e15 + 0.5,
            -1e15 - 0.5,
            4_503_599_627_370_495.5,
            1e300,
            -1e300,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ];
        for x in cases {
            assert_eq!(floor(x).to_bits(), libm::floor(x).to_bits(), "{x}");
        }
        assert!(floor(f64::NAN).is_nan());
    }

    #[test]
    fn saturating_rounding_matches_floor_and_clamp() {
        let reference = |x: f64| {
            let r = libm::floor(x + 0.5);
            if r.is_nan() || r <= 0.0 {
                0
            } else if r >= 255.0 {
                255
            } else {
                r as u8
            }
        };
        let mut x = -3.0;
        while x < 260.0 {
            assert_eq!(to_u8(x), reference(x), "{x}");
            x += 0.125;
        }
        for x in [
            f64::NAN,
            f64::INFINITY,
            f64::NEG_INFINITY,
            -0.5,
            -0.499_999,
            254.5,
            254.499_999,
        ] {
            assert_eq!(to_u8(x), reference(x), "{x}");
        }
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(to_u8(127.5), 128);
        assert_eq!(to_u8(127.49), 127);
        assert_eq!(to_u8(-3.0), 0);
        assert_eq!(to_u8(300.0), 255);
    }
}
