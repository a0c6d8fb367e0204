//! The sinc kernel of one grid cell and rigorous enclosures of
//! `S_r(x) = sum_n |sin x / (x - n pi)|^r`.
//!
//! `S_2 = 1` identically, and `S_r <= 1` for `r >= 2` since every term is at
//! most 1 in modulus. The sum depends only on `x mod pi`, so it is evaluated at
//! the reduced argument `e = x - m pi`, `|e| <= pi/2`, with terms
//! `|sin e / (e + k pi)|^r` for `|k| <= N` and an enclosed tail.

use std::f64::consts::PI;

/// Low-order part of pi, for argument reduction.
const PI_LO: f64 = 1.224_646_799_147_353_2e-16;

/// Below this `|x|`, `sin x / x` is evaluated by its Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-4;

pub const DEFAULT_TRUNCATION: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

impl Enclosure {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn radius(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
}

/// `sin x / x`, with the removable singularity handled by series.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SERIES_THRESHOLD {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// Spectrum factor of one cell of width `delta`: `sin(delta s / 2) / (s / 2)`,
/// equal to `delta` at `s = 0`.
pub fn cell_factor(delta: f64, s: f64) -> f64 {
    delta * sinc(0.5 * delta * s)
}

/// Reduced argument `x - m pi` with `m = round(x / pi)`.
pub fn reduce(x: f64) -> (i64, f64) {
    let m = (x / PI).round();
    let e = (-m).mul_add(PI, x) - m * PI_LO;
    (m as i64, e)
}

/// Distance from `x` to the nearest multiple of pi.
pub fn pole_distance(x: f64) -> f64 {
    reduce(x).1.abs()
}

/// Enclosure of `sum_{k > N} (k pi + c)^(-r)` for `|c| <= pi/2`, `r > 1`.
///
/// `h(t) = (t pi + c)^(-r)` is convex and decreasing, so the midpoint rule
/// under-estimates each unit integral: `sum h(k) <= int_{N+1/2}^inf h`. The
/// midpoint defect on `[k-1/2, k+1/2]` is at most `h''(k-1/2)/24`; summing
/// and bounding by an integral gives the lower end.
fn tail(c: f64, r: f64, n: usize) -> Enclosure {
    let u = (n as f64 + 0.5) * PI + c;
    let upper = u.powf(1.0 - r) / (PI * (r - 1.0));
    let d2 = r * (r + 1.0) * PI * PI * u.powf(-r - 2.0);
    let d1 = r * PI * u.powf(-r - 1.0);
    Enclosure { lo: (upper - (d2 + d1) / 24.0).max(0.0), hi: upper }
}

/// Enclosure of `S_r(x)` using terms `|k| <= n` around the nearest pole.
pub fn sinc_power_sum(x: f64, r: f64, n: usize) -> Enclosure {
    assert!(r > 1.0, "exponent must exceed 1");
    let n = n.max(1);
    let (_, e) = reduce(x);
    if e == 0.0 {
        return Enclosure { lo: 1.0, hi: 1.0 };
    }
    let s = e.sin().abs();
    let mut partial = 0.0;
    for k in (1..=n).rev() {
        let kp = k as f64 * PI;
        partial += (s / (kp + e)).powf(r) + (s / (kp - e)).powf(r);
    }
    partial += sinc(e).abs().powf(r);
    let sr = s.powf(r);
    let (t1, t2) = (tail(e, r, n), tail(-e, r, n));
    let rounding = 4.0 * (n as f64) * f64::EPSILON * partial;
    Enclosure {
        lo: partial + sr * (t1.lo + t2.lo) - rounding,
        hi: partial + sr * (t1.hi + t2.hi) + rounding,
    }
}

/// Periodization kernel `K_r(phi) = S_r(phi / 2)` for `phi` in `[-pi, pi]`.
pub fn fold_kernel(phi: f64, r: f64, n: usize) -> Enclosure {
    sinc_power_sum(0.5 * phi, r, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(x: f64, r: f64, n: i64) -> f64 {
        // smallest terms first, so they are not absorbed by the large ones
        let term = |k: i64| (x.sin() / (x - k as f64 * PI)).abs().powf(r);
        (1..=n).rev().map(|k| term(k) + term(-k)).sum::<f64>() + term(0)
    }

    #[test]
    fn square_sum_is_one() {
        // sum_n 1/(x - n)^2 = pi^2 / sin^2(pi x)
        for &x in &[0.1, 0.7, 1.3, 2.9, 3.3, 7.0, 12.0, -4.4] {
            let e = sinc_power_sum(x, 2.0, DEFAULT_TRUNCATION);
            assert!(e.lo <= 1.0 + 1e-14 && e.hi >= 1.0 - 1e-14, "{x}: {e:?}");
            assert!(e.hi - e.lo < 1e-10);
        }
    }

    #[test]
    fn quartic_sum_at_half_pi() {
        // (2/pi)^4 * 2 * sum_{odd k} k^-4 = (2/pi)^4 * 2 * pi^4 / 96 = 1/3
        let e = sinc_power_sum(PI / 2.0, 4.0, 200);
        assert!(e.lo <= 1.0 / 3.0 && 1.0 / 3.0 <= e.hi, "{e:?}");
        assert!(e.hi - e.lo < 1e-12);
    }

    #[test]
    fn encloses_long_brute_force_sums() {
        for &(x, r) in &[(0.4, 2.5), (2.0, 3.0), (5.5, 2.2), (10.0, 4.0)] {
            let e = sinc_power_sum(x, r, 200);
            let b = brute(x, r, 2_000_000);
            // the brute-force sum misses a tail of at most ~ (2e6 pi)^(1-r)
            assert!(b <= e.hi + 1e-13, "{x} {r}: {b} vs {e:?}");
            assert!(b >= e.lo - 2.0 * (2e6 * PI).powf(1.0 - r), "{x} {r}: {b} vs {e:?}");
        }
    }

    #[test]
    fn near_zero_limit() {
        let e = sinc_power_sum(1e-9, 3.0, 100);
        assert!((e.mid() - 1.0).abs() < 1e-12);
        assert_eq!(sinc(0.0), 1.0);
        assert!((cell_factor(0.5, 1e-7) - 0.5).abs() < 1e-15);
        let s: f64 = 3.0;
        assert!((cell_factor(0.5, s) - (0.25 * s).sin() / (0.5 * s)).abs() < 1e-16);
    }

    #[test]
    fn reduction_is_accurate_near_poles() {
        let (m, e) = reduce(3.0 * PI + 1e-7);
        assert_eq!(m, 3);
        assert!((e - 1e-7).abs() < 1e-14);
        assert!(pole_distance(2.0 * PI) < 1e-15);
    }
}
