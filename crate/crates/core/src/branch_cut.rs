//! Square root with a configurable branch cut.
//!
//! `branch_sqrt(z, a)` evaluates `sqrt(|z|) * exp(i * arg_a(z) / 2)` where the
//! argument is taken in the window `[a, a + 2*pi)`. The result squares back to
//! `z` everywhere and is continuous except across the ray `{ r*exp(i*a), r >= 0 }`.
//!
//! The composite dispersion root used elsewhere in this crate takes `a = -pi/2`
//! so that both of its cuts point straight down into the lower half-plane.

use num_complex::Complex64;
use std::f64::consts::TAU;

/// Argument of `z` reduced into the window `[a, a + 2*pi)`.
pub fn arg_in_window(z: Complex64, a: f64) -> f64 {
    let mut arg = z.arg(); // (-pi, pi]
    while arg < a {
        arg += TAU;
    }
    while arg >= a + TAU {
        arg -= TAU;
    }
    arg
}

/// Square root with the cut along the ray of angle `a`. Returns 0 for `z = 0`.
pub fn branch_sqrt(z: Complex64, a: f64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let half = 0.5 * arg_in_window(z, a);
    // Exact negative reals map to the exact imaginary axis; from_polar would
    // leave a cos(pi/2) residue of ~6e-17 otherwise.
    if half == std::f64::consts::FRAC_PI_2 {
        return Complex64::new(0.0, r.sqrt());
    }
    Complex64::from_polar(r.sqrt(), half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    const A: f64 = -FRAC_PI_2;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn pinned_values() {
        assert!(close(
            branch_sqrt(Complex64::new(1.0, 0.0), A),
            Complex64::new(1.0, 0.0),
            1e-15
        ));
        // arg_{-pi/2}(-1) = pi, so the root of -1 is +i.
        assert!(close(
            branch_sqrt(Complex64::new(-1.0, 0.0), A),
            Complex64::new(0.0, 1.0),
            1e-15
        ));
        // arg_{-pi/2}(-i) = -pi/2, so the root is exp(-i pi/4).
        assert!(close(
            branch_sqrt(Complex64::new(0.0, -1.0), A),
            Complex64::from_polar(1.0, -FRAC_PI_4),
            1e-15
        ));
        assert_eq!(
            branch_sqrt(Complex64::new(0.0, 0.0), A),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn continuous_across_positive_axis_and_upper_half_plane() {
        let eps = 1e-9;
        for r in [0.3, 1.0, 17.0] {
            let above = branch_sqrt(Complex64::new(r, eps), A);
            let below = branch_sqrt(Complex64::new(r, -eps), A);
            assert!((above - below).norm() < 1e-8 * r.sqrt());
        }
        // Walk an upper-half-plane arc: neighbouring samples stay close.
        let n = 720;
        let mut prev = branch_sqrt(Complex64::from_polar(2.0, 1e-3), A);
        for j in 1..=n {
            let th = 1e-3 + (PI - 2e-3) * j as f64 / n as f64;
            let cur = branch_sqrt(Complex64::from_polar(2.0, th), A);
            assert!((cur - prev).norm() < 0.05);
            prev = cur;
        }
    }

    #[test]
    fn jumps_only_across_the_cut_ray() {
        let eps = 1e-9;
        for r in [0.5, 2.0, 50.0] {
            let left = branch_sqrt(Complex64::from_polar(r, -FRAC_PI_2 - eps), A);
            let right = branch_sqrt(Complex64::from_polar(r, -FRAC_PI_2 + eps), A);
            // Opposite signs across the cut.
            assert!((left + right).norm() < 1e-7 * r.sqrt());
            assert!((left - right).norm() > 1.9 * r.sqrt());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn square_recovers_input(re in -1e3f64..1e3, im in -1e3f64..1e3) {
            let z = Complex64::new(re, im);
            let s = branch_sqrt(z, A);
            let err = (s * s - z).norm();
            prop_assert!(err <= 1e-12 * z.norm().max(1e-300));
        }

        #[test]
        fn window_is_respected(re in -1e3f64..1e3, im in -1e3f64..1e3) {
            let z = Complex64::new(re, im);
            prop_assume!(z.norm() > 0.0);
            let arg = arg_in_window(z, A);
            prop_assert!((A..A + TAU).contains(&arg));
        }
    }
}
