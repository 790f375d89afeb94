//! Weight ("window") functions for generalized dispersion relations.
//!
//! A window `f(z)` must be analytic in the upper half plane and satisfy
//! `f(-z*) = f(z)*`, which makes `f(i xi)` real. Three families are provided:
//!
//! * [`WindowSpec::Identity`]: `f = 1`, the standard Kramers-Kronig relation.
//! * [`WindowSpec::Sqrt`]: `f(z; b) = z / sqrt(z^2 - b^2)`. Its real part
//!   vanishes below `b` and its imaginary part vanishes above `b`, which keeps
//!   the dispersion kernel positive for conductors with `eps' < 1` below `b`.
//! * [`WindowSpec::OldRational`]: `z^(2p+1) [(z-w)^-(2q+1) + (z+w*)^-(2q+1)]`.
//!   Kept only to reproduce its error amplification; it has zeros on the
//!   imaginary axis and a sign-indefinite kernel.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowSpec {
    Identity,
    /// Deprecated family, retained for instability studies.
    OldRational { p: u32, q: u32, w: Complex64 },
    Sqrt { b: f64 },
}

impl WindowSpec {
    pub fn sqrt(b: f64) -> Self {
        WindowSpec::Sqrt { b }
    }

    pub fn old_rational(p: u32, q: u32, w: Complex64) -> Self {
        WindowSpec::OldRational { p, q, w }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WindowSpec::Identity => Ok(()),
            WindowSpec::Sqrt { b } => {
                if b.is_finite() && b >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("window parameter b = {b} must be >= 0")))
                }
            }
            WindowSpec::OldRational { p, q, w } => {
                if p > q {
                    return Err(Error::invalid(format!("old window needs p <= q, got p={p}, q={q}")));
                }
                if !(w.im < 0.0) || !w.re.is_finite() {
                    return Err(Error::invalid(format!("old window needs Im(w) < 0, got w={w}")));
                }
                Ok(())
            }
        }
    }

    /// True when the window reduces to the standard relation.
    pub fn is_identity(&self) -> bool {
        matches!(self, WindowSpec::Identity) || matches!(self, WindowSpec::Sqrt { b } if *b == 0.0)
    }

    /// Short label used in reports, e.g. `sqrt_b1`.
    pub fn label(&self) -> String {
        match *self {
            WindowSpec::Identity => "kk".to_string(),
            WindowSpec::Sqrt { b } => format!("sqrt_b{b}"),
            WindowSpec::OldRational { p, q, w } => format!("old_p{p}_q{q}_w{}{:+}i", w.re, w.im),
        }
    }

    /// `f(z)` for `z` in the closed upper half plane. The square root uses the
    /// branch `sqrt(z - b) sqrt(z + b)` with principal factors, which is
    /// analytic for `Im z > 0` and tends to 1 at infinity.
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        match *self {
            WindowSpec::Identity => Complex64::new(1.0, 0.0),
            WindowSpec::Sqrt { b } => {
                if b == 0.0 {
                    return Complex64::new(1.0, 0.0);
                }
                z / ((z - b).sqrt() * (z + b).sqrt())
            }
            WindowSpec::OldRational { p, q, w } => {
                let (a, c) = old_terms(z, q, w);
                z.powi(2 * p as i32 - 2 * q as i32) * (a + c)
            }
        }
    }

    /// `f(omega)` on the positive real axis (boundary value from above).
    pub fn eval_real(&self, omega: f64) -> Result<Complex64> {
        if !(omega > 0.0) {
            return Err(Error::invalid(format!("omega must be > 0, got {omega}")));
        }
        match *self {
            WindowSpec::Identity => Ok(Complex64::new(1.0, 0.0)),
            WindowSpec::Sqrt { b } => {
                if b == 0.0 {
                    Ok(Complex64::new(1.0, 0.0))
                } else if omega < b {
                    Ok(Complex64::new(0.0, -omega / (b * b - omega * omega).sqrt()))
                } else if omega > b {
                    Ok(Complex64::new(omega / (omega * omega - b * b).sqrt(), 0.0))
                } else {
                    Err(Error::WindowPole { omega })
                }
            }
            WindowSpec::OldRational { .. } => Ok(self.eval_complex(Complex64::new(omega, 0.0))),
        }
    }

    /// Relative size of `f(i xi)` against the magnitude it would have without
    /// cancellation between its terms. Always 1 for windows without zeros.
    pub fn cancellation_ratio(&self, xi: f64) -> f64 {
        match *self {
            WindowSpec::OldRational { q, w, .. } => {
                let (a, c) = old_terms(Complex64::new(0.0, xi), q, w);
                (a + c).norm() / (a.norm() + c.norm())
            }
            _ => 1.0,
        }
    }

    /// `f(i xi)`, real by symmetry. Fails when the window is numerically at a
    /// zero: cancellation ratio below `zero_threshold`.
    pub fn eval_imag(&self, xi: f64, zero_threshold: f64) -> Result<f64> {
        if !(xi > 0.0) {
            return Err(Error::invalid(format!("xi must be > 0, got {xi}")));
        }
        match *self {
            WindowSpec::Identity => Ok(1.0),
            WindowSpec::Sqrt { b } => Ok(xi / (xi * xi + b * b).sqrt()),
            WindowSpec::OldRational { .. } => {
                let ratio = self.cancellation_ratio(xi);
                if ratio < zero_threshold {
                    return Err(Error::WindowZero { xi, ratio });
                }
                Ok(self.eval_complex(Complex64::new(0.0, xi)).re)
            }
        }
    }

    /// Checks a whole grid against [`WindowSpec::eval_imag`] before any work.
    pub fn check_grid(&self, xi: impl IntoIterator<Item = f64>, zero_threshold: f64) -> Result<()> {
        for x in xi {
            self.eval_imag(x, zero_threshold)?;
        }
        Ok(())
    }
}

// (z/(z-w))^(2q+1) and (z/(z+w*))^(2q+1)
fn old_terms(z: Complex64, q: u32, w: Complex64) -> (Complex64, Complex64) {
    let e = 2 * q as i32 + 1;
    ((z / (z - w)).powi(e), (z / (z + w.conj())).powi(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const THR: f64 = 0.01;

    fn old() -> WindowSpec {
        WindowSpec::old_rational(1, 3, Complex64::new(1.0, -2.0))
    }

    #[test]
    fn sqrt_real_axis_values() {
        let z = WindowSpec::sqrt(0.0);
        assert_eq!(z.eval_real(3.7).unwrap(), Complex64::new(1.0, 0.0));
        let w = WindowSpec::sqrt(1.0).eval_real(2.0).unwrap();
        assert!((w.re - 2.0 / 3f64.sqrt()).abs() < 1e-15 && w.im == 0.0);
        let w = WindowSpec::sqrt(2.0).eval_real(1.0).unwrap();
        assert!(w.re == 0.0 && (w.im + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(matches!(WindowSpec::sqrt(1.0).eval_real(1.0), Err(Error::WindowPole { .. })));
    }

    #[test]
    fn real_axis_matches_boundary_value() {
        let w = WindowSpec::sqrt(1.3);
        for om in [0.2, 1.0, 1.29, 1.31, 4.0] {
            let boundary = w.eval_complex(Complex64::new(om, 1e-12));
            let direct = w.eval_real(om).unwrap();
            assert!((boundary - direct).norm() < 1e-5 * direct.norm());
        }
    }

    #[test]
    fn imag_axis_values() {
        assert!((WindowSpec::sqrt(1.0).eval_imag(1.0, THR).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(WindowSpec::Identity.eval_imag(5.0, THR).unwrap(), 1.0);
        assert!(matches!(old().eval_imag(2.4, THR), Err(Error::WindowZero { .. })));
        assert!(old().eval_imag(2.5, THR).is_ok());
    }

    #[test]
    fn old_window_changes_sign_on_imag_axis() {
        let a = old().eval_imag(2.0, THR).unwrap();
        let b = old().eval_imag(3.0, THR).unwrap();
        assert!(a < 0.0 && b > 0.0);
    }

    #[test]
    fn validation() {
        assert!(WindowSpec::sqrt(-1.0).validate().is_err());
        assert!(WindowSpec::old_rational(3, 1, Complex64::new(1.0, -2.0)).validate().is_err());
        assert!(WindowSpec::old_rational(1, 3, Complex64::new(1.0, 2.0)).validate().is_err());
        assert!(old().validate().is_ok());
    }

    proptest! {
        #[test]
        fn imag_axis_values_are_real(xi in 0.01f64..50.0, b in 0.0f64..5.0) {
            for w in [WindowSpec::Identity, WindowSpec::sqrt(b), old()] {
                let v = w.eval_complex(Complex64::new(0.0, xi));
                prop_assert!(v.im.abs() <= 1e-12 * v.norm().max(1e-300));
            }
        }

        #[test]
        fn reflection_symmetry(x in -10.0f64..10.0, y in 0.01f64..10.0, b in 0.0f64..5.0) {
            let z = Complex64::new(x, y);
            for w in [WindowSpec::sqrt(b), old()] {
                let lhs = w.eval_complex(-z.conj());
                let rhs = w.eval_complex(z).conj();
                prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1e-12));
            }
        }
    }
}
