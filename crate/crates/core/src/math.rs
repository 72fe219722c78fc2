//! Thin wrappers over `libm` so every build uses the same elementary
//! functions, with or without `std`.

use num_complex::Complex;

pub type C64 = Complex<f64>;

pub const TAU: f64 = core::f64::consts::TAU;

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn pow(x: f64, e: f64) -> f64 {
    libm::pow(x, e)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// `ln Γ(x)` for `x > 0`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln j!`.
#[inline]
pub fn ln_factorial(j: u64) -> f64 {
    ln_gamma(j as f64 + 1.0)
}

/// `e^{iθ}`.
#[inline]
pub fn cis(theta: f64) -> C64 {
    let (s, c) = libm::sincos(theta);
    C64::new(c, s)
}

#[inline]
pub fn modulus(z: C64) -> f64 {
    libm::hypot(z.re, z.im)
}

/// `|z|^p`, exact for `p = 2` and `p = 4`.
#[inline]
pub fn abs_pow(z: C64, p: f64) -> f64 {
    let n2 = z.norm_sqr();
    if p == 2.0 {
        n2
    } else if p == 4.0 {
        n2 * n2
    } else {
        pow(n2, 0.5 * p)
    }
}

/// Relative deviation `|a - b| / |b|`, falling back to the absolute
/// deviation when `b = 0`.
pub fn rel_dev(a: C64, b: C64) -> f64 {
    let d = modulus(a - b);
    let s = modulus(b);
    if s == 0.0 {
        d
    } else {
        d / s
    }
}
