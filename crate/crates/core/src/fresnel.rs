//! Tail integrals of the quadratic phase `exp(-i λ z²)`.
//!
//! Everything is built on the repeated tails
//!
//! ```text
//! T_k(w) = ∫_w^∞ (z - w)^(k-1) / (k-1)! · exp(-i z²) dz,   k = 1..=4,
//! ```
//!
//! which satisfy `T_k' = -T_(k-1)` with `T_0(w) = exp(-i w²)`. For `w ≥ 0` the
//! scaled tails `exp(i w²) T_k(w)` are smooth and bounded. They are evaluated
//! from Taylor expansions around anchors spaced 1/8 apart on `[0, 8]` and from
//! the asymptotic series beyond. Negative arguments use the reflection through
//! the full-line moments.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Highest tail order carried by the tables.
pub const MAX_ORDER: usize = 4;

const ASYMPTOTIC_FROM: f64 = 8.0;
const ANCHOR_STEP: f64 = 0.125;
const ANCHOR_COUNT: usize = 65;
const EVAL_TERMS: usize = 22;
const BUILD_TERMS: usize = 48;

/// Sign of the quadratic phase in `exp(∓ i λ z²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// `exp(-i λ z²)`
    Negative,
    /// `exp(+i λ z²)`
    Positive,
}

/// A single tail value together with the arguments that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelTail {
    pub value: Complex64,
    pub argument: f64,
    pub phase_scale: f64,
}

impl FresnelTail {
    pub fn evaluate(argument: f64, phase_scale: f64) -> Result<Self> {
        Ok(Self { value: fresnel_tail(argument, phase_scale)?, argument, phase_scale })
    }
}

fn check_scale(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositivePhaseScale(lambda))
    }
}

/// `∫_ξ^∞ exp(-i λ z²) dz` for `λ > 0`.
pub fn fresnel_tail(xi: f64, lambda: f64) -> Result<Complex64> {
    check_scale(lambda)?;
    let root = lambda.sqrt();
    Ok(tail(1, xi * root) / root)
}

/// `∫_ξ^∞ (z - ξ) exp(-i λ z²) dz` for `λ > 0`.
pub fn second_tail(xi: f64, lambda: f64) -> Result<Complex64> {
    check_scale(lambda)?;
    let root = lambda.sqrt();
    Ok(tail(2, xi * root) / lambda)
}

/// `∫_a^b z^k exp(-i λ z²) dz` for `k ∈ {0, 1}`.
pub fn panel_moment(a: f64, b: f64, lambda: f64, k: u32) -> Result<Complex64> {
    panel_moment_with(a, b, lambda, k, Phase::Negative)
}

/// Same as [`panel_moment`] with an explicit phase sign.
pub fn panel_moment_with(a: f64, b: f64, lambda: f64, k: u32, phase: Phase) -> Result<Complex64> {
    check_scale(lambda)?;
    let value = match k {
        0 => {
            if a == b {
                Complex64::new(0.0, 0.0)
            } else if a < 0.0 && b < 0.0 {
                // Both ends on the left: use the mirror image to avoid
                // subtracting two nearly equal full-line values.
                fresnel_tail(-b, lambda)? - fresnel_tail(-a, lambda)?
            } else {
                fresnel_tail(a, lambda)? - fresnel_tail(b, lambda)?
            }
        }
        1 => {
            let ea = Complex64::from_polar(1.0, -lambda * a * a);
            let eb = Complex64::from_polar(1.0, -lambda * b * b);
            (ea - eb) / Complex64::new(0.0, 2.0 * lambda)
        }
        _ => return Err(Error::UnsupportedMomentOrder(k)),
    };
    Ok(match phase {
        Phase::Negative => value,
        Phase::Positive => value.conj(),
    })
}

/// `T_k(0) = Γ(k/2) exp(-iπk/4) / (2 (k-1)!)`.
pub fn tail_at_zero(order: usize) -> Complex64 {
    let (gamma_half, factorial) = match order {
        1 => (PI.sqrt(), 1.0),
        2 => (1.0, 1.0),
        3 => (0.5 * PI.sqrt(), 2.0),
        4 => (1.0, 6.0),
        _ => panic!("tail order {order} out of range"),
    };
    Complex64::from_polar(gamma_half / (2.0 * factorial), -FRAC_PI_4 * order as f64)
}

/// Unscaled tail `T_k(w)` for any real `w`.
pub fn tail(order: usize, w: f64) -> Complex64 {
    if w >= 0.0 {
        Complex64::from_polar(1.0, -w * w) * scaled_tail(order, w)
    } else {
        let a = -w;
        let mirrored = Complex64::from_polar(1.0, -a * a) * scaled_tail(order, a);
        let sign = if order % 2 == 1 { 1.0 } else { -1.0 };
        (full_line_moment(order, a) - mirrored) * sign
    }
}

/// `∫_{-∞}^{∞} (z - w)^(k-1) / (k-1)! · exp(-i z²) dz`, a polynomial in `w`.
fn full_line_moment(order: usize, w: f64) -> Complex64 {
    let m0 = Complex64::from_polar(PI.sqrt(), -FRAC_PI_4);
    let m2 = Complex64::from_polar(0.5 * PI.sqrt(), -3.0 * FRAC_PI_4);
    match order {
        1 => m0,
        2 => -m0 * w,
        3 => (m0 * w * w + m2) * 0.5,
        4 => (-m0 * w * w * w - m2 * 3.0 * w) / 6.0,
        _ => panic!("tail order {order} out of range"),
    }
}

/// Scaled tail `exp(i w²) T_k(w)` for `w ≥ 0`.
pub fn scaled_tail(order: usize, w: f64) -> Complex64 {
    debug_assert!((1..=MAX_ORDER).contains(&order));
    debug_assert!(w >= 0.0);
    if w >= ASYMPTOTIC_FROM {
        return asymptotic(order, w);
    }
    let table = anchors();
    let k = ((w / ANCHOR_STEP).round() as usize).min(ANCHOR_COUNT - 1);
    let h = w - k as f64 * ANCHOR_STEP;
    let coeffs = &table[k][order - 1];
    let mut acc = coeffs[EVAL_TERMS - 1];
    for c in coeffs[..EVAL_TERMS - 1].iter().rev() {
        acc = acc * h + c;
    }
    acc
}

fn asymptotic(order: usize, w: f64) -> Complex64 {
    // exp(i w²) T_k(w) ~ Σ_m (-i)^m / m! · (k-1+2m)!/(k-1)! · (2iw)^-(k+2m)
    let z = Complex64::new(0.0, -0.5 / w);
    let mut term = z.powi(order as i32);
    let mut sum = term;
    let inv_w2 = 1.0 / (w * w);
    let k = order as f64;
    for m in 0..200 {
        let mf = m as f64;
        let ratio = (k + 2.0 * mf) * (k + 2.0 * mf + 1.0) / (4.0 * (mf + 1.0)) * inv_w2;
        term *= Complex64::new(0.0, ratio);
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

type AnchorCoeffs = [[Complex64; EVAL_TERMS]; MAX_ORDER];

fn anchors() -> &'static [AnchorCoeffs] {
    static TABLE: OnceLock<Vec<AnchorCoeffs>> = OnceLock::new();
    TABLE.get_or_init(build_anchors)
}

/// Taylor coefficients of the scaled tails around `w0`, given their values.
///
/// From `u_k' = 2 i w u_k - u_(k-1)` with `u_0 = 1`.
fn taylor(w0: f64, values: &[Complex64; MAX_ORDER], terms: usize) -> Vec<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let i2 = Complex64::new(0.0, 2.0);
    let mut prev = vec![zero; terms];
    prev[0] = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(MAX_ORDER);
    for &v in values {
        let mut c = vec![zero; terms];
        c[0] = v;
        for n in 0..terms - 1 {
            let back = if n > 0 { c[n - 1] } else { zero };
            c[n + 1] = (i2 * w0 * c[n] + i2 * back - prev[n]) / (n as f64 + 1.0);
        }
        out.push(c.clone());
        prev = c;
    }
    out
}

fn step(w0: f64, values: &[Complex64; MAX_ORDER], h: f64) -> [Complex64; MAX_ORDER] {
    let coeffs = taylor(w0, values, BUILD_TERMS);
    let mut next = [Complex64::new(0.0, 0.0); MAX_ORDER];
    for (slot, c) in next.iter_mut().zip(&coeffs) {
        let mut acc = c[BUILD_TERMS - 1];
        for x in c[..BUILD_TERMS - 1].iter().rev() {
            acc = acc * h + x;
        }
        *slot = acc;
    }
    next
}

fn build_anchors() -> Vec<AnchorCoeffs> {
    let mid = (ANCHOR_COUNT - 1) / 2;
    let mut values = vec![[Complex64::new(0.0, 0.0); MAX_ORDER]; ANCHOR_COUNT];
    // March outward from both exactly known ends and meet in the middle.
    let mut v = [tail_at_zero(1), tail_at_zero(2), tail_at_zero(3), tail_at_zero(4)];
    values[0] = v;
    for (k, slot) in values.iter_mut().enumerate().take(mid + 1).skip(1) {
        v = step((k - 1) as f64 * ANCHOR_STEP, &v, ANCHOR_STEP);
        *slot = v;
    }
    let last = ANCHOR_COUNT - 1;
    let w_end = last as f64 * ANCHOR_STEP;
    let mut v = [
        asymptotic(1, w_end),
        asymptotic(2, w_end),
        asymptotic(3, w_end),
        asymptotic(4, w_end),
    ];
    values[last] = v;
    for k in (mid + 1..last).rev() {
        v = step((k + 1) as f64 * ANCHOR_STEP, &v, -ANCHOR_STEP);
        values[k] = v;
    }
    values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let c = taylor(k as f64 * ANCHOR_STEP, v, EVAL_TERMS);
            let mut out = [[Complex64::new(0.0, 0.0); EVAL_TERMS]; MAX_ORDER];
            for (dst, src) in out.iter_mut().zip(&c) {
                dst.copy_from_slice(src);
            }
            out
        })
        .collect()
}

/// Values at the middle anchor reached from each end; used to check the tables.
#[doc(hidden)]
pub fn anchor_seam_mismatch() -> f64 {
    let mid = (ANCHOR_COUNT - 1) / 2;
    let mut v = [tail_at_zero(1), tail_at_zero(2), tail_at_zero(3), tail_at_zero(4)];
    for k in 1..=mid {
        v = step((k - 1) as f64 * ANCHOR_STEP, &v, ANCHOR_STEP);
    }
    let last = ANCHOR_COUNT - 1;
    let mut u = [
        asymptotic(1, last as f64 * ANCHOR_STEP),
        asymptotic(2, last as f64 * ANCHOR_STEP),
        asymptotic(3, last as f64 * ANCHOR_STEP),
        asymptotic(4, last as f64 * ANCHOR_STEP),
    ];
    for k in (mid..last).rev() {
        u = step((k + 1) as f64 * ANCHOR_STEP, &u, -ANCHOR_STEP);
    }
    v.iter().zip(&u).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}
