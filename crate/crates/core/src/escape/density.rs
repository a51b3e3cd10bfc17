//! Integration of `|ψ|²` assembled from node-wave groups.
//!
//! Waves from sources near one edge carry the phase `exp(iσλ(x−e)²)` of that
//! edge. Their squared moduli are smooth; products of waves from different
//! edges beat at the constant wavenumber `2λ|e₁−e₂|`, which is integrated by
//! Filon weights once the panels stop resolving it.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::quadrature::{filon_weights, kronrod_points, kronrod_weight_vectors, FILON_THRESHOLD};

/// `Σ_g diag[g] |W_g|² + Σ_(i,j,c) 2c Re(conj(W_i) W_j)`.
#[derive(Debug, Clone)]
pub(crate) struct QuadForm {
    pub anchors: Vec<f64>,
    pub diag: Vec<f64>,
    pub pairs: Vec<(usize, usize, f64)>,
}

impl QuadForm {
    /// `|W_0 + W_1|²` for two groups anchored at `lower` and `upper`.
    pub fn two_groups(lower: f64, upper: f64) -> Self {
        Self { anchors: vec![lower, upper], diag: vec![1.0, 1.0], pairs: vec![(0, 1, 1.0)] }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Integral {
    pub value: f64,
    pub error: f64,
}

impl std::ops::AddAssign for Integral {
    fn add_assign(&mut self, rhs: Self) {
        self.value += rhs.value;
        self.error += rhs.error;
    }
}

/// Integrate `form` over consecutive panels between `breaks`.
///
/// `eval(x, out)` writes the group amplitudes at `x`; `sigma_lambda` is `σλ`.
pub(crate) fn integrate_form<F>(breaks: &[f64], sigma_lambda: f64, form: &QuadForm, eval: F) -> Integral
where
    F: Fn(f64, &mut [Complex64]) + Sync,
{
    let pts = kronrod_points();
    let (wk, wg) = kronrod_weight_vectors();
    let groups = form.anchors.len();
    let parts: Vec<Integral> = breaks
        .par_windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let m = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            let mut amps = vec![Complex64::new(0.0, 0.0); 15 * groups];
            for (i, s) in pts.iter().enumerate() {
                eval(m + h * s, &mut amps[i * groups..(i + 1) * groups]);
            }
            let at = |i: usize, g: usize| amps[i * groups + g];
            let (mut k, mut g) = (0.0, 0.0);
            for i in 0..15 {
                let v: f64 = (0..groups).map(|q| form.diag[q] * at(i, q).norm_sqr()).sum();
                k += wk[i] * v;
                g += wg[i] * v;
            }
            let mut value = k * h.abs();
            let mut error = ((k - g) * h).abs();
            for &(p, q, c) in &form.pairs {
                let (ep, eq) = (form.anchors[p], form.anchors[q]);
                let kappa = 2.0 * sigma_lambda * (ep - eq);
                let kh = kappa * h;
                if kh.abs() < FILON_THRESHOLD {
                    let (mut k, mut g) = (0.0, 0.0);
                    for i in 0..15 {
                        let v = 2.0 * c * (at(i, p).conj() * at(i, q)).re;
                        k += wk[i] * v;
                        g += wg[i] * v;
                    }
                    value += k * h.abs();
                    error += ((k - g) * h).abs();
                } else {
                    let (fk, fg) = filon_weights(kh);
                    let (mut k, mut g) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                    for i in 0..15 {
                        // Strip the linear part of the beat phase relative to the panel centre.
                        let d = at(i, p).conj() * at(i, q) * Complex64::from_polar(1.0, -kh * pts[i]);
                        k += fk[i] * d;
                        g += fg[i] * d;
                    }
                    value += 2.0 * c * k.re * h.abs();
                    error += 2.0 * c.abs() * ((k - g) * h).norm();
                }
            }
            Integral { value, error }
        })
        .collect();
    let mut total = Integral::default();
    for p in parts {
        total += p;
    }
    total
}

/// Panel width at distance `d` from an edge: `ℓ/10` inside `10ℓ`, then growing
/// by about 15% per panel.
pub(crate) fn layer_width(d: f64, ell: f64) -> f64 {
    let fine = 0.1 * ell;
    if d < 10.0 * ell {
        fine
    } else {
        fine + 0.15 * (d - 10.0 * ell)
    }
}

/// Increasing distances from `from` to `to` following [`layer_width`].
pub(crate) fn distances(from: f64, to: f64, ell: f64) -> Vec<f64> {
    let mut out = vec![from];
    let mut d = from;
    while d < to {
        let h = layer_width(d, ell);
        d = if d + 1.5 * h >= to { to } else { d + h };
        out.push(d);
    }
    out
}

/// Breakpoints covering `[left, right]`, refined toward both ends.
pub(crate) fn interior_breaks(left: f64, right: f64, ell: f64) -> Vec<f64> {
    let half = 0.5 * (right - left);
    let d = distances(0.0, half, ell);
    let mut out: Vec<f64> = d.iter().map(|d| left + d).collect();
    out.pop();
    out.push(0.5 * (left + right));
    out.extend(d.iter().rev().skip(1).map(|d| right - d));
    *out.last_mut().unwrap() = right;
    out
}

/// `∫_D^∞ (p/d + q/d²)(r/d + s/d²) dd`.
pub(crate) fn product_tail(p: f64, q: f64, r: f64, s: f64, cutoff: f64) -> f64 {
    let d = cutoff;
    p * r / d + (p * s + q * r) / (2.0 * d * d) + q * s / (3.0 * d * d * d)
}
