//! Escape probabilities, survival, energy moments and power-law fits.

mod density;
pub mod fit;
pub mod moments;
pub mod overlap;
pub mod scan;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::propagator::{check_dt, FreeKernel, KernelConvention};
use crate::wavefunc::SampledWaveFunction;

use density::{distances, integrate_form, interior_breaks, product_tail, Integral, QuadForm};

pub use fit::{fit_power_law, PowerLawFit};
pub use moments::{moment_stats, MomentStats};
pub use overlap::{survival_deficit, SurvivalResult};
pub use scan::{log_grid, offset_scan, OffsetRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    RightRay,
    LeftRay,
    BothRays,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::RightRay => "right",
            Region::LeftRay => "left",
            Region::BothRays => "both",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "right" => Ok(Region::RightRay),
            "left" => Ok(Region::LeftRay),
            "both" => Ok(Region::BothRays),
            _ => Err(Error::InvalidParameter(format!("unknown region `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeResult {
    pub dt: f64,
    pub delta: f64,
    pub region: Region,
    pub probability: f64,
    pub est_error: f64,
}

/// Stop extending the cutoff once the tail bound is below this fraction.
const TAIL_TARGET: f64 = 1e-3;
/// Give up if the tail bound still exceeds this fraction.
const TAIL_LIMIT: f64 = 1e-2;
const MAX_DOUBLINGS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Right,
    Left,
}

struct Ray {
    integral: Integral,
    tail: f64,
    breaks: Vec<f64>,
}

/// Map distances from the edge to increasing positions on the chosen ray.
fn ray_positions(edge: f64, side: Side, d: &[f64]) -> Vec<f64> {
    match side {
        Side::Right => d.iter().map(|d| edge + d).collect(),
        Side::Left => d.iter().rev().map(|d| edge - d).collect(),
    }
}

fn ray(kernel: &FreeKernel, side: Side, delta: f64, split: f64) -> Result<Ray> {
    let span = kernel.span();
    let edge = if side == Side::Right { span.right } else { span.left };
    let ell = 1.0 / kernel.root();
    let form = QuadForm::two_groups(span.left, span.right);
    let sigma_lambda = kernel.convention.phase_sign() * kernel.lambda;
    let eval = |x: f64, out: &mut [Complex64]| {
        let (lo, up) = kernel.waves(x, split);
        out[0] = lo;
        out[1] = up;
    };
    let (a, b) = kernel.far_field_coefficients(|_| true);
    let mut cutoff = 10.0f64.max(50.0 * ell).max(2.0 * delta);
    let mut d = distances(delta, cutoff, ell);
    let mut integral = integrate_form(&ray_positions(edge, side, &d), sigma_lambda, &form, eval);
    let mut tail = product_tail(a, b, a, b, cutoff);
    for _ in 0..MAX_DOUBLINGS {
        if tail <= TAIL_TARGET * integral.value {
            break;
        }
        let more = distances(cutoff, 2.0 * cutoff, ell);
        integral += integrate_form(&ray_positions(edge, side, &more), sigma_lambda, &form, eval);
        d.extend_from_slice(&more[1..]);
        cutoff *= 2.0;
        tail = product_tail(a, b, a, b, cutoff);
    }
    if tail > TAIL_LIMIT * integral.value && tail > f64::MIN_POSITIVE {
        return Err(Error::TailTooLarge { bound: tail, probability: integral.value });
    }
    // Leading far-field term of each edge wave, `|g_e|² / (4πλ d²)`, beyond the cutoff.
    let end = if side == Side::Right { edge + cutoff } else { edge - cutoff };
    let (g0, gn) = kernel.edge_values();
    for (e, g) in [(span.left, g0), (span.right, gn)] {
        integral.value += g.norm_sqr() / (4.0 * PI * kernel.lambda * (end - e).abs());
    }
    Ok(Ray { integral, tail, breaks: ray_positions(edge, side, &d) })
}

fn check_delta(delta: f64) -> Result<()> {
    if delta >= 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("offset must be non-negative, got {delta}")))
    }
}

/// `∫|ψ(x,dt)|²` over the ray(s) starting `delta` beyond the support edge(s).
pub fn escape_probability(
    wave: &SampledWaveFunction,
    dt: f64,
    delta: f64,
    region: Region,
    convention: KernelConvention,
) -> Result<EscapeResult> {
    check_dt(dt)?;
    check_delta(delta)?;
    let kernel = FreeKernel::new(wave, dt, convention);
    escape_with(&kernel, dt, delta, region)
}

pub(crate) fn escape_with(kernel: &FreeKernel, dt: f64, delta: f64, region: Region) -> Result<EscapeResult> {
    let split = kernel.span().midpoint();
    let sides: &[Side] = match region {
        Region::RightRay => &[Side::Right],
        Region::LeftRay => &[Side::Left],
        Region::BothRays => &[Side::Right, Side::Left],
    };
    let (mut probability, mut est_error) = (0.0, 0.0);
    for &side in sides {
        let r = ray(kernel, side, delta, split)?;
        probability += r.integral.value;
        est_error += r.integral.error + r.tail;
    }
    Ok(EscapeResult { dt, delta, region, probability, est_error })
}

/// Leading short-time prediction `dt (|ψ'(b)|² + |ψ'(a)|²) / π`.
pub fn analytic_linear_escape(right_derivative: Complex64, left_derivative: Complex64, dt: f64) -> f64 {
    dt * (right_derivative.norm_sqr() + left_derivative.norm_sqr()) / PI
}

/// `|ψ(x, dt)|²`.
pub fn density(wave: &SampledWaveFunction, dt: f64, convention: KernelConvention, x: f64) -> Result<f64> {
    check_dt(dt)?;
    Ok(FreeKernel::new(wave, dt, convention).amplitude(x).norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsideResult {
    pub dt: f64,
    pub probability: f64,
    pub est_error: f64,
}

/// `∫_a^b |ψ(x,dt)|²` over the initial support.
///
/// With `ψ = c ψ₀ + W` inside the support, the cross term integrates to the
/// survival amplitude, which is known in closed form, so only `|W|²` needs
/// quadrature.
pub fn inside_probability(wave: &SampledWaveFunction, dt: f64, convention: KernelConvention) -> Result<InsideResult> {
    check_dt(dt)?;
    let kernel = FreeKernel::new(wave, dt, convention);
    Ok(inside_with(&kernel, dt))
}

pub(crate) fn inside_with(kernel: &FreeKernel, dt: f64) -> InsideResult {
    let span = kernel.span();
    let (amp, rounding) = overlap::survival_amplitude(kernel);
    let c = kernel.convention.identity_phase();
    let base = 2.0 * (c.conj() * amp).re - kernel.norm_squared();
    // `W` inherits a slope jump at every node from the interpolant it corrects.
    let mut breaks = interior_breaks(span.left, span.right, 1.0 / kernel.root());
    breaks.extend_from_slice(kernel.nodes());
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let split = span.midpoint();
    let w2 = integrate_form(
        &breaks,
        kernel.convention.phase_sign() * kernel.lambda,
        &QuadForm::two_groups(span.left, span.right),
        |x, out| {
            let (lo, up) = kernel.waves(x, split);
            out[0] = lo;
            out[1] = up;
        },
    );
    InsideResult { dt, probability: base + w2.value, est_error: w2.error + 2.0 * rounding }
}

/// Where the probability sits after one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityBudget {
    pub dt: f64,
    pub inside: f64,
    pub right: f64,
    pub left: f64,
    pub total: f64,
    /// `‖ψ₀‖²` of the interpolant, the exact value of `total`.
    pub initial_norm: f64,
    pub est_error: f64,
}

pub fn probability_budget(
    wave: &SampledWaveFunction,
    dt: f64,
    convention: KernelConvention,
) -> Result<ProbabilityBudget> {
    check_dt(dt)?;
    let kernel = FreeKernel::new(wave, dt, convention);
    budget_with(&kernel, dt)
}

pub(crate) fn budget_with(kernel: &FreeKernel, dt: f64) -> Result<ProbabilityBudget> {
    let inside = inside_with(kernel, dt);
    let right = escape_with(kernel, dt, 0.0, Region::RightRay)?;
    let left = escape_with(kernel, dt, 0.0, Region::LeftRay)?;
    Ok(ProbabilityBudget {
        dt,
        inside: inside.probability,
        right: right.probability,
        left: left.probability,
        total: inside.probability + right.probability + left.probability,
        initial_norm: kernel.norm_squared(),
        est_error: inside.est_error + right.est_error + left.est_error,
    })
}

/// Right-ray escape of a state and of a copy whose left half has been moved
/// `shift` further to the left (joined by a plateau), and their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossTalk {
    pub dt: f64,
    pub shift: f64,
    pub original: f64,
    pub modified: f64,
    pub difference: f64,
    pub est_error: f64,
}

/// The state with everything left of its central node moved by `−shift`.
pub fn shift_left_half(wave: &SampledWaveFunction, shift: f64) -> Result<SampledWaveFunction> {
    if !(shift > 0.0 && shift.is_finite()) {
        return Err(Error::InvalidParameter(format!("shift must be positive, got {shift}")));
    }
    let nodes = wave.nodes();
    let values = wave.values();
    let k = nodes.partition_point(|&y| y < wave.span().midpoint()).min(nodes.len() - 1);
    let mut y: Vec<f64> = nodes[..=k].iter().map(|y| y - shift).collect();
    let mut v: Vec<Complex64> = values[..=k].to_vec();
    y.extend_from_slice(&nodes[k..]);
    v.extend_from_slice(&values[k..]);
    SampledWaveFunction::new(y, v)
}

/// How much of the right-ray escape is owed to the left half of the state.
///
/// Both states share their right half exactly, so the difference is
/// integrated directly and the right-half waves never enter it alone.
pub fn left_boundary_crosstalk(
    wave: &SampledWaveFunction,
    dt: f64,
    convention: KernelConvention,
    shift: f64,
) -> Result<CrossTalk> {
    check_dt(dt)?;
    let moved = shift_left_half(wave, shift)?;
    let k1 = FreeKernel::new(wave, dt, convention);
    let k2 = FreeKernel::new(&moved, dt, convention);
    let split = k1.span().midpoint();
    let original = ray(&k1, Side::Right, 0.0, split)?;
    let span = k1.span();
    let form = QuadForm {
        anchors: vec![span.left, span.right, span.left - shift],
        diag: vec![1.0, 0.0, -1.0],
        pairs: vec![(0, 1, 1.0), (2, 1, -1.0)],
    };
    let diff = integrate_form(&original.breaks, k1.convention.phase_sign() * k1.lambda, &form, |x, out| {
        let (lo, up) = k1.waves(x, split);
        let (lo2, _) = k2.waves(x, split);
        out[0] = lo;
        out[1] = up;
        out[2] = lo2;
    });
    let cutoff = original.breaks.last().unwrap() - span.right;
    let below = |y: f64| y < split;
    let above = |y: f64| y >= split;
    let (af, bf) = k1.far_field_coefficients(below);
    let (af2, bf2) = k2.far_field_coefficients(below);
    let (an, bn) = k1.far_field_coefficients(above);
    let (p, q) = (af + af2, bf + bf2);
    let tail = product_tail(p, q, p + 2.0 * an, q + 2.0 * bn, cutoff);
    Ok(CrossTalk {
        dt,
        shift,
        original: original.integral.value,
        modified: original.integral.value - diff.value,
        difference: diff.value,
        est_error: diff.error + tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunc::{make_initial_state, Family, StateParams};

    fn state(family: Family, mesh: usize) -> SampledWaveFunction {
        make_initial_state(family, None, &StateParams::default(), mesh).unwrap().1
    }

    #[test]
    fn kinked_sine_escape_matches_erf_oracle() {
        // Right-ray escape of √2 sin(π(x+1)) on [−1, 0], integrated at 40 digits.
        let want = 2.0752036721649513e-08;
        let w = state(Family::KinkedSine, 4096);
        let got = escape_probability(&w, 1e-5, 0.0, Region::RightRay, KernelConvention::Compact).unwrap();
        assert!((got.probability / want - 1.0).abs() < 1e-3, "{} vs {want}", got.probability);
    }

    #[test]
    fn budget_adds_up() {
        for family in [Family::KinkedSine, Family::UniformJump, Family::SmoothBump] {
            for conv in [KernelConvention::Compact, KernelConvention::Standard] {
                let w = state(family, 512);
                let b = probability_budget(&w, 1e-4, conv).unwrap();
                assert!((b.total - b.initial_norm).abs() < 1e-8, "{family} {conv}: {b:?}");
            }
        }
    }

    #[test]
    fn gaussian_deficit_follows_closed_form() {
        let w = make_initial_state(Family::Gaussian, None, &StateParams::default(), 2048).unwrap().1;
        for t in [1e-3, 1e-2, 1e-1] {
            let r = survival_deficit(&w, t, KernelConvention::Standard).unwrap();
            let want = 1.0 - (1.0 + t * t / 4.0).powf(-0.5);
            // The residual is the O(h²) energy shift of the interpolant.
            assert!((r.deficit / want - 1.0).abs() < 2e-4, "{t}: {} vs {want}", r.deficit);
        }
    }

    #[test]
    fn escape_decreases_with_offset() {
        let w = state(Family::UniformJump, 256);
        let mut last = f64::INFINITY;
        for d in [0.0, 0.01, 0.1, 0.5, 2.0] {
            let e = escape_probability(&w, 1e-4, d, Region::BothRays, KernelConvention::Compact).unwrap();
            assert!(e.probability < last, "{d}: {}", e.probability);
            last = e.probability;
        }
    }

    #[test]
    fn compact_kernel_at_four_t_is_conjugate_standard_kernel_at_t() {
        let w = state(Family::KinkedSine, 256);
        let t = 2.5e-4;
        for x in [-1.3, -1.0, -0.7, -0.2, 0.0, 0.05, 0.4] {
            let a = density(&w, 4.0 * t, KernelConvention::Compact, x).unwrap();
            let b = density(&w, t, KernelConvention::Standard, x).unwrap();
            assert!((a - b).abs() < 1e-12, "{x}: {a} {b}");
        }
    }
}
