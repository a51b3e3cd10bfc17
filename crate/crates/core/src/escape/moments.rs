use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::wavefunc::{Family, InitialState};

/// Energy moments for `H = −∂²` (`⟨H⟩ = ⟨p²⟩`, `⟨H²⟩ = ⟨p⁴⟩`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentStats {
    pub mean_h: f64,
    pub mean_h2: f64,
    /// `√(⟨H²⟩ − ⟨H⟩²)`.
    pub delta_h: f64,
}

const FFT_POINTS: usize = 1 << 15;
/// Boundary values below this fraction of the peak count as zero.
const EDGE_TOLERANCE: f64 = 1e-12;

/// Moments from the spectrum of the state sampled on a fine uniform grid.
///
/// `⟨H²⟩` needs `ψ` and `ψ'` to vanish at the support edges; states with a
/// jump or a slope discontinuity there are refused.
pub fn moment_stats(state: &InitialState) -> Result<MomentStats> {
    match state.family {
        Family::KinkedSine | Family::UniformJump => {
            return Err(Error::DivergentMoment(state.family.to_string()));
        }
        Family::CustomSamples => {
            // The interpolant has slope jumps at every node.
            return Err(Error::DivergentMoment("piecewise-linear custom samples".into()));
        }
        _ => {}
    }
    let region = state.region();
    if let Some(b) = state.boundary {
        let peak = state.value(region.midpoint()).norm().max(state.value(state.params.center.unwrap_or(0.0)).norm());
        let scale = region.width();
        let edge = [b.left_value.norm(), b.right_value.norm(), b.left_derivative.norm() * scale, b.right_derivative.norm() * scale];
        if edge.iter().any(|&e| e > EDGE_TOLERANCE * peak.max(f64::MIN_POSITIVE)) {
            return Err(Error::DivergentMoment(format!("{} with non-smooth edges", state.family)));
        }
    }
    // The state occupies the middle third of the periodic window.
    let width = 3.0 * region.width();
    let left = region.left - region.width();
    let n = FFT_POINTS;
    let h = width / n as f64;
    let mut buf: Vec<Complex64> = (0..n).map(|k| state.value(left + k as f64 * h)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let (mut m0, mut m2, mut m4) = (0.0, 0.0, 0.0);
    for (k, c) in buf.iter().enumerate() {
        let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let p2 = (2.0 * PI * kk / width).powi(2);
        let w = c.norm_sqr();
        m0 += w;
        m2 += w * p2;
        m4 += w * p2 * p2;
    }
    let mean_h = m2 / m0;
    let mean_h2 = m4 / m0;
    Ok(MomentStats { mean_h, mean_h2, delta_h: (mean_h2 - mean_h * mean_h).max(0.0).sqrt() })
}
