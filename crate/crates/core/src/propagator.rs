//! Exact free propagation of piecewise-linear wave functions.
//!
//! Two kernels are supported:
//!
//! * [`KernelConvention::Compact`]: `(π i Δt)^(-1/2) exp(−i (x−y)²/Δt)`,
//! * [`KernelConvention::Standard`]: `(4π i t)^(-1/2) exp(+i (x−y)²/(4t))`,
//!   the Schrödinger propagator for `H = −∂²`.
//!
//! The compact kernel at `Δt = 4t` gives the same density as the standard one
//! at `t`; its amplitude tends to `−i ψ₀` rather than `ψ₀` as `Δt → 0`.
//!
//! Integrating by parts twice over each linear panel turns the propagated
//! amplitude into a sum over nodes: the two edge values contribute first
//! tails `T_1` and every slope change contributes a second tail `T_2`. Each
//! node term splits into a non-oscillating part, which sums to the
//! interpolant itself, and a decaying wave centred on the node.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fresnel::scaled_tail;
use crate::quadrature::adaptive_gk15;
use crate::wavefunc::{SampledWaveFunction, SupportInterval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelConvention {
    Compact,
    Standard,
}

impl KernelConvention {
    /// `λ` in the phase `∓ i λ (x−y)²`.
    pub fn phase_scale(self, dt: f64) -> f64 {
        match self {
            KernelConvention::Compact => 1.0 / dt,
            KernelConvention::Standard => 0.25 / dt,
        }
    }

    /// Sign `σ` of the phase `exp(i σ λ (x−y)²)`.
    pub fn phase_sign(self) -> f64 {
        match self {
            KernelConvention::Compact => -1.0,
            KernelConvention::Standard => 1.0,
        }
    }

    /// Limit of the propagated amplitude divided by `ψ₀` as `dt → 0`.
    pub fn identity_phase(self) -> Complex64 {
        match self {
            KernelConvention::Compact => Complex64::new(0.0, -1.0),
            KernelConvention::Standard => Complex64::new(1.0, 0.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelConvention::Compact => "compact",
            KernelConvention::Standard => "standard",
        }
    }
}

impl fmt::Display for KernelConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "compact" => Ok(KernelConvention::Compact),
            "standard" => Ok(KernelConvention::Standard),
            _ => Err(Error::InvalidParameter(format!("unknown kernel convention `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    pub wave: SampledWaveFunction,
    pub dt: f64,
    pub convention: KernelConvention,
    pub est_error: f64,
}

/// Per-panel tolerance of the tail primitives, summed into `est_error`.
pub const PANEL_TOLERANCE: f64 = 1e-12;

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTimeStep(dt))
    }
}

/// Propagate `wave` by `dt` and sample the result at `outputs` (strictly increasing).
pub fn propagate(
    wave: &SampledWaveFunction,
    dt: f64,
    convention: KernelConvention,
    outputs: &[f64],
) -> Result<PropagationResult> {
    check_dt(dt)?;
    if outputs.is_empty() {
        return Err(Error::EmptyOutputs);
    }
    let kernel = FreeKernel::new(wave, dt, convention);
    let values = kernel.amplitudes(outputs);
    Ok(PropagationResult {
        wave: SampledWaveFunction::new(outputs.to_vec(), values)?,
        dt,
        convention,
        est_error: PANEL_TOLERANCE * (wave.len() - 1) as f64,
    })
}

/// Propagated amplitudes at arbitrary points, in input order.
pub fn amplitudes(
    wave: &SampledWaveFunction,
    dt: f64,
    convention: KernelConvention,
    points: &[f64],
) -> Result<Vec<Complex64>> {
    check_dt(dt)?;
    Ok(FreeKernel::new(wave, dt, convention).amplitudes(points))
}

/// Absolute accuracy targeted by [`propagate_oracle`].
pub const ORACLE_TOLERANCE: f64 = 1e-9;

/// Reference amplitude at `x` by adaptive Gauss–Kronrod quadrature of the
/// kernel against the interpolant, without any tail primitives.
pub fn propagate_oracle(
    wave: &SampledWaveFunction,
    dt: f64,
    convention: KernelConvention,
    x: f64,
) -> Result<Complex64> {
    check_dt(dt)?;
    let lambda = convention.phase_scale(dt);
    let sigma = convention.phase_sign();
    // (π i Δt)^(-1/2) and (4π i t)^(-1/2) are both √(λ/π) e^{-iπ/4}.
    let prefactor = (lambda / PI).sqrt() * Complex64::from_polar(1.0, -FRAC_PI_4);
    // Split every panel so that the phase moves by at most π per piece.
    let nodes = wave.nodes();
    let mut breaks = vec![nodes[0]];
    for w in nodes.windows(2) {
        let change = lambda * ((x - w[1]).powi(2) - (x - w[0]).powi(2)).abs();
        let pieces = (change / PI).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            breaks.push(w[0] + (w[1] - w[0]) * k as f64 / pieces as f64);
        }
    }
    let tol = 0.1 * ORACLE_TOLERANCE / prefactor.norm();
    let budget = (40 * 15 * breaks.len()).max(1_000_000);
    let r = adaptive_gk15(
        |y| wave.interpolate(y) * Complex64::from_polar(1.0, sigma * lambda * (x - y) * (x - y)),
        &breaks,
        tol,
        budget,
    );
    if !r.converged {
        return Err(Error::OracleNotConverged { x, estimate: r.error * prefactor.norm() });
    }
    Ok(r.value * prefactor)
}

/// Node-sum representation of a propagated piecewise-linear state.
#[derive(Debug, Clone)]
pub(crate) struct FreeKernel {
    pub convention: KernelConvention,
    pub lambda: f64,
    root: f64,
    nodes: Vec<f64>,
    /// Values entering the sums: the samples, conjugated for the standard kernel.
    data: Vec<Complex64>,
    first: (f64, Complex64),
    last: (f64, Complex64),
    /// Positions and slope changes, zero changes dropped.
    kinks: Vec<(f64, Complex64)>,
}

/// `π^(-1/2) exp(−iπ/4)`.
fn unit_prefactor() -> Complex64 {
    Complex64::from_polar(1.0 / PI.sqrt(), -FRAC_PI_4)
}

impl FreeKernel {
    pub fn new(wave: &SampledWaveFunction, dt: f64, convention: KernelConvention) -> Self {
        let nodes = wave.nodes().to_vec();
        let data: Vec<Complex64> = match convention {
            KernelConvention::Compact => wave.values().to_vec(),
            KernelConvention::Standard => wave.values().iter().map(|v| v.conj()).collect(),
        };
        let n = nodes.len();
        let slopes: Vec<Complex64> =
            (0..n - 1).map(|j| (data[j + 1] - data[j]) / (nodes[j + 1] - nodes[j])).collect();
        let mut kinks = Vec::with_capacity(n);
        for j in 0..n {
            let right = if j < n - 1 { slopes[j] } else { Complex64::new(0.0, 0.0) };
            let left = if j > 0 { slopes[j - 1] } else { Complex64::new(0.0, 0.0) };
            let jump = right - left;
            if jump != Complex64::new(0.0, 0.0) {
                kinks.push((nodes[j], jump));
            }
        }
        let lambda = convention.phase_scale(dt);
        Self {
            convention,
            lambda,
            root: lambda.sqrt(),
            first: (nodes[0], data[0]),
            last: (nodes[n - 1], data[n - 1]),
            nodes,
            data,
            kinks,
        }
    }

    pub fn span(&self) -> SupportInterval {
        SupportInterval { left: self.first.0, right: self.last.0 }
    }

    pub fn edge_values(&self) -> (Complex64, Complex64) {
        (self.first.1, self.last.1)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn kinks(&self) -> &[(f64, Complex64)] {
        &self.kinks
    }

    pub fn root(&self) -> f64 {
        self.root
    }

    /// Map a node sum to the amplitude of the selected kernel.
    pub fn finish(&self, sum: Complex64) -> Complex64 {
        let r = unit_prefactor() * sum;
        match self.convention {
            KernelConvention::Compact => r,
            KernelConvention::Standard => Complex64::new(0.0, -1.0) * r.conj(),
        }
    }

    /// The non-oscillating part: the interpolant times [`KernelConvention::identity_phase`].
    pub fn bulk(&self, x: f64) -> Complex64 {
        if x <= self.first.0 || x > self.last.0 {
            return Complex64::new(0.0, 0.0);
        }
        let j = self.nodes.partition_point(|&y| y <= x).clamp(1, self.nodes.len() - 1);
        let (y0, y1) = (self.nodes[j - 1], self.nodes[j]);
        let t = (x - y0) / (y1 - y0);
        let g = self.data[j - 1] * (1.0 - t) + self.data[j] * t;
        let r = Complex64::new(0.0, -1.0) * g;
        match self.convention {
            KernelConvention::Compact => r,
            KernelConvention::Standard => Complex64::new(0.0, -1.0) * r.conj(),
        }
    }

    /// Wave parts from sources below and at-or-above `split`.
    pub fn waves(&self, x: f64, split: f64) -> (Complex64, Complex64) {
        let s = self.root;
        let mut lower = Complex64::new(0.0, 0.0);
        let mut upper = Complex64::new(0.0, 0.0);
        let mut add = |pos: f64, term: Complex64| {
            if pos < split {
                lower += term;
            } else {
                upper += term;
            }
        };
        let edge = |pos: f64, value: Complex64| {
            let u = pos - x;
            let w = s * u.abs();
            let t = Complex64::from_polar(1.0, -w * w) * scaled_tail(1, w) * value;
            if u >= 0.0 {
                t
            } else {
                -t
            }
        };
        add(self.first.0, edge(self.first.0, self.first.1));
        add(self.last.0, -edge(self.last.0, self.last.1));
        let inv_root = 1.0 / s;
        for &(pos, jump) in &self.kinks {
            let w = s * (pos - x).abs();
            add(pos, Complex64::from_polar(inv_root, -w * w) * scaled_tail(2, w) * jump);
        }
        (self.finish(lower), self.finish(upper))
    }

    pub fn amplitude(&self, x: f64) -> Complex64 {
        let (lo, up) = self.waves(x, self.span().midpoint());
        self.bulk(x) + lo + up
    }

    pub fn amplitudes(&self, points: &[f64]) -> Vec<Complex64> {
        points.par_iter().map(|&x| self.amplitude(x)).collect()
    }

    /// `∫|ψ₀|²` of the interpolant.
    pub fn norm_squared(&self) -> f64 {
        self.nodes
            .windows(2)
            .zip(self.data.windows(2))
            .map(|(y, v)| (y[1] - y[0]) / 3.0 * (v[0].norm_sqr() + (v[0].conj() * v[1]).re + v[1].norm_sqr()))
            .sum()
    }

    /// `∫|ψ₀'|²` of the interpolant (edge jumps excluded).
    pub fn slope_energy(&self) -> f64 {
        self.nodes
            .windows(2)
            .zip(self.data.windows(2))
            .map(|(y, v)| (v[1] - v[0]).norm_sqr() / (y[1] - y[0]))
            .sum()
    }

    /// Coefficients of `|W(x)| ≤ A/d + B/d²` for the waves of sources
    /// selected by `include`, at distance `d ≥ 8/√λ` outside the span.
    pub fn far_field_coefficients(&self, include: impl Fn(f64) -> bool) -> (f64, f64) {
        let s = self.root;
        let mut edges = 0.0;
        if include(self.first.0) {
            edges += self.first.1.norm();
        }
        if include(self.last.0) {
            edges += self.last.1.norm();
        }
        let total: f64 = self.kinks.iter().filter(|(y, _)| include(*y)).map(|(_, j)| j.norm()).sum();
        let a = 1.01 * edges / (2.0 * PI.sqrt() * s);
        let b = 1.03 * total / (4.0 * PI.sqrt() * s * s * s);
        (a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunc::{make_initial_state, Family, StateParams};

    #[test]
    fn bulk_plus_waves_is_continuous_across_nodes() {
        let (_, w) = make_initial_state(Family::KinkedSine, None, &StateParams::default(), 64).unwrap();
        let k = FreeKernel::new(&w, 1e-3, KernelConvention::Compact);
        for &y in &w.nodes()[1..63] {
            let a = k.amplitude(y - 1e-12);
            let b = k.amplitude(y + 1e-12);
            assert!((a - b).norm() < 1e-9, "at {y}: {a} {b}");
        }
    }

    #[test]
    fn node_sum_agrees_with_direct_quadrature() {
        for family in [Family::KinkedSine, Family::UniformJump, Family::SmoothBump] {
            let (_, w) = make_initial_state(family, None, &StateParams::default(), 128).unwrap();
            for conv in [KernelConvention::Compact, KernelConvention::Standard] {
                let k = FreeKernel::new(&w, 1e-3, conv);
                for &x in &[-1.3, -1.0, -0.97, -0.5, -0.02, 0.0, 0.1, 0.6] {
                    let fast = k.amplitude(x);
                    let slow = propagate_oracle(&w, 1e-3, conv, x).unwrap();
                    assert!((fast - slow).norm() < 1e-9, "{family} {conv} x={x}: {fast} {slow}");
                }
            }
        }
    }
}
