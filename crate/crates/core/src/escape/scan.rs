use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::propagator::{check_dt, FreeKernel, KernelConvention};
use crate::wavefunc::SampledWaveFunction;

use super::{check_delta, escape_with, EscapeResult, Region};

/// `n` logarithmically spaced values from `min` to `max` inclusive.
pub fn log_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && min.is_finite() && max.is_finite()) || n == 0 {
        return Err(Error::InvalidParameter(format!("bad log grid [{min}, {max}] with {n} points")));
    }
    if n == 1 {
        return Ok(vec![min]);
    }
    let (a, b) = (min.ln(), max.ln());
    Ok((0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect())
}

/// One cell of an offset scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetRow {
    pub escape: EscapeResult,
    /// `|ψ(b+δ, dt)|²`, the density at the start of the ray.
    pub density: f64,
    /// `δ < 10√dt`: the offset sits inside the boundary layer.
    pub in_boundary_layer: bool,
}

/// Right-ray escape beyond `b + δ` on the grid `dts × deltas`, ordered by
/// `dt` then `δ`.
pub fn offset_scan(
    wave: &SampledWaveFunction,
    dts: &[f64],
    deltas: &[f64],
    convention: KernelConvention,
) -> Result<Vec<OffsetRow>> {
    for &dt in dts {
        check_dt(dt)?;
    }
    for &d in deltas {
        check_delta(d)?;
    }
    let cells: Vec<(f64, f64)> = dts.iter().flat_map(|&dt| deltas.iter().map(move |&d| (dt, d))).collect();
    cells
        .par_iter()
        .map(|&(dt, delta)| {
            let kernel = FreeKernel::new(wave, dt, convention);
            let escape = escape_with(&kernel, dt, delta, Region::RightRay)?;
            let density = kernel.amplitude(kernel.span().right + delta).norm_sqr();
            Ok(OffsetRow { escape, density, in_boundary_layer: delta < 10.0 * dt.sqrt() })
        })
        .collect()
}
