//! Square-support states `φ(x)χ(y)` in the plane.
//!
//! The free kernel in two dimensions is the product of two one-dimensional
//! kernels, so every region probability is a product of one-dimensional
//! inside/left/right probabilities.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::escape::{budget_with, fit_power_law, PowerLawFit, ProbabilityBudget};
use crate::propagator::{check_dt, FreeKernel, KernelConvention};
use crate::wavefunc::SampledWaveFunction;

/// Relative residual above which a sampled grid is not a product.
pub const SEPARABILITY_TOLERANCE: f64 = 1e-10;

/// Probabilities of the eight regions around the square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakdown {
    /// Strips beside the square: `x < a`, `x > b`, `y < a`, `y > b`.
    pub strip_left: f64,
    pub strip_right: f64,
    pub strip_below: f64,
    pub strip_above: f64,
    pub quadrant_lower_left: f64,
    pub quadrant_lower_right: f64,
    pub quadrant_upper_left: f64,
    pub quadrant_upper_right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarRegionReport {
    pub dt: f64,
    /// Still in the square.
    pub p_a: f64,
    /// In the four strips.
    pub p_b: f64,
    /// In the four quadrants.
    pub p_c: f64,
    pub breakdown: Breakdown,
    pub x: ProbabilityBudget,
    pub y: ProbabilityBudget,
    pub est_error: f64,
}

impl PlanarRegionReport {
    /// Strips reached by moving in `x` only.
    pub fn p_b_x(&self) -> f64 {
        self.breakdown.strip_left + self.breakdown.strip_right
    }

    pub fn p_b_y(&self) -> f64 {
        self.breakdown.strip_below + self.breakdown.strip_above
    }
}

fn assemble(dt: f64, x: ProbabilityBudget, y: ProbabilityBudget) -> PlanarRegionReport {
    let breakdown = Breakdown {
        strip_left: x.left * y.inside,
        strip_right: x.right * y.inside,
        strip_below: x.inside * y.left,
        strip_above: x.inside * y.right,
        quadrant_lower_left: x.left * y.left,
        quadrant_lower_right: x.right * y.left,
        quadrant_upper_left: x.left * y.right,
        quadrant_upper_right: x.right * y.right,
    };
    let b = &breakdown;
    PlanarRegionReport {
        dt,
        p_a: x.inside * y.inside,
        p_b: b.strip_left + b.strip_right + b.strip_below + b.strip_above,
        p_c: b.quadrant_lower_left + b.quadrant_lower_right + b.quadrant_upper_left + b.quadrant_upper_right,
        breakdown,
        x,
        y,
        est_error: x.est_error * y.total.abs() + y.est_error * x.total.abs(),
    }
}

pub fn planar_regions(
    phi_x: &SampledWaveFunction,
    phi_y: &SampledWaveFunction,
    dt: f64,
    convention: KernelConvention,
) -> Result<PlanarRegionReport> {
    check_dt(dt)?;
    let x = budget_with(&FreeKernel::new(phi_x, dt, convention), dt)?;
    let y = if std::ptr::eq(phi_x, phi_y) {
        x
    } else {
        budget_with(&FreeKernel::new(phi_y, dt, convention), dt)?
    };
    Ok(assemble(dt, x, y))
}

#[derive(Debug, Clone)]
pub struct PlanarScan {
    pub reports: Vec<PlanarRegionReport>,
    pub fit_b: Option<PowerLawFit>,
    pub fit_c: Option<PowerLawFit>,
    pub fit_b_x: Option<PowerLawFit>,
    pub fit_b_y: Option<PowerLawFit>,
}

/// [`planar_regions`] over `dts` (reported in the given order) with power-law
/// fits of the strip and quadrant probabilities. A fit is `None` when some
/// probability in it is not positive.
pub fn planar_scan(
    phi_x: &SampledWaveFunction,
    phi_y: &SampledWaveFunction,
    dts: &[f64],
    convention: KernelConvention,
) -> Result<PlanarScan> {
    let reports: Vec<PlanarRegionReport> =
        dts.par_iter().map(|&dt| planar_regions(phi_x, phi_y, dt, convention)).collect::<Result<_>>()?;
    let fit = |f: fn(&PlanarRegionReport) -> f64| {
        let ys: Vec<f64> = reports.iter().map(f).collect();
        fit_power_law(dts, &ys).ok()
    };
    Ok(PlanarScan {
        fit_b: fit(|r| r.p_b),
        fit_c: fit(|r| r.p_c),
        fit_b_x: fit(PlanarRegionReport::p_b_x),
        fit_b_y: fit(PlanarRegionReport::p_b_y),
        reports,
    })
}

/// Split samples `values[i * ys.len() + j] = ψ(xs[i], ys[j])` into unit-norm
/// factors, refusing grids that are not a product.
pub fn separate_product(
    xs: &[f64],
    ys: &[f64],
    values: &[Complex64],
) -> Result<(SampledWaveFunction, SampledWaveFunction)> {
    let (n, m) = (xs.len(), ys.len());
    if values.len() != n * m {
        return Err(Error::InvalidMesh(format!("{} samples for a {n}×{m} grid", values.len())));
    }
    let at = |i: usize, j: usize| values[i * m + j];
    let (pi, pj) = (0..n * m)
        .map(|k| (k / m, k % m))
        .max_by(|a, b| at(a.0, a.1).norm().total_cmp(&at(b.0, b.1).norm()))
        .ok_or_else(|| Error::InvalidMesh("empty grid".into()))?;
    let pivot = at(pi, pj);
    if pivot.norm() == 0.0 {
        return Err(Error::NotNormalizable("grid vanishes".into()));
    }
    let fx: Vec<Complex64> = (0..n).map(|i| at(i, pj)).collect();
    let fy: Vec<Complex64> = (0..m).map(|j| at(pi, j) / pivot).collect();
    let residual = (0..n * m).map(|k| (values[k] - fx[k / m] * fy[k % m]).norm()).fold(0.0, f64::max);
    let relative = residual / pivot.norm();
    if relative > SEPARABILITY_TOLERANCE {
        return Err(Error::NonSeparable(relative));
    }
    let unit = |nodes: &[f64], v: Vec<Complex64>| -> Result<SampledWaveFunction> {
        let w = SampledWaveFunction::new(nodes.to_vec(), v)?;
        let n2 = crate::wavefunc::norm_squared(&w);
        Ok(w.scaled(1.0 / n2.sqrt()))
    };
    Ok((unit(xs, fx)?, unit(ys, fy)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunc::{make_initial_state, Family, StateParams};

    fn state(family: Family) -> SampledWaveFunction {
        make_initial_state(family, None, &StateParams::default(), 512).unwrap().1
    }

    #[test]
    fn regions_partition_the_plane() {
        let w = state(Family::KinkedSine);
        let r = planar_regions(&w, &w, 1e-5, KernelConvention::Compact).unwrap();
        assert!((r.p_a + r.p_b + r.p_c - 1.0).abs() < 2e-6, "{r:?}");
        assert_eq!(r.breakdown.strip_left, r.breakdown.strip_below);
        assert_eq!(r.breakdown.strip_right, r.breakdown.strip_above);
        assert!(r.p_c < r.p_b * 10.0 * 1e-5f64.sqrt());
    }

    #[test]
    fn strips_are_products_of_line_probabilities() {
        let wx = state(Family::KinkedSine);
        let wy = state(Family::SmoothBump);
        let r = planar_regions(&wx, &wy, 1e-4, KernelConvention::Standard).unwrap();
        let x = crate::escape::probability_budget(&wx, 1e-4, KernelConvention::Standard).unwrap();
        let y = crate::escape::probability_budget(&wy, 1e-4, KernelConvention::Standard).unwrap();
        assert!((r.breakdown.strip_right - x.right * y.inside).abs() < 1e-10);
        assert!((r.breakdown.strip_above - x.inside * y.right).abs() < 1e-10);
        assert!(r.p_b_y() < 0.1 * r.p_b_x());
    }

    #[test]
    fn separation_recovers_factors_and_rejects_entangled_grids() {
        let xs: Vec<f64> = (0..20).map(|k| k as f64 / 19.0 - 1.0).collect();
        let ys = xs.clone();
        let f = |x: f64| Complex64::new((std::f64::consts::PI * (x + 1.0)).sin(), 0.1 * x);
        let g = |y: f64| Complex64::new(1.0 + y * (y + 1.0), 0.0);
        let prod: Vec<Complex64> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| f(x) * g(y))).collect();
        let (a, b) = separate_product(&xs, &ys, &prod).unwrap();
        // Factors are fixed up to reciprocal constants.
        let c = a.values()[7] / f(xs[7]);
        for (k, &x) in xs.iter().enumerate() {
            assert!((a.values()[k] - c * f(x)).norm() < 1e-12);
        }
        let d = b.values()[3] / g(ys[3]);
        for (k, &y) in ys.iter().enumerate() {
            assert!((b.values()[k] - d * g(y)).norm() < 1e-12);
        }
        let mixed: Vec<Complex64> =
            xs.iter().flat_map(|&x| ys.iter().map(move |&y| f(x) * g(y) + Complex64::new(x * y, 0.0))).collect();
        assert!(matches!(separate_product(&xs, &ys, &mixed), Err(Error::NonSeparable(_))));
    }
}
