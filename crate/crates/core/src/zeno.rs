//! Repeated position measurements on the initial support.
//!
//! Each step propagates the current state freely for `T/N`, records the mass
//! that left the support, then keeps only the part on the support (sampled
//! back onto the graded mesh) and renormalizes it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::escape::{escape_with, Region};
use crate::propagator::{check_dt, FreeKernel, KernelConvention};
use crate::wavefunc::{graded_mesh, norm_squared, SampledWaveFunction};

/// Largest mesh tried when the boundary layer is too thin for the configured one.
pub const MAX_MESH: usize = 16384;
/// Nodes required within `√Δt` of each edge.
pub const LAYER_NODES: usize = 8;
/// Surviving norms below this are treated as total escape.
const UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Clone)]
pub struct ZenoSpec {
    pub total_time: f64,
    pub steps: usize,
    /// Normalized initial state; its span is the measured interval.
    pub wave: SampledWaveFunction,
    pub convention: KernelConvention,
    /// Nodes of the graded mesh the collapsed state is sampled on.
    pub mesh_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZenoRun {
    pub total_time: f64,
    pub steps: usize,
    pub per_step_escape: Vec<f64>,
    /// `1 − Π(1 − p_i)`.
    pub total_detection: f64,
    /// Norm of the sampled, restricted state after the last step, before renormalizing.
    pub final_state_norm: f64,
    /// Largest `|‖Pψ_i‖² − (1 − p_i)|` over the steps: the resampling error.
    pub max_norm_defect: f64,
    pub mesh_size: usize,
    pub est_error: f64,
}

/// `1 − Π(1 − p_i)` without cancellation for tiny `p_i`.
pub fn total_detection(per_step: &[f64]) -> f64 {
    let log_survival: f64 = per_step.iter().map(|p| (-p.min(1.0)).ln_1p()).sum();
    -log_survival.exp_m1()
}

/// Leading-order detection after `N` steps of a per-step law `c Δt^q`.
pub fn zeno_bound(c: f64, q: f64, total_time: f64, steps: usize) -> f64 {
    let n = steps as f64;
    n * c * (total_time / n).powf(q)
}

fn nodes_within(nodes: &[f64], width: f64) -> usize {
    let (a, b) = (nodes[0], nodes[nodes.len() - 1]);
    let left = nodes.iter().filter(|&&x| x - a <= width).count();
    let right = nodes.iter().filter(|&&x| b - x <= width).count();
    left.min(right)
}

/// Mesh for the collapsed states, doubled until the layer of width `√Δt` holds
/// [`LAYER_NODES`] nodes at each edge.
fn resolving_mesh(wave: &SampledWaveFunction, dt: f64, mesh_size: usize) -> Result<Vec<f64>> {
    let width = dt.sqrt();
    let mut n = mesh_size;
    loop {
        let nodes = graded_mesh(wave.span(), n)?;
        if nodes_within(&nodes, width) >= LAYER_NODES {
            return Ok(nodes);
        }
        if n >= MAX_MESH {
            return Err(Error::UnresolvedBoundaryLayer { width, nodes: n });
        }
        n = (2 * n).min(MAX_MESH);
    }
}

pub fn run_zeno(spec: &ZenoSpec) -> Result<ZenoRun> {
    if !(spec.total_time > 0.0 && spec.total_time.is_finite()) {
        return Err(Error::InvalidParameter(format!("total time must be positive, got {}", spec.total_time)));
    }
    if spec.steps == 0 {
        return Err(Error::InvalidParameter("at least one step is needed".into()));
    }
    let dt = spec.total_time / spec.steps as f64;
    check_dt(dt)?;
    let nodes = resolving_mesh(&spec.wave, dt, spec.mesh_size)?;
    let mut state = spec.wave.clone();
    let mut per_step = Vec::with_capacity(spec.steps);
    let (mut final_norm, mut max_defect, mut est_error) = (1.0, 0.0f64, 0.0);
    for step in 0..spec.steps {
        let kernel = FreeKernel::new(&state, dt, spec.convention);
        let escape = escape_with(&kernel, dt, 0.0, Region::BothRays)?;
        let p = escape.probability.clamp(0.0, 1.0);
        per_step.push(p);
        est_error += escape.est_error;
        let values: Vec<Complex64> = kernel.amplitudes(&nodes);
        let collapsed = SampledWaveFunction::new(nodes.clone(), values)?;
        let kept = norm_squared(&collapsed);
        if !(kept > UNDERFLOW) {
            return Err(Error::NormUnderflow(step + 1));
        }
        max_defect = max_defect.max((kept - (1.0 - p)).abs());
        final_norm = kept;
        state = collapsed.scaled(1.0 / kept.sqrt());
    }
    Ok(ZenoRun {
        total_time: spec.total_time,
        steps: spec.steps,
        total_detection: total_detection(&per_step),
        per_step_escape: per_step,
        final_state_norm: final_norm,
        max_norm_defect: max_defect,
        mesh_size: nodes.len(),
        est_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::escape::escape_probability;
    use crate::wavefunc::{make_initial_state, Family, StateParams};

    fn spec(steps: usize, mesh_size: usize) -> ZenoSpec {
        let (_, wave) = make_initial_state(Family::KinkedSine, None, &StateParams::default(), mesh_size).unwrap();
        ZenoSpec { total_time: 0.01, steps, wave, convention: KernelConvention::Compact, mesh_size }
    }

    #[test]
    fn bound_examples() {
        assert!((zeno_bound(1.0, 2.0, 1.0, 10) - 0.1).abs() < 1e-15);
        assert!((zeno_bound(1.0, 2.0, 1.0, 100) - 0.01).abs() < 1e-15);
        for n in [1, 7, 1000] {
            assert!((zeno_bound(1.0, 1.0, 1.0, n) - 1.0).abs() < 1e-12);
        }
        assert_eq!(zeno_bound(0.0, 1.5, 2.0, 3), 0.0);
    }

    #[test]
    fn detection_keeps_tiny_steps() {
        let d = total_detection(&[1e-20, 2e-20]);
        assert!((d / 3e-20 - 1.0).abs() < 1e-12);
        let p = [0.1, 0.2, 0.3];
        assert!((total_detection(&p) - (1.0 - 0.9 * 0.8 * 0.7)).abs() < 1e-15);
    }

    #[test]
    fn single_step_is_plain_escape() {
        let s = spec(1, 1024);
        let run = run_zeno(&s).unwrap();
        let e = escape_probability(&s.wave, 0.01, 0.0, Region::BothRays, s.convention).unwrap();
        assert!((run.total_detection - e.probability).abs() <= run.est_error + e.est_error);
        assert!((run.final_state_norm - (1.0 - e.probability)).abs() < 1e-5);
    }

    #[test]
    fn kinked_sine_escape_settles() {
        // The restricted state picks up an edge jump of order √Δt, so the
        // per-step escape climbs to about three times the first step before
        // levelling off.
        let run = run_zeno(&spec(100, 256)).unwrap();
        let p = &run.per_step_escape;
        assert!(p.iter().all(|q| (0.5..=4.0).contains(&(q / p[0]))), "{p:?}");
        for w in p[50..].windows(2) {
            assert!((w[1] / w[0] - 1.0).abs() < 0.02, "{p:?}");
        }
    }
}
