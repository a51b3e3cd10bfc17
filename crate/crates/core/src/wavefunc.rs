//! Initial states and their piecewise-linear samplings.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportInterval {
    pub left: f64,
    pub right: f64,
}

impl SupportInterval {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        if left.is_finite() && right.is_finite() && left < right {
            Ok(Self { left, right })
        } else {
            Err(Error::InvalidSupport(left, right))
        }
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.left + self.right)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.left && x <= self.right
    }
}

impl Default for SupportInterval {
    fn default() -> Self {
        Self { left: -1.0, right: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `√(2/L) sin(π(x−a)/L)`: vanishes at the edges with a slope jump.
    KinkedSine,
    /// `1/√L`: jumps to zero at the edges.
    UniformJump,
    /// `√(8/(3L)) sin²(π(x−a)/L)`: value and slope vanish at the edges.
    SmoothBump,
    /// `(2πσ²)^(-1/4) exp(−(x−c)²/(4σ²))`, optionally truncated to a support.
    Gaussian,
    /// User supplied nodes and values, interpolated linearly.
    CustomSamples,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::KinkedSine,
        Family::UniformJump,
        Family::SmoothBump,
        Family::Gaussian,
        Family::CustomSamples,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::KinkedSine => "kinked-sine",
            Family::UniformJump => "uniform-jump",
            Family::SmoothBump => "smooth-bump",
            Family::Gaussian => "gaussian",
            Family::CustomSamples => "custom-samples",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// Family parameters. Unused fields are ignored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateParams {
    pub sigma: Option<f64>,
    pub center: Option<f64>,
    pub samples: Option<(Vec<f64>, Vec<Complex64>)>,
}

/// One-sided values and derivatives at the support edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData {
    pub left_value: Complex64,
    pub right_value: Complex64,
    pub left_derivative: Complex64,
    pub right_derivative: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub family: Family,
    pub support: Option<SupportInterval>,
    pub params: StateParams,
    pub boundary: Option<BoundaryData>,
    scale: f64,
}

/// Half-width of the sampling window for an untruncated gaussian, in units of σ.
pub const GAUSSIAN_WINDOW: f64 = 12.0;

impl InitialState {
    /// Interval on which the state is sampled: the support, or the gaussian window.
    pub fn region(&self) -> SupportInterval {
        match self.support {
            Some(s) => s,
            None => {
                let (sigma, c) = self.gaussian_params();
                SupportInterval { left: c - GAUSSIAN_WINDOW * sigma, right: c + GAUSSIAN_WINDOW * sigma }
            }
        }
    }

    fn gaussian_params(&self) -> (f64, f64) {
        (self.params.sigma.unwrap_or(1.0), self.params.center.unwrap_or(0.0))
    }

    /// Analytic value of the normalized state.
    pub fn value(&self, x: f64) -> Complex64 {
        if let Some(s) = self.support {
            if !s.contains(x) {
                return Complex64::new(0.0, 0.0);
            }
        }
        let raw = match self.family {
            Family::KinkedSine => {
                let s = self.support.unwrap_or_default();
                (PI * (x - s.left) / s.width()).sin()
            }
            Family::UniformJump => 1.0,
            Family::SmoothBump => {
                let s = self.support.unwrap_or_default();
                (PI * (x - s.left) / s.width()).sin().powi(2)
            }
            Family::Gaussian => {
                let (sigma, c) = self.gaussian_params();
                (-(x - c).powi(2) / (4.0 * sigma * sigma)).exp()
            }
            Family::CustomSamples => {
                let (nodes, values) = self.params.samples.as_ref().expect("custom samples");
                return interpolate(nodes, values, x) * self.scale;
            }
        };
        Complex64::new(raw * self.scale, 0.0)
    }

    /// Analytic derivative, used for the boundary data of closed-form families.
    fn derivative(&self, x: f64) -> Complex64 {
        let d = match self.family {
            Family::KinkedSine => {
                let s = self.support.unwrap_or_default();
                let k = PI / s.width();
                k * (k * (x - s.left)).cos()
            }
            Family::UniformJump => 0.0,
            Family::SmoothBump => {
                let s = self.support.unwrap_or_default();
                let k = PI / s.width();
                k * (2.0 * k * (x - s.left)).sin()
            }
            Family::Gaussian => {
                let (sigma, c) = self.gaussian_params();
                -(x - c) / (2.0 * sigma * sigma) * (-(x - c).powi(2) / (4.0 * sigma * sigma)).exp()
            }
            Family::CustomSamples => unreachable!("custom derivatives come from differences"),
        };
        Complex64::new(d * self.scale, 0.0)
    }
}

fn interpolate(nodes: &[f64], values: &[Complex64], x: f64) -> Complex64 {
    let n = nodes.len();
    if x < nodes[0] || x > nodes[n - 1] {
        return Complex64::new(0.0, 0.0);
    }
    let j = nodes.partition_point(|&y| y <= x).clamp(1, n - 1);
    let (y0, y1) = (nodes[j - 1], nodes[j]);
    let t = (x - y0) / (y1 - y0);
    values[j - 1] * (1.0 - t) + values[j] * t
}

/// A wave function given by its values at increasing nodes, linear in
/// between and zero outside `[nodes[0], nodes[n-1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveFunction {
    nodes: Vec<f64>,
    values: Vec<Complex64>,
}

impl SampledWaveFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return Err(Error::InvalidMesh(format!(
                "{} nodes and {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.iter().any(|y| !y.is_finite()) || values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidMesh("non-finite entry".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMesh("nodes must be strictly increasing".into()));
        }
        Ok(Self { nodes, values })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn span(&self) -> SupportInterval {
        SupportInterval { left: self.nodes[0], right: self.nodes[self.nodes.len() - 1] }
    }

    pub fn interpolate(&self, x: f64) -> Complex64 {
        interpolate(&self.nodes, &self.values, x)
    }

    /// Same nodes, values multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { nodes: self.nodes.clone(), values: self.values.iter().map(|v| v * factor).collect() }
    }
}

/// Exact `∫|ψ|²` of the piecewise-linear interpolant.
pub fn norm_squared(w: &SampledWaveFunction) -> f64 {
    w.nodes
        .windows(2)
        .zip(w.values.windows(2))
        .map(|(y, v)| (y[1] - y[0]) / 3.0 * (v[0].norm_sqr() + (v[0].conj() * v[1]).re + v[1].norm_sqr()))
        .sum()
}

/// Exact `∫ conj(u) v` for two interpolants on the same nodes.
pub fn inner_product(u: &SampledWaveFunction, v: &SampledWaveFunction) -> Result<Complex64> {
    if u.nodes != v.nodes {
        return Err(Error::InvalidMesh("inner product needs a common mesh".into()));
    }
    Ok(u.nodes
        .windows(2)
        .zip(u.values.windows(2).zip(v.values.windows(2)))
        .map(|(y, (a, b))| {
            let (a0, a1) = (a[0].conj(), a[1].conj());
            (a0 * b[0] * 2.0 + a0 * b[1] + a1 * b[0] + a1 * b[1] * 2.0) * ((y[1] - y[0]) / 6.0)
        })
        .sum())
}

/// Smallest panel of the graded mesh, relative to the support width.
pub const MIN_PANEL_FRACTION: f64 = 1e-6;
/// Ratio between neighbouring panels inside the edge layers.
pub const GRADING_RATIO: f64 = 0.9;

/// Mesh of `n` nodes on `support`, refined geometrically toward both ends
/// (panels shrink by [`GRADING_RATIO`] down to [`MIN_PANEL_FRACTION`] of the
/// width) and uniform in the middle.
pub fn graded_mesh(support: SupportInterval, n: usize) -> Result<Vec<f64>> {
    if n < 3 {
        return Err(Error::InvalidMesh(format!("need at least 3 nodes, got {n}")));
    }
    let len = support.width();
    let h_min = MIN_PANEL_FRACTION * len;
    let growth = 1.0 / GRADING_RATIO;
    let panels = n - 1;
    let layer = |h_mid: f64| {
        let (mut k, mut s, mut h) = (0usize, 0.0, h_min);
        while h < h_mid {
            s += h;
            h *= growth;
            k += 1;
        }
        (k, s)
    };
    let excess = |h: f64| {
        let (k, s) = layer(h);
        2.0 * k as f64 + (len - 2.0 * s) / h - panels as f64
    };
    let (mut lo, mut hi) = (h_min.ln(), len.ln());
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if excess(mid.exp()) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (k, s) = layer(hi.exp());
    let middle = panels as isize - 2 * k as isize;
    let mut widths = Vec::with_capacity(panels);
    if middle >= 1 && len - 2.0 * s > 0.0 {
        let h_mid = (len - 2.0 * s) / middle as f64;
        let edge: Vec<f64> = (0..k).map(|j| h_min * growth.powi(j as i32)).collect();
        if edge.last().is_none_or(|&h| h_mid >= 0.5 * h) {
            widths.extend(&edge);
            widths.extend(std::iter::repeat_n(h_mid, middle as usize));
            widths.extend(edge.iter().rev());
        }
    }
    if widths.is_empty() {
        widths = two_sided_geometric(len, h_min, panels);
    }
    let mut nodes = Vec::with_capacity(n);
    let mut x = support.left;
    nodes.push(x);
    for h in &widths[..panels - 1] {
        x += h;
        nodes.push(x);
    }
    nodes.push(support.right);
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidMesh("graded mesh degenerated".into()));
    }
    Ok(nodes)
}

/// Fallback for meshes too coarse to contain the full edge layers: panels
/// grow geometrically from both ends and meet in the middle.
fn two_sided_geometric(len: f64, h_min: f64, panels: usize) -> Vec<f64> {
    let side = panels / 2;
    let odd = panels % 2 == 1;
    let total = |g: f64| {
        let s: f64 = (0..side).map(|j| h_min * g.powi(j as i32)).sum();
        let centre = if odd { h_min * g.powi(side as i32) } else { 0.0 };
        2.0 * s + centre
    };
    let (mut lo, mut hi) = (1.0, 2.0);
    while total(hi) < len {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < len {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let edge: Vec<f64> = (0..side).map(|j| h_min * hi.powi(j as i32)).collect();
    let mut widths = edge.clone();
    if odd {
        widths.push(h_min * hi.powi(side as i32));
    }
    widths.extend(edge.iter().rev());
    let scale = len / widths.iter().sum::<f64>();
    widths.iter().map(|h| h * scale).collect()
}

/// Build a normalized initial state and its sampling.
///
/// Closed-form families are sampled on [`graded_mesh`] (the untruncated
/// gaussian on a uniform mesh over ±12σ) and the samples are rescaled so that
/// the interpolant has unit norm.
pub fn make_initial_state(
    family: Family,
    support: Option<SupportInterval>,
    params: &StateParams,
    mesh_size: usize,
) -> Result<(InitialState, SampledWaveFunction)> {
    if family != Family::CustomSamples && mesh_size < 16 {
        return Err(Error::InvalidMesh(format!("mesh size {mesh_size} is below 16")));
    }
    match family {
        Family::CustomSamples => return custom_state(support, params),
        Family::Gaussian => {
            let sigma = params.sigma.unwrap_or(1.0);
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::NotNormalizable(format!("gaussian width {sigma}")));
            }
            if !params.center.unwrap_or(0.0).is_finite() {
                return Err(Error::InvalidParameter("gaussian centre".into()));
            }
        }
        _ => {}
    }
    let support = match family {
        Family::Gaussian => support,
        _ => Some(support.unwrap_or_default()),
    };
    let mut state = InitialState { family, support, params: params.clone(), boundary: None, scale: 1.0 };
    state.scale = 1.0 / analytic_norm(&state)?.sqrt();

    let region = state.region();
    let nodes = if family == Family::Gaussian && support.is_none() {
        (0..mesh_size)
            .map(|k| region.left + region.width() * k as f64 / (mesh_size - 1) as f64)
            .collect()
    } else {
        graded_mesh(region, mesh_size)?
    };
    if let Some(s) = support {
        state.boundary = Some(BoundaryData {
            left_value: state.value(s.left),
            right_value: state.value(s.right),
            left_derivative: state.derivative(s.left),
            right_derivative: state.derivative(s.right),
        });
    }
    let mut values: Vec<Complex64> = nodes.iter().map(|&x| state.value(x)).collect();
    if support.is_none() {
        // The window edges sit 12σ out; pin them so the sampled state has no edge jumps.
        let last = values.len() - 1;
        values[0] = Complex64::new(0.0, 0.0);
        values[last] = Complex64::new(0.0, 0.0);
    }
    let sampled = SampledWaveFunction::new(nodes, values)?;
    let n2 = norm_squared(&sampled);
    if !(n2 > 0.0) {
        return Err(Error::NotNormalizable("sampled state vanishes".into()));
    }
    Ok((state, sampled.scaled(1.0 / n2.sqrt())))
}

/// `∫|ψ|²` of the unnormalized closed-form profile.
fn analytic_norm(state: &InitialState) -> Result<f64> {
    let n = match state.family {
        Family::KinkedSine => 0.5 * state.region().width(),
        Family::UniformJump => state.region().width(),
        Family::SmoothBump => 0.375 * state.region().width(),
        Family::Gaussian => {
            let (sigma, c) = state.gaussian_params();
            let full = (2.0 * PI).sqrt() * sigma;
            match state.support {
                None => full,
                Some(s) => {
                    let (x, w) = crate::quadrature::gauss_legendre(24);
                    let panels = 400;
                    let h = s.width() / panels as f64;
                    let mut total = 0.0;
                    for p in 0..panels {
                        let m = s.left + (p as f64 + 0.5) * h;
                        for (xi, wi) in x.iter().zip(&w) {
                            let y = m + 0.5 * h * xi;
                            total += wi * 0.5 * h * (-(y - c).powi(2) / (2.0 * sigma * sigma)).exp();
                        }
                    }
                    total
                }
            }
        }
        Family::CustomSamples => unreachable!(),
    };
    if n > 0.0 && n.is_finite() {
        Ok(n)
    } else {
        Err(Error::NotNormalizable(format!("{} has norm {n}", state.family)))
    }
}

fn custom_state(support: Option<SupportInterval>, params: &StateParams) -> Result<(InitialState, SampledWaveFunction)> {
    let (nodes, values) = params
        .samples
        .clone()
        .ok_or_else(|| Error::InvalidParameter("custom-samples needs nodes and values".into()))?;
    let raw = SampledWaveFunction::new(nodes, values)?;
    if raw.len() < 3 {
        return Err(Error::InvalidMesh("custom samples need at least 3 nodes".into()));
    }
    let span = raw.span();
    if let Some(s) = support {
        let tol = 1e-12 * span.width();
        if (s.left - span.left).abs() > tol || (s.right - span.right).abs() > tol {
            return Err(Error::InvalidParameter("support must match the sample span".into()));
        }
    }
    let n2 = norm_squared(&raw);
    if !(n2 > 0.0 && n2.is_finite()) {
        return Err(Error::NotNormalizable("custom samples have zero norm".into()));
    }
    let scale = 1.0 / n2.sqrt();
    let sampled = raw.scaled(scale);
    let (y, v) = (sampled.nodes(), sampled.values());
    let n = y.len();
    let boundary = BoundaryData {
        left_value: v[0],
        right_value: v[n - 1],
        left_derivative: one_sided_derivative(y[0], y[1], y[2], v[0], v[1], v[2]),
        right_derivative: one_sided_derivative(y[n - 1], y[n - 2], y[n - 3], v[n - 1], v[n - 2], v[n - 3]),
    };
    let state = InitialState {
        family: Family::CustomSamples,
        support: Some(span),
        params: params.clone(),
        boundary: Some(boundary),
        scale,
    };
    Ok((state, sampled))
}

/// Derivative at `x0` of the parabola through three samples.
fn one_sided_derivative(x0: f64, x1: f64, x2: f64, f0: Complex64, f1: Complex64, f2: Complex64) -> Complex64 {
    let (h1, h2) = (x1 - x0, x2 - x0);
    let c0 = -(h1 + h2) / (h1 * h2);
    let c1 = h2 / (h1 * (h2 - h1));
    let c2 = -h1 / (h2 * (h2 - h1));
    f0 * c0 + f1 * c1 + f2 * c2
}
