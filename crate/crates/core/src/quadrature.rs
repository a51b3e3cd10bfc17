//! Quadrature rules: Gauss–Legendre, Gauss–Kronrod 7/15 and a Filon variant
//! of the 7/15 pair for integrands with a fast linear phase.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

/// Positive Kronrod abscissae, centre first.
#[allow(clippy::excessive_precision)]
pub const KRONROD_NODES: [f64; 8] = [
    0.0,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.991_455_371_120_812_639_206_854_697_526_329,
];

#[allow(clippy::excessive_precision)]
pub const KRONROD_WEIGHTS: [f64; 8] = [
    0.209_482_141_084_727_828_012_999_174_891_714,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.022_935_322_010_529_224_963_732_008_058_970,
];

/// Gauss weights for Kronrod nodes 0, 2, 4, 6.
#[allow(clippy::excessive_precision)]
pub const GAUSS_WEIGHTS: [f64; 4] = [
    0.417_959_183_673_469_387_755_102_040_816_327,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.129_484_966_168_869_693_270_611_432_679_082,
];

/// The 15 Kronrod points on `[-1, 1]` in increasing order.
pub fn kronrod_points() -> [f64; 15] {
    let mut s = [0.0; 15];
    for k in 0..8 {
        s[7 + k] = KRONROD_NODES[k];
        s[7 - k] = -KRONROD_NODES[k];
    }
    s
}

/// Kronrod and Gauss weights aligned with [`kronrod_points`]; Gauss weights
/// are zero at the points that only belong to the Kronrod extension.
pub fn kronrod_weight_vectors() -> ([f64; 15], [f64; 15]) {
    let mut wk = [0.0; 15];
    let mut wg = [0.0; 15];
    for k in 0..8 {
        wk[7 + k] = KRONROD_WEIGHTS[k];
        wk[7 - k] = KRONROD_WEIGHTS[k];
        if k % 2 == 0 {
            wg[7 + k] = GAUSS_WEIGHTS[k / 2];
            wg[7 - k] = GAUSS_WEIGHTS[k / 2];
        }
    }
    (wk, wg)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// One G7K15 application on `[a, b]`: (Kronrod value, |Kronrod − Gauss|).
pub fn gk15<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64) -> (Complex64, f64) {
    let m = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(m);
    let mut k = fc * KRONROD_WEIGHTS[0];
    let mut g = fc * GAUSS_WEIGHTS[0];
    for j in 1..8 {
        let x = h * KRONROD_NODES[j];
        let s = f(m - x) + f(m + x);
        k += s * KRONROD_WEIGHTS[j];
        if j % 2 == 0 {
            g += s * GAUSS_WEIGHTS[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Result of a globally adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Globally adaptive G7K15: bisect the worst piece until the summed error
/// estimate drops below `tol` or `max_evals` is exhausted.
pub fn adaptive_gk15<F: FnMut(f64) -> Complex64>(
    mut f: F,
    breakpoints: &[f64],
    tol: f64,
    max_evals: usize,
) -> Adaptive {
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for w in breakpoints.windows(2) {
        let (value, error) = gk15(&mut f, w[0], w[1]);
        evals += 15;
        total += value;
        err += error;
        heap.push(Piece { a: w[0], b: w[1], value, error });
    }
    while err > tol && evals + 30 <= max_evals {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evals += 30;
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to shed the drift of the running updates.
    let value = heap.iter().fold(Complex64::new(0.0, 0.0), |s, p| s + p.value);
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Adaptive { value, error, evaluations: evals, converged: error <= tol }
}

/// Monomial coefficients of the Lagrange basis through `points`:
/// `coeffs[i][k]` is the `s^k` coefficient of the `i`-th basis polynomial.
fn lagrange_monomials(points: &[f64]) -> Vec<Vec<f64>> {
    let n = points.len();
    (0..n)
        .map(|i| {
            let mut poly = vec![1.0];
            let mut denom = 1.0;
            for (j, &p) in points.iter().enumerate() {
                if j == i {
                    continue;
                }
                let mut next = vec![0.0; poly.len() + 1];
                for (k, &c) in poly.iter().enumerate() {
                    next[k + 1] += c;
                    next[k] -= c * p;
                }
                poly = next;
                denom *= points[i] - p;
            }
            poly.iter().map(|c| c / denom).collect()
        })
        .collect()
}

struct FilonBases {
    kronrod: Vec<Vec<f64>>,
    gauss: Vec<Vec<f64>>,
}

fn filon_bases() -> &'static FilonBases {
    static BASES: OnceLock<FilonBases> = OnceLock::new();
    BASES.get_or_init(|| {
        let pts = kronrod_points();
        let gauss: Vec<f64> = (0..15).filter(|i| i % 2 == 1).map(|i| pts[i]).collect();
        FilonBases { kronrod: lagrange_monomials(&pts), gauss: lagrange_monomials(&gauss) }
    })
}

/// `∫_{-1}^{1} s^k exp(i κ s) ds` for `k < n`, by upward recurrence (stable for `|κ| ≥ n`).
fn oscillatory_moments(kappa: f64, n: usize) -> Vec<Complex64> {
    let e_plus = Complex64::from_polar(1.0, kappa);
    let e_minus = e_plus.conj();
    let ik = Complex64::new(0.0, kappa);
    let mut mu = Vec::with_capacity(n);
    mu.push(Complex64::new(2.0 * kappa.sin() / kappa, 0.0));
    for k in 1..n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let boundary = (e_plus - e_minus * sign) / ik;
        mu.push(boundary - mu[k - 1] * (k as f64) / ik);
    }
    mu
}

/// Below this `|κ|` the plain Kronrod rule resolves `exp(iκs)` on `[-1, 1]`.
pub const FILON_THRESHOLD: f64 = 15.0;

/// Filon weights for `∫_{-1}^{1} g(s) exp(iκs) ds ≈ Σ W_i g(s_i)` at the 15
/// Kronrod points, plus the 7-point Gauss counterpart (zero off the Gauss
/// points) for an error estimate.
pub fn filon_weights(kappa: f64) -> ([Complex64; 15], [Complex64; 15]) {
    let bases = filon_bases();
    let mu = oscillatory_moments(kappa, 15);
    let mut wk = [Complex64::new(0.0, 0.0); 15];
    let mut wg = [Complex64::new(0.0, 0.0); 15];
    for (i, row) in bases.kronrod.iter().enumerate() {
        wk[i] = row.iter().zip(&mu).map(|(c, m)| m * c).sum();
    }
    for (j, row) in bases.gauss.iter().enumerate() {
        wg[2 * j + 1] = row.iter().zip(&mu).map(|(c, m)| m * c).sum();
    }
    (wk, wg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((s - 2.0 / 23.0).abs() < 1e-14);
    }

    #[test]
    fn kronrod_rule_is_exact_to_degree_22() {
        let (v, _) = gk15(|x| Complex64::new(x.powi(22), 0.0), -1.0, 1.0);
        assert!((v.re - 2.0 / 23.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let r = adaptive_gk15(|x| Complex64::from_polar(1.0, 200.0 * x), &[0.0, 1.0], 1e-12, 100_000);
        let exact = (Complex64::from_polar(1.0, 200.0) - 1.0) / Complex64::new(0.0, 200.0);
        assert!(r.converged);
        assert!((r.value - exact).norm() < 1e-12);
    }

    #[test]
    fn filon_weights_integrate_smooth_times_oscillation() {
        let kappa = 300.0;
        let (wk, wg) = filon_weights(kappa);
        let pts = kronrod_points();
        let g = |s: f64| (0.3 * s).exp() * (1.7 * s).cos();
        let fil: Complex64 = pts.iter().zip(&wk).map(|(s, w)| w * g(*s)).sum();
        let fil7: Complex64 = pts.iter().zip(&wg).map(|(s, w)| w * g(*s)).sum();
        let reference =
            adaptive_gk15(|s| Complex64::from_polar(g(s), kappa * s), &[-1.0, 1.0], 1e-15, 1_000_000);
        assert!((fil - reference.value).norm() < 1e-12, "{fil} {}", reference.value);
        assert!((fil7 - reference.value).norm() < 1e-6);
    }
}
