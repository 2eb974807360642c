//! Shared numeric kernels: adaptive Gauss-Kronrod quadrature, the Gaussian
//! tail function, midpoint expectations over the uniform prior, the outer
//! Gauss-Legendre rule used by the ZZB integrals and seeded random streams.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::PriorUniform;

/// Default upper cap on t_z for prior expectations (the prior is open at 1).
pub const T_EPS: f64 = 1e-4;

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-300, rel_tol: 1e-11, max_subdivisions: 2000 }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) {
            return Err(crate::error::invalid("quadrature tolerance", "tolerances must be positive"));
        }
        if max_subdivisions == 0 {
            return Err(crate::error::invalid("max_subdivisions", "must be at least 1"));
        }
        Ok(Self { abs_tol, rel_tol, max_subdivisions })
    }
}

/// Integral estimate with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy)]
struct Panel<const M: usize> {
    a: f64,
    b: f64,
    value: [f64; M],
    error: [f64; M],
    abs: [f64; M],
    key: f64,
}

impl<const M: usize> PartialEq for Panel<M> {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl<const M: usize> Eq for Panel<M> {}
impl<const M: usize> PartialOrd for Panel<M> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const M: usize> Ord for Panel<M> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key)
    }
}

fn gk15<const M: usize, F: Fn(f64) -> [f64; M]>(f: &F, a: f64, b: f64) -> ([f64; M], [f64; M], [f64; M]) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = [0.0; M];
    let mut rg = [0.0; M];
    let mut rabs = [0.0; M];
    let mut fv1 = [[0.0; M]; 7];
    let mut fv2 = [[0.0; M]; 7];
    for m in 0..M {
        rk[m] = WGK[7] * fc[m];
        rg[m] = WG[3] * fc[m];
        rabs[m] = (WGK[7] * fc[m]).abs();
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for m in 0..M {
            rk[m] += WGK[j] * (f1[m] + f2[m]);
            rabs[m] += WGK[j] * (f1[m].abs() + f2[m].abs());
            if j % 2 == 1 {
                rg[m] += WG[j / 2] * (f1[m] + f2[m]);
            }
        }
        fv1[j] = f1;
        fv2[j] = f2;
    }
    let mut value = [0.0; M];
    let mut error = [0.0; M];
    let mut abs = [0.0; M];
    for m in 0..M {
        let mean = 0.5 * rk[m];
        let mut asc = WGK[7] * (fc[m] - mean).abs();
        for j in 0..7 {
            asc += WGK[j] * ((fv1[j][m] - mean).abs() + (fv2[j][m] - mean).abs());
        }
        let resasc = asc * h.abs();
        let resabs = rabs[m] * h.abs();
        let mut err = ((rk[m] - rg[m]) * h).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        let floor = 50.0 * f64::EPSILON * resabs;
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && err < floor {
            err = floor;
        }
        value[m] = rk[m] * h;
        error[m] = err;
        abs[m] = resabs;
    }
    (value, error, abs)
}

/// Adaptive G7K15 quadrature of a vector-valued integrand on `[a, b]`.
///
/// Each component must reach `max(abs_tol, rel_tol * ∫|f_m|)`. An infinite
/// upper limit is handled with the map `y = a + s/(1-s)`.
pub fn integrate_vec<const M: usize, F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<[f64; M]>
where
    F: Fn(f64) -> [f64; M],
{
    integrate_vec_floored(f, a, b, spec, [spec.abs_tol; M])
}

/// [`integrate_vec`] with a per-component absolute tolerance. Component `m`
/// converges once its error is below `max(floor[m], rel_tol * |f_m|_1)`.
/// Useful when a component can be orders of magnitude below its natural
/// scale and its integrand carries a roundoff floor at that level.
pub fn integrate_vec_floored<const M: usize, F>(f: F, a: f64, b: f64, spec: &QuadratureSpec, floor: [f64; M]) -> Result<[f64; M]>
where
    F: Fn(f64) -> [f64; M],
{
    let floor: [f64; M] = std::array::from_fn(|m| floor[m].max(spec.abs_tol));
    if !(a.is_finite()) || b.is_nan() || b < a {
        return Err(crate::error::invalid("integration limits", format!("need finite a <= b, got [{a}, {b}]")));
    }
    if a == b {
        return Ok([0.0; M]);
    }
    if b == f64::INFINITY {
        let g = |s: f64| {
            let one_minus = 1.0 - s;
            let jac = 1.0 / (one_minus * one_minus);
            let mut v = f(a + s / one_minus);
            for x in v.iter_mut() {
                *x *= jac;
            }
            v
        };
        return adaptive(&g, 0.0, 1.0, spec, &floor);
    }
    adaptive(&f, a, b, spec, &floor)
}

fn adaptive<const M: usize, F: Fn(f64) -> [f64; M]>(f: &F, a: f64, b: f64, spec: &QuadratureSpec, floor: &[f64; M]) -> Result<[f64; M]> {
    let (v, e, s) = gk15(f, a, b);
    let scale: [f64; M] = std::array::from_fn(|m| (spec.rel_tol * s[m]).max(floor[m]).max(f64::MIN_POSITIVE));
    let key = |e: &[f64; M]| (0..M).map(|m| e[m] / scale[m]).fold(0.0, f64::max);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, error: e, abs: s, key: key(&e) });
    let mut total_v = v;
    let mut total_e = e;
    let mut total_abs = s;
    let mut subdivisions = 0;
    loop {
        let mut done = true;
        for m in 0..M {
            let tol = floor[m].max(spec.rel_tol * total_abs[m]);
            if !total_e[m].is_finite() || !total_v[m].is_finite() {
                return Err(Error::NonFinite("integrand"));
            }
            if total_e[m] > tol {
                done = false;
            }
        }
        if done {
            return Ok(total_v);
        }
        if subdivisions >= spec.max_subdivisions {
            let excess = |m: usize| total_e[m] / floor[m].max(spec.rel_tol * total_abs[m]);
            let worst = (0..M).max_by(|&i, &j| excess(i).total_cmp(&excess(j))).unwrap_or(0);
            return Err(Error::QuadratureFailure { value: total_v[worst], error: total_e[worst], subdivisions });
        }
        let p = match heap.pop() {
            Some(p) => p,
            None => return Ok(total_v),
        };
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Panel cannot be split further; accept what we have.
            return Ok(total_v);
        }
        let (v1, e1, s1) = gk15(f, p.a, mid);
        let (v2, e2, s2) = gk15(f, mid, p.b);
        for m in 0..M {
            total_v[m] += v1[m] + v2[m] - p.value[m];
            total_e[m] += e1[m] + e2[m] - p.error[m];
            total_abs[m] += s1[m] + s2[m] - p.abs[m];
        }
        heap.push(Panel { a: p.a, b: mid, value: v1, error: e1, abs: s1, key: key(&e1) });
        heap.push(Panel { a: mid, b: p.b, value: v2, error: e2, abs: s2, key: key(&e2) });
        subdivisions += 1;
        if subdivisions % 64 == 0 {
            // Re-sum to keep running totals free of drift.
            let mut tv = [0.0; M];
            let mut te = [0.0; M];
            let mut ta = [0.0; M];
            for q in heap.iter() {
                for m in 0..M {
                    tv[m] += q.value[m];
                    te[m] += q.error[m];
                    ta[m] += q.abs[m];
                }
            }
            total_v = tv;
            total_e = te;
            total_abs = ta;
        }
    }
}

/// Adaptive quadrature of a scalar integrand. See [`integrate_vec`].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    integrate_vec(|x| [f(x)], a, b, spec).map(|v| v[0])
}

/// Gaussian tail probability Q(x) = erfc(x/√2)/2.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Minimum error probability of the binary test with log-likelihood-ratio
/// mean `mu` and prior probabilities `p0`, `p1`.
pub fn q_general(mu: f64, p0: f64, p1: f64) -> f64 {
    if mu <= 0.0 {
        return p0.min(p1);
    }
    let g = (p1 / p0).ln();
    let s = (2.0 * mu).sqrt();
    p0 * q_function((mu - g) / s) + p1 * q_function((mu + g) / s)
}

/// Midpoint tensor-grid average of `f(z_t, t_z)` over `[H1, H2] x [0, 1 - eps]`.
pub fn expect_uniform<F>(f: F, prior: &PriorUniform, n_z: usize, n_t: usize, eps: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    if n_z == 0 || n_t == 0 {
        return Err(crate::error::invalid("expectation grid", "n_z and n_t must be >= 1"));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(crate::error::invalid("eps", "must lie in [0, 1)"));
    }
    let dz = prior.h_t() / n_z as f64;
    let dt = (1.0 - eps) / n_t as f64;
    let rows = par_map(n_z, |i| {
        let z = prior.h1 + (i as f64 + 0.5) * dz;
        let mut acc = 0.0;
        for j in 0..n_t {
            let t = (j as f64 + 0.5) * dt;
            acc += f(z, t)?;
        }
        Ok(acc)
    });
    let mut total = 0.0;
    for r in rows {
        total += r?;
    }
    Ok(total / (n_z * n_t) as f64)
}

/// Midpoint nodes of `n` equal cells on `[a, b]`.
pub fn midpoints(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / n as f64;
    (0..n).map(|i| a + (i as f64 + 0.5) * h).collect()
}

const GL4_X: [f64; 2] = [0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const GL4_W: [f64; 2] = [0.652_145_154_862_546_1, 0.347_854_845_137_453_9];

/// Quadrature nodes and weights for `∫_0^h g(δ) dδ` when `g` may be sharply
/// concentrated near the origin.
///
/// Four-point Gauss-Legendre panels on geometrically graded subintervals whose
/// smallest edge sits at `h * 1e-6`. `n` is the total node budget (rounded
/// down to a multiple of four, at least four).
pub fn graded_nodes(h: f64, n: usize) -> Vec<(f64, f64)> {
    let panels = (n / 4).max(1);
    let mut edges = Vec::with_capacity(panels + 1);
    edges.push(0.0);
    if panels == 1 {
        edges.push(h);
    } else {
        let rho = (1e-6f64).powf(1.0 / (panels - 1) as f64);
        for j in 1..=panels {
            edges.push(h * rho.powi((panels - j) as i32));
        }
    }
    let mut out = Vec::with_capacity(4 * panels);
    for w in edges.windows(2) {
        let c = 0.5 * (w[0] + w[1]);
        let r = 0.5 * (w[1] - w[0]);
        for (x, wt) in [(-GL4_X[1], GL4_W[1]), (-GL4_X[0], GL4_W[0]), (GL4_X[0], GL4_W[0]), (GL4_X[1], GL4_W[1])] {
            out.push((c + r * x, r * wt));
        }
    }
    out
}

/// Generator for stream `stream` of the seeded ChaCha8 family.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator keyed by `(seed, stream, element)`: each element reads from its
/// own disjoint window of the stream, independent of evaluation order.
pub fn element_rng(seed: u64, stream: u64, element: usize) -> ChaCha8Rng {
    let mut rng = stream_rng(seed, stream);
    rng.set_word_pos((element as u128) << 24);
    rng
}

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Send, F: Fn(usize) -> T + Sync>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(&f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T: Send, F: Fn(usize) -> T + Sync>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}
