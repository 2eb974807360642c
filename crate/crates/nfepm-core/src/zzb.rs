//! Ziv-Zakai bounds for the joint `(z_t, t_z)` problem and for attitude-only
//! estimation.
//!
//! The inner double integrals reuse y-moments of the channel difference.
//! Writing `h = a(z, y) g(t; z, y) e^{jkr}` with `a = √z / r^{5/2}` and
//! `g = y t + z √(1 - t²)`, the ambiguity function splits as
//!
//! `|h1 - h0|² = (a1 g1 - a0 g0)² + 4 a1 a0 g1 g0 sin²(k Δr / 2)`,
//!
//! and both terms are quadratic forms in a handful of `t`-dependent
//! coefficients. Thirteen integrals per `(ϑ_z, δ_z)` then give `μ` for every
//! `(ϑ_t, δ_t)` and every SNR without further quadrature. The split avoids
//! the cancellation of the direct expansion when `δ` is small.

use num_complex::Complex64;

use crate::channel::{nf_channel_axis, PoseCpl};
use crate::error::{invalid, Result};
use crate::geometry::{ArrayGeometry, PriorUniform, Wave};
use crate::numerics::{graded_nodes, integrate, integrate_vec_floored, midpoints, par_map, q_function, q_general, QuadratureSpec};

/// Two hypotheses `ϑ` and `ϑ + δ` in the `(z_t, t_z)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisPair {
    pub theta_z: f64,
    pub theta_t: f64,
    pub delta_z: f64,
    pub delta_t: f64,
}

impl HypothesisPair {
    pub fn new(theta_z: f64, theta_t: f64, delta_z: f64, delta_t: f64) -> Result<Self> {
        if !(theta_z > 0.0) || !theta_z.is_finite() {
            return Err(invalid("theta_z", "must be positive and finite"));
        }
        if !(delta_z >= 0.0 && delta_t >= 0.0) {
            return Err(invalid("delta", "components must be >= 0"));
        }
        if !(theta_t >= 0.0 && theta_t + delta_t < 1.0) {
            return Err(invalid("theta_t", "need 0 <= theta_t and theta_t + delta_t < 1"));
        }
        Ok(Self { theta_z, theta_t, delta_z, delta_t })
    }

    /// Whether both hypotheses lie in the prior box.
    pub fn within(&self, prior: &PriorUniform) -> bool {
        self.theta_z >= prior.h1 && self.theta_z + self.delta_z <= prior.h2 && self.delta_z <= prior.h_t()
    }

    pub fn h0(&self) -> PoseCpl {
        PoseCpl { z_t: self.theta_z, t_z: self.theta_t }
    }

    pub fn h1(&self) -> PoseCpl {
        PoseCpl { z_t: self.theta_z + self.delta_z, t_z: self.theta_t + self.delta_t }
    }
}

/// Grid sizes of the ZZB evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZzbGrid {
    /// Node budget of the outer integral over `δ`.
    pub n_delta: usize,
    pub n_theta_z: usize,
    pub n_theta_t: usize,
    /// Uniform search points for the inner maximization, `0` included.
    pub n_max_search: usize,
    pub quad: QuadratureSpec,
}

impl Default for ZzbGrid {
    fn default() -> Self {
        Self {
            n_delta: 64,
            n_theta_z: 64,
            n_theta_t: 64,
            n_max_search: 16,
            quad: QuadratureSpec { abs_tol: 1e-300, rel_tol: 1e-10, max_subdivisions: 20_000 },
        }
    }
}

impl ZzbGrid {
    pub fn new(n_delta: usize, n_theta_z: usize, n_theta_t: usize, n_max_search: usize) -> Result<Self> {
        let g = Self { n_delta, n_theta_z, n_theta_t, n_max_search, ..Self::default() };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_delta < 4 {
            return Err(invalid("n_delta", "must be >= 4"));
        }
        if self.n_theta_z < 2 || self.n_theta_t < 2 {
            return Err(invalid("n_theta", "must be >= 2"));
        }
        if self.n_max_search < 1 {
            return Err(invalid("n_max_search", "must be >= 1"));
        }
        Ok(())
    }
}

/// `A(ϑ, δ, y_r)`: squared magnitude difference of the two channels.
pub fn ambiguity_function(pair: &HypothesisPair, y_r: f64, wave: &Wave) -> f64 {
    let (p0, p1) = (pair.h0(), pair.h1());
    let m1 = nf_channel_axis(&p1, y_r, wave).norm();
    let m0 = nf_channel_axis(&p0, y_r, wave).norm();
    let da = (y_r * y_r + p1.z_t * p1.z_t).sqrt() - (y_r * y_r + p0.z_t * p0.z_t).sqrt();
    (m1 * m1 + m0 * m0 - 2.0 * m1 * m0 * (wave.k() * da).cos()).max(0.0)
}

/// `|h(ϑ+δ) - h(ϑ)|²` from the complex channel values.
pub fn channel_difference(pair: &HypothesisPair, y_r: f64, wave: &Wave) -> f64 {
    let d: Complex64 = nf_channel_axis(&pair.h1(), y_r, wave) - nf_channel_axis(&pair.h0(), y_r, wave);
    d.norm_sqr()
}

/// Mean of the log-likelihood ratio, `SNR l_s ∫_0^{D_r} A dy`.
pub fn mu_l(pair: &HypothesisPair, snr: f64, geom: &ArrayGeometry, wave: &Wave, spec: &QuadratureSpec) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(invalid("snr", "must be >= 0"));
    }
    if snr == 0.0 {
        return Ok(0.0);
    }
    let m = Moments::compute(pair.theta_z, pair.delta_z, geom, wave, spec)?;
    Ok(snr * geom.l_s() * m.mu_unit(pair.theta_t, pair.delta_t))
}

/// Minimum error probability `Q(√(μ/2))` for equally likely hypotheses.
pub fn p_min(mu: f64) -> f64 {
    q_function((0.5 * mu.max(0.0)).sqrt())
}

/// Minimum error probability for prior probabilities `p0`, `p1`.
pub fn p_min_general(mu: f64, p0: f64, p1: f64) -> f64 {
    q_general(mu, p0, p1)
}

/// Prior variances, the low-SNR limits of the two bounds.
pub fn zzb_asymptotic(prior: &PriorUniform) -> (f64, f64) {
    (prior.h_t().powi(2) / 12.0, 1.0 / 12.0)
}

fn mu_ao_unit(z: f64, theta_t: f64, delta_t: f64, d_r: f64) -> f64 {
    let t1 = theta_t + delta_t;
    let f = (1.0 - theta_t * theta_t).sqrt() - (1.0 - t1 * t1).sqrt();
    let d = delta_t;
    if d_r.is_infinite() {
        return ((d - f).powi(2) + f * f) / (3.0 * z);
    }
    let tau = d_r / z;
    let s3 = (tau * tau + 1.0).powf(1.5);
    let v = (d * d * tau.powi(3) + 2.0 * d * f + f * f * (2.0 * tau * tau + 3.0) * tau) / (3.0 * z * s3) - 2.0 * d * f / (3.0 * z);
    v.max(0.0)
}

/// `μ` with `δ_z = 0`, where the cosine term drops out.
pub fn mu_l_ao(z_t: f64, theta_t: f64, delta_t: f64, snr: f64, geom: &ArrayGeometry) -> Result<f64> {
    if !(theta_t >= 0.0 && delta_t >= 0.0 && theta_t + delta_t < 1.0) {
        return Err(invalid("theta_t", "need 0 <= theta_t, delta_t and theta_t + delta_t < 1"));
    }
    if !(z_t > 0.0) {
        return Err(invalid("z_t", "must be positive"));
    }
    Ok(snr * geom.l_s() * mu_ao_unit(z_t, theta_t, delta_t, geom.d_r()))
}

/// Quadrature form of [`mu_l_ao`], `SNR l_s z ∫ (yδ - zF)² / r⁵ dy`.
pub fn mu_l_ao_quadrature(z_t: f64, theta_t: f64, delta_t: f64, snr: f64, geom: &ArrayGeometry, spec: &QuadratureSpec) -> Result<f64> {
    let t1 = theta_t + delta_t;
    let f = (1.0 - theta_t * theta_t).sqrt() - (1.0 - t1 * t1).sqrt();
    let v = integrate(
        |y| {
            let r2 = y * y + z_t * z_t;
            z_t * (y * delta_t - z_t * f).powi(2) / (r2 * r2 * r2.sqrt())
        },
        0.0,
        geom.d_r(),
        spec,
    )?;
    Ok(snr * geom.l_s() * v)
}

/// y-moments for one `(ϑ_z, δ_z)`.
#[derive(Debug, Clone, Copy)]
struct Moments {
    z0: f64,
    z1: f64,
    /// Upper triangle of the Gram matrix of `[y a1, y Δa, a1 z1 - a0 z0, a0 z0]`.
    g: [f64; 10],
    /// `∫ 4 a1 a0 sin²(kΔr/2) {y², y, 1}`.
    s: [f64; 3],
}

impl Moments {
    fn compute(z0: f64, dz: f64, geom: &ArrayGeometry, wave: &Wave, spec: &QuadratureSpec) -> Result<Self> {
        let z1 = z0 + dz;
        let k = wave.k();
        let d_r = geom.d_r();
        // The sin² moments can sit far below their envelope ∫ 4 a1 a0 y^p when
        // k Δr / 2 is close to a multiple of π, where sin() carries a roundoff
        // floor. Their tolerance is taken relative to an upper bound on that
        // envelope: the smaller of the a <= z^-2 bound and Cauchy-Schwarz on
        // the half-line integrals of a² y^p.
        let half_line = |z: f64| [2.0 / (3.0 * z.powi(3)), 1.0 / (3.0 * z * z), 1.0 / (3.0 * z)];
        let (e0, e1) = (half_line(z0), half_line(z1));
        let mut floor = [0.0; 13];
        for p in 0..3 {
            let box_bound = 4.0 / (z0 * z0 * z1 * z1) * d_r.powi(p as i32 + 1) / (p as f64 + 1.0);
            let cs_bound = 4.0 * (e0[p] * e1[p]).sqrt();
            floor[12 - p] = spec.rel_tol * box_bound.min(cs_bound);
        }
        let v = integrate_vec_floored(
            |y: f64| {
                let r0sq = y * y + z0 * z0;
                let r0 = r0sq.sqrt();
                let r1 = (y * y + z1 * z1).sqrt();
                let a0 = z0.sqrt() / r0.powf(2.5);
                // a1/a0 and z1 a1/(z0 a0) via log1p, so the differences stay
                // accurate when dz is tiny.
                let lz = (dz / z0).ln_1p();
                let la = 0.5 * lz - 1.25 * (dz * (z0 + z1) / r0sq).ln_1p();
                let da = a0 * la.exp_m1();
                let a1 = a0 + da;
                let phi = [y * a1, y * da, a0 * z0 * (la + lz).exp_m1(), a0 * z0];
                let dr = dz * (z0 + z1) / (r0 + r1);
                let w = 4.0 * a1 * a0 * (0.5 * k * dr).sin().powi(2);
                [
                    phi[0] * phi[0],
                    phi[0] * phi[1],
                    phi[0] * phi[2],
                    phi[0] * phi[3],
                    phi[1] * phi[1],
                    phi[1] * phi[2],
                    phi[1] * phi[3],
                    phi[2] * phi[2],
                    phi[2] * phi[3],
                    phi[3] * phi[3],
                    w * y * y,
                    w * y,
                    w,
                ]
            },
            0.0,
            d_r,
            spec,
            floor,
        )?;
        let mut g = [0.0; 10];
        g.copy_from_slice(&v[..10]);
        Ok(Self { z0, z1, g, s: [v[10], v[11], v[12]] })
    }

    /// `μ / (SNR l_s)` at `(ϑ_t, δ_t)`.
    fn mu_unit(&self, t0: f64, dt: f64) -> f64 {
        let t1 = t0 + dt;
        let s0 = (1.0 - t0 * t0).sqrt();
        let s1 = (1.0 - t1 * t1).sqrt();
        let ds = -dt * (t0 + t1) / (s0 + s1);
        let c = [dt, t0, s1, ds];
        let g = &self.g;
        let quad = c[0] * c[0] * g[0]
            + c[1] * c[1] * g[4]
            + c[2] * c[2] * g[7]
            + c[3] * c[3] * g[9]
            + 2.0 * (c[0] * c[1] * g[1] + c[0] * c[2] * g[2] + c[0] * c[3] * g[3] + c[1] * c[2] * g[5] + c[1] * c[3] * g[6] + c[2] * c[3] * g[8]);
        let cross = t1 * t0 * self.s[0] + (t1 * self.z0 * s0 + self.z1 * s1 * t0) * self.s[1] + self.z1 * self.z0 * s1 * s0 * self.s[2];
        (quad + cross).max(0.0)
    }
}

/// One `δ_z` value with its `ϑ_z` nodes. `moments` is `None` for `δ_z = 0`,
/// which uses the closed form.
struct Slice {
    z_nodes: Vec<f64>,
    /// `(H2 - δ_z - H1) / H_t`.
    frac: f64,
    moments: Option<Vec<Moments>>,
}

impl Slice {
    fn build(dz: f64, prior: &PriorUniform, geom: &ArrayGeometry, wave: &Wave, grid: &ZzbGrid) -> Result<Self> {
        let top = prior.h2 - dz;
        let z_nodes = midpoints(prior.h1, top, grid.n_theta_z);
        let frac = (top - prior.h1) / prior.h_t();
        let moments = if dz == 0.0 {
            None
        } else {
            let ms = par_map(z_nodes.len(), |i| Moments::compute(z_nodes[i], dz, geom, wave, &grid.quad));
            Some(ms.into_iter().collect::<Result<Vec<_>>>()?)
        };
        Ok(Self { z_nodes, frac, moments })
    }

    /// `(1/H_t) ∬_Ξ Q(√(μ/2)) dϑ` at `δ_t = dt` and `c = SNR l_s`.
    fn inner(&self, dt: f64, c: f64, n_theta_t: usize, d_r: f64) -> f64 {
        let t_nodes = midpoints(0.0, 1.0 - dt, n_theta_t);
        let wt = (1.0 - dt) / n_theta_t as f64;
        let mut acc = 0.0;
        for (i, &z) in self.z_nodes.iter().enumerate() {
            let mut row = 0.0;
            for &t in &t_nodes {
                let mu = match &self.moments {
                    Some(ms) => ms[i].mu_unit(t, dt),
                    None => mu_ao_unit(z, t, dt, d_r),
                };
                row += p_min(c * mu);
            }
            acc += row * wt;
        }
        self.frac * (acc / self.z_nodes.len() as f64)
    }
}

fn check_inputs(snrs: &[f64], geom: &ArrayGeometry, grid: &ZzbGrid) -> Result<()> {
    grid.validate()?;
    if snrs.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
        return Err(invalid("snr", "must be finite and >= 0"));
    }
    if !(geom.l_s() > 0.0) {
        return Err(invalid("l_s", "must be positive"));
    }
    Ok(())
}

/// Bound on the MSE of `z_t` at each SNR in `snrs`.
pub fn zzb_z_curve(prior: &PriorUniform, snrs: &[f64], geom: &ArrayGeometry, wave: &Wave, grid: &ZzbGrid) -> Result<Vec<f64>> {
    check_inputs(snrs, geom, grid)?;
    let nodes = graded_nodes(prior.h_t(), grid.n_delta);
    let slices = nodes
        .iter()
        .map(|&(dz, _)| Slice::build(dz, prior, geom, wave, grid))
        .collect::<Result<Vec<_>>>()?;
    let search: Vec<f64> = (0..grid.n_max_search).map(|j| j as f64 / grid.n_max_search as f64).collect();
    let d_r = geom.d_r();
    Ok(snrs
        .iter()
        .map(|&snr| {
            let c = snr * geom.l_s();
            let terms = par_map(nodes.len(), |i| {
                let best = search.iter().map(|&dt| slices[i].inner(dt, c, grid.n_theta_t, d_r)).fold(0.0, f64::max);
                nodes[i].1 * nodes[i].0 * best
            });
            terms.iter().sum()
        })
        .collect())
}

/// Bound on the MSE of `t_z` at each SNR in `snrs`.
pub fn zzb_t_curve(prior: &PriorUniform, snrs: &[f64], geom: &ArrayGeometry, wave: &Wave, grid: &ZzbGrid) -> Result<Vec<f64>> {
    check_inputs(snrs, geom, grid)?;
    let nodes = graded_nodes(1.0, grid.n_delta);
    let slices = (0..grid.n_max_search)
        .map(|j| Slice::build(j as f64 * prior.h_t() / grid.n_max_search as f64, prior, geom, wave, grid))
        .collect::<Result<Vec<_>>>()?;
    let d_r = geom.d_r();
    Ok(snrs
        .iter()
        .map(|&snr| {
            let c = snr * geom.l_s();
            let terms = par_map(nodes.len(), |i| {
                let dt = nodes[i].0;
                let best = slices.iter().map(|s| s.inner(dt, c, grid.n_theta_t, d_r)).fold(0.0, f64::max);
                nodes[i].1 * dt * best
            });
            terms.iter().sum()
        })
        .collect())
}

pub fn zzb_z(prior: &PriorUniform, snr: f64, geom: &ArrayGeometry, wave: &Wave, grid: &ZzbGrid) -> Result<f64> {
    Ok(zzb_z_curve(prior, &[snr], geom, wave, grid)?[0])
}

pub fn zzb_t(prior: &PriorUniform, snr: f64, geom: &ArrayGeometry, wave: &Wave, grid: &ZzbGrid) -> Result<f64> {
    Ok(zzb_t_curve(prior, &[snr], geom, wave, grid)?[0])
}

/// Attitude-only bound on the MSE of `t_z`, averaging over the `z_t` prior.
pub fn zzb_ao_t_curve(prior: &PriorUniform, snrs: &[f64], geom: &ArrayGeometry, grid: &ZzbGrid) -> Result<Vec<f64>> {
    check_inputs(snrs, geom, grid)?;
    let nodes = graded_nodes(1.0, grid.n_delta);
    let slice = Slice { z_nodes: midpoints(prior.h1, prior.h2, grid.n_theta_z), frac: 1.0, moments: None };
    let d_r = geom.d_r();
    Ok(snrs
        .iter()
        .map(|&snr| {
            let c = snr * geom.l_s();
            let terms = par_map(nodes.len(), |i| nodes[i].1 * nodes[i].0 * slice.inner(nodes[i].0, c, grid.n_theta_t, d_r));
            terms.iter().sum()
        })
        .collect())
}

pub fn zzb_ao_t(prior: &PriorUniform, snr: f64, geom: &ArrayGeometry, grid: &ZzbGrid) -> Result<f64> {
    Ok(zzb_ao_t_curve(prior, &[snr], geom, grid)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (PriorUniform, ArrayGeometry, Wave) {
        (PriorUniform::new(3.0, 5.0).unwrap(), ArrayGeometry::new(5.0, 0.1).unwrap(), Wave::new(0.1, 1.0).unwrap())
    }

    fn small() -> ZzbGrid {
        ZzbGrid::new(16, 8, 8, 4).unwrap()
    }

    #[test]
    fn af_matches_complex_difference() {
        let w = Wave::new(0.1, 1.0).unwrap();
        for &(z, t, dz, dt, y) in &[(3.0, 0.2, 0.3, 0.1, 1.0), (4.0, 0.0, 0.0, 0.5, 2.5), (3.5, 0.7, 1e-3, 0.0, 0.2)] {
            let p = HypothesisPair::new(z, t, dz, dt).unwrap();
            let a = ambiguity_function(&p, y, &w);
            let b = channel_difference(&p, y, &w);
            assert!((a - b).abs() <= 1e-10 * b.max(1e-12), "{a} {b}");
        }
        let p = HypothesisPair::new(3.0, 0.3, 0.0, 0.0).unwrap();
        assert_eq!(ambiguity_function(&p, 1.0, &w), 0.0);
    }

    #[test]
    fn moment_mu_matches_direct_quadrature() {
        let (_, geom, w) = setup();
        let spec = QuadratureSpec { abs_tol: 1e-300, rel_tol: 1e-12, max_subdivisions: 20_000 };
        for &(z, t, dz, dt) in &[(3.0, 0.2, 0.3, 0.1), (4.0, 0.1, 0.02, 0.5), (3.5, 0.7, 1e-3, 0.0), (3.2, 0.5, 1e-4, 1e-3)] {
            let p = HypothesisPair::new(z, t, dz, dt).unwrap();
            let m = mu_l(&p, 1.0, &geom, &w, &spec).unwrap();
            let direct = 0.1 * integrate(|y| channel_difference(&p, y, &w), 0.0, 5.0, &spec).unwrap();
            assert!((m - direct).abs() <= 1e-8 * direct, "{m} {direct}");
        }
    }

    #[test]
    fn ao_closed_form_matches_quadrature() {
        let geom = ArrayGeometry::new(5.0, 0.1).unwrap();
        let spec = QuadratureSpec::default();
        for &(z, t, d) in &[(3.0, 0.1, 0.2), (4.5, 0.6, 0.3), (9.0, 0.0, 0.95)] {
            let a = mu_l_ao(z, t, d, 7.0, &geom).unwrap();
            let b = mu_l_ao_quadrature(z, t, d, 7.0, &geom, &spec).unwrap();
            assert!((a - b).abs() <= 1e-8 * b);
        }
        assert_eq!(mu_l_ao(3.0, 0.4, 0.0, 7.0, &geom).unwrap(), 0.0);
    }

    #[test]
    fn p_min_limits() {
        assert_eq!(p_min(0.0), 0.5);
        assert!(p_min(1e4) < 1e-300);
        for &mu in &[0.1, 1.0, 7.5] {
            assert!((p_min(mu) - p_min_general(mu, 0.5, 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_snr_gives_prior_variance() {
        let (prior, geom, w) = setup();
        let g = small();
        let (vz, vt) = zzb_asymptotic(&prior);
        assert!((zzb_z(&prior, 0.0, &geom, &w, &g).unwrap() - vz).abs() < 1e-12);
        assert!((zzb_t(&prior, 0.0, &geom, &w, &g).unwrap() - vt).abs() < 1e-12);
        assert!((zzb_ao_t(&prior, 0.0, &geom, &g).unwrap() - vt).abs() < 1e-12);
    }

    #[test]
    fn ordering_and_monotonicity() {
        let (prior, geom, w) = setup();
        let g = small();
        let snrs = [1.0, 1e2, 1e4];
        let zt = zzb_t_curve(&prior, &snrs, &geom, &w, &g).unwrap();
        let ao = zzb_ao_t_curve(&prior, &snrs, &geom, &g).unwrap();
        let zz = zzb_z_curve(&prior, &snrs, &geom, &w, &g).unwrap();
        for i in 0..3 {
            assert!(zt[i] >= ao[i]);
            if i > 0 {
                assert!(zt[i] <= zt[i - 1] && zz[i] <= zz[i - 1]);
            }
        }
    }
}
