//! Grid-search MAP estimation and its Monte-Carlo MSE.
//!
//! Under the uniform prior the posterior maximum is the likelihood maximum
//! over the prior box. For fixed `z_t` the residual is a quadratic in
//! `(t_z, √(1 - t_z²))` whose coefficients are sums over the elements, so
//! each `z_t` row costs `O(N)` and each grid point `O(1)`.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{nf_channel_axis, PoseCpl};
use crate::error::{invalid, Error, Result};
use crate::geometry::{ArrayGeometry, PriorUniform, Wave};
use crate::numerics::{par_map, stream_rng, T_EPS};
use crate::observation::{noiseless_voltages, observe, NoiseSpec, VoltageVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapGrid {
    pub n_z: usize,
    pub n_t: usize,
    /// Rounds of local search, each over a window three cells wide.
    pub refine_levels: usize,
}

impl Default for MapGrid {
    fn default() -> Self {
        Self { n_z: 256, n_t: 128, refine_levels: 2 }
    }
}

impl MapGrid {
    pub fn new(n_z: usize, n_t: usize, refine_levels: usize) -> Result<Self> {
        if n_z < 2 || n_t < 2 {
            return Err(invalid("map grid", "n_z and n_t must be >= 2"));
        }
        Ok(Self { n_z, n_t, refine_levels })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseReport {
    pub mse_z: f64,
    pub mse_t: f64,
    pub se_z: f64,
    pub se_t: f64,
    pub trials: usize,
}

/// `Λ(ξ | ṽ) = -(1/σ²) Σ |ṽ_n - E_in l_s h_y(ξ; y_n)|²`.
pub fn log_likelihood(pose: &PoseCpl, vtilde: &VoltageVector, geom: &ArrayGeometry, wave: &Wave, noise: &NoiseSpec) -> Result<f64> {
    if noise.sigma2 == 0.0 {
        return Err(Error::ZeroNoise);
    }
    let s = wave.e_in() * geom.l_s();
    let ys = geom.element_centers()?;
    let r: f64 = ys
        .iter()
        .zip(vtilde.values())
        .map(|(&y, &v)| (v - s * nf_channel_axis(pose, y, wave)).norm_sqr())
        .sum();
    Ok(-r / noise.sigma2)
}

/// Residual coefficients of one `z_t` row.
struct Row {
    z: f64,
    c_y: f64,
    c_1: f64,
    m2: f64,
    m1: f64,
    m0: f64,
}

impl Row {
    fn new(z: f64, v: &[Complex64], ys: &[f64], k: f64) -> Self {
        let mut row = Row { z, c_y: 0.0, c_1: 0.0, m2: 0.0, m1: 0.0, m0: 0.0 };
        for (&y, &vn) in ys.iter().zip(v) {
            let r = (y * y + z * z).sqrt();
            let a = z.sqrt() / r.powf(2.5);
            let c = (vn.conj() * Complex64::from_polar(a, k * r)).re;
            row.c_y += c * y;
            row.c_1 += c;
            row.m2 += a * a * y * y;
            row.m1 += a * a * y;
            row.m0 += a * a;
        }
        row
    }

    /// Residual minus `Σ|ṽ|²`, for model amplitude `s`.
    fn residual(&self, t: f64, s: f64) -> f64 {
        let st = (1.0 - t * t).max(0.0).sqrt();
        let zs = self.z * st;
        -2.0 * s * (t * self.c_y + zs * self.c_1) + s * s * (t * t * self.m2 + 2.0 * t * zs * self.m1 + zs * zs * self.m0)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(move |i| if i + 1 == n { b } else { a + i as f64 * h })
}

fn search(v: &[Complex64], ys: &[f64], s: f64, k: f64, zr: (f64, f64), tr: (f64, f64), grid: &MapGrid) -> (f64, f64) {
    let mut best = (f64::INFINITY, zr.0, tr.0);
    for z in linspace(zr.0, zr.1, grid.n_z) {
        let row = Row::new(z, v, ys, k);
        for t in linspace(tr.0, tr.1, grid.n_t) {
            let r = row.residual(t, s);
            if r < best.0 {
                best = (r, z, t);
            }
        }
    }
    (best.1, best.2)
}

/// Grid MAP estimate over the prior box `[H1, H2] x [0, 1 - 1e-4]`.
///
/// Ties resolve to the smallest `(z, t)` grid index.
pub fn map_estimate(vtilde: &VoltageVector, prior: &PriorUniform, geom: &ArrayGeometry, wave: &Wave, grid: &MapGrid) -> Result<PoseCpl> {
    let ys = geom.element_centers()?;
    if ys.len() != vtilde.len() {
        return Err(invalid("voltages", "length does not match the geometry"));
    }
    let s = wave.e_in() * geom.l_s();
    let t_max = 1.0 - T_EPS;
    let mut zr = (prior.h1, prior.h2);
    let mut tr = (0.0, t_max);
    let (mut z, mut t) = search(vtilde.values(), &ys, s, wave.k(), zr, tr, grid);
    for _ in 0..grid.refine_levels {
        let hz = 1.5 * (zr.1 - zr.0) / (grid.n_z - 1) as f64;
        let ht = 1.5 * (tr.1 - tr.0) / (grid.n_t - 1) as f64;
        zr = ((z - hz).max(prior.h1), (z + hz).min(prior.h2));
        tr = ((t - ht).max(0.0), (t + ht).min(t_max));
        (z, t) = search(vtilde.values(), &ys, s, wave.k(), zr, tr, grid);
    }
    Ok(PoseCpl { z_t: z, t_z: t })
}

/// Monte-Carlo MSE of [`map_estimate`] with `ξ` drawn from the prior.
///
/// Trial `i` draws `ξ` from stream `2i` and its noise from stream `2i + 1`
/// of `seed`, so the report is bit-for-bit reproducible.
pub fn monte_carlo_mse(
    prior: &PriorUniform,
    geom: &ArrayGeometry,
    wave: &Wave,
    snr_db: f64,
    trials: usize,
    seed: u64,
    grid: &MapGrid,
) -> Result<MseReport> {
    if trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    let noise = NoiseSpec::from_snr_db(wave, snr_db, seed)?;
    let errs = par_map(trials, |i| -> Result<(f64, f64)> {
        let mut rng = stream_rng(seed, 2 * i as u64);
        let z = prior.h1 + prior.h_t() * rng.random::<f64>();
        let t = rng.random::<f64>();
        let pose = PoseCpl { z_t: z, t_z: t };
        let v = observe(&noiseless_voltages(&pose, geom, wave)?, &noise, i as u64);
        let est = map_estimate(&v, prior, geom, wave, grid)?;
        Ok(((est.z_t - z).powi(2), (est.t_z - t).powi(2)))
    });
    let errs = errs.into_iter().collect::<Result<Vec<_>>>()?;
    let n = trials as f64;
    let stats = |f: fn(&(f64, f64)) -> f64| {
        let mean = errs.iter().map(f).sum::<f64>() / n;
        let se = if trials > 1 {
            (errs.iter().map(|e| (f(e) - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        (mean, se)
    };
    let (mse_z, se_z) = stats(|e| e.0);
    let (mse_t, se_t) = stats(|e| e.1);
    Ok(MseReport { mse_z, mse_t, se_z, se_t, trials })
}
