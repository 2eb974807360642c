//! Fisher information of `(z_t, t_z)` for the continuous strip and the
//! expected Cramér-Rao bounds built from it.
//!
//! The information integrals over `y ∈ [0, D_r]` have closed forms in
//! `τ = D_r / z_t`, given by the twelve coefficient functions `f_tau1` to
//! `f_tau12`. `D_r = ∞` evaluates their `τ → ∞` limits.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::PoseCpl;
use crate::error::{invalid, Error, Result};
use crate::geometry::{ArrayGeometry, PriorUniform, Wave};
use crate::numerics::{expect_uniform, integrate, integrate_vec, QuadratureSpec, T_EPS};

fn s2(tau: f64) -> f64 {
    tau * tau + 1.0
}

pub fn f_tau1(tau: f64) -> f64 {
    if tau.is_infinite() {
        return 2.0 / 7.0;
    }
    let t2 = tau * tau;
    let s = s2(tau).sqrt();
    (2.0 * t2.powi(4) + 8.0 * t2.powi(3) + 12.0 * t2 * t2 + 8.0 * t2 + 2.0) / (7.0 * s2(tau).powi(4))
        - (7.0 * t2 * t2 - 14.0 * t2 + 4.0) / (14.0 * s.powi(7))
}

pub fn f_tau2(tau: f64) -> f64 {
    if tau.is_infinite() {
        return 19.0 / 84.0;
    }
    (19.0 * tau.powi(7) + 56.0 * tau.powi(5) + 112.0 * tau.powi(3)) / (84.0 * s2(tau).sqrt().powi(7))
}

pub fn f_tau3(tau: f64) -> f64 {
    if tau.is_infinite() {
        return 5.0 / 14.0;
    }
    (10.0 * tau.powi(7) + 35.0 * tau.powi(5) + 28.0 * tau.powi(3) + 28.0 * tau) / (28.0 * s2(tau).sqrt().powi(7))
}

pub fn f_tau4(tau: f64) -> f64 {
    if tau.is_infinite() {
        return 2.0 / 5.0;
    }
    2.0 / 5.0 - 2.0 / (5.0 * s2(tau).sqrt().powi(5))
}

pub fn f_tau5(tau: f64) -> f64 {
    if tau.is_infinite() {
        return 2.0 / 15.0;
    }
    tau.powi(3) * (2.0 * tau * tau + 5.0) / (15.0 * s2(tau).sqrt().powi(5))
}

pub fn f_tau6(tau: f64) -> f64 {
    if tau.is_infinite() {
        return 8.0 / 15.0;
    }
    (8.0 * tau.powi(5) + 20.0 * tau.powi(3) + 15.0 * tau) / (15.0 * s2(tau).sqrt().powi(5))
}

pub fn f_tau7(tau: f64) -> f64 {
    if tau.is_infinite() {
        return 1.0 / 3.0;
    }
    (tau.powi(3) + 3.0 * tau) / (3.0 * s2(tau).sqrt().powi(3))
}

pub fn f_tau8(tau: f64) -> f64 {
    if tau.is_infinite() {
        return -2.0 / 3.0;
    }
    2.0 / (3.0 * s2(tau).sqrt().powi(3)) - 2.0 / 3.0
}

pub fn f_tau9(tau: f64) -> f64 {
    if tau.is_infinite() {
        return 1.0 / 3.0;
    }
    tau.powi(3) / (3.0 * s2(tau).sqrt().powi(3))
}

pub fn f_tau10(tau: f64) -> f64 {
    if tau.is_infinite() {
        return 1.0 / 3.0;
    }
    let t2 = tau * tau;
    (t2 - 2.0) / (6.0 * s2(tau).sqrt().powi(5)) + (t2 * t2 + 2.0 * t2 + 1.0) / (3.0 * s2(tau).powi(2))
}

pub fn f_tau11(tau: f64) -> f64 {
    if tau.is_infinite() {
        return 1.0 / 6.0;
    }
    (tau.powi(5) + tau.powi(3) + 6.0 * tau) / (6.0 * s2(tau).sqrt().powi(5))
}

pub fn f_tau12(tau: f64) -> f64 {
    if tau.is_infinite() {
        return 0.0;
    }
    -tau * tau / (2.0 * s2(tau).sqrt().powi(5))
}

/// Information integral factors and the assembled 2x2 Fisher matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherInfo {
    pub i_zz1: f64,
    pub i_zz2: f64,
    pub i_tt: f64,
    pub i_zt: f64,
    pub f_zz: f64,
    pub f_tt: f64,
    pub f_zt: f64,
}

impl FisherInfo {
    fn assemble(i: [f64; 4], snr: f64, geom: &ArrayGeometry, wave: &Wave) -> Self {
        let c = 2.0 * snr * geom.l_s();
        let k2 = wave.k().powi(2);
        Self {
            i_zz1: i[0],
            i_zz2: i[1],
            i_tt: i[2],
            i_zt: i[3],
            f_zz: c * (i[0] + k2 * i[1]),
            f_tt: c * i[2],
            f_zt: c * i[3],
        }
    }

    /// `I_zz1 + k² I_zz2`.
    pub fn i_zz(&self, wave: &Wave) -> f64 {
        self.i_zz1 + wave.k().powi(2) * self.i_zz2
    }

    pub fn det(&self) -> f64 {
        self.f_zz * self.f_tt - self.f_zt * self.f_zt
    }
}

fn check_attitude(pose: &PoseCpl) -> Result<f64> {
    let ty2 = 1.0 - pose.t_z * pose.t_z;
    if ty2 < 1e-12 {
        return Err(Error::AttitudeSingularity(pose.t_z));
    }
    Ok(ty2.sqrt())
}

fn closed_factors(z: f64, tz: f64, ty: f64, d_r: f64) -> [f64; 4] {
    let tau = d_r / z;
    let i_zz1 = (tz * ty * f_tau1(tau) + tz * tz * f_tau2(tau) + ty * ty * f_tau3(tau)) / z.powi(3);
    let i_zz2 = (tz * ty * f_tau4(tau) + tz * tz * f_tau5(tau) + ty * ty * f_tau6(tau)) / z;
    let q = tz / ty;
    let i_tt = (q * q * f_tau7(tau) + q * f_tau8(tau) + f_tau9(tau) / (ty * ty)) / z;
    let i_zt = (tz * q * f_tau10(tau) + tz * f_tau11(tau) + ty * f_tau12(tau)) / (z * z);
    [i_zz1, i_zz2, i_tt, i_zt]
}

/// Fisher information from the closed-form integral factors.
pub fn fim_closed(pose: &PoseCpl, snr: f64, geom: &ArrayGeometry, wave: &Wave) -> Result<FisherInfo> {
    let ty = check_attitude(pose)?;
    let i = closed_factors(pose.z_t, pose.t_z, ty, geom.d_r());
    Ok(FisherInfo::assemble(i, snr, geom, wave))
}

/// `∂h_y/∂z_t` at `y_r`.
pub fn dh_dz(pose: &PoseCpl, y_r: f64, wave: &Wave) -> Complex64 {
    let z = pose.z_t;
    let (tz, ty) = (pose.t_z, pose.t_y());
    let r = (y_r * y_r + z * z).sqrt();
    let kr = wave.k() * r;
    let l1 = 2.0 * z * z * Complex64::new(2.0, -kr);
    let l2 = 2.0 * z * z * Complex64::new(1.0, -kr);
    let num = tz * y_r * (y_r * y_r - l1) + ty * z * (3.0 * y_r * y_r - l2);
    num / (2.0 * z.sqrt() * r.powf(4.5)) * Complex64::from_polar(1.0, kr)
}

/// `∂h_y/∂t_z` at `y_r`.
pub fn dh_dt(pose: &PoseCpl, y_r: f64, wave: &Wave) -> Result<Complex64> {
    let ty = check_attitude(pose)?;
    let z = pose.z_t;
    let r = (y_r * y_r + z * z).sqrt();
    let amp = (y_r - z * pose.t_z / ty) * z.sqrt() / r.powf(2.5);
    Ok(amp * Complex64::from_polar(1.0, wave.k() * r))
}

/// Integrands of `I_zz1`, `I_zz2`, `I_tt`, `I_zt` at `y`.
pub fn fim_integrands(z: f64, tz: f64, ty: f64, y: f64) -> [f64; 4] {
    let r2 = y * y + z * z;
    let r = r2.sqrt();
    let r7 = r2 * r2 * r2 * r;
    let a = tz * y * (y * y - 4.0 * z * z) + ty * z * (3.0 * y * y - 2.0 * z * z);
    let g = tz * y + ty * z;
    let d = y - z * tz / ty;
    [a * a / (4.0 * z * r7 * r2), z.powi(3) * g * g / r7, z * d * d / (r2 * r2 * r), a * d / (2.0 * r7)]
}

/// Fisher information by adaptive quadrature of the information integrals.
pub fn fim_quadrature(pose: &PoseCpl, snr: f64, geom: &ArrayGeometry, wave: &Wave, spec: &QuadratureSpec) -> Result<FisherInfo> {
    let ty = check_attitude(pose)?;
    let (z, tz) = (pose.z_t, pose.t_z);
    let i = integrate_vec(|y| fim_integrands(z, tz, ty, y), 0.0, geom.d_r(), spec)?;
    Ok(FisherInfo::assemble(i, snr, geom, wave))
}

/// Tensor grid for prior expectations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationGrid {
    pub n_z: usize,
    pub n_t: usize,
    pub eps: f64,
}

impl Default for ExpectationGrid {
    fn default() -> Self {
        Self { n_z: 64, n_t: 64, eps: T_EPS }
    }
}

/// What to do with prior samples whose Fisher matrix is singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SingularPolicy {
    #[default]
    Error,
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ecrb {
    pub z: f64,
    pub t: f64,
    /// Samples dropped under [`SingularPolicy::Skip`].
    pub skipped: usize,
}

/// Expected CRBs of `z_t` and `t_z` under the uniform prior.
pub fn ecrb(
    prior: &PriorUniform,
    snr: f64,
    geom: &ArrayGeometry,
    wave: &Wave,
    grid: &ExpectationGrid,
    policy: SingularPolicy,
) -> Result<Ecrb> {
    if !(snr > 0.0) {
        return Err(invalid("snr", "must be positive"));
    }
    let k2 = wave.k().powi(2);
    let d_r = geom.d_r();
    let sample = |z: f64, t: f64| -> Result<Option<(f64, f64)>> {
        let ty = (1.0 - t * t).sqrt();
        let [a, b, tt, zt] = closed_factors(z, t, ty, d_r);
        let zz = a + k2 * b;
        let det = zz * tt - zt * zt;
        if !(det > 0.0) || !det.is_finite() {
            return match policy {
                SingularPolicy::Error => Err(Error::SingularFim { z_t: z, t_z: t, det }),
                SingularPolicy::Skip => Ok(None),
            };
        }
        Ok(Some((tt / det, zz / det)))
    };
    let ez = expect_uniform(|z, t| Ok(sample(z, t)?.map_or(0.0, |v| v.0)), prior, grid.n_z, grid.n_t, grid.eps)?;
    let et = expect_uniform(|z, t| Ok(sample(z, t)?.map_or(0.0, |v| v.1)), prior, grid.n_z, grid.n_t, grid.eps)?;
    let skipped = match policy {
        SingularPolicy::Error => 0,
        SingularPolicy::Skip => {
            let frac = expect_uniform(|z, t| Ok(if sample(z, t)?.is_none() { 1.0 } else { 0.0 }), prior, grid.n_z, grid.n_t, grid.eps)?;
            (frac * (grid.n_z * grid.n_t) as f64).round() as usize
        }
    };
    let kept = (grid.n_z * grid.n_t - skipped) as f64 / (grid.n_z * grid.n_t) as f64;
    if kept == 0.0 {
        return Err(Error::SingularFim { z_t: prior.h1, t_z: 0.0, det: 0.0 });
    }
    let c = 1.0 / (2.0 * snr * geom.l_s());
    Ok(Ecrb { z: c * ez / kept, t: c * et / kept, skipped })
}

/// Asymptotic ECRBs for an unbounded strip and broadside attitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticEcrb {
    pub z: f64,
    pub t: f64,
    /// Far-distance simplification of `z`, proportional to `λ² E{z_t}`.
    pub z_far: f64,
}

pub fn ecrb_asymptotic(prior: &PriorUniform, snr: f64, geom: &ArrayGeometry, wave: &Wave) -> Result<AsymptoticEcrb> {
    let k2 = wave.k().powi(2);
    let c = 1.0 / (2.0 * snr * geom.l_s());
    let mean_g = integrate(|z| 210.0 * z.powi(3) / (112.0 * k2 * z * z + 75.0), prior.h1, prior.h2, &QuadratureSpec::default())? / prior.h_t();
    Ok(AsymptoticEcrb {
        z: c * mean_g,
        t: 3.0 * c * prior.mean_z(),
        z_far: 15.0 / (64.0 * PI * PI * snr * geom.l_s()) * wave.lambda().powi(2) * prior.mean_z(),
    })
}

/// `I_tt` for an unbounded strip.
pub fn i_tt_unbounded(z: f64, t_z: f64) -> f64 {
    let ty2 = 1.0 - t_z * t_z;
    (1.0 + t_z * t_z - 2.0 * t_z * ty2.sqrt()) / (3.0 * z * ty2)
}

/// Expected CRB of `t_z` when `z_t` is a nuisance with known distribution.
pub fn ecrb_ao(prior: &PriorUniform, snr: f64, geom: &ArrayGeometry, grid: &ExpectationGrid) -> Result<f64> {
    if !(snr > 0.0) {
        return Err(invalid("snr", "must be positive"));
    }
    let d_r = geom.d_r();
    let e = expect_uniform(
        |z, t| {
            let ty2 = 1.0 - t * t;
            if ty2 < 1e-12 {
                return Err(Error::AttitudeSingularity(t));
            }
            let i_tt = if d_r.is_infinite() { i_tt_unbounded(z, t) } else { closed_factors(z, t, ty2.sqrt(), d_r)[2] };
            Ok(1.0 / i_tt)
        },
        prior,
        grid.n_z,
        grid.n_t,
        grid.eps,
    )?;
    Ok(e / (2.0 * snr * geom.l_s()))
}
