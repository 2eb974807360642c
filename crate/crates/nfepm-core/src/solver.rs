//! Closed-form recovery of `(z_t, t_z)` from two noise-free element voltages.
//!
//! Amplitudes and principal phases are decoupled; the distance comes from the
//! phase (directly within one wavelength, through the integer-period rule
//! beyond it) and the attitude from the amplitude pair.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::{nf_channel_axis, PoseCpl};
use crate::error::{invalid, Error, Result};
use crate::geometry::{classify_region, ArrayGeometry, PriorUniform, RegionClass, Wave};
use crate::numerics::par_map;
use crate::observation::VoltageVector;

/// Amplitude and principal phase in `[0, 2π)` of a complex voltage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoupledVoltage {
    pub psi: f64,
    pub theta: f64,
}

/// Strict mode rejects region mismatches; diagnostic mode lets estimates go
/// complex so mismatched solvers can be scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMode {
    #[default]
    Strict,
    Diagnostic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub z_hat: Complex64,
    pub t_hat: Complex64,
    pub region: RegionClass,
    pub diagnostic: bool,
}

impl SolveResult {
    /// True when the attitude estimate falls outside `[0, 1)`.
    pub fn t_out_of_range(&self) -> bool {
        !(0.0..1.0).contains(&self.t_hat.re) || self.t_hat.im != 0.0
    }
}

pub fn decouple(v: Complex64) -> DecoupledVoltage {
    let mut theta = v.arg();
    if theta < 0.0 {
        theta += 2.0 * PI;
    }
    if theta >= 2.0 * PI {
        theta = 0.0;
    }
    DecoupledVoltage { psi: v.norm(), theta }
}

/// Attitude from the two amplitudes given a distance estimate.
fn attitude(
    a: &DecoupledVoltage,
    b: &DecoupledVoltage,
    y_a: f64,
    y_b: f64,
    z: Complex64,
    geom: &ArrayGeometry,
    wave: &Wave,
) -> Complex64 {
    let ra = (z * z + y_a * y_a).powf(1.25);
    let rb = (z * z + y_b * y_b).powf(1.25);
    (a.psi * ra - b.psi * rb) / (wave.e_in() * geom.l_s() * z.sqrt() * (y_a - y_b))
}

/// Case I: both elements within one wavelength, no phase ambiguity.
pub fn solve_case1(
    v_a: Complex64,
    v_b: Complex64,
    y_a: f64,
    y_b: f64,
    geom: &ArrayGeometry,
    wave: &Wave,
    mode: SolveMode,
) -> Result<SolveResult> {
    if y_a == y_b {
        return Err(Error::DegenerateElements);
    }
    let a = decouple(v_a);
    let b = decouple(v_b);
    let k = wave.k();
    let radicand = (a.theta / k).powi(2) - y_a * y_a;
    let z = match mode {
        SolveMode::Strict if radicand < 0.0 => return Err(Error::NegativeRadicand(radicand)),
        SolveMode::Strict => Complex64::new(radicand.sqrt(), 0.0),
        SolveMode::Diagnostic => Complex64::new(radicand, 0.0).sqrt(),
    };
    if mode == SolveMode::Strict && !(z.re > 0.0) {
        return Err(Error::NonFinite("distance estimate is zero"));
    }
    let t = attitude(&a, &b, y_a, y_b, z, geom, wave);
    Ok(SolveResult { z_hat: z, t_hat: t, region: RegionClass::CaseI, diagnostic: mode == SolveMode::Diagnostic })
}

fn period_rule_distance(theta_a: f64, theta_b: f64, y_a: f64, y_b: f64, k: f64) -> Result<f64> {
    let mut d = theta_b - theta_a;
    if d <= 0.0 {
        d += 2.0 * PI;
    }
    if d.abs() < 1e-12 {
        return Err(Error::NonFinite("phase difference vanishes"));
    }
    Ok(k * (y_b * y_b - y_a * y_a) / (2.0 * d))
}

/// Case II beyond the phase ambiguity distance: adjacent integer periods of
/// any two elements differ by at most one.
pub fn solve_case2_pa(
    v_a: Complex64,
    v_b: Complex64,
    y_a: f64,
    y_b: f64,
    geom: &ArrayGeometry,
    wave: &Wave,
) -> Result<SolveResult> {
    if y_a == y_b {
        return Err(Error::DegenerateElements);
    }
    if y_b < y_a {
        return Err(invalid("element pair", "need y_beta > y_alpha"));
    }
    let a = decouple(v_a);
    let b = decouple(v_b);
    let z = period_rule_distance(a.theta, b.theta, y_a, y_b, wave.k())?;
    let zc = Complex64::new(z, 0.0);
    let t = attitude(&a, &b, y_a, y_b, zc, geom, wave);
    Ok(SolveResult { z_hat: zc, t_hat: t, region: RegionClass::CaseIIPa, diagnostic: false })
}

/// Case II between the spacing constraint and phase ambiguity distances,
/// using elements 1 and 2.
pub fn solve_case2_sc(v1: Complex64, v2: Complex64, geom: &ArrayGeometry, wave: &Wave) -> Result<SolveResult> {
    let y1 = 0.5 * geom.l_s();
    let y2 = 1.5 * geom.l_s();
    let a = decouple(v1);
    let b = decouple(v2);
    let z = period_rule_distance(a.theta, b.theta, y1, y2, wave.k())?;
    let zc = Complex64::new(z, 0.0);
    let t = attitude(&a, &b, y1, y2, zc, geom, wave);
    Ok(SolveResult { z_hat: zc, t_hat: t, region: RegionClass::CaseIISc, diagnostic: false })
}

/// Classifies the prior box and dispatches to the matching solver.
pub fn solve(
    voltages: &VoltageVector,
    prior: &PriorUniform,
    geom: &ArrayGeometry,
    wave: &Wave,
    alpha: usize,
    beta: usize,
) -> Result<SolveResult> {
    let region = classify_region(prior, geom, wave, alpha, beta)?;
    solve_with(&region, voltages, geom, wave, alpha, beta, SolveMode::Strict)
}

fn solve_with(
    region: &RegionClass,
    voltages: &VoltageVector,
    geom: &ArrayGeometry,
    wave: &Wave,
    alpha: usize,
    beta: usize,
    mode: SolveMode,
) -> Result<SolveResult> {
    match region {
        RegionClass::CaseI => solve_case1(
            voltages.get(alpha)?,
            voltages.get(beta)?,
            geom.element_y(alpha)?,
            geom.element_y(beta)?,
            geom,
            wave,
            mode,
        ),
        RegionClass::CaseIIPa => solve_case2_pa(
            voltages.get(alpha)?,
            voltages.get(beta)?,
            geom.element_y(alpha)?,
            geom.element_y(beta)?,
            geom,
            wave,
        ),
        RegionClass::CaseIISc => solve_case2_sc(voltages.get(1)?, voltages.get(2)?, geom, wave),
        RegionClass::Unsupported(r) => Err(Error::UnsupportedRegion(r.clone())),
    }
}

/// Default element pair `(1, N/2)`.
pub fn default_pair(geom: &ArrayGeometry) -> (usize, usize) {
    (1, (geom.n() / 2).max(2))
}

/// RMSE of a solver over a uniform `u x v` grid of the prior box.
///
/// `z_t` takes `u` equally spaced values on `[H1, H2]`; `t_z` takes `v`
/// equally spaced values `j/v` on `[0, 1)`. `solver` selects the solver run
/// on every grid point; when it differs from the region the data belong to,
/// pass [`SolveMode::Diagnostic`] so complex estimates are scored instead of
/// raising. The RMSE is `sqrt(mean(err²))` over complex errors.
#[allow(clippy::too_many_arguments)]
pub fn rmse_grid(
    solver: &RegionClass,
    prior: &PriorUniform,
    geom: &ArrayGeometry,
    wave: &Wave,
    u: usize,
    v: usize,
    pair: (usize, usize),
    mode: SolveMode,
) -> Result<(Complex64, Complex64)> {
    if u < 2 || v < 2 {
        return Err(invalid("grid", "U and V must be >= 2"));
    }
    let (alpha, beta) = match solver {
        RegionClass::CaseIISc => (1, 2),
        _ => pair,
    };
    let y_a = geom.element_y(alpha)?;
    let y_b = geom.element_y(beta)?;
    let scale = wave.e_in() * geom.l_s();
    let dz = prior.h_t() / (u - 1) as f64;
    let rows = par_map(u, |i| -> Result<(Complex64, Complex64)> {
        let z = if i + 1 == u { prior.h2 } else { prior.h1 + i as f64 * dz };
        let mut ez = Complex64::new(0.0, 0.0);
        let mut et = Complex64::new(0.0, 0.0);
        for j in 0..v {
            let t = j as f64 / v as f64;
            let pose = PoseCpl { z_t: z, t_z: t };
            let va = scale * nf_channel_axis(&pose, y_a, wave);
            let vb = scale * nf_channel_axis(&pose, y_b, wave);
            let r = match solver {
                RegionClass::CaseI => solve_case1(va, vb, y_a, y_b, geom, wave, mode)?,
                RegionClass::CaseIIPa => solve_case2_pa(va, vb, y_a, y_b, geom, wave)?,
                RegionClass::CaseIISc => solve_case2_sc(va, vb, geom, wave)?,
                RegionClass::Unsupported(r) => return Err(Error::UnsupportedRegion(r.clone())),
            };
            let dz = z - r.z_hat;
            let dt = t - r.t_hat;
            ez += dz * dz;
            et += dt * dt;
        }
        Ok((ez, et))
    });
    let mut sz = Complex64::new(0.0, 0.0);
    let mut st = Complex64::new(0.0, 0.0);
    for r in rows {
        let (a, b) = r?;
        sz += a;
        st += b;
    }
    let n = (u * v) as f64;
    Ok(((sz / n).sqrt(), (st / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observation::noiseless_voltages;

    #[test]
    fn decouple_examples() {
        let d = decouple(Complex64::new(1.0, 0.0));
        assert_eq!((d.psi, d.theta), (1.0, 0.0));
        let d = decouple(Complex64::new(0.0, -2.0));
        assert!((d.psi - 2.0).abs() < 1e-15 && (d.theta - 1.5 * PI).abs() < 1e-15);
        let d = decouple(Complex64::new(-1.0, -0.0));
        assert!(d.theta >= 0.0 && d.theta < 2.0 * PI);
    }

    #[test]
    fn case1_roundtrip() {
        let geom = ArrayGeometry::new(0.5, 0.05).unwrap();
        let wave = Wave::new(1.0, 1.0).unwrap();
        let pose = PoseCpl::new(0.7, 0.3).unwrap();
        let v = noiseless_voltages(&pose, &geom, &wave).unwrap();
        let prior = PriorUniform::new(0.5, 0.9).unwrap();
        let (a, b) = default_pair(&geom);
        let r = solve(&v, &prior, &geom, &wave, a, b).unwrap();
        assert_eq!(r.region, RegionClass::CaseI);
        assert!((r.z_hat.re - 0.7).abs() < 1e-10 && r.z_hat.im == 0.0);
        assert!((r.t_hat.re - 0.3).abs() < 1e-10);
    }

    #[test]
    fn case1_rejects_far_data() {
        let geom = ArrayGeometry::new(1.0, 0.05).unwrap();
        let wave = Wave::new(0.1, 1.0).unwrap();
        let pose = PoseCpl::new(10.0, 0.2).unwrap();
        let v = noiseless_voltages(&pose, &geom, &wave).unwrap();
        let y1 = geom.element_y(1).unwrap();
        let y2 = geom.element_y(10).unwrap();
        match solve_case1(v.get(1).unwrap(), v.get(10).unwrap(), y1, y2, &geom, &wave, SolveMode::Strict) {
            Err(Error::NegativeRadicand(_)) => {}
            Ok(r) => assert!((r.z_hat.re - 10.0).abs() > 1.0),
            Err(e) => panic!("{e}"),
        }
        assert!(matches!(
            solve_case1(v.get(1).unwrap(), v.get(2).unwrap(), y1, y1, &geom, &wave, SolveMode::Strict),
            Err(Error::DegenerateElements)
        ));
    }

    #[test]
    fn case2_pa_roundtrip_within_taylor_bound() {
        let geom = ArrayGeometry::new(1.0, 0.05).unwrap();
        let wave = Wave::new(0.1, 1.0).unwrap();
        let pose = PoseCpl::new(10.0, 0.5).unwrap();
        let v = noiseless_voltages(&pose, &geom, &wave).unwrap();
        let prior = PriorUniform::new(5.0, 20.0).unwrap();
        let r = solve(&v, &prior, &geom, &wave, 1, 10).unwrap();
        assert_eq!(r.region, RegionClass::CaseIIPa);
        assert!((r.z_hat.re - 10.0).abs() / 10.0 < 3.5e-3);
    }

    #[test]
    fn sc_dispatch() {
        let geom = ArrayGeometry::new(1.0, 0.05).unwrap();
        let wave = Wave::new(0.1, 1.0).unwrap();
        let pose = PoseCpl::new(1.0, 0.5).unwrap();
        let v = noiseless_voltages(&pose, &geom, &wave).unwrap();
        let prior = PriorUniform::new(0.18, 4.98).unwrap();
        let r = solve(&v, &prior, &geom, &wave, 1, 10).unwrap();
        assert_eq!(r.region, RegionClass::CaseIISc);
        assert!((r.z_hat.re - 1.0).abs() < 1e-2);
        let low = PriorUniform::new(0.1, 4.98).unwrap();
        assert!(matches!(solve(&v, &low, &geom, &wave, 1, 10), Err(Error::UnsupportedRegion(_))));
    }

    #[test]
    fn attitude_with_true_distance_is_exact() {
        let wave = Wave::new(0.1, 1.3).unwrap();
        let geom = ArrayGeometry::new(2.0, 0.05).unwrap();
        for &(z, t) in &[(0.3, 0.1), (4.0, 0.77), (60.0, 0.45)] {
            let pose = PoseCpl::new(z, t).unwrap();
            let v = noiseless_voltages(&pose, &geom, &wave).unwrap();
            let a = decouple(v.get(1).unwrap());
            let b = decouple(v.get(20).unwrap());
            let th = attitude(&a, &b, geom.element_y(1).unwrap(), geom.element_y(20).unwrap(), Complex64::new(z, 0.0), &geom, &wave);
            assert!((th.re - t).abs() < 1e-10, "{z} {t}: {th}");
        }
    }

    #[test]
    fn rmse_case1_zero() {
        let geom = ArrayGeometry::new(0.5, 0.05).unwrap();
        let wave = Wave::new(1.0, 1.0).unwrap();
        let prior = PriorUniform::new(0.5, 0.9).unwrap();
        let (ez, et) = rmse_grid(&RegionClass::CaseI, &prior, &geom, &wave, 100, 100, default_pair(&geom), SolveMode::Strict).unwrap();
        assert!(ez.norm() < 1e-9 && et.norm() < 1e-9, "{ez} {et}");
    }
}
