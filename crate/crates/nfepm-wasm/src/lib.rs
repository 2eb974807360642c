//! Browser bindings for the demo page in `www/`.
//!
//! Each export returns a flat `Float64Array` of row-major records. The
//! `*_rows` functions hold the logic and are what the native tests call.

// `!(x > 0.0)` style checks are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use wasm_bindgen::prelude::*;

use nfepm_core::channel::{nf_channel, rerr, RerrKind};
use nfepm_core::ecrb::{ecrb, ecrb_ao, ExpectationGrid, SingularPolicy};
use nfepm_core::observation::{db_to_ratio, noiseless_voltages};
use nfepm_core::solver::{default_pair, solve};
use nfepm_core::{ArrayGeometry, PoseCpl, PriorUniform, RegionClass, Wave};

type Rows = Result<Vec<f64>, String>;

fn err(e: nfepm_core::Error) -> String {
    e.to_string()
}

/// Records of `[z_t, |h|, rerr_nfem, rerr_afem, rerr_nusw, rerr_usw]` for
/// `n` log-spaced distances in `[z_min, z_max]`, observed at `(0, y_r)`.
pub fn channel_profile_rows(lambda: f64, t_z: f64, y_r: f64, z_min: f64, z_max: f64, n: usize) -> Rows {
    let wave = Wave::new(lambda, 1.0).map_err(err)?;
    if !(z_min > 0.0 && z_max > z_min) || n < 2 {
        return Err("need 0 < z_min < z_max and n >= 2".into());
    }
    let mut out = Vec::with_capacity(6 * n);
    for i in 0..n {
        let z = z_min * (z_max / z_min).powf(i as f64 / (n - 1) as f64);
        let pose = PoseCpl::new(z, t_z).map_err(err)?;
        out.push(z);
        out.push(nf_channel(&pose, 0.0, y_r, &wave).map_err(err)?.norm());
        for k in RerrKind::ALL {
            out.push(rerr(k, &pose, 0.0, y_r, &wave).map_err(err)?);
        }
    }
    Ok(out)
}

/// Records of `[snr_db, ecrb_z, ecrb_t, ecrb_ao_t]` on a coarse grid.
#[allow(clippy::too_many_arguments)]
pub fn ecrb_curve_rows(lambda: f64, d_r: f64, l_s: f64, h1: f64, h2: f64, db_min: f64, db_max: f64, n: usize) -> Rows {
    let wave = Wave::new(lambda, 1.0).map_err(err)?;
    let geom = ArrayGeometry::new(d_r, l_s).map_err(err)?;
    let prior = PriorUniform::new(h1, h2).map_err(err)?;
    if n < 2 || !(db_max > db_min) {
        return Err("need db_min < db_max and n >= 2".into());
    }
    let grid = ExpectationGrid { n_z: 24, n_t: 24, ..ExpectationGrid::default() };
    let mut out = Vec::with_capacity(4 * n);
    for i in 0..n {
        let db = db_min + (db_max - db_min) * i as f64 / (n - 1) as f64;
        let snr = db_to_ratio(db);
        let e = ecrb(&prior, snr, &geom, &wave, &grid, SingularPolicy::Error).map_err(err)?;
        out.extend([db, e.z, e.t, ecrb_ao(&prior, snr, &geom, &grid).map_err(err)?]);
    }
    Ok(out)
}

/// Noiseless closed-form solve: `[region, z_re, z_im, t_re, t_im]` with
/// region 1 = Case I, 2 = phase-ambiguity, 3 = spacing-constraint.
pub fn solve_rows(lambda: f64, d_r: f64, l_s: f64, h1: f64, h2: f64, z_t: f64, t_z: f64) -> Rows {
    let wave = Wave::new(lambda, 1.0).map_err(err)?;
    let geom = ArrayGeometry::new(d_r, l_s).map_err(err)?;
    let prior = PriorUniform::new(h1, h2).map_err(err)?;
    let pose = PoseCpl::new(z_t, t_z).map_err(err)?;
    let v = noiseless_voltages(&pose, &geom, &wave).map_err(err)?;
    let (a, b) = default_pair(&geom);
    let r = solve(&v, &prior, &geom, &wave, a, b).map_err(err)?;
    let region = match r.region {
        RegionClass::CaseI => 1.0,
        RegionClass::CaseIIPa => 2.0,
        RegionClass::CaseIISc => 3.0,
        RegionClass::Unsupported(_) => 0.0,
    };
    Ok(vec![region, r.z_hat.re, r.z_hat.im, r.t_hat.re, r.t_hat.im])
}

fn js(r: Rows) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn channel_profile(lambda: f64, t_z: f64, y_r: f64, z_min: f64, z_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(channel_profile_rows(lambda, t_z, y_r, z_min, z_max, n))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn ecrb_curve(lambda: f64, d_r: f64, l_s: f64, h1: f64, h2: f64, db_min: f64, db_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(ecrb_curve_rows(lambda, d_r, l_s, h1, h2, db_min, db_max, n))
}

#[wasm_bindgen]
pub fn solve_noiseless(lambda: f64, d_r: f64, l_s: f64, h1: f64, h2: f64, z_t: f64, t_z: f64) -> Result<Vec<f64>, JsError> {
    js(solve_rows(lambda, d_r, l_s, h1, h2, z_t, t_z))
}
