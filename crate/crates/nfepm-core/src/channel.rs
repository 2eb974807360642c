//! Electric field and channel evaluations for a dipole source in front of a
//! long-strip receiving surface at `z = 0`.
//!
//! All channels are dimensionless (the initial electric intensity is factored
//! out); the observation module reattaches it.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geometry::Wave;

/// Free-space wave impedance in ohms.
pub const ETA0: f64 = 376.73;

/// On-axis source at `(0, 0, z_t)` with attitude `(0, t_y, t_z)`,
/// `t_y = sqrt(1 - t_z²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseCpl {
    pub z_t: f64,
    pub t_z: f64,
}

impl PoseCpl {
    pub fn new(z_t: f64, t_z: f64) -> Result<Self> {
        if !(z_t > 0.0) || !z_t.is_finite() {
            return Err(invalid("z_t", format!("must be positive, got {z_t}")));
        }
        if !(0.0..1.0).contains(&t_z) {
            return Err(invalid("t_z", format!("must lie in [0, 1), got {t_z}")));
        }
        Ok(Self { z_t, t_z })
    }

    pub fn t_y(&self) -> f64 {
        (1.0 - self.t_z * self.t_z).sqrt()
    }

    pub fn to_general(&self) -> PoseGeneral {
        PoseGeneral { x_t: 0.0, y_t: 0.0, z_t: self.z_t, t: [0.0, self.t_y(), self.t_z] }
    }
}

/// Source at an arbitrary point in front of the surface with an arbitrary
/// unit orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseGeneral {
    pub x_t: f64,
    pub y_t: f64,
    pub z_t: f64,
    pub t: [f64; 3],
}

impl PoseGeneral {
    pub fn new(position: [f64; 3], t: [f64; 3]) -> Result<Self> {
        if !(position[2] > 0.0) {
            return Err(invalid("z_t", format!("must be positive, got {}", position[2])));
        }
        let norm2 = t[0] * t[0] + t[1] * t[1] + t[2] * t[2];
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(invalid("t", format!("orientation must be a unit vector, |t|² = {norm2}")));
        }
        Ok(Self { x_t: position[0], y_t: position[1], z_t: position[2], t })
    }
}

/// Observation point `(x_r, y_r, 0)` on the receiving surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationPoint {
    pub x_r: f64,
    pub y_r: f64,
}

fn r52(r: f64) -> f64 {
    r * r * r.sqrt()
}

fn phasor(k: f64, r: f64) -> Complex64 {
    Complex64::from_polar(1.0, k * r)
}

/// Scalar Green function `j η/(2λr) e^{jkr}`.
pub fn scalar_green(r: f64, wave: &Wave, eta: f64) -> Result<Complex64> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveDistance(r));
    }
    Ok(Complex64::i() * (eta / (2.0 * wave.lambda() * r)) * phasor(wave.k(), r))
}

/// Radiated field `(e_x, e_y, e_z)` at `pt`, normalized by `E_in`.
pub fn vector_field(pose: &PoseGeneral, pt: &ObservationPoint, wave: &Wave) -> Result<[Complex64; 3]> {
    let x = pt.x_r - pose.x_t;
    let y = pt.y_r - pose.y_t;
    let z = pose.z_t;
    let r2 = x * x + y * y + z * z;
    if !(r2 > 0.0) {
        return Err(Error::CoincidentPoints);
    }
    let r = r2.sqrt();
    let [tx, ty, tz] = pose.t;
    let ex = (y * y + z * z) * tx - x * y * ty + x * z * tz;
    let ey = -x * y * tx + (x * x + z * z) * ty + y * z * tz;
    let ez = x * z * tx + y * z * ty + (x * x + y * y) * tz;
    let c = Complex64::i() * phasor(wave.k(), r) / (r2 * r);
    Ok([c * ex, c * ey, c * ez])
}

/// NF-EM channel at `(x_r, y_r)` for an on-axis source.
pub fn nf_channel(pose: &PoseCpl, x_r: f64, y_r: f64, wave: &Wave) -> Result<Complex64> {
    let z = pose.z_t;
    let r = (x_r * x_r + y_r * y_r + z * z).sqrt();
    if !(r > 0.0) {
        return Err(Error::CoincidentPoints);
    }
    let amp = z.sqrt() * x_r.hypot(y_r * pose.t_z + z * pose.t_y()) / r52(r);
    Ok(amp * phasor(wave.k(), r))
}

/// NF-EM channel on the line `x_r = 0`.
pub fn nf_channel_axis(pose: &PoseCpl, y_r: f64, wave: &Wave) -> Complex64 {
    let z = pose.z_t;
    let r = (y_r * y_r + z * z).sqrt();
    let amp = z.sqrt() * (y_r * pose.t_z + z * pose.t_y()) / r52(r);
    amp * phasor(wave.k(), r)
}

/// Channel for a source with general position and orientation.
pub fn general_channel(pose: &PoseGeneral, pt: &ObservationPoint, wave: &Wave) -> Result<Complex64> {
    let x = pt.x_r - pose.x_t;
    let y = pt.y_r - pose.y_t;
    let z = pose.z_t;
    let r = (x * x + y * y + z * z).sqrt();
    if !(r > 0.0) {
        return Err(Error::CoincidentPoints);
    }
    let [tx, ty, tz] = pose.t;
    let a = ty * x - tx * y;
    let b = tz * x + tx * z;
    let c = tz * y + ty * z;
    let amp = z.sqrt() * (a * a + b * b + c * c).sqrt() / r52(r);
    Ok(amp * phasor(wave.k(), r))
}

/// Amplitude scaling between the full-field and radiative channels.
pub fn scaling_factor(r: f64, wave: &Wave) -> f64 {
    let kr2 = (wave.k() * r).powi(2);
    (1.0 + 3.0 / kr2 + 9.0 / (kr2 * kr2)).sqrt()
}

/// Full-field (EM-SIMP) channel: `F_SF · h`.
pub fn simp_channel(pose: &PoseCpl, x_r: f64, y_r: f64, wave: &Wave) -> Result<Complex64> {
    let r = (x_r * x_r + y_r * y_r + pose.z_t * pose.z_t).sqrt();
    Ok(scaling_factor(r, wave) * nf_channel(pose, x_r, y_r, wave)?)
}

/// Simplified channel families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegenerateKind {
    /// Attitude fixed along +Y.
    Afem,
    /// Non-uniform spherical wave.
    Nusw,
    /// Uniform spherical wave.
    Usw,
}

pub fn degenerate_channel(kind: DegenerateKind, pose: &PoseCpl, x_r: f64, y_r: f64, wave: &Wave) -> Result<Complex64> {
    let z = pose.z_t;
    let r = (x_r * x_r + y_r * y_r + z * z).sqrt();
    if !(r > 0.0) {
        return Err(Error::CoincidentPoints);
    }
    let p = phasor(wave.k(), r);
    Ok(match kind {
        DegenerateKind::Afem => z.sqrt() * x_r.hypot(z) / r52(r) * p,
        DegenerateKind::Nusw => p / r,
        DegenerateKind::Usw => p / z,
    })
}

/// Candidate channel compared against the full-field channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RerrKind {
    Nfem,
    Afem,
    Nusw,
    Usw,
}

impl RerrKind {
    pub const ALL: [RerrKind; 4] = [RerrKind::Nfem, RerrKind::Afem, RerrKind::Nusw, RerrKind::Usw];

    pub fn name(&self) -> &'static str {
        match self {
            RerrKind::Nfem => "nfem",
            RerrKind::Afem => "afem",
            RerrKind::Nusw => "nusw",
            RerrKind::Usw => "usw",
        }
    }
}

/// Relative error `|h_SIM - h_kind| / |h_SIM|`.
pub fn rerr(kind: RerrKind, pose: &PoseCpl, x_r: f64, y_r: f64, wave: &Wave) -> Result<f64> {
    let reference = simp_channel(pose, x_r, y_r, wave)?;
    let cand = match kind {
        RerrKind::Nfem => nf_channel(pose, x_r, y_r, wave)?,
        RerrKind::Afem => degenerate_channel(DegenerateKind::Afem, pose, x_r, y_r, wave)?,
        RerrKind::Nusw => degenerate_channel(DegenerateKind::Nusw, pose, x_r, y_r, wave)?,
        RerrKind::Usw => degenerate_channel(DegenerateKind::Usw, pose, x_r, y_r, wave)?,
    };
    let den = reference.norm();
    if den == 0.0 {
        return Err(Error::DivisionByZero("full-field channel vanishes"));
    }
    Ok((reference - cand).norm() / den)
}
