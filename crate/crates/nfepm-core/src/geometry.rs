//! Array geometry, carrier description, the uniform prior and the region
//! classification that selects a closed-form solver.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{invalid, Error, Result};

/// Long-strip observation region of length `d_r` (Y) and width `l_s` (X),
/// sampled by `n` square elements of pitch `l_s`.
///
/// An unbounded strip (`d_r = ∞`) is accepted by the bound engines; it has no
/// elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    d_r: f64,
    l_s: f64,
    n: usize,
}

impl ArrayGeometry {
    pub fn new(d_r: f64, l_s: f64) -> Result<Self> {
        if !(l_s > 0.0) || !l_s.is_finite() {
            return Err(invalid("l_s", format!("must be positive and finite, got {l_s}")));
        }
        if !(d_r >= l_s) || !d_r.is_finite() {
            return Err(invalid("D_r", format!("need l_s <= D_r < inf, got D_r = {d_r}, l_s = {l_s}")));
        }
        // Relative slack absorbs representation error in ratios like 0.3/0.1.
        let n = (d_r / l_s * (1.0 + 1e-12)).floor() as usize;
        Ok(Self { d_r, l_s, n })
    }

    /// Strip of infinite length, used for the asymptotic bound forms.
    pub fn unbounded(l_s: f64) -> Result<Self> {
        if !(l_s > 0.0) || !l_s.is_finite() {
            return Err(invalid("l_s", format!("must be positive and finite, got {l_s}")));
        }
        Ok(Self { d_r: f64::INFINITY, l_s, n: 0 })
    }

    pub fn d_r(&self) -> f64 {
        self.d_r
    }

    pub fn l_s(&self) -> f64 {
        self.l_s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_unbounded(&self) -> bool {
        self.d_r.is_infinite()
    }

    /// Centre of element `idx` (1-based): `(idx - 1/2) * l_s`.
    pub fn element_y(&self, idx: usize) -> Result<f64> {
        if idx == 0 || idx > self.n {
            return Err(Error::IndexOutOfRange { index: idx, n: self.n });
        }
        Ok((idx as f64 - 0.5) * self.l_s)
    }

    pub fn element_centers(&self) -> Result<Vec<f64>> {
        if self.is_unbounded() {
            return Err(Error::UnboundedAperture);
        }
        Ok((1..=self.n).map(|i| (i as f64 - 0.5) * self.l_s).collect())
    }

    /// Same geometry with a different strip width.
    pub fn with_l_s(&self, l_s: f64) -> Result<Self> {
        if self.is_unbounded() {
            Self::unbounded(l_s)
        } else {
            Self::new(self.d_r, l_s)
        }
    }
}

/// Carrier: wavelength and initial electric intensity. `k = 2π/λ` is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    lambda: f64,
    e_in: f64,
}

impl Wave {
    pub fn new(lambda: f64, e_in: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(invalid("lambda", format!("must be positive, got {lambda}")));
        }
        if !(e_in > 0.0) || !e_in.is_finite() {
            return Err(invalid("E_in", format!("must be positive, got {e_in}")));
        }
        Ok(Self { lambda, e_in })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn k(&self) -> f64 {
        2.0 * PI / self.lambda
    }

    pub fn e_in(&self) -> f64 {
        self.e_in
    }
}

/// Uniform prior: `z_t ~ U[h1, h2]`, `t_z ~ U[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorUniform {
    pub h1: f64,
    pub h2: f64,
}

impl PriorUniform {
    pub fn new(h1: f64, h2: f64) -> Result<Self> {
        if !(h1 > 0.0) || !h2.is_finite() {
            return Err(invalid("H1", format!("need 0 < H1 and finite H2, got H1 = {h1}, H2 = {h2}")));
        }
        if !(h1 < h2) {
            return Err(invalid("H1", format!("H1 < H2 violated: H1 = {h1}, H2 = {h2}")));
        }
        Ok(Self { h1, h2 })
    }

    pub fn h_t(&self) -> f64 {
        self.h2 - self.h1
    }

    pub fn mean_z(&self) -> f64 {
        0.5 * (self.h1 + self.h2)
    }
}

/// Which closed-form solver applies to a prior box.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionClass {
    CaseI,
    CaseIIPa,
    CaseIISc,
    Unsupported(String),
}

impl fmt::Display for RegionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionClass::CaseI => write!(f, "case1"),
            RegionClass::CaseIIPa => write!(f, "case2_pa"),
            RegionClass::CaseIISc => write!(f, "case2_sc"),
            RegionClass::Unsupported(r) => write!(f, "unsupported ({r})"),
        }
    }
}

/// Fraunhofer distance `2 D_r² / λ`.
pub fn fraunhofer_distance(geom: &ArrayGeometry, wave: &Wave) -> f64 {
    2.0 * geom.d_r * geom.d_r / wave.lambda
}

/// Fresnel distance `0.5 sqrt(D_r³ / λ)`.
pub fn fresnel_distance(geom: &ArrayGeometry, wave: &Wave) -> f64 {
    0.5 * (geom.d_r.powi(3) / wave.lambda).sqrt()
}

/// Phase ambiguity distance `D_r² / (2λ)`; only defined for `D_r >= 4.8 λ`.
pub fn phase_ambiguity_distance(geom: &ArrayGeometry, wave: &Wave) -> Result<f64> {
    if geom.d_r < 4.8 * wave.lambda {
        return Err(Error::ValidityViolation(format!(
            "phase ambiguity distance needs D_r >= 4.8 lambda (D_r = {}, 4.8 lambda = {})",
            geom.d_r,
            4.8 * wave.lambda
        )));
    }
    Ok(geom.d_r * geom.d_r / (2.0 * wave.lambda))
}

/// Spacing constraint distance `max(l_s²/λ, 3.6 l_s)`.
pub fn spacing_constraint_distance(geom: &ArrayGeometry, wave: &Wave) -> f64 {
    (geom.l_s * geom.l_s / wave.lambda).max(3.6 * geom.l_s)
}

/// Region of the prior box with respect to the element pair `(alpha, beta)`.
///
/// Case I needs the phase-carrying element `alpha` to stay within one
/// wavelength over the whole box. Case II needs it beyond one wavelength over
/// the whole box, then splits on `H1` against `d_PA` and `d_SC`. Boxes that
/// straddle a boundary are unsupported.
/// Relative slack on the distance thresholds, so a prior edge placed exactly
/// on `d_PA` or `d_SC` is not lost to rounding.
const BOUNDARY_SLACK: f64 = 1e-12;

pub fn classify_region(
    prior: &PriorUniform,
    geom: &ArrayGeometry,
    wave: &Wave,
    alpha: usize,
    beta: usize,
) -> Result<RegionClass> {
    if geom.is_unbounded() {
        return Err(Error::UnboundedAperture);
    }
    if alpha == 0 || alpha > geom.n {
        return Err(Error::IndexOutOfRange { index: alpha, n: geom.n });
    }
    if beta <= alpha || beta > geom.n {
        return Err(Error::IndexOutOfRange { index: beta, n: geom.n });
    }
    let y_a = geom.element_y(alpha)?;
    let lam = wave.lambda;
    if prior.h2.hypot(y_a) < lam {
        return Ok(RegionClass::CaseI);
    }
    if prior.h1.hypot(y_a) < lam {
        return Ok(RegionClass::Unsupported(format!(
            "prior straddles the one-wavelength boundary of element {alpha}"
        )));
    }
    let d_sc = spacing_constraint_distance(geom, wave);
    let d_pa = phase_ambiguity_distance(geom, wave).ok();
    match d_pa {
        Some(d) if prior.h1 >= d * (1.0 - BOUNDARY_SLACK) => Ok(RegionClass::CaseIIPa),
        _ if prior.h1 >= d_sc * (1.0 - BOUNDARY_SLACK) => Ok(RegionClass::CaseIISc),
        _ => Ok(RegionClass::Unsupported(format!("H1 = {} below d_SC = {d_sc}", prior.h1))),
    }
}
