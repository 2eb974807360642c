//! Element voltages and the additive noise model.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::{nf_channel_axis, PoseCpl};
use crate::error::{invalid, Error, Result};
use crate::geometry::{ArrayGeometry, Wave};
use crate::numerics::element_rng;

/// Complex voltages of the `N` elements, in volts.
#[derive(Debug, Clone, PartialEq)]
pub struct VoltageVector {
    values: Vec<Complex64>,
    geom: ArrayGeometry,
}

impl VoltageVector {
    pub fn new(values: Vec<Complex64>, geom: ArrayGeometry) -> Result<Self> {
        if values.len() != geom.n() {
            return Err(invalid("voltages", format!("expected {} entries, got {}", geom.n(), values.len())));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("voltage entry"));
        }
        Ok(Self { values, geom })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geom
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Voltage of element `idx` (1-based).
    pub fn get(&self, idx: usize) -> Result<Complex64> {
        if idx == 0 || idx > self.values.len() {
            return Err(Error::IndexOutOfRange { index: idx, n: self.values.len() });
        }
        Ok(self.values[idx - 1])
    }
}

/// Noise variance (volt²) and the seed of its random stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma2: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma2: f64, seed: u64) -> Result<Self> {
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(invalid("sigma2", format!("must be finite and >= 0, got {sigma2}")));
        }
        Ok(Self { sigma2, seed })
    }

    /// Noise level giving `snr_db` for the carrier's `E_in`.
    pub fn from_snr_db(wave: &Wave, snr_db: f64, seed: u64) -> Result<Self> {
        Self::new(wave.e_in().powi(2) / db_to_ratio(snr_db), seed)
    }
}

pub fn db_to_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn ratio_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Noise-free voltages `v_n = E_in l_s h_y(ξ; y_n)`.
pub fn noiseless_voltages(pose: &PoseCpl, geom: &ArrayGeometry, wave: &Wave) -> Result<VoltageVector> {
    let scale = wave.e_in() * geom.l_s();
    let values = geom
        .element_centers()?
        .into_iter()
        .map(|y| scale * nf_channel_axis(pose, y, wave))
        .collect();
    VoltageVector::new(values, *geom)
}

/// Adds circularly symmetric complex Gaussian noise of variance `sigma2`.
///
/// Element `n` of realization `trial` draws from the stream keyed by
/// `(seed, trial, n)`, so results do not depend on evaluation order.
pub fn observe(v: &VoltageVector, noise: &NoiseSpec, trial: u64) -> VoltageVector {
    if noise.sigma2 == 0.0 {
        return v.clone();
    }
    let s = (0.5 * noise.sigma2).sqrt();
    let values = v
        .values
        .iter()
        .enumerate()
        .map(|(n, &x)| {
            let mut rng = element_rng(noise.seed, 2 * trial + 1, n);
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            x + Complex64::new(s * re, s * im)
        })
        .collect();
    VoltageVector { values, geom: v.geom }
}

/// `E_in² / σ²`.
pub fn snr(wave: &Wave, noise: &NoiseSpec) -> Result<f64> {
    if noise.sigma2 == 0.0 {
        return Err(Error::ZeroNoise);
    }
    Ok(wave.e_in().powi(2) / noise.sigma2)
}

pub fn snr_db(wave: &Wave, noise: &NoiseSpec) -> Result<f64> {
    snr(wave, noise).map(ratio_to_db)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_element_value() {
        let geom = ArrayGeometry::new(0.1, 0.1).unwrap();
        let wave = Wave::new(1.0, 2.0).unwrap();
        let pose = PoseCpl::new(1.0, 0.0).unwrap();
        let v = noiseless_voltages(&pose, &geom, &wave).unwrap();
        assert_eq!(v.len(), 1);
        let expect = 2.0 * 0.1 * nf_channel_axis(&pose, 0.05, &wave);
        assert_eq!(v.values()[0], expect);
    }

    #[test]
    fn linear_in_e_in() {
        let geom = ArrayGeometry::new(1.0, 0.1).unwrap();
        let pose = PoseCpl::new(2.0, 0.4).unwrap();
        let a = noiseless_voltages(&pose, &geom, &Wave::new(0.1, 1.0).unwrap()).unwrap();
        let b = noiseless_voltages(&pose, &geom, &Wave::new(0.1, 2.0).unwrap()).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((2.0 * x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_noise_is_identity_and_seed_is_deterministic() {
        let geom = ArrayGeometry::new(1.0, 0.1).unwrap();
        let wave = Wave::new(0.1, 1.0).unwrap();
        let v = noiseless_voltages(&PoseCpl::new(2.0, 0.4).unwrap(), &geom, &wave).unwrap();
        assert_eq!(observe(&v, &NoiseSpec::new(0.0, 1).unwrap(), 0), v);
        let n = NoiseSpec::new(0.5, 9).unwrap();
        assert_eq!(observe(&v, &n, 3), observe(&v, &n, 3));
        assert_ne!(observe(&v, &n, 3), observe(&v, &n, 4));
    }

    #[test]
    fn snr_values() {
        let n1 = NoiseSpec::new(1.0, 0).unwrap();
        assert_eq!(snr(&Wave::new(1.0, 1.0).unwrap(), &n1).unwrap(), 1.0);
        assert_eq!(snr_db(&Wave::new(1.0, 1.0).unwrap(), &n1).unwrap(), 0.0);
        assert!((snr(&Wave::new(1.0, 10.0).unwrap(), &n1).unwrap() - 100.0).abs() < 1e-12);
        let n4 = NoiseSpec::new(1e-4, 0).unwrap();
        assert!((snr_db(&Wave::new(1.0, 1.0).unwrap(), &n4).unwrap() - 40.0).abs() < 1e-12);
        assert!(matches!(snr(&Wave::new(1.0, 1.0).unwrap(), &NoiseSpec::new(0.0, 0).unwrap()), Err(Error::ZeroNoise)));
        let from_db = NoiseSpec::from_snr_db(&Wave::new(1.0, 3.0).unwrap(), 20.0, 0).unwrap();
        assert!((from_db.sigma2 - 0.09).abs() < 1e-15);
    }
}
