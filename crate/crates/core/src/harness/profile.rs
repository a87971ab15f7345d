//! Synthetic wind and PV profiles.
//!
//! PV follows a half-sine clear-sky shape between sunrise and sunset, scaled
//! by an autocorrelated cloud factor. Wind is an AR(1) process on the
//! capacity factor. Lulls force both sources to exactly zero.

use super::HarnessError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileSpec {
    pub steps: usize,
    /// s.
    pub dt: f64,
    /// Hour of day at step 0.
    pub start_hour: f64,
    /// W.
    pub wind_capacity: f64,
    /// W.
    pub pv_capacity: f64,
    /// Long-run mean wind capacity factor.
    pub wind_mean: f64,
    /// Standard deviation of the wind capacity factor.
    pub wind_std: f64,
    /// Lag-one autocorrelation of the wind process.
    pub wind_autocorr: f64,
    pub sunrise_hour: f64,
    pub sunset_hour: f64,
    /// Clear-sky peak as a fraction of PV capacity.
    pub pv_peak: f64,
    /// Mean cloud transmission in [0, 1].
    pub cloud_mean: f64,
    pub cloud_std: f64,
    /// Zero-renewable windows as half-open step ranges `[start, end)`.
    pub lulls: Vec<(usize, usize)>,
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec {
            steps: 360,
            dt: 3600.0,
            start_hour: 0.0,
            wind_capacity: 450.0e6,
            pv_capacity: 150.0e6,
            wind_mean: 0.3,
            wind_std: 0.18,
            wind_autocorr: 0.9,
            sunrise_hour: 6.0,
            sunset_hour: 18.0,
            pv_peak: 0.85,
            cloud_mean: 0.75,
            cloud_std: 0.15,
            lulls: Vec::new(),
        }
    }
}

impl ProfileSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Profile(m.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.wind_capacity >= 0.0 && self.pv_capacity >= 0.0) {
            return bad("capacities must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.wind_mean) || !(0.0..=1.0).contains(&self.cloud_mean) {
            return bad("wind_mean and cloud_mean must lie in [0, 1]");
        }
        if !(self.wind_std >= 0.0 && self.cloud_std >= 0.0) {
            return bad("standard deviations must be non-negative");
        }
        if !(-1.0 < self.wind_autocorr && self.wind_autocorr < 1.0) {
            return bad("wind_autocorr must lie in (-1, 1)");
        }
        if !(0.0..=1.0).contains(&self.pv_peak) {
            return bad("pv_peak must lie in [0, 1]");
        }
        if !(0.0 <= self.sunrise_hour && self.sunrise_hour < self.sunset_hour && self.sunset_hour <= 24.0) {
            return bad("need 0 <= sunrise_hour < sunset_hour <= 24");
        }
        for &(a, b) in &self.lulls {
            if a >= b || b > self.steps {
                return Err(HarnessError::Profile(format!("lull [{a}, {b}) outside 0..{}", self.steps)));
            }
        }
        Ok(())
    }

    /// `(wind, pv)` in W. Identical seeds give identical series.
    pub fn generate(&self, seed: u64) -> Result<(Vec<f64>, Vec<f64>), HarnessError> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = Normal::new(0.0, 1.0).map_err(|e| HarnessError::Profile(e.to_string()))?;
        let phi = self.wind_autocorr;
        let innov = (1.0 - phi * phi).sqrt();
        let mut z: f64 = unit.sample(&mut rng);
        let mut cloud = self.cloud_mean;
        let mut wind = Vec::with_capacity(self.steps);
        let mut pv = Vec::with_capacity(self.steps);
        for t in 0..self.steps {
            z = phi * z + innov * unit.sample(&mut rng);
            let cf = (self.wind_mean + self.wind_std * z).clamp(0.0, 1.0);
            wind.push(self.wind_capacity * cf);

            cloud = (0.7 * cloud + 0.3 * self.cloud_mean + self.cloud_std * unit.sample(&mut rng)).clamp(0.0, 1.0);
            let hour = (self.start_hour + t as f64 * self.dt / 3600.0).rem_euclid(24.0);
            let day_len = self.sunset_hour - self.sunrise_hour;
            let shape = if hour > self.sunrise_hour && hour < self.sunset_hour {
                (std::f64::consts::PI * (hour - self.sunrise_hour) / day_len).sin()
            } else {
                0.0
            };
            pv.push(self.pv_capacity * self.pv_peak * shape * cloud);
        }
        for &(a, b) in &self.lulls {
            wind[a..b].iter_mut().for_each(|v| *v = 0.0);
            pv[a..b].iter_mut().for_each(|v| *v = 0.0);
        }
        Ok((wind, pv))
    }
}
