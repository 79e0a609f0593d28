use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Threshold on |cos(A*pi)| below which the flux is treated as half-integer.
pub const TOL_HALF: f64 = 1e-12;
/// Absolute tolerance guaranteed for located band edges.
pub const TOL_ROOT: f64 = 1e-10;
/// Distance in momentum to a positive integer that marks a flat-band energy.
pub const TOL_FLAT: f64 = 1e-12;

/// Flux regime of the chain. Selects which spectral description applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxRegime {
    /// Generic flux: bands, gaps and flat bands at k in N.
    Magnetic,
    /// A - 1/2 in Z: pure point spectrum.
    HalfIntegerFlux,
    /// A in Z: gauge equivalent to the field-free chain.
    NonMagnetic,
}

/// Parameters of the periodic chain: flux parameter `A` (flux per ring over
/// 2*pi) and the background vertex coupling `alpha`. Half-ring length is pi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainParams {
    flux: f64,
    alpha: f64,
    cos_flux: f64,
}

impl ChainParams {
    pub fn new(flux: f64, alpha: f64) -> Result<Self> {
        if !flux.is_finite() {
            return Err(Error::InvalidParams(format!("flux must be finite, got {flux}")));
        }
        Self::check_alpha(alpha)?;
        Ok(Self {
            flux,
            alpha,
            cos_flux: (flux * PI).cos(),
        })
    }

    /// Builds the parameters from cos(A*pi) directly, which is how figure
    /// parameters are usually quoted. `A` is recovered on [0, 1].
    pub fn from_cos_flux(cos_flux: f64, alpha: f64) -> Result<Self> {
        if !(cos_flux.is_finite() && cos_flux.abs() <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "cos(A*pi) must lie in [-1, 1], got {cos_flux}"
            )));
        }
        Self::check_alpha(alpha)?;
        Ok(Self {
            flux: cos_flux.acos() / PI,
            alpha,
            cos_flux,
        })
    }

    fn check_alpha(alpha: f64) -> Result<()> {
        if alpha.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "coupling constant must be finite, got {alpha}"
            )))
        }
    }

    pub fn flux(&self) -> f64 {
        self.flux
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// cos(A*pi), cached at construction.
    pub fn cos_flux(&self) -> f64 {
        self.cos_flux
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::check_alpha(alpha)?;
        Ok(Self { alpha, ..*self })
    }

    pub fn is_half_integer_flux(&self) -> bool {
        self.cos_flux.abs() < TOL_HALF
    }

    pub fn regime(&self) -> FluxRegime {
        if self.is_half_integer_flux() {
            FluxRegime::HalfIntegerFlux
        } else if (self.flux - self.flux.round()).abs() < TOL_HALF {
            FluxRegime::NonMagnetic
        } else {
            FluxRegime::Magnetic
        }
    }

    pub(crate) fn require_defined_xi(&self) -> Result<()> {
        if self.is_half_integer_flux() {
            Err(Error::HalfIntegerFlux {
                cos_flux: self.cos_flux,
            })
        } else {
            Ok(())
        }
    }
}

/// Momentum branch attached to a real energy E = k^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// k = sqrt(E) > 0
    Positive,
    Zero,
    /// k = i*kappa with kappa = sqrt(-E) > 0
    Negative,
}

/// A real energy together with its principal momentum branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyPoint {
    energy: f64,
}

impl EnergyPoint {
    pub fn new(energy: f64) -> Self {
        Self { energy }
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn branch(&self) -> Branch {
        if self.energy > 0.0 {
            Branch::Positive
        } else if self.energy < 0.0 {
            Branch::Negative
        } else {
            Branch::Zero
        }
    }

    /// |k| = sqrt(|E|).
    pub fn momentum(&self) -> f64 {
        self.energy.abs().sqrt()
    }

    /// Returns `n` when E = n^2 for a positive integer n (within `TOL_FLAT` in k).
    pub fn flat_band_index(&self) -> Option<u64> {
        if self.energy <= 0.0 {
            return None;
        }
        let k = self.energy.sqrt();
        let n = k.round();
        (n >= 1.0 && (k - n).abs() < TOL_FLAT).then_some(n as u64)
    }

    pub fn on_flat_band(&self) -> bool {
        self.flat_band_index().is_some()
    }
}

/// Extra couplings gamma_1..gamma_m placed at consecutive vertices 1..m.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PerturbationPattern {
    gammas: Vec<f64>,
}

impl PerturbationPattern {
    pub fn new(gammas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::InvalidParams("pattern must contain at least one vertex".into()));
        }
        if let Some(g) = gammas.iter().find(|g| !g.is_finite()) {
            return Err(Error::InvalidParams(format!("pattern coupling must be finite, got {g}")));
        }
        Ok(Self { gammas })
    }

    /// m identical couplings.
    pub fn identical(gamma: f64, m: usize) -> Result<Self> {
        Self::new(vec![gamma; m])
    }

    /// Two couplings separated by `n` unperturbed vertices.
    pub fn distant(gamma1: f64, gamma2: f64, n: usize) -> Result<Self> {
        let mut g = vec![0.0; n + 2];
        g[0] = gamma1;
        g[n + 1] = gamma2;
        Self::new(g)
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.gammas.iter().sum()
    }

    pub fn scaled(&self, eps: f64) -> Self {
        Self {
            gammas: self.gammas.iter().map(|g| g * eps).collect(),
        }
    }

    /// Extra coupling at vertex j (1-based); zero outside the support.
    pub fn at(&self, j: i64) -> f64 {
        if j >= 1 && (j as usize) <= self.gammas.len() {
            self.gammas[j as usize - 1]
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes() {
        assert_eq!(ChainParams::new(0.0, 1.0).unwrap().regime(), FluxRegime::NonMagnetic);
        assert_eq!(ChainParams::new(2.0, 1.0).unwrap().regime(), FluxRegime::NonMagnetic);
        assert_eq!(ChainParams::new(0.5, 1.0).unwrap().regime(), FluxRegime::HalfIntegerFlux);
        assert_eq!(ChainParams::new(-1.5, 1.0).unwrap().regime(), FluxRegime::HalfIntegerFlux);
        assert_eq!(ChainParams::new(0.3, 1.0).unwrap().regime(), FluxRegime::Magnetic);
        assert_eq!(
            ChainParams::from_cos_flux(-1.0, 0.0).unwrap().regime(),
            FluxRegime::NonMagnetic
        );
        assert_eq!(
            ChainParams::from_cos_flux(0.0, 0.0).unwrap().regime(),
            FluxRegime::HalfIntegerFlux
        );
    }

    #[test]
    fn rejects_non_finite() {
        assert!(ChainParams::new(f64::NAN, 1.0).is_err());
        assert!(ChainParams::new(0.1, f64::INFINITY).is_err());
        assert!(ChainParams::from_cos_flux(1.5, 0.0).is_err());
    }

    #[test]
    fn cos_flux_round_trip() {
        let p = ChainParams::from_cos_flux(0.7, 1.0).unwrap();
        assert_eq!(p.cos_flux(), 0.7);
        assert!(((p.flux() * PI).cos() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn patterns() {
        assert!(PerturbationPattern::new(vec![]).is_err());
        assert!(PerturbationPattern::new(vec![1.0, f64::NAN]).is_err());
        let d = PerturbationPattern::distant(-1.0, 2.0, 3).unwrap();
        assert_eq!(d.gammas(), &[-1.0, 0.0, 0.0, 0.0, 2.0]);
        assert_eq!(d.at(0), 0.0);
        assert_eq!(d.at(1), -1.0);
        assert_eq!(d.at(5), 2.0);
        assert_eq!(d.at(6), 0.0);
        assert_eq!(d.sum(), 1.0);
        assert_eq!(d.scaled(0.5).gammas()[4], 1.0);
    }

    #[test]
    fn energy_branches() {
        assert_eq!(EnergyPoint::new(2.0).branch(), Branch::Positive);
        assert_eq!(EnergyPoint::new(-2.0).branch(), Branch::Negative);
        assert_eq!(EnergyPoint::new(0.0).branch(), Branch::Zero);
        assert_eq!(EnergyPoint::new(9.0).flat_band_index(), Some(3));
        assert_eq!(EnergyPoint::new(8.9).flat_band_index(), None);
        assert_eq!(EnergyPoint::new(-1.0).flat_band_index(), None);
        assert_eq!(EnergyPoint::new(0.25).flat_band_index(), None);
    }
}
