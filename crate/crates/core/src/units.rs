//! Physical constants. Internally everything is computed with ħ = 1, e = 1 and
//! m = 1/2; these values only rescale outputs.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub hbar: f64,
    pub charge: f64,
    pub mass: f64,
}

impl Default for Units {
    fn default() -> Self {
        Units { hbar: 1.0, charge: 1.0, mass: 0.5 }
    }
}

impl Units {
    pub fn new(hbar: f64, charge: f64, mass: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("charge", charge), ("mass", mass)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Units { hbar, charge, mass })
    }

    /// Prefactor ħ²/2m of the kinetic energy.
    pub fn kinetic(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }

    /// Dimensionless flux angle θ = eΦ/2πħ of a physical flux Φ.
    pub fn flux_angle(&self, flux: f64) -> f64 {
        self.charge * flux / (std::f64::consts::TAU * self.hbar)
    }

    /// Magnetic charge g with eg = 2πnħ.
    pub fn monopole_charge(&self, n: i64) -> f64 {
        std::f64::consts::TAU * n as f64 * self.hbar / self.charge
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_kinetic_prefactor_is_one() {
        assert_eq!(Units::default().kinetic(), 1.0);
    }

    #[test]
    fn flux_angle_and_monopole_charge_are_inverse() {
        let u = Units::new(1.3, 0.7, 2.0).unwrap();
        let g = u.monopole_charge(3);
        // eg/2πħ = n
        assert!((u.flux_angle(g) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(Units::new(0.0, 1.0, 1.0).is_err());
        assert!(Units::new(1.0, 1.0, -1.0).is_err());
    }
}
