//! The circle in the Fourier basis e^{ikφ}, |k| ≤ K, where a flux angle θ
//! makes the momentum P = −iħ d/dφ − ħθ diagonal.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::SparseOperator;
use crate::error::{Error, Result};
use crate::units::Units;

#[derive(Clone, Debug, PartialEq)]
pub struct FourierCircle {
    pub k_max: usize,
    pub theta: f64,
    pub units: Units,
}

impl FourierCircle {
    pub fn new(k_max: usize, theta: f64, units: Units) -> Result<Self> {
        if k_max < 1 {
            return Err(Error::InvalidArgument("mode cutoff K must be at least 1".into()));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidArgument("theta must be finite".into()));
        }
        Ok(FourierCircle { k_max, theta, units })
    }

    /// Mode numbers −K..=K in basis order.
    pub fn modes(&self) -> Vec<i64> {
        let k = self.k_max as i64;
        (-k..=k).collect()
    }

    fn measure(&self) -> Vec<f64> {
        vec![1.0; 2 * self.k_max + 1]
    }

    /// Eigenvalue ħ(k − θ) of P on mode k.
    pub fn momentum_value(&self, k: i64) -> f64 {
        self.units.hbar * (k as f64 - self.theta)
    }

    /// Eigenvalue (ħ²/2m)(k − θ)² of H on mode k.
    pub fn energy_value(&self, k: i64) -> f64 {
        let d = k as f64 - self.theta;
        self.units.kinetic() * d * d
    }

    pub fn momentum(&self) -> SparseOperator {
        let d: Vec<Complex64> = self.modes().iter().map(|&k| Complex64::new(self.momentum_value(k), 0.0)).collect();
        SparseOperator::diagonal(self.measure(), &d)
    }

    pub fn hamiltonian(&self) -> SparseOperator {
        let d: Vec<Complex64> = self.modes().iter().map(|&k| Complex64::new(self.energy_value(k), 0.0)).collect();
        SparseOperator::diagonal(self.measure(), &d)
    }

    /// Multiplication by f = Σ_m f̂_m e^{imφ}: (Q)_{kj} = f̂_{k−j}, truncated.
    pub fn position(&self, coeffs: &BTreeMap<i64, Complex64>) -> SparseOperator {
        let modes = self.modes();
        let k = self.k_max as i64;
        let mut trips = Vec::new();
        for (i, &ki) in modes.iter().enumerate() {
            for (&m, &c) in coeffs {
                let kj = ki - m;
                if kj.abs() <= k {
                    trips.push((i, (kj + k) as usize, c));
                }
            }
        }
        let hermitian = coeffs.iter().all(|(&m, &c)| coeffs.get(&-m).copied().unwrap_or_default() == c.conj());
        SparseOperator::from_triplets(self.measure(), trips).flagged(hermitian, 1)
    }

    /// Fourier coefficients of df/dφ.
    pub fn derivative(coeffs: &BTreeMap<i64, Complex64>) -> BTreeMap<i64, Complex64> {
        coeffs.iter().map(|(&m, &c)| (m, c * Complex64::new(0.0, m as f64))).collect()
    }

    /// max |[Q(f), P] − iħ Q(f′)| entrywise; zero in exact arithmetic.
    pub fn heisenberg_residual(&self, coeffs: &BTreeMap<i64, Complex64>) -> Result<f64> {
        let q = self.position(coeffs);
        let qd = self.position(&Self::derivative(coeffs));
        let r =
            SparseOperator::commutator(&q, &self.momentum())?.add_scaled(Complex64::new(0.0, -self.units.hbar), &qd)?;
        Ok(r.max_abs())
    }
}

/// (P, H) on the modes |k| ≤ K.
pub fn fourier_backend_circle(k_max: usize, theta: f64, units: &Units) -> Result<(SparseOperator, SparseOperator)> {
    let fc = FourierCircle::new(k_max, theta, *units)?;
    Ok((fc.momentum(), fc.hamiltonian()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn momentum_spectrum_is_shifted_integers() {
        let u = Units::default();
        let fc = FourierCircle::new(64, 0.25, u).unwrap();
        let p = fc.momentum();
        for (i, k) in fc.modes().into_iter().enumerate() {
            assert_eq!(p.get(i, i).re, k as f64 - 0.25);
            assert_eq!(fc.hamiltonian().get(i, i).re, (k as f64 - 0.25).powi(2));
        }
        let zero = FourierCircle::new(3, 0.0, u).unwrap().momentum();
        assert_eq!((0..7).map(|i| zero.get(i, i).re).collect::<Vec<_>>(), vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        assert!(FourierCircle::new(0, 0.0, u).is_err());
    }

    #[test]
    fn theta_shift_by_one_reindexes() {
        let u = Units::default();
        let a = FourierCircle::new(16, 0.3, u).unwrap();
        let b = FourierCircle::new(16, 1.3, u).unwrap();
        for k in -15..=16 {
            assert!((a.energy_value(k - 1) - b.energy_value(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn heisenberg_is_exact_in_mode_space() {
        let fc = FourierCircle::new(20, 0.37, Units::new(1.3, 1.0, 0.8).unwrap()).unwrap();
        let e_iphi = BTreeMap::from([(1, Complex64::new(1.0, 0.0))]);
        assert!(fc.heisenberg_residual(&e_iphi).unwrap() < 1e-12);
        let cos = BTreeMap::from([(1, Complex64::new(0.5, 0.0)), (-1, Complex64::new(0.5, 0.0))]);
        assert!(fc.heisenberg_residual(&cos).unwrap() < 1e-12);
        assert!(fc.position(&cos).is_hermitian());
        let constant = BTreeMap::from([(0, Complex64::new(2.0, 0.0))]);
        assert_eq!(fc.heisenberg_residual(&constant).unwrap(), 0.0);
    }
}
