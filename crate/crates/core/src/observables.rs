//! Photon-number statistics of a stationary state.

use serde::Serialize;

use crate::hilbert::{annihilation_op, HilbertLayout, OperatorMatrix};
use crate::liouvillian::DensityMatrix;
use crate::{Error, Result, C64};

/// `g2` is flagged unreliable below this mean photon number.
pub const G2_MIN_MEAN: f64 = 1e-8;
/// `g3` is flagged unreliable when `⟨a†a⟩³` falls below this.
pub const G3_MIN_MEAN_CUBED: f64 = 1e-20;

/// A normalized correlation value with its reliability flag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Correlation {
    pub value: f64,
    pub reliable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhotonStatistics {
    pub mean_n: f64,
    pub g2: Correlation,
    pub g3: Correlation,
    /// `p(n)` for `n = 0..=n_max`, traced over the atoms.
    pub photon_dist: Vec<f64>,
    pub purity: f64,
}

/// `tr(ρ op)`.
pub fn expectation(rho: &DensityMatrix, op: &OperatorMatrix) -> Result<C64> {
    if rho.layout() != op.layout() {
        return Err(Error::Parameter(format!("state on {} but operator on {}", rho.layout(), op.layout())));
    }
    let (r, o) = (rho.matrix(), op.matrix());
    let d = rho.layout().dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += r[(i, j)] * o[(j, i)];
        }
    }
    Ok(acc)
}

/// Normally ordered moment operator `a†ᵏ aᵏ`.
pub fn normal_moment_op(layout: HilbertLayout, order: u32) -> OperatorMatrix {
    let a = annihilation_op(layout);
    let mut ak = OperatorMatrix::identity(layout);
    for _ in 0..order {
        ak = &ak * &a;
    }
    &ak.adjoint() * &ak
}

fn moment(rho: &DensityMatrix, order: u32) -> f64 {
    expectation(rho, &normal_moment_op(rho.layout(), order))
        .expect("moment operator built on the state's own layout")
        .re
}

pub fn mean_photon_number(rho: &DensityMatrix) -> f64 {
    moment(rho, 1)
}

fn correlation(rho: &DensityMatrix, order: u32, mean_n: f64) -> Correlation {
    let reliable = match order {
        2 => mean_n >= G2_MIN_MEAN,
        _ => mean_n.powi(3) >= G3_MIN_MEAN_CUBED,
    };
    let value = if mean_n > 0.0 { moment(rho, order) / mean_n.powi(order as i32) } else { f64::NAN };
    Correlation { value, reliable }
}

/// `⟨a†a†aa⟩ / ⟨a†a⟩²`.
pub fn g2_zero(rho: &DensityMatrix) -> Correlation {
    correlation(rho, 2, mean_photon_number(rho))
}

/// `⟨a†a†a†aaa⟩ / ⟨a†a⟩³`.
pub fn g3_zero(rho: &DensityMatrix) -> Correlation {
    correlation(rho, 3, mean_photon_number(rho))
}

/// `p(n) = Σ_atoms ⟨atoms, n|ρ|atoms, n⟩`.
pub fn photon_distribution(rho: &DensityMatrix) -> Vec<f64> {
    let layout = rho.layout();
    let mut p = vec![0.0; layout.fock_dim()];
    for i in 0..layout.dim() {
        let s = layout.state(i).expect("index in range");
        p[s.photons] += rho.matrix()[(i, i)].re;
    }
    p
}

/// `Σ n!/(n−k)! p(n)`, the k-th factorial moment of a photon distribution.
pub fn factorial_moment(p: &[f64], order: usize) -> f64 {
    p.iter().enumerate().map(|(n, pn)| ((0..order).map(|j| n.saturating_sub(j) as f64).product::<f64>()) * pn).sum()
}

pub fn photon_statistics(rho: &DensityMatrix) -> PhotonStatistics {
    let mean_n = mean_photon_number(rho);
    PhotonStatistics {
        mean_n,
        g2: correlation(rho, 2, mean_n),
        g3: correlation(rho, 3, mean_n),
        photon_dist: photon_distribution(rho),
        purity: rho.purity(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{number_op, BasisState};
    use crate::liouvillian::{build_liouvillian, steady_state};
    use crate::model::driven_cavity;
    use nalgebra::DMatrix;

    fn fock(n_atoms: usize, n: usize) -> DensityMatrix {
        let l = HilbertLayout::new(n_atoms, 4).unwrap();
        DensityMatrix::pure(l, BasisState::new(0, n)).unwrap()
    }

    fn coherent(delta: f64, eta: f64) -> DensityMatrix {
        let (h, c) = driven_cavity(25, delta, eta, 1.0).unwrap();
        steady_state(&build_liouvillian(&h, &c).unwrap()).unwrap().rho
    }

    #[test]
    fn fock_state_expectations() {
        let vac = fock(2, 0);
        let n = number_op(vac.layout());
        assert_eq!(expectation(&vac, &n).unwrap(), C64::new(0.0, 0.0));
        let two = fock(2, 2);
        assert!((expectation(&two, &n).unwrap().re - 2.0).abs() < 1e-15);
        let id = OperatorMatrix::identity(two.layout());
        assert!((expectation(&two, &id).unwrap().re - 1.0).abs() < 1e-15);
        let other = OperatorMatrix::identity(HilbertLayout::new(1, 4).unwrap());
        assert!(expectation(&two, &other).is_err());
    }

    #[test]
    fn fock_state_correlations_vanish() {
        let one = fock(1, 1);
        assert_eq!(g2_zero(&one).value, 0.0);
        let two = fock(1, 2);
        assert_eq!(g3_zero(&two).value, 0.0);
        assert!((g2_zero(&two).value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coherent_state_is_poissonian() {
        let rho = coherent(0.4, 0.5);
        let g2 = g2_zero(&rho);
        let g3 = g3_zero(&rho);
        assert!(g2.reliable && g3.reliable);
        assert!((g2.value - 1.0).abs() < 1e-6, "{}", g2.value);
        assert!((g3.value - 1.0).abs() < 1e-6, "{}", g3.value);
    }

    #[test]
    fn weak_coherent_distribution_ratio() {
        // ⟨n⟩ = η²/(Δ² + κ²) = 0.01 for η = 0.1, Δ = 0
        let rho = coherent(0.0, 0.1);
        let p = photon_distribution(&rho);
        let mean = 0.01f64;
        assert!((p[1] / p[0] - mean).abs() < 1e-10);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn vacuum_distribution_and_unreliable_flags() {
        let vac = fock(2, 0);
        let p = photon_distribution(&vac);
        assert_eq!(p[0], 1.0);
        let stats = photon_statistics(&vac);
        assert!(!stats.g2.reliable && !stats.g3.reliable);
        assert_eq!(stats.mean_n, 0.0);
    }

    #[test]
    fn reliability_thresholds_are_exact() {
        // a mixture with a tunable single-photon weight sets ⟨a†a⟩ exactly
        let layout = HilbertLayout::new(0, 3).unwrap();
        let mixture = |w: f64| {
            let mut m = DMatrix::zeros(4, 4);
            m[(0, 0)] = C64::new(1.0 - w, 0.0);
            m[(1, 1)] = C64::new(w, 0.0);
            DensityMatrix::from_matrix(layout, m).unwrap()
        };
        assert!(g2_zero(&mixture(1e-8)).reliable);
        assert!(!g2_zero(&mixture(0.99e-8)).reliable);
        let edge = G3_MIN_MEAN_CUBED.cbrt();
        assert!(g3_zero(&mixture(edge * 1.001)).reliable);
        assert!(!g3_zero(&mixture(edge * 0.999)).reliable);
    }

    #[test]
    fn operator_and_distribution_moments_agree() {
        let rho = coherent(0.3, 0.8);
        let p = photon_distribution(&rho);
        let mean = mean_photon_number(&rho);
        assert!((factorial_moment(&p, 1) - mean).abs() < 1e-10);
        let g2_p = factorial_moment(&p, 2) / mean.powi(2);
        assert!((g2_p - g2_zero(&rho).value).abs() < 1e-10);
    }
}
