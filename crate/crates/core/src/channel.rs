//! Expected observables of a fiber link with two threshold detectors.
//!
//! For a pulse of mean photon number `k` the click probability is
//! `D_k = 1 - (1 - 2 p_dc) e^{-eta k}`. After-pulses inflate the sifted yield
//! by `1 + p_ap` and contribute errors at rate one half; misalignment flips
//! a fraction `e_mis` of signal clicks and dark counts err half the time.

use crate::params::{
    Basis, ObservedCounts, ObservedCounts3, SourceConfig, SourceConfig3, SystemParams,
};

/// Overall transmittance `eta_B * 10^(-alpha L / 10)`.
pub fn transmittance(sys: &SystemParams) -> f64 {
    sys.eta_b * 10f64.powf(-sys.alpha * sys.length_km / 10.0)
}

/// Click probability for a pulse of mean photon number `intensity`.
pub fn click_probability(sys: &SystemParams, intensity: f64) -> f64 {
    let x = transmittance(sys) * intensity;
    2.0 * sys.p_dc * (-x).exp() - (-x).exp_m1()
}

/// Expected sifted detections and errors per pulse that is sent with
/// `intensity` in a basis both parties chose.
pub fn per_pulse(sys: &SystemParams, intensity: f64) -> (f64, f64) {
    let d = click_probability(sys, intensity);
    let signal = -(-transmittance(sys) * intensity).exp_m1();
    let detections = d * (1.0 + sys.p_ap);
    let errors = sys.p_dc + sys.e_mis * signal + sys.p_ap * d / 2.0;
    (detections, errors)
}

/// `(n, m)` for `weight` = probability that a pulse falls in the sifted class.
fn tally(sys: &SystemParams, weight: f64, intensity: f64) -> (f64, f64) {
    let n = sys.n_pulses as f64 * weight;
    let (d, e) = per_pulse(sys, intensity);
    (n * d, n * e)
}

pub fn expected_counts(cfg: &SourceConfig, sys: &SystemParams) -> ObservedCounts {
    let pz = cfg.p_z_bob;
    let px = cfg.p_x_bob();
    let pzw = cfg.p_z_given_omega;
    let (n_z_mu, m_z_mu) = tally(sys, cfg.p_mu * pz, cfg.mu);
    let (n_z_v1, m_z_v1) = tally(sys, cfg.p_v1 * pz, cfg.v1);
    let (n_z_omega, m_z_omega) = tally(sys, cfg.p_omega * pzw * pz, cfg.omega);
    let (n_x_v2, m_x_v2) = tally(sys, cfg.p_v2 * px, cfg.v2);
    let (n_x_omega, m_x_omega) = tally(sys, cfg.p_omega * (1.0 - pzw) * px, cfg.omega);
    ObservedCounts {
        n_z_mu,
        n_z_v1,
        n_z_omega,
        m_z_mu,
        m_z_v1,
        m_z_omega,
        n_x_v2,
        n_x_omega,
        m_x_v2,
        m_x_omega,
    }
}

pub fn expected_counts3(cfg: &SourceConfig3, sys: &SystemParams) -> ObservedCounts3 {
    let w = |b: Basis| cfg.p_basis_alice(b) * cfg.p_basis_bob(b);
    let (wz, wx) = (w(Basis::Z), w(Basis::X));
    let (n_z_mu, m_z_mu) = tally(sys, cfg.p_mu * wz, cfg.mu);
    let (n_z_v, m_z_v) = tally(sys, cfg.p_v * wz, cfg.v);
    let (n_z_omega, m_z_omega) = tally(sys, cfg.p_omega * wz, cfg.omega);
    let (n_x_mu, m_x_mu) = tally(sys, cfg.p_mu * wx, cfg.mu);
    let (n_x_v, m_x_v) = tally(sys, cfg.p_v * wx, cfg.v);
    let (n_x_omega, m_x_omega) = tally(sys, cfg.p_omega * wx, cfg.omega);
    ObservedCounts3 {
        n_z_mu,
        n_z_v,
        n_z_omega,
        m_z_mu,
        m_z_v,
        m_z_omega,
        n_x_mu,
        n_x_v,
        n_x_omega,
        m_x_mu,
        m_x_v,
        m_x_omega,
    }
}
