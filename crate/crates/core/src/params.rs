use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Preparation / measurement basis. Z generates key, X tests for phase errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub fn other(self) -> Self {
        match self {
            Basis::Z => Basis::X,
            Basis::X => Basis::Z,
        }
    }
}

/// Whether finite-size deviation terms enter the estimators.
///
/// `Asymptotic` zeroes every Hoeffding, random-sampling and phase-error
/// deviation, leaving the bare decoy-state linear estimates. It exists for
/// tightness checks against expected counts, never for key generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fluctuations {
    #[default]
    Finite,
    Asymptotic,
}

/// Source settings of the four-intensity protocol.
///
/// `mu` and `v1` are always prepared in Z, `v2` always in X, and `omega` in Z
/// with probability `p_z_given_omega`. Bob measures in Z with `p_z_bob`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    pub mu: f64,
    pub v1: f64,
    pub v2: f64,
    pub omega: f64,
    pub p_mu: f64,
    pub p_v1: f64,
    pub p_v2: f64,
    pub p_omega: f64,
    pub p_z_given_omega: f64,
    pub p_z_bob: f64,
}

const SIMPLEX_TOL: f64 = 1e-9;

fn open_unit(name: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(domain(name, p, "(0, 1)"))
    }
}

impl SourceConfig {
    /// Optimal four-intensity parameters reported for 100 km, with
    /// `omega = 2e-4` and `P_{Z|omega} = P_Z`.
    pub fn reference_four() -> Self {
        Self::from_free(0.47, 0.183, 0.32, 2e-4, 0.16, 0.407, 0.22, 0.82)
    }

    /// Builds a config from the optimizer's free variables; `p_omega` takes
    /// the rest of the simplex and `p_z_given_omega` is tied to `p_z`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_free(
        mu: f64,
        v1: f64,
        v2: f64,
        omega: f64,
        p_mu: f64,
        p_v1: f64,
        p_v2: f64,
        p_z: f64,
    ) -> Self {
        Self {
            mu,
            v1,
            v2,
            omega,
            p_mu,
            p_v1,
            p_v2,
            p_omega: 1.0 - p_mu - p_v1 - p_v2,
            p_z_given_omega: p_z,
            p_z_bob: p_z,
        }
    }

    pub fn p_x_bob(&self) -> f64 {
        1.0 - self.p_z_bob
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.mu,
            self.v1,
            self.v2,
            self.omega,
            self.p_mu,
            self.p_v1,
            self.p_v2,
            self.p_omega,
            self.p_z_given_omega,
            self.p_z_bob,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::Config("source parameters must be finite".into()));
        }
        if self.omega < 0.0 {
            return Err(domain("omega", self.omega, "omega >= 0"));
        }
        if self.v1 <= self.omega {
            return Err(domain("v1", self.v1, "v1 > omega"));
        }
        if self.v2 <= self.omega {
            return Err(domain("v2", self.v2, "v2 > omega"));
        }
        if self.mu <= self.v1 + self.omega {
            return Err(domain("mu", self.mu, "mu > v1 + omega"));
        }
        open_unit("p_mu", self.p_mu)?;
        open_unit("p_v1", self.p_v1)?;
        open_unit("p_v2", self.p_v2)?;
        open_unit("p_omega", self.p_omega)?;
        let sum = self.p_mu + self.p_v1 + self.p_v2 + self.p_omega;
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(domain("p_mu + p_v1 + p_v2 + p_omega", sum, "= 1"));
        }
        open_unit("p_z_given_omega", self.p_z_given_omega)?;
        open_unit("p_z_bob", self.p_z_bob)
    }
}

/// Source settings of the three-intensity baseline: one decoy `v` shared by
/// both bases and an intensity-independent basis bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig3 {
    pub mu: f64,
    pub v: f64,
    pub omega: f64,
    pub p_mu: f64,
    pub p_v: f64,
    pub p_omega: f64,
    pub p_z_alice: f64,
    pub p_z_bob: f64,
}

impl SourceConfig3 {
    /// Optimal three-intensity parameters reported for 100 km.
    pub fn reference_three() -> Self {
        Self::from_free(0.551, 0.188, 2e-4, 0.127, 0.599, 0.669)
    }

    /// Alice and Bob share the basis bias `p_z`; `p_omega` closes the simplex.
    pub fn from_free(mu: f64, v: f64, omega: f64, p_mu: f64, p_v: f64, p_z: f64) -> Self {
        Self {
            mu,
            v,
            omega,
            p_mu,
            p_v,
            p_omega: 1.0 - p_mu - p_v,
            p_z_alice: p_z,
            p_z_bob: p_z,
        }
    }

    pub fn p_basis_alice(&self, basis: Basis) -> f64 {
        match basis {
            Basis::Z => self.p_z_alice,
            Basis::X => 1.0 - self.p_z_alice,
        }
    }

    pub fn p_basis_bob(&self, basis: Basis) -> f64 {
        match basis {
            Basis::Z => self.p_z_bob,
            Basis::X => 1.0 - self.p_z_bob,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.mu,
            self.v,
            self.omega,
            self.p_mu,
            self.p_v,
            self.p_omega,
            self.p_z_alice,
            self.p_z_bob,
        ];
        if !all.iter().all(|x| x.is_finite()) {
            return Err(Error::Config("source parameters must be finite".into()));
        }
        if self.omega < 0.0 {
            return Err(domain("omega", self.omega, "omega >= 0"));
        }
        if self.v <= self.omega {
            return Err(domain("v", self.v, "v > omega"));
        }
        if self.mu <= self.v + self.omega {
            return Err(domain("mu", self.mu, "mu > v + omega"));
        }
        open_unit("p_mu", self.p_mu)?;
        open_unit("p_v", self.p_v)?;
        open_unit("p_omega", self.p_omega)?;
        let sum = self.p_mu + self.p_v + self.p_omega;
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(domain("p_mu + p_v + p_omega", sum, "= 1"));
        }
        open_unit("p_z_alice", self.p_z_alice)?;
        open_unit("p_z_bob", self.p_z_bob)
    }
}

/// Detector and fiber constants plus link length and block size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Dark count probability per pulse and detector.
    pub p_dc: f64,
    /// After-pulse probability per detection.
    pub p_ap: f64,
    /// Misalignment error rate.
    pub e_mis: f64,
    /// Bob's detection efficiency.
    pub eta_b: f64,
    /// Fiber attenuation in dB/km.
    pub alpha: f64,
    pub length_km: f64,
    /// Pulses sent by Alice (N).
    pub n_pulses: u64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            p_dc: 6e-7,
            p_ap: 0.04,
            e_mis: 5e-3,
            eta_b: 0.1,
            alpha: 0.2,
            length_km: 0.0,
            n_pulses: 1_000_000_000,
        }
    }
}

impl SystemParams {
    pub fn with_length(mut self, length_km: f64) -> Self {
        self.length_km = length_km;
        self
    }

    pub fn with_pulses(mut self, n_pulses: u64) -> Self {
        self.n_pulses = n_pulses;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_dc", self.p_dc),
            ("p_ap", self.p_ap),
            ("e_mis", self.e_mis),
            ("eta_b", self.eta_b),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(domain(name, p, "[0, 1]"));
            }
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(domain("alpha", self.alpha, "alpha > 0"));
        }
        if !(self.length_km >= 0.0 && self.length_km.is_finite()) {
            return Err(domain("length_km", self.length_km, "length >= 0"));
        }
        if self.n_pulses == 0 {
            return Err(domain("n_pulses", 0.0, "n_pulses >= 1"));
        }
        Ok(())
    }
}

/// Composable security targets. `eps_sec` itself is not stored: it is
/// `kappa * l` and resolved during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityParams {
    pub eps_cor: f64,
    /// Secrecy leakage per final key bit.
    pub kappa: f64,
    /// Error-correction efficiency.
    pub f_ec: f64,
    /// Number of concentration-inequality applications sharing `eps_sec`.
    pub error_terms: u32,
    #[serde(default)]
    pub fluctuations: Fluctuations,
}

pub const FOUR_INTENSITY_TERMS: u32 = 17;
pub const THREE_INTENSITY_TERMS: u32 = 21;

impl SecurityParams {
    pub fn four_intensity() -> Self {
        Self {
            eps_cor: 1e-15,
            kappa: 1e-15,
            f_ec: 1.16,
            error_terms: FOUR_INTENSITY_TERMS,
            fluctuations: Fluctuations::Finite,
        }
    }

    pub fn three_intensity() -> Self {
        Self {
            error_terms: THREE_INTENSITY_TERMS,
            ..Self::four_intensity()
        }
    }

    pub fn asymptotic(mut self) -> Self {
        self.fluctuations = Fluctuations::Asymptotic;
        self
    }

    pub fn validate(&self) -> Result<()> {
        open_unit("eps_cor", self.eps_cor)?;
        open_unit("kappa", self.kappa)?;
        if !(self.f_ec >= 1.0 && self.f_ec.is_finite()) {
            return Err(domain("f_ec", self.f_ec, "f_ec >= 1"));
        }
        if ![FOUR_INTENSITY_TERMS, THREE_INTENSITY_TERMS].contains(&self.error_terms) {
            return Err(domain("error_terms", self.error_terms as f64, "17 or 21"));
        }
        Ok(())
    }
}

/// Sifted detections (`n_*`) and bit errors (`m_*`) of the four-intensity
/// protocol. Values are real so that expected counts can be fed directly.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObservedCounts {
    pub n_z_mu: f64,
    pub n_z_v1: f64,
    pub n_z_omega: f64,
    pub m_z_mu: f64,
    pub m_z_v1: f64,
    pub m_z_omega: f64,
    pub n_x_v2: f64,
    pub n_x_omega: f64,
    pub m_x_v2: f64,
    pub m_x_omega: f64,
}

fn check_pairs(pairs: &[(&'static str, f64, f64)]) -> Result<()> {
    for &(name, n, m) in pairs {
        if !(n.is_finite() && m.is_finite()) || n < 0.0 || m < 0.0 {
            return Err(domain(name, n.min(m), "counts must be finite and >= 0"));
        }
        if m > n {
            return Err(domain(name, m, "errors <= detections"));
        }
    }
    Ok(())
}

impl ObservedCounts {
    pub fn n_z(&self) -> f64 {
        self.n_z_mu + self.n_z_v1 + self.n_z_omega
    }

    pub fn m_z(&self) -> f64 {
        self.m_z_mu + self.m_z_v1 + self.m_z_omega
    }

    pub fn n_x(&self) -> f64 {
        self.n_x_v2 + self.n_x_omega
    }

    pub fn m_x(&self) -> f64 {
        self.m_x_v2 + self.m_x_omega
    }

    /// Aggregate Z-basis error rate over all three Z intensities.
    pub fn e_z(&self) -> f64 {
        let n = self.n_z();
        if n > 0.0 {
            self.m_z() / n
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_pairs(&[
            ("z_mu", self.n_z_mu, self.m_z_mu),
            ("z_v1", self.n_z_v1, self.m_z_v1),
            ("z_omega", self.n_z_omega, self.m_z_omega),
            ("x_v2", self.n_x_v2, self.m_x_v2),
            ("x_omega", self.n_x_omega, self.m_x_omega),
        ])
    }
}

/// Counts of the three-intensity baseline, which needs all three intensities
/// in both bases.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObservedCounts3 {
    pub n_z_mu: f64,
    pub n_z_v: f64,
    pub n_z_omega: f64,
    pub m_z_mu: f64,
    pub m_z_v: f64,
    pub m_z_omega: f64,
    pub n_x_mu: f64,
    pub n_x_v: f64,
    pub n_x_omega: f64,
    pub m_x_mu: f64,
    pub m_x_v: f64,
    pub m_x_omega: f64,
}

impl ObservedCounts3 {
    pub fn n_z(&self) -> f64 {
        self.n_z_mu + self.n_z_v + self.n_z_omega
    }

    pub fn n_x(&self) -> f64 {
        self.n_x_mu + self.n_x_v + self.n_x_omega
    }

    pub fn m_z(&self) -> f64 {
        self.m_z_mu + self.m_z_v + self.m_z_omega
    }

    pub fn m_x(&self) -> f64 {
        self.m_x_mu + self.m_x_v + self.m_x_omega
    }

    pub fn e_z(&self) -> f64 {
        let n = self.n_z();
        if n > 0.0 {
            self.m_z() / n
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_pairs(&[
            ("z_mu", self.n_z_mu, self.m_z_mu),
            ("z_v", self.n_z_v, self.m_z_v),
            ("z_omega", self.n_z_omega, self.m_z_omega),
            ("x_mu", self.n_x_mu, self.m_x_mu),
            ("x_v", self.n_x_v, self.m_x_v),
            ("x_omega", self.n_x_omega, self.m_x_omega),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_configs_are_valid() {
        SourceConfig::reference_four().validate().unwrap();
        SourceConfig3::reference_three().validate().unwrap();
        let cfg = SourceConfig::reference_four();
        assert!((cfg.p_omega - 0.213).abs() < 1e-12);
    }

    #[test]
    fn rejects_intensity_ordering_violations() {
        let mut cfg = SourceConfig::reference_four();
        cfg.mu = cfg.v1 + cfg.omega;
        assert!(cfg.validate().is_err());
        let mut cfg = SourceConfig::reference_four();
        cfg.v2 = cfg.omega;
        assert!(cfg.validate().is_err());
        let mut cfg = SourceConfig3::reference_three();
        cfg.p_v = 0.9;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn security_terms_restricted() {
        let mut sec = SecurityParams::four_intensity();
        sec.validate().unwrap();
        sec.error_terms = 5;
        assert!(sec.validate().is_err());
        sec.error_terms = 21;
        sec.f_ec = 0.9;
        assert!(sec.validate().is_err());
    }

    #[test]
    fn counts_require_errors_below_detections() {
        let mut c = ObservedCounts {
            n_z_mu: 10.0,
            m_z_mu: 1.0,
            ..Default::default()
        };
        c.validate().unwrap();
        c.m_x_v2 = 1.0;
        assert!(c.validate().is_err());
        assert_eq!(ObservedCounts::default().e_z(), 0.0);
    }
}
