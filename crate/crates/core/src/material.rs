//! Physical constants and ferromagnet material parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fundamental constants used by the field and torque terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Vacuum permeability, T·m/A.
    pub mu0: f64,
    /// Bohr magneton, J/T.
    pub mu_b: f64,
    /// Elementary charge, C.
    pub e: f64,
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Gyromagnetic ratio, rad/(s·T).
    pub gamma: f64,
}

impl PhysicalConstants {
    pub const SI: PhysicalConstants = PhysicalConstants {
        mu0: 1.256_637_062_12e-6,
        mu_b: 9.274_010_078_3e-24,
        e: 1.602_176_634e-19,
        hbar: 1.054_571_817e-34,
        gamma: 1.7595e11,
    };

    pub fn validate(&self) -> Result<()> {
        let all = [self.mu0, self.mu_b, self.e, self.hbar, self.gamma];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "physical constants must be finite and strictly positive".into(),
            ))
        }
    }

    /// γ·μ0, the precession rate per A/m of field, in m/(A·s).
    #[inline]
    pub fn gamma0(&self) -> f64 {
        self.gamma * self.mu0
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}

/// Magnetic and electrical constants of the nanowire ferromagnet.
///
/// The uniaxial easy axis is fixed to +z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaterialParams {
    /// Exchange stiffness, J/m.
    pub a_ex: f64,
    /// Gilbert damping.
    pub alpha: f64,
    /// Non-adiabatic spin-transfer coefficient.
    pub beta: f64,
    /// Saturation magnetization, A/m.
    pub ms: f64,
    /// Uniaxial anisotropy constant, J/m³.
    pub ku: f64,
    /// Spin polarization of the current.
    pub polarization: f64,
    /// Electrical resistivity, Ω·m.
    pub rho: f64,
    /// Anisotropic magnetoresistance coefficient.
    pub amr: f64,
}

impl MaterialParams {
    /// Co/CoFeB-class PMA wire used throughout the XDWM studies.
    ///
    /// `rho` is not a measured value for this stack; 2e-7 Ω·m is a
    /// permalloy-class placeholder that only sets absolute resistances.
    pub const PMA_DEFAULT: MaterialParams = MaterialParams {
        a_ex: 1.0e-11,
        alpha: 0.02,
        beta: 0.04,
        ms: 6.0e5,
        ku: 0.59e6,
        polarization: 0.72,
        rho: 2.0e-7,
        amr: 0.014,
    };

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        let finite = [
            self.a_ex,
            self.alpha,
            self.beta,
            self.ms,
            self.ku,
            self.polarization,
            self.rho,
            self.amr,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return bad("material parameters must be finite");
        }
        if self.a_ex <= 0.0 {
            return bad("exchange stiffness must be > 0");
        }
        if self.ms <= 0.0 {
            return bad("saturation magnetization must be > 0");
        }
        if self.ku < 0.0 {
            return bad("anisotropy constant must be >= 0");
        }
        if !(self.polarization > 0.0 && self.polarization <= 1.0) {
            return bad("spin polarization must lie in (0, 1]");
        }
        if self.alpha <= 0.0 {
            return bad("Gilbert damping must be > 0");
        }
        if self.beta < 0.0 {
            return bad("non-adiabatic coefficient must be >= 0");
        }
        if self.rho <= 0.0 {
            return bad("resistivity must be > 0");
        }
        if !(0.0..1.0).contains(&self.amr) {
            return bad("AMR coefficient must lie in [0, 1)");
        }
        Ok(())
    }

    /// Effective perpendicular anisotropy of a thin film, Ku − μ0·Ms²/2.
    pub fn k_eff_thin_film(&self, c: &PhysicalConstants) -> f64 {
        self.ku - 0.5 * c.mu0 * self.ms * self.ms
    }

    /// Static Bloch-wall width π·sqrt(A/K_eff) of a thin film.
    pub fn wall_width(&self, c: &PhysicalConstants) -> f64 {
        std::f64::consts::PI * (self.a_ex / self.k_eff_thin_film(c)).sqrt()
    }
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self::PMA_DEFAULT
    }
}
