//! Physical and renormalization parameters consumed by the bound formulas.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper end of the coupling range under which positivity is claimed.
pub const WEAK_CONDITION_LIMIT: f64 = 1.0 / 6.0;

/// Upper end of the coupling range in which the splitting bounds were derived.
pub const CONSTRUCTION_LIMIT: f64 = 0.04;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse failure: {0}")]
    Parse(String),
    #[error("lambda must be positive (got {0})")]
    NonPositiveLambda(f64),
    #[error("mass must be positive (got {0})")]
    NonPositiveMass(f64),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("renormalization constant `{name}` must be finite and >= 0 (got {value})")]
    BadConstant { name: &'static str, value: f64 },
}

/// Coupling `lambda` and mass `mass`.
///
/// Couplings at or above 1/6 are accepted so that threshold scans can cross
/// the weak-condition boundary; [`PhysicalParams::in_weak_range`] reports it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    lambda: f64,
    mass: f64,
}

impl PhysicalParams {
    pub fn new(lambda: f64, mass: f64) -> Result<Self, ConfigError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(ConfigError::NonPositiveLambda(lambda));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(ConfigError::NonPositiveMass(mass));
        }
        Ok(Self { lambda, mass })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self, ConfigError> {
        Self::new(lambda, self.mass)
    }

    /// `lambda < 1/6`.
    pub fn in_weak_range(&self) -> bool {
        self.lambda < WEAK_CONDITION_LIMIT
    }

    /// `lambda <= 0.04`, the range in which the splitting bounds were built.
    pub fn in_construction_range(&self) -> bool {
        self.lambda <= CONSTRUCTION_LIMIT
    }

    /// `1 + 9 lambda (1 + 6 lambda^2)`.
    pub fn gamma_max(&self) -> f64 {
        gamma_max(self.lambda)
    }
}

pub fn gamma_max(lambda: f64) -> f64 {
    1.0 + 9.0 * lambda * (1.0 + 6.0 * lambda * lambda)
}

/// Mass-shell loop constants. None of them can be computed here; they are
/// inputs and default to zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RenormConstants {
    pub a0: f64,
    pub rho0: f64,
    pub d0: f64,
    /// Mass-shell value of the two-loop operation.
    pub n3_val: f64,
    /// Its `q^2` derivative at the mass shell.
    pub n3_deriv: f64,
}

impl RenormConstants {
    pub fn new(a0: f64, rho0: f64, d0: f64, n3_val: f64, n3_deriv: f64) -> Result<Self, ConfigError> {
        let c = Self { a0, rho0, d0, n3_val, n3_deriv };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, value) in self.named() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ConfigError::BadConstant { name, value });
            }
        }
        Ok(())
    }

    fn named(&self) -> [(&'static str, f64); 5] {
        [("a0", self.a0), ("rho0", self.rho0), ("d0", self.d0), ("n3_val", self.n3_val), ("n3_deriv", self.n3_deriv)]
    }

    pub fn gamma_min(&self) -> f64 {
        1.0
    }

    /// `6 lambda^2 * n3_deriv`.
    pub fn rho_max(&self, lambda: f64) -> f64 {
        6.0 * lambda * lambda * self.n3_deriv
    }

    /// `6 lambda * n3_val`.
    pub fn a_max(&self, lambda: f64) -> f64 {
        6.0 * lambda * self.n3_val
    }

    pub fn all_zero(&self) -> bool {
        self.named().iter().all(|(_, v)| *v == 0.0)
    }
}

/// Which renormalization constants were filled in with the default 0.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub defaulted: Vec<String>,
}

impl Provenance {
    pub fn defaults_applied(&self) -> bool {
        !self.defaulted.is_empty()
    }

    pub fn summary(&self) -> String {
        if self.defaulted.is_empty() {
            "all constants supplied".to_string()
        } else {
            format!("defaults applied: {}", self.defaulted.join(","))
        }
    }
}

/// Optional `[scan]` table of a config document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanTable {
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub steps: Option<usize>,
    pub n_max: Option<u32>,
    pub sigma: Option<Vec<f64>>,
    pub tol: Option<f64>,
}

/// Raw key/value document (TOML). Every key is optional at this level;
/// [`load_config`] enforces what the model needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub lambda: Option<f64>,
    pub mass: Option<f64>,
    pub a0: Option<f64>,
    pub rho0: Option<f64>,
    pub d0: Option<f64>,
    pub n3_val: Option<f64>,
    pub n3_deriv: Option<f64>,
    pub scan: Option<ScanTable>,
}

impl ConfigDocument {
    pub fn parse(source: &str) -> Result<Self, ConfigError> {
        toml::from_str(source).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Renormalization constants with zero defaults and the list of keys
    /// that were defaulted.
    pub fn constants(&self) -> Result<(RenormConstants, Provenance), ConfigError> {
        let mut prov = Provenance::default();
        let mut take = |name: &str, v: Option<f64>| {
            v.unwrap_or_else(|| {
                prov.defaulted.push(name.to_string());
                0.0
            })
        };
        let c = RenormConstants {
            a0: take("a0", self.a0),
            rho0: take("rho0", self.rho0),
            d0: take("d0", self.d0),
            n3_val: take("n3_val", self.n3_val),
            n3_deriv: take("n3_deriv", self.n3_deriv),
        };
        c.validate()?;
        Ok((c, prov))
    }
}

/// Parses a config document into validated parameters.
pub fn load_config(source: &str) -> Result<(PhysicalParams, RenormConstants, Provenance), ConfigError> {
    let doc = ConfigDocument::parse(source)?;
    let lambda = doc.lambda.ok_or(ConfigError::Missing("lambda"))?;
    let mass = doc.mass.ok_or(ConfigError::Missing("mass"))?;
    let params = PhysicalParams::new(lambda, mass)?;
    let (constants, prov) = doc.constants()?;
    Ok((params, constants, prov))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_zero_and_recorded() {
        let (p, c, prov) = load_config("lambda = 0.1\nmass = 1.0\n").unwrap();
        assert_eq!(p.lambda(), 0.1);
        assert_eq!(c, RenormConstants::default());
        assert!(c.all_zero());
        assert!(prov.defaults_applied());
        assert_eq!(prov.defaulted, ["a0", "rho0", "d0", "n3_val", "n3_deriv"]);
    }

    #[test]
    fn negative_lambda_rejected() {
        let err = load_config("lambda = -0.1\nmass = 1.0").unwrap_err();
        assert!(err.to_string().contains("lambda must be positive"));
    }

    #[test]
    fn bad_mass_and_missing_keys() {
        assert!(matches!(load_config("lambda = 0.1\nmass = 0.0"), Err(ConfigError::NonPositiveMass(_))));
        assert!(matches!(load_config("mass = 1.0"), Err(ConfigError::Missing("lambda"))));
        assert!(matches!(load_config("lambda = 0.1\nmass = 1\nd0 = -1.0"), Err(ConfigError::BadConstant { .. })));
    }

    #[test]
    fn unknown_keys_and_garbage_rejected() {
        assert!(matches!(load_config("lambda = 0.1\nmass = 1.0\ncoupling = 2"), Err(ConfigError::Parse(_))));
        assert!(matches!(load_config("lambda = = "), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn gamma_max_at_construction_edge() {
        let (p, c, prov) = load_config("lambda = 0.04\nmass = 1.0\nd0 = 0.5").unwrap();
        assert!((p.gamma_max() - 1.363456).abs() < 1e-15);
        assert_eq!(c.d0, 0.5);
        assert!(!prov.defaulted.contains(&"d0".to_string()));
    }

    #[test]
    fn derived_constants_vanish_with_zero_inputs() {
        let c = RenormConstants::default();
        assert_eq!(c.rho_max(0.1), 0.0);
        assert_eq!(c.a_max(0.1), 0.0);
        let c = RenormConstants::new(0.0, 0.0, 0.0, 2.0, 3.0).unwrap();
        assert!((c.rho_max(0.1) - 0.18).abs() < 1e-15);
        assert!((c.a_max(0.1) - 1.2).abs() < 1e-15);
    }

    #[test]
    fn weak_range_flags() {
        let p = PhysicalParams::new(0.2, 1.0).unwrap();
        assert!(!p.in_weak_range());
        assert!(!p.in_construction_range());
        assert!(PhysicalParams::new(0.04, 1.0).unwrap().in_construction_range());
    }

    proptest::proptest! {
        #[test]
        fn gamma_max_exceeds_one_and_increases(a in 1e-6f64..10.0, b in 1e-6f64..10.0) {
            proptest::prop_assert!(gamma_max(a) > 1.0);
            if a < b {
                proptest::prop_assert!(gamma_max(a) < gamma_max(b));
            }
        }
    }
}
