use crate::error::{Error, Result};

/// Largest friction angle the linear evolution is clamped to, in degrees.
pub const PHI_MAX: f64 = 89.999;

/// Early-age material with properties evolving linearly in age.
/// Stresses and moduli in kPa, angles in degrees, rates per second.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialModel {
    pub c0: f64,
    pub c_rate: f64,
    pub phi0: f64,
    pub phi_rate: f64,
    pub e0: f64,
    pub e_rate: f64,
    pub nu: f64,
    pub nu_rate: f64,
    /// kg/m³
    pub rho: f64,
    /// Dilatancy angle. Carried for completeness; the analytical checks do
    /// not use it.
    pub psi: f64,
    /// m/s²
    pub g: f64,
}

impl Default for MaterialModel {
    fn default() -> Self {
        MaterialModel {
            c0: 3.0,
            c_rate: 0.0,
            phi0: 20.0,
            phi_rate: 0.0,
            e0: 100.0,
            e_rate: 0.0,
            nu: 0.3,
            nu_rate: 0.0,
            rho: 2100.0,
            psi: 0.0,
            g: 9.81,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialState {
    /// kPa
    pub c: f64,
    /// degrees
    pub phi: f64,
    /// kPa
    pub e: f64,
    pub nu: f64,
}

impl MaterialModel {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.c0,
            self.c_rate,
            self.phi0,
            self.phi_rate,
            self.e0,
            self.e_rate,
            self.nu,
            self.nu_rate,
            self.rho,
            self.psi,
            self.g,
        ];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(Error::param("material", "all properties must be finite"));
        }
        if self.c0 < 0.0 {
            return Err(Error::param("C0", "must be non-negative"));
        }
        if !(self.e0 > 0.0) {
            return Err(Error::param("E0", "must be positive"));
        }
        if !(0.0..0.5).contains(&self.nu) {
            return Err(Error::param("nu", "must lie in [0, 0.5)"));
        }
        if !(0.0..90.0).contains(&self.phi0) {
            return Err(Error::param("phi0", "must lie in [0, 90) degrees"));
        }
        if !(0.0..90.0).contains(&self.psi) {
            return Err(Error::param("psi", "must lie in [0, 90) degrees"));
        }
        if !(self.rho > 0.0) {
            return Err(Error::param("rho", "must be positive"));
        }
        if !(self.g > 0.0) {
            return Err(Error::param("g", "must be positive"));
        }
        Ok(())
    }

    /// Weight per unit volume in kPa per metre.
    pub fn unit_weight(&self) -> f64 {
        self.rho * self.g / 1000.0
    }
}

/// Properties at `age` seconds after deposition, clamped to their valid
/// ranges. Negative ages are treated as zero.
pub fn material_at(model: &MaterialModel, age: f64) -> MaterialState {
    let t = age.max(0.0);
    MaterialState {
        c: (model.c0 + model.c_rate * t).max(0.0),
        phi: (model.phi0 + model.phi_rate * t).clamp(0.0, PHI_MAX),
        e: (model.e0 + model.e_rate * t).max(0.0),
        nu: (model.nu + model.nu_rate * t).clamp(0.0, 0.499),
    }
}

fn check_phi(phi: f64) -> Result<()> {
    if !(0.0..90.0).contains(&phi) {
        return Err(Error::Domain(format!(
            "friction angle {phi} deg outside [0, 90)"
        )));
    }
    Ok(())
}

/// Mohr-Coulomb shear strength `C + σn·tan φ` (kPa, compression positive).
pub fn mohr_coulomb_tau_y(c: f64, phi: f64, sigma_n: f64) -> Result<f64> {
    check_phi(phi)?;
    if sigma_n < 0.0 {
        return Err(Error::Domain(format!("normal stress {sigma_n} kPa is tensile")));
    }
    Ok(c + sigma_n * phi.to_radians().tan())
}

/// Uniaxial compressive strength `2C·cos φ / (1 − sin φ)` (kPa).
pub fn unconfined_strength(c: f64, phi: f64) -> Result<f64> {
    check_phi(phi)?;
    let p = phi.to_radians();
    Ok(2.0 * c * p.cos() / (1.0 - p.sin()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear_evolution() {
        let m = MaterialModel {
            c0: 3.0,
            c_rate: 0.01,
            ..Default::default()
        };
        assert_eq!(material_at(&m, 0.0).c, 3.0);
        assert_relative_eq!(material_at(&m, 600.0).c, 9.0, epsilon = 1e-12);
        let s = material_at(&MaterialModel::default(), 1e6);
        assert_eq!((s.c, s.phi, s.e), (3.0, 20.0, 100.0));
        let fast = MaterialModel {
            phi_rate: 1.0,
            ..Default::default()
        };
        assert_eq!(material_at(&fast, 1000.0).phi, PHI_MAX);
    }

    #[test]
    fn yield_and_strength() {
        assert_eq!(mohr_coulomb_tau_y(10.0, 0.0, 50.0).unwrap(), 10.0);
        assert_eq!(mohr_coulomb_tau_y(0.0, 30.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(mohr_coulomb_tau_y(5.0, 20.0, 10.0).unwrap(), 8.6397, epsilon = 5e-5);
        assert_eq!(unconfined_strength(4.0, 0.0).unwrap(), 8.0);
        assert_eq!(unconfined_strength(0.0, 35.0).unwrap(), 0.0);
        assert_relative_eq!(unconfined_strength(5.0, 20.0).unwrap(), 14.281, epsilon = 5e-4);
        assert!(matches!(mohr_coulomb_tau_y(1.0, 90.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(unconfined_strength(1.0, 95.0), Err(Error::Domain(_))));
    }

    #[test]
    fn validation() {
        assert!(MaterialModel::default().validate().is_ok());
        for bad in [
            MaterialModel { e0: 0.0, ..Default::default() },
            MaterialModel { nu: 0.5, ..Default::default() },
            MaterialModel { c0: -1.0, ..Default::default() },
            MaterialModel { phi0: 90.0, ..Default::default() },
            MaterialModel { rho: 0.0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    proptest::proptest! {
        #[test]
        fn strength_is_monotone(c in 0.0..50.0f64, phi in 0.0..89.0f64, s in 0.0..100.0f64, d in 0.0..1.0f64) {
            let t = mohr_coulomb_tau_y(c, phi, s).unwrap();
            proptest::prop_assert!(mohr_coulomb_tau_y(c + d, phi, s).unwrap() >= t);
            proptest::prop_assert!(mohr_coulomb_tau_y(c, phi + d, s).unwrap() >= t);
            proptest::prop_assert!(mohr_coulomb_tau_y(c, phi, s + d).unwrap() >= t);
            let u = unconfined_strength(c, phi).unwrap();
            proptest::prop_assert!(unconfined_strength(c + d, phi).unwrap() >= u);
            proptest::prop_assert!(unconfined_strength(c, phi + d).unwrap() >= u);
        }
    }
}
