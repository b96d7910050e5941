//! Unit conventions and conversions.
//!
//! Internal units everywhere in this crate: time in fs, angular frequency in
//! rad/fs, ħ = 1 (so energies are angular frequencies and line-broadening
//! functions are dimensionless). External inputs use spectroscopy units:
//! wavenumbers in cm⁻¹, times in fs, temperatures in K. Conversion happens
//! exactly once, at construction/load time.

/// Speed of light in cm/fs.
pub const SPEED_OF_LIGHT_CM_FS: f64 = 2.997_924_58e-5;

/// Boltzmann constant in cm⁻¹/K.
pub const BOLTZMANN_CM_K: f64 = 0.695_034_8;

/// Conversion factor from wavenumber (cm⁻¹) to angular frequency (rad/fs):
/// ω = 2πc·ν̃.
pub const WAVENUMBER_TO_RAD_FS: f64 = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_FS;

/// Convert a wavenumber in cm⁻¹ to an angular frequency in rad/fs.
pub fn wavenumber_to_angular(nu_cm: f64) -> f64 {
    nu_cm * WAVENUMBER_TO_RAD_FS
}

/// Convert an angular frequency in rad/fs back to a wavenumber in cm⁻¹.
pub fn angular_to_wavenumber(omega_rad_fs: f64) -> f64 {
    omega_rad_fs / WAVENUMBER_TO_RAD_FS
}

/// Thermal angular frequency k_B·𝒯/ħ in rad/fs for a temperature in K.
pub fn thermal_angular(temperature_k: f64) -> f64 {
    wavenumber_to_angular(BOLTZMANN_CM_K * temperature_k)
}
