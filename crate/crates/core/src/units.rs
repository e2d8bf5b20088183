//! Physical constants. Energies are in eV and times in fs.

/// Reduced Planck constant in eV·fs.
pub const HBAR_EV_FS: f64 = 0.658211951;

/// Elementary charge in C.
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;

/// One natural current unit e·(1 eV)/ħ expressed in μA.
pub const MICROAMP_PER_NATURAL: f64 = ELEMENTARY_CHARGE / (HBAR_EV_FS * 1e-15) * 1e6;

/// Converts a current in e·eV/ħ to μA.
pub fn natural_to_microamp(j: f64) -> f64 {
    j * MICROAMP_PER_NATURAL
}

/// Converts a current in μA to e·eV/ħ.
pub fn microamp_to_natural(j: f64) -> f64 {
    j / MICROAMP_PER_NATURAL
}
