#pragma once

// Physical constants (CODATA 2018, exact where the SI defines them) and the
// spectroscopic-unit conversions applied when molecular data is ingested.

namespace bbrcool::units {

inline constexpr double pi = 3.141592653589793238462643383279502884;

inline constexpr double planck = 6.62607015e-34;          // J s
inline constexpr double hbar = planck / (2.0 * pi);       // J s
inline constexpr double speed_of_light = 299792458.0;     // m/s
inline constexpr double boltzmann = 1.380649e-23;         // J/K
inline constexpr double epsilon0 = 8.8541878128e-12;      // F/m
inline constexpr double atomic_mass = 1.66053906660e-27;  // kg
inline constexpr double elementary_charge = 1.602176634e-19;

// 1 cm^-1 expressed in joules (h c * 100 m^-1).
inline constexpr double wavenumber_to_joule = planck * speed_of_light * 100.0;
inline constexpr double wavenumber_to_hertz = speed_of_light * 100.0;
inline constexpr double angstrom = 1e-10;                  // m
// 1 D = 1e-21 / c  C m
inline constexpr double debye = 1e-21 / speed_of_light;    // C m

inline constexpr double cm_to_joule(double wavenumber) { return wavenumber * wavenumber_to_joule; }
inline constexpr double joule_to_cm(double energy) { return energy / wavenumber_to_joule; }
inline constexpr double amu_to_kg(double mass) { return mass * atomic_mass; }

}  // namespace bbrcool::units
