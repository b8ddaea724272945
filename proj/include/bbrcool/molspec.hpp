#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "bbrcool/errors.hpp"
#include "bbrcool/units.hpp"

namespace bbrcool {

// ---------------------------------------------------------------------------
// Molecular data model. Fields carry the spectroscopic units used in data
// files (cm^-1, amu, Angstrom, Debye); operations convert to SI.
// ---------------------------------------------------------------------------

struct MorseParams {
    double De_cm = 0.0;    // well depth
    double a_per_A = 0.0;  // range parameter
    double re_A = 0.0;     // equilibrium distance
};

/// Two-column table sampled in r (Angstrom). The value unit depends on use:
/// cm^-1 for potentials, Debye for dipole functions.
struct CurveTable {
    std::vector<double> r_A;
    std::vector<double> value;
};

/// mu(r) = sum_k coeffs[k] * (r - center)^k with r in Angstrom and mu in Debye.
struct DipolePolynomial {
    double center_A = 0.0;
    std::vector<double> coeffs;
};

using PotentialCurve = std::variant<MorseParams, CurveTable>;
using DipoleCurve = std::variant<DipolePolynomial, CurveTable>;

/// Externally supplied <v_a|mu|v_b> in Debye.
struct VibDipoleEntry {
    int v_a = 0;
    int v_b = 0;
    double value_D = 0.0;
};

struct MoleculeSpec {
    std::string name;
    double reduced_mass_amu = 0.0;
    double we_cm = 0.0;
    double wexe_cm = 0.0;
    double Be_cm = 0.0;
    double alpha_e_cm = 0.0;
    double centrifugal_D_cm = 0.0;  // optional D_e [N(N+1)]^2 term, 0 disables it

    std::optional<double> permanent_dipole_D;
    std::optional<DipoleCurve> dipole_curve;
    std::optional<PotentialCurve> potential_curve;
    std::vector<VibDipoleEntry> vib_transition_dipoles;

    /// Number of bound vibrational levels implied by the anharmonic term,
    /// i.e. the levels with v + 1/2 < we / (2 wexe). Unlimited when wexe = 0.
    int vibrational_level_cap() const {
        if (wexe_cm <= 0.0) return std::numeric_limits<int>::max();
        const double turn = we_cm / (2.0 * wexe_cm) - 0.5;
        return static_cast<int>(std::ceil(turn));
    }

    void validate() const {
        if (!(reduced_mass_amu > 0.0)) throw ConfigError("molecule '" + name + "': reduced_mass must be > 0");
        if (!(we_cm > 0.0)) throw ConfigError("molecule '" + name + "': we must be > 0");
        if (!(Be_cm > 0.0)) throw ConfigError("molecule '" + name + "': Be must be > 0");
        if (!(wexe_cm >= 0.0)) throw ConfigError("molecule '" + name + "': wexe must be >= 0");
        if (!(centrifugal_D_cm >= 0.0)) throw ConfigError("molecule '" + name + "': centrifugal D must be >= 0");
        if (potential_curve) {
            if (const auto* m = std::get_if<MorseParams>(&*potential_curve)) {
                if (!(m->De_cm > 0.0)) throw ConfigError("molecule '" + name + "': Morse De must be > 0");
                if (!(m->a_per_A > 0.0)) throw ConfigError("molecule '" + name + "': Morse a must be > 0");
                if (!(m->re_A > 0.0)) throw ConfigError("molecule '" + name + "': Morse re must be > 0");
            }
        }
        for (const auto& e : vib_transition_dipoles) {
            if (e.v_a < 0 || e.v_b < 0) throw ConfigError("molecule '" + name + "': negative v in vib_dipoles");
        }
    }
};

/// Morse curve reproducing the second-order vibrational term values
/// we (v+1/2) - wexe (v+1/2)^2, with re from Be.
inline MorseParams morse_from_constants(const MoleculeSpec& spec) {
    if (!(spec.wexe_cm > 0.0)) throw DomainError("morse_from_constants: wexe must be > 0");
    const double mu = units::amu_to_kg(spec.reduced_mass_amu);
    const double De_cm = spec.we_cm * spec.we_cm / (4.0 * spec.wexe_cm);
    const double omega = 2.0 * units::pi * units::wavenumber_to_hertz * spec.we_cm;
    const double a_per_m = omega * std::sqrt(mu / (2.0 * units::cm_to_joule(De_cm)));
    const double re_m = units::hbar / std::sqrt(2.0 * mu * units::cm_to_joule(spec.Be_cm));
    return {De_cm, a_per_m * units::angstrom, re_m / units::angstrom};
}

// ---------------------------------------------------------------------------
// Levels and basis
// ---------------------------------------------------------------------------

struct RovibLevel {
    int v = 0;
    int N = 0;

    int degeneracy() const { return 2 * N + 1; }
    auto operator<=>(const RovibLevel&) const = default;
};

inline std::string to_string(const RovibLevel& level) {
    return "v" + std::to_string(level.v) + "N" + std::to_string(level.N);
}

inline double term_value_cm(const MoleculeSpec& spec, int v, int N) {
    const double vh = v + 0.5;
    const double rot = static_cast<double>(N) * (N + 1);
    const double Bv = spec.Be_cm - spec.alpha_e_cm * vh;
    return spec.we_cm * vh - spec.wexe_cm * vh * vh + Bv * rot - spec.centrifugal_D_cm * rot * rot;
}

/// Dunham energy of (v, N) in joules, measured from (0, 0).
inline double level_energy(const MoleculeSpec& spec, int v, int N) {
    if (v < 0 || N < 0) throw DomainError("level_energy: quantum numbers must be >= 0");
    if (v >= spec.vibrational_level_cap()) {
        throw DomainError("level_energy: v=" + std::to_string(v) + " is at or above the anharmonic level cap (" +
                          std::to_string(spec.vibrational_level_cap()) + " bound levels)");
    }
    if (v == 0 && N == 0) return 0.0;
    return units::cm_to_joule(term_value_cm(spec, v, N) - term_value_cm(spec, 0, 0));
}

/// Ordered (v, N) basis, lexicographic in (v, N), with energies relative to
/// E(0,0) = 0.
class LevelBasis {
public:
    LevelBasis() = default;

    LevelBasis(std::vector<RovibLevel> levels, std::vector<double> energies, int vmax, int Nmax)
        : levels_(std::move(levels)), energies_(std::move(energies)), vmax_(vmax), Nmax_(Nmax) {}

    std::size_t size() const { return levels_.size(); }
    bool empty() const { return levels_.empty(); }
    const std::vector<RovibLevel>& levels() const { return levels_; }
    const std::vector<double>& energies() const { return energies_; }
    const RovibLevel& level(std::size_t i) const { return levels_[i]; }
    double energy(std::size_t i) const { return energies_[i]; }
    int vmax() const { return vmax_; }
    int Nmax() const { return Nmax_; }

    std::optional<std::size_t> index_of(const RovibLevel& level) const {
        if (level.v < 0 || level.N < 0 || level.v > vmax_ || level.N > Nmax_) return std::nullopt;
        const std::size_t i = static_cast<std::size_t>(level.v) * (Nmax_ + 1) + level.N;
        return i < levels_.size() ? std::optional<std::size_t>(i) : std::nullopt;
    }

    std::size_t require_index(const RovibLevel& level) const {
        if (auto i = index_of(level)) return *i;
        throw ConfigError("level " + to_string(level) + " is outside the basis (vmax=" + std::to_string(vmax_) +
                          ", Nmax=" + std::to_string(Nmax_) + ")");
    }

    double energy(const RovibLevel& level) const { return energies_[require_index(level)]; }

private:
    std::vector<RovibLevel> levels_;
    std::vector<double> energies_;
    int vmax_ = -1;
    int Nmax_ = -1;
};

inline constexpr int default_vmax = 3;
inline constexpr int default_Nmax = 40;

inline LevelBasis build_level_basis(const MoleculeSpec& spec, int vmax = default_vmax, int Nmax = default_Nmax) {
    if (vmax < 0 || Nmax < 0) throw DomainError("build_level_basis: vmax and Nmax must be >= 0");
    if (vmax >= spec.vibrational_level_cap()) {
        throw DomainError("build_level_basis: vmax=" + std::to_string(vmax) +
                          " is at or above the anharmonic level cap for " + spec.name);
    }
    std::vector<RovibLevel> levels;
    std::vector<double> energies;
    levels.reserve(static_cast<std::size_t>(vmax + 1) * (Nmax + 1));
    energies.reserve(levels.capacity());
    for (int v = 0; v <= vmax; ++v) {
        for (int N = 0; N <= Nmax; ++N) {
            const double e = level_energy(spec, v, N);
            if (N > 0 && !(e > energies.back())) {
                throw DomainError("build_level_basis: energies stop increasing with N at v=" + std::to_string(v) +
                                  ", N=" + std::to_string(N) + " (rotational constant too small for this Nmax)");
            }
            levels.push_back({v, N});
            energies.push_back(e);
        }
        if (v > 0 && !(energies[static_cast<std::size_t>(v) * (Nmax + 1)] >
                       energies[static_cast<std::size_t>(v - 1) * (Nmax + 1)])) {
            throw DomainError("build_level_basis: vibrational energies not increasing at v=" + std::to_string(v));
        }
    }
    return LevelBasis(std::move(levels), std::move(energies), vmax, Nmax);
}

// ---------------------------------------------------------------------------
// Populations
// ---------------------------------------------------------------------------

struct PopulationState {
    Eigen::VectorXd populations;
    double time = 0.0;
};

inline constexpr double population_sum_tolerance = 1e-9;
inline constexpr double population_negativity_tolerance = 1e-12;

/// Throws NumericalError when the state is not a probability vector.
inline void check_population(const PopulationState& state) {
    if (state.populations.size() == 0) throw NumericalError("population state is empty");
    for (Eigen::Index i = 0; i < state.populations.size(); ++i) {
        const double p = state.populations[i];
        if (!std::isfinite(p) || p < -population_negativity_tolerance) {
            throw NumericalError("population entry " + std::to_string(i) + " is invalid (" + std::to_string(p) + ")");
        }
    }
    const double total = state.populations.sum();
    if (std::abs(total - 1.0) > population_sum_tolerance) {
        throw NumericalError("populations sum to " + std::to_string(total) + ", not 1");
    }
}

/// Unnormalised Boltzmann weights g exp(-E/kT); at T = 0 only the lowest
/// level carries weight.
inline Eigen::VectorXd boltzmann_weights(const LevelBasis& basis, double T) {
    if (!(T >= 0.0)) throw DomainError("boltzmann: temperature must be >= 0");
    if (basis.empty()) throw DomainError("boltzmann: empty basis");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
    if (T == 0.0) {
        w[0] = 1.0;
        return w;
    }
    const double beta = 1.0 / (units::boltzmann * T);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        w[static_cast<Eigen::Index>(i)] = basis.level(i).degeneracy() * std::exp(-beta * basis.energy(i));
    }
    return w;
}

inline PopulationState boltzmann_populations(const LevelBasis& basis, double T) {
    Eigen::VectorXd w = boltzmann_weights(basis, T);
    w /= w.sum();
    return {std::move(w), 0.0};
}

}  // namespace bbrcool
