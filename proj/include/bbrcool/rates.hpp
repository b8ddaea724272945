#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bbrcool/errors.hpp"
#include "bbrcool/molspec.hpp"
#include "bbrcool/numerov.hpp"
#include "bbrcool/units.hpp"

namespace bbrcool {

struct Transition {
    RovibLevel upper;
    RovibLevel lower;
    double frequency_Hz = 0.0;
    double A = 0.0;  // s^-1
};

struct TransitionTable {
    std::vector<Transition> transitions;
    int dv_max = 2;
};

/// Emission branching of a 1Sigma-1Sigma band out of rotational level N:
/// P branch (to N-1) and R branch (to N+1).
struct HonlLondonBranching {
    double to_lower_N = 0.0;  // N -> N-1
    double to_upper_N = 0.0;  // N -> N+1
};

inline HonlLondonBranching honl_london_branching(int N_upper) {
    if (N_upper < 0) throw DomainError("honl_london_branching: N must be >= 0");
    if (N_upper == 0) return {0.0, 1.0};
    const double denom = 2.0 * N_upper + 1.0;
    const double down = N_upper / denom;
    return {down, 1.0 - down};
}

/// Hönl-London strength divided by (2 N_u + 1) for the line N_u -> N_l.
inline double honl_london_fraction(int N_upper, int N_lower) {
    const auto b = honl_london_branching(N_upper);
    if (N_lower == N_upper - 1) return b.to_lower_N;
    if (N_lower == N_upper + 1) return b.to_upper_N;
    throw DomainError("Hönl-London factor requested for forbidden Delta N = " + std::to_string(N_lower - N_upper));
}

/// Spontaneous emission rate (s^-1):
/// A = 16 pi^3 nu^3 / (3 eps0 h c^3) |mu|^2 S / (2 N_u + 1).
inline double einstein_A(const RovibLevel& upper, const RovibLevel& lower, double vib_dipole_Cm, double frequency_Hz) {
    if (std::abs(upper.N - lower.N) != 1) {
        throw DomainError("einstein_A: dipole transition " + to_string(upper) + " -> " + to_string(lower) +
                          " violates Delta N = +-1");
    }
    if (!(frequency_Hz > 0.0)) throw DomainError("einstein_A: frequency must be > 0");
    constexpr double c3 = units::speed_of_light * units::speed_of_light * units::speed_of_light;
    const double pref = 16.0 * units::pi * units::pi * units::pi / (3.0 * units::epsilon0 * units::planck * c3);
    const double nu3 = frequency_Hz * frequency_Hz * frequency_Hz;
    return pref * nu3 * vib_dipole_Cm * vib_dipole_Cm * honl_london_fraction(upper.N, lower.N);
}

/// Planck spectral energy density per unit frequency, J s m^-3.
inline double planck_density(double frequency_Hz, double T) {
    if (!(frequency_Hz > 0.0)) throw DomainError("planck_density: frequency must be > 0");
    if (!(T >= 0.0)) throw DomainError("planck_density: temperature must be >= 0");
    if (T == 0.0) return 0.0;
    const double x = units::planck * frequency_Hz / (units::boltzmann * T);
    if (x > 700.0) return 0.0;
    constexpr double c3 = units::speed_of_light * units::speed_of_light * units::speed_of_light;
    return 8.0 * units::pi * units::planck * frequency_Hz * frequency_Hz * frequency_Hz / c3 / std::expm1(x);
}

struct StimulatedRates {
    double down = 0.0;  // B_ul rho, s^-1
    double up = 0.0;    // B_lu rho, s^-1
};

/// Einstein B relations: B_ul = A c^3 / (8 pi h nu^3), B_lu = (g_u/g_l) B_ul.
inline StimulatedRates stimulated_rates(const Transition& t, double T) {
    if (!(t.A >= 0.0)) throw DomainError("stimulated_rates: A must be >= 0");
    constexpr double c3 = units::speed_of_light * units::speed_of_light * units::speed_of_light;
    const double nu = t.frequency_Hz;
    const double B_ul = t.A * c3 / (8.0 * units::pi * units::planck * nu * nu * nu);
    const double rho = planck_density(nu, T);
    const double g_ratio = static_cast<double>(t.upper.degeneracy()) / t.lower.degeneracy();
    return {B_ul * rho, g_ratio * B_ul * rho};
}

// ---------------------------------------------------------------------------
// Vibrational transition dipoles
// ---------------------------------------------------------------------------

/// Symmetric table of <v_a|mu|v_b> in C m, with gaps where no data exist.
class VibDipoleMatrix {
public:
    VibDipoleMatrix() = default;
    explicit VibDipoleMatrix(int vmax) : vmax_(vmax), values_(static_cast<std::size_t>((vmax + 1) * (vmax + 1))) {}

    int vmax() const { return vmax_; }

    void set(int a, int b, double value_Cm) {
        values_.at(index(a, b)) = value_Cm;
        values_.at(index(b, a)) = value_Cm;
    }

    std::optional<double> get(int a, int b) const {
        if (a < 0 || b < 0 || a > vmax_ || b > vmax_) return std::nullopt;
        return values_[index(a, b)];
    }

private:
    std::size_t index(int a, int b) const { return static_cast<std::size_t>(a * (vmax_ + 1) + b); }
    int vmax_ = -1;
    std::vector<std::optional<double>> values_;
};

/// Numerov states and their dipole matrix, kept together for export.
struct VibrationalSolution {
    std::vector<VibrationalState> states;
    VibDipoleMatrix dipoles;
};

/// Dipoles from potential + dipole curves via Numerov wavefunctions. Diagonal
/// entries are <v|mu(r)|v>, used for pure-rotational lines.
inline VibrationalSolution vib_dipoles_from_curves(const MoleculeSpec& spec, int vmax,
                                                   std::optional<RadialGrid> grid = std::nullopt) {
    if (!spec.potential_curve) {
        throw ConfigError("molecule '" + spec.name +
                          "' has no potential curve for the Numerov solve; supply [curves] or use constants-only "
                          "mode with vib_dipoles and permanent_dipole_D");
    }
    if (!spec.dipole_curve && !spec.permanent_dipole_D) {
        throw ConfigError("molecule '" + spec.name + "' has no dipole function or permanent dipole");
    }
    const RadialGrid g = grid ? *grid : default_radial_grid(*spec.potential_curve, spec.reduced_mass_amu, vmax);
    VibrationalSolution out;
    out.states = solve_vibrational_ladder(*spec.potential_curve, spec.reduced_mass_amu, g, vmax);
    out.dipoles = VibDipoleMatrix(vmax);
    const std::vector<double> mu = spec.dipole_curve ? sample_dipole_D(*spec.dipole_curve, g)
                                                     : std::vector<double>(static_cast<std::size_t>(g.n_points),
                                                                           *spec.permanent_dipole_D);
    for (int a = 0; a <= vmax; ++a)
        for (int b = a; b <= vmax; ++b)
            out.dipoles.set(a, b, dipole_matrix_element(out.states[a], out.states[b], mu));
    return out;
}

/// Dipoles from the externally supplied table; diagonal from the permanent
/// dipole unless the table lists it.
inline VibDipoleMatrix vib_dipoles_from_table(const MoleculeSpec& spec, int vmax) {
    VibDipoleMatrix m(vmax);
    if (spec.permanent_dipole_D) {
        for (int v = 0; v <= vmax; ++v) m.set(v, v, *spec.permanent_dipole_D * units::debye);
    }
    for (const auto& e : spec.vib_transition_dipoles) {
        if (e.v_a <= vmax && e.v_b <= vmax) m.set(e.v_a, e.v_b, e.value_D * units::debye);
    }
    return m;
}

/// Every |Delta N| = 1 pair with |Delta v| <= dv_max, upper/lower assigned
/// by basis energy. Frequencies are basis energy differences.
inline TransitionTable build_transition_table(const LevelBasis& basis, const VibDipoleMatrix& dipoles, int dv_max = 2) {
    if (dv_max < 0) throw DomainError("build_transition_table: dv_max must be >= 0");
    TransitionTable table;
    table.dv_max = dv_max;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const RovibLevel a = basis.level(i);
        for (std::size_t j = i + 1; j < basis.size(); ++j) {
            const RovibLevel b = basis.level(j);
            if (std::abs(a.N - b.N) != 1 || std::abs(a.v - b.v) > dv_max) continue;
            const bool a_upper = basis.energy(i) > basis.energy(j);
            const RovibLevel up = a_upper ? a : b;
            const RovibLevel lo = a_upper ? b : a;
            const auto mu = dipoles.get(up.v, lo.v);
            if (!mu) {
                const int dv = std::abs(up.v - lo.v);
                throw ConfigError(std::string("missing dipole data for ") +
                                  (dv == 0 ? "pure-rotational (Delta v = 0)" : "rovibrational (Delta v = " + std::to_string(dv) + ")") +
                                  " transitions: <v=" + std::to_string(lo.v) + "|mu|v=" + std::to_string(up.v) + ">");
            }
            const double nu = std::abs(basis.energy(i) - basis.energy(j)) / units::planck;
            table.transitions.push_back({up, lo, nu, einstein_A(up, lo, *mu, nu)});
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// Rate generator
// ---------------------------------------------------------------------------

/// dp/dt = matrix * p. Column j holds the rates out of level j; columns sum
/// to zero.
struct RateGenerator {
    std::vector<RovibLevel> levels;
    std::vector<double> energies;
    Eigen::MatrixXd matrix;
    double environment_T = 0.0;

    std::size_t size() const { return levels.size(); }
    std::size_t index_of(const RovibLevel& level) const {
        for (std::size_t i = 0; i < levels.size(); ++i)
            if (levels[i] == level) return i;
        throw ConfigError("level " + to_string(level) + " is outside the basis");
    }
    double max_rate() const { return matrix.cwiseAbs().maxCoeff(); }
};

inline void add_rate(Eigen::MatrixXd& m, std::size_t from, std::size_t to, double rate) {
    const auto f = static_cast<Eigen::Index>(from);
    const auto t = static_cast<Eigen::Index>(to);
    m(t, f) += rate;
    m(f, f) -= rate;
}

inline RateGenerator assemble_rate_generator(const LevelBasis& basis, const TransitionTable& table, double T) {
    if (!(T >= 0.0)) throw DomainError("assemble_rate_generator: temperature must be >= 0");
    RateGenerator gen;
    gen.levels = basis.levels();
    gen.energies = basis.energies();
    gen.environment_T = T;
    const auto n = static_cast<Eigen::Index>(basis.size());
    gen.matrix = Eigen::MatrixXd::Zero(n, n);
    for (const auto& t : table.transitions) {
        const std::size_t u = basis.require_index(t.upper);
        const std::size_t l = basis.require_index(t.lower);
        Transition line = t;
        line.frequency_Hz = (basis.energy(u) - basis.energy(l)) / units::planck;
        if (!(line.frequency_Hz > 0.0)) {
            throw ConfigError("transition " + to_string(t.upper) + " -> " + to_string(t.lower) +
                              " is not downward in basis energy");
        }
        const auto stim = stimulated_rates(line, T);
        add_rate(gen.matrix, u, l, line.A + stim.down);
        add_rate(gen.matrix, l, u, stim.up);
    }
    return gen;
}

}  // namespace bbrcool
