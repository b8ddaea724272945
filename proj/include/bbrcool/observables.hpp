#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "bbrcool/errors.hpp"
#include "bbrcool/molspec.hpp"

namespace bbrcool {

inline double ground_state_fraction(const PopulationState& state) {
    if (state.populations.size() == 0) throw DomainError("ground_state_fraction: empty state");
    return state.populations[0];
}

/// Rotational distribution of v = 0 plus the lumped v > 0 population.
struct DistributionSnapshot {
    double time = 0.0;
    std::vector<double> ground_vib_by_N;
    double excited_vib = 0.0;

    double total() const {
        double s = excited_vib;
        for (double x : ground_vib_by_N) s += x;
        return s;
    }
};

inline DistributionSnapshot snapshot(const PopulationState& state, const LevelBasis& basis) {
    if (state.populations.size() != static_cast<Eigen::Index>(basis.size())) {
        throw DomainError("snapshot: state size does not match the basis");
    }
    DistributionSnapshot s;
    s.time = state.time;
    s.ground_vib_by_N.assign(static_cast<std::size_t>(basis.Nmax() + 1), 0.0);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto& l = basis.level(i);
        const double p = state.populations[static_cast<Eigen::Index>(i)];
        if (l.v == 0) s.ground_vib_by_N[static_cast<std::size_t>(l.N)] += p;
        else s.excited_vib += p;
    }
    return s;
}

/// Kullback-Leibler divergence D(p || q); entries with p = 0 contribute 0.
inline double relative_entropy(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    double d = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) d += p[i] * std::log(p[i] / q[i]);
    }
    return d;
}

inline double mean_energy(const Eigen::VectorXd& p, const LevelBasis& basis) {
    double e = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) e += p[static_cast<Eigen::Index>(i)] * basis.energy(i);
    return e / p.sum();
}

enum class TemperatureMethod {
    ground_fraction,  // Boltzmann state with the same p(0,0)
    mean_energy,      // Boltzmann state with the same mean energy (best KL fit)
};

inline constexpr double temperature_tolerance = 1e-3;  // K
inline constexpr double temperature_ceiling = 1e7;     // K

namespace detail {

// Root of a function decreasing in T (observable(T) - target), bisected to
// temperature_tolerance.
inline double bisect_temperature(const std::function<double(double)>& excess, const char* what) {
    double lo = 0.0;
    double hi = 1.0;
    while (excess(hi) > 0.0) {
        hi *= 2.0;
        if (hi > temperature_ceiling) {
            throw DomainError(std::string("effective_temperature: ") + what +
                              " is above representable temperature for this basis");
        }
    }
    while (hi - lo > 0.25 * temperature_tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (excess(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

inline double effective_temperature(const PopulationState& state, const LevelBasis& basis,
                                    TemperatureMethod method = TemperatureMethod::ground_fraction) {
    if (state.populations.size() != static_cast<Eigen::Index>(basis.size())) {
        throw DomainError("effective_temperature: state size does not match the basis");
    }
    if (method == TemperatureMethod::ground_fraction) {
        const double target = ground_state_fraction(state);
        if (!(target > 0.0)) throw DomainError("effective_temperature: ground-state population is zero");
        if (target >= 1.0) return 0.0;
        const double floor = 1.0 / boltzmann_weights(basis, temperature_ceiling).sum();
        if (target <= floor) {
            throw DomainError("effective_temperature: ground fraction is above representable temperature for this basis");
        }
        return detail::bisect_temperature(
            [&](double T) { return ground_state_fraction(boltzmann_populations(basis, T)) - target; },
            "ground fraction");
    }
    const double target = mean_energy(state.populations, basis);
    if (target <= 0.0) return 0.0;
    return detail::bisect_temperature(
        [&](double T) { return target - mean_energy(boltzmann_populations(basis, T).populations, basis); },
        "mean energy");
}

}  // namespace bbrcool
