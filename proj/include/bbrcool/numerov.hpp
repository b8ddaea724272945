#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bbrcool/errors.hpp"
#include "bbrcool/interpolation.hpp"
#include "bbrcool/molspec.hpp"
#include "bbrcool/units.hpp"

namespace bbrcool {

/// Uniform radial grid in Angstrom.
struct RadialGrid {
    double r_min_A = 0.0;
    double r_max_A = 0.0;
    int n_points = 0;

    double step() const { return (r_max_A - r_min_A) / (n_points - 1); }
    double r(int i) const { return r_min_A + i * step(); }

    void validate() const {
        if (!(r_min_A < r_max_A)) throw DomainError("radial grid: r_min must be < r_max");
        if (n_points < 3) throw DomainError("radial grid: need at least 3 points");
    }

    bool operator==(const RadialGrid&) const = default;
};

struct VibrationalState {
    int v = 0;
    double energy_J = 0.0;          // above the potential minimum on the grid
    RadialGrid grid;
    std::vector<double> wavefunction;  // normalised in Angstrom^-1/2, positive innermost lobe
};

// ---------------------------------------------------------------------------
// Curve evaluation
// ---------------------------------------------------------------------------

inline double morse_value_cm(const MorseParams& m, double r_A) {
    const double e = 1.0 - std::exp(-m.a_per_A * (r_A - m.re_A));
    return m.De_cm * e * e;
}

/// Potential in cm^-1 sampled on the grid (cubic interpolation for tables).
inline std::vector<double> sample_potential_cm(const PotentialCurve& curve, const RadialGrid& grid) {
    std::vector<double> out(static_cast<std::size_t>(grid.n_points));
    if (const auto* m = std::get_if<MorseParams>(&curve)) {
        for (int i = 0; i < grid.n_points; ++i) out[i] = morse_value_cm(*m, grid.r(i));
    } else {
        const auto& t = std::get<CurveTable>(curve);
        // Extrapolating a potential is unreliable; the grid must stay inside the table.
        const double slack = 1e-9 * (t.r_A.back() - t.r_A.front());
        if (grid.r_min_A < t.r_A.front() - slack || grid.r_max_A > t.r_A.back() + slack) {
            throw ConfigError("potential table covers r = [" + std::to_string(t.r_A.front()) + ", " +
                              std::to_string(t.r_A.back()) + "] A but the grid spans [" + std::to_string(grid.r_min_A) +
                              ", " + std::to_string(grid.r_max_A) + "] A; extend the table or narrow the grid");
        }
        const CubicSpline spline(t.r_A, t.value);
        for (int i = 0; i < grid.n_points; ++i) out[i] = spline(std::clamp(grid.r(i), t.r_A.front(), t.r_A.back()));
    }
    return out;
}

/// Dipole function in Debye sampled on the grid.
inline std::vector<double> sample_dipole_D(const DipoleCurve& curve, const RadialGrid& grid) {
    std::vector<double> out(static_cast<std::size_t>(grid.n_points));
    if (const auto* p = std::get_if<DipolePolynomial>(&curve)) {
        for (int i = 0; i < grid.n_points; ++i) {
            const double x = grid.r(i) - p->center_A;
            double acc = 0.0;
            for (auto it = p->coeffs.rbegin(); it != p->coeffs.rend(); ++it) acc = acc * x + *it;
            out[i] = acc;
        }
    } else {
        const auto& t = std::get<CurveTable>(curve);
        const CubicSpline spline(t.r_A, t.value);
        for (int i = 0; i < grid.n_points; ++i) out[i] = spline(grid.r(i));
    }
    return out;
}

/// Composite Simpson rule on uniform samples; an even point count closes
/// with Simpson's 3/8 rule on the last three intervals.
inline double simpson(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * h * (f[0] + f[1]);
    std::size_t end = n;
    double tail = 0.0;
    if (n % 2 == 0) {
        if (n == 4) return 3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]);
        end = n - 3;
        tail = 3.0 * h / 8.0 * (f[n - 4] + 3.0 * f[n - 3] + 3.0 * f[n - 2] + f[n - 1]);
    }
    double s = f[0] + f[end - 1];
    for (std::size_t i = 1; i + 1 < end; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
    return s * h / 3.0 + tail;
}

// ---------------------------------------------------------------------------
// Numerov solver
// ---------------------------------------------------------------------------

namespace detail {

// 2 mu / hbar^2 expressed in 1 / (cm^-1 Angstrom^2).
inline double numerov_scale(double reduced_mass_amu) {
    const double mu = units::amu_to_kg(reduced_mass_amu);
    return 2.0 * mu * units::wavenumber_to_joule * units::angstrom * units::angstrom / (units::hbar * units::hbar);
}

// Outward Numerov sweep; returns the number of sign changes over the whole
// grid. The amplitude is rescaled whenever it grows large.
inline int count_nodes(std::span<const double> g, double h2) {
    const std::size_t n = g.size();
    double prev = 0.0;
    double cur = 1e-30;
    int nodes = 0;
    double last_sign = 1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double next =
            (2.0 * (1.0 + 5.0 * h2 * g[i] / 12.0) * cur - (1.0 - h2 * g[i - 1] / 12.0) * prev) / (1.0 - h2 * g[i + 1] / 12.0);
        prev = cur;
        cur = next;
        if (cur != 0.0) {
            const double s = cur > 0.0 ? 1.0 : -1.0;
            if (s != last_sign) ++nodes;
            last_sign = s;
        }
        if (std::abs(cur) > 1e200) {
            prev *= 1e-200;
            cur *= 1e-200;
        }
    }
    return nodes;
}

inline int sign_changes(std::span<const double> psi) {
    int nodes = 0;
    double last = 0.0;
    for (double x : psi) {
        if (x == 0.0) continue;
        if (last != 0.0 && (x > 0.0) != (last > 0.0)) ++nodes;
        last = x;
    }
    return nodes;
}

}  // namespace detail

/// Bound state v on a sampled potential (cm^-1). Energy located by
/// node-count bisection of the outward Numerov solution; the wavefunction is
/// assembled from outward and inward sweeps matched at the outer classical
/// turning point.
namespace detail {

// Minimum of a sampled curve, refined by a parabola through the lowest
// sample and its neighbours (the grid rarely lands on the true minimum).
inline double interpolated_minimum(std::span<const double> y) {
    const auto it = std::min_element(y.begin(), y.end());
    const std::size_t i = static_cast<std::size_t>(it - y.begin());
    if (i == 0 || i + 1 >= y.size()) return *it;
    const double curv = y[i - 1] - 2.0 * y[i] + y[i + 1];
    if (!(curv > 0.0)) return *it;
    const double slope = 0.5 * (y[i + 1] - y[i - 1]);
    return y[i] - 0.5 * slope * slope / curv;
}

}  // namespace detail

inline VibrationalState solve_radial_sampled(std::span<const double> potential_cm, double reduced_mass_amu,
                                             const RadialGrid& grid, int v) {
    grid.validate();
    if (v < 0) throw DomainError("solve_radial: v must be >= 0");
    if (!(reduced_mass_amu > 0.0)) throw DomainError("solve_radial: reduced mass must be > 0");
    const std::size_t n = static_cast<std::size_t>(grid.n_points);
    if (potential_cm.size() != n) throw DomainError("solve_radial: potential not sampled on the grid");

    const double h = grid.step();
    const double h2 = h * h;
    const double scale = detail::numerov_scale(reduced_mass_amu);
    const double v_min = *std::min_element(potential_cm.begin(), potential_cm.end());
    const double v_top = std::min(potential_cm.front(), potential_cm.back());

    std::vector<double> g(n);
    auto fill_g = [&](double e) {
        for (std::size_t i = 0; i < n; ++i) g[i] = scale * (potential_cm[i] - e);
    };

    fill_g(v_top);
    if (detail::count_nodes(g, h2) <= v) {
        throw DomainError("solve_radial: no bound state v=" + std::to_string(v) +
                          " below min(V(r_min), V(r_max)) on this grid (continuum, "
                          "or the grid is too narrow: extend r_min/r_max)");
    }

    // Node-count bisection: count(E) = number of grid eigenvalues below E.
    double lo = v_min;
    double hi = v_top;
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        fill_g(mid);
        if (detail::count_nodes(g, h2) > v) hi = mid;
        else lo = mid;
        if (hi - lo <= 1e-15 * std::max(std::abs(hi - v_min), 1e-300)) break;
    }
    const double energy = 0.5 * (lo + hi);
    fill_g(energy);

    // Matching point: outer classical turning point.
    std::size_t match = n / 2;
    for (std::size_t i = n - 1; i > 0; --i) {
        if (potential_cm[i] < energy) {
            match = i;
            break;
        }
    }
    match = std::clamp<std::size_t>(match, 2, n - 3);

    std::vector<double> psi(n, 0.0);
    auto step = [&](std::size_t from, std::size_t mid, std::size_t to, const std::vector<double>& y) {
        return (2.0 * (1.0 + 5.0 * h2 * g[mid] / 12.0) * y[mid] - (1.0 - h2 * g[from] / 12.0) * y[from]) /
               (1.0 - h2 * g[to] / 12.0);
    };

    psi[0] = 0.0;
    psi[1] = 1e-30;
    for (std::size_t i = 1; i < match; ++i) {
        psi[i + 1] = step(i - 1, i, i + 1, psi);
        if (std::abs(psi[i + 1]) > 1e200) {
            for (std::size_t k = 0; k <= i + 1; ++k) psi[k] *= 1e-200;
        }
    }
    std::vector<double> inward(n, 0.0);
    inward[n - 1] = 0.0;
    inward[n - 2] = 1e-30;
    for (std::size_t i = n - 2; i > match; --i) {
        inward[i - 1] = step(i + 1, i, i - 1, inward);
        if (std::abs(inward[i - 1]) > 1e200) {
            for (std::size_t k = i - 1; k < n; ++k) inward[k] *= 1e-200;
        }
    }
    if (inward[match] == 0.0) throw NumericalError("solve_radial: inward solution vanished at the matching point");
    const double ratio = psi[match] / inward[match];
    for (std::size_t i = match + 1; i < n; ++i) psi[i] = inward[i] * ratio;

    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = psi[i] * psi[i];
    const double norm = std::sqrt(simpson(sq, h));
    double sign = 1.0;
    for (double x : psi) {
        if (std::abs(x) > 1e-8 * norm) {
            sign = x > 0.0 ? 1.0 : -1.0;
            break;
        }
    }
    for (double& x : psi) x *= sign / norm;

    // Boundary check: the outermost 1% of points on either side must hold a
    // negligible amplitude, otherwise the wall is truncating the state.
    const double peak = std::abs(*std::max_element(psi.begin(), psi.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
    }));
    const std::size_t edge = std::max<std::size_t>(2, n / 100);
    double edge_amp = 0.0;
    for (std::size_t i = 0; i < edge; ++i) {
        edge_amp = std::max({edge_amp, std::abs(psi[i]), std::abs(psi[n - 1 - i])});
    }
    if (edge_amp > 1e-6 * peak) {
        throw NumericalError("solve_radial: v=" + std::to_string(v) + " wavefunction reaches the grid boundary (edge/peak = " +
                             std::to_string(edge_amp / peak) + "); extend r_min/r_max");
    }
    const int nodes = detail::sign_changes(psi);
    if (nodes != v) {
        throw NumericalError("solve_radial: v=" + std::to_string(v) + " converged to a state with " +
                             std::to_string(nodes) + " nodes");
    }

    return {v, units::cm_to_joule(energy - detail::interpolated_minimum(potential_cm)), grid, std::move(psi)};
}

inline VibrationalState solve_radial(const PotentialCurve& potential, double reduced_mass_amu, const RadialGrid& grid,
                                     int v) {
    grid.validate();
    const auto sampled = sample_potential_cm(potential, grid);
    return solve_radial_sampled(sampled, reduced_mass_amu, grid, v);
}

/// Default grid: spans the classically allowed region of the highest
/// requested level plus decay tails. The base half-width is five times the
/// v=0 harmonic turning-point distance, widened by sqrt(2 vmax + 1) and
/// doubled on the outer (anharmonic) side. With n_points <= 0 the spacing is
/// held at 1/400 of that distance (4001 points across re +- 5 widths).
inline RadialGrid default_radial_grid(const PotentialCurve& potential, double reduced_mass_amu, int vmax = 0,
                                      int n_points = 0) {
    double re = 0.0;
    double k = 0.0;  // curvature, cm^-1 / Angstrom^2
    if (const auto* m = std::get_if<MorseParams>(&potential)) {
        re = m->re_A;
        k = 2.0 * m->De_cm * m->a_per_A * m->a_per_A;
    } else {
        const auto& t = std::get<CurveTable>(potential);
        if (t.r_A.size() < 3) throw ConfigError("potential table needs at least 3 points");
        const auto it = std::min_element(t.value.begin(), t.value.end());
        std::size_t i = static_cast<std::size_t>(it - t.value.begin());
        i = std::clamp<std::size_t>(i, 1, t.r_A.size() - 2);
        const double x0 = t.r_A[i - 1], x1 = t.r_A[i], x2 = t.r_A[i + 1];
        const double y0 = t.value[i - 1], y1 = t.value[i], y2 = t.value[i + 1];
        const double d1 = (y1 - y0) / (x1 - x0), d2 = (y2 - y1) / (x2 - x1);
        k = 2.0 * (d2 - d1) / (x2 - x0);
        re = x1;
        if (!(k > 0.0)) throw ConfigError("potential table has no interior minimum");
        re = x1 - 0.5 * (d1 + d2) / k;
    }
    // Harmonic v=0 turning point: sqrt(hbar / (mu omega)) = (scale * k)^(-1/4).
    const double scale = detail::numerov_scale(reduced_mass_amu);
    const double width = std::pow(scale * k, -0.25);
    const double widen = std::sqrt(2.0 * std::max(vmax, 0) + 1.0);
    double r_min = re - 5.0 * widen * width;
    const double r_max = re + 10.0 * widen * width;
    double r_max_used = r_max;
    r_min = std::max(r_min, 0.25 * re);
    if (const auto* t = std::get_if<CurveTable>(&potential)) {
        r_min = std::max(r_min, t->r_A.front());
        r_max_used = std::min(r_max, t->r_A.back());
    }
    if (n_points <= 0) n_points = std::max(4001, 1 + static_cast<int>(std::ceil((r_max_used - r_min) / (width / 400.0))));
    return {r_min, r_max_used, n_points};
}

/// <a|mu|b> in C m for a dipole function sampled in Debye on the grid.
inline double dipole_matrix_element(const VibrationalState& a, const VibrationalState& b,
                                    std::span<const double> dipole_D) {
    if (!(a.grid == b.grid)) throw DomainError("dipole_matrix_element: states live on different grids");
    const std::size_t n = a.wavefunction.size();
    if (dipole_D.size() != n) throw DomainError("dipole_matrix_element: dipole not sampled on the state grid");
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = (a.wavefunction[i] * b.wavefunction[i]) * dipole_D[i];  // exact a <-> b symmetry
    return simpson(f, a.grid.step()) * units::debye;
}

inline double dipole_matrix_element(const VibrationalState& a, const VibrationalState& b, const DipoleCurve& dipole) {
    return dipole_matrix_element(a, b, sample_dipole_D(dipole, a.grid));
}

inline double dipole_matrix_element(const VibrationalState& a, const VibrationalState& b, double constant_dipole_D) {
    const std::vector<double> mu(a.wavefunction.size(), constant_dipole_D);
    return dipole_matrix_element(a, b, mu);
}

inline double overlap(const VibrationalState& a, const VibrationalState& b) {
    if (!(a.grid == b.grid)) throw DomainError("overlap: states live on different grids");
    std::vector<double> f(a.wavefunction.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = a.wavefunction[i] * b.wavefunction[i];
    return simpson(f, a.grid.step());
}

/// All states v = 0..vmax on one grid.
inline std::vector<VibrationalState> solve_vibrational_ladder(const PotentialCurve& potential, double reduced_mass_amu,
                                                              const RadialGrid& grid, int vmax) {
    const auto sampled = sample_potential_cm(potential, grid);
    std::vector<VibrationalState> states;
    states.reserve(static_cast<std::size_t>(vmax + 1));
    for (int v = 0; v <= vmax; ++v) states.push_back(solve_radial_sampled(sampled, reduced_mass_amu, grid, v));
    return states;
}

}  // namespace bbrcool
