#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "bbrcool/errors.hpp"
#include "bbrcool/molspec.hpp"
#include "bbrcool/rates.hpp"

namespace bbrcool {

// ---------------------------------------------------------------------------
// Pump programs
// ---------------------------------------------------------------------------

/// One Raman pulse channel. `phase` offsets the channel's firing times by a
/// fraction of the repetition period; 0 for all channels fires them together.
struct RamanChannel {
    RovibLevel source;
    RovibLevel target;
    double phase = 0.0;
};

struct RamanProgram {
    std::vector<RamanChannel> pulse_channels;
    double rep_rate = 100.0;           // Hz
    double transfer_efficiency = 1.0;  // fraction moved per pulse
    bool polarization_complete = true;

    void validate() const {
        if (!(rep_rate > 0.0)) throw ConfigError("raman: rep_rate must be > 0");
        if (!(transfer_efficiency >= 0.0 && transfer_efficiency <= 1.0)) {
            throw ConfigError("raman: transfer_efficiency must lie in [0, 1]");
        }
        for (const auto& c : pulse_channels) {
            const int dN = c.target.N - c.source.N;
            if (dN != 0 && dN != 2 && dN != -2) {
                throw ConfigError("raman channel " + to_string(c.source) + " -> " + to_string(c.target) +
                                  " violates the Raman selection rule Delta N in {0, +-2}");
            }
            if (c.source == c.target) throw ConfigError("raman channel " + to_string(c.source) + " targets itself");
            if (!(c.phase >= 0.0 && c.phase < 1.0)) throw ConfigError("raman channel phase must lie in [0, 1)");
        }
    }
};

/// The default pair: (0,1) -> (1,1) and (0,2) -> (1,0), whose Delta N = +-1
/// decays land only in (0,0), (0,1), (0,2).
inline RamanProgram default_raman_program(double rep_rate = 100.0, double efficiency = 1.0) {
    return {{{{0, 1}, {1, 1}, 0.0}, {{0, 2}, {1, 0}, 0.0}}, rep_rate, efficiency, true};
}

struct DrivenPair {
    RovibLevel lower;
    RovibLevel upper;
    double effective_rate = 0.0;  // stimulated down-rate, s^-1
};

struct DirectCWProgram {
    std::vector<DrivenPair> driven;

    void validate() const {
        for (const auto& d : driven) {
            if (!(d.effective_rate >= 0.0)) {
                throw ConfigError("direct pump " + to_string(d.lower) + " -> " + to_string(d.upper) +
                                  ": effective_rate must be >= 0");
            }
        }
    }
};

inline constexpr double default_rate_fraction_of_A = 0.9;

/// Looks up the spontaneous rate of the line upper -> lower in the table.
inline double line_A(const TransitionTable& table, const RovibLevel& upper, const RovibLevel& lower) {
    for (const auto& t : table.transitions)
        if (t.upper == upper && t.lower == lower) return t.A;
    throw ConfigError("no dipole transition " + to_string(upper) + " -> " + to_string(lower) +
                      " in the transition table (check dv_max)");
}

/// CW program with each pair driven at `fraction` of its line's A coefficient.
inline DirectCWProgram make_direct_program(const TransitionTable& table,
                                           const std::vector<std::pair<RovibLevel, RovibLevel>>& pairs,
                                           double fraction = default_rate_fraction_of_A) {
    DirectCWProgram p;
    for (const auto& [lower, upper] : pairs) p.driven.push_back({lower, upper, fraction * line_A(table, upper, lower)});
    return p;
}

using PumpProgram = std::variant<std::monostate, RamanProgram, DirectCWProgram>;

/// Generator with the CW pump overlaid: bidirectional stimulated rates with
/// up/down = g_upper / g_lower and down-rate = effective_rate.
inline Eigen::MatrixXd pumped_matrix(const RateGenerator& gen, const DirectCWProgram& program) {
    program.validate();
    Eigen::MatrixXd m = gen.matrix;
    for (const auto& d : program.driven) {
        const std::size_t l = gen.index_of(d.lower);
        const std::size_t u = gen.index_of(d.upper);
        const double g_ratio = static_cast<double>(d.upper.degeneracy()) / d.lower.degeneracy();
        add_rate(m, u, l, d.effective_rate);
        add_rate(m, l, u, d.effective_rate * g_ratio);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Propagation
// ---------------------------------------------------------------------------

/// exp(matrix * dt) with a cache keyed on dt. Steps within 1e-12 relative of
/// a cached step reuse it, so repeated pulse periods cost one exponential.
class Propagator {
public:
    explicit Propagator(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {}

    const Eigen::MatrixXd& step_matrix(double dt) {
        if (!(dt >= 0.0)) throw DomainError("propagate: dt must be >= 0 (got " + std::to_string(dt) + ")");
        auto it = cache_.lower_bound(dt * (1.0 - 1e-12));
        if (it != cache_.end() && it->first <= dt * (1.0 + 1e-12)) return it->second;
        Eigen::MatrixXd p = (matrix_ * dt).exp();
        if (!p.allFinite()) throw NumericalError("matrix exponential produced non-finite entries");
        return cache_.emplace(dt, std::move(p)).first->second;
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& p, double dt) {
        if (dt == 0.0) return p;
        return step_matrix(dt) * p;
    }

private:
    Eigen::MatrixXd matrix_;
    std::map<double, Eigen::MatrixXd> cache_;
};

inline PopulationState propagate_interval(const RateGenerator& gen, const PopulationState& state, double dt) {
    if (!(dt >= 0.0)) throw DomainError("propagate_interval: dt must be >= 0 (got " + std::to_string(dt) + ")");
    if (state.populations.size() != static_cast<Eigen::Index>(gen.size())) {
        throw DomainError("propagate_interval: state size does not match the generator");
    }
    if (dt == 0.0) return state;
    Propagator prop(gen.matrix);
    return {prop.apply(state.populations, dt), state.time + dt};
}

/// Instantaneous incoherent transfer of `efficiency` of the source
/// population into the target.
inline void apply_pulse_inplace(Eigen::VectorXd& p, std::size_t source, std::size_t target, double efficiency) {
    const auto s = static_cast<Eigen::Index>(source);
    const auto t = static_cast<Eigen::Index>(target);
    const double moved = efficiency * p[s];
    p[s] -= moved;
    p[t] += moved;
}

inline PopulationState apply_pulse(const RateGenerator& gen, const PopulationState& state, const RamanChannel& channel,
                                   double efficiency) {
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw DomainError("apply_pulse: efficiency must lie in [0, 1]");
    PopulationState out = state;
    apply_pulse_inplace(out.populations, gen.index_of(channel.source), gen.index_of(channel.target), efficiency);
    return out;
}

struct Trajectory {
    std::vector<double> times;
    std::vector<PopulationState> states;
};

namespace detail {

inline std::vector<double> emission_times(double t_final, const std::vector<double>& output_grid) {
    if (!(t_final >= 0.0)) throw DomainError("run_simulation: t_final must be >= 0");
    std::vector<double> times = output_grid;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0 && times[i] <= t_final)) {
            throw DomainError("run_simulation: output time " + std::to_string(times[i]) + " outside [0, t_final]");
        }
        if (i > 0 && !(times[i] > times[i - 1])) throw DomainError("run_simulation: output times must increase strictly");
    }
    if (times.empty() || times.back() < t_final) times.push_back(t_final);
    return times;
}

struct ChannelIndex {
    std::size_t source;
    std::size_t target;
    double phase;
    long long next_cycle;
};

}  // namespace detail

/// Population trajectory under the BBR generator and an optional pump.
///
/// Raman pulses fire at (k + phase) / rep_rate for k = 0, 1, ... while the
/// time is below t_final. A state emitted at time t includes every pulse
/// fired strictly before t. Channels firing together are applied in
/// descending source-level order. The final time is always emitted.
inline Trajectory run_simulation(const RateGenerator& gen, const PumpProgram& program, const PopulationState& initial,
                                 double t_final, const std::vector<double>& output_grid = {}) {
    if (initial.populations.size() != static_cast<Eigen::Index>(gen.size())) {
        throw DomainError("run_simulation: initial state size does not match the generator");
    }
    const std::vector<double> times = detail::emission_times(t_final, output_grid);
    Trajectory traj;
    traj.times.reserve(times.size());
    traj.states.reserve(times.size());

    Eigen::VectorXd p = initial.populations;
    double t = 0.0;

    auto emit = [&](double at) {
        traj.times.push_back(at);
        traj.states.push_back({p, at});
    };

    if (const auto* raman = std::get_if<RamanProgram>(&program)) {
        raman->validate();
        Propagator prop(gen.matrix);
        std::vector<detail::ChannelIndex> channels;
        for (const auto& c : raman->pulse_channels) {
            channels.push_back({gen.index_of(c.source), gen.index_of(c.target), c.phase, 0});
        }
        std::stable_sort(channels.begin(), channels.end(),
                         [](const auto& a, const auto& b) { return a.source > b.source; });
        const double period = 1.0 / raman->rep_rate;
        auto fire_time = [&](const detail::ChannelIndex& c) { return (static_cast<double>(c.next_cycle) + c.phase) * period; };

        for (double t_out : times) {
            while (!channels.empty()) {
                double t_next = std::numeric_limits<double>::infinity();
                for (const auto& c : channels) t_next = std::min(t_next, fire_time(c));
                if (!(t_next < t_out)) break;
                p = prop.apply(p, t_next - t);
                t = t_next;
                for (auto& c : channels) {
                    if (fire_time(c) == t_next) {
                        apply_pulse_inplace(p, c.source, c.target, raman->transfer_efficiency);
                        ++c.next_cycle;
                    }
                }
            }
            p = prop.apply(p, t_out - t);
            t = t_out;
            emit(t_out);
        }
        return traj;
    }

    Eigen::MatrixXd m = gen.matrix;
    if (const auto* direct = std::get_if<DirectCWProgram>(&program)) m = pumped_matrix(gen, *direct);
    Propagator prop(std::move(m));
    for (double t_out : times) {
        p = prop.apply(p, t_out - t);
        t = t_out;
        emit(t_out);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Steady state
// ---------------------------------------------------------------------------

/// Connected components of the undirected coupling graph of a rate matrix.
inline std::vector<std::vector<std::size_t>> coupling_components(const Eigen::MatrixXd& m) {
    const std::size_t n = static_cast<std::size_t>(m.rows());
    std::vector<int> comp(n, -1);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        const int id = static_cast<int>(out.size());
        out.emplace_back();
        std::vector<std::size_t> stack{s};
        comp[s] = id;
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            out.back().push_back(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (comp[j] >= 0 || j == i) continue;
                const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                if (m(ii, jj) != 0.0 || m(jj, ii) != 0.0) {
                    comp[j] = id;
                    stack.push_back(j);
                }
            }
        }
        std::sort(out.back().begin(), out.back().end());
    }
    return out;
}

inline constexpr double steady_state_residual_tolerance = 1e-12;

/// Normalised right null vector of the (pump-augmented) generator.
inline PopulationState steady_state_of(const std::vector<RovibLevel>& levels, const Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    const auto comps = coupling_components(m);
    if (comps.size() > 1) {
        std::string msg = "steady_state: generator is reducible; disconnected components:";
        for (const auto& c : comps) {
            msg += " {";
            for (std::size_t k = 0; k < c.size(); ++k) msg += (k ? "," : "") + to_string(levels[c[k]]);
            msg += "}";
        }
        throw NumericalError(msg);
    }
    // Columns sum to zero, so one balance equation is redundant; replace it
    // with the normalisation constraint.
    Eigen::MatrixXd a = m;
    a.row(0).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs[0] = 1.0;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    Eigen::VectorXd p = lu.solve(rhs);
    p += lu.solve(rhs - a * p);  // one refinement step

    for (Eigen::Index i = 0; i < n; ++i) {
        if (p[i] < 0.0) {
            if (p[i] < -1e-12) throw NumericalError("steady_state: significantly negative population in null vector");
            p[i] = 0.0;
        }
    }
    p /= p.sum();
    const double scale = m.cwiseAbs().maxCoeff();
    const double residual = (m * p).cwiseAbs().maxCoeff();
    if (residual > steady_state_residual_tolerance * scale) {
        throw NumericalError("steady_state: residual " + std::to_string(residual) + " exceeds tolerance");
    }
    return {std::move(p), std::numeric_limits<double>::infinity()};
}

inline PopulationState steady_state(const RateGenerator& gen, const PumpProgram& program = {}) {
    if (std::holds_alternative<RamanProgram>(program)) {
        throw ConfigError("steady_state: pulsed Raman programs have no time-independent generator; use run_simulation");
    }
    if (const auto* direct = std::get_if<DirectCWProgram>(&program)) return steady_state_of(gen.levels, pumped_matrix(gen, *direct));
    return steady_state_of(gen.levels, gen.matrix);
}

/// Slowest relaxation time (s) of a generator obeying detailed balance at
/// T > 0: inverse of the smallest nonzero decay rate, from the symmetrised
/// matrix D^-1/2 G D^1/2 with D the Boltzmann distribution.
inline double relaxation_time(const RateGenerator& gen) {
    if (!(gen.environment_T > 0.0)) throw DomainError("relaxation_time: needs T > 0");
    const Eigen::Index n = static_cast<Eigen::Index>(gen.size());
    const double beta = 1.0 / (units::boltzmann * gen.environment_T);
    Eigen::VectorXd half_log(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        half_log[i] = 0.5 * (std::log(static_cast<double>(gen.levels[i].degeneracy())) - beta * gen.energies[i]);
    }
    Eigen::MatrixXd s(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            s(i, j) = gen.matrix(i, j) == 0.0 ? 0.0 : gen.matrix(i, j) * std::exp(half_log[j] - half_log[i]);
    s = 0.5 * (s + s.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues();  // ascending; the last is ~0
    return -1.0 / ev[n - 2];
}

// ---------------------------------------------------------------------------
// Pulse saturation conditions
// ---------------------------------------------------------------------------

struct PulseParams {
    double tau = 0.0;        // s
    double rabi = 0.0;       // electronic Rabi frequency, rad/s
    double detuning = 0.0;   // rad/s
    double excited_A = 0.0;  // s^-1
};

struct SaturationReport {
    double omega_R = 0.0;     // rad/s
    double gamma_scat = 0.0;  // s^-1
    double tau_omega_R = 0.0;
    double tau_gamma_scat = 0.0;
    bool cond_i = false;   // tau Omega_R >= 10
    bool cond_ii = false;  // tau Gamma_scat <= 0.01
};

inline constexpr double saturation_threshold = 10.0;
inline constexpr double scattering_threshold = 0.01;

/// Thresholds are compared with a 1e-12 relative allowance so that decimal
/// inputs landing exactly on a threshold count as meeting it.
inline SaturationReport check_saturation(const PulseParams& p) {
    if (p.detuning == 0.0) throw DomainError("check_saturation: detuning must be nonzero");
    if (!(p.tau > 0.0)) throw DomainError("check_saturation: pulse duration must be > 0");
    SaturationReport r;
    r.omega_R = p.rabi * p.rabi / std::abs(p.detuning);
    r.gamma_scat = r.omega_R * p.excited_A / std::abs(p.detuning);
    r.tau_omega_R = p.tau * r.omega_R;
    r.tau_gamma_scat = p.tau * r.gamma_scat;
    r.cond_i = r.tau_omega_R >= saturation_threshold * (1.0 - 1e-12);
    r.cond_ii = r.tau_gamma_scat <= scattering_threshold * (1.0 + 1e-12);
    return r;
}

}  // namespace bbrcool
