#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "bbrcool/dynamics.hpp"
#include "bbrcool/observables.hpp"
#include "support.hpp"

using namespace bbrcool;
using Catch::Approx;
using test_support::arh_model;
using test_support::mgh_model;

namespace {

RateGenerator two_level(double A, double T, double gap_cm = 12.0) {
    const LevelBasis basis({{0, 0}, {0, 1}}, {0.0, units::cm_to_joule(gap_cm)}, 0, 1);
    TransitionTable table;
    table.transitions.push_back({{0, 1}, {0, 0}, units::cm_to_joule(gap_cm) / units::planck, A});
    return assemble_rate_generator(basis, table, T);
}

PopulationState random_state(std::size_t n, std::mt19937_64& rng) {
    std::exponential_distribution<double> d(1.0);
    Eigen::VectorXd p(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = d(rng);
    return {p / p.sum(), 0.0};
}

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("propagation with dt = 0 is the identity", "[dynamics]") {
    const auto gen = assemble_rate_generator(mgh_model().basis, mgh_model().table, 300.0);
    std::mt19937_64 rng(7);
    const auto s = random_state(gen.size(), rng);
    const auto out = propagate_interval(gen, s, 0.0);
    CHECK(out.populations == s.populations);
    CHECK_THROWS_AS(propagate_interval(gen, s, -1.0), DomainError);
}

TEST_CASE("two-level relaxation follows the closed form", "[dynamics][oracle]") {
    const auto gen = two_level(0.7, 300.0);
    const double r_up = gen.matrix(1, 0), r_down = gen.matrix(0, 1);
    const double p_eq = r_up / (r_up + r_down);
    const PopulationState s0{Eigen::Vector2d(0.2, 0.8), 0.0};
    for (double t : {0.01, 0.3, 1.0, 4.0, 20.0}) {
        const auto s = propagate_interval(gen, s0, t);
        const double expected = p_eq + (0.8 - p_eq) * std::exp(-(r_up + r_down) * t);
        CHECK(std::abs(s.populations[1] - expected) < 1e-8);
        CHECK(s.time == t);
    }
}

TEST_CASE("long propagation thermalises to Boltzmann", "[dynamics][property]") {
    const auto& m = mgh_model();
    const auto gen = assemble_rate_generator(m.basis, m.table, 300.0);
    const auto boltz = boltzmann_populations(m.basis, 300.0);
    std::mt19937_64 rng(11);
    for (int k = 0; k < 3; ++k) {
        const auto s = propagate_interval(gen, random_state(gen.size(), rng), 1e6);
        CHECK(max_abs_diff(s.populations, boltz.populations) < 1e-6);
        CHECK(std::abs(s.populations.sum() - 1.0) < 1e-9);
    }
}

TEST_CASE("apply_pulse arithmetic", "[dynamics]") {
    const auto gen = two_level(1.0, 0.0);
    const PopulationState s{Eigen::Vector2d(0.1, 0.3), 2.0};
    const RamanChannel ch{{0, 1}, {0, 0}, 0.0};
    CHECK(apply_pulse(gen, s, ch, 0.0).populations == s.populations);
    const auto full = apply_pulse(gen, s, ch, 1.0);
    CHECK(full.populations[1] == 0.0);
    CHECK(full.populations[0] == Approx(0.4).epsilon(1e-15));
    const auto half = apply_pulse(gen, s, ch, 0.5);
    CHECK(half.populations[1] == Approx(0.15).epsilon(1e-15));
    CHECK(half.populations[0] == Approx(0.25).epsilon(1e-15));
    CHECK(half.time == 2.0);
    CHECK_THROWS_AS(apply_pulse(gen, s, {{0, 5}, {0, 3}, 0.0}, 1.0), ConfigError);
    CHECK_THROWS_AS(apply_pulse(gen, s, ch, 1.5), DomainError);
}

TEST_CASE("pulses on disjoint level pairs commute", "[dynamics][property]") {
    const auto gen = assemble_rate_generator(mgh_model().basis, mgh_model().table, 300.0);
    std::mt19937_64 rng(3);
    const auto s = random_state(gen.size(), rng);
    const auto program = default_raman_program();
    const auto& a = program.pulse_channels[0];
    const auto& b = program.pulse_channels[1];
    const auto ab = apply_pulse(gen, apply_pulse(gen, s, a, 0.8), b, 0.8);
    const auto ba = apply_pulse(gen, apply_pulse(gen, s, b, 0.8), a, 0.8);
    CHECK(ab.populations == ba.populations);
}

TEST_CASE("run_simulation bookkeeping", "[dynamics]") {
    const auto& m = mgh_model();
    const auto gen = assemble_rate_generator(m.basis, m.table, 300.0);
    const auto init = boltzmann_populations(m.basis, 300.0);

    SECTION("t_final = 0 returns the initial state") {
        const auto traj = run_simulation(gen, default_raman_program(), init, 0.0);
        REQUIRE(traj.states.size() == 1);
        CHECK(traj.times[0] == 0.0);
        CHECK(traj.states[0].populations == init.populations);
    }
    SECTION("output grid is honoured and t_final appended") {
        const auto traj = run_simulation(gen, default_raman_program(), init, 1.0, {0.0, 0.25, 0.5});
        CHECK(traj.times == std::vector<double>{0.0, 0.25, 0.5, 1.0});
        for (const auto& st : traj.states) CHECK_NOTHROW(check_population(st));
    }
    SECTION("invalid output grids") {
        CHECK_THROWS_AS(run_simulation(gen, {}, init, 1.0, {0.5, 0.2}), DomainError);
        CHECK_THROWS_AS(run_simulation(gen, {}, init, 1.0, {2.0}), DomainError);
        CHECK_THROWS_AS(run_simulation(gen, {}, init, -1.0), DomainError);
    }
    SECTION("pump channels outside the basis are configuration errors") {
        RamanProgram bad = default_raman_program();
        bad.pulse_channels.push_back({{0, 40}, {5, 40}, 0.0});
        CHECK_THROWS_AS(run_simulation(gen, bad, init, 1.0), ConfigError);
        DirectCWProgram cw{{{{0, 1}, {7, 0}, 1.0}}};
        CHECK_THROWS_AS(run_simulation(gen, cw, init, 1.0), ConfigError);
    }
    SECTION("Raman selection rule is enforced") {
        RamanProgram bad{{{{0, 1}, {1, 0}, 0.0}}, 100.0, 1.0, true};
        CHECK_THROWS_AS(run_simulation(gen, bad, init, 1.0), ConfigError);
    }
    SECTION("zero efficiency equals free BBR evolution") {
        const auto pumped = run_simulation(gen, default_raman_program(100.0, 0.0), init, 3.0);
        const auto free = run_simulation(gen, {}, init, 3.0);
        CHECK(max_abs_diff(pumped.states.back().populations, free.states.back().populations) < 1e-12);
    }
}

TEST_CASE("pulse timing: a state at t includes pulses fired strictly before t", "[dynamics]") {
    // Two vibrational levels with no transitions: free flight is the identity.
    const LevelBasis basis({{0, 0}, {1, 0}}, {0.0, units::cm_to_joule(1000.0)}, 1, 0);
    const auto gen = assemble_rate_generator(basis, {}, 0.0);
    const RamanProgram p{{{{1, 0}, {0, 0}, 0.0}}, 10.0, 0.5, true};
    const auto traj = run_simulation(gen, p, PopulationState{Eigen::Vector2d(0.0, 1.0), 0.0}, 0.25, {0.0, 0.1, 0.15});
    // Fires at 0, 0.1 and 0.2.
    CHECK(traj.states[0].populations[1] == 1.0);
    CHECK(traj.states[1].populations[1] == 0.5);
    CHECK(traj.states[2].populations[1] == 0.25);
    CHECK(traj.states[3].populations[1] == 0.125);

    RamanProgram shifted = p;
    shifted.pulse_channels[0].phase = 0.5;  // fires at 0.05, 0.15, 0.25
    const auto t2 = run_simulation(gen, shifted, PopulationState{Eigen::Vector2d(0.0, 1.0), 0.0}, 0.25, {0.0, 0.1, 0.15});
    CHECK(t2.states[0].populations[1] == 1.0);
    CHECK(t2.states[1].populations[1] == 0.5);
    CHECK(t2.states[2].populations[1] == 0.5);
    CHECK(t2.states[3].populations[1] == 0.25);
}

TEST_CASE("dark state: pumping without BBR empties N <= 2 into (0,0)", "[dynamics][property]") {
    const auto& m = mgh_model();
    const auto gen = assemble_rate_generator(m.basis, m.table, 0.0);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gen.size()));
    p[static_cast<Eigen::Index>(m.basis.require_index({0, 0}))] = 0.2;
    p[static_cast<Eigen::Index>(m.basis.require_index({0, 1}))] = 0.5;
    p[static_cast<Eigen::Index>(m.basis.require_index({0, 2}))] = 0.3;
    const auto traj = run_simulation(gen, default_raman_program(), {p, 0.0}, 200.0);
    CHECK(traj.states.back().populations[0] > 1.0 - 1e-9);
}

TEST_CASE("steady state", "[dynamics]") {
    const auto& m = mgh_model();
    SECTION("no pump reproduces Boltzmann") {
        for (double T : {30.0, 300.0}) {
            const auto gen = assemble_rate_generator(m.basis, m.table, T);
            const auto ss = steady_state(gen);
            CHECK(max_abs_diff(ss.populations, boltzmann_populations(m.basis, T).populations) < 1e-8);
        }
    }
    SECTION("T = 0 sends everything to the ground state") {
        const auto gen = assemble_rate_generator(m.basis, m.table, 0.0);
        CHECK(steady_state(gen).populations[0] == Approx(1.0).epsilon(1e-12));
    }
    SECTION("Raman programs are rejected") {
        const auto gen = assemble_rate_generator(m.basis, m.table, 300.0);
        CHECK_THROWS_AS(steady_state(gen, default_raman_program()), ConfigError);
    }
    SECTION("reducible generator lists its components") {
        const auto gen = two_level(1.0, 300.0);
        RateGenerator split = gen;
        split.levels.push_back({0, 2});
        split.energies.push_back(1.0e-21);
        split.matrix.conservativeResize(3, 3);
        split.matrix.row(2).setZero();
        split.matrix.col(2).setZero();
        CHECK_THROWS_WITH(steady_state(split), Catch::Matchers::ContainsSubstring("{v0N2}"));
    }
}

// With the shipped ArH+ constants the 50 s state is still 1.6e-3 from the
// pumped steady state; kept at the stated tolerance and allowed to fail.
TEST_CASE("ArH+ CW steady state matches a 50 s simulation", "[dynamics][oracle][!mayfail]") {
    const auto& m = arh_model();
    const auto gen = assemble_rate_generator(m.basis, m.table, 300.0);
    const auto prog = make_direct_program(m.table, {{{0, 1}, {2, 0}}, {{0, 2}, {1, 1}}});
    const auto ss = steady_state(gen, prog);
    const auto traj = run_simulation(gen, prog, boltzmann_populations(m.basis, 300.0), 50.0);
    CHECK(max_abs_diff(ss.populations, traj.states.back().populations) < 1e-3);
}

TEST_CASE("ArH+ CW steady state is the long-time limit", "[dynamics][oracle]") {
    const auto& m = arh_model();
    const auto gen = assemble_rate_generator(m.basis, m.table, 300.0);
    const auto prog = make_direct_program(m.table, {{{0, 1}, {2, 0}}, {{0, 2}, {1, 1}}});
    const auto ss = steady_state(gen, prog);
    const auto traj = run_simulation(gen, prog, boltzmann_populations(m.basis, 300.0), 300.0);
    CHECK(max_abs_diff(ss.populations, traj.states.back().populations) < 1e-8);
    CHECK(ss.populations.minCoeff() >= 0.0);
    CHECK((pumped_matrix(gen, prog) * ss.populations).cwiseAbs().maxCoeff() < 1e-12 * gen.max_rate());
}

TEST_CASE("CW pump rates are degeneracy weighted", "[dynamics]") {
    const LevelBasis basis({{0, 1}, {2, 0}}, {0.0, units::cm_to_joule(5000.0)}, 2, 1);
    // Basis layout is irrelevant here; only the generator indices matter.
    RateGenerator gen;
    gen.levels = basis.levels();
    gen.energies = basis.energies();
    gen.matrix = Eigen::MatrixXd::Zero(2, 2);
    const auto m = pumped_matrix(gen, {{{{0, 1}, {2, 0}, 6.0}}});
    CHECK(m(0, 1) == 6.0);              // down, upper -> lower
    CHECK(m(1, 0) == Approx(2.0));      // up = down * g_u / g_l = 6 / 3
    CHECK(m.colwise().sum().cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(pumped_matrix(gen, {{{{0, 1}, {2, 0}, -1.0}}}), ConfigError);
}

TEST_CASE("rotational relaxation time", "[dynamics]") {
    const auto gen = two_level(0.5, 300.0);
    CHECK(relaxation_time(gen) == Approx(1.0 / (gen.matrix(1, 0) + gen.matrix(0, 1))).epsilon(1e-10));
    const auto cold = two_level(0.5, 0.0);
    CHECK_THROWS_AS(relaxation_time(cold), DomainError);
}

TEST_CASE("saturation checker worked examples", "[dynamics]") {
    const auto r = check_saturation({10e-9, 1e10, 1e11, 1e8});
    CHECK(r.omega_R == Approx(1e9).epsilon(1e-14));
    CHECK(r.gamma_scat == Approx(1e6).epsilon(1e-14));
    CHECK(r.cond_i);
    CHECK(r.cond_ii);

    const auto marginal = check_saturation({10e-9, std::sqrt(1e9 * 4e10), 4e10, 0.0});
    CHECK(marginal.tau_omega_R == Approx(10.0).epsilon(1e-12));
    CHECK(marginal.cond_i);

    // tau Gamma_scat = 0.02.
    const auto scattering = check_saturation({10e-9, 1e10, 1e11, 2e8});
    CHECK(scattering.tau_gamma_scat == Approx(0.02).epsilon(1e-12));
    CHECK_FALSE(scattering.cond_ii);

    const auto weak = check_saturation({10e-9, 1e9, 1e11, 1e8});
    CHECK_FALSE(weak.cond_i);

    CHECK_THROWS_AS(check_saturation({10e-9, 1e10, 0.0, 1e8}), DomainError);
}
