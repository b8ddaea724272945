#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <future>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bbrcool/config.hpp"
#include "bbrcool/dynamics.hpp"
#include "bbrcool/formats.hpp"
#include "bbrcool/molspec.hpp"
#include "bbrcool/numerov.hpp"
#include "bbrcool/observables.hpp"
#include "bbrcool/rates.hpp"

namespace bbrcool {

enum class Scheme { none, raman, direct };

enum class DipoleSource { automatic, curves, table };

struct RamanSettings {
    std::vector<RamanChannel> channels;
    double rep_rate = 100.0;
    double transfer_efficiency = 1.0;
    bool polarization_complete = true;
    std::optional<double> wavelength_nm;  // descriptive only
};

struct DirectSettings {
    std::vector<std::pair<RovibLevel, RovibLevel>> pairs;  // (lower, upper)
    double rate_fraction_of_A = default_rate_fraction_of_A;
    std::vector<double> effective_rates;  // s^-1 overrides, one per pair
    std::vector<double> wavelengths_um;   // descriptive only
};

struct SweepSettings {
    std::string parameter;
    std::vector<double> values;
};

inline const std::vector<std::string>& sweep_parameters() {
    static const std::vector<std::string> names{"rep_rate", "transfer_efficiency", "environment_T", "effective_rate"};
    return names;
}

struct Scenario {
    std::filesystem::path source;
    std::filesystem::path molecule_path;
    MoleculeSpec molecule;
    double environment_T = 300.0;
    double initial_T = 300.0;
    Scheme scheme = Scheme::none;
    double t_final = 0.0;
    std::vector<double> output_times;
    int vmax = default_vmax;
    int Nmax = default_Nmax;
    int dv_max = 2;
    DipoleSource dipole_source = DipoleSource::automatic;
    std::optional<std::filesystem::path> transition_table;
    TemperatureMethod temperature_method = TemperatureMethod::ground_fraction;
    RamanSettings raman;
    DirectSettings direct;
    std::optional<PulseParams> pulse;
    std::optional<SweepSettings> sweep;
};

inline const std::map<std::string, std::set<std::string>>& scenario_schema() {
    static const std::map<std::string, std::set<std::string>> schema{
        {"", {"version"}},
        {"scenario",
         {"name", "molecule", "environment_T_K", "initial_T_K", "scheme", "t_final_s", "output_times_s", "output_step_s",
          "vmax", "Nmax", "dv_max", "dipole_source", "transition_table", "temperature_method"}},
        {"raman", {"channels", "phases", "rep_rate_Hz", "transfer_efficiency", "polarization_complete", "wavelength_nm"}},
        {"direct", {"pairs", "rate_fraction_of_A", "effective_rates_s", "wavelengths_um"}},
        {"pulse", {"tau_s", "rabi_rad_s", "detuning_rad_s", "excited_A_s"}},
        {"sweep", {"parameter", "values", "start", "stop", "steps"}},
    };
    return schema;
}

inline Scenario scenario_from_document(const ConfigDocument& doc, const std::filesystem::path& path) {
    doc.check_schema(scenario_schema());
    doc.require_version(1);
    Scenario s;
    s.source = path;
    const auto base = path.parent_path();

    const auto& mol = doc.require("scenario", "molecule");
    s.molecule_path = base / mol.value;
    if (!std::filesystem::exists(s.molecule_path)) mol.fail("molecule file '" + s.molecule_path.string() + "' does not exist");
    s.molecule = load_molecule(s.molecule_path);

    auto number = [&](const char* key, double& dst) {
        if (const auto* e = doc.find("scenario", key)) dst = e->as_double();
    };
    auto integer = [&](const char* key, int& dst) {
        if (const auto* e = doc.find("scenario", key)) dst = e->as_int();
    };
    number("environment_T_K", s.environment_T);
    number("initial_T_K", s.initial_T);
    s.t_final = doc.require("scenario", "t_final_s").as_double();
    integer("vmax", s.vmax);
    integer("Nmax", s.Nmax);
    integer("dv_max", s.dv_max);
    if (!(s.environment_T >= 0.0)) doc.require("scenario", "environment_T_K").fail("must be >= 0");
    if (!(s.initial_T >= 0.0)) doc.require("scenario", "initial_T_K").fail("must be >= 0");
    if (!(s.t_final >= 0.0)) doc.require("scenario", "t_final_s").fail("must be >= 0");

    const auto* times = doc.find("scenario", "output_times_s");
    const auto* step = doc.find("scenario", "output_step_s");
    if (times && step) times->fail("give either output_times_s or output_step_s, not both");
    if (times) {
        s.output_times = times->as_doubles();
        for (std::size_t i = 0; i < s.output_times.size(); ++i) {
            if (s.output_times[i] < 0.0 || s.output_times[i] > s.t_final) times->fail("output times must lie in [0, t_final_s]");
            if (i && !(s.output_times[i] > s.output_times[i - 1])) times->fail("output times must increase strictly");
        }
    } else if (step) {
        const double dt = step->as_double();
        if (!(dt > 0.0)) step->fail("must be > 0");
        const auto n = static_cast<long long>(std::floor(s.t_final / dt + 1e-9));
        for (long long k = 0; k <= n; ++k) s.output_times.push_back(std::min(k * dt, s.t_final));
    } else {
        s.output_times = {0.0};
    }

    if (const auto* e = doc.find("scenario", "dipole_source")) {
        if (e->value == "auto") s.dipole_source = DipoleSource::automatic;
        else if (e->value == "curves") s.dipole_source = DipoleSource::curves;
        else if (e->value == "table") s.dipole_source = DipoleSource::table;
        else e->fail("expected auto, curves or table");
    }
    if (const auto* e = doc.find("scenario", "transition_table")) {
        s.transition_table = base / e->value;
        if (!std::filesystem::exists(*s.transition_table)) e->fail("file '" + s.transition_table->string() + "' does not exist");
    }
    if (const auto* e = doc.find("scenario", "temperature_method")) {
        if (e->value == "ground_fraction") s.temperature_method = TemperatureMethod::ground_fraction;
        else if (e->value == "mean_energy") s.temperature_method = TemperatureMethod::mean_energy;
        else e->fail("expected ground_fraction or mean_energy");
    }

    const auto& scheme = doc.require("scenario", "scheme");
    if (scheme.value == "none") s.scheme = Scheme::none;
    else if (scheme.value == "raman") s.scheme = Scheme::raman;
    else if (scheme.value == "direct") s.scheme = Scheme::direct;
    else scheme.fail("expected raman, direct or none");

    if (s.scheme == Scheme::raman) {
        if (!doc.has_section("raman")) scheme.fail("scheme raman needs a [raman] section");
        const auto& ch = doc.require("raman", "channels");
        const auto pairs = parse_level_pairs(ch);
        std::vector<double> phases(pairs.size(), 0.0);
        if (const auto* e = doc.find("raman", "phases")) {
            phases = e->as_doubles();
            if (phases.size() != pairs.size()) e->fail("need one phase per channel");
        }
        for (std::size_t i = 0; i < pairs.size(); ++i) s.raman.channels.push_back({pairs[i].first, pairs[i].second, phases[i]});
        s.raman.rep_rate = doc.require("raman", "rep_rate_Hz").as_double();
        if (const auto* e = doc.find("raman", "transfer_efficiency")) s.raman.transfer_efficiency = e->as_double();
        if (const auto* e = doc.find("raman", "polarization_complete")) s.raman.polarization_complete = e->as_bool();
        if (const auto* e = doc.find("raman", "wavelength_nm")) s.raman.wavelength_nm = e->as_double();
        try {
            RamanProgram{s.raman.channels, s.raman.rep_rate, s.raman.transfer_efficiency, true}.validate();
        } catch (const ConfigError& err) {
            ch.fail(err.what());
        }
        if (!s.raman.polarization_complete) {
            doc.require("raman", "polarization_complete")
                .fail("incomplete polarization modulation is not modelled; the basis omits magnetic sublevels");
        }
    } else if (s.scheme == Scheme::direct) {
        if (!doc.has_section("direct")) scheme.fail("scheme direct needs a [direct] section");
        const auto& pe = doc.require("direct", "pairs");
        s.direct.pairs = parse_level_pairs(pe);
        if (const auto* e = doc.find("direct", "rate_fraction_of_A")) {
            s.direct.rate_fraction_of_A = e->as_double();
            if (!(s.direct.rate_fraction_of_A >= 0.0)) e->fail("must be >= 0");
        }
        if (const auto* e = doc.find("direct", "effective_rates_s")) {
            s.direct.effective_rates = e->as_doubles();
            if (s.direct.effective_rates.size() != s.direct.pairs.size()) e->fail("need one rate per pair");
            for (double r : s.direct.effective_rates)
                if (!(r >= 0.0)) e->fail("rates must be >= 0");
        }
        if (const auto* e = doc.find("direct", "wavelengths_um")) s.direct.wavelengths_um = e->as_doubles();
    }

    if (doc.has_section("pulse")) {
        PulseParams p;
        p.tau = doc.require("pulse", "tau_s").as_double();
        p.rabi = doc.require("pulse", "rabi_rad_s").as_double();
        p.detuning = doc.require("pulse", "detuning_rad_s").as_double();
        p.excited_A = doc.require("pulse", "excited_A_s").as_double();
        if (p.detuning == 0.0) doc.require("pulse", "detuning_rad_s").fail("must be nonzero");
        if (!(p.tau > 0.0)) doc.require("pulse", "tau_s").fail("must be > 0");
        s.pulse = p;
    }

    if (doc.has_section("sweep")) {
        SweepSettings sw;
        const auto& pe = doc.require("sweep", "parameter");
        sw.parameter = pe.value;
        const auto& names = sweep_parameters();
        if (std::find(names.begin(), names.end(), sw.parameter) == names.end()) {
            pe.fail("unknown sweep parameter '" + sw.parameter + "'; expected rep_rate, transfer_efficiency, environment_T or effective_rate");
        }
        if ((sw.parameter == "rep_rate" || sw.parameter == "transfer_efficiency") && s.scheme != Scheme::raman) {
            pe.fail("parameter '" + sw.parameter + "' needs scheme = raman");
        }
        if (sw.parameter == "effective_rate" && s.scheme != Scheme::direct) pe.fail("parameter 'effective_rate' needs scheme = direct");
        if (const auto* v = doc.find("sweep", "values")) {
            if (doc.find("sweep", "start")) v->fail("give either values or start/stop/steps");
            sw.values = v->as_doubles();
        } else {
            const double a = doc.require("sweep", "start").as_double();
            const double b = doc.require("sweep", "stop").as_double();
            const auto& st = doc.require("sweep", "steps");
            const int n = st.as_int();
            if (n < 1) st.fail("must be >= 1");
            for (int k = 0; k < n; ++k) sw.values.push_back(n == 1 ? a : a + (b - a) * k / (n - 1));
        }
        if (sw.values.empty()) pe.fail("sweep has no values");
        std::sort(sw.values.begin(), sw.values.end());
        s.sweep = sw;
    }
    return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    return scenario_from_document(ConfigDocument::load(path), path);
}

// ---------------------------------------------------------------------------
// Model assembly
// ---------------------------------------------------------------------------

struct Model {
    LevelBasis basis;
    TransitionTable table;
    VibDipoleMatrix dipoles;
    std::vector<double> vib_energies_cm;  // Numerov eigenvalues, when curves were used
    std::string dipole_source;
};

/// Basis + transition table for a molecule, with dipoles from the Numerov
/// solve when curves exist (or are requested) and from the supplied table
/// otherwise.
inline Model build_model(const MoleculeSpec& mol, int vmax, int Nmax, int dv_max,
                         DipoleSource source = DipoleSource::automatic) {
    Model m;
    m.basis = build_level_basis(mol, vmax, Nmax);
    const bool use_curves = source == DipoleSource::curves ||
                            (source == DipoleSource::automatic && mol.potential_curve.has_value());
    if (use_curves) {
        auto sol = vib_dipoles_from_curves(mol, vmax);
        m.dipoles = sol.dipoles;
        for (const auto& st : sol.states) m.vib_energies_cm.push_back(units::joule_to_cm(st.energy_J));
        m.dipole_source = "curves";
    } else {
        m.dipoles = vib_dipoles_from_table(mol, vmax);
        m.dipole_source = "table";
    }
    m.table = build_transition_table(m.basis, m.dipoles, dv_max);
    return m;
}

inline Model build_model(const Scenario& s) {
    if (s.transition_table) {
        Model m;
        m.basis = build_level_basis(s.molecule, s.vmax, s.Nmax);
        auto lines = load_lines(*s.transition_table, &m.basis);
        m.table = std::move(lines.table);
        m.dipoles = std::move(lines.dipoles);
        m.vib_energies_cm = std::move(lines.vib_energies_cm);
        m.dipole_source = "file";
        return m;
    }
    return build_model(s.molecule, s.vmax, s.Nmax, s.dv_max, s.dipole_source);
}

inline PumpProgram build_program(const Scenario& s, const TransitionTable& table) {
    switch (s.scheme) {
        case Scheme::raman:
            return RamanProgram{s.raman.channels, s.raman.rep_rate, s.raman.transfer_efficiency, s.raman.polarization_complete};
        case Scheme::direct: {
            DirectCWProgram p = make_direct_program(table, s.direct.pairs, s.direct.rate_fraction_of_A);
            for (std::size_t i = 0; i < s.direct.effective_rates.size(); ++i) p.driven[i].effective_rate = s.direct.effective_rates[i];
            return p;
        }
        case Scheme::none:
            break;
    }
    return std::monostate{};
}

/// Scenario copy with one whitelisted parameter replaced.
inline Scenario with_parameter(Scenario s, const std::string& name, double value) {
    if (name == "rep_rate") s.raman.rep_rate = value;
    else if (name == "transfer_efficiency") s.raman.transfer_efficiency = value;
    else if (name == "environment_T") s.environment_T = value;
    else if (name == "effective_rate") {
        s.direct.rate_fraction_of_A = value;
        s.direct.effective_rates.clear();
    } else throw ConfigError("unknown sweep parameter '" + name + "'");
    return s;
}

struct RunResult {
    Trajectory trajectory;
    PopulationState initial;
    PopulationState final_state;
    double ground_fraction = 0.0;
    std::optional<double> effective_temperature;
    std::string temperature_note;
    std::optional<SaturationReport> saturation;
    double wall_time_s = 0.0;
};

inline RunResult simulate(const Scenario& s, const Model& model) {
    const auto start = std::chrono::steady_clock::now();
    RunResult r;
    const RateGenerator gen = assemble_rate_generator(model.basis, model.table, s.environment_T);
    const PumpProgram program = build_program(s, model.table);
    r.initial = boltzmann_populations(model.basis, s.initial_T);
    r.trajectory = run_simulation(gen, program, r.initial, s.t_final, s.output_times);
    for (const auto& st : r.trajectory.states) check_population(st);
    r.final_state = r.trajectory.states.back();
    r.ground_fraction = ground_state_fraction(r.final_state);
    try {
        r.effective_temperature = effective_temperature(r.final_state, model.basis, s.temperature_method);
    } catch (const DomainError& e) {
        r.temperature_note = e.what();
    }
    if (s.pulse) r.saturation = check_saturation(*s.pulse);
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

inline RunResult simulate(const Scenario& s) { return simulate(s, build_model(s)); }

struct SweepPoint {
    double value = 0.0;
    double ground_fraction = 0.0;
};

/// One independent simulation per sweep value, run concurrently; rows are
/// returned in ascending parameter order.
inline std::vector<SweepPoint> run_sweep(const Scenario& s) {
    if (!s.sweep) throw ConfigError(s.source.string() + ": scenario has no [sweep] section");
    const Model model = build_model(s);
    std::vector<double> values = s.sweep->values;
    std::sort(values.begin(), values.end());
    std::vector<std::future<double>> jobs;
    jobs.reserve(values.size());
    for (double v : values) {
        jobs.push_back(std::async(std::launch::async, [&s, &model, v] {
            Scenario point = with_parameter(s, s.sweep->parameter, v);
            point.output_times = {};
            const RateGenerator gen = assemble_rate_generator(model.basis, model.table, point.environment_T);
            const auto traj = run_simulation(gen, build_program(point, model.table),
                                             boltzmann_populations(model.basis, point.initial_T), point.t_final, {});
            check_population(traj.states.back());
            return ground_state_fraction(traj.states.back());
        }));
    }
    std::vector<SweepPoint> out;
    for (std::size_t i = 0; i < values.size(); ++i) out.push_back({values[i], jobs[i].get()});
    return out;
}

inline std::string sweep_csv(const std::string& parameter, const std::vector<SweepPoint>& points) {
    std::string out = parameter + ",ground_state_fraction\n";
    for (const auto& p : points) out += format_sig(p.value) + "," + format_sig(p.ground_fraction) + "\n";
    return out;
}

inline std::string summary_text(const Scenario& s, const Model& model, const RunResult& r) {
    std::string out;
    out += "scenario = " + s.source.filename().string() + "\n";
    out += "molecule = " + s.molecule.name + "\n";
    out += "levels = " + std::to_string(model.basis.size()) + "\n";
    out += "transitions = " + std::to_string(model.table.transitions.size()) + "\n";
    out += "dipole_source = " + model.dipole_source + "\n";
    out += "t_final_s = " + format_sig(s.t_final) + "\n";
    out += "initial_ground_state_fraction = " + format_sig(ground_state_fraction(r.initial)) + "\n";
    out += "ground_state_fraction = " + format_sig(r.ground_fraction) + "\n";
    if (r.effective_temperature) out += "effective_temperature_K = " + format_sig(*r.effective_temperature, 6) + "\n";
    else out += "effective_temperature_K = unavailable (" + r.temperature_note + ")\n";
    if (r.saturation) {
        out += "raman_coupling_rad_s = " + format_sig(r.saturation->omega_R) + "\n";
        out += "scattering_rate_s = " + format_sig(r.saturation->gamma_scat) + "\n";
        out += "saturation_condition_i = " + std::string(r.saturation->cond_i ? "true" : "false") + "\n";
        out += "saturation_condition_ii = " + std::string(r.saturation->cond_ii ? "true" : "false") + "\n";
    }
    out += "wall_time_s = " + format_sig(r.wall_time_s, 4) + "\n";
    return out;
}

}  // namespace bbrcool
