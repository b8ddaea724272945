// Command-line driver: simulate, sweep, lines, validate.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bbrcool/config.hpp"
#include "bbrcool/formats.hpp"
#include "bbrcool/scenario.hpp"

namespace fs = std::filesystem;
using namespace bbrcool;

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

fs::path prepare_out(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError(dir.string() + ": cannot create output directory: " + ec.message());
    return dir;
}

int cmd_simulate(const std::string& path, const std::string& out) {
    const Scenario s = load_scenario(path);
    const Model model = build_model(s);
    const RunResult r = simulate(s, model);
    const fs::path dir = prepare_out(out);
    write_text_file(dir / "trajectory.csv", trajectory_csv(r.trajectory, model.basis.levels()));
    write_text_file(dir / "snapshot.csv", snapshot_csv({snapshot(r.initial, model.basis), snapshot(r.final_state, model.basis)}));
    const std::string summary = summary_text(s, model, r);
    write_text_file(dir / "summary.txt", summary);
    std::cout << summary;
    return 0;
}

int cmd_sweep(const std::string& path, const std::string& out) {
    const Scenario s = load_scenario(path);
    const auto points = run_sweep(s);
    const fs::path dir = prepare_out(out);
    const std::string csv = sweep_csv(s.sweep->parameter, points);
    write_text_file(dir / "sweep.csv", csv);
    std::cout << csv;
    return 0;
}

int cmd_lines(const std::string& path, const std::string& out, int vmax, int Nmax, int dv_max, const std::string& source) {
    const MoleculeSpec mol = load_molecule(path);
    DipoleSource ds = DipoleSource::automatic;
    if (source == "curves") {
        if (!mol.potential_curve) {
            throw ConfigError(path + ": Numerov requested but the molecule has no potential curve; "
                              "add [curves] or use constants-only mode (--dipoles table with [vib_dipoles])");
        }
        ds = DipoleSource::curves;
    } else if (source == "table") {
        ds = DipoleSource::table;
    }
    const Model model = build_model(mol, vmax, Nmax, dv_max, ds);
    LinesFile f{mol.name, vmax, Nmax, model.dipole_source, model.vib_energies_cm, model.dipoles, model.table};
    const fs::path dir = prepare_out(out);
    const fs::path file = dir / "lines.txt";
    write_text_file(file, write_lines_text(f, model.basis));
    std::cout << "wrote " << model.table.transitions.size() << " transitions to " << file.string() << "\n";
    return 0;
}

int cmd_validate(const std::string& path) {
    const ConfigDocument doc = ConfigDocument::load(path);
    if (doc.has_section("scenario")) {
        const Scenario s = scenario_from_document(doc, path);
        (void)build_model(s);
        std::cout << path << ": valid scenario (" << s.molecule.name << ")\n";
    } else if (doc.has_section("molecule")) {
        const MoleculeSpec m = molecule_from_document(doc);
        std::cout << path << ": valid molecule file (" << m.name << ")\n";
    } else if (doc.has_section("transitions")) {
        const LinesFile f = lines_from_document(doc);
        std::cout << path << ": valid transition table (" << f.table.transitions.size() << " lines)\n";
    } else {
        throw ConfigError(path + ": not a scenario, molecule or transition-table file");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Blackbody-radiation-assisted rotational cooling simulator for diatomic molecular ions"};
    app.require_subcommand(1);
    std::string out = "out";
    std::string file;

    auto* sim = app.add_subcommand("simulate", "Run a scenario and write trajectory, snapshot and summary files");
    sim->add_option("scenario", file, "Scenario file")->required();
    sim->add_option("--out", out, "Output directory");

    auto* sweep = app.add_subcommand("sweep", "Run the [sweep] block of a scenario and write sweep.csv");
    sweep->add_option("scenario", file, "Scenario file")->required();
    sweep->add_option("--out", out, "Output directory");

    int vmax = default_vmax, Nmax = default_Nmax, dv_max = 2;
    std::string dipoles = "auto";
    auto* lines = app.add_subcommand("lines", "Compute the transition table of a molecule file");
    lines->add_option("molecule", file, "Molecule file")->required();
    lines->add_option("--out", out, "Output directory");
    lines->add_option("--vmax", vmax, "Highest vibrational level");
    lines->add_option("--Nmax", Nmax, "Highest rotational level");
    lines->add_option("--dv-max", dv_max, "Largest Delta v in the table");
    lines->add_option("--dipoles", dipoles, "Dipole source: auto, curves (Numerov) or table")
        ->check(CLI::IsMember({"auto", "curves", "table"}));

    auto* validate = app.add_subcommand("validate", "Check a scenario, molecule or transition-table file");
    validate->add_option("file", file, "File to check")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (*sim) return cmd_simulate(file, out);
        if (*sweep) return cmd_sweep(file, out);
        if (*lines) return cmd_lines(file, out, vmax, Nmax, dv_max, dipoles);
        if (*validate) return cmd_validate(file);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return exit_config;
    } catch (const DomainError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return exit_config;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
    return 0;
}
