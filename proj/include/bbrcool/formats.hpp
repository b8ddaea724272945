#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bbrcool/config.hpp"
#include "bbrcool/dynamics.hpp"
#include "bbrcool/errors.hpp"
#include "bbrcool/molspec.hpp"
#include "bbrcool/observables.hpp"
#include "bbrcool/rates.hpp"

namespace bbrcool {

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

/// Fixed significant-digit rendering used by every data file.
inline std::string format_sig(double x, int digits = 12) {
    std::array<char, 64> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, digits);
    return std::string(buf.data(), r.ptr);
}

/// Shortest text that parses back to the same double.
inline std::string format_exact(double x) {
    std::array<char, 64> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), r.ptr);
}

// ---------------------------------------------------------------------------
// Level labels: v{v}N{N}
// ---------------------------------------------------------------------------

inline std::optional<RovibLevel> parse_level(std::string_view s) {
    if (s.size() < 4 || s.front() != 'v') return std::nullopt;
    const auto n_pos = s.find('N');
    if (n_pos == std::string_view::npos) return std::nullopt;
    RovibLevel l;
    const auto v_str = s.substr(1, n_pos - 1);
    const auto n_str = s.substr(n_pos + 1);
    auto r1 = std::from_chars(v_str.data(), v_str.data() + v_str.size(), l.v);
    auto r2 = std::from_chars(n_str.data(), n_str.data() + n_str.size(), l.N);
    if (r1.ec != std::errc() || r1.ptr != v_str.data() + v_str.size()) return std::nullopt;
    if (r2.ec != std::errc() || r2.ptr != n_str.data() + n_str.size()) return std::nullopt;
    if (l.v < 0 || l.N < 0) return std::nullopt;
    return l;
}

/// "v0N1->v1N1" style level pairs, whitespace separated.
inline std::vector<std::pair<RovibLevel, RovibLevel>> parse_level_pairs(const ConfigEntry& e) {
    std::vector<std::pair<RovibLevel, RovibLevel>> out;
    for (const auto& word : e.as_words()) {
        const auto arrow = word.find("->");
        if (arrow == std::string::npos) e.fail("expected 'v<a>N<b>->v<c>N<d>', got '" + word + "'");
        const auto a = parse_level(std::string_view(word).substr(0, arrow));
        const auto b = parse_level(std::string_view(word).substr(arrow + 2));
        if (!a || !b) e.fail("malformed level pair '" + word + "'");
        out.emplace_back(*a, *b);
    }
    if (out.empty()) e.fail("expected at least one level pair");
    return out;
}

// ---------------------------------------------------------------------------
// Molecule files
// ---------------------------------------------------------------------------

inline const std::map<std::string, std::set<std::string>>& molecule_schema() {
    static const std::map<std::string, std::set<std::string>> schema{
        {"", {"version"}},
        {"molecule", {"name", "reduced_mass_amu"}},
        {"constants", {"we_cm", "wexe_cm", "Be_cm", "alpha_e_cm", "centrifugal_D_cm", "permanent_dipole_D"}},
        {"curves",
         {"morse_De_cm", "morse_a_per_A", "morse_re_A", "morse_from_constants", "potential_table_cm", "dipole_poly_D",
          "dipole_poly_center_A", "dipole_table_D"}},
        {"vib_dipoles", {"table_D"}},
    };
    return schema;
}

inline CurveTable curve_from_rows(const ConfigEntry& e) {
    CurveTable t;
    for (const auto& row : e.table(2)) {
        t.r_A.push_back(row[0]);
        t.value.push_back(row[1]);
    }
    if (t.r_A.size() < 4) e.fail("curve tables need at least 4 points");
    for (std::size_t i = 1; i < t.r_A.size(); ++i)
        if (!(t.r_A[i] > t.r_A[i - 1])) e.fail("curve abscissae must increase strictly");
    return t;
}

inline MoleculeSpec molecule_from_document(const ConfigDocument& doc) {
    doc.check_schema(molecule_schema());
    doc.require_version(1);
    MoleculeSpec m;
    m.name = doc.require("molecule", "name").value;
    m.reduced_mass_amu = doc.require("molecule", "reduced_mass_amu").as_double();
    m.we_cm = doc.require("constants", "we_cm").as_double();
    m.wexe_cm = doc.require("constants", "wexe_cm").as_double();
    m.Be_cm = doc.require("constants", "Be_cm").as_double();
    m.alpha_e_cm = doc.require("constants", "alpha_e_cm").as_double();
    if (const auto* e = doc.find("constants", "centrifugal_D_cm")) m.centrifugal_D_cm = e->as_double();
    if (const auto* e = doc.find("constants", "permanent_dipole_D")) m.permanent_dipole_D = e->as_double();

    const bool any_morse = doc.find("curves", "morse_De_cm") || doc.find("curves", "morse_a_per_A") ||
                           doc.find("curves", "morse_re_A");
    const auto* from_constants = doc.find("curves", "morse_from_constants");
    const auto* pot_table = doc.find("curves", "potential_table_cm");
    if ((any_morse ? 1 : 0) + (pot_table ? 1 : 0) + (from_constants && from_constants->as_bool() ? 1 : 0) > 1) {
        throw ConfigError(doc.source() + ": [curves] may define only one of morse_*, morse_from_constants, potential_table_cm");
    }
    if (any_morse) {
        m.potential_curve = MorseParams{doc.require("curves", "morse_De_cm").as_double(),
                                        doc.require("curves", "morse_a_per_A").as_double(),
                                        doc.require("curves", "morse_re_A").as_double()};
    } else if (pot_table) {
        m.potential_curve = curve_from_rows(*pot_table);
    } else if (from_constants && from_constants->as_bool()) {
        if (!(m.wexe_cm > 0.0)) from_constants->fail("needs wexe_cm > 0");
        m.potential_curve = morse_from_constants(m);
    }

    const auto* poly = doc.find("curves", "dipole_poly_D");
    const auto* dip_table = doc.find("curves", "dipole_table_D");
    if (poly && dip_table) throw ConfigError(doc.source() + ": [curves] may define only one of dipole_poly_D, dipole_table_D");
    if (poly) {
        DipolePolynomial p;
        p.coeffs = poly->as_doubles();
        if (p.coeffs.empty()) poly->fail("expected polynomial coefficients");
        if (const auto* c = doc.find("curves", "dipole_poly_center_A")) {
            p.center_A = c->as_double();
        } else if (const auto* morse = m.potential_curve ? std::get_if<MorseParams>(&*m.potential_curve) : nullptr) {
            p.center_A = morse->re_A;
        } else {
            poly->fail("dipole_poly_center_A is required unless a Morse potential supplies re");
        }
        m.dipole_curve = p;
    } else if (dip_table) {
        m.dipole_curve = curve_from_rows(*dip_table);
    }

    if (const auto* t = doc.find("vib_dipoles", "table_D")) {
        for (const auto& row : t->table(3)) {
            if (row[0] != std::floor(row[0]) || row[1] != std::floor(row[1])) t->fail("v values must be integers");
            m.vib_transition_dipoles.push_back({static_cast<int>(row[0]), static_cast<int>(row[1]), row[2]});
        }
    }
    m.validate();
    return m;
}

inline MoleculeSpec load_molecule(const std::filesystem::path& path) {
    return molecule_from_document(ConfigDocument::load(path));
}

// ---------------------------------------------------------------------------
// Transition-table files
// ---------------------------------------------------------------------------

struct LinesFile {
    std::string molecule;
    int vmax = 0;
    int Nmax = 0;
    std::string dipole_source;
    std::vector<double> vib_energies_cm;  // Numerov eigenvalues above the potential minimum
    VibDipoleMatrix dipoles;
    TransitionTable table;
};

inline std::string write_lines_text(const LinesFile& f, const LevelBasis& basis) {
    std::ostringstream out;
    out << "# transition table: upper, lower, wavenumber (cm^-1), Einstein A (s^-1)\n";
    out << "version = 1\n\n[lines]\n";
    out << "molecule = " << f.molecule << "\n";
    out << "vmax = " << f.vmax << "\nNmax = " << f.Nmax << "\ndv_max = " << f.table.dv_max << "\n";
    out << "dipole_source = " << f.dipole_source << "\n";
    if (!f.vib_energies_cm.empty()) {
        out << "\n[vibrational]\n# v, eigenvalue above the potential minimum (cm^-1)\nenergies_cm =\n";
        for (std::size_t v = 0; v < f.vib_energies_cm.size(); ++v)
            out << "  " << v << " " << format_exact(f.vib_energies_cm[v]) << "\n";
    }
    out << "\n[dipoles]\n# v_a, v_b, <v_a|mu|v_b> (Debye)\nmatrix_D =\n";
    for (int a = 0; a <= f.dipoles.vmax(); ++a)
        for (int b = a; b <= f.dipoles.vmax(); ++b)
            if (auto d = f.dipoles.get(a, b)) out << "  " << a << " " << b << " " << format_exact(*d / units::debye) << "\n";
    out << "\n[transitions]\n# v_u N_u v_l N_l wavenumber_cm A_s\ntable =\n";
    for (const auto& t : f.table.transitions) {
        const double nu_cm = (basis.energy(t.upper) - basis.energy(t.lower)) / units::wavenumber_to_joule;
        out << "  " << t.upper.v << " " << t.upper.N << " " << t.lower.v << " " << t.lower.N << " "
            << format_exact(nu_cm) << " " << format_exact(t.A) << "\n";
    }
    return out.str();
}

inline const std::map<std::string, std::set<std::string>>& lines_schema() {
    static const std::map<std::string, std::set<std::string>> schema{
        {"", {"version"}},
        {"lines", {"molecule", "vmax", "Nmax", "dv_max", "dipole_source"}},
        {"vibrational", {"energies_cm"}},
        {"dipoles", {"matrix_D"}},
        {"transitions", {"table"}},
    };
    return schema;
}

/// Reads a transition table and checks it against the basis it will drive.
/// A values are taken verbatim; frequencies are recomputed from the basis.
inline LinesFile lines_from_document(const ConfigDocument& doc, const LevelBasis* basis = nullptr) {
    doc.check_schema(lines_schema());
    doc.require_version(1);
    LinesFile f;
    f.molecule = doc.require("lines", "molecule").value;
    f.vmax = doc.require("lines", "vmax").as_int();
    f.Nmax = doc.require("lines", "Nmax").as_int();
    f.table.dv_max = doc.require("lines", "dv_max").as_int();
    if (const auto* e = doc.find("lines", "dipole_source")) f.dipole_source = e->value;
    if (basis && (basis->vmax() != f.vmax || basis->Nmax() != f.Nmax)) {
        throw ConfigError(doc.source() + ": transition table was built for vmax=" + std::to_string(f.vmax) +
                          ", Nmax=" + std::to_string(f.Nmax) + " but the scenario basis has vmax=" +
                          std::to_string(basis->vmax()) + ", Nmax=" + std::to_string(basis->Nmax()));
    }
    if (const auto* e = doc.find("vibrational", "energies_cm")) {
        for (const auto& row : e->table(2)) f.vib_energies_cm.push_back(row[1]);
    }
    f.dipoles = VibDipoleMatrix(f.vmax);
    if (const auto* e = doc.find("dipoles", "matrix_D")) {
        for (const auto& row : e->table(3)) f.dipoles.set(static_cast<int>(row[0]), static_cast<int>(row[1]), row[2] * units::debye);
    }
    const auto& rows = doc.require("transitions", "table");
    for (const auto& row : rows.table(6)) {
        Transition t;
        t.upper = {static_cast<int>(row[0]), static_cast<int>(row[1])};
        t.lower = {static_cast<int>(row[2]), static_cast<int>(row[3])};
        t.A = row[5];
        if (std::abs(t.upper.N - t.lower.N) != 1) rows.fail("transition " + to_string(t.upper) + " -> " + to_string(t.lower) + " violates Delta N = +-1");
        if (!(t.A >= 0.0)) rows.fail("negative A coefficient");
        if (basis) {
            const double de = basis->energy(t.upper) - basis->energy(t.lower);
            if (!(de > 0.0)) rows.fail("transition " + to_string(t.upper) + " -> " + to_string(t.lower) + " is not downward");
            t.frequency_Hz = de / units::planck;
        } else {
            t.frequency_Hz = row[4] * units::wavenumber_to_hertz;
        }
        f.table.transitions.push_back(t);
    }
    return f;
}

inline LinesFile load_lines(const std::filesystem::path& path, const LevelBasis* basis = nullptr) {
    return lines_from_document(ConfigDocument::load(path), basis);
}

// ---------------------------------------------------------------------------
// CSV exports
// ---------------------------------------------------------------------------

inline std::string trajectory_csv(const Trajectory& traj, const std::vector<RovibLevel>& levels) {
    std::ostringstream out;
    out << "time_s";
    for (const auto& l : levels) out << "," << to_string(l);
    out << "\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        out << format_sig(traj.times[k]);
        const auto& p = traj.states[k].populations;
        for (Eigen::Index i = 0; i < p.size(); ++i) out << "," << format_sig(p[i]);
        out << "\n";
    }
    return out.str();
}

/// Rows of (time_s, N, population) for v = 0, then one row labelled
/// "excited" holding the v > 0 total.
inline std::string snapshot_csv(const std::vector<DistributionSnapshot>& snaps) {
    std::ostringstream out;
    out << "time_s,N,population\n";
    for (const auto& s : snaps) {
        for (std::size_t N = 0; N < s.ground_vib_by_N.size(); ++N)
            out << format_sig(s.time) << "," << N << "," << format_sig(s.ground_vib_by_N[N]) << "\n";
        out << format_sig(s.time) << ",excited," << format_sig(s.excited_vib) << "\n";
    }
    return out.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(path.string() + ": cannot open for writing");
    out << text;
    if (!out) throw ConfigError(path.string() + ": write failed");
}

}  // namespace bbrcool
