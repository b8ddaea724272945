#pragma once

// Sectioned key-value text format shared by molecule, scenario and
// transition-table files:
//
//   # comment
//   version = 1
//   [section]
//   key = value            # trailing comments allowed
//   table_key =            # numeric rows that follow belong to table_key
//     1.20   3150.0
//     1.25   2400.0
//
// A line whose first token parses as a number is a table row of the
// preceding key. Keys are unique within a section.

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "bbrcool/errors.hpp"

namespace bbrcool {

inline std::optional<double> parse_double(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ',')) ++i;
        const std::size_t start = i;
        while (i < s.size() && !(s[i] == ' ' || s[i] == '\t' || s[i] == ',')) ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

struct ConfigEntry {
    std::string key;
    std::string value;
    std::string source;
    int line = 0;
    std::vector<std::vector<double>> rows;

    std::string where() const { return source + ":" + std::to_string(line); }

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where() + ": " + key + ": " + msg); }

    double as_double() const {
        if (auto v = parse_double(trim(value))) return *v;
        fail("expected a number, got '" + value + "'");
    }

    int as_int() const {
        const auto s = trim(value);
        int v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) fail("expected an integer, got '" + value + "'");
        return v;
    }

    bool as_bool() const {
        const auto s = trim(value);
        if (s == "true" || s == "yes" || s == "1") return true;
        if (s == "false" || s == "no" || s == "0") return false;
        fail("expected true/false, got '" + value + "'");
    }

    std::vector<double> as_doubles() const {
        std::vector<double> out;
        for (auto tok : split_ws(value)) {
            auto v = parse_double(tok);
            if (!v) fail("expected numbers, got '" + std::string(tok) + "'");
            out.push_back(*v);
        }
        return out;
    }

    std::vector<std::string> as_words() const {
        std::vector<std::string> out;
        for (auto tok : split_ws(value)) out.emplace_back(tok);
        return out;
    }

    /// Table rows, each required to have `columns` values.
    const std::vector<std::vector<double>>& table(std::size_t columns) const {
        if (rows.empty()) fail("expected a table of numeric rows after the key");
        for (const auto& r : rows) {
            if (r.size() != columns) fail("table rows must have " + std::to_string(columns) + " columns");
        }
        return rows;
    }
};

struct ConfigSection {
    std::string name;  // empty for keys before the first header
    int line = 0;
    std::vector<ConfigEntry> entries;

    const ConfigEntry* find(std::string_view key) const {
        for (const auto& e : entries)
            if (e.key == key) return &e;
        return nullptr;
    }
};

class ConfigDocument {
public:
    static ConfigDocument parse(std::string_view text, std::string source) {
        ConfigDocument doc;
        doc.source_ = std::move(source);
        doc.sections_.push_back({"", 0, {}});
        std::istringstream in{std::string(text)};
        std::string raw;
        int line_no = 0;
        ConfigEntry* last = nullptr;
        while (std::getline(in, raw)) {
            ++line_no;
            std::string_view line = raw;
            if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            auto at = [&](const std::string& msg) { return ConfigError(doc.source_ + ":" + std::to_string(line_no) + ": " + msg); };

            if (line.front() == '[') {
                if (line.back() != ']') throw at("unterminated section header");
                std::string name(trim(line.substr(1, line.size() - 2)));
                if (name.empty()) throw at("empty section name");
                for (const auto& s : doc.sections_)
                    if (s.name == name) throw at("duplicate section [" + name + "]");
                doc.sections_.push_back({name, line_no, {}});
                last = nullptr;
                continue;
            }

            const auto tokens = split_ws(line);
            if (!tokens.empty() && parse_double(tokens.front())) {
                if (!last) throw at("numeric row without a preceding table key");
                std::vector<double> row;
                for (auto tok : tokens) {
                    auto v = parse_double(tok);
                    if (!v) throw at("non-numeric value '" + std::string(tok) + "' in table row");
                    row.push_back(*v);
                }
                last->rows.push_back(std::move(row));
                continue;
            }

            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw at("expected 'key = value'");
            std::string key(trim(line.substr(0, eq)));
            if (key.empty()) throw at("missing key before '='");
            auto& section = doc.sections_.back();
            if (section.find(key)) throw at("duplicate key '" + key + "'");
            section.entries.push_back({key, std::string(trim(line.substr(eq + 1))), doc.source_, line_no, {}});
            last = &section.entries.back();
        }
        return doc;
    }

    static ConfigDocument load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError(path.string() + ": cannot open file");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path.string());
    }

    const std::string& source() const { return source_; }
    const std::vector<ConfigSection>& sections() const { return sections_; }

    const ConfigSection* section(std::string_view name) const {
        for (const auto& s : sections_)
            if (s.name == name) return &s;
        return nullptr;
    }

    bool has_section(std::string_view name) const { return section(name) != nullptr; }

    const ConfigEntry* find(std::string_view sec, std::string_view key) const {
        const auto* s = section(sec);
        return s ? s->find(key) : nullptr;
    }

    const ConfigEntry& require(std::string_view sec, std::string_view key) const {
        if (const auto* e = find(sec, key)) return *e;
        const std::string where = sec.empty() ? "top level" : "[" + std::string(sec) + "]";
        throw ConfigError(source_ + ": missing required key '" + std::string(key) + "' in " + where);
    }

    /// Rejects sections and keys that are not in the schema.
    void check_schema(const std::map<std::string, std::set<std::string>>& schema) const {
        for (const auto& s : sections_) {
            const auto it = schema.find(s.name);
            if (it == schema.end()) {
                if (s.name.empty() && s.entries.empty()) continue;
                throw ConfigError(source_ + ":" + std::to_string(s.line) + ": unknown section [" + s.name + "]");
            }
            for (const auto& e : s.entries) {
                if (!it->second.count(e.key)) {
                    throw ConfigError(e.where() + ": unknown key '" + e.key + "'" +
                                      (s.name.empty() ? std::string() : " in [" + s.name + "]"));
                }
                if (!e.rows.empty() && !e.value.empty()) {
                    throw ConfigError(e.where() + ": key '" + e.key + "' mixes an inline value with table rows");
                }
            }
        }
    }

    void require_version(int expected) const {
        const auto& e = require("", "version");
        if (e.as_int() != expected) {
            e.fail("unsupported schema version " + e.value + " (expected " + std::to_string(expected) + ")");
        }
    }

private:
    std::string source_;
    std::vector<ConfigSection> sections_;
};

}  // namespace bbrcool
