#pragma once

/// @file io.hpp
/// Deterministic text output. Every artifact the command-line front end
/// writes is plain text built from these helpers: shortest-exact numeric
/// formatting, an audit header carrying the fully resolved configuration,
/// and whole-file writes that fail loudly.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ard {

/// Decimal form of x with enough digits to round-trip ("%.17g"). NaN prints
/// as "nan" and infinities as "inf"/"-inf"; output never contains commas.
inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Ordered (key, value) pairs of a resolved configuration.
using AuditEntries = std::vector<std::pair<std::string, std::string>>;

/// '#'-prefixed block naming the command and listing every resolved
/// configuration entry. Prepended to each CSV so the file records the exact
/// spec that produced it.
inline std::string audit_header(const std::string& command, const AuditEntries& entries) {
    std::string out = "# ard " + command + "\n";
    for (const auto& [key, value] : entries) out += "# " + key + " = " + value + "\n";
    return out;
}

/// Wrap a cell in double quotes when it contains a comma. Cell text never
/// contains quotes or newlines, so no escaping is needed.
inline std::string csv_quote(const std::string& cell) {
    if (cell.find(',') == std::string::npos) return cell;
    return '"' + cell + '"';
}

/// One CSV row. Cells are written verbatim: no quoting, values by
/// construction contain neither commas nor newlines.
inline std::string csv_row(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    out += '\n';
    return out;
}

/// Write content to path, truncating any previous file. Throws on failure.
inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("short write: " + path.string());
}

}  // namespace ard
