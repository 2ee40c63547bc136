#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ghostvar/dataset.hpp"
#include "ghostvar/error.hpp"

namespace ghostvar {

/// 17 significant digits, '.' decimal separator; parses back bit-exactly.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return {buf, res.ptr};
}

inline bool parse_double(std::string_view text, double& out) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size() && std::isfinite(out);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(std::move(cur));
    return cells;
}

}  // namespace detail

/// Reads a header + numeric-rows CSV; `response` names the response column.
/// Feature columns keep file order. Row/column numbers in errors are 1-based,
/// with the header as row 1.
inline Dataset read_csv(std::istream& in, const std::string& response) {
    std::string line;
    if (!std::getline(in, line) || line.find_first_not_of(" \t\r") == std::string::npos)
        fail(ErrorCode::EmptyFile, "CSV input has no header row");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
    const std::vector<std::string> header = detail::split_csv_line(line);
    std::size_t response_col = header.size();
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == response) response_col = c;
    if (response_col == header.size())
        fail(ErrorCode::MissingResponseColumn, "response column '" + response + "' not in header");

    std::vector<std::string> names;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != response_col) names.push_back(header[c]);

    Vector values;
    Vector y;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            fail(ErrorCode::ParseError, "row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                            " cells, header has " + std::to_string(header.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            if (!parse_double(cells[c], v))
                fail(ErrorCode::ParseError, "row " + std::to_string(row) + ", column " + std::to_string(c + 1) +
                                                " ('" + header[c] + "'): not a number: '" + cells[c] + "'");
            if (c == response_col)
                y.push_back(v);
            else
                values.push_back(v);
        }
    }
    if (y.empty()) fail(ErrorCode::EmptyFile, "CSV input has no data rows");
    const std::size_t n = y.size();
    return {std::move(names), Matrix(n, header.size() - 1, std::move(values)), std::move(y), response};
}

inline Dataset ingest_csv(const std::string& path, const std::string& response) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::EmptyFile, "cannot open '" + path + "'");
    return read_csv(in, response);
}

/// Header row of names, then one row per observation.
inline void write_matrix_csv(std::ostream& out, const std::vector<std::string>& names, const Matrix& x) {
    for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
    out << '\n';
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) out << (j ? "," : "") << format_double(x(i, j));
        out << '\n';
    }
}

/// Features followed by the response column.
inline void write_csv(std::ostream& out, const Dataset& d) {
    for (const auto& name : d.names) out << name << ',';
    out << d.response_name << '\n';
    for (std::size_t i = 0; i < d.rows(); ++i) {
        for (std::size_t j = 0; j < d.cols(); ++j) out << format_double(d.features(i, j)) << ',';
        out << format_double(d.response[i]) << '\n';
    }
}

inline void export_csv(const std::string& path, const Dataset& d) {
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorCode::InvalidArgument, "cannot write '" + path + "'");
    write_csv(out, d);
}

}  // namespace ghostvar
