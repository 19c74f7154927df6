// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "squidsim/errors.hpp"

namespace squidsim {

/// 17 significant digits: round-trip exact for IEEE doubles.
inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Column-major numeric table, the shape of every CSV this project emits.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> cols;

    std::size_t rows() const { return cols.empty() ? 0 : cols.front().size(); }

    void add(std::string name, std::vector<double> values) {
        if (!cols.empty() && values.size() != cols.front().size())
            throw std::invalid_argument("Table::add: column length mismatch");
        columns.push_back(std::move(name));
        cols.push_back(std::move(values));
    }

    bool has(const std::string& name) const {
        for (const auto& c : columns)
            if (c == name) return true;
        return false;
    }

    const std::vector<double>& col(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return cols[i];
        throw std::invalid_argument("Table::col: no column named " + name);
    }
};

inline void write_csv(std::ostream& os, const Table& t) {
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? "," : "") << t.columns[i];
    os << '\n';
    const std::size_t n = t.rows();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < t.cols.size(); ++i)
            os << (i ? "," : "") << format_g17(t.cols[i][r]);
        os << '\n';
    }
}

inline void write_csv_file(const std::string& path, const Table& t) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_csv(os, t);
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline Table read_csv(std::istream& is, const std::string& origin = "<stream>") {
    std::string line;
    if (!std::getline(is, line)) throw ParseError(origin + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    Table t;
    std::stringstream hdr(line);
    std::string cell;
    while (std::getline(hdr, cell, ',')) t.columns.push_back(cell);
    if (t.columns.empty()) throw ParseError(origin + ": no header columns");
    t.cols.assign(t.columns.size(), {});

    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t pos = 0, field = 0, end = 0;
        while (field < t.columns.size()) {
            end = line.find(',', pos);
            if (end == std::string::npos) end = line.size();
            double v = 0.0;
            const char* first = line.data() + pos;
            const char* last = line.data() + end;
            auto [p, ec] = std::from_chars(first, last, v);
            if (ec != std::errc{} || p != last)
                throw ParseError(origin + ":" + std::to_string(lineno) + ": bad number '" +
                                 line.substr(pos, end - pos) + "'");
            t.cols[field].push_back(v);
            ++field;
            pos = end + 1;
            if (end == line.size()) break;
        }
        if (field != t.columns.size() || end < line.size())
            throw ParseError(origin + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(t.columns.size()) + " fields");
    }
    return t;
}

inline Table read_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open: " + path);
    return read_csv(is, path);
}

}  // namespace squidsim
