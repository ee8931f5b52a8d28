// Copyright 2026 The qepi Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file dataio.hpp
 * Tabular datasets: CSV ingestion and export, and a synthetic two-cluster
 * generator shaped like the epitope descriptor data.
 *
 * CSV layout: UTF-8, comma-separated, one header row, a column named
 * "label" holding {0,1} or {-1,+1}; every other column is a feature, kept in
 * header order.
 */
#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "labels.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace qepi {

struct Dataset {
    Matrix features;
    Labels labels;
    std::vector<std::string> feature_names;
    std::string source;

    [[nodiscard]] std::size_t size() const { return labels.size(); }
    [[nodiscard]] std::size_t n_features() const { return static_cast<std::size_t>(features.cols()); }
};

struct ClassCounts {
    std::size_t n_pos{0};
    std::size_t n_neg{0};
};

inline ClassCounts class_counts(const Dataset &ds) {
    ClassCounts c;
    for (int v : ds.labels) {
        (v == 1 ? c.n_pos : c.n_neg) += 1;
    }
    return c;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            return cells;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

inline bool parse_double(std::string_view s, double &out) {
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    if (s.empty()) {
        return false;
    }
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace detail

/// Parses CSV text; `source` names the input in errors and provenance.
inline Dataset parse_csv(std::istream &in, const std::string &source,
                         std::ostream *log = nullptr) {
    std::string line;
    if (!std::getline(in, line) || detail::trim(line).empty()) {
        throw ParseError(source + ": empty file");
    }
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
    std::vector<std::string> header;
    for (auto cell : detail::split_csv_line(line)) {
        header.emplace_back(cell);
    }
    std::ptrdiff_t label_col = -1;
    Dataset ds;
    ds.source = source;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "label") {
            if (label_col >= 0) {
                throw ParseError(source + ": duplicate label column");
            }
            label_col = static_cast<std::ptrdiff_t>(c);
        } else {
            ds.feature_names.emplace_back(header[c]);
        }
    }
    if (label_col < 0) {
        throw ParseError(source + ": missing 'label' column");
    }
    const std::size_t width = header.size();
    const std::size_t d = ds.feature_names.size();

    std::vector<double> values;
    std::vector<double> raw_labels;
    std::size_t row = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        ++row;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != width) {
            throw ParseError(source + ": row " + std::to_string(row) + " (line " +
                             std::to_string(line_no) + ") has " + std::to_string(cells.size()) +
                             " cells, header has " + std::to_string(width));
        }
        for (std::size_t c = 0; c < width; ++c) {
            double v = 0.0;
            if (!detail::parse_double(cells[c], v) || !std::isfinite(v)) {
                throw ParseError(source + ": cannot parse '" + std::string(cells[c]) +
                                 "' at row " + std::to_string(row) + ", column '" +
                                 header[c] + "'");
            }
            if (static_cast<std::ptrdiff_t>(c) == label_col) {
                raw_labels.push_back(v);
            } else {
                values.push_back(v);
            }
        }
    }
    if (row == 0) {
        throw ParseError(source + ": no data rows");
    }

    bool has_zero = false;
    bool has_minus = false;
    for (std::size_t r = 0; r < raw_labels.size(); ++r) {
        const double v = raw_labels[r];
        if (v == 0.0) {
            has_zero = true;
        } else if (v == -1.0) {
            has_minus = true;
        } else if (v != 1.0) {
            throw ParseError(source + ": label at row " + std::to_string(r + 1) +
                             " must be 0/1 or -1/+1");
        }
    }
    if (has_zero && has_minus) {
        throw ParseError(source + ": mixed label conventions (both 0 and -1 present)");
    }
    ds.labels.reserve(row);
    for (double v : raw_labels) {
        ds.labels.push_back(v == 1.0 ? 1 : -1);
    }
    ds.features = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(row),
                                           static_cast<Eigen::Index>(d));
    if (log != nullptr) {
        const auto cc = class_counts(ds);
        *log << source << ": " << row << " rows, " << d << " features, " << cc.n_pos
             << " positive, " << cc.n_neg << " negative\n";
    }
    return ds;
}

inline Dataset load_csv(const std::string &path, std::ostream *log = nullptr) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path);
    }
    return parse_csv(in, path, log);
}

/// Writes features then a trailing "label" column in {-1,+1}.
inline void write_csv(std::ostream &out, const Dataset &ds) {
    for (const auto &name : ds.feature_names) {
        out << name << ',';
    }
    out << "label\n";
    for (Eigen::Index r = 0; r < ds.features.rows(); ++r) {
        for (Eigen::Index c = 0; c < ds.features.cols(); ++c) {
            out << detail::format_double(ds.features(r, c)) << ',';
        }
        out << ds.labels[static_cast<std::size_t>(r)] << '\n';
    }
}

inline void save_csv(const Dataset &ds, const std::string &path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path);
    }
    write_csv(out, ds);
}

/**
 * Two spherical unit-variance Gaussian clusters in d dimensions whose means
 * sit at +/- separation/2 along the diagonal direction (1,...,1)/sqrt(d), so
 * the mean distance is `separation`. round(n * pos_fraction) samples
 * (halves up) are positive; rows are shuffled.
 */
inline Dataset generate_synthetic(std::size_t n, std::size_t d, double pos_fraction,
                                  double separation, std::uint64_t rng_seed) {
    if (n < 2) {
        throw DomainError("synthetic dataset needs n >= 2");
    }
    if (d < 1) {
        throw DomainError("synthetic dataset needs d >= 1");
    }
    if (!(pos_fraction > 0.0 && pos_fraction < 1.0)) {
        throw DomainError("pos_fraction must lie in (0, 1)");
    }
    if (!(separation >= 0.0)) {
        throw DomainError("separation must be nonnegative");
    }
    const auto n_pos = static_cast<std::size_t>(std::floor(static_cast<double>(n) * pos_fraction + 0.5));
    Rng rng(rng_seed);
    Labels labels(n, -1);
    for (std::size_t i = 0; i < n_pos; ++i) {
        labels[i] = 1;
    }
    rng.shuffle(labels);

    const double offset = 0.5 * separation / std::sqrt(static_cast<double>(d));
    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                labels[r] * offset + rng.normal();
        }
    }
    ds.labels = std::move(labels);
    for (std::size_t c = 0; c < d; ++c) {
        ds.feature_names.push_back("f" + std::to_string(c));
    }
    std::ostringstream src;
    src << "synthetic(n=" << n << ";d=" << d << ";pos_frac=" << detail::format_double(pos_fraction)
        << ";separation=" << detail::format_double(separation) << ";seed=" << rng_seed << ")";
    ds.source = src.str();
    return ds;
}

} // namespace qepi
