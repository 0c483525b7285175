#pragma once

#include <string>
#include <vector>

#include "robust_kalman/linalg.hpp"

namespace robust_kalman {

/// Plot-ready numeric table: a header row plus double-valued rows.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::vector<double> row);
};

/// Shortest 17-significant-digit decimal rendering; round-trips 64-bit floats
/// exactly and is locale-independent.
std::string format_double(double v);

/// RFC-4180-style CSV: header row, '.' decimal separator, LF line endings.
std::string to_csv(const Table& table);

/// Writes text to path ("-" writes to stdout). Throws IoError on failure.
void write_text_file(const std::string& path, const std::string& text);

/// Reads one vector per CSV row; blank lines and lines starting with '#' are
/// skipped. All rows must share a dimension.
std::vector<VectorXd> read_vectors_csv(const std::string& path);

}  // namespace robust_kalman
