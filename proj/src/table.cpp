#include "robust_kalman/table.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "robust_kalman/errors.hpp"

namespace robust_kalman {

void Table::add_row(std::vector<double> row) {
    if (row.size() != columns.size())
        throw ContractViolation("row width does not match the table header");
    rows.push_back(std::move(row));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out += ',';
        out += table.columns[c];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += format_double(row[c]);
        }
        out += '\n';
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open output file: " + path);
    file << text;
    if (!file) throw IoError("failed writing output file: " + path);
}

std::vector<VectorXd> read_vectors_csv(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open input file: " + path);
    std::vector<VectorXd> out;
    std::string line;
    Eigen::Index dim = -1;
    std::size_t line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        std::vector<double> values;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t consumed = 0;
                const double v = std::stod(cell, &consumed);
                while (consumed < cell.size() &&
                       (cell[consumed] == ' ' || cell[consumed] == '\t'))
                    ++consumed;
                if (consumed != cell.size()) throw std::invalid_argument(cell);
                values.push_back(v);
            } catch (const std::exception&) {
                throw IoError("bad numeric cell '" + cell + "' at " + path + ":" +
                              std::to_string(line_no));
            }
        }
        if (values.empty()) continue;
        if (dim < 0) dim = static_cast<Eigen::Index>(values.size());
        if (static_cast<Eigen::Index>(values.size()) != dim)
            throw IoError("inconsistent row width at " + path + ":" + std::to_string(line_no));
        VectorXd v(dim);
        for (Eigen::Index i = 0; i < dim; ++i) v[i] = values[static_cast<std::size_t>(i)];
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace robust_kalman
