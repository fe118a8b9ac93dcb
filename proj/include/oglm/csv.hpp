#ifndef OGLM_CSV_HPP
#define OGLM_CSV_HPP

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oglm/errors.hpp"
#include "oglm/types.hpp"

namespace oglm {

struct CsvParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return static_cast<int>(j);
        throw CsvParseError("csv: no column named '" + name + "'");
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

// UTF-8, comma-separated, header required, '.' decimal point; every data
// cell must parse as a finite real.
inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvParseError("csv: cannot open " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw CsvParseError("csv: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    table.header = split_csv_line(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != table.header.size())
            throw CsvParseError("csv: row " + std::to_string(lineno) + " has " +
                                std::to_string(cells.size()) + " cells, expected " +
                                std::to_string(table.header.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            double value = 0.0;
            const char* first = cells[j].data();
            const char* last = first + cells[j].size();
            const auto [ptr, ec] = std::from_chars(first, last, value);
            if (ec != std::errc{} || ptr != last || !std::isfinite(value))
                throw CsvParseError("csv: row " + std::to_string(lineno) + " column '" +
                                    table.header[j] + "' is not a finite real: '" + cells[j] +
                                    "'");
            row.push_back(value);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

// Assemble a dataset from named columns; logistic responses must be 0/1.
inline DataShard dataset_from_csv(const CsvTable& table, const std::string& response,
                                  const std::vector<std::string>& covariates,
                                  bool add_intercept, Family family) {
    const int yc = table.column(response);
    std::vector<int> xc;
    for (const auto& name : covariates) xc.push_back(table.column(name));
    const Eigen::Index m = static_cast<Eigen::Index>(table.rows.size());
    const Eigen::Index d = static_cast<Eigen::Index>(xc.size()) + (add_intercept ? 1 : 0);
    DataShard data;
    data.y.resize(m);
    data.X.resize(m, d);
    data.row_ids.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        const double y = row[static_cast<std::size_t>(yc)];
        if (family == Family::Logistic && y != 0.0 && y != 1.0)
            throw CsvParseError("csv: logistic response at data row " + std::to_string(i + 1) +
                                " is " + std::to_string(y) + ", expected 0 or 1");
        if (family == Family::Poisson && y < 0.0)
            throw CsvParseError("csv: poisson response at data row " + std::to_string(i + 1) +
                                " is negative");
        data.y(i) = y;
        Eigen::Index col = 0;
        if (add_intercept) data.X(i, col++) = 1.0;
        for (int c : xc) data.X(i, col++) = row[static_cast<std::size_t>(c)];
        data.row_ids[static_cast<std::size_t>(i)] = static_cast<std::uint64_t>(i);
    }
    return data;
}

inline void write_csv_dataset(const std::string& path, const DataShard& data,
                              const std::string& response,
                              const std::vector<std::string>& covariates) {
    if (static_cast<Eigen::Index>(covariates.size()) != data.X.cols())
        throw ShapeError("write_csv_dataset: covariate name count != d");
    std::ofstream out(path);
    if (!out) throw CsvParseError("csv: cannot write " + path);
    out.precision(17);
    out << response;
    for (const auto& name : covariates) out << "," << name;
    out << "\n";
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        out << data.y(i);
        for (Eigen::Index j = 0; j < data.X.cols(); ++j) out << "," << data.X(i, j);
        out << "\n";
    }
}

}  // namespace oglm

#endif  // OGLM_CSV_HPP
