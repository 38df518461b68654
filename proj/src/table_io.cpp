#include "srsim/table_io.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace srsim {

TableWriter::TableWriter(const std::string& path,
                         const std::vector<std::string>& metadata,
                         const std::vector<std::string>& columns)
    : out_(path), n_columns_(columns.size()), path_(path) {
    if (!out_)
        throw std::runtime_error("TableWriter: cannot open " + path);
    for (const auto& line : metadata)
        out_ << "# " << line << "\n";
    for (std::size_t k = 0; k < columns.size(); ++k)
        out_ << columns[k] << (k + 1 < columns.size() ? "," : "\n");
}

void TableWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != n_columns_)
        throw std::invalid_argument("TableWriter: row width mismatch in " + path_);
    for (std::size_t k = 0; k < cells.size(); ++k)
        out_ << cells[k] << (k + 1 < cells.size() ? "," : "\n");
    if (!out_)
        throw std::runtime_error("TableWriter: write failed for " + path_);
}

std::string TableWriter::num(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

TableData read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_table: cannot open " + path);
    TableData data;
    std::string line;
    bool have_columns = false;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (line[0] == '#') {
            std::string meta = line.substr(1);
            if (!meta.empty() && meta[0] == ' ')
                meta.erase(0, 1);
            data.metadata.push_back(meta);
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (!have_columns) {
            data.columns = cells;
            have_columns = true;
        } else {
            data.rows.push_back(cells);
        }
    }
    return data;
}

}
