#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace srsim {

/// Comma-separated table with '#'-prefixed metadata header lines. Numeric
/// formatting is fixed ("%.12g") so a rerun of the embedded configuration
/// reproduces the file bit-exactly.
class TableWriter {
public:
    TableWriter(const std::string& path, const std::vector<std::string>& metadata,
                const std::vector<std::string>& columns);

    void row(const std::vector<std::string>& cells);

    static std::string num(double value);

private:
    std::ofstream out_;
    std::size_t n_columns_;
    std::string path_;
};

/// Rows of a CSV table plus its '#' metadata lines.
struct TableData {
    std::vector<std::string> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

TableData read_table(const std::string& path);

}
