#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hyprl::io {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 if absent
};

// Reads a comma-separated file with a header row. Throws std::runtime_error
// on a missing file or ragged rows. Cells are not unescaped; the formats in
// this project never contain commas or quotes.
CsvTable read_csv(const std::filesystem::path& path);

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Shortest representation that round-trips an IEEE double exactly.
std::string format_double(double v);

// Strict double parse; `context` names the cell in the error message.
double parse_double(const std::string& cell, const std::string& context);

// Strict integer parse.
long long parse_int(const std::string& cell, const std::string& context);

}  // namespace hyprl::io
