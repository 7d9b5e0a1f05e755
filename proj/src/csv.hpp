#pragma once

// Minimal CSV support for the dataset file formats: comma separated,
// no quoting, first row is the header. Shared by dataset and experiment
// code only.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace lmcar::detail {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

/// Reads the whole file; a missing file or empty header is reported in
/// issues and yields an empty table. Blank trailing lines are ignored.
inline CsvTable read_csv(const std::filesystem::path& path,
                         std::vector<std::string>& issues) {
    CsvTable table;
    std::ifstream in(path);
    if (!in) {
        issues.push_back("cannot open " + path.string());
        return table;
    }
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_fields(line);
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) {
        issues.push_back(path.string() + ": empty file, expected a header row");
    }
    return table;
}

} // namespace lmcar::detail
