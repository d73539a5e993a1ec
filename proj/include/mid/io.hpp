#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mid/errors.hpp"

namespace mid::io {

/// Shortest round-trip decimal representation (std::to_chars); the single
/// formatting path keeps artifact files byte-reproducible.
std::string fmt_double(double v);

double parse_double(const std::string& s, const std::string& context);

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Comma-separated, first line is the header, no quoting or escapes.
/// Throws ParseError with file and line on ragged rows.
Csv read_csv(const std::filesystem::path& path);

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace mid::io
