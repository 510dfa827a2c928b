#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lorentz {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text);

/// Comma-separated table with "# key=value" metadata lines before the header.
struct CsvTable {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Value of a metadata key; throws DomainError when missing.
    [[nodiscard]] const std::string& meta_value(std::string_view key) const;
    [[nodiscard]] bool has_meta(std::string_view key) const;
};

CsvTable read_csv(const std::filesystem::path& path);
std::vector<std::string> split(std::string_view line, char sep = ',');

}  // namespace lorentz
