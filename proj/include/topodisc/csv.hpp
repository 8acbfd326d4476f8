#pragma once

#include <filesystem>
#include <functional>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace topodisc {

/// Splits one CSV line (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line);

/// Streams rows of a headed CSV. `on_row` receives the 1-based data line
/// number and the fields. Returns the header.
std::vector<std::string> read_csv(std::istream& in,
                                  const std::function<void(std::size_t, std::span<const std::string>)>& on_row);
std::vector<std::string> read_csv(const std::filesystem::path& path,
                                  const std::function<void(std::size_t, std::span<const std::string>)>& on_row);
std::vector<std::string> read_csv_header(const std::filesystem::path& path);

}  // namespace topodisc
