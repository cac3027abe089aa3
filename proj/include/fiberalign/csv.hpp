#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fiberalign {

// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

std::optional<double> parse_double(std::string_view text) noexcept;
std::optional<std::int64_t> parse_int(std::string_view text) noexcept;

// Splits on ','; no quoting. A trailing '\r' is dropped first.
std::vector<std::string_view> split_csv(std::string_view line);

}  // namespace fiberalign
