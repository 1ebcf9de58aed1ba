#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace loopclean {

// Every file this tool writes starts with one of these comment lines.
inline constexpr std::string_view kFormatComment = "# loopclean-format 1";

// Splits one CSV line on commas. Fields in our formats never contain commas
// or quotes, so no quoting is supported.
std::vector<std::string_view> split_fields(std::string_view line, char delim = ',');

bool is_comment_line(std::string_view line);

// Opens a file for writing and emits the format-version comment, optionally
// followed by " key=value" annotations. Throws FileUnreadable on failure.
std::ofstream open_csv_output(const std::string& path, std::string_view annotations = {});

// Opens a file for reading; throws FileUnreadable on failure.
std::ifstream open_csv_input(const std::string& path);

// Shortest decimal string that round-trips the value exactly.
std::string format_double(double v);
// Fixed-precision decimal string, e.g. format_fixed(1.5, 6) -> "1.500000".
std::string format_fixed(double v, int places);

}  // namespace loopclean
