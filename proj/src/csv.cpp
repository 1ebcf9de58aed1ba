#include "loopclean/csv.hpp"

#include <charconv>
#include <cstdio>

#include "loopclean/errors.hpp"

namespace loopclean {

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

bool is_comment_line(std::string_view line) { return !line.empty() && line.front() == '#'; }

std::ofstream open_csv_output(const std::string& path, std::string_view annotations) {
  std::ofstream out(path);
  if (!out) throw FileUnreadable("cannot open for writing: " + path);
  out << kFormatComment;
  if (!annotations.empty()) out << ' ' << annotations;
  out << '\n';
  return out;
}

std::ifstream open_csv_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileUnreadable("cannot open: " + path);
  return in;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_fixed(double v, int places) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

}  // namespace loopclean
