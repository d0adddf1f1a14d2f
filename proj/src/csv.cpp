#include "spfactor/csv.hpp"

#include <charconv>
#include <istream>

#include "spfactor/errors.hpp"

namespace spfactor::csv {

bool getline(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

namespace {
[[noreturn]] void fail(const std::string& token, const std::string& file,
                       std::size_t lineno, const std::string& field,
                       const char* what) {
  throw ValidationError(file + " line " + std::to_string(lineno) + ": " +
                        what + " for field '" + field + "': '" + token + "'");
}
}  // namespace

long parse_int(const std::string& token, const std::string& file,
               std::size_t lineno, const std::string& field) {
  long value = 0;
  const char* first = token.data();
  const char* last = first + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || token.empty()) {
    fail(token, file, lineno, field, "expected integer");
  }
  return value;
}

double parse_double(const std::string& token, const std::string& file,
                    std::size_t lineno, const std::string& field) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || token.empty()) {
    fail(token, file, lineno, field, "expected number");
  }
  return value;
}

}  // namespace spfactor::csv
