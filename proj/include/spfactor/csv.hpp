#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spfactor::csv {

// std::getline that also strips a trailing '\r' so CRLF inputs parse.
bool getline(std::istream& in, std::string& line);

std::vector<std::string> split(const std::string& line, char sep = ',');

// Strict numeric parsing; errors carry file kind, line number, and field name.
long parse_int(const std::string& token, const std::string& file,
               std::size_t lineno, const std::string& field);
double parse_double(const std::string& token, const std::string& file,
                    std::size_t lineno, const std::string& field);

}  // namespace spfactor::csv
