#ifndef DYADSCREEN_TEXT_FORMAT_H_
#define DYADSCREEN_TEXT_FORMAT_H_

#include <string>
#include <string_view>
#include <vector>

namespace dyadscreen {

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);
// Fixed-point with `digits` decimals.
std::string format_fixed(double value, int digits);
// Strict double parse of the whole field; accepts "inf", "-inf", "nan".
bool parse_double(std::string_view text, double& value);

// RFC 4180 CSV field quoting and line splitting.
std::string csv_escape(std::string_view field);
std::string csv_join(const std::vector<std::string>& fields);
std::vector<std::string> csv_split(std::string_view line);

}  // namespace dyadscreen

#endif  // DYADSCREEN_TEXT_FORMAT_H_
