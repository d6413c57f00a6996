#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace swreg::csv {

/// Splits a line on commas and trims surrounding whitespace from each field.
std::vector<std::string> split_fields(const std::string& line);

/// All lines of a text file that are neither blank nor `#` comments.
std::vector<std::string> read_lines(const std::string& path);

/// Whole-field numeric parses; throw DataError on anything else.
double parse_double(const std::string& field);
long long parse_int(const std::string& field);

/// Headerless numeric CSV as a dense matrix. Ragged rows are an error.
Eigen::MatrixXd read_numeric_matrix(const std::string& path);

/// Shortest decimal form that round-trips the exact double value.
std::string format_double(double v);

}  // namespace swreg::csv
