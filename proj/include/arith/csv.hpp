#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace arith {

// Quotes a field when it contains a comma, quote or newline.
std::string csv_field(const std::string& text);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// "# key=value" line.
void write_csv_comment(std::ostream& out, const std::string& text);

}  // namespace arith
