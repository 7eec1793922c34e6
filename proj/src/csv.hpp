#ifndef CSCD_SRC_CSV_HPP
#define CSCD_SRC_CSV_HPP

#include <string>
#include <vector>

namespace cscd::csv {

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
/// Returns false on an unterminated quote.
bool split_record(const std::string& line, std::vector<std::string>& fields);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(const std::string& field);

std::string trim(const std::string& s);

} // namespace cscd::csv

#endif
