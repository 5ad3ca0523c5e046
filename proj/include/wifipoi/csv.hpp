#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wifipoi::csv {

/// Quotes the field when it holds a comma, quote or line break.
std::string escape(std::string_view field);

/// Splits one CSV record, honouring double-quoted fields.
std::vector<std::string> split(std::string_view line);

}  // namespace wifipoi::csv
