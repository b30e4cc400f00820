#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tsgen::detail {

struct CsvRow {
    std::vector<std::string> fields;
    std::size_t line_no = 0;  // 1-based line of the first byte of the row
};

// RFC 4180 style: quoted fields may contain commas, doubled quotes and
// newlines. CRLF and a UTF-8 BOM are tolerated.
std::vector<CsvRow> parse_csv(std::string_view content);

std::string csv_escape(std::string_view field);

}  // namespace tsgen::detail
