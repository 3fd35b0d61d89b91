#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace newsky::ratings {

// RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF. A UTF-8 BOM on
// the first record is dropped.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    /// Next record, or nullopt at end of input. Blank lines are skipped.
    std::optional<std::vector<std::string>> next();
    /// 1-based line number where the last returned record started.
    std::size_t line() const { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 1;
    std::size_t record_line_ = 0;
    bool first_ = true;
};

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

}  // namespace newsky::ratings
