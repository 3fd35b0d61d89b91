#include "newsky/ratings/csv.hpp"

namespace newsky::ratings {

std::optional<std::vector<std::string>> CsvReader::next() {
    while (true) {
        std::vector<std::string> fields;
        std::string field;
        bool in_quotes = false;
        bool any = false;
        record_line_ = line_;
        int c = 0;
        while ((c = in_.get()) != std::char_traits<char>::eof()) {
            any = true;
            const char ch = static_cast<char>(c);
            if (in_quotes) {
                if (ch == '"') {
                    if (in_.peek() == '"') {
                        field += '"';
                        in_.get();
                    } else {
                        in_quotes = false;
                    }
                } else {
                    if (ch == '\n') ++line_;
                    field += ch;
                }
                continue;
            }
            if (ch == '"') {
                in_quotes = true;
            } else if (ch == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else if (ch == '\n') {
                ++line_;
                break;
            } else if (ch != '\r') {
                field += ch;
            }
        }
        if (!any) return std::nullopt;
        fields.push_back(std::move(field));
        if (first_) {
            first_ = false;
            if (fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
        }
        if (fields.size() == 1 && fields[0].empty()) continue;
        return fields;
    }
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace newsky::ratings
