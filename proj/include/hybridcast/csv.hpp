#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hybridcast/error.hpp"

namespace hybridcast::csv {

using Row = std::vector<std::string>;

/// RFC-4180 reader: comma separated, double-quote escaping, CRLF or LF
/// record terminators, optional UTF-8 byte order mark. Blank lines are
/// skipped.
[[nodiscard]] inline std::vector<Row> parse(std::string_view text) {
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") {
        text.remove_prefix(3);
    }
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        if (!(row.size() == 1 && row.front().empty())) {
            rows.push_back(std::move(row));
        }
        row.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
            case '"':
                if (field_started && !field.empty()) {
                    throw Error(ErrorCode::ingest, "line " + std::to_string(line) + ": stray quote inside unquoted field");
                }
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
                end_row();
                ++line;
                break;
            case '\n':
                end_row();
                ++line;
                break;
            default:
                field.push_back(ch);
                field_started = true;
        }
    }
    if (in_quotes) {
        throw Error(ErrorCode::ingest, "unterminated quoted field at end of input");
    }
    if (field_started || !field.empty() || !row.empty()) {
        end_row();
    }
    return rows;
}

/// Quotes a field only when it contains a delimiter, quote or newline.
[[nodiscard]] inline std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

}  // namespace hybridcast::csv
