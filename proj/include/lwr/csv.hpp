#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace lwr::csv {

/// Error carrying a 1-based line number (0 when not tied to a line).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& where, std::size_t line, const std::string& what)
        : std::runtime_error(where + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

/// Locale-independent parse of a full token as a double.
inline std::optional<double> parse_number(std::string_view token) {
    token = trim(token);
    if (token.empty()) return std::nullopt;
    if (token.front() == '+') token.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

/// Shortest round-trip representation, always with '.' as decimal point.
inline std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
    return std::string(buf, ptr);
}

/// Splits one CSV record. Supports double-quoted fields with "" escapes.
/// Returns nullopt when a quote is left open.
inline std::optional<std::vector<std::string>> split_record(std::string_view line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    if (quoted) return std::nullopt;
    fields.push_back(std::move(field));
    return fields;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // source line of each row
};

/// Reads a comma-separated file with one header row. Blank lines are skipped.
inline Table read_table(std::istream& in, const std::string& where) {
    Table table;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto fields = split_record(line);
        if (!fields) throw ParseError(where, line_no, "unterminated quoted field");
        if (!have_header) {
            for (auto& f : *fields) f = std::string(trim(f));
            table.header = std::move(*fields);
            have_header = true;
            continue;
        }
        if (fields->size() != table.header.size()) {
            throw ParseError(where, line_no,
                             "expected " + std::to_string(table.header.size()) + " fields, found " +
                                 std::to_string(fields->size()));
        }
        table.rows.push_back(std::move(*fields));
        table.line_numbers.push_back(line_no);
    }
    if (!have_header) throw ParseError(where, 0, "missing header row");
    return table;
}

inline Table read_table_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, 0, "cannot open file");
    return read_table(in, path);
}

inline std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

/// Accumulates CSV text. Numbers go through format_number.
class Writer {
public:
    explicit Writer(const std::vector<std::string>& header) { row(header); }

    template <typename... Fields>
    void line(const Fields&... fields) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(fields), first = false), ...);
        out_ << '\n';
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << escape(fields[i]);
        out_ << '\n';
    }

    std::string str() const { return out_.str(); }

private:
    static std::string cell(double v) { return format_number(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long v) { return std::to_string(v); }
    static std::string cell(long long v) { return std::to_string(v); }
    static std::string cell(unsigned long v) { return std::to_string(v); }
    static std::string cell(unsigned long long v) { return std::to_string(v); }
    static std::string cell(std::string_view v) { return escape(v); }
    static std::string cell(const std::string& v) { return escape(v); }
    static std::string cell(const char* v) { return escape(v); }

    std::ostringstream out_;
};

}  // namespace lwr::csv
