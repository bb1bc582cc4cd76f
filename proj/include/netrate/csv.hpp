#pragma once

#include <charconv>
#include <istream>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace netrate {

/// Reads one CSV record. Handles quoted fields (embedded commas, quotes,
/// newlines) and CRLF endings. Returns nullopt at end of input.
inline std::optional<std::vector<std::string>> csv_read_row(std::istream& in) {
    if (in.peek() == std::char_traits<char>::eof()) return std::nullopt;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (;;) {
        int ci = in.get();
        if (ci == std::char_traits<char>::eof()) {
            fields.push_back(field);
            return fields;
        }
        char c = static_cast<char>(ci);
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            fields.push_back(field);
            return fields;
        } else {
            field.push_back(c);
        }
    }
}

/// Quotes a field if needed.
inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

/// Locale-independent double parsing.
inline std::optional<double> csv_parse_double(const std::string& s) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

/// Shortest decimal form that round-trips a double exactly.
inline std::string format_double(double v) {
    auto render = [&](int precision) {
        std::ostringstream os;
        os.imbue(std::locale::classic());
        os.precision(precision);
        os << v;
        return os.str();
    };
    for (int precision : {15, 16}) {
        std::string s = render(precision);
        if (auto parsed = csv_parse_double(s); parsed && *parsed == v) return s;
    }
    return render(17);
}

}  // namespace netrate
