#include "bca/csv.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <charconv>

#include "bca/errors.hpp"

namespace bca {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cell;
    bool in_quotes = false;
    bool cell_started = false;
    bool row_started = false;

    const std::size_t n = text.size();
    for (std::size_t i = 0; i < n; ++i) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cell.push_back(ch);
            }
            continue;
        }
        switch (ch) {
            case '"':
                if (cell_started && !cell.empty()) {
                    throw DataError("CSV: quote inside unquoted cell");
                }
                in_quotes = true;
                cell_started = true;
                row_started = true;
                break;
            case ',':
                row.push_back(cell);
                cell.clear();
                cell_started = false;
                row_started = true;
                break;
            case '\r':
                break;
            case '\n':
                if (row_started || cell_started || !cell.empty()) {
                    row.push_back(cell);
                    rows.push_back(row);
                }
                row.clear();
                cell.clear();
                cell_started = false;
                row_started = false;
                break;
            default:
                cell.push_back(ch);
                cell_started = true;
                row_started = true;
                break;
        }
    }
    if (in_quotes) throw DataError("CSV: unterminated quoted cell");
    if (row_started || cell_started || !cell.empty()) {
        row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

std::string csv_escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
    std::string out;
    out.reserve(cell.size() + 2);
    out.push_back('"');
    for (char ch : cell) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

std::string fmt_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string to_lower(const std::string& s) {
    std::string out = s;
    for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

double parse_double(const std::string& cell) {
    const std::string t = trim(cell);
    if (t.empty()) throw DataError("empty numeric cell");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE) {
        throw DataError("invalid numeric cell: '" + cell + "'");
    }
    return v;
}

long long parse_long(const std::string& cell) {
    const std::string t = trim(cell);
    if (t.empty()) throw DataError("empty integer cell");
    long long v = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw DataError("invalid integer cell: '" + cell + "'");
    }
    return v;
}

}  // namespace bca
