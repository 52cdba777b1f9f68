#ifndef KFLOW_TEXT_HPP
#define KFLOW_TEXT_HPP

#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kflow {

/// Error raised while reading an input file. Carries the 1-based line number
/// (0 when the error is not tied to a line).
class InputError : public std::runtime_error {
public:
    InputError(const std::string &what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_{line} {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Raised for invalid configuration values or unknown region / SC names.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace text {

namespace detail {

// Latin-1 supplement (U+00C0..U+00FF) folded to an ASCII base letter, lowercase.
// Entries that have no sensible base letter map to 0 and are dropped.
inline constexpr char latin1_fold[64] = {
    'a', 'a', 'a', 'a', 'a', 'a', 'a', 'c', 'e', 'e', 'e', 'e', 'i', 'i', 'i', 'i',
    'd', 'n', 'o', 'o', 'o', 'o', 'o', 0,   'o', 'u', 'u', 'u', 'u', 'y', 0,   's',
    'a', 'a', 'a', 'a', 'a', 'a', 'a', 'c', 'e', 'e', 'e', 'e', 'i', 'i', 'i', 'i',
    'd', 'n', 'o', 'o', 'o', 'o', 'o', 0,   'o', 'u', 'u', 'u', 'u', 'y', 0,   'y'};

inline bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

} // namespace detail

/// Lookup key normalization: lowercase, diacritics stripped (UTF-8 Latin-1
/// range plus combining marks), internal whitespace collapsed, ends trimmed.
inline std::string normalize_key(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    bool pending_space = false;
    auto put = [&](char c) {
        if (pending_space && !out.empty())
            out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    };
    for (std::size_t i = 0; i < in.size(); ++i) {
        const auto c = static_cast<unsigned char>(in[i]);
        if (c < 0x80) {
            if (detail::is_space(c))
                pending_space = true;
            else
                put(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
            continue;
        }
        // Two-byte sequences: C3 xx covers U+00C0..U+00FF.
        if (c == 0xC3 && i + 1 < in.size()) {
            const auto next = static_cast<unsigned char>(in[i + 1]);
            ++i;
            if (next >= 0x80 && next <= 0xBF) {
                const char folded = detail::latin1_fold[next - 0x80];
                if (folded)
                    put(folded);
            }
            continue;
        }
        // Combining diacritical marks U+0300..U+036F (CC 80..CD AF) are dropped.
        if ((c == 0xCC || c == 0xCD) && i + 1 < in.size()) {
            ++i;
            continue;
        }
        // U+00A0 no-break space.
        if (c == 0xC2 && i + 1 < in.size() && static_cast<unsigned char>(in[i + 1]) == 0xA0) {
            ++i;
            pending_space = true;
            continue;
        }
        put(static_cast<char>(c));
    }
    return out;
}

/// Drops a leading country prefix such as "I-" or "IT-" from a postal code.
inline std::string strip_zip_prefix(std::string_view zip) {
    std::size_t start = 0;
    while (start < zip.size() && detail::is_space(static_cast<unsigned char>(zip[start])))
        ++start;
    std::size_t letters = start;
    while (letters < zip.size() && ((zip[letters] >= 'A' && zip[letters] <= 'Z') ||
                                    (zip[letters] >= 'a' && zip[letters] <= 'z')))
        ++letters;
    if (letters > start && letters - start <= 3 && letters < zip.size() && zip[letters] == '-')
        start = letters + 1;
    std::size_t end = zip.size();
    while (end > start && detail::is_space(static_cast<unsigned char>(zip[end - 1])))
        --end;
    return std::string{zip.substr(start, end - start)};
}

/// Splits one line of comma-delimited text. Fields may be double-quoted; a
/// doubled quote inside a quoted field is a literal quote.
inline std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no = 0) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty() && !was_quoted) {
            quoted = was_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    if (quoted)
        throw InputError("unterminated quoted field", line_no);
    fields.push_back(std::move(field));
    return fields;
}

/// Quotes a field for comma-delimited output when it needs it.
inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos)
        return std::string{s};
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

/// Joins fields into one comma-delimited line (without terminator).
inline std::string csv_join(const std::vector<std::string> &fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            out.push_back(',');
        out += csv_field(fields[i]);
    }
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && detail::is_space(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && detail::is_space(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string{s.substr(b, e - b)};
}

/// Reads a delimited file with a mandatory header row. The callback receives
/// the split fields and the 1-based line number of every non-blank data row.
template <typename RowFn>
void read_csv(std::istream &in, const std::vector<std::string> &expected_header, RowFn &&on_row) {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        auto fields = split_csv_line(line, line_no);
        if (!header_seen) {
            header_seen = true;
            for (auto &f : fields)
                f = trim(f);
            if (fields != expected_header) {
                std::string want;
                for (const auto &h : expected_header)
                    want += (want.empty() ? "" : ",") + h;
                throw InputError("unexpected header, want '" + want + "'", line_no);
            }
            continue;
        }
        if (fields.size() != expected_header.size())
            throw InputError("expected " + std::to_string(expected_header.size()) +
                                 " fields, got " + std::to_string(fields.size()),
                             line_no);
        on_row(fields, line_no);
    }
    if (!header_seen)
        throw InputError("missing header row");
}

/// Fixed-point rendering with the given number of decimals ("4.15").
inline std::string fixed(double value, int decimals) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(decimals);
    os << (value == 0.0 ? 0.0 : value);
    return os.str();
}

/// 64-bit FNV-1a, used for stable content hashes in run manifests.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace text
} // namespace kflow

#endif // KFLOW_TEXT_HPP
