#include "drawparse/text_util.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace drawparse {

Utf8Text utf8_decode(std::string_view s) {
    Utf8Text out;
    out.cps.reserve(s.size());
    out.byte_offset.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const unsigned char c0 = static_cast<unsigned char>(s[i]);
        char32_t cp = 0xFFFD;
        std::size_t len = 1;
        if (c0 < 0x80) {
            cp = c0;
        } else if ((c0 & 0xE0) == 0xC0 && i + 1 < s.size()) {
            const unsigned char c1 = static_cast<unsigned char>(s[i + 1]);
            if ((c1 & 0xC0) == 0x80) {
                cp = (char32_t(c0 & 0x1F) << 6) | (c1 & 0x3F);
                len = 2;
            }
        } else if ((c0 & 0xF0) == 0xE0 && i + 2 < s.size()) {
            const unsigned char c1 = static_cast<unsigned char>(s[i + 1]);
            const unsigned char c2 = static_cast<unsigned char>(s[i + 2]);
            if ((c1 & 0xC0) == 0x80 && (c2 & 0xC0) == 0x80) {
                cp = (char32_t(c0 & 0x0F) << 12) | (char32_t(c1 & 0x3F) << 6) | (c2 & 0x3F);
                len = 3;
            }
        } else if ((c0 & 0xF8) == 0xF0 && i + 3 < s.size()) {
            const unsigned char c1 = static_cast<unsigned char>(s[i + 1]);
            const unsigned char c2 = static_cast<unsigned char>(s[i + 2]);
            const unsigned char c3 = static_cast<unsigned char>(s[i + 3]);
            if ((c1 & 0xC0) == 0x80 && (c2 & 0xC0) == 0x80 && (c3 & 0xC0) == 0x80) {
                cp = (char32_t(c0 & 0x07) << 18) | (char32_t(c1 & 0x3F) << 12) |
                     (char32_t(c2 & 0x3F) << 6) | (c3 & 0x3F);
                len = 4;
            }
        }
        out.cps.push_back(cp);
        out.byte_offset.push_back(i);
        i += len;
    }
    return out;
}

void utf8_append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string utf8_encode(const std::vector<char32_t>& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) utf8_append(out, cp);
    return out;
}

namespace {

struct Composition {
    char32_t base;
    char32_t mark;
    char32_t composed;
};

// Latin-1 supplement plus ring/å compositions; base letter + combining mark.
constexpr std::array<Composition, 58> kCompositions{{
    {U'A', 0x0300, 0x00C0}, {U'A', 0x0301, 0x00C1}, {U'A', 0x0302, 0x00C2},
    {U'A', 0x0303, 0x00C3}, {U'A', 0x0308, 0x00C4}, {U'A', 0x030A, 0x00C5},
    {U'C', 0x0327, 0x00C7}, {U'E', 0x0300, 0x00C8}, {U'E', 0x0301, 0x00C9},
    {U'E', 0x0302, 0x00CA}, {U'E', 0x0308, 0x00CB}, {U'I', 0x0300, 0x00CC},
    {U'I', 0x0301, 0x00CD}, {U'I', 0x0302, 0x00CE}, {U'I', 0x0308, 0x00CF},
    {U'N', 0x0303, 0x00D1}, {U'O', 0x0300, 0x00D2}, {U'O', 0x0301, 0x00D3},
    {U'O', 0x0302, 0x00D4}, {U'O', 0x0303, 0x00D5}, {U'O', 0x0308, 0x00D6},
    {U'U', 0x0300, 0x00D9}, {U'U', 0x0301, 0x00DA}, {U'U', 0x0302, 0x00DB},
    {U'U', 0x0308, 0x00DC}, {U'Y', 0x0301, 0x00DD}, {U'a', 0x0300, 0x00E0},
    {U'a', 0x0301, 0x00E1}, {U'a', 0x0302, 0x00E2}, {U'a', 0x0303, 0x00E3},
    {U'a', 0x0308, 0x00E4}, {U'a', 0x030A, 0x00E5}, {U'c', 0x0327, 0x00E7},
    {U'e', 0x0300, 0x00E8}, {U'e', 0x0301, 0x00E9}, {U'e', 0x0302, 0x00EA},
    {U'e', 0x0308, 0x00EB}, {U'i', 0x0300, 0x00EC}, {U'i', 0x0301, 0x00ED},
    {U'i', 0x0302, 0x00EE}, {U'i', 0x0308, 0x00EF}, {U'n', 0x0303, 0x00F1},
    {U'o', 0x0300, 0x00F2}, {U'o', 0x0301, 0x00F3}, {U'o', 0x0302, 0x00F4},
    {U'o', 0x0303, 0x00F5}, {U'o', 0x0308, 0x00F6}, {U'u', 0x0300, 0x00F9},
    {U'u', 0x0301, 0x00FA}, {U'u', 0x0302, 0x00FB}, {U'u', 0x0308, 0x00FC},
    {U'y', 0x0301, 0x00FD}, {U'y', 0x0308, 0x00FF}, {U'S', 0x030C, 0x0160},
    {U's', 0x030C, 0x0161}, {U'Z', 0x030C, 0x017D}, {U'z', 0x030C, 0x017E},
    {U'C', 0x030C, 0x010C},
}};

char32_t compose(char32_t base, char32_t mark) {
    for (const auto& c : kCompositions)
        if (c.base == base && c.mark == mark) return c.composed;
    return 0;
}

bool is_ascii_space(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v';
}

}  // namespace

std::string nfc_normalize(std::string_view s) {
    const Utf8Text t = utf8_decode(s);
    std::vector<char32_t> out;
    out.reserve(t.cps.size());
    for (char32_t cp : t.cps) {
        if (!out.empty()) {
            if (char32_t comp = compose(out.back(), cp); comp != 0) {
                out.back() = comp;
                continue;
            }
        }
        out.push_back(cp);
    }
    return utf8_encode(out);
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_ascii_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_ascii_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = false;
    for (char c : s) {
        if (is_ascii_space(static_cast<unsigned char>(c))) {
            in_ws = true;
            continue;
        }
        if (in_ws && !out.empty()) out.push_back(' ');
        in_ws = false;
        out.push_back(c);
    }
    return out;
}

bool is_ascii_alpha_only(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        const unsigned char u = static_cast<unsigned char>(c);
        if (!(std::isalpha(u) || u == ' ')) return false;
    }
    return true;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), ptr);
}

double round9(double v) {
    if (v == 0.0) return 0.0;
    if (!std::isfinite(v)) return v;
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%.9g", v);
    const double r = std::strtod(buf.data(), nullptr);
    return r == 0.0 ? 0.0 : r;
}

}  // namespace drawparse
