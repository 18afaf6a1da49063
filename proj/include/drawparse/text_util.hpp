#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace drawparse {

// Decoded UTF-8 text. cps[i] is the i-th code point, byte_offset[i] its byte
// position in the original string. Invalid sequences decode to U+FFFD.
struct Utf8Text {
    std::vector<char32_t> cps;
    std::vector<std::size_t> byte_offset;

    std::size_t size() const { return cps.size(); }
};

Utf8Text utf8_decode(std::string_view s);
std::string utf8_encode(const std::vector<char32_t>& cps);
void utf8_append(std::string& out, char32_t cp);

// Canonical composition for the Latin letter + combining mark sequences that
// show up in drawing text (grave, acute, circumflex, tilde, diaeresis, ring).
// Everything else passes through unchanged; precomposed input is a fixpoint.
std::string nfc_normalize(std::string_view s);

std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);

bool is_ascii_alpha_only(std::string_view s);
std::string ascii_lower(std::string_view s);

// Shortest decimal representation that parses back to exactly `v`.
std::string format_double(double v);

// Round to 9 significant decimal digits; -0 collapses to +0.
double round9(double v);

}  // namespace drawparse
