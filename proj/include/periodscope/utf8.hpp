#pragma once

// Code-point level helpers. All offsets exchanged through files and APIs are
// Unicode code points; text is stored as UTF-8.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace periodscope::utf8 {

// Returns std::nullopt for ill-formed input (overlongs, surrogates, > U+10FFFF).
std::optional<std::u32string> decode(std::string_view bytes);

bool is_valid(std::string_view bytes);

std::string encode(std::u32string_view cps);
void append(std::string& out, char32_t cp);

// byte offset of every code point plus one trailing entry equal to bytes.size().
// Input must be valid UTF-8.
std::vector<std::size_t> code_point_offsets(std::string_view bytes);

// Simple case folding: ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic.
char32_t fold_case(char32_t cp);
std::u32string fold_case(std::u32string_view cps);

}  // namespace periodscope::utf8
