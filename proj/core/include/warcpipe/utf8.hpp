#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace warcpipe::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

void append(std::string& out, char32_t cp);

// Decodes one code point at `pos`, advancing it. Invalid sequences yield
// kReplacement and consume one byte.
char32_t next(std::string_view s, std::size_t& pos);

bool is_valid(std::string_view s);

std::size_t count_code_points(std::string_view s);

std::u32string to_u32(std::string_view s);
std::string from_u32(std::u32string_view s);

}  // namespace warcpipe::utf8
