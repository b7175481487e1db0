#pragma once

#include <string>
#include <string_view>

namespace pairit {

// Fields are edited in Unicode code points; storage and the wire use UTF-8.
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(std::u32string_view s);

// Number of code points in a UTF-8 string.
std::size_t char_count(std::string_view utf8);

std::string trim(std::string_view s);

// First 16 hex digits of SHA-256.
std::string content_hash(std::string_view bytes);

}  // namespace pairit
