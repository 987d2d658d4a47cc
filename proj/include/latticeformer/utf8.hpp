#pragma once

#include <string>
#include <string_view>

namespace latticeformer::utf8 {

// Decodes UTF-8 into unicode scalar values. Throws InputError on malformed
// sequences, overlong forms and surrogates.
std::u32string decode(std::string_view text);

std::string encode(std::u32string_view text);
std::string encode(char32_t c);

bool is_whitespace(char32_t c) noexcept;

}  // namespace latticeformer::utf8
