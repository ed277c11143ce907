#ifndef PERMLOGIC_UTF8_HPP_
#define PERMLOGIC_UTF8_HPP_

#include <string>
#include <string_view>

namespace permlogic::utf8 {

// Throws Error(kInvalidUtf8) on malformed input, overlong forms and surrogates.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
std::string encode(char32_t c);

}  // namespace permlogic::utf8

#endif  // PERMLOGIC_UTF8_HPP_
