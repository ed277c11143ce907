#include "permlogic/utf8.hpp"

#include <cstdint>

#include "permlogic/error.hpp"

namespace permlogic {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidDefinition: return "InvalidDefinition";
    case ErrorCode::kPatternTooLong: return "PatternTooLong";
    case ErrorCode::kCharOutsideCharset: return "CharOutsideCharset";
    case ErrorCode::kWildcardNotAllowed: return "WildcardNotAllowed";
    case ErrorCode::kEnumValueUnknown: return "EnumValueUnknown";
    case ErrorCode::kInvalidDecision: return "InvalidDecision";
    case ErrorCode::kArityMismatch: return "ArityMismatch";
    case ErrorCode::kTypeMismatch: return "TypeMismatch";
    case ErrorCode::kUnknownComponentPath: return "UnknownComponentPath";
    case ErrorCode::kDomainTooLarge: return "DomainTooLarge";
    case ErrorCode::kStateBudgetExceeded: return "StateBudgetExceeded";
    case ErrorCode::kSolverSpawnFailure: return "SolverSpawnFailure";
    case ErrorCode::kModelParseError: return "ModelParseError";
    case ErrorCode::kUnsupportedComponent: return "UnsupportedComponent";
    case ErrorCode::kMalformedPermSpec: return "MalformedPermSpec";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kUnknownPolicyType: return "UnknownPolicyType";
    case ErrorCode::kUnknownFamily: return "UnknownFamily";
    case ErrorCode::kInvalidUtf8: return "InvalidUtf8";
  }
  return "Unknown";
}

namespace utf8 {

std::u32string decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    int extra = 0;
    char32_t cp = 0;
    if (lead < 0x80) {
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      extra = 1;
      cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
      extra = 2;
      cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
      extra = 3;
      cp = lead & 0x07;
    } else {
      throw Error(ErrorCode::kInvalidUtf8, "bad lead byte at offset " + std::to_string(i));
    }
    for (int k = 1; k <= extra; ++k) {
      if (i + k >= text.size()) {
        throw Error(ErrorCode::kInvalidUtf8, "truncated sequence at offset " + std::to_string(i));
      }
      const auto cont = static_cast<unsigned char>(text[i + k]);
      if ((cont & 0xC0) != 0x80) {
        throw Error(ErrorCode::kInvalidUtf8, "bad continuation byte at offset " + std::to_string(i + k));
      }
      cp = (cp << 6) | (cont & 0x3F);
    }
    static constexpr char32_t kMinForLength[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLength[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      throw Error(ErrorCode::kInvalidUtf8, "invalid scalar value at offset " + std::to_string(i));
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

std::string encode(char32_t c) {
  std::string out;
  const auto cp = static_cast<std::uint32_t>(c);
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
  return out;
}

std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) out += encode(c);
  return out;
}

}  // namespace utf8
}  // namespace permlogic
