#include "factrace/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "factrace/error.hpp"

namespace factrace::text {

bool is_ascii(std::string_view s) noexcept {
  for (unsigned char c : s) {
    if (c >= 0x80) return false;
  }
  return true;
}

namespace {

const icu::Normalizer2& nfc_instance() {
  static const icu::Normalizer2* instance = [] {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status) || n == nullptr) {
      throw Error(ErrorCode::IoError, "ICU NFC normalizer unavailable");
    }
    return n;
  }();
  return *instance;
}

}  // namespace

std::string nfc(std::string_view s) {
  if (is_ascii(s)) return std::string(s);
  const auto& norm = nfc_instance();
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  UErrorCode status = U_ZERO_ERROR;
  if (norm.quickCheck(u, status) == UNORM_YES && U_SUCCESS(status)) {
    std::string out;
    u.toUTF8String(out);
    return out;
  }
  status = U_ZERO_ERROR;
  icu::UnicodeString normalized = norm.normalize(u, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::IoError, "NFC normalization failed");
  }
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

namespace {

bool is_space_cp(UChar32 cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' ||
         cp == '\v' || u_isUWhiteSpace(cp);
}

}  // namespace

std::string trim(std::string_view s) {
  const auto* data = reinterpret_cast<const uint8_t*>(s.data());
  const auto len = static_cast<int32_t>(s.size());

  int32_t begin = 0;
  while (begin < len) {
    int32_t next = begin;
    UChar32 cp;
    U8_NEXT(data, next, len, cp);
    if (cp < 0 || !is_space_cp(cp)) break;
    begin = next;
  }
  int32_t end = len;
  while (end > begin) {
    int32_t prev = end;
    UChar32 cp;
    U8_PREV(data, 0, prev, cp);
    if (cp < 0 || !is_space_cp(cp)) break;
    end = prev;
  }
  return std::string(s.substr(begin, end - begin));
}

}  // namespace factrace::text
