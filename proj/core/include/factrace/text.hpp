#pragma once

#include <string>
#include <string_view>

namespace factrace::text {

// Unicode NFC. Case and interior whitespace are preserved; invalid UTF-8
// sequences are replaced by U+FFFD. Pure ASCII input is returned unchanged
// without touching ICU.
std::string nfc(std::string_view s);

// Strips leading/trailing ASCII and Unicode whitespace.
std::string trim(std::string_view s);

// trim + nfc, the normalization applied to every field at load time.
inline std::string normalize_field(std::string_view s) { return nfc(trim(s)); }

bool is_ascii(std::string_view s) noexcept;

}  // namespace factrace::text
