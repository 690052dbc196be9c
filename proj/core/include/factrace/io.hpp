#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace factrace::io {

namespace fs = std::filesystem;

// Sequential line reader over plain or gzip files (".gz" extension selects
// the zlib path). Trailing '\n' and '\r' are stripped.
class LineReader {
 public:
  explicit LineReader(const fs::path& path);
  ~LineReader();
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  bool next(std::string& line);
  std::uint64_t line_number() const noexcept { return line_no_; }
  const fs::path& path() const noexcept { return path_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  fs::path path_;
  std::uint64_t line_no_ = 0;
};

// Writes via "<path>.tmp.<pid>" followed by rename, so readers never see a
// partially written file.
void write_file_atomic(const fs::path& path, std::string_view contents);
void write_json_atomic(const fs::path& path, const nlohmann::json& j);

std::string read_file(const fs::path& path);
nlohmann::json read_json(const fs::path& path);

// Whole-string non-negative decimal integer; nullopt on sign, junk or overflow.
std::optional<std::uint64_t> parse_uint(std::string_view s) noexcept;

// Shortest round-trip decimal representation.
std::string format_double(double v);
// Empty string for std::nullopt (CSV null).
std::string format_optional(const std::optional<double>& v);

// RFC 4180 quoting when needed.
std::string csv_escape(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by header name, throws MalformedRecord when absent.
  std::size_t column(std::string_view name) const;
};
CsvTable read_csv(const fs::path& path);

// Lexicographically sorted; a pattern without wildcards is taken literally.
std::vector<fs::path> expand_glob(const std::string& pattern);

std::string sha256_hex(std::string_view data);

}  // namespace factrace::io
