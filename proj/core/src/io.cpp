#include "factrace/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <glob.h>
#include <openssl/evp.h>
#include <unistd.h>
#include <zlib.h>

#include "factrace/error.hpp"

namespace factrace::io {

struct LineReader::Impl {
  std::ifstream plain;
  gzFile gz = nullptr;
  std::vector<char> buffer;
  std::size_t pos = 0;
  std::size_t len = 0;
  bool eof = false;

  ~Impl() {
    if (gz != nullptr) gzclose(gz);
  }

  bool fill(const fs::path& path) {
    if (eof) return false;
    int n = gzread(gz, buffer.data(), static_cast<unsigned>(buffer.size()));
    if (n < 0) {
      int errnum = 0;
      const char* msg = gzerror(gz, &errnum);
      throw Error(ErrorCode::ShardReadError,
                  "gzip read failed for " + path.string() + ": " + msg,
                  {{"path", path.string()}});
    }
    if (n == 0) {
      eof = true;
      return false;
    }
    pos = 0;
    len = static_cast<std::size_t>(n);
    return true;
  }
};

LineReader::LineReader(const fs::path& path) : impl_(std::make_unique<Impl>()), path_(path) {
  if (path.extension() == ".gz") {
    impl_->gz = gzopen(path.c_str(), "rb");
    if (impl_->gz == nullptr) {
      throw Error(ErrorCode::ShardReadError, "cannot open " + path.string(),
                  {{"path", path.string()}, {"record", 0}});
    }
    impl_->buffer.resize(1 << 16);
  } else {
    impl_->plain.open(path, std::ios::binary);
    if (!impl_->plain) {
      throw Error(ErrorCode::ShardReadError, "cannot open " + path.string(),
                  {{"path", path.string()}, {"record", 0}});
    }
  }
}

LineReader::~LineReader() = default;

bool LineReader::next(std::string& line) {
  line.clear();
  if (impl_->gz == nullptr) {
    if (!std::getline(impl_->plain, line)) {
      if (impl_->plain.bad()) {
        throw Error(ErrorCode::ShardReadError, "read failed for " + path_.string(),
                    {{"path", path_.string()}, {"record", line_no_ + 1}});
      }
      return false;
    }
  } else {
    bool got_any = false;
    for (;;) {
      if (impl_->pos >= impl_->len && !impl_->fill(path_)) break;
      got_any = true;
      const char* start = impl_->buffer.data() + impl_->pos;
      const char* end = impl_->buffer.data() + impl_->len;
      const char* nl = static_cast<const char*>(std::memchr(start, '\n', end - start));
      if (nl != nullptr) {
        line.append(start, nl);
        impl_->pos += static_cast<std::size_t>(nl - start) + 1;
        break;
      }
      line.append(start, end);
      impl_->pos = impl_->len;
    }
    if (!got_any) return false;
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++line_no_;
  return true;
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::IoError, "cannot write " + tmp.string(), {{"path", tmp.string()}});
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
      throw Error(ErrorCode::IoError, "write failed for " + tmp.string(), {{"path", tmp.string()}});
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::IoError, "rename to " + path.string() + " failed: " + ec.message(),
                {{"path", path.string()}});
  }
}

void write_json_atomic(const fs::path& path, const nlohmann::json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot read " + path.string(), {{"path", path.string()}});
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& path) {
  std::string text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedRecord, path.string() + ": " + e.what(),
                {{"path", path.string()}});
  }
}

std::optional<std::uint64_t> parse_uint(std::string_view s) noexcept {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    out += csv_escape(fields[i]);
  }
  out += '\n';
  return out;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorCode::MalformedRecord, "CSV column missing: " + std::string(name),
              {{"column", std::string(name)}});
}

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text, const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (field_started || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) {
    throw Error(ErrorCode::MalformedRecord, "unterminated quote in " + path.string(),
                {{"path", path.string()}});
  }
  if (field_started || !field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

CsvTable read_csv(const fs::path& path) {
  auto rows = parse_csv(read_file(path), path);
  CsvTable table;
  if (rows.empty()) return table;
  table.header = std::move(rows.front());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != table.header.size()) {
      throw Error(ErrorCode::MalformedRecord,
                  path.string() + ": row " + std::to_string(r + 1) + " has " +
                      std::to_string(rows[r].size()) + " fields, expected " +
                      std::to_string(table.header.size()),
                  {{"path", path.string()}, {"record", r + 1}});
    }
    table.rows.push_back(std::move(rows[r]));
  }
  return table;
}

std::vector<fs::path> expand_glob(const std::string& pattern) {
  glob_t g{};
  int rc = ::glob(pattern.c_str(), GLOB_NOSORT, nullptr, &g);
  std::vector<fs::path> out;
  if (rc == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  globfree(&g);
  std::sort(out.begin(), out.end());
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

}  // namespace factrace::io
