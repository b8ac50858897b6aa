#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace saac::csv {

/// Shortest round-trip decimal text for a double.
std::string format_double(double v);

/// Buffered RFC-4180 writer. Rows go to `<path>.tmp`; commit() renames it
/// over `path`, so readers never see a partial table.
class Writer {
 public:
  Writer(std::filesystem::path path, std::initializer_list<std::string_view> header);
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;
  ~Writer();

  Writer& field(std::string_view text);
  Writer& field(double value);
  Writer& field(std::int64_t value);
  Writer& field(int value) { return field(static_cast<std::int64_t>(value)); }
  Writer& field(std::size_t value) { return field(static_cast<std::int64_t>(value)); }
  void end_row();
  void commit();

 private:
  void separator();
  void flush_buffer();

  std::filesystem::path path_, tmp_;
  std::ofstream out_;
  std::string buffer_;
  bool row_started_ = false;
  bool committed_ = false;
};

/// Whole-file RFC-4180 reader with named columns. Conversion failures are
/// recorded as `file:line:column: message` diagnostics; call finish() to throw
/// a ValidationError if any were recorded.
class Reader {
 public:
  explicit Reader(std::filesystem::path path);

  /// Column index by header name; records a diagnostic when absent.
  std::size_t column(std::string_view name);
  bool has_column(std::string_view name) const;

  /// Advances to the next record; false at end of file.
  bool next();

  std::size_t line() const noexcept { return line_; }
  std::string_view text(std::size_t col);
  std::optional<std::int64_t> integer(std::size_t col);
  std::optional<double> real(std::size_t col);
  /// Integer that must be >= 0.
  std::optional<std::int64_t> count(std::size_t col);

  void error(std::size_t col, const std::string& message);
  void error(const std::string& message);
  bool ok() const noexcept { return diagnostics_.empty(); }
  void finish();

 private:
  bool parse_record(std::vector<std::string_view>& out);

  std::filesystem::path path_;
  std::string data_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0, next_line_ = 1;
  std::vector<std::string> header_;
  std::vector<std::string_view> fields_;
  std::vector<std::string> unquoted_;  // storage for fields that needed unescaping
  std::vector<std::string> diagnostics_;
};

}  // namespace saac::csv
