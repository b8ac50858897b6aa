#include "saac/csv.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "saac/error.hpp"

namespace saac::csv {

namespace {

constexpr std::size_t kFlushAt = 1 << 20;
constexpr std::size_t kMaxDiagnostics = 50;

bool needs_quotes(std::string_view s) {
  return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Writer::Writer(std::filesystem::path path, std::initializer_list<std::string_view> header)
    : path_(std::move(path)), tmp_(path_.string() + ".tmp") {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  out_.open(tmp_, std::ios::binary | std::ios::trunc);
  if (!out_) fail(ErrorKind::Io, "cannot open " + tmp_.string() + " for writing");
  for (auto h : header) field(h);
  end_row();
}

Writer::~Writer() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(tmp_, ec);
  }
}

void Writer::separator() {
  if (row_started_) buffer_ += ',';
  row_started_ = true;
}

Writer& Writer::field(std::string_view text) {
  separator();
  if (!needs_quotes(text)) {
    buffer_ += text;
    return *this;
  }
  buffer_ += '"';
  for (char ch : text) {
    if (ch == '"') buffer_ += '"';
    buffer_ += ch;
  }
  buffer_ += '"';
  return *this;
}

Writer& Writer::field(double value) {
  require(std::isfinite(value), "refusing to write a non-finite value to " + path_.string());
  separator();
  buffer_ += format_double(value);
  return *this;
}

Writer& Writer::field(std::int64_t value) {
  separator();
  char buf[24];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  buffer_.append(buf, ptr);
  return *this;
}

void Writer::end_row() {
  buffer_ += "\r\n";
  row_started_ = false;
  if (buffer_.size() >= kFlushAt) flush_buffer();
}

void Writer::flush_buffer() {
  out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  buffer_.clear();
  if (!out_) fail(ErrorKind::Io, "write failed for " + tmp_.string());
}

void Writer::commit() {
  flush_buffer();
  out_.close();
  if (!out_) fail(ErrorKind::Io, "close failed for " + tmp_.string());
  std::filesystem::rename(tmp_, path_);
  committed_ = true;
}

Reader::Reader(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path_.string());
  in.seekg(0, std::ios::end);
  data_.resize(static_cast<std::size_t>(in.tellg()));
  in.seekg(0);
  in.read(data_.data(), static_cast<std::streamsize>(data_.size()));
  if (data_.starts_with("\xEF\xBB\xBF")) pos_ = 3;

  std::vector<std::string_view> header;
  if (!parse_record(header)) {
    diagnostics_.push_back(path_.string() + ":1: missing header row");
    finish();
  }
  for (auto h : header) header_.emplace_back(h);
}

bool Reader::has_column(std::string_view name) const {
  for (const auto& h : header_)
    if (h == name) return true;
  return false;
}

std::size_t Reader::column(std::string_view name) {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return i;
  error("missing required column '" + std::string(name) + "'");
  return header_.size();
}

bool Reader::parse_record(std::vector<std::string_view>& out) {
  out.clear();
  unquoted_.clear();
  // Skip blank lines.
  while (pos_ < data_.size() && (data_[pos_] == '\n' || data_[pos_] == '\r')) {
    if (data_[pos_] == '\n') ++next_line_;
    ++pos_;
  }
  if (pos_ >= data_.size()) return false;
  line_ = next_line_;
  unquoted_.reserve(16);
  while (true) {
    if (pos_ < data_.size() && data_[pos_] == '"') {
      std::string value;
      ++pos_;
      while (true) {
        if (pos_ >= data_.size()) {
          error("unterminated quoted field");
          break;
        }
        const char ch = data_[pos_++];
        if (ch == '"') {
          if (pos_ < data_.size() && data_[pos_] == '"') {
            value += '"';
            ++pos_;
          } else {
            break;
          }
        } else {
          if (ch == '\n') ++next_line_;
          value += ch;
        }
      }
      unquoted_.push_back(std::move(value));
      out.emplace_back(unquoted_.back());
    } else {
      const std::size_t start = pos_;
      while (pos_ < data_.size() && data_[pos_] != ',' && data_[pos_] != '\n' && data_[pos_] != '\r') ++pos_;
      out.emplace_back(data_.data() + start, pos_ - start);
    }
    if (pos_ < data_.size() && data_[pos_] == ',') {
      ++pos_;
      continue;
    }
    if (pos_ < data_.size() && data_[pos_] == '\r') ++pos_;
    if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
    ++next_line_;
    return true;
  }
}

bool Reader::next() {
  if (!parse_record(fields_)) return false;
  if (fields_.size() != header_.size())
    error("expected " + std::to_string(header_.size()) + " fields, found " + std::to_string(fields_.size()));
  return true;
}

std::string_view Reader::text(std::size_t col) {
  if (col >= fields_.size()) return {};
  return fields_[col];
}

std::optional<std::int64_t> Reader::integer(std::size_t col) {
  if (col >= fields_.size()) return std::nullopt;  // short row already reported
  const auto t = text(col);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    error(col, "expected an integer, found '" + std::string(t) + "'");
    return std::nullopt;
  }
  return v;
}

std::optional<std::int64_t> Reader::count(std::size_t col) {
  auto v = integer(col);
  if (v && *v < 0) {
    error(col, "negative count " + std::to_string(*v));
    return std::nullopt;
  }
  return v;
}

std::optional<double> Reader::real(std::size_t col) {
  if (col >= fields_.size()) return std::nullopt;
  const auto t = text(col);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v)) {
    error(col, "expected a finite number, found '" + std::string(t) + "'");
    return std::nullopt;
  }
  return v;
}

void Reader::error(std::size_t col, const std::string& message) {
  const std::string name = col < header_.size() ? header_[col] : "?";
  if (diagnostics_.size() < kMaxDiagnostics)
    diagnostics_.push_back(path_.string() + ":" + std::to_string(line_) + ": column " + std::to_string(col + 1) +
                           " (" + name + "): " + message);
}

void Reader::error(const std::string& message) {
  if (diagnostics_.size() < kMaxDiagnostics)
    diagnostics_.push_back(path_.string() + ":" + std::to_string(line_ ? line_ : 1) + ": " + message);
}

void Reader::finish() {
  if (!diagnostics_.empty()) throw ValidationError(diagnostics_);
}

}  // namespace saac::csv
