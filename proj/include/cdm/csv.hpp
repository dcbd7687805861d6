#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cdm/error.hpp"

namespace cdm::csv {

// One parsed record. `line` is the 1-based physical line on which the record
// starts (the header is line 1 when present).
struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

// RFC 4180 reader: comma delimiter, double-quote quoting with "" escapes,
// CRLF or LF record terminators, quoted fields may span lines.
inline std::vector<Record> parse(std::string_view text, const std::string& source = "<csv>") {
  std::vector<Record> records;
  Record current;
  std::string field;
  std::size_t line = 1;
  std::size_t i = 0;
  bool record_open = false;

  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;  // BOM

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(current));
    current = Record{};
    record_open = false;
  };

  while (i < text.size()) {
    if (!record_open) {
      current.line = line;
      record_open = true;
    }
    const char c = text[i];
    if (c == '"' && field.empty()) {
      const std::size_t start_line = line;
      ++i;
      bool closed = false;
      while (i < text.size()) {
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field.push_back('"');
            i += 2;
          } else {
            ++i;
            closed = true;
            break;
          }
        } else {
          if (text[i] == '\n') ++line;
          field.push_back(text[i++]);
        }
      }
      if (!closed) throw ValidationError(source, start_line, "unterminated quoted field");
      if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
        throw ValidationError(source, line, "unexpected character after closing quote");
      continue;
    }
    if (c == ',') {
      end_field();
      ++i;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      ++i;
      end_record();
      ++line;
    } else {
      field.push_back(c);
      ++i;
    }
  }
  if (record_open) end_record();

  // Drop blank lines (a single empty field).
  std::erase_if(records, [](const Record& r) {
    return r.fields.size() == 1 && r.fields[0].empty();
  });
  return records;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Header-indexed view over a parsed file.
class Table {
 public:
  Table(std::vector<Record> records, std::string source) : source_(std::move(source)) {
    if (records.empty()) throw ValidationError(source_ + ": missing header row");
    header_ = std::move(records.front().fields);
    for (std::size_t c = 0; c < header_.size(); ++c) index_.emplace(header_[c], c);
    rows_.assign(std::make_move_iterator(records.begin() + 1),
                 std::make_move_iterator(records.end()));
    for (const Record& r : rows_) {
      if (r.fields.size() != header_.size())
        throw ValidationError(source_, r.line,
                              "expected " + std::to_string(header_.size()) + " fields, found " +
                                  std::to_string(r.fields.size()));
    }
  }

  static Table from_file(const std::string& path) {
    return Table(parse(read_file(path), path), path);
  }

  const std::string& source() const { return source_; }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<Record>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  bool has_column(std::string_view name) const { return index_.count(std::string(name)) > 0; }

  std::size_t column(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end())
      throw ValidationError(source_, 1, "missing column '" + std::string(name) + "'");
    return it->second;
  }

  // Renames header columns (alias -> canonical) for files whose layout
  // differs from the documented one.
  void apply_aliases(const std::unordered_map<std::string, std::string>& aliases) {
    for (auto& h : header_) {
      auto it = aliases.find(h);
      if (it != aliases.end() && !has_column(it->second)) h = it->second;
    }
    index_.clear();
    for (std::size_t c = 0; c < header_.size(); ++c) index_.emplace(header_[c], c);
  }

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Record> rows_;
};

// -- Field conversion ---------------------------------------------------------

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

template <class T>
std::optional<T> to_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// -- Writing ------------------------------------------------------------------

inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// Shortest representation that round-trips; identical on every run.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <class... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((emit(fields, first)), ...);
    out_ << '\n';
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << escape(fields[i]);
    }
    out_ << '\n';
  }

 private:
  template <class F>
  void emit(const F& f, bool& first) {
    if (!first) out_ << ',';
    first = false;
    if constexpr (std::is_floating_point_v<F>) {
      out_ << format_double(static_cast<double>(f));
    } else if constexpr (std::is_arithmetic_v<F>) {
      out_ << f;
    } else {
      out_ << escape(std::string_view(f));
    }
  }

  std::ostream& out_;
};

}  // namespace cdm::csv
