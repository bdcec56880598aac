#pragma once

// Deterministic report serialization: insertion-ordered JSON with fixed
// numeric formatting (%.15g reals), exact rationals as "num/den" strings, and
// RFC-4180 CSV quoting.  Identical content must serialize to identical bytes:
// no locale, pointer, or hash-order dependence anywhere.

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "rational.hpp"

namespace elld {

inline std::string fmt_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return std::string(buf);
}

inline std::string fmt_rational(const bigrat& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if ((unsigned char)ch < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", (unsigned)(unsigned char)ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out;
}

// Insertion-ordered JSON tree, just enough for the report schema.  Numbers
// are stored pre-formatted so every sink sees the same digits.
class JsonValue {
 public:
  static JsonValue object() { return JsonValue(Kind::object); }
  static JsonValue array() { return JsonValue(Kind::array); }
  static JsonValue real(double x) { return literal(fmt_real(x)); }
  static JsonValue integer(long long n) { return literal(std::to_string(n)); }
  static JsonValue boolean(bool b) { return literal(b ? "true" : "false"); }
  static JsonValue str(std::string s) {
    JsonValue v(Kind::string);
    v.text_ = std::move(s);
    return v;
  }
  static JsonValue rational(const bigrat& r) { return str(fmt_rational(r)); }

  JsonValue& set(const std::string& key, JsonValue v) {
    members_.emplace_back(key, std::move(v));
    return members_.back().second;
  }
  JsonValue& push(JsonValue v) {
    items_.push_back(std::move(v));
    return items_.back();
  }

  std::string dump() const {
    std::string out;
    write(out, 0);
    out += '\n';
    return out;
  }

 private:
  enum class Kind { literal, string, object, array };

  explicit JsonValue(Kind k) : kind_(k) {}
  static JsonValue literal(std::string s) {
    JsonValue v(Kind::literal);
    v.text_ = std::move(s);
    return v;
  }

  void write(std::string& out, int depth) const {
    const std::string pad((size_t)depth * 2, ' ');
    const std::string inner((size_t)(depth + 1) * 2, ' ');
    switch (kind_) {
      case Kind::literal:
        out += text_;
        break;
      case Kind::string:
        out += '"';
        out += json_escape(text_);
        out += '"';
        break;
      case Kind::object:
        if (members_.empty()) {
          out += "{}";
          break;
        }
        out += "{\n";
        for (size_t i = 0; i < members_.size(); ++i) {
          out += inner;
          out += '"';
          out += json_escape(members_[i].first);
          out += "\": ";
          members_[i].second.write(out, depth + 1);
          out += i + 1 < members_.size() ? ",\n" : "\n";
        }
        out += pad;
        out += '}';
        break;
      case Kind::array:
        if (items_.empty()) {
          out += "[]";
          break;
        }
        out += "[\n";
        for (size_t i = 0; i < items_.size(); ++i) {
          out += inner;
          items_[i].write(out, depth + 1);
          out += i + 1 < items_.size() ? ",\n" : "\n";
        }
        out += pad;
        out += ']';
        break;
    }
  }

  Kind kind_ = Kind::object;
  std::string text_;
  std::vector<std::pair<std::string, JsonValue>> members_;
  std::vector<JsonValue> items_;
};

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += '\n';
  return out;
}

}  // namespace elld
