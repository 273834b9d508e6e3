#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace astrolab {

/// Parse failure in any of the sectioned `key = value` text formats.
/// `line` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A loaded value violated a range or structural invariant. `key` names
/// the offending field.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(key) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct ConfigSection {
  std::string kind;   // e.g. "patch", "rock", "ambient", "mission"
  std::string label;  // optional name after the kind, e.g. "[patch NAME]"
  std::size_t line = 0;
  std::vector<ConfigEntry> entries;

  const ConfigEntry* find(const std::string& key) const {
    for (const auto& e : entries)
      if (e.key == key) return &e;
    return nullptr;
  }

  /// Last occurrence wins; callers that forbid duplicates check counts.
  const ConfigEntry* find_last(const std::string& key) const {
    const ConfigEntry* hit = nullptr;
    for (const auto& e : entries)
      if (e.key == key) hit = &e;
    return hit;
  }

  std::size_t count(const std::string& key) const {
    std::size_t n = 0;
    for (const auto& e : entries)
      if (e.key == key) ++n;
    return n;
  }
};

namespace detail {

inline std::string strip(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
    --e;
  return s.substr(b, e - b);
}

}  // namespace detail

/// Shared grammar: `#` starts a comment (anywhere on a line), section
/// headers are `[kind]` or `[kind LABEL]`, and sections hold `key = value`
/// lines. Keys may repeat; order is preserved.
inline std::vector<ConfigSection> parse_sections(const std::string& text) {
  std::vector<ConfigSection> sections;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string raw = eol == std::string::npos ? text.substr(pos)
                                               : text.substr(pos, eol - pos);
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (auto hash = raw.find('#'); hash != std::string::npos)
      raw = raw.substr(0, hash);
    const std::string line = detail::strip(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError(line_no, "unterminated section header");
      const std::string inner = detail::strip(line.substr(1, line.size() - 2));
      if (inner.empty()) throw ParseError(line_no, "empty section header");
      ConfigSection sec;
      sec.line = line_no;
      if (auto sp = inner.find(' '); sp != std::string::npos) {
        sec.kind = inner.substr(0, sp);
        sec.label = detail::strip(inner.substr(sp + 1));
      } else {
        sec.kind = inner;
      }
      sections.push_back(std::move(sec));
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(line_no, "expected `key = value`");
    ConfigEntry entry;
    entry.key = detail::strip(line.substr(0, eq));
    entry.value = detail::strip(line.substr(eq + 1));
    entry.line = line_no;
    if (entry.key.empty()) throw ParseError(line_no, "empty key");
    if (sections.empty())
      throw ParseError(line_no, "`key = value` before any section header");
    sections.back().entries.push_back(std::move(entry));
  }
  return sections;
}

/// Whitespace-split value fields ("x0 y0 x1 y1" etc).
inline std::vector<std::string> split_fields(const std::string& value) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < value.size()) {
    while (i < value.size() && (value[i] == ' ' || value[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < value.size() && value[j] != ' ' && value[j] != '\t') ++j;
    if (j > i) out.push_back(value.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "not a number: `" + s + "`");
  }
}

inline long long parse_int(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "not an integer: `" + s + "`");
  }
}

inline unsigned long long parse_uint(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    if (!s.empty() && s.front() == '-') throw std::invalid_argument(s);
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "not a non-negative integer: `" + s + "`");
  }
}

inline bool parse_bool(const std::string& s, std::size_t line) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ParseError(line, "expected true|false, got `" + s + "`");
}

}  // namespace astrolab
