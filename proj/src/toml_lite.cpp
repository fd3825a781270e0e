#include "homog/toml_lite.hpp"

#include "homog/common.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace homog {

namespace {

class TomlReader {
 public:
  explicit TomlReader(std::string_view text) : s_(text) {}

  nlohmann::json parse() {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* table = &root;
    while (true) {
      skip_blank_lines();
      if (at_end()) break;
      if (peek() == '[') {
        ++pos_;
        if (peek() == '[') fail("arrays of tables are not supported");
        skip_ws();
        std::vector<std::string> path = key_path();
        skip_ws();
        expect(']');
        table = &root;
        for (const auto& k : path) {
          nlohmann::json& next = (*table)[k];
          if (next.is_null()) next = nlohmann::json::object();
          if (!next.is_object()) fail("key '" + k + "' is not a table");
          table = &next;
        }
      } else {
        std::vector<std::string> path = key_path();
        skip_ws();
        expect('=');
        skip_ws();
        nlohmann::json value = parse_value();
        nlohmann::json* target = table;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
          nlohmann::json& next = (*target)[path[i]];
          if (next.is_null()) next = nlohmann::json::object();
          if (!next.is_object()) fail("key '" + path[i] + "' is not a table");
          target = &next;
        }
        if (target->contains(path.back())) fail("duplicate key '" + path.back() + "'");
        (*target)[path.back()] = std::move(value);
      }
      end_of_line();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    std::size_t line = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) line += s_[i] == '\n';
    throw ParseError(line, "toml: " + msg);
  }

  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!at_end() && peek() != '\n') ++pos_;
    }
  }

  void skip_blank_lines() {
    while (!at_end()) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  // Whitespace, comments and newlines, as allowed inside arrays.
  void skip_all() {
    while (!at_end()) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  void end_of_line() {
    skip_ws();
    skip_comment();
    if (at_end()) return;
    if (peek() == '\r') ++pos_;
    if (peek() != '\n') fail("unexpected trailing characters");
    ++pos_;
  }

  std::string key() {
    if (peek() == '"') return basic_string();
    if (peek() == '\'') return literal_string();
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                         peek() == '-')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::vector<std::string> key_path() {
    std::vector<std::string> path{key()};
    while (true) {
      skip_ws();
      if (peek() != '.') break;
      ++pos_;
      skip_ws();
      path.push_back(key());
    }
    return path;
  }

  std::string basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (at_end()) fail("unterminated escape");
        char e = s_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  std::string literal_string() {
    expect('\'');
    const std::size_t start = pos_;
    while (!at_end() && peek() != '\'' && peek() != '\n') ++pos_;
    if (peek() != '\'') fail("unterminated string");
    std::string out(s_.substr(start, pos_ - start));
    ++pos_;
    return out;
  }

  nlohmann::json number() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' ||
                         peek() == '-' || peek() == '.' || peek() == '_')) {
      ++pos_;
    }
    std::string tok;
    for (char c : s_.substr(start, pos_ - start)) {
      if (c != '_') tok += c;
    }
    if (tok.empty()) fail("expected a value");
    if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
    if (tok == "-inf") return -std::numeric_limits<double>::infinity();
    if (tok == "nan" || tok == "+nan" || tok == "-nan") fail("nan is not accepted");
    const bool is_float = tok.find_first_of(".eE") != std::string::npos;
    const char* first = tok.data() + (tok[0] == '+' ? 1 : 0);
    const char* last = tok.data() + tok.size();
    if (is_float) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || p != last) fail("malformed number '" + tok + "'");
      return v;
    }
    long long v = 0;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) fail("malformed number '" + tok + "'");
    return v;
  }

  nlohmann::json parse_value() {
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') {
      ++pos_;
      nlohmann::json arr = nlohmann::json::array();
      while (true) {
        skip_all();
        if (peek() == ']') {
          ++pos_;
          break;
        }
        arr.push_back(parse_value());
        skip_all();
        if (peek() == ',') {
          ++pos_;
        } else if (peek() == ']') {
          ++pos_;
          break;
        } else {
          fail("expected ',' or ']' in array");
        }
      }
      return arr;
    }
    if (c == '{') {
      ++pos_;
      nlohmann::json obj = nlohmann::json::object();
      skip_ws();
      if (peek() == '}') {
        ++pos_;
        return obj;
      }
      while (true) {
        skip_ws();
        std::vector<std::string> path = key_path();
        skip_ws();
        expect('=');
        skip_ws();
        nlohmann::json* target = &obj;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) target = &(*target)[path[i]];
        (*target)[path.back()] = parse_value();
        skip_ws();
        if (peek() == ',') {
          ++pos_;
        } else if (peek() == '}') {
          ++pos_;
          break;
        } else {
          fail("expected ',' or '}' in inline table");
        }
      }
      return obj;
    }
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return number();
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

nlohmann::json parse_toml(std::string_view text) { return TomlReader(text).parse(); }

}  // namespace homog
