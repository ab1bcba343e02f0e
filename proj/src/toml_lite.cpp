#include "dispml/toml_lite.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "dispml/types.hpp"

namespace dispml {

namespace {

using nlohmann::json;

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;

  bool done() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }
  char take() { return s[pos++]; }
  void skip_ws() {
    while (!done() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\n' || s[pos] == '\r'))
      ++pos;
  }
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "config parse error near offset " << pos << ": " << what;
    throw ConfigError(os.str());
  }
};

json parse_value(Cursor& c);

std::string parse_string(Cursor& c) {
  const char quote = c.take();  // " or '
  std::string out;
  while (!c.done()) {
    char ch = c.take();
    if (ch == quote) return out;
    if (quote == '"' && ch == '\\' && !c.done()) {
      char esc = c.take();
      switch (esc) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: out.push_back(esc); break;
      }
      continue;
    }
    out.push_back(ch);
  }
  c.fail("unterminated string");
}

std::string parse_bare_key(Cursor& c) {
  std::string key;
  while (!c.done()) {
    char ch = c.peek();
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-') {
      key.push_back(c.take());
    } else {
      break;
    }
  }
  if (key.empty()) c.fail("expected a key");
  return key;
}

json parse_number_or_literal(Cursor& c) {
  std::string tok;
  while (!c.done()) {
    char ch = c.peek();
    if (ch == ',' || ch == ']' || ch == '}' || ch == '\n' || ch == '#' || ch == ' ' ||
        ch == '\t' || ch == '\r')
      break;
    tok.push_back(c.take());
  }
  if (tok == "true") return true;
  if (tok == "false") return false;
  if (tok == "inf") return std::numeric_limits<double>::infinity();
  if (tok == "nan") c.fail("nan is not an accepted value");
  try {
    if (tok.find_first_of(".eE") == std::string::npos &&
        tok.find("inf") == std::string::npos) {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used == tok.size()) return v;
    }
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) c.fail("malformed number '" + tok + "'");
    return v;
  } catch (const std::exception&) {
    c.fail("malformed value '" + tok + "'");
  }
}

void skip_ws_comments(Cursor& c) {
  for (;;) {
    c.skip_ws();
    if (!c.done() && c.peek() == '#') {
      while (!c.done() && c.take() != '\n') {
      }
      continue;
    }
    return;
  }
}

json parse_array(Cursor& c) {
  c.take();  // [
  json arr = json::array();
  for (;;) {
    skip_ws_comments(c);
    if (c.done()) c.fail("unterminated array");
    if (c.peek() == ']') {
      c.take();
      return arr;
    }
    arr.push_back(parse_value(c));
    skip_ws_comments(c);
    if (c.done()) c.fail("unterminated array");
    if (c.peek() == ',') {
      c.take();
      continue;
    }
    if (c.peek() == ']') {
      c.take();
      return arr;
    }
    c.fail("expected ',' or ']' in array");
  }
}

json parse_inline_table(Cursor& c) {
  c.take();  // {
  json obj = json::object();
  skip_ws_comments(c);
  if (!c.done() && c.peek() == '}') {
    c.take();
    return obj;
  }
  for (;;) {
    skip_ws_comments(c);
    const std::string key =
        (!c.done() && (c.peek() == '"' || c.peek() == '\'')) ? parse_string(c)
                                                             : parse_bare_key(c);
    skip_ws_comments(c);
    if (c.done() || c.take() != '=') c.fail("expected '=' in inline table");
    skip_ws_comments(c);
    obj[key] = parse_value(c);
    skip_ws_comments(c);
    if (c.done()) c.fail("unterminated inline table");
    const char ch = c.take();
    if (ch == '}') return obj;
    if (ch != ',') c.fail("expected ',' or '}' in inline table");
  }
}

json parse_value(Cursor& c) {
  skip_ws_comments(c);
  if (c.done()) c.fail("expected a value");
  const char ch = c.peek();
  if (ch == '"' || ch == '\'') return parse_string(c);
  if (ch == '[') return parse_array(c);
  if (ch == '{') return parse_inline_table(c);
  return parse_number_or_literal(c);
}

json* descend(json& root, const std::string& dotted) {
  json* node = &root;
  std::size_t start = 0;
  while (start <= dotted.size()) {
    const std::size_t dot = dotted.find('.', start);
    const std::string part = dotted.substr(start, dot == std::string::npos
                                                      ? std::string::npos
                                                      : dot - start);
    if (part.empty()) throw ConfigError("empty table-name component in [" + dotted + "]");
    node = &(*node)[part];
    if (!node->is_object() && !node->is_null()) // overwriting a scalar with a table
      throw ConfigError("table [" + dotted + "] collides with an existing value");
    if (node->is_null()) *node = json::object();
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return node;
}

}  // namespace

nlohmann::json parse_toml_lite(const std::string& text) {
  json root = json::object();
  json* table = &root;
  Cursor c{text};

  for (;;) {
    skip_ws_comments(c);
    if (c.done()) break;
    if (c.peek() == '[') {
      c.take();
      std::string name;
      while (!c.done() && c.peek() != ']') name.push_back(c.take());
      if (c.done()) c.fail("unterminated table header");
      c.take();  // ]
      if (!name.empty() && name.front() == '[')
        c.fail("arrays of tables are not supported; use an inline array");
      table = descend(root, name);
      continue;
    }
    const std::string key =
        (c.peek() == '"' || c.peek() == '\'') ? parse_string(c) : parse_bare_key(c);
    skip_ws_comments(c);
    if (c.done() || c.take() != '=') c.fail("expected '=' after key '" + key + "'");
    (*table)[key] = parse_value(c);
  }
  return root;
}

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    try {
      return nlohmann::json::parse(text);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("bad JSON in ") + path + ": " + e.what());
    }
  }
  return parse_toml_lite(text);
}

}  // namespace dispml
