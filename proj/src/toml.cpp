#include "maflow/toml.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace maflow::toml {

Value Value::of_bool(bool b) {
  Value v;
  v.kind_ = Kind::Bool;
  v.b_ = b;
  v.table_.reset();
  return v;
}
Value Value::of_int(long long x) {
  Value v;
  v.kind_ = Kind::Int;
  v.i_ = x;
  v.table_.reset();
  return v;
}
Value Value::of_float(double x) {
  Value v;
  v.kind_ = Kind::Float;
  v.f_ = x;
  v.table_.reset();
  return v;
}
Value Value::of_string(std::string s) {
  Value v;
  v.kind_ = Kind::Str;
  v.s_ = std::move(s);
  v.table_.reset();
  return v;
}
Value Value::of_array() {
  Value v;
  v.kind_ = Kind::Array;
  v.table_.reset();
  return v;
}
Value Value::of_table() { return Value(); }

bool Value::as_bool() const {
  if (kind_ != Kind::Bool) throw std::runtime_error("toml: not a bool");
  return b_;
}
long long Value::as_int() const {
  if (kind_ != Kind::Int) throw std::runtime_error("toml: not an integer");
  return i_;
}
double Value::as_float() const {
  if (kind_ == Kind::Int) return double(i_);
  if (kind_ != Kind::Float) throw std::runtime_error("toml: not a number");
  return f_;
}
const std::string& Value::as_string() const {
  if (kind_ != Kind::Str) throw std::runtime_error("toml: not a string");
  return s_;
}
const std::vector<Value>& Value::as_array() const {
  if (kind_ != Kind::Array) throw std::runtime_error("toml: not an array");
  return arr_;
}
std::vector<Value>& Value::as_array() {
  if (kind_ != Kind::Array) throw std::runtime_error("toml: not an array");
  return arr_;
}
const Table& Value::as_table() const {
  if (kind_ != Kind::Table) throw std::runtime_error("toml: not a table");
  return *table_;
}
Table& Value::as_table() {
  if (kind_ != Kind::Table) throw std::runtime_error("toml: not a table");
  return *table_;
}

namespace {

struct Cursor {
  const std::string& s;
  size_t i = 0;
  int line = 1;

  bool eof() const { return i >= s.size(); }
  char peek() const { return s[i]; }
  char next() {
    char c = s[i++];
    if (c == '\n') ++line;
    return c;
  }
  void skip_ws_inline() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++i;
  }
};

void skip_to_eol(Cursor& c) {
  while (!c.eof() && c.peek() != '\n') c.next();
}

std::string parse_key(Cursor& c) {
  c.skip_ws_inline();
  std::string k;
  while (!c.eof()) {
    char ch = c.peek();
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' ||
        ch == '.') {
      k.push_back(c.next());
    } else {
      break;
    }
  }
  if (k.empty()) throw ParseError(c.line, "expected key");
  return k;
}

Value parse_scalar(Cursor& c);

Value parse_array(Cursor& c) {
  Value arr = Value::of_array();
  c.next(); // '['
  for (;;) {
    while (!c.eof() &&
           (c.peek() == ' ' || c.peek() == '\t' || c.peek() == '\n' ||
            c.peek() == ','))
      c.next();
    if (c.eof()) throw ParseError(c.line, "unterminated array");
    if (c.peek() == '#') {
      skip_to_eol(c);
      continue;
    }
    if (c.peek() == ']') {
      c.next();
      break;
    }
    arr.as_array().push_back(parse_scalar(c));
  }
  return arr;
}

Value parse_scalar(Cursor& c) {
  c.skip_ws_inline();
  if (c.eof()) throw ParseError(c.line, "expected value");
  char ch = c.peek();
  if (ch == '[') return parse_array(c);
  if (ch == '"') {
    c.next();
    std::string s;
    while (!c.eof() && c.peek() != '"') {
      char x = c.next();
      if (x == '\\' && !c.eof()) {
        char e = c.next();
        switch (e) {
          case 'n': s.push_back('\n'); break;
          case 't': s.push_back('\t'); break;
          case '"': s.push_back('"'); break;
          case '\\': s.push_back('\\'); break;
          default: throw ParseError(c.line, "unsupported escape");
        }
      } else {
        s.push_back(x);
      }
    }
    if (c.eof()) throw ParseError(c.line, "unterminated string");
    c.next();
    return Value::of_string(s);
  }
  std::string tok;
  while (!c.eof()) {
    char x = c.peek();
    if (x == ' ' || x == '\t' || x == '\n' || x == ',' || x == ']' || x == '#')
      break;
    tok.push_back(c.next());
  }
  if (tok == "true") return Value::of_bool(true);
  if (tok == "false") return Value::of_bool(false);
  if (tok.empty()) throw ParseError(c.line, "expected value");
  const bool looks_float = tok.find_first_of(".eEnN") != std::string::npos;
  errno = 0;
  char* end = nullptr;
  if (!looks_float) {
    long long v = std::strtoll(tok.c_str(), &end, 10);
    if (errno == 0 && end && *end == '\0') return Value::of_int(v);
  }
  end = nullptr;
  double d = std::strtod(tok.c_str(), &end);
  if (end && *end == '\0') return Value::of_float(d);
  throw ParseError(c.line, "cannot parse value '" + tok + "'");
}

std::vector<std::string> split_path(const std::string& dotted, int line) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : dotted) {
    if (ch == '.') {
      if (cur.empty()) throw ParseError(line, "empty path segment");
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (cur.empty()) throw ParseError(line, "empty path segment");
  parts.push_back(cur);
  return parts;
}

Table* descend(Table* root, const std::vector<std::string>& path, int line,
               size_t upto) {
  Table* t = root;
  for (size_t k = 0; k < upto; ++k) {
    auto it = t->find(path[k]);
    if (it == t->end()) {
      it = t->emplace(path[k], Value::of_table()).first;
    }
    if (it->second.kind() == Value::Kind::Table) {
      t = &it->second.as_table();
    } else if (it->second.kind() == Value::Kind::Array) {
      auto& a = it->second.as_array();
      if (a.empty() || a.back().kind() != Value::Kind::Table)
        throw ParseError(line, "path conflicts with non-table array");
      t = &a.back().as_table();
    } else {
      throw ParseError(line, "path segment '" + path[k] + "' is not a table");
    }
  }
  return t;
}

} // namespace

Table parse(const std::string& text) {
  Table root;
  Table* current = &root;
  Cursor c{text};
  while (!c.eof()) {
    c.skip_ws_inline();
    if (c.eof()) break;
    char ch = c.peek();
    if (ch == '\n') {
      c.next();
      continue;
    }
    if (ch == '#') {
      skip_to_eol(c);
      continue;
    }
    if (ch == '[') {
      c.next();
      bool array_of_tables = false;
      if (!c.eof() && c.peek() == '[') {
        array_of_tables = true;
        c.next();
      }
      const int line = c.line;
      std::string name = parse_key(c);
      c.skip_ws_inline();
      if (c.eof() || c.peek() != ']') throw ParseError(c.line, "expected ']'");
      c.next();
      if (array_of_tables) {
        if (c.eof() || c.peek() != ']')
          throw ParseError(c.line, "expected ']]'");
        c.next();
      }
      auto path = split_path(name, line);
      Table* parent = descend(&root, path, line, path.size() - 1);
      const std::string& leaf = path.back();
      if (array_of_tables) {
        auto it = parent->find(leaf);
        if (it == parent->end()) it = parent->emplace(leaf, Value::of_array()).first;
        if (it->second.kind() != Value::Kind::Array)
          throw ParseError(line, "'" + leaf + "' is not an array of tables");
        it->second.as_array().push_back(Value::of_table());
        current = &it->second.as_array().back().as_table();
      } else {
        auto it = parent->find(leaf);
        if (it == parent->end()) it = parent->emplace(leaf, Value::of_table()).first;
        if (it->second.kind() != Value::Kind::Table)
          throw ParseError(line, "'" + leaf + "' is not a table");
        current = &it->second.as_table();
      }
      skip_to_eol(c);
      continue;
    }
    const int line = c.line;
    std::string key = parse_key(c);
    c.skip_ws_inline();
    if (c.eof() || c.peek() != '=') throw ParseError(c.line, "expected '='");
    c.next();
    Value v = parse_scalar(c);
    c.skip_ws_inline();
    if (!c.eof() && c.peek() == '#') skip_to_eol(c);
    auto path = split_path(key, line);
    Table* parent = descend(current, path, line, path.size() - 1);
    if (parent->count(path.back()))
      throw ParseError(line, "duplicate key '" + path.back() + "'");
    parent->emplace(path.back(), std::move(v));
  }
  return root;
}

Table parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const Value* find(const Table& t, const std::string& key) {
  auto it = t.find(key);
  return it == t.end() ? nullptr : &it->second;
}

double get_float(const Table& t, const std::string& key) {
  const Value* v = find(t, key);
  if (!v) throw std::runtime_error("missing key '" + key + "'");
  return v->as_float();
}
double get_float_or(const Table& t, const std::string& key, double dflt) {
  const Value* v = find(t, key);
  return v ? v->as_float() : dflt;
}
long long get_int(const Table& t, const std::string& key) {
  const Value* v = find(t, key);
  if (!v) throw std::runtime_error("missing key '" + key + "'");
  return v->as_int();
}
long long get_int_or(const Table& t, const std::string& key, long long dflt) {
  const Value* v = find(t, key);
  return v ? v->as_int() : dflt;
}
std::string get_string(const Table& t, const std::string& key) {
  const Value* v = find(t, key);
  if (!v) throw std::runtime_error("missing key '" + key + "'");
  return v->as_string();
}
std::string get_string_or(const Table& t, const std::string& key,
                          const std::string& dflt) {
  const Value* v = find(t, key);
  return v ? v->as_string() : dflt;
}
bool get_bool_or(const Table& t, const std::string& key, bool dflt) {
  const Value* v = find(t, key);
  return v ? v->as_bool() : dflt;
}
std::vector<double> get_float_array_or(const Table& t, const std::string& key,
                                       std::vector<double> dflt) {
  const Value* v = find(t, key);
  if (!v) return dflt;
  std::vector<double> out;
  for (const auto& e : v->as_array()) out.push_back(e.as_float());
  return out;
}

} // namespace maflow::toml
