// Minimal TOML reader covering the scenario file format: tables, arrays of
// tables, and key/value pairs with bool, integer, float, string and flat
// array values. Line/column aware errors.
#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace maflow::toml {

class Value;
using Table = std::map<std::string, Value>;

class Value {
public:
  enum class Kind { Bool, Int, Float, Str, Array, Table };

  Value() : kind_(Kind::Table), table_(new maflow::toml::Table) {}
  static Value of_bool(bool b);
  static Value of_int(long long v);
  static Value of_float(double v);
  static Value of_string(std::string s);
  static Value of_array();
  static Value of_table();

  Kind kind() const { return kind_; }
  bool as_bool() const;
  long long as_int() const;
  double as_float() const; // accepts Int
  const std::string& as_string() const;
  const std::vector<Value>& as_array() const;
  std::vector<Value>& as_array();
  const maflow::toml::Table& as_table() const;
  maflow::toml::Table& as_table();

private:
  Kind kind_ = Kind::Table;
  bool b_ = false;
  long long i_ = 0;
  double f_ = 0.0;
  std::string s_;
  std::vector<Value> arr_;
  std::shared_ptr<maflow::toml::Table> table_;
};

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_) + ": " + what),
        line(line_) {}
};

Table parse(const std::string& text);
Table parse_file(const std::string& path);

// Lookup helpers; throw std::runtime_error naming the missing/ill-typed key.
const Value* find(const Table& t, const std::string& key);
double get_float(const Table& t, const std::string& key);
double get_float_or(const Table& t, const std::string& key, double dflt);
long long get_int(const Table& t, const std::string& key);
long long get_int_or(const Table& t, const std::string& key, long long dflt);
std::string get_string(const Table& t, const std::string& key);
std::string get_string_or(const Table& t, const std::string& key,
                          const std::string& dflt);
bool get_bool_or(const Table& t, const std::string& key, bool dflt);
std::vector<double> get_float_array_or(const Table& t, const std::string& key,
                                       std::vector<double> dflt);

} // namespace maflow::toml
