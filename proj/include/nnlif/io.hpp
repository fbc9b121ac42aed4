#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "nnlif/params.hpp"

namespace nnlif {

// Flat key-value config with [section] headers; keys are addressed as
// "section.key".  '#' and ';' start comments.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_text(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  double get_num(const std::string& key) const;
  double get_num(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

// 17-significant-digit decimal formatting: the bit-stable CSV contract
std::string fmt_g17(double x);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::span<const std::string> header);
  void row(std::span<const double> values);
  ~CsvWriter();

 private:
  struct Impl;
  Impl* impl_;
};

// key=value lines, one per entry, LF endings, insertion order kept
void write_summary(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& kv);

// two-column numeric table (with optional header row), used for custom
// initial conditions and rate histories
void read_table(const std::string& path, std::vector<double>& col0,
                std::vector<double>& col1);

} // namespace nnlif
