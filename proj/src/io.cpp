#include "nnlif/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nnlif {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace((unsigned char)s[a])) ++a;
  while (b > a && std::isspace((unsigned char)s[b - 1])) --b;
  return s.substr(a, b - a);
}

} // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

Config Config::parse_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t c = line.find_first_of("#;");
    if (c != std::string::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw InvalidParameter("config: bad section at line " +
                               std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidParameter("config: missing '=' at line " +
                             std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw InvalidParameter("config: empty key at line " +
                             std::to_string(lineno));
    cfg.kv_[section.empty() ? key : section + "." + key] = val;
  }
  return cfg;
}

std::string Config::get_str(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw InvalidParameter("config: missing key " + key);
  return it->second;
}

std::string Config::get_str(const std::string& key,
                            const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::get_num(const std::string& key) const {
  std::string v = get_str(key);
  size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw InvalidParameter("config: non-numeric value for " + key);
  }
  if (pos != v.size())
    throw InvalidParameter("config: trailing junk in value for " + key);
  return x;
}

double Config::get_num(const std::string& key, double fallback) const {
  return has(key) ? get_num(key) : fallback;
}

int Config::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  double x = get_num(key);
  int i = (int)x;
  if ((double)i != x) throw InvalidParameter("config: non-integer value for " + key);
  return i;
}

std::string fmt_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct CsvWriter::Impl {
  std::ofstream out;
};

CsvWriter::CsvWriter(const std::string& path,
                     std::span<const std::string> header)
    : impl_(new Impl) {
  impl_->out.open(path, std::ios::binary); // binary: LF endings everywhere
  if (!impl_->out) {
    delete impl_;
    throw InvalidParameter("csv: cannot open " + path);
  }
  for (size_t i = 0; i < header.size(); ++i)
    impl_->out << (i ? "," : "") << header[i];
  impl_->out << "\n";
}

void CsvWriter::row(std::span<const double> values) {
  for (size_t i = 0; i < values.size(); ++i)
    impl_->out << (i ? "," : "") << fmt_g17(values[i]);
  impl_->out << "\n";
}

CsvWriter::~CsvWriter() { delete impl_; }

void write_summary(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidParameter("summary: cannot open " + path);
  for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

void read_table(const std::string& path, std::vector<double>& col0,
                std::vector<double>& col1) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("table: cannot open " + path);
  col0.clear();
  col1.clear();
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a >> b)) {
      if (col0.empty()) continue; // tolerate one header row
      throw InvalidParameter("table: bad row in " + path);
    }
    col0.push_back(a);
    col1.push_back(b);
  }
  if (col0.size() < 2) throw InvalidParameter("table: too few rows in " + path);
}

} // namespace nnlif
