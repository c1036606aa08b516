#include "meglm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "meglm/errors.hpp"

namespace meglm {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

Dataset Dataset::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file '" + path + "'");
  return parse_csv(in, path);
}

Dataset Dataset::parse_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) throw InputError(source + ": missing header row");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i].empty())
      throw InputError(source + ": empty column name at position " + std::to_string(i + 1));
    for (std::size_t j = 0; j < i; ++j)
      if (header[j] == header[i]) throw InputError(source + ": duplicate column '" + header[i] + "'");
  }

  std::vector<Column> cols(header.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size())
      throw InputError(source + ": row " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(header.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto& f = fields[c];
      if (f == "NA") {
        cols[c].push_back(std::nullopt);
        continue;
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v))
        throw InputError(source + ": row " + std::to_string(line_no) + ", column '" + header[c] +
                         "': cannot parse '" + f + "' as a number");
      cols[c].push_back(v);
    }
  }

  Dataset ds;
  for (std::size_t c = 0; c < header.size(); ++c) ds.add_column(header[c], std::move(cols[c]));
  return ds;
}

void Dataset::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_csv(out);
}

void Dataset::write_csv(std::ostream& out) const {
  for (std::size_t c = 0; c < names_.size(); ++c) out << (c ? "," : "") << names_[c];
  out << '\n';
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < names_.size(); ++c) {
      if (c) out << ',';
      const auto& v = columns_[c][r];
      out << (v ? format_double(*v) : std::string("NA"));
    }
    out << '\n';
  }
}

void Dataset::add_column(const std::string& name, Column values) {
  if (has(name)) throw InputError("duplicate column '" + name + "'");
  if (!names_.empty() && values.size() != rows_)
    throw InputError("column '" + name + "' has " + std::to_string(values.size()) + " rows, expected " +
                     std::to_string(rows_));
  rows_ = values.size();
  names_.push_back(name);
  columns_.push_back(std::move(values));
}

void Dataset::add_column(const std::string& name, const std::vector<double>& values) {
  add_column(name, Column(values.begin(), values.end()));
}

bool Dataset::has(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const Column& Dataset::column(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw InputError("data has no column '" + name + "'");
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

std::vector<double> Dataset::complete(const std::string& name) const {
  const auto& col = column(name);
  std::vector<double> out;
  out.reserve(col.size());
  for (std::size_t r = 0; r < col.size(); ++r) {
    if (!col[r]) throw InputError("column '" + name + "' has an NA at data row " + std::to_string(r + 1));
    out.push_back(*col[r]);
  }
  return out;
}

}  // namespace meglm
