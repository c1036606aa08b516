#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace meglm {

/// One data column; std::nullopt marks an absent value (written as NA).
using Column = std::vector<std::optional<double>>;

/// Column-oriented numeric table read from / written to CSV with a header row.
class Dataset {
 public:
  Dataset() = default;

  static Dataset read_csv(const std::string& path);
  static Dataset parse_csv(std::istream& in, const std::string& source = "<stream>");

  void write_csv(const std::string& path) const;
  void write_csv(std::ostream& out) const;

  /// Appends a column; all columns must share the row count.
  void add_column(const std::string& name, Column values);
  void add_column(const std::string& name, const std::vector<double>& values);

  bool has(const std::string& name) const;
  const Column& column(const std::string& name) const;

  /// Column values, throwing InputError if any entry is absent.
  std::vector<double> complete(const std::string& name) const;

  std::size_t rows() const { return rows_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
};

}  // namespace meglm
