#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fds {

// Column-major-by-name table of per-step samples.
class Trace {
 public:
  Trace() = default;
  explicit Trace(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return data_.size(); }
  bool has(const std::string& name) const;
  // Throws FormatError naming the missing column.
  std::size_t index(const std::string& name) const;
  double at(std::size_t row, const std::string& name) const { return data_[row][index(name)]; }
  const std::vector<double>& row(std::size_t r) const { return data_[r]; }
  std::vector<double> column(const std::string& name) const;

  // Throws FormatError when the width is wrong or t does not increase.
  void append(std::vector<double> row);

  std::string comment;  // written as a leading "# ..." line

  // Round-trips exactly (17 significant digits).
  void write_csv(std::ostream& os) const;
  void write_csv(const std::string& path) const;
  static Trace read_csv(std::istream& is);
  static Trace read_csv(const std::string& path);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> data_;
};

}  // namespace fds
