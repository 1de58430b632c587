#include "fds/trace.hpp"

#include "fds/types.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fds {

Trace::Trace(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty() || columns_.front() != "t") throw FormatError("trace must start with column 't'");
}

bool Trace::has(const std::string& name) const {
  return std::find(columns_.begin(), columns_.end(), name) != columns_.end();
}

std::size_t Trace::index(const std::string& name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) throw FormatError("trace has no column '" + name + "'");
  return static_cast<std::size_t>(it - columns_.begin());
}

std::vector<double> Trace::column(const std::string& name) const {
  const std::size_t c = index(name);
  std::vector<double> out;
  out.reserve(data_.size());
  for (const auto& r : data_) out.push_back(r[c]);
  return out;
}

void Trace::append(std::vector<double> row) {
  if (row.size() != columns_.size()) {
    throw FormatError("trace row has " + std::to_string(row.size()) + " values, expected " +
                      std::to_string(columns_.size()));
  }
  if (!data_.empty() && !(row[0] > data_.back()[0])) throw FormatError("trace time must increase strictly");
  data_.push_back(std::move(row));
}

void Trace::write_csv(std::ostream& os) const {
  if (!comment.empty()) os << "# " << comment << '\n';
  for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
  os << '\n';
  char buf[32];
  for (const auto& r : data_) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      const auto res = std::to_chars(buf, buf + sizeof buf, r[i]);
      if (i) os << ',';
      os.write(buf, res.ptr - buf);
    }
    os << '\n';
  }
}

void Trace::write_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot write trace to '" + path + "'");
  write_csv(f);
}

Trace Trace::read_csv(std::istream& is) {
  std::string line;
  std::string comment;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '#') {
      comment = line.size() > 2 ? line.substr(2) : "";
      continue;
    }
    break;
  }
  if (line.empty()) throw FormatError("trace has no header row");
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  Trace t(cols);
  t.comment = comment;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(cols.size());
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      double v = 0.0;
      const auto res = std::from_chars(p, comma, v);
      if (res.ec != std::errc() || res.ptr != comma) {
        throw FormatError("trace line " + std::to_string(line_no) + ": bad number");
      }
      row.push_back(v);
      p = comma + 1;
    }
    try {
      t.append(std::move(row));
    } catch (const FormatError& e) {
      throw FormatError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return t;
}

Trace Trace::read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot read trace '" + path + "'");
  return read_csv(f);
}

}  // namespace fds
