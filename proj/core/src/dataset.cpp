#include "sdvar/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "sdvar/manifest.hpp"

namespace sdvar {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

struct CalendarStamp {
  int year, month, day;
  bool operator<(const CalendarStamp& o) const {
    if (year != o.year) return year < o.year;
    if (month != o.month) return month < o.month;
    return day < o.day;
  }
};

bool parse_int(const std::string& s, std::size_t from, std::size_t len,
               int& out) {
  if (from + len > s.size()) return false;
  out = 0;
  for (std::size_t i = from; i < from + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    out = out * 10 + (s[i] - '0');
  }
  return true;
}

// Accepts YYYY-MM and YYYY-MM-DD.
bool parse_date(const std::string& s, CalendarStamp& out) {
  if (s.size() != 7 && s.size() != 10) return false;
  if (s[4] != '-') return false;
  if (s.size() == 10 && s[7] != '-') return false;
  if (!parse_int(s, 0, 4, out.year) || !parse_int(s, 5, 2, out.month))
    return false;
  out.day = 1;
  if (s.size() == 10 && !parse_int(s, 8, 2, out.day)) return false;
  return out.month >= 1 && out.month <= 12 && out.day >= 1 && out.day <= 31;
}

[[noreturn]] void reject(const std::string& path, long row,
                         const std::string& why) {
  throw std::runtime_error(path + ", row " + std::to_string(row) + ": " + why);
}

}  // namespace

Dataset ingest(const std::string& path, bool center) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);

  Dataset ds;
  ds.source_sha256 = sha256_file(path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_row(line);
  if (header.size() < 2)
    throw std::runtime_error(path + ": need a date column and data columns");
  ds.names.assign(header.begin() + 1, header.end());
  const std::size_t n = ds.names.size();

  std::vector<std::string> dates;
  std::vector<double> flat;
  CalendarStamp prev{0, 0, 0};
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (in.peek() == std::char_traits<char>::eof()) break;
      reject(path, row, "blank line");
    }
    const std::vector<std::string> cells = split_row(line);
    if (cells.size() != n + 1)
      reject(path, row,
             "expected " + std::to_string(n + 1) + " cells, found " +
                 std::to_string(cells.size()));
    CalendarStamp stamp;
    if (!parse_date(cells[0], stamp))
      reject(path, row, "unparseable date '" + cells[0] + "'");
    if (!dates.empty() && !(prev < stamp))
      reject(path, row, "dates not strictly increasing at '" + cells[0] + "'");
    prev = stamp;
    dates.push_back(cells[0]);
    for (std::size_t j = 1; j <= n; ++j) {
      if (cells[j].empty()) reject(path, row, "missing value");
      double v = 0.0;
      const char* first = cells[j].data();
      const char* last = first + cells[j].size();
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last)
        reject(path, row, "non-numeric cell '" + cells[j] + "'");
      flat.push_back(v);
    }
  }
  const auto t_len = static_cast<Eigen::Index>(dates.size());
  if (t_len == 0) throw std::runtime_error(path + ": no data rows");

  ds.dates = std::move(dates);
  ds.values = Matrix(t_len, static_cast<Eigen::Index>(n));
  for (Eigen::Index t = 0; t < t_len; ++t)
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j)
      ds.values(t, j) = flat[static_cast<std::size_t>(t * n + j)];
  ds.column_means = ds.values.colwise().mean().transpose();
  if (center)
    ds.values.rowwise() -= ds.column_means.transpose();
  else
    ds.column_means.setZero();
  return ds;
}

void write_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "date";
  for (const std::string& name : ds.names) out << ',' << name;
  out << '\n';
  for (Eigen::Index t = 0; t < ds.values.rows(); ++t) {
    out << ds.dates[static_cast<std::size_t>(t)];
    for (Eigen::Index j = 0; j < ds.values.cols(); ++j)
      out << ',' << format_double(ds.values(t, j));
    out << '\n';
  }
}

std::string format_double(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

}  // namespace sdvar
