#pragma once

#include <string>
#include <vector>

#include "sdvar/matcalc.hpp"

namespace sdvar {

struct Dataset {
  std::vector<std::string> dates;
  Matrix values;  // centered when requested at ingestion
  std::vector<std::string> names;
  Vector column_means;
  std::string source_sha256;
};

// CSV with a header row; first column a date (ISO 8601 or YYYY-MM, strictly
// increasing), remaining columns numeric. Missing or malformed cells are
// rejected with their row number.
Dataset ingest(const std::string& path, bool center = true);

void write_csv(const std::string& path, const Dataset& ds);

// Shortest decimal form that round-trips the exact binary value.
std::string format_double(double x);

}  // namespace sdvar
