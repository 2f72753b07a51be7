#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pathcalc/path.hpp"

namespace pathcalc {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& cell, std::size_t line_no) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && (*end == ' ' || *end == '\r')) ++end;
  if (end == begin || *end != '\0')
    throw std::runtime_error("path csv: bad number '" + cell + "' on line " +
                             std::to_string(line_no));
  return v;
}

}  // namespace

void write_csv(std::ostream& out, const CadlagPath& path) {
  out << 't';
  for (int c = 0; c < path.dimension(); ++c) out << ",x" << (c + 1);
  out << '\n';
  const auto times = path.grid().times();
  for (std::size_t k = 0; k < path.size(); ++k) {
    out << format_double(times[k]);
    for (int c = 0; c < path.dimension(); ++c)
      out << ',' << format_double(path.at(k, c));
    out << '\n';
  }
}

CadlagPath read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("path csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  if (header.size() < 2 || header[0] != "t")
    throw std::runtime_error("path csv: header must be t,x1,...,xd");
  const int d = static_cast<int>(header.size()) - 1;
  for (int c = 0; c < d; ++c) {
    if (header[c + 1] != "x" + std::to_string(c + 1))
      throw std::runtime_error("path csv: unexpected column '" + header[c + 1] +
                               "'");
  }

  std::vector<double> times;
  std::vector<std::vector<double>> cols(d);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size())
      throw std::runtime_error("path csv: wrong column count on line " +
                               std::to_string(line_no));
    const double t = parse_double(cells[0], line_no);
    if (times.empty() && t != 0.0)
      throw std::runtime_error("path csv: first row must have t=0");
    if (!times.empty() && !(t > times.back()))
      throw std::runtime_error("path csv: times unsorted or duplicated on line " +
                               std::to_string(line_no));
    times.push_back(t);
    for (int c = 0; c < d; ++c) cols[c].push_back(parse_double(cells[c + 1], line_no));
  }
  if (times.empty()) throw std::runtime_error("path csv: no rows");

  std::vector<double> values;
  values.reserve(times.size() * d);
  for (const auto& col : cols) values.insert(values.end(), col.begin(), col.end());
  return CadlagPath(Partition(std::move(times)), d, std::move(values));
}

void write_csv_file(const std::string& file, const CadlagPath& path) {
  std::ofstream out(file);
  if (!out) throw std::ios_base::failure("cannot open " + file + " for writing");
  write_csv(out, path);
  if (!out) throw std::ios_base::failure("write failed: " + file);
}

CadlagPath read_csv_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::ios_base::failure("cannot open " + file);
  return read_csv(in);
}

}  // namespace pathcalc
