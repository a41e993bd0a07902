#include "civqr/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace civqr {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // Trim surrounding whitespace and a possible trailing CR.
    std::size_t a = field.find_first_not_of(" \t\r");
    std::size_t b = field.find_last_not_of(" \t\r");
    fields.push_back(a == std::string::npos ? std::string()
                                            : field.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error(what); }

std::size_t find_column(const std::vector<std::string>& header,
                        const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  fail("missing column '" + name + "'");
}

double parse_cell(const std::vector<std::string>& fields, std::size_t col,
                  const std::string& name, std::size_t row) {
  const std::string at = " at row " + std::to_string(row) + ", column '" + name + "'";
  if (col >= fields.size()) fail("missing value" + at);
  const std::string& cell = fields[col];
  if (cell.empty()) fail("missing value" + at);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0' || errno == ERANGE)
    fail("non-numeric value '" + cell + "'" + at);
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const ColumnSpec& spec) {
  if (spec.y_col.empty() || spec.delta_col.empty())
    fail("duration and event columns must both be named");
  if (spec.z_cols.empty() && !spec.intercept_z)
    fail("no regressor columns named");
  if (spec.w_cols.empty() && !spec.intercept_w)
    fail("no instrument columns named");

  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) fail("'" + path + "' is empty");
  const auto header = split_csv_line(line);

  const std::size_t y_idx = find_column(header, spec.y_col);
  const std::size_t delta_idx = find_column(header, spec.delta_col);
  std::vector<std::size_t> z_idx, w_idx;
  for (const auto& name : spec.z_cols) z_idx.push_back(find_column(header, name));
  for (const auto& name : spec.w_cols) w_idx.push_back(find_column(header, name));

  std::vector<Observation> rows;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row_no;
    const auto fields = split_csv_line(line);
    Observation obs;
    obs.y = parse_cell(fields, y_idx, spec.y_col, row_no);
    if (!(obs.y > 0.0))
      fail("nonpositive duration at row " + std::to_string(row_no) +
           ", column '" + spec.y_col + "'");
    const double d = parse_cell(fields, delta_idx, spec.delta_col, row_no);
    if (d != 0.0 && d != 1.0)
      fail("event indicator '" + fields[delta_idx] + "' at row " +
           std::to_string(row_no) + ", column '" + spec.delta_col +
           "' is not 0 or 1");
    obs.delta = d == 1.0;
    if (spec.intercept_z) obs.z.push_back(1.0);
    for (std::size_t c = 0; c < z_idx.size(); ++c)
      obs.z.push_back(parse_cell(fields, z_idx[c], spec.z_cols[c], row_no));
    if (spec.intercept_w) obs.w.push_back(1.0);
    for (std::size_t c = 0; c < w_idx.size(); ++c)
      obs.w.push_back(parse_cell(fields, w_idx[c], spec.w_cols[c], row_no));
    rows.push_back(std::move(obs));
  }
  if (rows.empty()) fail("'" + path + "' has no data rows");

  const std::size_t k = spec.z_cols.size() + (spec.intercept_z ? 1 : 0);
  const std::size_t l = spec.w_cols.size() + (spec.intercept_w ? 1 : 0);
  return Dataset(std::move(rows), k, l);
}

void write_csv(const Dataset& data, const std::string& path,
               const std::vector<std::string>& z_names,
               const std::vector<std::string>& w_names) {
  if (!z_names.empty() && z_names.size() != data.k())
    throw std::invalid_argument("wrong number of regressor names");
  if (!w_names.empty() && w_names.size() != data.l())
    throw std::invalid_argument("wrong number of instrument names");

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");

  out << "y,delta";
  for (std::size_t c = 0; c < data.k(); ++c) {
    if (z_names.empty())
      out << ",z" << (c + 1);
    else
      out << ',' << z_names[c];
  }
  for (std::size_t c = 0; c < data.l(); ++c) {
    if (w_names.empty())
      out << ",w" << (c + 1);
    else
      out << ',' << w_names[c];
  }
  out << '\n';

  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (std::size_t i = 0; i < data.n(); ++i) {
    put(data[i].y);
    out << ',' << (data[i].delta ? 1 : 0);
    for (double v : data[i].z) {
      out << ',';
      put(v);
    }
    for (double v : data[i].w) {
      out << ',';
      put(v);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

}  // namespace civqr
