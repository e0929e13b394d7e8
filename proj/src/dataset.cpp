#include "acvkit/dataset.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace acvkit {

void Dataset::validate() const {
  if (n() < 2) throw Error("dataset needs at least 2 points, got " + std::to_string(n()));
  if (dim() < 1) throw Error("dataset points must have dimension >= 1");
  if (labeled() && y.size() != X.rows()) {
    throw Error("label count " + std::to_string(y.size()) + " does not match point count " +
                std::to_string(n()));
  }
  if (!X.allFinite() || (labeled() && !y.allFinite())) throw Error("dataset has non-finite values");
}

Dataset Dataset::from_points(Mat Z) {
  Dataset d;
  d.X = std::move(Z);
  d.validate();
  return d;
}

Dataset Dataset::from_labeled(Mat X, Vec y) {
  Dataset d;
  d.X = std::move(X);
  d.y = std::move(y);
  d.validate();
  return d;
}

Vec full_weights(int n) { return Vec::Constant(n, 1.0 / n); }

Vec holdout_weights(int n, const std::vector<int>& held_out) {
  Vec w = full_weights(n);
  for (int i : held_out) {
    if (i < 0 || i >= n) throw Error("held-out index " + std::to_string(i) + " out of range");
    w(i) = 0.0;
  }
  return w;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.c_str();
  while (*begin == ' ' || *begin == '\t') ++begin;
  if (*begin == '\0') return false;
  char* end = nullptr;
  out = std::strtod(begin, &end);
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

}  // namespace

Dataset read_csv(const std::string& path, bool labeled) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    std::vector<double> row;
    row.reserve(fields.size());
    bool numeric = true;
    for (const auto& f : fields) {
      double v = 0.0;
      if (!parse_double(f, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw Error(path + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(path + ":" + std::to_string(line_no) + ": expected " +
                  std::to_string(rows.front().size()) + " columns, got " +
                  std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error("dataset " + path + " has no rows");
  const int cols = static_cast<int>(rows.front().size());
  const int feat = labeled ? cols - 1 : cols;
  if (feat < 1) throw Error("dataset " + path + " has too few columns");
  Mat X(rows.size(), feat);
  Vec y(labeled ? static_cast<Eigen::Index>(rows.size()) : 0);
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < feat; ++j) X(i, j) = rows[i][j];
    if (labeled) y(i) = rows[i][feat];
  }
  Dataset d;
  d.X = std::move(X);
  d.y = std::move(y);
  d.validate();
  return d;
}

std::string to_csv(const Dataset& data) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (int j = 0; j < data.dim(); ++j) out << (j ? "," : "") << "x" << j;
  if (data.labeled()) out << ",y";
  out << "\n";
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.dim(); ++j) out << (j ? "," : "") << data.X(i, j);
    if (data.labeled()) out << "," << data.y(i);
    out << "\n";
  }
  return out.str();
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset " + path);
  out << to_csv(data);
}

}  // namespace acvkit
