#pragma once

#include "acvkit/types.hpp"

#include <string>
#include <vector>

namespace acvkit {

// n datapoints stored row-wise. For point losses each row is z_i; for GLM
// losses each row is a covariate vector x_i and y holds the labels.
struct Dataset {
  Mat X;
  Vec y;

  int n() const { return static_cast<int>(X.rows()); }
  int dim() const { return static_cast<int>(X.cols()); }
  bool labeled() const { return y.size() > 0; }

  // Throws Error unless n >= 2, dim >= 1 and labels (if any) match n.
  void validate() const;

  static Dataset from_points(Mat Z);
  static Dataset from_labeled(Mat X, Vec y);
};

// Weight 1/n on every point: the empirical measure P_n.
Vec full_weights(int n);

// Weight 1/n on every point outside held_out and 0 inside. This is the
// leave-out measure; it is deliberately not renormalized.
Vec holdout_weights(int n, const std::vector<int>& held_out);

// CSV with one row per point. A header row is detected and skipped when the
// first line contains a non-numeric field. For labeled data the last column
// is the label.
Dataset read_csv(const std::string& path, bool labeled);
void write_csv(const Dataset& data, const std::string& path);
std::string to_csv(const Dataset& data);

}  // namespace acvkit
