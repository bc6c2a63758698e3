// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DISTAUG_MATRIX_HPP_
#define DISTAUG_MATRIX_HPP_

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace distaug {

// Dense row-major real matrix. Rows are time frames, columns are
// frequency bins everywhere in this codebase.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill) {
    if (r < 0 || c < 0) throw std::invalid_argument("Matrix: negative shape");
  }

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
  size_t size() const { return v.size(); }

  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

}  // namespace distaug

#endif  // DISTAUG_MATRIX_HPP_
