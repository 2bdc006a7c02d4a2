#include "hte/design_matrix.hpp"

#include <stdexcept>

namespace hte {

std::vector<std::string> default_column_names(Eigen::Index d) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

DesignMatrix::DesignMatrix(Matrix v, std::vector<std::string> names)
    : values(std::move(v)), column_names(std::move(names)) {
  if (static_cast<Eigen::Index>(column_names.size()) != values.cols())
    throw std::invalid_argument("DesignMatrix: column_names size mismatch");
}

DesignMatrix::DesignMatrix(Matrix v) : values(std::move(v)) {
  column_names = default_column_names(values.cols());
}

DesignMatrix DesignMatrix::select_rows(const std::vector<std::size_t>& idx) const {
  Matrix out(static_cast<Eigen::Index>(idx.size()), values.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(idx[i]));
  return DesignMatrix(std::move(out), column_names);
}

DesignMatrix DesignMatrix::with_column(const Vector& col, const std::string& name) const {
  if (col.size() != values.rows())
    throw std::invalid_argument("with_column: length mismatch");
  Matrix out(values.rows(), values.cols() + 1);
  out.leftCols(values.cols()) = values;
  out.col(values.cols()) = col;
  auto names = column_names;
  names.push_back(name);
  return DesignMatrix(std::move(out), std::move(names));
}

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const Matrix& m) { return m.allFinite(); }

void validate(const DesignMatrix& X) {
  if (X.rows() < 1 || X.cols() < 1)
    throw std::invalid_argument("DesignMatrix: need n >= 1 and d >= 1");
  if (!X.values.allFinite())
    throw std::invalid_argument("DesignMatrix: non-finite entries");
}

}  // namespace hte
