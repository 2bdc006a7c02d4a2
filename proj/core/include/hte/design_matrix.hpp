#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace hte {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Dense n x d feature matrix with named columns. All entries finite.
struct DesignMatrix {
  Matrix values;
  std::vector<std::string> column_names;

  DesignMatrix() = default;
  DesignMatrix(Matrix v, std::vector<std::string> names);
  // names default to x1..xd
  explicit DesignMatrix(Matrix v);

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  DesignMatrix select_rows(const std::vector<std::size_t>& idx) const;
  // appends a column on the right
  DesignMatrix with_column(const Vector& col, const std::string& name) const;
};

// throws std::invalid_argument on non-finite entries or empty shape
void validate(const DesignMatrix& X);

std::vector<std::string> default_column_names(Eigen::Index d);

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

}  // namespace hte
