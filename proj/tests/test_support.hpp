#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "pdsaddle/problem.hpp"
#include "pdsaddle/rates.hpp"
#include "pdsaddle/splitting.hpp"

namespace pdsaddle::testing {

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<long>(values.size()));
  long i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline Matrix mat(int rows, int cols, std::initializer_list<double> values) {
  Matrix m(rows, cols);
  long i = 0;
  for (double x : values) m(i / cols, i % cols) = x;
  return m;
}

/// Scalar saddle problem f = mu_f/2 x^2, g = mu_g/2 y^2, coupling a.
inline SaddleProblem scalar_problem(double mu_f, double mu_g, double a) {
  return SaddleProblem::make(
      std::make_shared<QuadraticOracle>(mu_f, Vector::Zero(1)),
      std::make_shared<QuadraticOracle>(mu_g, Vector::Zero(1)),
      Matrix::Constant(1, 1, a));
}

/// zero f, zero g with the given coupling.
inline SaddleProblem zero_problem(const Matrix& a) {
  return SaddleProblem::make(
      std::make_shared<ZeroOracle>(static_cast<int>(a.cols())),
      std::make_shared<ZeroOracle>(static_cast<int>(a.rows())), a);
}

}  // namespace pdsaddle::testing
