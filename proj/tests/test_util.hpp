// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

// Small builders shared by the unit and acceptance tests.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "invopt/model.hpp"

namespace invopt::test {

inline Vector V(std::initializer_list<double> xs) {
  Vector v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline Matrix M(std::initializer_list<std::initializer_list<double>> rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r ? static_cast<int>(rows.begin()->size()) : 0;
  Matrix m(r, c);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

/// {x ≥ 0, x₁ + x₂ ≥ 1}, the two-variable toy region used throughout.
inline LinearForwardModel corner_model(const Vector& c) {
  LinearForwardModel m;
  m.c = c;
  m.A = M({{1, 1}, {1, 0}, {0, 1}});
  m.b = V({1, 0, 0});
  return m;
}

/// [0,1]² in ≥ form: rows x₁ ≥ 0, x₂ ≥ 0, −x₁ ≥ −1, −x₂ ≥ −1.
inline LinearForwardModel unit_square(const Vector& c) {
  LinearForwardModel m;
  m.c = c;
  m.A = M({{1, 0}, {0, 1}, {-1, 0}, {0, -1}});
  m.b = V({0, 0, -1, -1});
  return m;
}

/// Random bounded LP: m random rows a·x ≥ b through a slack of an interior
/// point, plus the box 0 ≤ x ≤ ub as explicit rows (appended last).
struct RandomLP {
  LinearForwardModel model;  // canonical, box rows included
  Matrix A;                  // random rows only
  Vector b;
  Vector lower, upper;
};

inline RandomLP random_lp(std::mt19937_64& rng, int n, int m, double ub = 3.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  RandomLP r;
  r.A.resize(m, n);
  r.b.resize(m);
  Vector x0(n);
  for (int j = 0; j < n; ++j) x0[j] = ub * unif(rng);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) r.A(i, j) = std::round(4.0 * normal(rng)) / 2.0;
    r.b[i] = r.A.row(i).dot(x0) - unif(rng);
  }
  r.lower = Vector::Zero(n);
  r.upper = Vector::Constant(n, ub);
  r.model.c.resize(n);
  for (int j = 0; j < n; ++j) r.model.c[j] = std::round(4.0 * normal(rng)) / 2.0;
  Matrix A = r.A;
  Vector b = r.b;
  append_box_rows(A, b, r.lower, r.upper);
  r.model.A = A;
  r.model.b = b;
  return r;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace invopt::test
