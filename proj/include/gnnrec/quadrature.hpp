#pragma once

#include <functional>

#include "gnnrec/types.hpp"

namespace gnnrec {

/// Gauss-Hermite rule for the standard normal weight: E[f(h)] ~ sum_i w_i f(x_i).
struct GaussHermiteRule {
  Vector nodes;
  Vector weights;
};

GaussHermiteRule gauss_hermite(int order);

/// E[f(h)], h ~ N(0, 1).
double gaussian_expectation(const std::function<double(double)>& f, int order = 80);

}  // namespace gnnrec
