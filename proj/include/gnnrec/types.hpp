#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string_view>
#include <vector>

namespace gnnrec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexSet = std::vector<Index>;
using Seed = std::uint64_t;

enum class Activation { ReLU, Sigmoid };
enum class Problem { Regression, Classification };

std::string_view to_string(Activation a) noexcept;
std::string_view to_string(Problem p) noexcept;
Activation parse_activation(std::string_view s);
Problem parse_problem(std::string_view s);

}  // namespace gnnrec
