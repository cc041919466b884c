#pragma once

#include <Eigen/SparseCore>
#include <iosfwd>
#include <string_view>
#include <utility>
#include <vector>

#include "gnnrec/types.hpp"

namespace gnnrec {

enum class GraphFamily { Cycle, Grid2D, RandomRegular, RandomBounded, Empty, Custom };

std::string_view to_string(GraphFamily f) noexcept;

using Edge = std::pair<Index, Index>;

/// Simple undirected graph. Edges are stored once with first < second and
/// sorted; self-loops are never stored (the normalized adjacency adds them).
class Graph {
 public:
  Graph(Index n_nodes, std::vector<Edge> edges, GraphFamily family = GraphFamily::Custom,
        Index declared_max_degree = -1);

  Index n_nodes() const noexcept { return n_nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  GraphFamily family() const noexcept { return family_; }
  const std::vector<Index>& degrees() const noexcept { return degrees_; }
  const std::vector<std::vector<Index>>& neighbors() const noexcept { return adjacency_; }

  Index max_degree() const noexcept;
  double average_degree() const noexcept;

 private:
  Index n_nodes_;
  std::vector<Edge> edges_;
  GraphFamily family_;
  std::vector<Index> degrees_;
  std::vector<std::vector<Index>> adjacency_;
};

// Generators. Each throws Error(InvalidDegree) on infeasible parameters.
Graph build_cycle(Index n_nodes, Index delta);
Graph build_grid2d(Index rows, Index cols);
Graph build_random_regular(Index n_nodes, Index delta, Seed seed);
Graph build_random_bounded(Index n_nodes, Index delta, double p, Seed seed);
Graph build_empty(Index n_nodes);

/// A = D^{-1/2} (I + Adj) D^{-1/2} with D_ii = 1 + deg(i).
struct NormalizedAdjacency {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  double sigma1 = 1.0;
  double delta_max = 0.0;
  double delta_ave = 0.0;

  Index size() const noexcept { return matrix.rows(); }
  /// ||a_n||^2 for every row.
  Vector row_norms_squared() const;
  Matrix dense() const { return Matrix(matrix); }
};

/// Node count at or below which sigma1 comes from a dense eigensolver.
inline constexpr Index kDenseSpectrumLimit = 500;

NormalizedAdjacency normalized_adjacency(const Graph& g);
double top_singular_value(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a);

struct SpectralBounds {
  double lower = 1.0;
  double upper = 1.0;
};

/// (1 + delta_ave) / (1 + delta_max) <= sigma1(A) <= 1.
SpectralBounds lemma1_bounds(const Graph& g);

// Edge-list text format: "N M" then M lines "i j", 0-based.
void write_edge_list(std::ostream& os, const Graph& g);
Graph read_edge_list(std::istream& is);

}  // namespace gnnrec
