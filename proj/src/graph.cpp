#include "gnnrec/graph.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <string>

#include "gnnrec/error.hpp"
#include "gnnrec/rng.hpp"

namespace gnnrec {

std::string_view to_string(GraphFamily f) noexcept {
  switch (f) {
    case GraphFamily::Cycle: return "cycle";
    case GraphFamily::Grid2D: return "grid";
    case GraphFamily::RandomRegular: return "regular";
    case GraphFamily::RandomBounded: return "bounded";
    case GraphFamily::Empty: return "empty";
    case GraphFamily::Custom: return "custom";
  }
  return "custom";
}

Graph::Graph(Index n_nodes, std::vector<Edge> edges, GraphFamily family, Index declared_max_degree)
    : n_nodes_(n_nodes), edges_(std::move(edges)), family_(family) {
  if (n_nodes_ < 1) throw Error(ErrorCode::InvalidShape, "graph needs at least one node");
  for (auto& e : edges_) {
    if (e.first > e.second) std::swap(e.first, e.second);
    if (e.first < 0 || e.second >= n_nodes_)
      throw Error(ErrorCode::InvalidShape, "edge references a node outside [0, N)");
    if (e.first == e.second) throw Error(ErrorCode::InvalidShape, "self-loop edges are not stored");
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
    throw Error(ErrorCode::InvalidShape, "duplicate edge");

  degrees_.assign(static_cast<std::size_t>(n_nodes_), 0);
  adjacency_.assign(static_cast<std::size_t>(n_nodes_), {});
  for (const auto& [u, v] : edges_) {
    ++degrees_[u];
    ++degrees_[v];
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
  if (declared_max_degree >= 0 && max_degree() > declared_max_degree)
    throw Error(ErrorCode::InvalidDegree, "generator exceeded its declared maximum degree");
}

Index Graph::max_degree() const noexcept {
  return degrees_.empty() ? 0 : *std::max_element(degrees_.begin(), degrees_.end());
}

double Graph::average_degree() const noexcept {
  return 2.0 * static_cast<double>(edges_.size()) / static_cast<double>(n_nodes_);
}

Graph build_cycle(Index n_nodes, Index delta) {
  if (n_nodes < 1) throw Error(ErrorCode::InvalidShape, "cycle needs at least one node");
  if (delta < 0 || delta % 2 != 0 || delta >= n_nodes)
    throw Error(ErrorCode::InvalidDegree,
                "cycle degree must be even and below N (got " + std::to_string(delta) + ")");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n_nodes * delta / 2));
  for (Index i = 0; i < n_nodes; ++i) {
    for (Index k = 1; k <= delta / 2; ++k) edges.emplace_back(i, (i + k) % n_nodes);
  }
  return Graph(n_nodes, std::move(edges), GraphFamily::Cycle, delta);
}

Graph build_grid2d(Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw Error(ErrorCode::InvalidShape, "grid dimensions must be >= 1");
  std::vector<Edge> edges;
  auto id = [cols](Index r, Index c) { return r * cols + c; };
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
    }
  }
  return Graph(rows * cols, std::move(edges), GraphFamily::Grid2D, 4);
}

Graph build_empty(Index n_nodes) { return Graph(n_nodes, {}, GraphFamily::Empty, 0); }

namespace {

// Pair up stubs uniformly at random, rejecting loops and repeated pairs one
// pair at a time. Returns false when the remaining stubs admit no valid pair.
bool pair_stubs(std::vector<Index> stubs, std::set<Edge>& edges, Rng& rng, bool allow_partial) {
  std::shuffle(stubs.begin(), stubs.end(), rng);
  constexpr int kPairAttempts = 200;
  while (stubs.size() >= 2) {
    bool placed = false;
    for (int attempt = 0; attempt < kPairAttempts && !placed; ++attempt) {
      std::uniform_int_distribution<std::size_t> pick(0, stubs.size() - 1);
      std::size_t a = pick(rng);
      std::size_t b = pick(rng);
      if (a == b) continue;
      Index u = stubs[a], v = stubs[b];
      if (u == v) continue;
      Edge e{std::min(u, v), std::max(u, v)};
      if (edges.count(e)) continue;
      edges.insert(e);
      if (a < b) std::swap(a, b);
      stubs[a] = stubs.back();
      stubs.pop_back();
      stubs[b] = stubs.back();
      stubs.pop_back();
      placed = true;
    }
    if (!placed) {
      // Exhaustive check before giving up: is any admissible pair left?
      bool any = false;
      for (std::size_t a = 0; a < stubs.size() && !any; ++a)
        for (std::size_t b = a + 1; b < stubs.size() && !any; ++b)
          if (stubs[a] != stubs[b] &&
              !edges.count(Edge{std::min(stubs[a], stubs[b]), std::max(stubs[a], stubs[b])}))
            any = true;
      if (!any) return allow_partial;
      if (!allow_partial) return false;
    }
  }
  return true;
}

}  // namespace

Graph build_random_regular(Index n_nodes, Index delta, Seed seed) {
  if (n_nodes < 1 || delta < 0 || delta >= n_nodes || (n_nodes * delta) % 2 != 0)
    throw Error(ErrorCode::InvalidDegree, "random regular graph needs delta < N and N*delta even");
  std::vector<Index> stubs;
  stubs.reserve(static_cast<std::size_t>(n_nodes * delta));
  for (Index v = 0; v < n_nodes; ++v)
    for (Index k = 0; k < delta; ++k) stubs.push_back(v);

  Rng rng = make_rng(seed);
  constexpr int kMaxRestarts = 1000;
  for (int restart = 0; restart < kMaxRestarts; ++restart) {
    std::set<Edge> edges;
    if (pair_stubs(stubs, edges, rng, false) &&
        static_cast<Index>(edges.size()) * 2 == n_nodes * delta) {
      return Graph(n_nodes, {edges.begin(), edges.end()}, GraphFamily::RandomRegular, delta);
    }
  }
  throw Error(ErrorCode::GenerationFailed, "pairing model did not produce a simple graph");
}

Graph build_random_bounded(Index n_nodes, Index delta, double p, Seed seed) {
  if (n_nodes < 1 || delta < 0) throw Error(ErrorCode::InvalidDegree, "invalid bounded-degree parameters");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "p must lie in [0, 1]");
  Rng rng = make_rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<Index> stubs;
  for (Index v = 0; v < n_nodes; ++v) {
    if (coin(rng))
      for (Index k = 0; k < delta; ++k) stubs.push_back(v);
  }
  std::set<Edge> edges;
  pair_stubs(std::move(stubs), edges, rng, true);
  return Graph(n_nodes, {edges.begin(), edges.end()}, GraphFamily::RandomBounded, delta);
}

Vector NormalizedAdjacency::row_norms_squared() const {
  Vector out(matrix.rows());
  for (Index i = 0; i < matrix.outerSize(); ++i) {
    double s = 0.0;
    for (decltype(matrix)::InnerIterator it(matrix, i); it; ++it) s += it.value() * it.value();
    out(i) = s;
  }
  return out;
}

double top_singular_value(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a) {
  const Index n = a.rows();
  if (n <= kDenseSpectrumLimit) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  // Power iteration on the nonnegative matrix A, started from a positive
  // vector so the Perron component is present from the first step.
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = std::sqrt(static_cast<double>(a.row(i).nonZeros()));
  v.normalize();
  // For symmetric A, |lambda - rho| <= ||A v - rho v|| with rho = v.Av.
  double rho = 0.0;
  for (int it = 0; it < 100000; ++it) {
    const Vector w = a * v;
    rho = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    if ((w - rho * v).norm() <= 1e-10 * std::abs(rho)) break;
    v = w / norm;
  }
  return std::abs(rho);
}

NormalizedAdjacency normalized_adjacency(const Graph& g) {
  const Index n = g.n_nodes();
  std::vector<double> inv_sqrt(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(1.0 + static_cast<double>(g.degrees()[i]));

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) + 2 * g.edges().size());
  for (Index i = 0; i < n; ++i) trip.emplace_back(i, i, inv_sqrt[i] * inv_sqrt[i]);
  for (const auto& [u, v] : g.edges()) {
    double w = inv_sqrt[u] * inv_sqrt[v];
    trip.emplace_back(u, v, w);
    trip.emplace_back(v, u, w);
  }
  NormalizedAdjacency out;
  out.matrix.resize(n, n);
  out.matrix.setFromTriplets(trip.begin(), trip.end());
  out.matrix.makeCompressed();
  out.sigma1 = top_singular_value(out.matrix);
  out.delta_max = static_cast<double>(g.max_degree());
  out.delta_ave = g.average_degree();
  return out;
}

SpectralBounds lemma1_bounds(const Graph& g) {
  return {(1.0 + g.average_degree()) / (1.0 + static_cast<double>(g.max_degree())), 1.0};
}

void write_edge_list(std::ostream& os, const Graph& g) {
  os << g.n_nodes() << ' ' << g.edges().size() << '\n';
  for (const auto& [u, v] : g.edges()) os << u << ' ' << v << '\n';
}

Graph read_edge_list(std::istream& is) {
  Index n = 0, m = 0;
  if (!(is >> n >> m) || n < 1 || m < 0) throw Error(ErrorCode::Parse, "bad edge-list header");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (Index k = 0; k < m; ++k) {
    Index u = 0, v = 0;
    if (!(is >> u >> v)) throw Error(ErrorCode::Parse, "edge list truncated at edge " + std::to_string(k));
    edges.emplace_back(u, v);
  }
  return Graph(n, std::move(edges), GraphFamily::Custom);
}

}  // namespace gnnrec
