#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "gnnrec/graph.hpp"
#include "gnnrec/synth.hpp"
#include "gnnrec/tensorinit.hpp"

namespace gnnrec {

// Raw little-endian float64, row-major. Shapes live in the manifest.
void write_matrix_bin(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_bin(const std::filesystem::path& path, Index rows, Index cols);

struct DatasetBundle {
  Dataset dataset;
  std::optional<GroundTruth> ground_truth;
  std::optional<Graph> graph;
};

/// Directory layout: manifest.json, x.bin, z.bin, y.bin, omega.bin,
/// and optionally w_star.bin and graph.edges.
void save_dataset(const std::filesystem::path& dir, const DatasetBundle& bundle);
DatasetBundle load_dataset(const std::filesystem::path& dir);

Graph read_edge_list_file(const std::filesystem::path& path);
void write_edge_list_file(const std::filesystem::path& path, const Graph& g);

void write_init_diagnostics_json(std::ostream& os, const InitOutput& out);

}  // namespace gnnrec
