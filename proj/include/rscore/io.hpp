#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <Eigen/Core>

#include "rscore/graph.hpp"
#include "rscore/partition.hpp"

namespace rscore::io {

// Edge list: first line "n=<count>", then one "i j" per line, 0-based, i < j.
void write_edge_list(std::ostream& out, const AdjacencyMatrix& a);
void write_edge_list(const std::filesystem::path& path, const AdjacencyMatrix& a);
AdjacencyMatrix read_edge_list(std::istream& in);
AdjacencyMatrix read_edge_list(const std::filesystem::path& path);

// Partition: one 1-based label per line.
void write_partition(std::ostream& out, const Partition& p);
void write_partition(const std::filesystem::path& path, const Partition& p);
/// K is inferred as the largest label unless given.
Partition read_partition(std::istream& in, int k = 0);
Partition read_partition(const std::filesystem::path& path, int k = 0);

// Row-major CSV without header. Values are written with 17 significant digits.
void write_csv(std::ostream& out, const Eigen::MatrixXd& m);
void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_csv(std::istream& in);
Eigen::MatrixXd read_csv(const std::filesystem::path& path);

/// Shortest representation that round-trips through strtod.
std::string format_double(double v);

std::ofstream open_output(const std::filesystem::path& path);
std::ifstream open_input(const std::filesystem::path& path);

}  // namespace rscore::io
