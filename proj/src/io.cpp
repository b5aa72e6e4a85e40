#include "rscore/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "rscore/errors.hpp"

namespace rscore::io {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(fmt::format("cannot create directory {}: {}", path.parent_path().string(), ec.message()));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {} for reading", path.string()));
  return in;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_edge_list(std::ostream& out, const AdjacencyMatrix& a) {
  out << "n=" << a.size() << '\n';
  for (const auto& [i, j] : a.edges()) out << i << ' ' << j << '\n';
}

void write_edge_list(const std::filesystem::path& path, const AdjacencyMatrix& a) {
  auto out = open_output(path);
  write_edge_list(out, a);
}

AdjacencyMatrix read_edge_list(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::size_t n = 0;
  bool have_header = false;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      if (line.rfind("n=", 0) != 0) throw IoError(fmt::format("line {}: expected header 'n=<count>'", lineno));
      const auto* first = line.data() + 2;
      const auto* last = line.data() + line.size();
      while (last > first && (last[-1] == '\r' || last[-1] == ' ')) --last;
      const auto [p, ec] = std::from_chars(first, last, n);
      if (ec != std::errc() || p != last) throw IoError(fmt::format("line {}: bad node count", lineno));
      have_header = true;
      continue;
    }
    std::istringstream ls(line);
    long long i = -1;
    long long j = -1;
    if (!(ls >> i >> j) || i < 0 || j < 0) throw IoError(fmt::format("line {}: expected 'i j'", lineno));
    edges.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  if (!have_header) throw IoError("edge list has no 'n=<count>' header");
  try {
    return AdjacencyMatrix::from_edges(n, edges);
  } catch (const ConfigError& e) {
    throw IoError(fmt::format("invalid edge list: {}", e.what()));
  }
}

AdjacencyMatrix read_edge_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_edge_list(in);
}

void write_partition(std::ostream& out, const Partition& p) {
  for (const int l : p.labels()) out << (l + 1) << '\n';
}

void write_partition(const std::filesystem::path& path, const Partition& p) {
  auto out = open_output(path);
  write_partition(out, p);
}

Partition read_partition(std::istream& in, int k) {
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  int max_label = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    int v = 0;
    const auto* last = line.data() + line.size();
    if (last[-1] == '\r') --last;
    const auto [p, ec] = std::from_chars(line.data(), last, v);
    if (ec != std::errc() || p != last || v < 1) {
      throw IoError(fmt::format("line {}: expected a label >= 1", lineno));
    }
    labels.push_back(v - 1);
    max_label = std::max(max_label, v);
  }
  if (k == 0) k = max_label;
  if (max_label > k) throw IoError(fmt::format("label {} exceeds K={}", max_label, k));
  return Partition(std::move(labels), std::max(k, 1));
}

Partition read_partition(const std::filesystem::path& path, int k) {
  auto in = open_input(path);
  return read_partition(in, k);
}

void write_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  auto out = open_output(path);
  write_csv(out, m);
}

Eigen::MatrixXd read_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = std::min(line.find(',', pos), line.size());
      double v = 0.0;
      const auto [p, ec] = std::from_chars(line.data() + pos, line.data() + comma, v);
      if (ec != std::errc() || p != line.data() + comma) {
        throw IoError(fmt::format("line {}: bad number '{}'", lineno, line.substr(pos, comma - pos)));
      }
      row.push_back(v);
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(fmt::format("line {}: expected {} columns, got {}", lineno, rows.front().size(), row.size()));
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

Eigen::MatrixXd read_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_csv(in);
}

}  // namespace rscore::io
