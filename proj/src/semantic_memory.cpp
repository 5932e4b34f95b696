#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cce/embedding_net.hpp"
#include "cce/similarity_io.hpp"

namespace cce {

std::vector<TrainingPair> pairs_from_combination(const Combination& c, std::optional<ItemId> product, bool include_product) {
  std::vector<TrainingPair> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (i != j) out.push_back({c[i], c[j]});
    }
  }
  if (include_product && product) {
    for (ItemId id : c) {
      out.push_back({id, *product});
      out.push_back({*product, id});
    }
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

}  // namespace

LabeledMatrix parse_similarity_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("similarity CSV is empty");
  LabeledMatrix m;
  m.labels = split_csv_line(line);
  const auto n = static_cast<Eigen::Index>(m.labels.size());
  m.values.resize(n, n);
  Eigen::Index row = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (row >= n) throw std::runtime_error("similarity CSV line " + std::to_string(line_no) + ": more rows than header columns");
    const auto cells = split_csv_line(line);
    if (static_cast<Eigen::Index>(cells.size()) != n) {
      throw std::runtime_error("similarity CSV line " + std::to_string(line_no) + ": expected " + std::to_string(n) +
                               " values, found " + std::to_string(cells.size()));
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      try {
        std::size_t used = 0;
        m.values(row, c) = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument(cells[c]);
      } catch (const std::exception&) {
        throw std::runtime_error("similarity CSV line " + std::to_string(line_no) + ": non-numeric value '" + cells[c] + "'");
      }
    }
    ++row;
  }
  if (row != n) throw std::runtime_error("similarity CSV has " + std::to_string(row) + " rows for " + std::to_string(n) + " columns");
  return m;
}

LabeledMatrix read_similarity_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read similarity matrix " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_similarity_csv(ss.str());
}

std::string format_similarity_csv(const LabeledMatrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    if (i) out += ',';
    out += m.labels[i];
  }
  out += '\n';
  char buf[40];
  for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.values.cols(); ++c) {
      if (c) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g", m.values(r, c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void write_similarity_csv(const std::filesystem::path& path, const LabeledMatrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write similarity matrix " + path.string());
  out << format_similarity_csv(m);
}

}  // namespace cce
