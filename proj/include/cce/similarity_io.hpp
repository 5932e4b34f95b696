#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cce {

/// Square similarity matrix with one label per column, as read from or
/// written to CSV: a header line of n labels followed by n rows of n values.
struct LabeledMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd values;
};

LabeledMatrix read_similarity_csv(const std::filesystem::path& path);
LabeledMatrix parse_similarity_csv(const std::string& text);
std::string format_similarity_csv(const LabeledMatrix& m);
void write_similarity_csv(const std::filesystem::path& path, const LabeledMatrix& m);

}  // namespace cce
