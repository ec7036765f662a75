#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dczip {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Directed multigraph with non-negative integer edge counts and no self-loops.
// The weight matrix is stored dense; entries must be integral and the diagonal
// identically zero.
class WeightedDigraph {
public:
    WeightedDigraph(Matrix weights,
                    std::optional<std::vector<std::string>> node_labels = std::nullopt);

    int n() const { return static_cast<int>(weights_.rows()); }
    const Matrix& weights() const { return weights_; }
    double w(int i, int j) const { return weights_(i, j); }
    const std::optional<std::vector<std::string>>& node_labels() const { return node_labels_; }

    // Node identifier used in file output: the label when present, else the index.
    std::string node_id(int i) const;

private:
    Matrix weights_;
    std::optional<std::vector<std::string>> node_labels_;
};

// Hard community assignment, labels in 1..K. Empty communities are allowed.
struct Partition {
    std::vector<int> labels;
    int K = 0;

    Partition() = default;
    Partition(std::vector<int> labels_, int K_);

    int n() const { return static_cast<int>(labels.size()); }
    void validate() const;

    // Number of nodes per community, index 0 = community 1.
    std::vector<int> community_sizes() const;
};

}  // namespace dczip
