#include "dczip/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace dczip {

WeightedDigraph::WeightedDigraph(Matrix weights,
                                 std::optional<std::vector<std::string>> node_labels)
    : weights_(std::move(weights)), node_labels_(std::move(node_labels)) {
    const auto n = weights_.rows();
    if (n < 1 || weights_.cols() != n) {
        throw std::invalid_argument("WeightedDigraph: weight matrix must be square and non-empty");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (weights_(i, i) != 0.0) {
            throw std::invalid_argument("WeightedDigraph: diagonal must be zero (no self-loops)");
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const double w = weights_(i, j);
            if (!(w >= 0.0) || w != std::floor(w) || !std::isfinite(w)) {
                throw std::invalid_argument(
                    "WeightedDigraph: entry (" + std::to_string(i) + "," + std::to_string(j) +
                    ") is not a non-negative integer");
            }
        }
    }
    if (node_labels_) {
        if (static_cast<Eigen::Index>(node_labels_->size()) != n) {
            throw std::invalid_argument("WeightedDigraph: node_labels length must equal n");
        }
        std::unordered_set<std::string> seen;
        for (const auto& label : *node_labels_) {
            if (!seen.insert(label).second) {
                throw std::invalid_argument("WeightedDigraph: duplicate node label '" + label + "'");
            }
        }
    }
}

std::string WeightedDigraph::node_id(int i) const {
    if (node_labels_) return (*node_labels_)[static_cast<std::size_t>(i)];
    return std::to_string(i);
}

Partition::Partition(std::vector<int> labels_, int K_) : labels(std::move(labels_)), K(K_) {
    validate();
}

void Partition::validate() const {
    if (K < 1) throw std::invalid_argument("Partition: K must be >= 1");
    for (int l : labels) {
        if (l < 1 || l > K) {
            throw std::invalid_argument("Partition: label " + std::to_string(l) +
                                        " outside 1.." + std::to_string(K));
        }
    }
}

std::vector<int> Partition::community_sizes() const {
    std::vector<int> sizes(static_cast<std::size_t>(K), 0);
    for (int l : labels) sizes[static_cast<std::size_t>(l - 1)]++;
    return sizes;
}

}  // namespace dczip
