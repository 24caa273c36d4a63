#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "derwent/domain.hpp"
#include "derwent/kernels.hpp"
#include "derwent/matrix.hpp"

namespace derwent {

struct GraphNode {
  std::int64_t instance_id = 0;
  Domain domain = Domain::Auxiliary;
};

// Edge weight between two distinct nodes with cosine `cos`:
//   S-S, T-T, A-A   exp(cos)
//   S-A             exp(eta1 * cos)
//   T-A             exp(eta2 * cos)
//   S-T             0
double edge_weight(Domain a, Domain b, double cos, double eta1, double eta2);

// Similarity graph over one mini-batch. Immutable once built.
class BatchGraph {
 public:
  // `embeddings` holds one row per node. Throws NumericError for rows with a
  // degenerate norm and DimensionError on size mismatches.
  static BatchGraph build(std::vector<GraphNode> nodes, const Matrix& embeddings, double eta1,
                          double eta2, kernels::Exec exec = kernels::Exec::Auto);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  Domain domain(std::size_t i) const { return nodes_[i].domain; }
  std::int64_t instance_id(std::size_t i) const { return nodes_[i].instance_id; }
  double weight(std::size_t i, std::size_t j) const { return weights_(i, j); }
  double cosine(std::size_t i, std::size_t j) const { return cosines_(i, j); }
  const Matrix& weights() const { return weights_; }
  const Matrix& cosines() const { return cosines_; }
  double eta1() const { return eta1_; }
  double eta2() const { return eta2_; }

  // p(j) = e(i, j) / sum_k e(i, k). Throws SamplingError for an isolated node.
  std::vector<double> transition_distribution(std::size_t node) const;

  // Weight matrix as CSV with instance ids as row and column headers.
  void write_csv(std::ostream& out) const;

 private:
  std::vector<GraphNode> nodes_;
  Matrix cosines_;
  Matrix weights_;
  double eta1_ = 1.0;
  double eta2_ = 1.0;
};

}  // namespace derwent
