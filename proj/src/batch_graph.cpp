#include "derwent/batch_graph.hpp"

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>

#include "derwent/error.hpp"

namespace derwent {

std::string_view to_string(Domain d) {
  switch (d) {
    case Domain::Source:
      return "Source";
    case Domain::Auxiliary:
      return "Auxiliary";
    case Domain::Target:
      return "Target";
  }
  return "?";
}

char domain_tag(Domain d) { return to_string(d)[0]; }

std::optional<Domain> parse_domain(std::string_view text) {
  if (text == "S" || text == "source" || text == "Source") return Domain::Source;
  if (text == "A" || text == "auxiliary" || text == "Auxiliary") return Domain::Auxiliary;
  if (text == "T" || text == "target" || text == "Target") return Domain::Target;
  return std::nullopt;
}

double edge_weight(Domain a, Domain b, double cos, double eta1, double eta2) {
  const bool has_source = a == Domain::Source || b == Domain::Source;
  const bool has_target = a == Domain::Target || b == Domain::Target;
  const bool has_aux = a == Domain::Auxiliary || b == Domain::Auxiliary;
  if (has_source && has_target) return 0.0;
  if (a == b) return std::exp(cos);
  if (has_source && has_aux) return std::exp(eta1 * cos);
  return std::exp(eta2 * cos);
}

BatchGraph BatchGraph::build(std::vector<GraphNode> nodes, const Matrix& embeddings,
                             double eta1, double eta2, kernels::Exec exec) {
  if (nodes.size() < 2) throw DimensionError("build_graph: need at least two nodes");
  if (embeddings.rows() != nodes.size()) {
    throw DimensionError("build_graph: " + std::to_string(nodes.size()) + " nodes but " +
                         std::to_string(embeddings.rows()) + " embedding rows");
  }
  if (!embeddings.all_finite()) throw NumericError("build_graph: non-finite embedding");
  if (!(eta1 > 0.0) || !(eta2 > 0.0)) throw NumericError("build_graph: eta must be positive");

  BatchGraph g;
  g.nodes_ = std::move(nodes);
  g.eta1_ = eta1;
  g.eta2_ = eta2;
  g.cosines_ = kernels::pairwise_cosine(embeddings, exec);
  const std::size_t n = g.nodes_.size();
  g.weights_ = Matrix(n, n);
  const std::int64_t rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (exec != kernels::Exec::Serial && n >= 64)
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (static_cast<std::size_t>(i) == j) continue;
      g.weights_(i, j) =
          edge_weight(g.nodes_[i].domain, g.nodes_[j].domain, g.cosines_(i, j), eta1, eta2);
    }
  }
  return g;
}

std::vector<double> BatchGraph::transition_distribution(std::size_t node) const {
  if (node >= size()) throw SamplingError("transition_distribution: node out of range");
  std::vector<double> p(weights_.row_span(node).begin(), weights_.row_span(node).end());
  double total = 0.0;
  for (double w : p) total += w;
  if (!(total > 0.0)) {
    throw SamplingError("transition_distribution: node " + std::to_string(node) +
                        " has no neighbours");
  }
  for (double& w : p) w /= total;
  return p;
}

void BatchGraph::write_csv(std::ostream& out) const {
  out << "id";
  for (const GraphNode& n : nodes_) out << ',' << n.instance_id;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < size(); ++i) {
    out << nodes_[i].instance_id;
    for (std::size_t j = 0; j < size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", weights_(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace derwent
