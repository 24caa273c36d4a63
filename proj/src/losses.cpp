#include "derwent/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "derwent/error.hpp"

namespace derwent {
namespace {

double scaled_sigmoid_value(double x, double alpha) {
  const double z = alpha * x;
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double cosine_value(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  const double na = std::sqrt(aa), nb = std::sqrt(bb);
  if (!(na > ad::kNormFloor) || !(nb > ad::kNormFloor)) {
    throw NumericError("instance_weight: degenerate embedding norm");
  }
  return dot / (na * nb);
}

}  // namespace

ad::Var similarity_loss(ad::Tape& tape, std::span<const ad::Var> seq,
                        std::span<const ad::Var> negatives, double alpha) {
  if (seq.size() < 2) return tape.constant(Matrix::scalar(0.0));
  if (negatives.size() != seq.size() - 1) {
    throw DimensionError("similarity_loss: need one negative per position, got " +
                         std::to_string(negatives.size()) + " for length " +
                         std::to_string(seq.size()));
  }
  std::vector<ad::Var> terms;
  terms.reserve(2 * negatives.size());
  for (std::size_t j = 0; j + 1 < seq.size(); ++j) {
    const ad::Var pos = ad::scaled_sigmoid(ad::cosine(seq[j], seq[j + 1]), alpha);
    // 1 - s(c) == s(-c)
    const ad::Var neg =
        ad::scaled_sigmoid(ad::negate(ad::cosine(seq[j], negatives[j])), alpha);
    terms.push_back(ad::log(pos));
    terms.push_back(ad::log(neg));
  }
  return ad::negate(ad::add_n(terms));
}

ad::Var reconstruction_loss(const ParamVars& params, std::span<const ad::Var> seq) {
  if (seq.size() < 2) {
    throw DimensionError("reconstruction_loss: sequence length must be >= 2");
  }
  const ad::Var encoded = net::lstm_encode(params, seq.first(seq.size() - 1));
  return ad::l2_norm_diff(seq.back(), net::decode(params, encoded));
}

double instance_weight(std::span<const double> x, std::span<const double> anchor, Domain domain,
                       double alpha) {
  if (domain == Domain::Target) return 1.0;
  if (x.size() != anchor.size()) throw DimensionError("instance_weight: shape mismatch");
  return scaled_sigmoid_value(cosine_value(x, anchor), alpha);
}

ad::Var classification_loss(ad::Tape& tape, const ParamVars& params,
                            std::span<const LabeledTerm> terms) {
  if (terms.empty()) return tape.constant(Matrix::scalar(0.0));
  std::vector<ad::Var> parts;
  parts.reserve(terms.size());
  for (const LabeledTerm& t : terms) {
    if (t.label != 0 && t.label != 1) throw Error("classification_loss: label must be 0 or 1");
    const ad::Var logit = net::classify(params, t.embedding);
    // -y ln s(z) - (1 - y) ln(1 - s(z)), with 1 - s(z) = s(-z)
    const ad::Var nll =
        ad::negate(ad::log_sigmoid(t.label == 1 ? logit : ad::negate(logit)));
    parts.push_back(t.weight == 1.0 ? nll : ad::scale(nll, t.weight));
  }
  return ad::add_n(parts);
}

NodeEmbeddings::NodeEmbeddings(const ParamVars& params, const Matrix& inputs)
    : params_(&params), inputs_(&inputs), cache_(inputs.rows()) {}

NodeEmbeddings::NodeEmbeddings(std::vector<ad::Var> fixed) : cache_(std::move(fixed)) {}

ad::Var NodeEmbeddings::at(std::size_t node) {
  if (node >= cache_.size()) throw DimensionError("NodeEmbeddings: node out of range");
  if (!cache_[node].valid()) {
    ad::Tape& tape = *params_->phi_w.tape();
    cache_[node] =
        net::feature_extract(*params_, tape.constant(Matrix::row(inputs_->row_span(node))));
  }
  return cache_[node];
}

std::vector<std::size_t> NodeEmbeddings::touched() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < cache_.size(); ++k) {
    if (cache_[k].valid()) out.push_back(k);
  }
  return out;
}

ObjectiveResult objective(std::span<const WalkSequence> walks, const NodeInfo& nodes,
                          NodeEmbeddings& embeddings, const ParamVars& params,
                          const LossSettings& settings) {
  ad::Tape& tape = *params.phi_w.tape();
  ObjectiveResult result;
  LossReport& report = result.report;
  std::vector<ad::Var> terms;

  for (const WalkSequence& walk : walks) {
    if (walk.nodes.empty()) throw DimensionError("objective: empty walk");
    const bool type2 = walk.direction == Direction::TargetToSource;
    (type2 ? report.walks_t2s : report.walks_s2t) += 1;
    if (walk.reached) (type2 ? report.reached_t2s : report.reached_s2t) += 1;

    std::vector<ad::Var> seq, negs;
    seq.reserve(walk.nodes.size());
    for (std::size_t v : walk.nodes) seq.push_back(embeddings.at(v));
    for (std::size_t v : walk.negatives) negs.push_back(embeddings.at(v));

    WalkLoss wl;
    wl.direction = walk.direction;
    wl.reached = walk.reached;
    wl.length = walk.nodes.size();

    const ad::Var l1 = similarity_loss(tape, seq, negs, settings.alpha);
    wl.l1 = l1.item();
    terms.push_back(l1);

    if (walk.reached && settings.reconstruction) {
      const ad::Var l2 = reconstruction_loss(params, seq);
      wl.l2 = l2.item();
      if (settings.lambda1 != 0.0) terms.push_back(ad::scale(l2, settings.lambda1));
    }

    // Labeled set of the walk: each distinct labeled node once. For the
    // unreached target-to-source case only the starting target survives.
    std::vector<LabeledTerm> labeled;
    if (walk.reached || type2) {
      const std::size_t anchor = type2 ? walk.nodes.front() : walk.nodes.back();
      const auto& anchor_value = embeddings.at(anchor).value();
      std::vector<std::size_t> seen;
      const std::size_t span_len = walk.reached ? walk.nodes.size() : 1;
      for (std::size_t k = 0; k < span_len; ++k) {
        const std::size_t v = walk.nodes[k];
        const Domain d = nodes.domains[v];
        if (d == Domain::Auxiliary || !nodes.labels[v].has_value()) continue;
        if (std::find(seen.begin(), seen.end(), v) != seen.end()) continue;
        seen.push_back(v);
        const ad::Var e = embeddings.at(v);
        const std::size_t use = report.labeled_nodes.size();
        double weight;
        if (settings.fixed_weights.empty()) {
          weight = instance_weight(e.value().values(), anchor_value.values(), d, settings.alpha);
        } else {
          if (use >= settings.fixed_weights.size()) {
            throw DimensionError("objective: too few fixed weights");
          }
          weight = settings.fixed_weights[use];
        }
        report.labeled_nodes.push_back(v);
        report.weights.push_back(weight);
        labeled.push_back(LabeledTerm{e, *nodes.labels[v], weight});
      }
    }
    if (!labeled.empty()) {
      const ad::Var l3 = classification_loss(tape, params, labeled);
      wl.l3 = l3.item();
      if (settings.lambda2 != 0.0) terms.push_back(ad::scale(l3, settings.lambda2));
    }

    report.l1_total += wl.l1;
    report.l2_total += wl.l2;
    report.l3_total += wl.l3;
    report.walks.push_back(wl);
  }

  result.total = terms.empty() ? tape.constant(Matrix::scalar(0.0)) : ad::add_n(terms);
  report.objective = result.total.item();
  if (!std::isfinite(report.objective)) throw NumericError("objective: non-finite value");
  return result;
}

}  // namespace derwent
