#include "cgcolor/inference.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace cgcolor {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

std::size_t directed_id(std::size_t sepset, Direction dir) { return 2 * sepset + (dir == Direction::b_to_a ? 1 : 0); }

}  // namespace

void InferenceOptions::validate() const {
  if (!(threshold > 0.0)) throw std::invalid_argument("convergence threshold must be positive");
  if (max_messages == 0) throw std::invalid_argument("message budget must be positive");
}

InferenceState::InferenceState(ClusterGraph graph, std::vector<SparseTable> factors, Semiring semiring)
    : graph_(std::move(graph)), semiring_(semiring), beliefs_(std::move(factors)) {
  if (beliefs_.size() != graph_.clusters.size()) {
    throw std::invalid_argument("expected one factor per cluster: " + std::to_string(graph_.clusters.size()) +
                                " clusters, " + std::to_string(beliefs_.size()) + " factors");
  }
  std::map<VarId, Label> cards;
  for (std::size_t i = 0; i < beliefs_.size(); ++i) {
    const auto& t = beliefs_[i];
    if (t.scope() != graph_.clusters[i].vars) {
      throw std::invalid_argument("factor scope does not match the variables of cluster " + std::to_string(i));
    }
    for (std::size_t k = 0; k < t.arity(); ++k) {
      auto [it, fresh] = cards.try_emplace(t.scope()[k], t.cards()[k]);
      if (!fresh && it->second != t.cards()[k]) {
        throw std::invalid_argument("variable " + std::to_string(t.scope()[k].value) +
                                    " has inconsistent cardinalities across clusters");
      }
    }
    if (semiring_ == Semiring::max) beliefs_[i] = normalize(t, Semiring::max);
    else if (t.empty()) throw Contradiction("factor of cluster " + std::to_string(i) + " has no support");
  }

  for (std::size_t s = 0; s < graph_.sepsets.size(); ++s) {
    const auto& sep = graph_.sepsets[s];
    if (sep.a >= graph_.clusters.size() || sep.b >= graph_.clusters.size() || sep.a == sep.b) {
      throw std::invalid_argument("sepset " + std::to_string(s) + " has invalid endpoints");
    }
    if (sep.vars.empty() || !is_subset(sep.vars, graph_.clusters[sep.a].vars) ||
        !is_subset(sep.vars, graph_.clusters[sep.b].vars)) {
      throw std::invalid_argument("sepset " + std::to_string(s) + " is empty or not shared by its endpoints");
    }
    std::vector<Label> sep_cards;
    for (VarId v : sep.vars) sep_cards.push_back(cards.at(v));
    sepset_beliefs_.push_back(SparseTable::uniform(sep.vars, sep_cards));
  }

  incidence_ = graph_.incidence();
  const std::size_t n = 2 * graph_.sepsets.size();
  pending_.assign(n, kInfinity);
  last_residual_.assign(n, kInfinity);
  sent_.assign(n, false);
  unheard_.resize(n);
  for (std::size_t d = 0; d < n; ++d) {
    const auto& sep = graph_.sepsets[d / 2];
    unheard_[d] = incidence_[d % 2 == 0 ? sep.a : sep.b].size() - 1;
    queue_.insert(key(d));
  }
}

InferenceState init(const ClusterGraph& g, std::vector<SparseTable> factors, Semiring semiring) {
  return InferenceState(g, std::move(factors), semiring);
}

std::size_t InferenceState::queued() const { return queue_.size(); }

double InferenceState::max_pending() const { return queue_.empty() ? 0.0 : queue_.begin()->pending; }

void InferenceState::set_pending(std::size_t directed, double value) {
  if (pending_[directed] > 0.0) queue_.erase(key(directed));
  pending_[directed] = value;
  if (value > 0.0) queue_.insert(key(directed));
}

double InferenceState::pass_message(std::size_t sepset, Direction dir) {
  if (sepset >= graph_.sepsets.size()) throw std::out_of_range("no sepset " + std::to_string(sepset));
  return send(directed_id(sepset, dir));
}

double InferenceState::send(std::size_t directed) {
  const std::size_t s = directed / 2;
  const auto& sep = graph_.sepsets[s];
  const bool forward = directed % 2 == 0;
  const std::size_t source = forward ? sep.a : sep.b;
  const std::size_t target = forward ? sep.b : sep.a;

  const SparseTable message = marginalize(beliefs_[source], sep.vars, semiring_);
  const double residual = kl_divergence(message, sepset_beliefs_[s]);
  try {
    beliefs_[target] = normalize(multiply(beliefs_[target], divide(message, sepset_beliefs_[s])), semiring_);
  } catch (const Contradiction&) {
    throw Contradiction("cluster " + std::to_string(target) + " lost all support after the message from cluster " +
                        std::to_string(source) + " over sepset " + std::to_string(s));
  }
  sepset_beliefs_[s] = message;
  last_residual_[directed] = residual;
  ++stats_.messages;

  // the source is unchanged, so resending this message would be a no-op;
  // the reply over the same sepset would only echo it back
  set_pending(directed, 0.0);
  const bool first = !sent_[directed];
  sent_[directed] = true;
  for (std::size_t e : incidence_[target]) {
    if (e == s) continue;
    const std::size_t out = directed_id(e, graph_.sepsets[e].a == target ? Direction::a_to_b : Direction::b_to_a);
    if (first && !sent_[out]) {
      if (pending_[out] > 0.0) queue_.erase(key(out));
      --unheard_[out];
      if (pending_[out] > 0.0) queue_.insert(key(out));
    }
    if (residual > pending_[out]) set_pending(out, residual);
  }
  return residual;
}

Posterior InferenceState::run(const InferenceOptions& opts) {
  opts.validate();
  if (opts.semiring != semiring_) throw std::invalid_argument("options semiring differs from the state's semiring");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t budget_end = stats_.messages + opts.max_messages;
  bool converged = false;

  if (opts.schedule == Schedule::residual) {
    while (true) {
      if (max_pending() < opts.threshold) {
        converged = true;
        break;
      }
      if (stats_.messages >= budget_end) break;
      send(queue_.begin()->id);
    }
    if (!pending_.empty()) stats_.sweeps = (stats_.messages + pending_.size() - 1) / pending_.size();
  } else {
    while (!converged) {
      bool quiet = true;
      bool exhausted = false;
      for (std::size_t d = 0; d < pending_.size(); ++d) {
        if (stats_.messages >= budget_end) {
          exhausted = true;
          break;
        }
        if (send(d) >= opts.threshold) quiet = false;
      }
      if (exhausted) break;
      ++stats_.sweeps;
      converged = quiet;
    }
  }

  stats_.wall_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  spdlog::debug("inference: {} messages, {} sweeps, converged={}, {:.3f} ms", stats_.messages, stats_.sweeps,
                converged, stats_.wall_ms);
  return posterior(converged);
}

Posterior InferenceState::posterior(bool converged) const {
  Posterior post;
  post.converged = converged;
  post.cluster_beliefs = beliefs_;
  post.stats = stats_;

  // smallest containing cluster, lowest id on ties
  std::map<VarId, std::size_t> home;
  for (std::size_t i = 0; i < graph_.clusters.size(); ++i) {
    for (VarId v : graph_.clusters[i].vars) {
      auto [it, fresh] = home.try_emplace(v, i);
      if (!fresh && graph_.clusters[i].vars.size() < graph_.clusters[it->second].vars.size()) it->second = i;
    }
  }
  for (const auto& [v, cluster] : home) {
    auto marginal = normalize(marginalize(beliefs_[cluster], {v}, semiring_), semiring_);
    post.decoded[v] = argmax_assignment(marginal)[0];
    post.marginals.emplace(v, std::move(marginal));
  }
  return post;
}

CalibrationReport check_calibration(const InferenceState& state, double tol) {
  CalibrationReport report;
  const auto& g = state.graph();
  for (const auto& sep : g.sepsets) {
    const auto ma = marginalize(state.cluster_beliefs()[sep.a], sep.vars, state.semiring());
    const auto mb = marginalize(state.cluster_beliefs()[sep.b], sep.vars, state.semiring());
    const double d = std::max(kl_divergence(ma, mb), kl_divergence(mb, ma));
    report.discrepancy.push_back(d);
    report.max_discrepancy = std::max(report.max_discrepancy, d);
  }
  report.calibrated = report.max_discrepancy <= tol;
  return report;
}

}  // namespace cgcolor
