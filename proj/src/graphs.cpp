#include "cgcolor/graphs.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace cgcolor {

const char* to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::ltrip: return "ltrip";
    case GraphKind::bethe: return "bethe";
    case GraphKind::custom: return "custom";
  }
  return "?";
}

const char* to_string(RipViolation::Kind kind) {
  using K = RipViolation::Kind;
  switch (kind) {
    case K::empty_cluster: return "empty_cluster";
    case K::bad_endpoint: return "bad_endpoint";
    case K::self_loop: return "self_loop";
    case K::duplicate_link: return "duplicate_link";
    case K::empty_sepset: return "empty_sepset";
    case K::sepset_outside_intersection: return "sepset_outside_intersection";
    case K::disconnected: return "disconnected";
    case K::cycle: return "cycle";
  }
  return "?";
}

bool operator==(const Cluster& x, const Cluster& y) { return x.id == y.id && x.vars == y.vars; }
bool operator==(const Sepset& x, const Sepset& y) { return x.a == y.a && x.b == y.b && x.vars == y.vars; }
bool operator==(const ClusterGraph& x, const ClusterGraph& y) {
  return x.kind == y.kind && x.clusters == y.clusters && x.sepsets == y.sepsets;
}

std::size_t ClusterGraph::add_cluster(VarSet vars) {
  clusters.push_back({clusters.size(), std::move(vars)});
  return clusters.back().id;
}

void ClusterGraph::add_sepset(std::size_t a, std::size_t b, VarSet vars) {
  if (a > b) std::swap(a, b);
  sepsets.push_back({a, b, std::move(vars)});
}

std::vector<std::vector<std::size_t>> ClusterGraph::incidence() const {
  std::vector<std::vector<std::size_t>> inc(clusters.size());
  for (std::size_t e = 0; e < sepsets.size(); ++e) {
    inc[sepsets[e].a].push_back(e);
    if (sepsets[e].b != sepsets[e].a) inc[sepsets[e].b].push_back(e);
  }
  return inc;
}

namespace {

// Survivor index for every input position (itself when it survives).
std::vector<std::size_t> absorption_targets(const std::vector<const VarSet*>& sets) {
  const std::size_t n = sets.size();
  std::vector<bool> survives(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n && survives[i]; ++j) {
      if (i == j || !is_subset(*sets[i], *sets[j])) continue;
      // a strict subset never survives; among equal sets the first one does
      if (sets[i]->size() < sets[j]->size() || j < i) survives[i] = false;
    }
  }
  std::vector<std::size_t> target(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (survives[i]) {
      target[i] = i;
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && survives[j] && is_subset(*sets[i], *sets[j])) {
        target[i] = j;
        break;
      }
    }
  }
  return target;
}

}  // namespace

std::vector<ClusterFactor> assimilate_subsets(std::vector<ClusterFactor> clusters) {
  std::vector<const VarSet*> sets;
  for (const auto& c : clusters) sets.push_back(&c.vars);
  const auto target = absorption_targets(sets);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (target[i] != i) clusters[target[i]].table = multiply(clusters[target[i]].table, clusters[i].table);
  }
  std::vector<ClusterFactor> out;
  for (std::size_t i = 0; i < clusters.size(); ++i)
    if (target[i] == i) out.push_back(std::move(clusters[i]));
  return out;
}

std::vector<VarSet> assimilate_subsets(const std::vector<VarSet>& clusters) {
  std::vector<const VarSet*> sets;
  for (const auto& c : clusters) sets.push_back(&c);
  const auto target = absorption_targets(sets);
  std::vector<VarSet> out;
  for (std::size_t i = 0; i < clusters.size(); ++i)
    if (target[i] == i) out.push_back(clusters[i]);
  return out;
}

int max_intersection_weight(const std::vector<VarSet>& layer) {
  int m = 0;
  for (std::size_t i = 0; i < layer.size(); ++i)
    for (std::size_t j = i + 1; j < layer.size(); ++j)
      m = std::max(m, static_cast<int>(intersect(layer[i], layer[j]).size()));
  return m;
}

WeightMatrix connection_weights(const std::vector<VarSet>& layer) {
  const std::size_t n = layer.size();
  WeightMatrix w(n, std::vector<int>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) w[i][j] = w[j][i] = static_cast<int>(intersect(layer[i], layer[j]).size());
  if (n < 2) return w;

  const int m = max_intersection_weight(layer);
  std::vector<int> maximal_links(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && w[i][j] == m) ++maximal_links[i];
  // every node adds its count to each link it touches, from both ends
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      w[i][j] += maximal_links[i];
      w[j][i] += maximal_links[i];
    }
  }
  return w;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(std::size_t x, std::size_t y) {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    parent_[std::max(x, y)] = std::min(x, y);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<WeightedEdge> max_spanning_tree(const WeightMatrix& weights) {
  const std::size_t n = weights.size();
  if (n < 2) return {};
  std::vector<WeightedEdge> candidates;
  candidates.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) candidates.push_back({i, j, weights[i][j]});
  std::sort(candidates.begin(), candidates.end(), [](const WeightedEdge& x, const WeightedEdge& y) {
    if (x.weight != y.weight) return x.weight > y.weight;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  DisjointSets forest(n);
  std::vector<WeightedEdge> tree;
  for (const auto& e : candidates) {
    if (tree.size() == n - 1) break;
    if (forest.unite(e.a, e.b)) tree.push_back(e);
  }
  return tree;
}

ClusterGraph ltrip(const std::vector<VarSet>& clusters, std::vector<LayerTree>* layers) {
  if (clusters.empty()) throw std::invalid_argument("ltrip needs at least one cluster");
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (clusters[i].empty()) throw std::invalid_argument("cluster " + std::to_string(i) + " is empty");
  }

  ClusterGraph g;
  g.kind = GraphKind::ltrip;
  for (const auto& c : clusters) g.add_cluster(c);

  std::map<VarId, std::vector<std::size_t>> holders;
  for (std::size_t i = 0; i < clusters.size(); ++i)
    for (VarId v : clusters[i]) holders[v].push_back(i);

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> link_of;
  for (const auto& [var, members] : holders) {
    std::vector<VarSet> layer;
    for (std::size_t id : members) layer.push_back(clusters[id]);
    LayerTree tree{var, members, connection_weights(layer), {}};
    for (const auto& e : max_spanning_tree(tree.weights)) {
      const std::pair<std::size_t, std::size_t> key{members[e.a], members[e.b]};
      tree.edges.push_back(key);
      auto [it, fresh] = link_of.try_emplace(key, g.sepsets.size());
      if (fresh) {
        g.add_sepset(key.first, key.second, {var});
      } else {
        g.sepsets[it->second].vars.push_back(var);  // vars arrive ascending
      }
    }
    if (layers) layers->push_back(std::move(tree));
  }
  return g;
}

ClusterGraph bethe_graph(const std::vector<VarSet>& clusters) {
  ClusterGraph g;
  g.kind = GraphKind::bethe;
  std::set<VarId> vars;
  for (const auto& c : clusters) {
    g.add_cluster(c);
    vars.insert(c.begin(), c.end());
  }
  for (VarId v : vars) {
    const std::size_t hub = g.add_cluster({v});
    for (std::size_t i = 0; i < clusters.size(); ++i)
      if (contains(clusters[i], v)) g.add_sepset(i, hub, {v});
  }
  return g;
}

RipReport validate_rip(const ClusterGraph& g) {
  using K = RipViolation::Kind;
  RipReport report;
  auto flag = [&](K kind, std::optional<VarId> var, std::vector<std::size_t> links, std::string msg) {
    report.violations.push_back({kind, var, std::move(links), std::move(msg)});
  };

  const std::size_t n = g.clusters.size();
  for (std::size_t i = 0; i < n; ++i)
    if (g.clusters[i].vars.empty()) flag(K::empty_cluster, std::nullopt, {}, "cluster " + std::to_string(i) + " has no variables");

  // links usable for the per-variable path check
  std::vector<bool> usable(g.sepsets.size(), false);
  std::set<std::pair<std::size_t, std::size_t>> seen_pairs;
  for (std::size_t e = 0; e < g.sepsets.size(); ++e) {
    const auto& s = g.sepsets[e];
    const std::string where = "sepset " + std::to_string(e) + " (" + std::to_string(s.a) + "-" + std::to_string(s.b) + ")";
    if (s.a >= n || s.b >= n) {
      flag(K::bad_endpoint, std::nullopt, {e}, where + " references a missing cluster");
      continue;
    }
    if (s.a == s.b) {
      flag(K::self_loop, std::nullopt, {e}, where + " is a self-loop");
      continue;
    }
    if (!seen_pairs.insert(std::minmax(s.a, s.b)).second)
      flag(K::duplicate_link, std::nullopt, {e}, where + " duplicates an earlier link");
    if (s.vars.empty()) flag(K::empty_sepset, std::nullopt, {e}, where + " is empty");
    const VarSet& ca = g.clusters[s.a].vars;
    const VarSet& cb = g.clusters[s.b].vars;
    for (VarId v : s.vars) {
      if (!std::binary_search(ca.begin(), ca.end(), v) || !std::binary_search(cb.begin(), cb.end(), v)) {
        flag(K::sepset_outside_intersection, v, {e}, where + " carries a variable missing from an endpoint");
      }
    }
    usable[e] = true;
  }

  std::set<VarId> universe;
  for (const auto& c : g.clusters) universe.insert(c.vars.begin(), c.vars.end());

  for (VarId x : universe) {
    std::vector<std::size_t> holders;
    std::vector<int> slot(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::binary_search(g.clusters[i].vars.begin(), g.clusters[i].vars.end(), x)) {
        slot[i] = static_cast<int>(holders.size());
        holders.push_back(i);
      }
    }
    // adjacency restricted to links carrying x between holders of x
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(holders.size());
    std::vector<std::size_t> carrying;
    for (std::size_t e = 0; e < g.sepsets.size(); ++e) {
      const auto& s = g.sepsets[e];
      if (!usable[e] || !std::binary_search(s.vars.begin(), s.vars.end(), x)) continue;
      if (slot[s.a] < 0 || slot[s.b] < 0) continue;
      carrying.push_back(e);
      adj[slot[s.a]].push_back({static_cast<std::size_t>(slot[s.b]), e});
      adj[slot[s.b]].push_back({static_cast<std::size_t>(slot[s.a]), e});
    }

    std::vector<bool> visited(holders.size(), false);
    std::vector<bool> edge_used(g.sepsets.size(), false);
    std::vector<std::size_t> closing;
    std::size_t components = 0;
    for (std::size_t start = 0; start < holders.size(); ++start) {
      if (visited[start]) continue;
      ++components;
      std::deque<std::size_t> frontier{start};
      visited[start] = true;
      while (!frontier.empty()) {
        const std::size_t u = frontier.front();
        frontier.pop_front();
        for (auto [v, e] : adj[u]) {
          if (edge_used[e]) continue;
          edge_used[e] = true;
          if (visited[v]) {
            closing.push_back(e);
          } else {
            visited[v] = true;
            frontier.push_back(v);
          }
        }
      }
    }
    const std::string name = "variable " + std::to_string(x.value);
    if (components > 1) {
      flag(K::disconnected, x, carrying,
           name + " is split into " + std::to_string(components) + " unlinked groups over " +
               std::to_string(holders.size()) + " clusters");
    }
    if (!closing.empty()) {
      std::sort(closing.begin(), closing.end());
      flag(K::cycle, x, closing, name + " has more than one path between some clusters");
    }
  }
  return report;
}

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string html_escaped(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string export_dot(const ClusterGraph& g, const VariableRegistry& names) {
  std::ostringstream os;
  os << "graph cluster_graph {\n";
  os << "  // kind: " << to_string(g.kind) << "\n";
  os << "  node [shape=ellipse];\n";
  for (const auto& c : g.clusters) os << "  c" << c.id << " [label=" << quoted(names.join(c.vars)) << "];\n";
  for (const auto& s : g.sepsets) {
    os << "  c" << s.a << " -- c" << s.b << " [label=<<table border=\"1\" cellborder=\"0\" cellspacing=\"0\"><tr><td>"
       << html_escaped(names.join(s.vars)) << "</td></tr></table>>];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace cgcolor
