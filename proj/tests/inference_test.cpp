#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "cgcolor/coloring.hpp"
#include "cgcolor/inference.hpp"
#include "oracle.hpp"

using namespace cgcolor;

namespace {

const VarId A{0}, B{1}, C{2}, D{3}, E{4}, F{5}, G{6};

ClusterGraph seven_region_graph() {
  ClusterGraph g;
  g.add_cluster({A, C, D, F});
  g.add_cluster({B, E, F});
  g.add_cluster({D, E, F});
  g.add_cluster({B, E, G});
  g.add_cluster({D, E, G});
  g.add_sepset(0, 2, {D, F});
  g.add_sepset(0, 1, {F});
  g.add_sepset(1, 2, {E});
  g.add_sepset(2, 4, {D, E});
  g.add_sepset(1, 3, {B, E});
  g.add_sepset(3, 4, {G});
  return g;
}

std::vector<SparseTable> permutation_factors(const ClusterGraph& g, Label k) {
  std::vector<SparseTable> out;
  for (const auto& c : g.clusters) out.push_back(permutation_factor(c.vars, k));
  return out;
}

std::vector<SparseTable> random_factors(std::mt19937_64& rng, const ClusterGraph& g,
                                        const std::map<VarId, Label>& cards, double density) {
  std::vector<SparseTable> out;
  for (const auto& c : g.clusters) {
    std::vector<Label> cc;
    for (VarId v : c.vars) cc.push_back(cards.at(v));
    out.push_back(oracle::random_table(rng, c.vars, cc, density));
  }
  return out;
}

struct TreeCase {
  ClusterGraph graph;
  std::map<VarId, Label> cards;
};

// Random junction tree: each new cluster keeps a non-empty part of its
// parent and introduces fresh variables, so every variable's clusters form
// a connected subtree.
TreeCase random_tree(std::mt19937_64& rng) {
  TreeCase t;
  std::uint32_t next = 0;
  auto fresh = [&] {
    const VarId v(next++);
    t.cards[v] = 2 + static_cast<Label>(rng() % 2);
    return v;
  };
  const std::size_t n = 2 + rng() % 4;
  VarSet root{fresh(), fresh()};
  t.graph.add_cluster(make_varset(root));
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t parent = rng() % i;
    const auto& pv = t.graph.clusters[parent].vars;
    VarSet shared;
    for (VarId v : pv)
      if (rng() % 2) shared.push_back(v);
    if (shared.empty()) shared.push_back(pv[rng() % pv.size()]);
    VarSet vars = shared;
    const std::size_t extra = 1 + rng() % 2;
    for (std::size_t j = 0; j < extra; ++j) vars.push_back(fresh());
    const auto id = t.graph.add_cluster(make_varset(vars));
    t.graph.add_sepset(parent, id, make_varset(shared));
  }
  return t;
}

oracle::Dense normalized(oracle::Dense d) {
  double z = 0;
  for (double v : d.values) z += v;
  for (double& v : d.values) v /= z;
  return d;
}

oracle::Dense joint_of(const std::vector<SparseTable>& factors) {
  oracle::Dense j = oracle::to_dense(factors.front());
  for (std::size_t i = 1; i < factors.size(); ++i) j = oracle::product(j, oracle::to_dense(factors[i]));
  return j;
}

SparseTable indicator(VarId v, Label card, Label value) {
  return SparseTable::from_entries({v}, {card}, {{Assignment{value}, 1.0}});
}

struct SudokuModel {
  ColoringProblem problem;
  ClusterGraph graph;
  std::vector<SparseTable> factors;
};

SudokuModel sudoku_model(const std::string& text) {
  SudokuModel m;
  m.problem = sudoku_problem(text, 4);
  auto factors = assimilate_subsets(build_factors(m.problem, maximal_cliques(m.problem)));
  std::vector<VarSet> vars;
  for (auto& f : factors) {
    vars.push_back(f.vars);
    m.factors.push_back(std::move(f.table));
  }
  m.graph = ltrip(vars);
  return m;
}

VarAssignment completed(const SudokuModel& m, const Posterior& post) {
  VarAssignment a = m.problem.givens;
  for (auto [v, l] : post.decoded) a[v] = l;
  return a;
}

// Puzzles of the given clue count with exactly one solution, drawn from random grids.
std::vector<std::string> unique_puzzles(std::mt19937_64& rng, std::size_t clues, std::size_t count,
                                        std::size_t max_solutions = 1) {
  const auto grids = oracle::colourings(sudoku_problem(std::string(16, '.'), 4));
  std::vector<std::string> out;
  while (out.size() < count) {
    const auto& grid = grids[rng() % grids.size()];
    std::vector<int> cells(16);
    std::iota(cells.begin(), cells.end(), 0);
    std::shuffle(cells.begin(), cells.end(), rng);
    std::string s(16, '.');
    for (std::size_t i = 0; i < clues; ++i) s[cells[i]] = static_cast<char>('1' + grid.at(VarId(cells[i])));
    const auto n = oracle::colourings(sudoku_problem(s, 4), max_solutions + 1).size();
    if ((max_solutions == 1 && n == 1) || (max_solutions > 1 && n > 1)) out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(Options, Validation) {
  InferenceOptions o;
  EXPECT_NO_THROW(o.validate());
  o.threshold = 0.0;
  EXPECT_THROW(o.validate(), std::invalid_argument);
  o.threshold = 1e-8;
  o.max_messages = 0;
  EXPECT_THROW(o.validate(), std::invalid_argument);
}

TEST(Init, SingleCluster) {
  ClusterGraph g;
  g.add_cluster({A, B});
  auto state = init(g, {permutation_factor({A, B}, 3)});
  EXPECT_EQ(state.cluster_beliefs().size(), 1u);
  EXPECT_EQ(state.queued(), 0u);
  const auto post = state.run({});
  EXPECT_TRUE(post.converged);
  EXPECT_EQ(post.stats.messages, 0u);
  EXPECT_EQ(post.decoded.size(), 2u);
}

TEST(Init, SevenRegionGraph) {
  const auto g = seven_region_graph();
  auto state = init(g, permutation_factors(g, 4));
  EXPECT_EQ(state.cluster_beliefs().size(), 5u);
  EXPECT_EQ(state.sepset_beliefs().size(), 6u);
  EXPECT_EQ(state.queued(), 12u);
  EXPECT_EQ(state.directed_edge_count(), 12u);
  EXPECT_TRUE(std::isinf(state.pending(0)));
  for (std::size_t s = 0; s < 6; ++s) {
    const auto& sb = state.sepset_beliefs()[s];
    EXPECT_EQ(sb.scope(), g.sepsets[s].vars);
    EXPECT_EQ(sb.size(), sb.state_count());
    for (const auto& e : sb.entries()) EXPECT_EQ(e.value, 1.0);
  }
}

TEST(Init, MaxNormalizesInMaxMode) {
  ClusterGraph g;
  g.add_cluster({A});
  const auto t = SparseTable::from_entries({A}, {2}, {{Assignment{0}, 2.0}, {Assignment{1}, 8.0}});
  EXPECT_EQ(init(g, {t}, Semiring::max).cluster_beliefs()[0].max_value(), 1.0);
  EXPECT_EQ(init(g, {t}, Semiring::sum).cluster_beliefs()[0].total(), 10.0);
}

TEST(Init, Errors) {
  const auto g = seven_region_graph();
  auto wrong = permutation_factors(g, 4);
  wrong[2] = permutation_factor({D, E}, 4);
  EXPECT_THROW(init(g, wrong), std::invalid_argument);

  auto cards = permutation_factors(g, 4);
  cards[1] = SparseTable::uniform({B, E, F}, {3, 3, 3});
  EXPECT_THROW(init(g, cards), std::invalid_argument);

  EXPECT_THROW(init(g, {}), std::invalid_argument);

  ClusterGraph bad = g;
  bad.sepsets[5].vars = {A};
  EXPECT_THROW(init(bad, permutation_factors(g, 4)), std::invalid_argument);

  auto state = init(g, permutation_factors(g, 4));
  InferenceOptions sum;
  sum.semiring = Semiring::sum;
  EXPECT_THROW(state.run(sum), std::invalid_argument);
  EXPECT_THROW(state.pass_message(6, Direction::a_to_b), std::out_of_range);
}

TEST(PassMessage, AgreeingSourceLeavesTargetUnchanged) {
  ClusterGraph g;
  g.add_cluster({A, B});
  g.add_cluster({B, C});
  g.add_sepset(0, 1, {B});
  auto state = init(g, {SparseTable::uniform({A, B}, {2, 3}), permutation_factor({B, C}, 3)});
  const auto before = state.cluster_beliefs()[1];
  EXPECT_EQ(state.pass_message(0, Direction::a_to_b), 0.0);
  EXPECT_EQ(state.cluster_beliefs()[1].scope(), before.scope());
  ASSERT_EQ(state.cluster_beliefs()[1].size(), before.size());
  for (std::size_t i = 0; i < before.size(); ++i)
    EXPECT_EQ(state.cluster_beliefs()[1].entries()[i].value, before.entries()[i].value);
}

TEST(PassMessage, ObservationPrunesLikeConditioning) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const Label a = rng() % 3;
    const auto phi1 = oracle::random_table(rng, {A, B}, {3, 4}, 0.6);
    const auto phi2 = oracle::random_table(rng, {B, C}, {4, 2}, 0.9);
    const auto evidence = multiply(phi1, indicator(A, 3, a));
    ClusterGraph g;
    g.add_cluster({A, B});
    g.add_cluster({B, C});
    g.add_sepset(0, 1, {B});

    const auto joint = oracle::product(oracle::to_dense(phi1), oracle::to_dense(phi2));
    const auto expected = normalized(oracle::condition(joint, A, a));
    double mass = 0;
    for (double v : expected.values) mass += v;
    if (evidence.empty() || !std::isfinite(mass) || phi2.empty()) continue;

    auto state = init(g, {evidence, phi2}, Semiring::sum);
    try {
      state.pass_message(0, Direction::a_to_b);
    } catch (const Contradiction&) {
      // the observation is incompatible with phi2 altogether
      EXPECT_FALSE(mass > 0) << "trial " << trial;
      continue;
    }
    EXPECT_TRUE(oracle::agrees(state.cluster_beliefs()[1], expected, 1e-12)) << "trial " << trial;
  }
}

TEST(PassMessage, OnlySepsetVariablesCross) {
  std::mt19937_64 rng(23);
  const auto g = seven_region_graph();
  std::map<VarId, Label> cards;
  for (std::uint32_t i = 0; i < 7; ++i) cards[VarId(i)] = 3;
  const auto factors = random_factors(rng, g, cards, 1.0);
  auto state = init(g, factors, Semiring::sum);
  // sepset 5 links {B,E,G} (cluster 3) and {D,E,G} (cluster 4) over G only
  state.pass_message(5, Direction::a_to_b);
  const auto m = oracle::reduce(oracle::to_dense(factors[3]), {G}, false);
  const auto expected = normalized(oracle::product(oracle::to_dense(factors[4]), m));
  EXPECT_TRUE(oracle::agrees(state.cluster_beliefs()[4], expected, 1e-12));

  // the update ratio is a function of G alone
  const auto before = oracle::to_dense(normalize(factors[4], Semiring::sum));
  const auto after = oracle::to_dense(state.cluster_beliefs()[4]);
  for (std::size_t f = 0; f < before.states(); ++f) {
    for (std::size_t h = 0; h < before.states(); ++h) {
      if (before.at(f)[2] != before.at(h)[2]) continue;
      EXPECT_NEAR(after.values[f] / before.values[f], after.values[h] / before.values[h], 1e-12);
    }
  }
}

TEST(PassMessage, ReenqueuesTargetEdges) {
  const auto g = seven_region_graph();
  auto state = init(g, permutation_factors(g, 4));
  state.run({});
  // after convergence nothing is queued; a perturbing pass has nothing new to say
  EXPECT_LT(state.max_pending(), 1e-8);
  const double r = state.pass_message(1, Direction::b_to_a);
  EXPECT_LT(r, 1e-8);
}

TEST(Run, TreesAreExactInSumMode) {
  std::mt19937_64 rng(101);
  std::size_t worst_ratio_numerator = 0, worst_edges = 1;
  for (int trial = 0; trial < 200; ++trial) {
    const auto tc = random_tree(rng);
    ASSERT_TRUE(validate_rip(tc.graph).valid());
    const auto factors = random_factors(rng, tc.graph, tc.cards, 1.0);
    auto state = init(tc.graph, factors, Semiring::sum);
    InferenceOptions opts;
    opts.semiring = Semiring::sum;
    opts.threshold = 1e-14;
    const auto post = state.run(opts);
    ASSERT_TRUE(post.converged);

    const auto joint = joint_of(factors);
    for (std::size_t i = 0; i < tc.graph.clusters.size(); ++i) {
      const auto expected = normalized(oracle::reduce(joint, tc.graph.clusters[i].vars, false));
      EXPECT_TRUE(oracle::agrees(post.cluster_beliefs[i], expected, 1e-10)) << "trial " << trial << " cluster " << i;
    }
    for (const auto& [v, marginal] : post.marginals) {
      const auto expected = normalized(oracle::reduce(joint, {v}, false));
      EXPECT_TRUE(oracle::agrees(marginal, expected, 1e-10)) << "trial " << trial;
      EXPECT_EQ(post.decoded.at(v), oracle::argmax(expected)[0]);
    }
    EXPECT_TRUE(check_calibration(state, 1e-9).calibrated);

    const std::size_t edges = tc.graph.sepsets.size();
    if (post.stats.messages * worst_edges > worst_ratio_numerator * edges) {
      worst_ratio_numerator = post.stats.messages;
      worst_edges = edges;
    }
  }
  RecordProperty("worst_messages", static_cast<int>(worst_ratio_numerator));
  RecordProperty("worst_edges", static_cast<int>(worst_edges));
}

TEST(Run, TreesConvergeWithinTwoMessagesPerEdge) {
  std::mt19937_64 rng(202);
  std::size_t over = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto tc = random_tree(rng);
    auto state = init(tc.graph, random_factors(rng, tc.graph, tc.cards, 1.0), Semiring::sum);
    InferenceOptions opts;
    opts.semiring = Semiring::sum;
    const auto post = state.run(opts);
    ASSERT_TRUE(post.converged);
    if (post.stats.messages > 2 * tc.graph.sepsets.size()) ++over;
  }
  EXPECT_EQ(over, 0u);
}

TEST(Run, MaxModeTreeMatchesMaxMarginals) {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    const auto tc = random_tree(rng);
    const auto factors = random_factors(rng, tc.graph, tc.cards, 1.0);
    auto state = init(tc.graph, factors);
    const auto post = state.run({});
    ASSERT_TRUE(post.converged);
    const auto joint = joint_of(factors);
    for (const auto& [v, marginal] : post.marginals) {
      auto expected = oracle::reduce(joint, {v}, true);
      const double top = *std::max_element(expected.values.begin(), expected.values.end());
      for (double& x : expected.values) x /= top;
      EXPECT_TRUE(oracle::agrees(marginal, expected, 1e-10)) << "trial " << trial;
    }
  }
}

TEST(Run, FullyObservedCluster) {
  ClusterGraph g;
  g.add_cluster({A, B});
  g.add_cluster({B, C});
  g.add_sepset(0, 1, {B});
  auto state = init(g, {SparseTable::from_entries({A, B}, {3, 3}, {{Assignment{2, 0}, 1.0}}),
                        SparseTable::from_entries({B, C}, {3, 3}, {{Assignment{0, 1}, 1.0}})});
  const auto post = state.run({});
  EXPECT_TRUE(post.converged);
  EXPECT_EQ(post.decoded, (VarAssignment{{A, 2}, {B, 0}, {C, 1}}));
}

TEST(Run, SolvesFourByFourSudoku) {
  std::mt19937_64 rng(7);
  for (const auto& text : unique_puzzles(rng, 4, 40)) {
    const auto m = sudoku_model(text);
    const auto truth = oracle::colourings(m.problem, 2);
    ASSERT_EQ(truth.size(), 1u);
    for (Schedule schedule : {Schedule::residual, Schedule::round_robin}) {
      auto state = init(m.graph, m.factors);
      InferenceOptions opts;
      opts.schedule = schedule;
      const auto post = state.run(opts);
      ASSERT_TRUE(post.converged) << text;
      const auto answer = completed(m, post);
      EXPECT_TRUE(verify_coloring(m.problem, answer).valid()) << text;
      EXPECT_EQ(answer, truth.front()) << text;
      EXPECT_TRUE(check_calibration(state, 1e-9).calibrated) << text;
    }
  }
}

TEST(Run, PreservesEverySolution) {
  std::mt19937_64 rng(8);
  for (const auto& text : unique_puzzles(rng, 3, 20, 50)) {
    const auto m = sudoku_model(text);
    const auto solutions = oracle::colourings(m.problem);
    ASSERT_GT(solutions.size(), 1u);
    auto state = init(m.graph, m.factors);
    const auto post = state.run({});
    ASSERT_TRUE(post.converged);
    for (std::size_t i = 0; i < m.graph.clusters.size(); ++i) {
      const auto& belief = post.cluster_beliefs[i];
      EXPECT_LE(belief.size(), m.factors[i].size());
      for (const auto& s : solutions) {
        Assignment x;
        for (VarId v : belief.scope()) x.push_back(s.at(v));
        EXPECT_GT(belief.value(x), 0.0) << text;
      }
    }
  }
}

TEST(Run, ContradictionIsReported) {
  // cell C must be 3 by its row and cannot be 3 by its column
  const auto m = sudoku_model("12.4........" "..3.");
  auto state = init(m.graph, m.factors);
  EXPECT_THROW(state.run({}), Contradiction);
}

TEST(Run, BudgetExhaustionIsNotAnError) {
  const auto m = sudoku_model("1...\n..2.\n.3..\n...4\n");
  auto state = init(m.graph, m.factors);
  InferenceOptions opts;
  opts.max_messages = 1;
  const auto post = state.run(opts);
  EXPECT_FALSE(post.converged);
  EXPECT_EQ(post.stats.messages, 1u);
  EXPECT_FALSE(check_calibration(state, 1e-9).calibrated);
  EXPECT_EQ(post.decoded.size(), 16u - m.problem.givens.size());
}

TEST(Run, StatsNeverDecrease) {
  const auto m = sudoku_model("1...\n..2.\n.3..\n...4\n");
  for (Schedule schedule : {Schedule::residual, Schedule::round_robin}) {
    auto state = init(m.graph, m.factors);
    InferenceOptions opts;
    opts.schedule = schedule;
    opts.max_messages = 3;
    InferenceStats last;
    for (int step = 0; step < 100; ++step) {
      const auto post = state.run(opts);
      EXPECT_GE(post.stats.messages, last.messages);
      EXPECT_GE(post.stats.sweeps, last.sweeps);
      EXPECT_GE(post.stats.wall_ms, last.wall_ms);
      last = post.stats;
      if (post.converged) break;
    }
  }
}

TEST(Run, SchedulesAgreeOnSevenRegions) {
  const auto g = seven_region_graph();
  auto factors = permutation_factors(g, 4);
  // pin A,C,D,F and B,E,F so the colouring is unique (G must take 3)
  factors[0] = SparseTable::from_entries({A, C, D, F}, {4, 4, 4, 4}, {{Assignment{0, 1, 2, 3}, 1.0}});
  factors[1] = SparseTable::from_entries({B, E, F}, {4, 4, 4}, {{Assignment{1, 0, 3}, 1.0}});
  VarAssignment decoded[2];
  for (int i = 0; i < 2; ++i) {
    auto state = init(g, factors);
    InferenceOptions opts;
    opts.schedule = i ? Schedule::round_robin : Schedule::residual;
    const auto post = state.run(opts);
    ASSERT_TRUE(post.converged);
    decoded[i] = post.decoded;
  }
  EXPECT_EQ(decoded[0], decoded[1]);
  ColoringProblem p;
  for (const char* n : {"A", "B", "C", "D", "E", "F", "G"}) p.names.add(n);
  p.k = 4;
  for (auto [x, y] : std::vector<std::pair<VarId, VarId>>{
           {A, C}, {A, D}, {A, F}, {C, D}, {C, F}, {D, F}, {B, E}, {B, F}, {E, F}, {D, E}, {B, G}, {E, G}, {D, G}})
    p.add_edge(x, y);
  EXPECT_TRUE(verify_coloring(p, decoded[0]).valid());
}
