#include "cgcolor/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cgcolor/pipeline.hpp"

namespace cgcolor {

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out.flush()) throw IoError("failed writing '" + path + "'");
}

// Flags shared by every command that runs inference.
struct InferenceFlags {
  std::string semiring = "max";
  std::string schedule = "residual";
  double threshold = 1e-8;
  std::size_t max_messages = 1'000'000;

  void attach(CLI::App* cmd) {
    cmd->add_option("--semiring", semiring, "max or sum")->check(CLI::IsMember({"max", "sum"}))->capture_default_str();
    cmd->add_option("--schedule", schedule, "residual or round-robin")
        ->check(CLI::IsMember({"residual", "round-robin"}))
        ->capture_default_str();
    cmd->add_option("--threshold", threshold, "convergence threshold on message KL")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--max-messages", max_messages, "message budget")->check(CLI::PositiveNumber)->capture_default_str();
  }

  InferenceOptions options() const {
    InferenceOptions o;
    o.semiring = semiring == "sum" ? Semiring::sum : Semiring::max;
    o.schedule = schedule == "round-robin" ? Schedule::round_robin : Schedule::residual;
    o.threshold = threshold;
    o.max_messages = max_messages;
    return o;
  }
};

int exit_code(Outcome o) {
  switch (o) {
    case Outcome::solved: return exit_ok;
    case Outcome::invalid_solution: return exit_invalid;
    case Outcome::unconverged: return exit_unconverged;
    case Outcome::contradiction: return exit_unsatisfiable;
  }
  return exit_invalid;
}

void print_stats(std::ostream& out, const SolveResult& r, Topology t) {
  out << "status: " << to_string(r.outcome) << "\n";
  if (!r.message.empty() && r.outcome != Outcome::solved) out << "detail: " << r.message << "\n";
  out << "topology: " << to_string(t) << "\n";
  out << "clusters: " << r.cluster_count << "\n";
  out << "sepsets: " << r.graph.sepsets.size() << "\n";
  out << "converged: " << (r.converged ? "yes" : "no") << "\n";
  out << "messages: " << r.stats.messages << "\n";
  out << "sweeps: " << r.stats.sweeps << "\n";
  out << fmt::format("build_ms: {:.3f}\ninfer_ms: {:.3f}\n", r.build_ms, r.infer_ms);
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> sizes;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    unsigned long value = 0;
    try {
      value = std::stoul(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || value < 2) {
      throw std::invalid_argument("invalid cluster size '" + item + "'; sizes must be integers >= 2");
    }
    sizes.push_back(value);
  }
  if (sizes.empty()) throw std::invalid_argument("no cluster sizes given");
  return sizes;
}

std::vector<Topology> parse_topologies(const std::string& text) {
  if (text == "both") return {Topology::ltrip, Topology::bethe};
  std::vector<Topology> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_topology(item));
  if (out.empty()) throw std::invalid_argument("no topologies given");
  return out;
}

ColoringProblem load_problem(const std::string& path, const std::string& format, Label k) {
  const std::string text = read_file(path);
  std::string kind = format;
  if (kind == "auto") {
    kind = "adjacency";
    if (!path.ends_with(".adj")) {
      try {
        sudoku_order(text);
        kind = "sudoku";
      } catch (const std::invalid_argument&) {
      }
    }
  }
  if (kind == "sudoku") return sudoku_problem(text, sudoku_order(text));
  return parse_adjacency(text, k);
}

}  // namespace

void setup_logging() {
  if (!spdlog::get("cgcolor")) {
    auto logger = spdlog::stderr_color_mt("cgcolor");
    spdlog::set_default_logger(logger);
  }
  const char* env = std::getenv("CGCOLOR_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  setup_logging();
  CLI::App app{"Graph-colouring inference on LTRIP cluster graphs and Bethe factor graphs", "cgcolor"};
  app.require_subcommand(1);

  // solve
  std::string puzzle;
  std::string topology = "ltrip";
  std::size_t cluster_size = 0;
  std::uint64_t seed = 0;
  std::optional<double> bias;
  InferenceFlags solve_flags;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a 4x4 or 9x9 Sudoku puzzle");
  solve_cmd->add_option("puzzle", puzzle, "puzzle file")->required();
  solve_cmd->add_option("--topology", topology, "ltrip or bethe")
      ->check(CLI::IsMember({"ltrip", "bethe"}))
      ->capture_default_str();
  solve_cmd->add_option("--cluster-size", cluster_size, "split cliques into clusters of this size (0 keeps them)")
      ->capture_default_str();
  solve_cmd->add_option("--seed", seed, "seed for the label bias")->capture_default_str();
  solve_cmd->add_option("--bias", bias, "bias magnitude; off unless given")->check(CLI::NonNegativeNumber);
  solve_flags.attach(solve_cmd);

  // color-map
  std::string adjacency;
  Label k = 4;
  bool no_anchor = false;
  double map_bias = 0.01;
  std::string map_out;
  InferenceFlags map_flags;
  auto* map_cmd = app.add_subcommand("color-map", "Colour the regions of an adjacency file");
  map_cmd->add_option("adjacency", adjacency, "adjacency file")->required();
  map_cmd->add_option("--k", k, "number of colours")->check(CLI::PositiveNumber)->capture_default_str();
  map_cmd->add_flag("--no-anchor", no_anchor, "do not fix the colours of the largest clique");
  map_cmd->add_option("--bias", map_bias, "bias magnitude (0 disables)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  map_cmd->add_option("--seed", seed, "seed for the label bias")->capture_default_str();
  map_cmd->add_option("--topology", topology, "ltrip or bethe")
      ->check(CLI::IsMember({"ltrip", "bethe"}))
      ->capture_default_str();
  map_cmd->add_option("--out", map_out, "write 'name label' lines here instead of stdout");
  map_flags.attach(map_cmd);

  // bench
  std::string bench_dir;
  std::string sizes_text = "3,5,7,9";
  std::string topologies_text = "both";
  std::string csv_out;
  unsigned jobs = 1;
  InferenceFlags bench_flags;
  auto* bench_cmd = app.add_subcommand("bench", "Compare topologies over a directory of puzzles");
  bench_cmd->add_option("dir", bench_dir, "directory of puzzle files")->required();
  bench_cmd->add_option("--sizes", sizes_text, "comma-separated cluster sizes")->capture_default_str();
  bench_cmd->add_option("--topologies", topologies_text, "ltrip, bethe, a comma list, or both")->capture_default_str();
  bench_cmd->add_option("--out", csv_out, "CSV file (stdout if omitted)");
  bench_cmd->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber)->capture_default_str();
  bench_flags.attach(bench_cmd);

  // graph
  std::string graph_input;
  std::string format = "auto";
  bool validate = false;
  std::string dot_out;
  auto* graph_cmd = app.add_subcommand("graph", "Build a cluster graph and report, validate or export it");
  graph_cmd->add_option("input", graph_input, "puzzle or adjacency file")->required();
  graph_cmd->add_option("--format", format, "auto, sudoku or adjacency")
      ->check(CLI::IsMember({"auto", "sudoku", "adjacency"}))
      ->capture_default_str();
  graph_cmd->add_option("--k", k, "number of colours for adjacency input")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  graph_cmd->add_option("--topology", topology, "ltrip or bethe")
      ->check(CLI::IsMember({"ltrip", "bethe"}))
      ->capture_default_str();
  graph_cmd->add_option("--cluster-size", cluster_size, "split cliques into clusters of this size (0 keeps them)")
      ->capture_default_str();
  graph_cmd->add_flag("--validate", validate, "check the running intersection property");
  graph_cmd->add_option("--dot", dot_out, "write Graphviz output to this file");

  // gen-map
  std::size_t width = 25, height = 10;
  double diagonal = 0.5;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen-map", "Generate a planar grid adjacency file");
  gen_cmd->add_option("--width", width, "regions per row")->check(CLI::PositiveNumber)->capture_default_str();
  gen_cmd->add_option("--height", height, "rows")->check(CLI::PositiveNumber)->capture_default_str();
  gen_cmd->add_option("--diagonal", diagonal, "chance of a diagonal border per 2x2 block")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  gen_cmd->add_option("--seed", seed, "generator seed")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "output file (stdout if omitted)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (solve_cmd->parsed()) {
      const std::string text = read_file(puzzle);
      const ColoringProblem p = sudoku_problem(text, sudoku_order(text));
      PipelineOptions opts;
      opts.topology = parse_topology(topology);
      opts.cluster_size = cluster_size;
      opts.inference = solve_flags.options();
      opts.bias = bias;
      opts.seed = seed;
      const SolveResult r = solve(p, opts);
      out << format_sudoku(p, r.assignment);
      print_stats(out, r, opts.topology);
      return exit_code(r.outcome);
    }

    if (map_cmd->parsed()) {
      const ColoringProblem p = parse_adjacency(read_file(adjacency), k);
      PipelineOptions opts;
      opts.topology = parse_topology(topology);
      opts.inference = map_flags.options();
      opts.anchor = !no_anchor;
      if (map_bias > 0.0) opts.bias = map_bias;
      opts.seed = seed;
      const SolveResult r = solve(p, opts);
      if (r.outcome != Outcome::solved) {
        err << "color-map: " << to_string(r.outcome) << (r.message.empty() ? "" : ": " + r.message) << "\n";
        return exit_code(r.outcome);
      }
      std::string lines;
      for (VarId v : p.variables()) lines += p.names.name(v) + " " + std::to_string(r.assignment.at(v)) + "\n";
      if (map_out.empty()) out << lines;
      else write_file(map_out, lines);
      spdlog::info("color-map: {} regions, {} messages, {:.3f} ms", p.names.size(), r.stats.messages, r.infer_ms);
      return exit_ok;
    }

    if (bench_cmd->parsed()) {
      BenchConfig config;
      config.sizes = parse_sizes(sizes_text);
      config.topologies = parse_topologies(topologies_text);
      config.inference = bench_flags.options();
      config.jobs = jobs;
      std::vector<std::filesystem::path> instances;
      try {
        instances = bench_instances(bench_dir);
      } catch (const std::runtime_error& e) {
        throw IoError(e.what());
      }
      const auto rows = run_bench(instances, config);
      std::string csv = std::string(bench_csv_header()) + "\n";
      for (const auto& r : rows) csv += to_csv_row(r) + "\n";
      std::ostream& report = csv_out.empty() ? err : out;
      if (csv_out.empty()) out << csv;
      else write_file(csv_out, csv);

      const auto s = summarize(rows);
      report << "instances: " << s.instances << "\n";
      report << "ltrip valid: " << s.ltrip_valid << "/" << s.ltrip_runs << "\n";
      report << "bethe valid: " << s.bethe_valid << "/" << s.bethe_runs << "\n";
      report << "bethe-only successes: " << s.bethe_only_successes << "\n";
      if (s.bethe_only_successes > 0) {
        spdlog::warn("the factor graph solved {} runs that the cluster graph failed", s.bethe_only_successes);
      }
      return exit_ok;
    }

    if (graph_cmd->parsed()) {
      const ColoringProblem p = load_problem(graph_input, format, k);
      PipelineOptions opts;
      opts.topology = parse_topology(topology);
      opts.cluster_size = cluster_size;
      const Model m = build_model(p, opts);
      out << "kind: " << to_string(m.graph.kind) << "\n";
      out << "clusters: " << m.factor_clusters << "\n";
      if (opts.topology == Topology::bethe) out << "hubs: " << m.graph.clusters.size() - m.factor_clusters << "\n";
      out << "sepsets: " << m.graph.sepsets.size() << "\n";
      int code = exit_ok;
      if (validate) {
        const auto report = validate_rip(m.graph);
        if (report.valid()) {
          out << "valid\n";
        } else {
          out << "invalid: " << report.violations.size() << " violations\n";
          for (const auto& v : report.violations) out << "  " << to_string(v.kind) << ": " << v.message << "\n";
          code = exit_invalid;
        }
      }
      if (!dot_out.empty()) write_file(dot_out, export_dot(m.graph, p.names));
      return code;
    }

    if (gen_cmd->parsed()) {
      const auto text = format_adjacency(planar_grid_map(width, height, diagonal, seed));
      if (gen_out.empty()) out << text;
      else write_file(gen_out, text);
      return exit_ok;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return exit_io;
  } catch (const Contradiction& e) {
    err << "unsatisfiable: " << e.what() << "\n";
    return exit_unsatisfiable;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return exit_usage;
  }
  return exit_usage;
}

}  // namespace cgcolor
