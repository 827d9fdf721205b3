#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cgcolor/cli.hpp"
#include "cgcolor/coloring.hpp"

using namespace cgcolor;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& rel) { return std::string(CGCOLOR_DATA_DIR) + "/" + rel; }

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class Scratch : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("cgcolor_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string file(const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }

  fs::path dir;
};

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// Drops the trailing build_ms,infer_ms columns.
std::string strip_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    for (int i = 0; i < 2; ++i) line.erase(line.rfind(','));
    out += line + "\n";
  }
  return out;
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, exit_usage);
  EXPECT_EQ(cli({"frobnicate"}).code, exit_usage);
  EXPECT_EQ(cli({"solve"}).code, exit_usage);
  EXPECT_EQ(cli({"solve", data("puzzles/sample4.txt"), "--topology", "tree"}).code, exit_usage);
  EXPECT_EQ(cli({"solve", data("puzzles/sample4.txt"), "--threshold", "0"}).code, exit_usage);
  EXPECT_EQ(cli({"--help"}).code, exit_ok);
}

TEST(Cli, SolveFourByFour) {
  for (const char* topology : {"ltrip", "bethe"}) {
    const auto r = cli({"solve", data("puzzles/sample4.txt"), "--topology", topology, "--cluster-size", "4"});
    EXPECT_EQ(r.code, exit_ok) << r.out << r.err;
    EXPECT_EQ(r.out.substr(0, 20), "1243\n3421\n4312\n2134\n");
    EXPECT_NE(r.out.find("status: solved"), std::string::npos);
    EXPECT_NE(r.out.find("clusters: 12"), std::string::npos);
  }
}

TEST_F(Scratch, SolveExitCodes) {
  EXPECT_EQ(cli({"solve", file("bad.txt", "12345\n")}).code, exit_usage);
  EXPECT_EQ(cli({"solve", file("x.txt", "1..x............")}).code, exit_usage);
  EXPECT_EQ(cli({"solve", (dir / "missing.txt").string()}).code, exit_io);
  EXPECT_EQ(cli({"solve", file("clash.txt", "12.4..........3.")}).code, exit_unsatisfiable);
  EXPECT_EQ(cli({"solve", data("puzzles/sample4.txt"), "--max-messages", "1"}).code, exit_unconverged);
  EXPECT_EQ(cli({"solve", file("blank.txt", std::string(16, '.'))}).code, exit_invalid);
  EXPECT_EQ(cli({"solve", data("puzzles/sample4.txt"), "--cluster-size", "1"}).code, exit_usage);
}

TEST(Cli, SolveNineByNine) {
  const auto r = cli({"solve", data("puzzles/easy9/easy01.txt"), "--cluster-size", "9", "--semiring", "max",
                      "--schedule", "round-robin", "--seed", "3"});
  EXPECT_EQ(r.code, exit_ok) << r.out;
  const std::string grid = r.out.substr(0, 90);
  EXPECT_EQ(count_lines(grid), 9u);
  EXPECT_EQ(grid.find('.'), std::string::npos);
}

TEST_F(Scratch, ColorMap) {
  auto r = cli({"color-map", data("maps/seven_regions.adj")});
  EXPECT_EQ(r.code, exit_ok) << r.err;
  EXPECT_EQ(count_lines(r.out), 7u);
  const auto p = parse_adjacency(slurp(data("maps/seven_regions.adj")), 4);
  VarAssignment a;
  std::istringstream in(r.out);
  std::string name;
  Label label;
  while (in >> name >> label) a[p.names.id(name)] = label;
  EXPECT_TRUE(verify_coloring(p, a).valid());

  r = cli({"color-map", file("one.adj", "solo\n")});
  EXPECT_EQ(r.code, exit_ok);
  EXPECT_EQ(r.out, "solo 0\n");

  EXPECT_EQ(cli({"color-map", file("k4b.adj", "a b\na c\na d\nb c\nb d\nc d\n"), "--k", "3"}).code,
            exit_unsatisfiable);
}

TEST_F(Scratch, GeneratedMapRoundTrip) {
  const auto map = (dir / "map.adj").string();
  ASSERT_EQ(cli({"gen-map", "--width", "25", "--height", "10", "--seed", "7", "--out", map}).code, exit_ok);
  const auto p = parse_adjacency(slurp(map), 4);
  EXPECT_EQ(p.names.size(), 250u);

  const auto colours = (dir / "colours.txt").string();
  const auto r = cli({"color-map", map, "--bias", "0.01", "--seed", "1", "--out", colours});
  ASSERT_EQ(r.code, exit_ok) << r.err;
  VarAssignment a;
  std::istringstream in(slurp(colours));
  std::string name;
  Label label;
  while (in >> name >> label) a[p.names.id(name)] = label;
  EXPECT_EQ(a.size(), 250u);
  EXPECT_TRUE(verify_coloring(p, a).valid());
}

TEST_F(Scratch, Bench) {
  fs::create_directories(dir / "two");
  fs::copy_file(data("puzzles/easy9/easy01.txt"), dir / "two" / "a.txt");
  fs::copy_file(data("puzzles/easy9/easy02.txt"), dir / "two" / "b.txt");
  const auto csv = (dir / "out.csv").string();
  auto r = cli({"bench", (dir / "two").string(), "--sizes", "9", "--topologies", "both", "--out", csv});
  EXPECT_EQ(r.code, exit_ok) << r.err;
  const auto text = slurp(csv);
  EXPECT_EQ(count_lines(text), 5u);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "instance,topology,cluster_size,cluster_count,converged,valid,messages,build_ms,infer_ms");
  EXPECT_NE(r.out.find("bethe-only successes: 0"), std::string::npos);

  fs::create_directories(dir / "empty");
  r = cli({"bench", (dir / "empty").string()});
  EXPECT_EQ(r.code, exit_ok);
  EXPECT_EQ(count_lines(r.out), 1u);

  EXPECT_EQ(cli({"bench", (dir / "nowhere").string()}).code, exit_io);
  EXPECT_EQ(cli({"bench", (dir / "two").string(), "--sizes", "1"}).code, exit_usage);
  EXPECT_EQ(cli({"bench", (dir / "two").string(), "--topologies", "tree"}).code, exit_usage);
}

TEST_F(Scratch, BenchIsDeterministic) {
  const auto a = cli({"bench", data("puzzles/easy9"), "--sizes", "5,9", "--jobs", "1"});
  const auto b = cli({"bench", data("puzzles/easy9"), "--sizes", "5,9", "--jobs", "3"});
  ASSERT_EQ(a.code, exit_ok);
  EXPECT_EQ(count_lines(a.out), 1u + 10 * 2 * 2);
  EXPECT_EQ(strip_timing(a.out), strip_timing(b.out));
}

TEST_F(Scratch, Graph) {
  const auto blank9 = file("blank9.txt", std::string(81, '.'));
  auto r = cli({"graph", blank9, "--cluster-size", "9", "--validate"});
  EXPECT_EQ(r.code, exit_ok);
  EXPECT_NE(r.out.find("clusters: 27\n"), std::string::npos);
  EXPECT_NE(r.out.find("valid\n"), std::string::npos);

  r = cli({"graph", data("maps/seven_regions.adj"), "--topology", "bethe", "--validate"});
  EXPECT_EQ(r.code, exit_ok);
  EXPECT_NE(r.out.find("hubs: 7\n"), std::string::npos);
  EXPECT_NE(r.out.find("\nvalid\n"), std::string::npos);

  const auto dot = (dir / "g.dot").string();
  r = cli({"graph", file("blank4.txt", std::string(16, '.')), "--dot", dot});
  EXPECT_EQ(r.code, exit_ok);
  const auto text = slurp(dot);
  EXPECT_EQ(text.rfind("graph cluster_graph {", 0), 0u);
  std::size_t nodes = 0;
  for (std::size_t pos = 0; (pos = text.find("[label=\"", pos)) != std::string::npos; ++pos) ++nodes;
  EXPECT_EQ(nodes, 12u);

  EXPECT_EQ(cli({"graph", blank9, "--dot", (dir / "no" / "such" / "dir.dot").string()}).code, exit_io);
  EXPECT_EQ(cli({"graph", file("bad.adj", "a b c\n")}).code, exit_usage);
}
