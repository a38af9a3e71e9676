#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "partcolor/graph.hpp"
#include "partcolor/spencer.hpp"

using namespace partcolor;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Workdir {
  fs::path dir;
  Workdir() {
    dir = fs::temp_directory_path() / ("partcolor_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Workdir() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

struct Run {
  int code = -1;
  std::string err;
};

Run run(const Workdir& wd, const std::string& args) {
  const std::string err = wd.path("stderr.txt");
  const std::string cmd = std::string(PARTCOLOR_CLI) + " " + args + " > " + wd.path("stdout.txt") + " 2> " + err;
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  return r;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  return json::parse(in);
}

void write_graph(const std::string& path, const WeightedGraph& g) {
  std::ofstream out(path);
  write_edge_list(out, g);
}

}  // namespace

TEST_CASE("cli sparsify and certify round trip") {
  Workdir wd;
  write_graph(wd.path("grid.txt"), gen::grid(10, 10));
  const Run r = run(wd, "sparsify " + wd.path("grid.txt") + " --eps 0.25 --seed 3 --out " + wd.path("w.txt") +
                            " --summary " + wd.path("s.json"));
  CHECK(r.code == 0);
  const json s = read_json(wd.path("s.json"));
  CHECK(s["certified"] == true);
  CHECK(s["exit_code"] == 0);
  CHECK(s["result"]["n"] == 100);
  CHECK(s["result"]["m"] == 180);
  CHECK(s["result"]["seed"] == 3);
  CHECK(s["config"]["eps"] == 0.25);

  const Run c = run(wd, "certify " + wd.path("grid.txt") + " --eps 0.25 --weights " + wd.path("w.txt") +
                            " --summary " + wd.path("c.json"));
  CHECK(c.code == 0);
  const json cj = read_json(wd.path("c.json"));
  CHECK(cj["result"]["lambda_min"].get<double>() == doctest::Approx(s["result"]["lambda_min"].get<double>()));
  CHECK(cj["result"]["lambda_max"].get<double>() == doctest::Approx(s["result"]["lambda_max"].get<double>()));
}

TEST_CASE("cli certify of the input weights is exactly one") {
  Workdir wd;
  write_graph(wd.path("g.txt"), gen::cycle(7));
  const Run r = run(wd, "certify " + wd.path("g.txt") + " --eps 0.1 --summary " + wd.path("s.json"));
  CHECK(r.code == 0);
  const json s = read_json(wd.path("s.json"));
  CHECK(s["result"]["lambda_min"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s["result"]["lambda_max"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));

  // Dropping an edge of a cycle leaves a path, which still spans but is not within 10%.
  std::ofstream(wd.path("w.txt")) << "0 1\n1 1\n2 1\n3 1\n4 1\n5 1\n";
  const Run d = run(wd, "certify " + wd.path("g.txt") + " --eps 0.1 --weights " + wd.path("w.txt") +
                            " --summary " + wd.path("d.json"));
  CHECK(d.code == 2);
  CHECK(read_json(wd.path("d.json"))["certified"] == false);
}

TEST_CASE("cli argument and input errors exit with status one") {
  Workdir wd;
  write_graph(wd.path("g.txt"), gen::path(4));
  CHECK(run(wd, "sparsify " + wd.path("g.txt") + " --bogus").code == 1);
  CHECK(run(wd, "").code == 1);
  CHECK(run(wd, "sparsify " + wd.path("missing.txt")).code == 1);
  CHECK(run(wd, "sparsify " + wd.path("g.txt") + " --eps 1.5").code == 1);

  std::ofstream(wd.path("bad.txt")) << "0 1 1\n1 x 1\n";
  const Run bad = run(wd, "sparsify " + wd.path("bad.txt"));
  CHECK(bad.code == 1);
  CHECK(bad.err.find("line 2") != std::string::npos);

  std::ofstream(wd.path("bad_set.txt")) << "2 2 1\n0 0 3\n";
  const Run bad_set = run(wd, "spencer " + wd.path("bad_set.txt"));
  CHECK(bad_set.code == 1);
  CHECK(bad_set.err.find("line 2") != std::string::npos);
}

TEST_CASE("cli summaries are deterministic for a fixed seed") {
  Workdir wd;
  GaussianSource rng(4);
  write_graph(wd.path("g.txt"), gen::erdos_renyi(30, 0.3, rng));
  for (const std::string sub : {"sparsify", "ultrasparsify", "degree-sparsify"}) {
    CAPTURE(sub);
    const std::string base = sub + " " + wd.path("g.txt") + " --seed 9 --summary ";
    CHECK(run(wd, base + wd.path("a.json")).code == 0);
    CHECK(run(wd, base + wd.path("b.json")).code == 0);
    json a = read_json(wd.path("a.json")), b = read_json(wd.path("b.json"));
    a.erase("runtime_ms");
    b.erase("runtime_ms");
    CHECK(a == b);
  }
}

TEST_CASE("cli spencer writes one sign per element") {
  Workdir wd;
  GaussianSource rng(5);
  {
    std::ofstream out(wd.path("s.txt"));
    write_set_system(out, random_set_system(40, 40, 0.5, rng));
  }
  const Run r = run(wd, "spencer " + wd.path("s.txt") + " --seed 2 --out " + wd.path("x.txt") + " --summary " +
                            wd.path("s.json"));
  CHECK((r.code == 0 || r.code == 2));
  std::ifstream in(wd.path("x.txt"));
  int count = 0, sign = 0;
  while (in >> sign) {
    CHECK((sign == 1 || sign == -1));
    ++count;
  }
  CHECK(count == 40);
  const json s = read_json(wd.path("s.json"));
  CHECK(s["result"]["n"] == 40);
  CHECK(s["result"]["disc_inf"].get<double>() <= s["result"]["bound"].get<double>());
  CHECK(s["result"]["ledger_error"].get<double>() <= 1e-9);
}

TEST_CASE("cli degree-sparsify reports degree residuals") {
  Workdir wd;
  write_graph(wd.path("k.txt"), gen::complete_bipartite(4, 4));
  const Run r = run(wd, "degree-sparsify " + wd.path("k.txt") + " --eps 0.5 --routing tree --summary " +
                            wd.path("s.json"));
  CHECK(r.code == 0);
  const json s = read_json(wd.path("s.json"));
  CHECK(s["result"]["routing"] == "tree");
  CHECK(s["result"]["max_degree_residual"].get<double>() <= 1e-8);
}
