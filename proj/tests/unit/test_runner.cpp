#include "doctest.h"

#include "malab/errors.hpp"
#include "malab/runner.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace malab;
namespace fs = std::filesystem;

namespace {

ExperimentConfig config_for(const std::string& experiment, double spacing = 1.0 / 16)
{
  ExperimentConfig c;
  c.experiment = experiment;
  c.domain.kind = DomainKind::disc;
  c.spacing = spacing;
  return c;
}

fs::path scratch(const std::string& name)
{
  const auto dir = fs::temp_directory_path() / ("malab_runner_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

} // namespace

TEST_CASE("a run writes the report, the sweep table and plot data")
{
  const auto dir = scratch("files");
  std::ostringstream log;
  const auto r = run(config_for("cofactor_stability"), dir, log);
  CHECK(r.exit_code == exit_pass);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "cofactor_stability_sweep.csv"));
  const auto j = read_json(dir / "report.json");
  CHECK(j["experiment"] == "cofactor_stability");
  CHECK(j["passed"] == true);
  CHECK(j["config"]["spacing"] == 0.0625);

  const auto dat = slurp(dir / "cofactor_stability_norm.dat");
  std::istringstream in(dat);
  std::string header;
  std::getline(in, header);
  CHECK(header == "# eps norm");
  double e = 0, v = 0;
  int rows = 0;
  while (in >> e >> v) ++rows;
  CHECK(rows == 4);
  CHECK(log.str().find("cofactor_stability: PASS") != std::string::npos);
}

TEST_CASE("reruns produce byte-identical CSV files")
{
  for (const char* name : {"w2p_ratio", "cover", "goodsets"}) {
    const auto a = scratch(std::string("rerun_a_") + name), b = scratch(std::string("rerun_b_") + name);
    std::ostringstream log;
    const auto ra = run(config_for(name, 1.0 / 32), a, log);
    const auto rb = run(config_for(name, 1.0 / 32), b, log);
    REQUIRE(ra.exit_code == rb.exit_code);
    int compared = 0;
    for (const auto& f : ra.files) {
      if (f.extension() != ".csv" && f.extension() != ".dat") continue;
      REQUIRE(fs::exists(b / f.filename()));
      CHECK(slurp(f) == slurp(b / f.filename()));
      ++compared;
    }
    CHECK(compared >= 2);
  }
}

TEST_CASE("a planted failure exits 1 and lists the inequality")
{
  auto c = config_for("w2p_ratio");
  c.checks.sup_factor = 0.5;
  const auto dir = scratch("planted");
  std::ostringstream log;
  const auto r = run(c, dir, log);
  CHECK(r.exit_code == exit_assertion);
  REQUIRE(r.reports.size() == 1);
  REQUIRE_FALSE(r.reports[0].failures().empty());
  const auto j = read_json(dir / "report.json");
  CHECK(j["passed"] == false);
  bool listed = false;
  for (const auto& q : j["inequalities"])
    if (q["passed"] == false && q["name"].get<std::string>().find("sup") != std::string::npos) listed = true;
  CHECK(listed);
  CHECK(log.str().find("failed:") != std::string::npos);
}

TEST_CASE("rejected settings exit 2, unwritable output exits 3")
{
  auto c = config_for("cofactor_stability");
  c.eps = {0.7, 0.1};
  std::ostringstream log;
  const auto bad = run(c, scratch("bad_eps"), log);
  CHECK(bad.exit_code == exit_config);
  CHECK(bad.error.find("0.7") != std::string::npos);

  const auto blocker = scratch("blocker");
  std::ofstream(blocker) << "a file, not a directory";
  const auto io = run(config_for("barrier"), blocker / "sub", log);
  CHECK(io.exit_code == exit_solver);
  CHECK(io.error.find(blocker.string()) != std::string::npos);
  fs::remove(blocker);

  auto solver = config_for("solve_ma");
  solver.max_iter = 1;
  solver.tol_ma = 1e-14;
  CHECK(run(solver, scratch("solver"), log).exit_code == exit_solver);
}

TEST_CASE("suite aggregates a summary")
{
  auto c = config_for("suite");
  c.suite = {"solve_ma", "barrier", "sections"};
  const auto dir = scratch("suite");
  std::ostringstream log;
  const auto r = run(c, dir, log);
  CHECK(r.exit_code == exit_pass);
  CHECK(r.reports.size() == 3);
  const auto s = read_json(dir / "summary.json");
  CHECK(s["passed"] == true);
  REQUIRE(s["experiments"].size() == 3);
  CHECK(s["experiments"][1]["experiment"] == "barrier");
  CHECK(s["experiments"][1]["failed"].empty());
  CHECK(fs::exists(dir / "sections" / "section.csv"));

  c.suite = {"barrier", "w2p_ratio"};
  c.checks.sup_factor = 0.5;
  const auto fail_dir = scratch("suite_fail");
  const auto failing = run(c, fail_dir, log);
  CHECK(failing.exit_code == exit_assertion);
  const auto f = read_json(fail_dir / "summary.json");
  CHECK(f["experiments"][0]["passed"] == true);
  CHECK(f["experiments"][1]["passed"] == false);
  CHECK_FALSE(f["experiments"][1]["failed"].empty());
}

TEST_CASE("output directory precedence")
{
  auto c = config_for("barrier");
  c.out = "from_config";
  ::unsetenv("MA_LAB_OUT");
  CHECK(resolve_output_dir(std::nullopt, c) == "from_config");
  ::setenv("MA_LAB_OUT", "from_env", 1);
  CHECK(resolve_output_dir(std::nullopt, c) == "from_env");
  CHECK(resolve_output_dir(std::string("from_flag"), c) == "from_flag");
  ::unsetenv("MA_LAB_OUT");
}

TEST_CASE("every experiment name runs")
{
  for (const auto& name : experiment_names()) {
    if (name == "suite") {
      CHECK_THROWS_AS(run_experiment(config_for(name)), InvalidArgument);
      continue;
    }
    const auto o = run_experiment(config_for(name, 1.0 / 32));
    CHECK(o.report.id == name);
    CHECK_FALSE(o.report.inequalities.empty());
  }
}
