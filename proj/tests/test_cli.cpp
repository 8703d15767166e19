#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(CLCRC_BIN) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) r.output += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("clcrc_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("no subcommand or an unknown flag is a usage error") {
  CHECK(run("").code == 1);
  CHECK(run("config --no-such-flag").code == 1);
  CHECK(run("--help").code == 0);
}

TEST_CASE("config writes the resolved overrides") {
  const fs::path out = scratch("config.json");
  const Result r = run("config -o " + out.string() + " --epsilon 0.1 --tau 9");
  REQUIRE(r.code == 0);
  std::ifstream in(out);
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text.find("\"epsilon\": 0.1") != std::string::npos);
  CHECK(text.find("\"tau\": 9") != std::string::npos);
  CHECK(run("config -o " + out.string() + " --epsilon 1.5").code == 1);
}

TEST_CASE("ingest reports malformed rows and data errors") {
  const fs::path csv = scratch("sessions.csv");
  {
    std::ofstream f(csv);
    f << "vehicle_id,arrival_iso8601,departure_iso8601,energy_kwh,max_power_kw\n";
    for (int i = 0; i < 3; ++i) f << "ev" << i << ",2017-03-06T18:00,2017-03-06T21:00,10,7.4\n";
  }
  const Result ok = run("ingest " + csv.string());
  CHECK(ok.code == 0);
  CHECK(ok.output.find("\"sessions\": 3") != std::string::npos);
  {
    std::ofstream f(csv, std::ios::app);
    f << "bad,2017-03-06T18:00,2017-03-06T17:00,10,7.4\n";
  }
  const Result bad = run("ingest " + csv.string());
  CHECK(bad.code == 2);
  CHECK(run("ingest /nonexistent/file.csv").code == 2);
}

TEST_CASE("synth writes both datasets deterministically") {
  const fs::path a = scratch("synth_a"), b = scratch("synth_b");
  REQUIRE(run("synth -o " + a.string() + " --days 3 --fleet-size 40 --seed 5").code == 0);
  REQUIRE(run("synth -o " + b.string() + " --days 3 --fleet-size 40 --seed 5").code == 0);
  for (const char* name : {"sessions.csv", "order_book.csv"}) {
    std::ifstream x(a / name), y(b / name);
    const std::string sx((std::istreambuf_iterator<char>(x)), {}), sy((std::istreambuf_iterator<char>(y)), {});
    CHECK_FALSE(sx.empty());
    CHECK(sx == sy);
  }
}

TEST_CASE("an unknown backend fails at the solve stage with the available choices") {
  const fs::path dir = scratch("badbackend");
  const Result r = run("run --run-dir " + dir.string() +
                       " --days 20 --fleet-size 200 --ev-scenarios 2 --rc-scenarios 2 --market-samples 20 --backend nope");
  CHECK(r.code == 3);
  CHECK(r.output.find("[solve]") != std::string::npos);
  CHECK(r.output.find("available: highs") != std::string::npos);
  CHECK(fs::exists(dir / "config.json"));
  CHECK(fs::exists(dir / "models" / "forecaster.json"));
}
