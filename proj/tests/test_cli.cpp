#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "test_util.hpp"

using episim::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const fs::path& work) {
  const auto log = work / "stdout.txt";
  const std::string cmd = std::string(EPISIM_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream f(log);
  std::stringstream ss;
  ss << f.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const std::string kExample = std::string(EPISIM_DATA_DIR) + "/example_weekly.csv";

// One small corpus shared by the library-based tests.
const fs::path& corpus() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / "episim_cli_corpus";
    fs::remove_all(d);
    fs::create_directories(d);
    const auto r = run("--seed 4 generate --size 40 --days 800 --workers 2 --out " + (d / "c").string(), d);
    EXPECT_EQ(r.code, 0) << r.out;
    return d / "c";
  }();
  return dir;
}

}  // namespace

TEST(Cli, GenerateWritesManifestAndReportsSeed) {
  const auto r = run("inspect --library " + corpus().string() + " --scenario 0", corpus());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(corpus() / "manifest.txt"));
  EXPECT_NE(r.out.find("mode: "), std::string::npos);
  EXPECT_NE(r.out.find("population: "), std::string::npos);
  EXPECT_NE(r.out.find("observed_cases"), std::string::npos);
}

TEST(Cli, InspectUnknownScenarioFails) {
  const auto r = run("inspect --library " + corpus().string() + " --scenario 4000", corpus());
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("not in corpus"), std::string::npos);
}

TEST(Cli, MissingLibraryIsIoFailure) {
  TempDir dir("cli");
  const auto r = run("inspect --library " + (dir.path() / "nope").string() + " --scenario 0", dir.path());
  EXPECT_EQ(r.code, 4) << r.out;
}

TEST(Cli, BadArgumentsAreInvalidInput) {
  TempDir dir("cli");
  EXPECT_EQ(run("generate --size notanumber", dir.path()).code, 2);
  EXPECT_EQ(run("generate --mode-mix 1,2 --out " + (dir.path() / "x").string(), dir.path()).code, 2);
  EXPECT_EQ(run("evaluate --input " + kExample + " --forecaster magic", dir.path()).code, 2);
  EXPECT_EQ(run("", dir.path()).code, 2);
}

TEST(Cli, EvaluatePersistenceOnExampleCsv) {
  TempDir dir("cli");
  const auto out = dir.path() / "ev";
  const auto r = run("evaluate --input " + kExample + " --horizons 4,8 --out " + out.string(), dir.path());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto csv = slurp(out / "report.csv");
  EXPECT_EQ(csv.rfind("series_id,window_start,horizon", 0), 0u);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    const auto h = line.substr(line.find(',', line.find(',') + 1) + 1);
    EXPECT_TRUE(h.rfind("4,", 0) == 0 || h.rfind("8,", 0) == 0) << line;
  }
  EXPECT_GT(rows, 0u);
  const auto summary = slurp(out / "summary.txt");
  EXPECT_NE(summary.find("h=4"), std::string::npos);
  EXPECT_NE(summary.find("h=8"), std::string::npos);
  EXPECT_EQ(summary.find("h=2"), std::string::npos);
}

TEST(Cli, EvaluateExcludesShortSeries) {
  TempDir dir("cli");
  std::ofstream g(dir.path() / "short.csv");
  g << "date,cases\n";
  for (int w = 0; w < 52; ++w) {
    const std::chrono::sys_days d = std::chrono::sys_days{std::chrono::year{2022} / 1 / 3} + std::chrono::days{7 * w};
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    g << buf << ',' << 10 + w % 4 << '\n';
  }
  g.close();
  const auto out = dir.path() / "ev";
  const auto r = run("evaluate --forecaster ets --input " + (dir.path() / "short.csv").string() + " --out " +
                         out.string(),
                     dir.path());
  EXPECT_EQ(r.code, 3) << r.out;
  EXPECT_NE(slurp(out / "summary.txt").find("excluded"), std::string::npos);
}

TEST(Cli, MalformedCsvIsInvalidInput) {
  TempDir dir("cli");
  std::ofstream(dir.path() / "bad.csv") << "date,cases\n2022-01-03,1\n2022-02-30,2\n";
  const auto r = run("evaluate --input " + (dir.path() / "bad.csv").string() + " --out " +
                         (dir.path() / "ev").string(),
                     dir.path());
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("line 3"), std::string::npos) << r.out;
}

TEST(Cli, EvaluateCorpusScenarioWithEts) {
  TempDir dir("cli");
  const auto out = dir.path() / "ev";
  const auto r = run("evaluate --forecaster ets --season-length 4 --library " + corpus().string() +
                         " --scenario 1 --horizons 2 --min-context 80 --out " + out.string(),
                     dir.path());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(slurp(out / "summary.txt").find("forecaster: ets"), std::string::npos);
}

TEST(Cli, AttributeSelfMatchAndClamp) {
  TempDir dir("cli");
  const auto out = dir.path() / "at";
  const auto r = run("attribute --library " + corpus().string() + " --scenario 3 --k 500 --prior-size 200 --out " +
                         out.string(),
                     dir.path());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("clamped"), std::string::npos);
  EXPECT_NE(r.out.find("k: 40"), std::string::npos);
  EXPECT_NE(r.out.find("nearest: 3 (0)"), std::string::npos) << r.out;
  const auto csv = slurp(out / "attribution.csv");
  EXPECT_EQ(csv.rfind("parameter,retrieved_median", 0), 0u);
}

TEST(Cli, AttributeCsvNeedsPopulation) {
  TempDir dir("cli");
  EXPECT_EQ(run("attribute --library " + corpus().string() + " --input " + kExample, dir.path()).code, 2);
  const auto r = run("attribute --library " + corpus().string() + " --input " + kExample +
                         " --population 500000 --k 5 --params gamma,mode_h2h --prior-size 100 --out " +
                         (dir.path() / "at").string(),
                     dir.path());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(run("attribute --library " + corpus().string() + " --input " + kExample +
                    " --population 500000 --params nosuch",
                dir.path())
                .code,
            2);
}

TEST(Cli, ConfigFileSuppliesOptions) {
  TempDir dir("cli");
  const auto cfg = dir.path() / "run.ini";
  std::ofstream(cfg) << "seed = 9\n[generate]\nsize = 3\ndays = 120\nout = " << (dir.path() / "c").string() << '\n';
  const auto r = run("--config " + cfg.string() + " generate", dir.path());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("seed: 9"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir.path() / "c" / "scenario_000002.bin"));
}
