#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "abrake/errors.hpp"
#include "config.hpp"
#include "output.hpp"

namespace fs = std::filesystem;
using namespace abrake;
using namespace abrake::cli;

namespace {

struct Outcome {
  int code = -1;
  std::string output;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("abrake_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const std::string& body) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << body;
    return p;
  }

  Outcome run(const std::string& args) {
    const fs::path log = dir_ / "log.txt";
    const std::string cmd = std::string(ABRAKE_EXE) + " " + args + " > " + log.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    o.output = slurp(log);
    return o;
  }

  fs::path dir_;
};

// Data rows of a CSV, skipping '#' lines; the first entry is the column header.
std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(fields);
  }
  return rows;
}

std::vector<std::string> header_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line) && !line.empty() && line[0] == '#') out.push_back(line);
  return out;
}

const char* kClosedForm = R"({
  "problem": {"kind": "nqm", "spectrum": "explicit", "eigenvalues": [1.0], "noise_sigma": 0},
  "optimizer": {"algorithm": "SGDM", "eta": 0.5, "momentum": 0},
  "delay": 0, "max_steps": 100, "target_loss": 0.01
})";

const char* kNoisy = R"({
  "problem": {"kind": "nqm", "spectrum": "inverse", "dimension": 20, "noise_sigma": 0.5},
  "optimizer": {"algorithm": "AB", "eta": 0.5, "momentum": 0.9, "rho": 0.5},
  "grouping": "element", "delay": 2, "max_steps": 300, "target_loss": 0.001,
  "trace": {"every": 10, "energy": true}, "seed": 42
})";

}  // namespace

TEST(Config, RoundTripsThroughJson) {
  const auto doc = Json::parse(kNoisy);
  const ExperimentConfig c = config_from_json(doc);
  const ExperimentConfig again = config_from_json(to_json(c));
  EXPECT_EQ(canonical_dump(c), canonical_dump(again));
  EXPECT_EQ(config_hash(c), config_hash(again));
  EXPECT_EQ(config_hash(c).size(), 16u);
  EXPECT_EQ(again.optimizer, c.optimizer);
  EXPECT_EQ(again.trace, c.trace);
}

TEST(Config, ErrorsNameTheField) {
  auto expect_error = [](const std::string& body, const std::string& needle) {
    try {
      config_from_json(Json::parse(body));
      ADD_FAILURE() << "accepted: " << body;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_error(R"({"optimizer": {"momentum": 0.9}})", "eta");
  expect_error(R"({"optimizer": {"eta": 0.1, "momentun": 0.9}})", "optimizer.momentun");
  expect_error(R"({"optimizer": {"eta": -1}})", "eta");
  expect_error(R"({"optimizer": {"eta": 0.1, "algorithm": "adam"}})", "DANA");
  expect_error(R"({"optimizer": {"eta": 0.1}, "grouping": "row"})", "grouping");
  expect_error(R"({"optimizer": {"eta": 0.1}, "delay": "three"})", "delay");
}

TEST(Config, HashChangesWithContent) {
  ExperimentConfig a = config_from_json(Json::parse(kNoisy));
  ExperimentConfig b = a;
  b.optimizer.rho = 0.25;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Output, TraceSchemaAndInfinity) {
  TraceRow row;
  row.step = 1;
  row.lr = 0.1;
  row.loss = 0.5;
  row.alpha = {1.0, 0.5};
  row.grad_norm = {1.0, 2.0};
  row.vel_norm = {0.0, 1.0};
  row.gvr = {std::numeric_limits<double>::infinity(), 2.0};
  std::ostringstream out;
  write_trace_csv(out, {row}, 2, true);
  const std::string s = out.str();
  EXPECT_EQ(s.substr(0, s.find('\n')),
            "step,lr,loss,energy,accuracy,update_alignment,alpha_0,alpha_1,grad_norm_0,"
            "grad_norm_1,vel_norm_0,vel_norm_1,gvr_0,gvr_1");
  EXPECT_NE(s.find(",inf,2"), std::string::npos);
}

TEST_F(CliTest, RunClosedFormConverges) {
  const auto cfg = write_config("c.json", kClosedForm);
  const Outcome o = run("run --config " + cfg.string() + " --out " + (dir_ / "out").string());
  ASSERT_EQ(o.code, 0) << o.output;
  const Json summary = Json::parse(slurp(dir_ / "out" / "summary.json"));
  EXPECT_EQ(summary["status"], "Converged");
  EXPECT_EQ(summary["steps_to_target"], 3);
  const auto rows = read_csv(dir_ / "out" / "trace.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[3][2], "0.0078125");
}

TEST_F(CliTest, MissingEtaIsConfigError) {
  const auto cfg = write_config("c.json", R"({"problem": {"kind": "nqm"}})");
  const Outcome o = run("run --config " + cfg.string() + " --out " + dir_.string());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.output.find("eta"), std::string::npos) << o.output;
}

TEST_F(CliTest, UnreadableConfigIsIoError) {
  const Outcome o = run("run --config " + (dir_ / "missing.json").string());
  EXPECT_EQ(o.code, 3);
}

TEST_F(CliTest, FlagsOverrideConfig) {
  const auto cfg = write_config("c.json", kClosedForm);
  const Outcome o = run("run --config " + cfg.string() + " --eta 0.25 --out " + dir_.string());
  ASSERT_EQ(o.code, 0) << o.output;
  const Json summary = Json::parse(slurp(dir_ / "summary.json"));
  EXPECT_EQ(summary["provenance"]["config"]["optimizer"]["eta"], 0.25);
  // |1 - 0.25|^(2T) * 0.5 <= 0.01
  EXPECT_EQ(summary["steps_to_target"], 7);
}

TEST_F(CliTest, RerunIsByteIdenticalAndReproducibleFromHeader) {
  const auto cfg = write_config("c.json", kNoisy);
  ASSERT_EQ(run("run --config " + cfg.string() + " --out " + (dir_ / "a").string()).code, 0);
  ASSERT_EQ(run("run --config " + cfg.string() + " --out " + (dir_ / "b").string()).code, 0);
  const std::string trace = slurp(dir_ / "a" / "trace.csv");
  EXPECT_EQ(trace, slurp(dir_ / "b" / "trace.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "summary.json"), slurp(dir_ / "b" / "summary.json"));

  const auto header = header_lines(dir_ / "a" / "trace.csv");
  ASSERT_EQ(header.size(), 4u);
  EXPECT_EQ(header[0], "# abrake run");
  const ExperimentConfig parsed = config_from_json(Json::parse(kNoisy));
  EXPECT_EQ(header[1], "# config_hash: " + config_hash(parsed));
  EXPECT_EQ(header[2], "# seed: 42");
  const std::string prefix = "# config: ";
  ASSERT_EQ(header[3].rfind(prefix, 0), 0u);
  const auto embedded = write_config("embedded.json", header[3].substr(prefix.size()));
  ASSERT_EQ(run("run --config " + embedded.string() + " --out " + (dir_ / "c").string()).code, 0);
  EXPECT_EQ(slurp(dir_ / "c" / "trace.csv"), trace);
}

TEST_F(CliTest, SweepRowCount) {
  const auto cfg = write_config("c.json", R"({
    "problem": {"kind": "nqm", "spectrum": "inverse", "dimension": 10, "noise_sigma": 0.1},
    "optimizer": {"algorithm": "AB", "eta": 0.1, "rho": 0.5},
    "delay": 1, "max_steps": 500, "target_loss": 0.05,
    "sweep": {"eta": {"lo": 0.01, "hi": 3, "count": 4}, "momentum": [0, 0.5, 0.9], "trials": 2}
  })");
  const Outcome o = run("sweep --config " + cfg.string() + " --parallelism 2 --out " + dir_.string());
  ASSERT_EQ(o.code, 0) << o.output;
  const auto rows = read_csv(dir_ / "sweep.csv");
  ASSERT_EQ(rows.size(), 1u + 4 * 3 * 2);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"eta", "momentum", "trial", "status", "T"}));
  const Json summary = Json::parse(slurp(dir_ / "summary.json"));
  EXPECT_TRUE(summary.contains("t_star"));
}

TEST_F(CliTest, EnergyRhoZeroIsUnity) {
  const auto cfg = write_config("c.json", R"({
    "problem": {"kind": "nqm", "spectrum": "inverse", "dimension": 12, "noise_sigma": 1},
    "optimizer": {"algorithm": "AB", "eta": 0.5, "momentum": 0.9, "rho": 0},
    "delay": 3, "max_steps": 200
  })");
  const Outcome o = run("energy --config " + cfg.string() + " --out " + dir_.string());
  ASSERT_EQ(o.code, 0) << o.output;
  const auto rows = read_csv(dir_ / "energy.csv");
  ASSERT_EQ(rows.size(), 13u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"component_index", "eigenvalue", "geomean_ratio",
                                               "excluded_count"}));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][2], "1");
}

TEST_F(CliTest, TrainHasOneAlphaColumnPerGroup) {
  const auto cfg = write_config("c.json", R"({
    "problem": {"kind": "mlp", "layers": [2, 6, 3], "samples": 300},
    "optimizer": {"algorithm": "AB", "eta": 0.05, "momentum": 0.9, "rho": 1},
    "grouping": "filter", "delay": 2, "max_steps": 40, "trace": {"every": 5}
  })");
  const Outcome o = run("train --config " + cfg.string() + " --out " + dir_.string());
  ASSERT_EQ(o.code, 0) << o.output;
  const auto rows = read_csv(dir_ / "trace.csv");
  const std::size_t groups = 6 + 1 + 3 + 1;
  std::size_t alpha_columns = 0;
  for (const auto& name : rows[0]) alpha_columns += name.rfind("alpha_", 0) == 0;
  EXPECT_EQ(alpha_columns, groups);
  EXPECT_EQ(rows.size(), 1u + 8);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].size(), rows[0].size());
}

TEST_F(CliTest, AblateRejectsUnknownAlgorithm) {
  const auto cfg = write_config("c.json", kClosedForm);
  const Outcome o =
      run("ablate --config " + cfg.string() + " --algorithms SGDM,Adam --out " + dir_.string());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.output.find("AB_WeightOnly"), std::string::npos) << o.output;
}

TEST_F(CliTest, AblateSharesStepAxisAndReducesAtRhoZero) {
  const auto cfg = write_config("c.json", R"({
    "problem": {"kind": "nqm", "spectrum": "inverse", "dimension": 10, "noise_sigma": 0.5},
    "optimizer": {"eta": 0.3, "momentum": 0.9, "rho": 0},
    "delay": 2, "max_steps": 60, "target_loss": 1e-9
  })");
  const Outcome o = run("ablate --config " + cfg.string() + " --out " + dir_.string());
  ASSERT_EQ(o.code, 0) << o.output;
  const auto rows = read_csv(dir_ / "ablate.csv");
  ASSERT_EQ(rows[0], (std::vector<std::string>{"algorithm", "step", "loss", "status"}));
  std::map<std::string, std::vector<std::vector<std::string>>> by_alg;
  for (std::size_t i = 1; i < rows.size(); ++i) by_alg[rows[i][0]].push_back(rows[i]);
  EXPECT_EQ(by_alg.size(), 8u);
  for (const auto& [name, group] : by_alg) {
    ASSERT_EQ(group.size(), 61u) << name;
    for (std::size_t t = 0; t < group.size(); ++t) EXPECT_EQ(group[t][1], std::to_string(t));
  }
  for (const char* variant : {"AB_VelOnly", "AB_WeightOnly", "AB"}) {
    for (std::size_t t = 0; t < 61; ++t) {
      EXPECT_EQ(by_alg[variant][t][2], by_alg["SGDM"][t][2]) << variant << " step " << t;
    }
  }
}

TEST_F(CliTest, DatasetExportReloads) {
  const auto cfg = write_config("c.json", R"({
    "problem": {"kind": "mlp", "layers": [3, 4, 5], "samples": 40},
    "optimizer": {"eta": 0.1}
  })");
  const Outcome o = run("dataset --config " + cfg.string() + " --out " + dir_.string());
  ASSERT_EQ(o.code, 0) << o.output;
  std::ifstream in(dir_ / "dataset.csv");
  const SyntheticDataset data = read_dataset_csv(in);
  EXPECT_EQ(data.size(), 40u);
  EXPECT_EQ(data.features, 3u);
  EXPECT_EQ(data.classes, 5u);

  const auto train_cfg = write_config("t.json", R"({
    "problem": {"kind": "mlp", "layers": [3, 4, 5], "dataset": ")" +
                                                    (dir_ / "dataset.csv").string() + R"(",
                "batch_size": 8},
    "optimizer": {"eta": 0.1}, "max_steps": 10
  })");
  EXPECT_EQ(run("train --config " + train_cfg.string() + " --out " + (dir_ / "t").string()).code,
            0);
}
