#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

#include <doctest.h>

#include "mcma/cli.hpp"
#include "mcma/seed.hpp"
#include "mcma/text.hpp"
#include "scratch_dir.hpp"

using namespace mcma;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "mcma");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(is, line);) rows.push_back(text::split(line, ','));
  return rows;
}

// Small, fast dataset and training settings shared by most cases.
const std::vector<std::string> kFast = {"--epochs", "40", "--iterations", "2"};

fs::path make_dataset(const fs::path& dir, const std::string& bench = "bessel", int n = 240) {
  const fs::path data = dir / ("data_" + bench);
  const auto r = invoke({"generate", "--benchmark", bench, "--n", std::to_string(n), "--seed", "3", "--out",
                         data.string()});
  REQUIRE(r.code == 0);
  return data;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("help, version and usage errors") {
  CHECK(invoke({"--help"}).code == 0);
  const auto v = invoke({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find(cli::kToolVersion) != std::string::npos);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"frobnicate"}).code == 2);
  CHECK(invoke({"generate", "--no-such-flag"}).code == 2);
  CHECK(invoke({"generate", "--n", "many"}).code == 2);
}

TEST_CASE("pipeline names") {
  for (auto p : {cli::Pipeline::one_pass, cli::Pipeline::iterative, cli::Pipeline::mcca,
                 cli::Pipeline::mcma_complementary, cli::Pipeline::mcma_competitive})
    CHECK(cli::parse_pipeline(cli::to_string(p)) == p);
  CHECK(cli::architecture_of(cli::Pipeline::mcma_competitive) == trainer::Architecture::mcma);
  CHECK(cli::allocation_of(cli::Pipeline::mcma_competitive) == trainer::Allocation::competitive);
  CHECK_THROWS_AS(cli::parse_pipeline("mcma"), ValidationError);
}

TEST_CASE("generate") {
  const test::ScratchDir dir("cli_generate");
  const auto a = dir.path / "a", b = dir.path / "b";
  REQUIRE(invoke({"generate", "--benchmark", "blackscholes", "--n", "90", "--seed", "5", "--out", a.string()}).code ==
          0);
  REQUIRE(invoke({"generate", "--benchmark", "blackscholes", "--n", "90", "--seed", "5", "--out", b.string()}).code ==
          0);
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().filename() == "run.ini") continue;  // records the output path
    CAPTURE(e.path().string());
    CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
  }
  const auto ds = bench::load_dataset(a);
  CHECK(ds.size() == 90);
  CHECK(ds.train.size() == 60);
  CHECK(ds.seed == derive_seed(5, "dataset"));
  CHECK(slurp(a / "run.ini").find("tool_version=mcma 0.1.0") != std::string::npos);

  // Refuses to overwrite; --force allows it.
  CHECK(invoke({"generate", "--benchmark", "bessel", "--n", "90", "--out", a.string()}).code == 3);
  CHECK(bench::load_dataset(a).benchmark == "blackscholes");
  CHECK(invoke({"generate", "--benchmark", "bessel", "--n", "90", "--out", a.string(), "--force"}).code == 0);
  CHECK(bench::load_dataset(a).benchmark == "bessel");

  CHECK(invoke({"generate", "--benchmark", "bessel", "--n", "5", "--out", (dir.path / "c").string()}).code == 3);
  CHECK(invoke({"generate", "--n", "100", "--out", (dir.path / "d").string()}).code == 2);
  CHECK(invoke({"generate", "--benchmark", "fft", "--out", (dir.path / "e").string()}).code == 3);
  CHECK(invoke({"generate", "--benchmark", "bessel", "--train-fraction", "1.5", "--out",
                (dir.path / "f").string()}).code == 3);
  CHECK(invoke({"generate", "--benchmark", "bessel"}).code == 2);  // no --out
}

TEST_CASE("train and eval") {
  const test::ScratchDir dir("cli_train");
  const auto data = make_dataset(dir.path);
  const auto sys = dir.path / "sys";

  const auto missing = dir.path / "nowhere";
  const auto r = invoke({"train", "--data", missing.string(), "--out", sys.string()});
  CHECK(r.code == 3);
  CHECK(r.err.find(missing.string()) != std::string::npos);
  CHECK(invoke({"train", "--out", sys.string()}).code == 2);
  CHECK(invoke({"train", "--data", data.string(), "--pipeline", "adaboost", "--out", sys.string()}).code == 3);
  CHECK(invoke({"train", "--data", data.string(), "--benchmark", "sobel", "--out", sys.string()}).code == 3);
  CHECK(invoke(concat({"train", "--data", data.string(), "--bound", "-1", "--out", sys.string()}, kFast)).code == 3);

  const auto t = invoke(concat({"train", "--data", data.string(), "--pipeline", "mcma_complementary", "--seed", "2",
                                "--out", sys.string()},
                               kFast));
  REQUIRE(t.code == 0);
  const auto loaded = trainer::load_system(sys);
  CHECK(loaded.architecture == trainer::Architecture::mcma);
  CHECK(loaded.allocation == trainer::Allocation::complementary);
  CHECK(loaded.config.seed == derive_seed(2, "trainer"));
  CHECK(loaded.config.approximator_train.epochs == 40);
  CHECK(loaded.config.classifier_train.epochs == 40);
  CHECK(loaded.training_log.size() == 2);
  CHECK(slurp(sys / "run.ini").find("tool_version") != std::string::npos);

  const auto e1 = dir.path / "e1", e2 = dir.path / "e2";
  REQUIRE(invoke({"eval", "--system", sys.string(), "--data", data.string(), "--out", e1.string()}).code == 0);
  REQUIRE(invoke({"eval", "--system", sys.string(), "--data", data.string(), "--out", e2.string()}).code == 0);
  for (const char* f : {"report.txt", "routes.csv", "verdicts.csv"}) {
    CAPTURE(f);
    CHECK(slurp(e1 / f) == slurp(e2 / f));
    CHECK_FALSE(slurp(e1 / f).empty());
  }

  // Buffer assumptions only move the reload-dependent fields.
  const auto ea = dir.path / "ea", en = dir.path / "en";
  REQUIRE(invoke({"eval", "--system", sys.string(), "--data", data.string(), "--buffer-case", "all_fit", "--out",
                  ea.string()})
              .code == 0);
  REQUIRE(invoke({"eval", "--system", sys.string(), "--data", data.string(), "--buffer-case", "none_fit", "--out",
                  en.string()})
              .code == 0);
  const auto base = runtime::read_report(e1 / "report.txt");
  const auto all = runtime::read_report(ea / "report.txt");
  const auto none = runtime::read_report(en / "report.txt");
  CHECK(all.reload_count == 0);
  CHECK(none.reload_count >= base.reload_count);
  for (const auto* r2 : {&all, &none}) {
    CHECK(r2->invocation == base.invocation);
    CHECK(r2->rmse_normalized == base.rmse_normalized);
    CHECK(r2->confusion_counts == base.confusion_counts);
    CHECK(r2->per_class_counts == base.per_class_counts);
  }
  CHECK(all.modeled_speedup >= base.modeled_speedup);
  CHECK(none.modeled_speedup <= base.modeled_speedup);
  CHECK(slurp(e1 / "routes.csv") == slurp(ea / "routes.csv"));

  CHECK(invoke({"eval", "--system", sys.string(), "--data", data.string(), "--buffer-case", "some", "--out",
                (dir.path / "eb").string()})
            .code == 3);
  CHECK(invoke({"eval", "--system", sys.string(), "--out", (dir.path / "ec").string()}).code == 2);
  CHECK(invoke({"eval", "--system", (dir.path / "nosys").string(), "--data", data.string(), "--out",
                (dir.path / "ed").string()})
            .code == 3);
  const auto other = make_dataset(dir.path, "piecewise", 90);
  CHECK(invoke({"eval", "--system", sys.string(), "--data", other.string(), "--out", (dir.path / "ee").string()})
            .code == 3);
}

TEST_CASE("compare") {
  const test::ScratchDir dir("cli_compare");
  const auto data = make_dataset(dir.path, "piecewise", 240);
  CHECK(invoke(concat({"compare", "--data", data.string(), "--pipelines", "one_pass", "--out",
                       (dir.path / "x").string()},
                      kFast))
            .code == 2);
  CHECK(invoke(concat({"compare", "--data", data.string(), "--pipelines", "one_pass,one_pass", "--out",
                       (dir.path / "y").string()},
                      kFast))
            .code == 3);

  const auto out = dir.path / "cmp";
  const auto r = invoke(concat({"compare", "--data", data.string(), "--pipelines", "one_pass,mcma_competitive",
                                "--out", out.string()},
                               kFast));
  REQUIRE(r.code == 0);
  const auto rows = read_csv(out / "compare.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"pipeline", "invocation", "rmse_normalized", "speedup",
                                            "energy_reduction", "best"});
  int best = 0;
  double top = -1.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto rep = runtime::read_report(out / rows[i][0] / "report.txt");
    CHECK(text::parse_double(rows[i][1]) == rep.invocation);
    CHECK(text::parse_double(rows[i][2]) == rep.rmse_normalized);
    CHECK(text::parse_double(rows[i][3]) == rep.modeled_speedup);
    CHECK(text::parse_double(rows[i][4]) == rep.modeled_energy_reduction);
    CHECK(fs::exists(out / rows[i][0] / "system" / "manifest.ini"));
    top = std::max(top, rep.invocation);
    best += rows[i][5] == "1" ? 1 : 0;
  }
  CHECK(best == 1);
  CHECK(r.out.find('*') != std::string::npos);
}

TEST_CASE("sweep") {
  const test::ScratchDir dir("cli_sweep");
  const auto data = make_dataset(dir.path, "bessel", 180);
  const std::vector<std::string> base = {"sweep", "--data", data.string(), "--pipelines", "one_pass,mcca"};
  CHECK(invoke(concat(concat(base, {"--bounds", "0.1", "--out", (dir.path / "x").string()}), kFast)).code == 2);
  CHECK(invoke(concat(concat(base, {"--bounds", "0.1,0", "--out", (dir.path / "y").string()}), kFast)).code == 3);
  CHECK(invoke(concat(concat(base, {"--bounds", "0.1,-0.2", "--out", (dir.path / "y").string()}), kFast)).code == 3);

  const auto a = dir.path / "a", b = dir.path / "b";
  auto args = concat(concat(base, {"--bounds", "0.05,0.2", "--min-gain", "0.02"}), kFast);
  REQUIRE(invoke(concat(args, {"--out", a.string()})).code == 0);
  REQUIRE(invoke(concat(args, {"--out", b.string()})).code == 0);
  CHECK(slurp(a / "sweep.csv") == slurp(b / "sweep.csv"));
  const auto rows = read_csv(a / "sweep.csv");
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"bound", "pipeline", "invocation", "rmse_normalized", "speedup"});
  CHECK(slurp(a / "run.ini").find("tool_version") != std::string::npos);
}

TEST_CASE("config file precedence and manifests") {
  const test::ScratchDir dir("cli_config");
  const auto ini = dir.path / "run.ini";
  {
    std::ofstream os(ini);
    os << "[run]\nbenchmark = bessel\nn_samples = 150\nseed = 9\n\n[trainer]\napproximator_epochs = 30\n"
          "classifier_epochs = 30\nn_iterations = 2\n";
  }
  // Flags override the file.
  const auto d = dir.path / "d";
  REQUIRE(invoke({"generate", "--config", ini.string(), "--n", "120", "--out", d.string()}).code == 0);
  const auto ds = bench::load_dataset(d);
  CHECK(ds.size() == 120);
  CHECK(ds.seed == derive_seed(9, "dataset"));

  // A manifest is itself a config file that reproduces the run.
  const auto d2 = dir.path / "d2";
  REQUIRE(invoke({"generate", "--config", (d / "run.ini").string(), "--out", d2.string()}).code == 0);
  CHECK(slurp(d / "dataset.csv") == slurp(d2 / "dataset.csv"));

  const auto s = dir.path / "s";
  REQUIRE(invoke({"train", "--config", ini.string(), "--data", d.string(), "--pipeline", "one_pass", "--out",
                  s.string()})
              .code == 0);
  const auto sys = trainer::load_system(s);
  CHECK(sys.config.approximator_train.epochs == 30);
  CHECK(sys.config.n_iterations == 2);
  CHECK(sys.config.seed == derive_seed(9, "trainer"));

  cli::RunConfig c;
  cli::apply_config_file(c, s / "run.ini");
  CHECK(c.trainer.approximator_train.epochs == 30);
  CHECK(c.benchmark == "bessel");
  CHECK(c.pipeline == cli::Pipeline::one_pass);
  CHECK(c.error_bound == bench::find_benchmark("bessel").error_bound);

  {
    std::ofstream os(dir.path / "bad.ini");
    os << "[run]\nbenchmark = bessel\ncolour = blue\n";
  }
  CHECK(invoke({"generate", "--config", (dir.path / "bad.ini").string(), "--out", (dir.path / "z").string()}).code ==
        3);
  {
    std::ofstream os(dir.path / "bad2.ini");
    os << "[extras]\nkey = 1\n";
  }
  CHECK(invoke({"generate", "--config", (dir.path / "bad2.ini").string(), "--out", (dir.path / "z").string()}).code ==
        3);
  CHECK(invoke({"generate", "--config", (dir.path / "absent.ini").string(), "--out", (dir.path / "z").string()})
            .code == 3);
}

TEST_CASE("topology overrides are checked against the benchmark") {
  cli::RunConfig c;
  c.benchmark = "bessel";
  c.approximator_topology = "2->4->1";
  CHECK(c.resolved_benchmark().approximator_topology.shape_string() == "2->4->1");
  c.approximator_topology = "3->4->1";
  CHECK_THROWS_AS(c.resolved_benchmark(), ValidationError);
  c.approximator_topology.reset();
  c.classifier_topology = "2->4->3";
  CHECK_THROWS_AS(c.resolved_benchmark(), ValidationError);
  c.benchmark.clear();
  CHECK_THROWS_AS(c.resolved_benchmark(), cli::UsageError);
}

TEST_CASE("generate at scale is byte-identical on re-run") {
  const test::ScratchDir dir("cli_generate_large");
  const auto a = dir.path / "a", b = dir.path / "b";
  for (const auto& p : {a, b})
    REQUIRE(invoke({"generate", "--benchmark", "blackscholes", "--n", "10000", "--seed", "1", "--out", p.string()})
                .code == 0);
  CHECK(slurp(a / "dataset.csv") == slurp(b / "dataset.csv"));
  CHECK(bench::load_dataset(a).size() == 10000);
}

TEST_CASE("default mcma_competitive system layout on bessel") {
  const test::ScratchDir dir("cli_layout");
  const auto data = make_dataset(dir.path, "bessel", 300);
  const auto sys = dir.path / "sys";
  REQUIRE(invoke({"train", "--data", data.string(), "--epochs", "50", "--out", sys.string()}).code == 0);
  std::vector<std::string> models;
  for (const auto& e : fs::directory_iterator(sys))
    if (e.path().extension() == ".mlp") models.push_back(e.path().filename().string());
  std::sort(models.begin(), models.end());
  CHECK(models == std::vector<std::string>{"approximator_1.mlp", "approximator_2.mlp", "approximator_3.mlp",
                                           "classifier_1.mlp"});
  CHECK(trainer::load_system(sys).allocation == trainer::Allocation::competitive);
}

TEST_CASE("compare on the piecewise target favours mcma") {
  const test::ScratchDir dir("cli_compare_piecewise");
  const auto out = dir.path / "cmp";
  REQUIRE(invoke({"compare", "--benchmark", "piecewise", "--n", "1500", "--pipelines", "one_pass,mcma_competitive",
                  "--out", out.string()})
              .code == 0);
  const auto rows = read_csv(out / "compare.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][0] == "one_pass");
  CHECK(rows[2][0] == "mcma_competitive");
  CHECK(text::parse_double(rows[2][1]) > text::parse_double(rows[1][1]));
  CHECK(rows[2][5] == "1");
}
