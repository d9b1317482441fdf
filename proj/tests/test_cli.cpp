#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "clam/experiment.hpp"

using namespace clam;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("clam_cli_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string read_file(const fs::path &p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char *kTinyConfig =
    "dataset.source = synthetic\n"
    "dataset.n_classes = 3\n"
    "dataset.dim = 6\n"
    "dataset.train_per_class = 40\n"
    "dataset.test_per_class = 20\n"
    "dataset.separation = 8\n"
    "model.kind = softmax\n"
    "train.epochs = 3\n"
    "train.batch_size = 32\n"
    "train.lr = 0.2\n"
    "methods = normal, clam\n"
    "seeds = 0\n";

}  // namespace

TEST_CASE("config file parsing") {
    const ConfigFile cfg = ConfigFile::parse_string(
        "a.b = 3\n"
        "# full comment line\n"
        "name = hello   # trailing comment\n"
        "list = 1, 2, 3.5\n"
        "flag = true\n");
    CHECK(cfg.get_size("a.b", 0) == 3);
    CHECK(cfg.get_string("name", "") == "hello");
    CHECK(cfg.get_double_list("list") == std::vector<double>{1.0, 2.0, 3.5});
    CHECK(cfg.get_bool("flag", false));
    CHECK(cfg.get_double("missing", 7.5) == 7.5);
    CHECK_NOTHROW(cfg.check_all_consumed());

    CHECK_THROWS_AS(ConfigFile::parse_string("key_without_value\n"), std::invalid_argument);
    CHECK_THROWS_AS(ConfigFile::parse_string("dup = 1\ndup = 2\n"), std::invalid_argument);

    const ConfigFile unknown = ConfigFile::parse_string("tpyo = 5\n");
    CHECK_THROWS_AS(unknown.check_all_consumed(), std::invalid_argument);
}

TEST_CASE("experiment config validation rejects infeasible combinations") {
    // Unknown keys fail fast.
    CHECK_THROWS_AS(ExperimentConfig::from_config(ConfigFile::parse_string(
                        std::string(kTinyConfig) + "train.eopchs = 3\n")),
                    std::invalid_argument);

    // n * u_min > 1 (validated against the data before any run).
    {
        ExperimentConfig config = ExperimentConfig::from_config(ConfigFile::parse_string(
            std::string(kTinyConfig) + "clam.u_min = 0.9\n"));
        CHECK_THROWS_AS(cmd_train(config), std::invalid_argument);
    }

    // tau <= 0 rejected at config level.
    CHECK_THROWS_AS(ExperimentConfig::from_config(ConfigFile::parse_string(
                        std::string(kTinyConfig) + "clam.tau = 0\n")),
                    std::invalid_argument);

    // Empty dataset.
    CHECK_THROWS_AS(ExperimentConfig::from_config(ConfigFile::parse_string(
                        "dataset.source = synthetic\ndataset.train_per_class = 0\n")),
                    std::invalid_argument);

    // Cropping needs image data.
    CHECK_THROWS_AS(ExperimentConfig::from_config(ConfigFile::parse_string(
                        std::string(kTinyConfig) + "augment.kind = crop\n")),
                    std::invalid_argument);
}

TEST_CASE("gen-data writes loadable, reproducible csv files") {
    TempDir tmp;
    SyntheticConfig cfg;
    cfg.n_classes = 3;
    cfg.dim = 4;
    cfg.train_per_class = 25;
    cfg.test_per_class = 10;
    cfg.seed = 42;

    const fs::path dir_a = tmp.path / "a";
    const fs::path dir_b = tmp.path / "b";
    CHECK(cmd_gen_data(cfg, dir_a.string()) == kExitOk);
    CHECK(cmd_gen_data(cfg, dir_b.string()) == kExitOk);

    // Byte-identical across invocations with the same seed.
    CHECK(read_file(dir_a / "train.csv") == read_file(dir_b / "train.csv"));
    CHECK(read_file(dir_a / "test.csv") == read_file(dir_b / "test.csv"));

    // Round trip equals the in-memory generation.
    auto [train, test] = gen_synthetic(cfg);
    const Dataset loaded = load_csv((dir_a / "train.csv").string());
    CHECK(loaded.labels == train.labels);
    CHECK(loaded.features == train.features);
    (void)test;
}

TEST_CASE("game command writes trace and diagnostics") {
    TempDir tmp;
    GameOptions opt;
    opt.n = 4;
    opt.m = 3;
    opt.T = 50;
    opt.tau = 1.0;
    opt.u_min = 0.02;
    opt.seed = 3;
    opt.output_dir = (tmp.path / "game").string();
    CHECK(cmd_game(opt) == kExitOk);

    const std::string trace = read_file(tmp.path / "game" / "trace.csv");
    CHECK(trace.rfind("t,j,V,w_1,w_2,w_3,w_4\n", 0) == 0);
    const auto diag = nlohmann::json::parse(read_file(tmp.path / "game" / "diagnostics.json"));
    CHECK(diag["per_step_violations"].get<std::size_t>() == 0);
    CHECK(diag["valid"].get<bool>());

    // T = 0: empty trace, still exit 0.
    opt.T = 0;
    opt.output_dir = (tmp.path / "game0").string();
    CHECK(cmd_game(opt) == kExitOk);

    // Two-pass theorem mode records the alpha estimate.
    opt.T = 100;
    opt.theorem_tau = true;
    opt.output_dir = (tmp.path / "game_theorem").string();
    CHECK(cmd_game(opt) == kExitOk);
    const auto diag2 =
        nlohmann::json::parse(read_file(tmp.path / "game_theorem" / "diagnostics.json"));
    CHECK(diag2["theorem_mode"].get<bool>());
    CHECK(diag2["tau"].get<double>() > 0.0);
    CHECK(diag2["tau"].get<double>() < 1.0);
}

TEST_CASE("train command produces per-run and aggregate artifacts deterministically") {
    TempDir tmp;
    ExperimentConfig config =
        ExperimentConfig::from_config(ConfigFile::parse_string(kTinyConfig));
    config.output_dir = (tmp.path / "out1").string();
    REQUIRE(cmd_train(config) == kExitOk);

    CHECK(fs::exists(tmp.path / "out1" / "runs.csv"));
    CHECK(fs::exists(tmp.path / "out1" / "aggregate.csv"));
    CHECK(fs::exists(tmp.path / "out1" / "normal_seed0_none" / "run.json"));
    CHECK(fs::exists(tmp.path / "out1" / "clam_seed0_none" / "curves.csv"));

    const auto run = nlohmann::json::parse(
        read_file(tmp.path / "out1" / "clam_seed0_none" / "run.json"));
    CHECK(run["method"] == "clam");
    CHECK(run["per_epoch"].size() == 3);
    CHECK(run["final"]["test_report"].contains("range"));

    const std::string agg = read_file(tmp.path / "out1" / "aggregate.csv");
    CHECK(agg.rfind("method,std_mean,std_std,cov_mean,cov_std,range_mean,range_std,"
                    "mean_acc_mean,mean_acc_std,worst_acc_mean,worst_acc_std\n",
                    0) == 0);

    // Rerunning the same config yields byte-identical outputs.
    ExperimentConfig again = config;
    again.output_dir = (tmp.path / "out2").string();
    REQUIRE(cmd_train(again) == kExitOk);
    for (const char *rel : {"runs.csv", "aggregate.csv"})
        CHECK(read_file(tmp.path / "out1" / rel) == read_file(tmp.path / "out2" / rel));
    CHECK(read_file(tmp.path / "out1" / "clam_seed0_none" / "run.json") ==
          read_file(tmp.path / "out2" / "clam_seed0_none" / "run.json"));
}

TEST_CASE("train command in a worker pool matches the sequential result") {
    TempDir tmp;
    ExperimentConfig config = ExperimentConfig::from_config(ConfigFile::parse_string(
        std::string(kTinyConfig) + "workers = 4\n"));
    config.seeds = {0, 1};
    config.output_dir = (tmp.path / "pool").string();
    REQUIRE(cmd_train(config) == kExitOk);

    ExperimentConfig seq = config;
    seq.workers = 1;
    seq.output_dir = (tmp.path / "seq").string();
    REQUIRE(cmd_train(seq) == kExitOk);
    CHECK(read_file(tmp.path / "pool" / "runs.csv") == read_file(tmp.path / "seq" / "runs.csv"));
}

namespace {

void write_u32_be(std::ofstream &out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char *>(b), 4);
}

void write_idx_dataset(const fs::path &images, const fs::path &labels, std::size_t count,
                       std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::ofstream img(images, std::ios::binary);
    write_u32_be(img, 0x00000803u);
    write_u32_be(img, static_cast<std::uint32_t>(count));
    write_u32_be(img, 4);
    write_u32_be(img, 4);
    std::ofstream lab(labels, std::ios::binary);
    write_u32_be(lab, 0x00000801u);
    write_u32_be(lab, static_cast<std::uint32_t>(count));
    for (std::size_t i = 0; i < count; ++i) {
        const unsigned char y = i % 2;
        // Class 0 bright in the top half, class 1 in the bottom half.
        for (std::size_t px = 0; px < 16; ++px) {
            const bool hot = (y == 0) == (px < 8);
            img.put(static_cast<char>(hot ? 200 + rng() % 40 : rng() % 40));
        }
        lab.put(static_cast<char>(y));
    }
}

}  // namespace

TEST_CASE("train command consumes idx train/test pairs") {
    TempDir tmp;
    write_idx_dataset(tmp.path / "train-img.idx", tmp.path / "train-lab.idx", 60, 1);
    write_idx_dataset(tmp.path / "test-img.idx", tmp.path / "test-lab.idx", 20, 2);

    const std::string conf = "dataset.source = idx\n"
                             "dataset.images = " + (tmp.path / "train-img.idx").string() + "\n" +
                             "dataset.labels = " + (tmp.path / "train-lab.idx").string() + "\n" +
                             "dataset.test_images = " + (tmp.path / "test-img.idx").string() +
                             "\n" +
                             "dataset.test_labels = " + (tmp.path / "test-lab.idx").string() +
                             "\n" +
                             "model.kind = softmax\n"
                             "train.epochs = 3\n"
                             "train.batch_size = 16\n"
                             "train.lr = 0.5\n"
                             "methods = normal\n"
                             "seeds = 0\n";
    ExperimentConfig config = ExperimentConfig::from_config(ConfigFile::parse_string(conf));
    config.output_dir = (tmp.path / "out").string();
    REQUIRE(cmd_train(config) == kExitOk);
    const auto run =
        nlohmann::json::parse(read_file(tmp.path / "out" / "normal_seed0_none" / "run.json"));
    // A linearly separable pattern is learned immediately.
    const auto acc = run["per_epoch"].back()["test_acc"];
    CHECK(acc.size() == 2);
    CHECK(acc[0].get<double>() == doctest::Approx(1.0));
    CHECK(acc[1].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("report pairs with/without augmentation runs") {
    TempDir tmp;
    const std::string base =
        "dataset.source = synthetic_images\n"
        "dataset.n_classes = 3\n"
        "dataset.train_per_class = 30\n"
        "dataset.test_per_class = 15\n"
        "dataset.height = 8\n"
        "dataset.width = 8\n"
        "model.kind = softmax\n"
        "train.epochs = 2\n"
        "train.batch_size = 16\n"
        "train.lr = 0.2\n"
        "methods = normal\n"
        "seeds = 0\n";

    ExperimentConfig without = ExperimentConfig::from_config(ConfigFile::parse_string(base));
    without.output_dir = (tmp.path / "runs").string();
    REQUIRE(cmd_train(without) == kExitOk);

    ExperimentConfig with = ExperimentConfig::from_config(ConfigFile::parse_string(
        base + "augment.kind = crop\naugment.crop_lower_bounds = 0.5, 0.8\n"));
    with.output_dir = (tmp.path / "runs").string();
    REQUIRE(cmd_train(with) == kExitOk);

    std::vector<std::string> dirs;
    for (const auto &entry : fs::directory_iterator(tmp.path / "runs"))
        if (entry.is_directory()) dirs.push_back(entry.path().string());

    const fs::path report_dir = tmp.path / "report";
    REQUIRE(cmd_report(dirs, report_dir.string()) == kExitOk);
    const std::string diff = read_file(report_dir / "range_difference.csv");
    CHECK(diff.rfind("method,seed,augment,range_with,range_without,range_diff\n", 0) == 0);
    // One row per crop bound.
    CHECK(std::count(diff.begin(), diff.end(), '\n') == 3);
    CHECK(fs::exists(report_dir / "worst_class.csv"));
    CHECK(fs::exists(report_dir / "range_difference_aggregate.csv"));

    // Identical with/without reports give a zero difference.
    {
        const fs::path pair_dir = tmp.path / "identical";
        fs::create_directories(pair_dir / "with");
        fs::create_directories(pair_dir / "without");
        nlohmann::json j;
        j["method"] = "normal";
        j["seed"] = 0;
        j["augment"] = {{"kind", "crop"}, {"crop_lower_bound", 0.5}};
        j["final"]["test_report"] = {{"range", 0.25},
                                     {"worst_fraction_acc", 0.7},
                                     {"per_class", {0.7, 0.9, 0.95}}};
        std::ofstream(pair_dir / "with" / "run.json") << j.dump();
        j["augment"] = {{"kind", "none"}};
        std::ofstream(pair_dir / "without" / "run.json") << j.dump();

        const fs::path out = tmp.path / "report_identical";
        REQUIRE(cmd_report({(pair_dir / "with").string(), (pair_dir / "without").string()},
                           out.string()) == kExitOk);
        const std::string rows = read_file(out / "range_difference.csv");
        CHECK(rows.find(",0\n") != std::string::npos);
    }

    // Unpaired runs alone are an error.
    CHECK(cmd_report({(tmp.path / "runs" / "normal_seed0_none").string()},
                     (tmp.path / "report_none").string()) == kExitConfigError);
}
