#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clam/classifier.hpp"
#include "clam/data.hpp"
#include "clam/game.hpp"
#include "clam/losses.hpp"
#include "clam/metrics.hpp"

namespace clam {

/// Exit codes shared by all subcommands.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfigError = 1,
    kExitRunFailure = 2,
    kExitTheoremViolation = 3,
};

/// Flat key = value config file. '#' starts a comment; keys are dotted,
/// list values are comma separated. Unknown keys are rejected so typos fail
/// fast. Environment variables are never consulted.
class ConfigFile {
  public:
    static ConfigFile parse_file(const std::string &path);
    static ConfigFile parse_string(const std::string &text);

    bool has(const std::string &key) const;
    std::string get_string(const std::string &key, const std::string &fallback) const;
    double get_double(const std::string &key, double fallback) const;
    std::size_t get_size(const std::string &key, std::size_t fallback) const;
    bool get_bool(const std::string &key, bool fallback) const;
    std::vector<double> get_double_list(const std::string &key) const;
    std::vector<std::string> get_string_list(const std::string &key) const;

    /// Throws if any key was never read; called after parsing a config.
    void check_all_consumed() const;

  private:
    std::map<std::string, std::string> values_;
    mutable std::map<std::string, bool> consumed_;
};

enum class DataSource { Synthetic, SyntheticImages, Idx, Csv };

/// Everything one training invocation needs, validated before any compute.
struct ExperimentConfig {
    DataSource source = DataSource::Synthetic;
    SyntheticConfig synthetic;
    SyntheticImageConfig synthetic_images;
    std::optional<std::uint64_t> dataset_seed;  // unset: data seed = run seed
    std::string idx_images, idx_labels;
    std::string idx_test_images, idx_test_labels;  // optional held-out pair
    std::string train_csv, test_csv;

    AugmentKind augment_kind = AugmentKind::None;
    std::vector<double> crop_lower_bounds;  // one run per value
    double brightness = 0.0, contrast = 0.0, saturation = 0.0;

    TrainConfig train;
    std::vector<LossSpec> methods;
    std::vector<std::uint64_t> seeds;
    std::string output_dir = "out";
    std::size_t workers = 1;

    static ExperimentConfig from_config(const ConfigFile &cfg);
    void validate() const;
};

struct GameOptions {
    std::size_t n = 10;
    std::size_t m = 8;
    std::size_t T = 200;
    double tau = 1.0;
    bool theorem_tau = false;  // two-pass: run tau=1, measure max alpha, rerun
    double u_min = 0.01;
    std::uint64_t seed = 0;
    std::string matrix_file;   // empty = random matrix from seed
    std::string output_dir = "out";
};

/// TrainResult as a JSON document: method, seed, augmentation, config,
/// per-epoch records and the final fairness reports.
std::string train_result_json(const TrainResult &result, const std::string &method_name,
                              std::uint64_t seed, const AugmentationSpec &augment);

int cmd_train(const ExperimentConfig &config);
int cmd_game(const GameOptions &options);
int cmd_report(const std::vector<std::string> &run_dirs, const std::string &output_dir);
int cmd_gen_data(const SyntheticConfig &config, const std::string &output_dir);

}  // namespace clam
