#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clam/experiment.hpp"

using namespace clam;

int main(int argc, char **argv) {
    CLI::App app{"Fair-classification lab: class-dependent multiplicative-weights "
                 "training, game-theoretic regret verification, and fairness reporting"};
    app.require_subcommand(1);

    // train
    auto *train = app.add_subcommand("train", "Run training sweeps from a config file");
    std::string config_path;
    std::string seeds_arg, out_arg;
    std::size_t workers_arg = 0;
    train->add_option("--config", config_path, "Config file (key = value lines)")->required();
    train->add_option("--seeds", seeds_arg, "Comma list of seeds (overrides the config)");
    train->add_option("--out", out_arg, "Output directory (overrides the config)");
    train->add_option("--workers", workers_arg, "Worker pool size (overrides the config)");

    // game
    auto *game = app.add_subcommand("game", "Run the matrix game and verify the regret bound");
    GameOptions gopt;
    std::string tau_arg = "1.0";
    game->add_option("--n", gopt.n, "Classes (rows)");
    game->add_option("--m", gopt.m, "Parameter choices (columns)");
    game->add_option("--T", gopt.T, "Rounds");
    game->add_option("--tau", tau_arg, "Learning rate, or 'theorem' for the two-pass rate");
    game->add_option("--u-min", gopt.u_min, "Lower bound of the restricted simplex");
    game->add_option("--seed", gopt.seed, "Seed for the random payoff matrix");
    game->add_option("--matrix", gopt.matrix_file, "CSV payoff matrix (overrides --seed/--m)");
    game->add_option("--out", gopt.output_dir, "Output directory");

    // report
    auto *report = app.add_subcommand("report", "Pair with/without-augmentation runs");
    std::vector<std::string> run_dirs;
    std::string report_out = "report";
    report->add_option("dirs", run_dirs, "Run directories (each containing run.json)")
        ->required();
    report->add_option("--out", report_out, "Output directory");

    // gen-data
    auto *gen = app.add_subcommand("gen-data", "Write a synthetic dataset to CSV");
    SyntheticConfig gcfg;
    std::string gen_out = "data";
    std::string overlap_arg;
    gen->add_option("--classes", gcfg.n_classes, "Number of classes");
    gen->add_option("--dim", gcfg.dim, "Feature dimension");
    gen->add_option("--train-per-class", gcfg.train_per_class, "Training samples per class");
    gen->add_option("--test-per-class", gcfg.test_per_class, "Test samples per class");
    gen->add_option("--separation", gcfg.separation, "Distance scale between class means");
    gen->add_option("--overlap", overlap_arg, "Overlap pairs, a:b:overlap;a:b:overlap");
    gen->add_option("--seed", gcfg.seed, "Seed");
    gen->add_option("--out", gen_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            ConfigFile cfg = ConfigFile::parse_file(config_path);
            ExperimentConfig config = ExperimentConfig::from_config(cfg);
            if (!seeds_arg.empty()) {
                config.seeds.clear();
                std::size_t pos = 0;
                while (pos < seeds_arg.size()) {
                    const auto comma = seeds_arg.find(',', pos);
                    const std::string item = seeds_arg.substr(
                        pos, comma == std::string::npos ? std::string::npos : comma - pos);
                    config.seeds.push_back(std::stoull(item));
                    if (comma == std::string::npos) break;
                    pos = comma + 1;
                }
            }
            if (!out_arg.empty()) config.output_dir = out_arg;
            if (workers_arg > 0) config.workers = workers_arg;
            return cmd_train(config);
        }
        if (game->parsed()) {
            if (tau_arg == "theorem") {
                gopt.theorem_tau = true;
            } else {
                gopt.tau = std::stod(tau_arg);
            }
            return cmd_game(gopt);
        }
        if (report->parsed()) return cmd_report(run_dirs, report_out);
        if (gen->parsed()) {
            if (!overlap_arg.empty()) {
                std::size_t pos = 0;
                while (pos < overlap_arg.size()) {
                    const auto semi = overlap_arg.find(';', pos);
                    const std::string item = overlap_arg.substr(
                        pos, semi == std::string::npos ? std::string::npos : semi - pos);
                    const auto c1 = item.find(':');
                    const auto c2 = item.find(':', c1 + 1);
                    if (c1 == std::string::npos || c2 == std::string::npos)
                        throw std::invalid_argument("gen-data: overlap items must be a:b:overlap");
                    OverlapPair pair;
                    pair.a = std::stoull(item.substr(0, c1));
                    pair.b = std::stoull(item.substr(c1 + 1, c2 - c1 - 1));
                    pair.overlap = std::stod(item.substr(c2 + 1));
                    gcfg.overlap_pairs.push_back(pair);
                    if (semi == std::string::npos) break;
                    pos = semi + 1;
                }
            }
            return cmd_gen_data(gcfg, gen_out);
        }
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRunFailure;
    }
    return kExitConfigError;
}
