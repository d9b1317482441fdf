#include "clam/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace clam {

namespace {

std::string trim(const std::string &s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string compact_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

void write_text_file(const fs::path &path, const std::string &content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

ConfigFile ConfigFile::parse_string(const std::string &text) {
    ConfigFile cfg;
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " +
                                        std::to_string(line_no));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config: empty key at line " +
                                                     std::to_string(line_no));
        if (cfg.values_.count(key))
            throw std::invalid_argument("config: duplicate key " + key);
        cfg.values_[key] = value;
    }
    return cfg;
}

bool ConfigFile::has(const std::string &key) const {
    const bool present = values_.count(key) > 0;
    if (present) consumed_[key] = true;
    return present;
}

std::string ConfigFile::get_string(const std::string &key, const std::string &fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_[key] = true;
    return it->second;
}

double ConfigFile::get_double(const std::string &key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_[key] = true;
    try {
        return std::stod(it->second);
    } catch (const std::exception &) {
        throw std::invalid_argument("config: " + key + " must be a number");
    }
}

std::size_t ConfigFile::get_size(const std::string &key, std::size_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_[key] = true;
    try {
        const long long v = std::stoll(it->second);
        if (v < 0) throw std::invalid_argument("negative");
        return static_cast<std::size_t>(v);
    } catch (const std::exception &) {
        throw std::invalid_argument("config: " + key + " must be a nonnegative integer");
    }
}

bool ConfigFile::get_bool(const std::string &key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_[key] = true;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::invalid_argument("config: " + key + " must be true or false");
}

std::vector<double> ConfigFile::get_double_list(const std::string &key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return {};
    consumed_[key] = true;
    std::vector<double> out;
    for (const std::string &item : split(it->second, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception &) {
            throw std::invalid_argument("config: " + key + " must be a comma list of numbers");
        }
    }
    return out;
}

std::vector<std::string> ConfigFile::get_string_list(const std::string &key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return {};
    consumed_[key] = true;
    return split(it->second, ',');
}

void ConfigFile::check_all_consumed() const {
    for (const auto &[key, value] : values_)
        if (!consumed_.count(key)) throw std::invalid_argument("config: unknown key " + key);
}

ExperimentConfig ExperimentConfig::from_config(const ConfigFile &cfg) {
    ExperimentConfig out;

    const std::string source = cfg.get_string("dataset.source", "synthetic");
    if (source == "synthetic") {
        out.source = DataSource::Synthetic;
    } else if (source == "synthetic_images") {
        out.source = DataSource::SyntheticImages;
    } else if (source == "idx") {
        out.source = DataSource::Idx;
    } else if (source == "csv") {
        out.source = DataSource::Csv;
    } else {
        throw std::invalid_argument("config: unknown dataset.source " + source);
    }

    if (cfg.has("dataset.seed"))
        out.dataset_seed = cfg.get_size("dataset.seed", 0);
    out.synthetic.n_classes = cfg.get_size("dataset.n_classes", 5);
    out.synthetic.dim = cfg.get_size("dataset.dim", 16);
    out.synthetic.train_per_class = cfg.get_size("dataset.train_per_class", 1000);
    out.synthetic.test_per_class = cfg.get_size("dataset.test_per_class", 500);
    out.synthetic.separation = cfg.get_double("dataset.separation", 10.0);
    for (const std::string &item : cfg.get_string_list("dataset.overlap_pairs")) {
        const auto parts = split(item, ':');
        if (parts.size() != 3)
            throw std::invalid_argument("config: dataset.overlap_pairs items must be a:b:overlap");
        OverlapPair pair;
        pair.a = static_cast<std::size_t>(std::stoull(parts[0]));
        pair.b = static_cast<std::size_t>(std::stoull(parts[1]));
        pair.overlap = std::stod(parts[2]);
        out.synthetic.overlap_pairs.push_back(pair);
    }

    out.synthetic_images.n_classes = out.synthetic.n_classes;
    out.synthetic_images.train_per_class = out.synthetic.train_per_class;
    out.synthetic_images.test_per_class = out.synthetic.test_per_class;
    out.synthetic_images.height = cfg.get_size("dataset.height", 10);
    out.synthetic_images.width = cfg.get_size("dataset.width", 10);
    out.synthetic_images.spot_sigma = cfg.get_double("dataset.spot_sigma", 1.2);
    out.synthetic_images.amplitude = cfg.get_double("dataset.amplitude", 0.8);
    out.synthetic_images.background = cfg.get_double("dataset.background", 0.1);
    out.synthetic_images.noise = cfg.get_double("dataset.noise", 0.1);
    out.synthetic_images.center_jitter = cfg.get_double("dataset.center_jitter", 0.5);
    for (const std::string &item : cfg.get_string_list("dataset.spot_centers")) {
        const auto parts = split(item, ':');
        if (parts.size() != 2)
            throw std::invalid_argument("config: dataset.spot_centers items must be row:col");
        out.synthetic_images.spot_centers.emplace_back(std::stod(parts[0]), std::stod(parts[1]));
    }
    out.synthetic_images.spot_sigmas = cfg.get_double_list("dataset.spot_sigmas");

    out.idx_images = cfg.get_string("dataset.images", "");
    out.idx_labels = cfg.get_string("dataset.labels", "");
    out.idx_test_images = cfg.get_string("dataset.test_images", "");
    out.idx_test_labels = cfg.get_string("dataset.test_labels", "");
    out.train_csv = cfg.get_string("dataset.train_csv", "");
    out.test_csv = cfg.get_string("dataset.test_csv", "");

    const std::string aug = cfg.get_string("augment.kind", "none");
    if (aug == "none") {
        out.augment_kind = AugmentKind::None;
    } else if (aug == "crop") {
        out.augment_kind = AugmentKind::RandomResizedCrop;
        out.crop_lower_bounds = cfg.get_double_list("augment.crop_lower_bounds");
        if (out.crop_lower_bounds.empty())
            out.crop_lower_bounds.push_back(cfg.get_double("augment.crop_lower_bound", 0.8));
    } else if (aug == "jitter") {
        out.augment_kind = AugmentKind::ColorJitter;
        out.brightness = cfg.get_double("augment.brightness", 0.4);
        out.contrast = cfg.get_double("augment.contrast", 0.4);
        out.saturation = cfg.get_double("augment.saturation", 0.0);
    } else {
        throw std::invalid_argument("config: unknown augment.kind " + aug);
    }

    out.train.epochs = cfg.get_size("train.epochs", 40);
    out.train.iters_per_epoch = cfg.get_size("train.iters_per_epoch", 0);
    out.train.batch_size = cfg.get_size("train.batch_size", 128);
    out.train.learning_rate = cfg.get_double("train.lr", 0.1);
    out.train.full_pass_train_acc = cfg.get_bool("train.full_pass_acc", false);
    out.train.arch = architecture_from_string(cfg.get_string("model.kind", "mlp"));
    out.train.hidden = cfg.get_size("model.hidden", 64);

    std::vector<std::string> method_names = cfg.get_string_list("methods");
    if (method_names.empty()) method_names = {"normal"};
    for (const std::string &name : method_names) {
        switch (loss_variant_from_string(name)) {
            case LossVariant::Normal: out.methods.push_back(LossSpec::normal()); break;
            case LossVariant::Focal:
                out.methods.push_back(LossSpec::focal(cfg.get_double("focal.gamma", 2.0)));
                break;
            case LossVariant::TCE:
                out.methods.push_back(LossSpec::tce(cfg.get_double("tce.gamma", 0.5)));
                break;
            case LossVariant::PW:
                out.methods.push_back(LossSpec::pw(cfg.get_double("pw.gamma", 2.5),
                                                   cfg.get_double("pw.theta", 0.8)));
                break;
            case LossVariant::GGF:
                out.methods.push_back(LossSpec::ggf(cfg.get_double("ggf.alpha", 0.9),
                                                    cfg.get_double("ggf.w_min", 0.1),
                                                    cfg.get_size("ggf.f", 1)));
                break;
            case LossVariant::CLAM:
                out.methods.push_back(LossSpec::clam(
                    cfg.get_double("clam.tau", 1.0), cfg.get_double("clam.u_min", -1.0),
                    projection_from_string(cfg.get_string("clam.projection", "scaled_clip"))));
                break;
        }
    }

    for (double s : cfg.get_double_list("seeds"))
        out.seeds.push_back(static_cast<std::uint64_t>(s));
    if (out.seeds.empty()) out.seeds.push_back(0);

    out.output_dir = cfg.get_string("output_dir", "out");
    out.workers = cfg.get_size("workers", 1);
    cfg.check_all_consumed();
    out.validate();
    return out;
}

void ExperimentConfig::validate() const {
    if (methods.empty()) throw std::invalid_argument("config: no methods");
    if (seeds.empty()) throw std::invalid_argument("config: no seeds");
    if (workers == 0) throw std::invalid_argument("config: workers must be >= 1");
    train.validate();

    for (const LossSpec &m : methods) {
        m.validate();
        if (m.variant == LossVariant::CLAM) {
            if (!(m.clam_tau > 0.0))
                throw std::invalid_argument("config: clam.tau must be > 0");
        }
    }
    if (augment_kind == AugmentKind::RandomResizedCrop) {
        if (crop_lower_bounds.empty())
            throw std::invalid_argument("config: crop sweep needs at least one lower bound");
        for (double c : crop_lower_bounds)
            if (!(c > 0.0 && c <= 1.0))
                throw std::invalid_argument("config: crop lower bounds must be in (0,1]");
        if (source == DataSource::Synthetic || source == DataSource::Csv)
            throw std::invalid_argument("config: cropping requires image data");
    }
    if (augment_kind == AugmentKind::ColorJitter &&
        (brightness < 0.0 || contrast < 0.0 || saturation < 0.0))
        throw std::invalid_argument("config: jitter strengths must be >= 0");

    if (source == DataSource::Synthetic || source == DataSource::SyntheticImages) {
        if (synthetic.n_classes < 2)
            throw std::invalid_argument("config: need at least two classes");
        if (synthetic.train_per_class == 0 || synthetic.test_per_class == 0)
            throw std::invalid_argument("config: empty dataset");
    }
    if (source == DataSource::Idx && (idx_images.empty() || idx_labels.empty()))
        throw std::invalid_argument("config: idx source needs dataset.images and dataset.labels");
    if (source == DataSource::Idx && idx_test_images.empty() != idx_test_labels.empty())
        throw std::invalid_argument(
            "config: dataset.test_images and dataset.test_labels go together");
    if (source == DataSource::Csv && (train_csv.empty() || test_csv.empty()))
        throw std::invalid_argument("config: csv source needs dataset.train_csv and dataset.test_csv");
}

namespace {

// Rejects method/data combinations that only become checkable once n is known.
void validate_against_data(const ExperimentConfig &config, const Dataset &train) {
    const double n = static_cast<double>(train.n_classes);
    for (const LossSpec &m : config.methods) {
        if (m.variant != LossVariant::CLAM) continue;
        const double u_min = m.clam_u_min < 0.0 ? 1.0 / (2.0 * n) : m.clam_u_min;
        if (n * u_min > 1.0 + 1e-12)
            throw std::invalid_argument("config: infeasible simplex, n*u_min > 1");
        RestrictedSimplex probe(train.n_classes, u_min);  // validates the rest
        (void)probe;
    }
    if (config.augment_kind == AugmentKind::RandomResizedCrop && !train.is_image())
        throw std::invalid_argument("config: cropping requires image data");
}

std::string augment_tag(const AugmentationSpec &spec) {
    switch (spec.kind) {
        case AugmentKind::None: return "none";
        case AugmentKind::RandomResizedCrop: return "crop" + compact_double(spec.crop_lower_bound);
        case AugmentKind::ColorJitter:
            return "jitter" + compact_double(spec.brightness) + "-" +
                   compact_double(spec.contrast) + "-" + compact_double(spec.saturation);
    }
    return "none";
}

json augment_json(const AugmentationSpec &spec) {
    json j;
    switch (spec.kind) {
        case AugmentKind::None: j["kind"] = "none"; break;
        case AugmentKind::RandomResizedCrop:
            j["kind"] = "crop";
            j["crop_lower_bound"] = spec.crop_lower_bound;
            break;
        case AugmentKind::ColorJitter:
            j["kind"] = "jitter";
            j["brightness"] = spec.brightness;
            j["contrast"] = spec.contrast;
            j["saturation"] = spec.saturation;
            break;
    }
    return j;
}

struct RunJob {
    LossSpec method;
    std::uint64_t seed = 0;
    AugmentationSpec augment;
    std::string name;
};

struct RunOutput {
    TrainResult result;
    FairnessReport test_report;
    FairnessReport train_report;
    std::string error;
};

std::pair<Dataset, Dataset> make_dataset(const ExperimentConfig &config, std::uint64_t run_seed,
                                         const Dataset *fixed_train, const Dataset *fixed_test) {
    switch (config.source) {
        case DataSource::Synthetic: {
            SyntheticConfig c = config.synthetic;
            c.seed = config.dataset_seed.value_or(run_seed);
            return gen_synthetic(c);
        }
        case DataSource::SyntheticImages: {
            SyntheticImageConfig c = config.synthetic_images;
            c.seed = config.dataset_seed.value_or(run_seed);
            return gen_synthetic_images(c);
        }
        default: return {*fixed_train, *fixed_test};
    }
}

}  // namespace

std::string train_result_json(const TrainResult &result, const std::string &method_name,
                              std::uint64_t seed, const AugmentationSpec &augment) {
    json j;
    j["method"] = method_name;
    j["seed"] = seed;
    j["augment"] = augment_json(augment);

    json cfg;
    cfg["epochs"] = result.config.epochs;
    cfg["iters_per_epoch"] = result.config.iters_per_epoch;
    cfg["batch_size"] = result.config.batch_size;
    cfg["learning_rate"] = result.config.learning_rate;
    cfg["arch"] = to_string(result.config.arch);
    cfg["hidden"] = result.config.hidden;
    cfg["full_pass_train_acc"] = result.config.full_pass_train_acc;
    const LossSpec &m = result.method;
    switch (m.variant) {
        case LossVariant::Focal: cfg["gamma"] = m.gamma; break;
        case LossVariant::TCE: cfg["gamma"] = m.gamma; break;
        case LossVariant::PW:
            cfg["gamma"] = m.gamma;
            cfg["theta_pw"] = m.theta_pw;
            break;
        case LossVariant::GGF:
            cfg["ggf_alpha"] = m.ggf_alpha;
            cfg["ggf_w_min"] = m.ggf_w_min;
            cfg["ggf_f"] = m.ggf_f;
            break;
        case LossVariant::CLAM:
            cfg["clam_tau"] = m.clam_tau;
            cfg["clam_u_min"] = m.clam_u_min;
            cfg["clam_projection"] = to_string(m.clam_projection);
            break;
        default: break;
    }
    j["config"] = cfg;

    json epochs = json::array();
    for (const EpochRecord &rec : result.epochs) {
        json e;
        e["epoch"] = rec.epoch;
        e["w"] = rec.class_weights;
        e["train_acc"] = rec.train_acc;
        e["test_acc"] = rec.test_acc;
        e["mean_loss"] = rec.mean_loss;
        epochs.push_back(std::move(e));
    }
    j["per_epoch"] = std::move(epochs);

    const EpochRecord &last = result.epochs.back();
    j["final"]["train_report"] = json::parse(report_json(fairness_report(last.train_acc)));
    j["final"]["test_report"] = json::parse(report_json(fairness_report(last.test_acc)));
    return j.dump(2);
}

namespace {

std::string curves_csv(const TrainResult &result) {
    const std::size_t n = result.epochs.front().test_acc.size();
    std::ostringstream os;
    os.precision(10);
    os << "epoch,mean_loss,test_std,test_cov,test_range,test_mean,test_worst";
    for (std::size_t i = 0; i < n; ++i) os << ",w_" << i;
    for (std::size_t i = 0; i < n; ++i) os << ",train_acc_" << i;
    for (std::size_t i = 0; i < n; ++i) os << ",test_acc_" << i;
    os << "\n";
    for (const EpochRecord &rec : result.epochs) {
        const FairnessReport rep = fairness_report(rec.test_acc);
        os << rec.epoch << ',' << rec.mean_loss << ',' << rep.stddev << ',' << rep.cov << ','
           << rep.range << ',' << rep.mean << ',' << rep.worst_fraction_acc;
        for (double x : rec.class_weights) os << ',' << x;
        for (double x : rec.train_acc) os << ',' << x;
        for (double x : rec.test_acc) os << ',' << x;
        os << "\n";
    }
    return os.str();
}

}  // namespace

int cmd_train(const ExperimentConfig &config) {
    config.validate();

    // Fixed (file-based) datasets are loaded once and shared across runs.
    Dataset fixed_train, fixed_test;
    if (config.source == DataSource::Idx) {
        fixed_train = load_idx(config.idx_images, config.idx_labels);
        fixed_test = config.idx_test_images.empty()
                         ? fixed_train  // no held-out pair configured
                         : load_idx(config.idx_test_images, config.idx_test_labels);
        if (fixed_test.n_classes < fixed_train.n_classes)
            fixed_test.n_classes = fixed_train.n_classes;
        else if (fixed_train.n_classes < fixed_test.n_classes)
            fixed_train.n_classes = fixed_test.n_classes;
    } else if (config.source == DataSource::Csv) {
        fixed_train = load_csv(config.train_csv);
        fixed_test = load_csv(config.test_csv, fixed_train.n_classes);
    }
    if (config.source == DataSource::Idx || config.source == DataSource::Csv)
        validate_against_data(config, fixed_train);
    else {
        // Probe a tiny generation to validate shapes and method feasibility
        // before launching the pool.
        ExperimentConfig probe = config;
        probe.synthetic.train_per_class = 1;
        probe.synthetic.test_per_class = 1;
        probe.synthetic_images.train_per_class = 1;
        probe.synthetic_images.test_per_class = 1;
        auto [ptrain, ptest] = make_dataset(probe, config.seeds.front(), nullptr, nullptr);
        validate_against_data(config, ptrain);
    }

    std::vector<AugmentationSpec> aug_specs;
    if (config.augment_kind == AugmentKind::None) {
        aug_specs.push_back(AugmentationSpec{});
    } else if (config.augment_kind == AugmentKind::RandomResizedCrop) {
        for (double c : config.crop_lower_bounds) {
            AugmentationSpec a;
            a.kind = AugmentKind::RandomResizedCrop;
            a.crop_lower_bound = c;
            aug_specs.push_back(a);
        }
    } else {
        AugmentationSpec a;
        a.kind = AugmentKind::ColorJitter;
        a.brightness = config.brightness;
        a.contrast = config.contrast;
        a.saturation = config.saturation;
        aug_specs.push_back(a);
    }

    std::vector<RunJob> jobs;
    for (const LossSpec &method : config.methods)
        for (std::uint64_t seed : config.seeds)
            for (const AugmentationSpec &aug : aug_specs) {
                RunJob job;
                job.method = method;
                job.seed = seed;
                job.augment = aug;
                job.name = to_string(method.variant) + "_seed" + std::to_string(seed) + "_" +
                           augment_tag(aug);
                jobs.push_back(std::move(job));
            }

    std::vector<RunOutput> outputs(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const RunJob &job = jobs[i];
            try {
                auto [train, test] = make_dataset(config, job.seed, &fixed_train, &fixed_test);
                TrainConfig tcfg = config.train;
                tcfg.seed = job.seed;
                tcfg.augmentation = job.augment;
                TrainResult result = train_run(train, test, tcfg, job.method);
                const EpochRecord &last = result.epochs.back();
                outputs[i].test_report = fairness_report(last.test_acc);
                outputs[i].train_report = fairness_report(last.train_acc);
                outputs[i].result = std::move(result);
            } catch (const std::exception &e) {
                outputs[i].error = e.what();
            }
        }
    };
    const std::size_t pool = std::min<std::size_t>(std::max<std::size_t>(config.workers, 1),
                                                   jobs.size());
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (std::size_t i = 0; i < pool; ++i) threads.emplace_back(worker);
    for (std::thread &t : threads) t.join();

    bool failed = false;
    for (std::size_t i = 0; i < jobs.size(); ++i)
        if (!outputs[i].error.empty()) {
            std::cerr << "run " << jobs[i].name << " failed: " << outputs[i].error << "\n";
            failed = true;
        }
    if (failed) return kExitRunFailure;  // no partial aggregate

    // All runs succeeded; write per-run artifacts, the per-run metric rows,
    // and the per-method aggregate.
    const fs::path out_dir(config.output_dir);
    fs::create_directories(out_dir);

    std::ostringstream runs_csv;
    runs_csv << "run,method,seed,augment,std,cov,range,mean_acc,worst_acc\n";
    std::map<std::string, std::vector<FairnessReport>> by_method;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const RunJob &job = jobs[i];
        const RunOutput &out = outputs[i];
        const fs::path run_dir = out_dir / job.name;
        fs::create_directories(run_dir);
        write_text_file(run_dir / "run.json",
                        train_result_json(out.result, to_string(job.method.variant), job.seed,
                                          job.augment));
        write_text_file(run_dir / "metrics.csv",
                        report_csv_header("run") + "\n" +
                            report_csv_row(job.name, out.test_report) + "\n");
        write_text_file(run_dir / "curves.csv", curves_csv(out.result));

        std::ostringstream row;
        row.precision(10);
        row << job.name << ',' << to_string(job.method.variant) << ',' << job.seed << ','
            << augment_tag(job.augment) << ',' << out.test_report.stddev << ','
            << out.test_report.cov << ',' << out.test_report.range << ',' << out.test_report.mean
            << ',' << out.test_report.worst_fraction_acc;
        runs_csv << row.str() << "\n";
        by_method[to_string(job.method.variant)].push_back(out.test_report);
    }
    write_text_file(out_dir / "runs.csv", runs_csv.str());

    std::ostringstream agg;
    agg.precision(10);
    agg << "method,std_mean,std_std,cov_mean,cov_std,range_mean,range_std,"
           "mean_acc_mean,mean_acc_std,worst_acc_mean,worst_acc_std\n";
    for (const LossSpec &method : config.methods) {
        const std::string name = to_string(method.variant);
        const AggregateReport a = aggregate(by_method.at(name));
        agg << name << ',' << a.stddev.mean << ',' << a.stddev.stddev << ',' << a.cov.mean << ','
            << a.cov.stddev << ',' << a.range.mean << ',' << a.range.stddev << ',' << a.mean.mean
            << ',' << a.mean.stddev << ',' << a.worst_fraction_acc.mean << ','
            << a.worst_fraction_acc.stddev << "\n";
    }
    write_text_file(out_dir / "aggregate.csv", agg.str());
    std::cout << "wrote " << jobs.size() << " runs to " << out_dir.string() << "\n";
    return kExitOk;
}

int cmd_game(const GameOptions &options) {
    RestrictedSimplex s(options.n, options.u_min);

    PayoffMatrix M = [&]() {
        if (options.matrix_file.empty())
            return PayoffMatrix::random(options.n, options.m, options.seed);
        // Plain CSV, n rows of m entries, no header.
        std::ifstream in(options.matrix_file);
        if (!in) throw std::invalid_argument("game: cannot open " + options.matrix_file);
        std::vector<double> entries;
        std::string line;
        std::size_t rows = 0, cols = 0;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            const auto cells = split(line, ',');
            if (cols == 0) cols = cells.size();
            if (cells.size() != cols)
                throw std::invalid_argument("game: ragged matrix file " + options.matrix_file);
            for (const std::string &cell : cells) entries.push_back(std::stod(cell));
            ++rows;
        }
        return PayoffMatrix(rows, cols, std::move(entries));
    }();

    if (M.n != options.n) throw std::invalid_argument("game: matrix rows do not match n");

    MWConfig cfg;
    cfg.projection = Projection::ProofClip;
    double alpha_estimate = 0.0;
    if (options.theorem_tau) {
        // Two-pass: measure the clipping activity at tau = 1, then rerun at
        // the rate the bound prescribes for that activity level.
        cfg.tau = 1.0;
        GameTrace probe = run_mw_game(M, options.T, cfg, s);
        alpha_estimate = verify_regret_bound(probe, s, cfg.tau).max_alpha;
        cfg.tau = options.T > 0 ? tau_theorem(options.n, options.T, alpha_estimate) : 1.0;
    } else {
        if (!(options.tau > 0.0)) throw std::invalid_argument("game: tau must be > 0");
        cfg.tau = options.tau;
    }

    GameTrace trace = run_mw_game(M, options.T, cfg, s);
    RegretDiagnostics diag = verify_regret_bound(trace, s, cfg.tau);

    const fs::path out_dir(options.output_dir);
    fs::create_directories(out_dir);
    {
        std::ofstream trace_out(out_dir / "trace.csv");
        if (!trace_out) throw std::runtime_error("game: cannot write trace.csv");
        write_trace_csv(trace, trace_out);
    }
    json j = json::parse(diagnostics_json(diag, trace));
    if (options.theorem_tau) {
        j["theorem_mode"] = true;
        j["alpha_estimate"] = alpha_estimate;
    }
    write_text_file(out_dir / "diagnostics.json", j.dump(2));

    std::cout << "T=" << trace.epochs() << " tau=" << cfg.tau << " lhs=" << diag.lhs
              << " best_fixed=" << diag.best_fixed << " rhs_theorem=" << diag.rhs_theorem
              << " max_alpha=" << diag.max_alpha
              << " per_step_violations=" << diag.per_step_violations << "\n";
    return diag.per_step_violations == 0 ? kExitOk : kExitTheoremViolation;
}

int cmd_report(const std::vector<std::string> &run_dirs, const std::string &output_dir) {
    if (run_dirs.empty()) throw std::invalid_argument("report: need at least one run dir");

    struct Entry {
        std::string method;
        std::uint64_t seed = 0;
        std::string augment;
        bool with_da = false;
        double range = 0.0;
        double worst = 0.0;
        std::size_t classes = 0;
    };
    std::vector<Entry> entries;
    for (const std::string &dir : run_dirs) {
        const fs::path path = fs::path(dir) / "run.json";
        std::ifstream in(path);
        if (!in) {
            std::cerr << "report: skipping " << dir << " (no run.json)\n";
            continue;
        }
        json j = json::parse(in);
        Entry e;
        e.method = j.at("method").get<std::string>();
        e.seed = j.at("seed").get<std::uint64_t>();
        const json &aug = j.at("augment");
        e.with_da = aug.at("kind").get<std::string>() != "none";
        e.augment = e.with_da ? (aug.contains("crop_lower_bound")
                                     ? "crop" + compact_double(aug["crop_lower_bound"].get<double>())
                                     : aug.at("kind").get<std::string>())
                              : "none";
        const json &rep = j.at("final").at("test_report");
        e.range = rep.at("range").get<double>();
        e.worst = rep.at("worst_fraction_acc").get<double>();
        e.classes = rep.at("per_class").size();
        entries.push_back(std::move(e));
    }

    std::map<std::pair<std::string, std::uint64_t>, std::vector<const Entry *>> groups;
    for (const Entry &e : entries) groups[{e.method, e.seed}].push_back(&e);

    std::ostringstream diff_csv, worst_csv;
    diff_csv << "method,seed,augment,range_with,range_without,range_diff\n";
    worst_csv << "method,seed,augment,worst_with,worst_without\n";
    diff_csv.precision(10);
    worst_csv.precision(10);
    std::map<std::string, std::vector<double>> diff_by_method;
    std::size_t pairs = 0;

    for (const auto &[key, members] : groups) {
        const Entry *without = nullptr;
        std::vector<const Entry *> withs;
        for (const Entry *e : members) {
            if (e->with_da)
                withs.push_back(e);
            else
                without = e;
        }
        if (!without || withs.empty()) {
            std::cerr << "report: unpaired runs for method=" << key.first
                      << " seed=" << key.second << ", skipped\n";
            continue;
        }
        for (const Entry *w : withs) {
            if (w->classes != without->classes) {
                std::cerr << "report: class-count mismatch for method=" << key.first
                          << " seed=" << key.second << ", skipped\n";
                continue;
            }
            const double diff = w->range - without->range;
            diff_csv << key.first << ',' << key.second << ',' << w->augment << ',' << w->range
                     << ',' << without->range << ',' << diff << "\n";
            worst_csv << key.first << ',' << key.second << ',' << w->augment << ',' << w->worst
                      << ',' << without->worst << "\n";
            diff_by_method[key.first].push_back(diff);
            ++pairs;
        }
    }
    if (pairs == 0) {
        std::cerr << "report: no with/without augmentation pairs found\n";
        return kExitConfigError;
    }

    std::ostringstream agg;
    agg.precision(10);
    agg << "method,range_diff_mean,range_diff_std\n";
    for (const auto &[method, diffs] : diff_by_method) {
        const MeanStd ms = aggregate(diffs);
        agg << method << ',' << ms.mean << ',' << ms.stddev << "\n";
    }

    const fs::path out_dir(output_dir);
    fs::create_directories(out_dir);
    write_text_file(out_dir / "range_difference.csv", diff_csv.str());
    write_text_file(out_dir / "worst_class.csv", worst_csv.str());
    write_text_file(out_dir / "range_difference_aggregate.csv", agg.str());
    std::cout << "wrote report for " << pairs << " pairs to " << out_dir.string() << "\n";
    return kExitOk;
}

int cmd_gen_data(const SyntheticConfig &config, const std::string &output_dir) {
    auto [train, test] = gen_synthetic(config);
    const fs::path out_dir(output_dir);
    fs::create_directories(out_dir);
    save_csv(train, (out_dir / "train.csv").string());
    save_csv(test, (out_dir / "test.csv").string());
    std::cout << "wrote " << (out_dir / "train.csv").string() << " (" << train.size()
              << " rows) and " << (out_dir / "test.csv").string() << " (" << test.size()
              << " rows)\n";
    return kExitOk;
}

}  // namespace clam
