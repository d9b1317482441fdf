#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "clam/simplex.hpp"

namespace clam {

/// Fixed-shape sample set. Features are stored flat, row-major; when the data
/// is image-shaped, height/width/channels are set and dim == h * w * c.
struct Dataset {
    std::size_t n_classes = 0;
    std::size_t dim = 0;
    std::size_t height = 0, width = 0, channels = 0;
    std::vector<double> features;
    std::vector<int> labels;
    std::string split;

    std::size_t size() const { return labels.size(); }
    bool is_image() const { return height > 0 && width > 0 && channels > 0; }
    const double *row(std::size_t i) const { return features.data() + i * dim; }

    void validate() const;
};

enum class AugmentKind { None, RandomResizedCrop, ColorJitter };

/// Training-time augmentation. RandomResizedCrop keeps a square region whose
/// area fraction is uniform in [crop_lower_bound, 1] at a uniform location,
/// then resizes back bilinearly. ColorJitter draws multiplicative brightness
/// and contrast factors, and a saturation factor on 3-channel images
/// (saturation is a no-op on grayscale). Outputs stay in [0, 1].
struct AugmentationSpec {
    AugmentKind kind = AugmentKind::None;
    double crop_lower_bound = 1.0;       // in (0, 1]
    double brightness = 0.0;             // >= 0
    double contrast = 0.0;               // >= 0
    double saturation = 0.0;             // >= 0

    void validate() const;
    bool active() const { return kind != AugmentKind::None; }
};

/// Parses a pair of IDX files (big-endian; image magic 2051, label magic
/// 2049). Pixels are scaled to [0, 1]. Wrong magic, truncation, and
/// image/label count mismatch raise distinct parse errors.
Dataset load_idx(const std::string &images_path, const std::string &labels_path);

/// CSV with a header row; the last column is the integer label, the rest are
/// real features. n_classes is inferred as max label + 1 unless given.
Dataset load_csv(const std::string &path, std::size_t n_classes = 0);
void save_csv(const Dataset &ds, const std::string &path);

struct OverlapPair {
    std::size_t a = 0, b = 0;
    double overlap = 0.0;  // 0 = untouched, 1 = means collapse to the midpoint
};

/// Gaussian-blob benchmark: unit-covariance blobs with means at
/// separation * e_{pos_i} (vertices of a scaled simplex). Overlapping pairs
/// have their means pulled toward the shared midpoint, creating classes with
/// controllable Bayes error. Deterministic under seed; returns disjoint
/// train/test splits drawn from the same distribution.
struct SyntheticConfig {
    std::size_t n_classes = 5;
    std::size_t dim = 16;
    std::size_t train_per_class = 1000;
    std::size_t test_per_class = 500;
    double separation = 10.0;
    std::vector<OverlapPair> overlap_pairs;
    std::vector<std::size_t> mean_positions;  // basis index per class; default 0..n-1
    std::uint64_t seed = 0;
};
std::pair<Dataset, Dataset> gen_synthetic(const SyntheticConfig &cfg);

/// Image analog of the blob benchmark: each class is a Gaussian bright spot
/// at a class-specific location (default placement mixes edge-adjacent and
/// central spots, so cropping hits classes unevenly) over pixel noise,
/// clamped to [0, 1].
struct SyntheticImageConfig {
    std::size_t n_classes = 5;
    std::size_t height = 10;
    std::size_t width = 10;
    std::size_t train_per_class = 1000;
    std::size_t test_per_class = 500;
    double spot_sigma = 1.2;
    double amplitude = 0.8;
    double background = 0.1;
    double noise = 0.1;
    double center_jitter = 0.5;  // per-sample uniform jitter of the spot center
    std::vector<std::pair<double, double>> spot_centers;  // (row, col); default spread
    std::vector<double> spot_sigmas;  // per-class spot size; overrides spot_sigma
    std::uint64_t seed = 0;
};
std::pair<Dataset, Dataset> gen_synthetic_images(const SyntheticImageConfig &cfg);

/// Applies the augmentation to one image sample (flat pixels, h*w*c). Shape
/// is preserved and values are clamped to [0, 1].
Vec augment(const Vec &pixels, std::size_t h, std::size_t w, std::size_t c,
            const AugmentationSpec &spec, std::mt19937_64 &rng);

}  // namespace clam
