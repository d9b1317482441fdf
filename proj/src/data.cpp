#include "clam/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace clam {

namespace {

std::uint32_t read_u32_be(std::istream &is, const std::string &path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char *>(b), 4))
        throw std::runtime_error("idx: truncated file: " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

std::vector<std::pair<double, double>> default_spot_centers(std::size_t n, std::size_t h,
                                                            std::size_t w) {
    // Alternate edge-adjacent and interior placements so that random cropping
    // hits some classes much harder than others.
    const double hh = static_cast<double>(h);
    const double ww = static_cast<double>(w);
    std::vector<std::pair<double, double>> centers;
    centers.reserve(n);
    const std::vector<std::pair<double, double>> anchors = {
        {1.0, 1.0},                 // corner
        {hh / 2.0, ww / 2.0},       // center
        {1.0, ww - 2.0},            // corner
        {hh / 2.0, 1.0},            // edge
        {hh - 2.0, ww / 2.0},       // edge
        {hh - 2.0, ww - 2.0},       // corner
        {hh / 2.0, ww - 2.0},       // edge
        {hh / 3.0, ww / 3.0},       // interior
    };
    for (std::size_t i = 0; i < n; ++i) centers.push_back(anchors[i % anchors.size()]);
    return centers;
}

}  // namespace

void Dataset::validate() const {
    if (n_classes < 1) throw std::invalid_argument("Dataset: n_classes must be >= 1");
    if (dim == 0) throw std::invalid_argument("Dataset: dim must be > 0");
    if (features.size() != labels.size() * dim)
        throw std::invalid_argument("Dataset: feature/label size mismatch");
    if (is_image() && height * width * channels != dim)
        throw std::invalid_argument("Dataset: image shape does not match dim");
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= n_classes)
            throw std::invalid_argument("Dataset: label out of range");
}

void AugmentationSpec::validate() const {
    switch (kind) {
        case AugmentKind::None: break;
        case AugmentKind::RandomResizedCrop:
            if (!(crop_lower_bound > 0.0 && crop_lower_bound <= 1.0))
                throw std::invalid_argument("AugmentationSpec: crop_lower_bound must be in (0,1]");
            break;
        case AugmentKind::ColorJitter:
            if (brightness < 0.0 || contrast < 0.0 || saturation < 0.0)
                throw std::invalid_argument("AugmentationSpec: jitter factors must be >= 0");
            break;
    }
}

Dataset load_idx(const std::string &images_path, const std::string &labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("idx: cannot open " + images_path);
    const std::uint32_t img_magic = read_u32_be(img, images_path);
    if (img_magic != 0x00000803u)
        throw std::runtime_error("idx: wrong magic in image file " + images_path);
    const std::uint32_t count = read_u32_be(img, images_path);
    const std::uint32_t rows = read_u32_be(img, images_path);
    const std::uint32_t cols = read_u32_be(img, images_path);

    const std::size_t pixels = std::size_t(count) * rows * cols;
    std::vector<unsigned char> raw(pixels);
    if (!img.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(pixels)))
        throw std::runtime_error("idx: truncated image data in " + images_path);

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("idx: cannot open " + labels_path);
    const std::uint32_t lab_magic = read_u32_be(lab, labels_path);
    if (lab_magic != 0x00000801u)
        throw std::runtime_error("idx: wrong magic in label file " + labels_path);
    const std::uint32_t lab_count = read_u32_be(lab, labels_path);
    if (lab_count != count)
        throw std::runtime_error("idx: image/label count mismatch between " + images_path +
                                 " and " + labels_path);
    std::vector<unsigned char> raw_labels(lab_count);
    if (!lab.read(reinterpret_cast<char *>(raw_labels.data()),
                  static_cast<std::streamsize>(lab_count)))
        throw std::runtime_error("idx: truncated label data in " + labels_path);

    Dataset ds;
    ds.height = rows;
    ds.width = cols;
    ds.channels = 1;
    ds.dim = std::size_t(rows) * cols;
    ds.features.resize(pixels);
    for (std::size_t i = 0; i < pixels; ++i) ds.features[i] = raw[i] / 255.0;
    ds.labels.assign(raw_labels.begin(), raw_labels.end());
    int max_label = 0;
    for (int y : ds.labels) max_label = std::max(max_label, y);
    ds.n_classes = static_cast<std::size_t>(max_label) + 1;
    ds.validate();
    return ds;
}

Dataset load_csv(const std::string &path, std::size_t n_classes) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: missing header in " + path);

    std::size_t columns = 1;
    for (char ch : line)
        if (ch == ',') ++columns;
    if (columns < 2) throw std::runtime_error("csv: need at least one feature column in " + path);

    Dataset ds;
    ds.dim = columns - 1;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(ss, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception &) {
                throw std::runtime_error("csv: non-numeric cell at line " +
                                         std::to_string(line_no) + " in " + path);
            }
        }
        if (values.size() != columns)
            throw std::runtime_error("csv: wrong column count at line " + std::to_string(line_no) +
                                     " in " + path);
        const double label_value = values.back();
        const int label = static_cast<int>(std::llround(label_value));
        if (std::abs(label_value - label) > 1e-9 || label < 0)
            throw std::runtime_error("csv: label must be a nonnegative integer at line " +
                                     std::to_string(line_no) + " in " + path);
        ds.features.insert(ds.features.end(), values.begin(), values.end() - 1);
        ds.labels.push_back(label);
    }
    if (ds.labels.empty()) throw std::runtime_error("csv: no data rows in " + path);
    int max_label = 0;
    for (int y : ds.labels) max_label = std::max(max_label, y);
    ds.n_classes = n_classes > 0 ? n_classes : static_cast<std::size_t>(max_label) + 1;
    ds.validate();
    return ds;
}

void save_csv(const Dataset &ds, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("csv: cannot write " + path);
    for (std::size_t j = 0; j < ds.dim; ++j) out << 'f' << j << ',';
    out << "label\n";
    char buf[32];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double *x = ds.row(i);
        for (std::size_t j = 0; j < ds.dim; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", x[j]);
            out << buf << ',';
        }
        out << ds.labels[i] << "\n";
    }
    if (!out) throw std::runtime_error("csv: write failed for " + path);
}

std::pair<Dataset, Dataset> gen_synthetic(const SyntheticConfig &cfg) {
    if (cfg.n_classes < 2) throw std::invalid_argument("gen_synthetic: need n_classes >= 2");
    if (cfg.dim == 0 || cfg.train_per_class == 0 || cfg.test_per_class == 0)
        throw std::invalid_argument("gen_synthetic: all sizes must be positive");

    std::vector<std::size_t> positions = cfg.mean_positions;
    if (positions.empty()) {
        if (cfg.dim < cfg.n_classes)
            throw std::invalid_argument("gen_synthetic: need dim >= n_classes for default means");
        positions.resize(cfg.n_classes);
        for (std::size_t i = 0; i < cfg.n_classes; ++i) positions[i] = i;
    }
    if (positions.size() != cfg.n_classes)
        throw std::invalid_argument("gen_synthetic: one mean position per class required");
    for (std::size_t p : positions)
        if (p >= cfg.dim) throw std::invalid_argument("gen_synthetic: mean position out of range");

    std::vector<Vec> means(cfg.n_classes, Vec(cfg.dim, 0.0));
    for (std::size_t i = 0; i < cfg.n_classes; ++i) means[i][positions[i]] = cfg.separation;
    for (const OverlapPair &pair : cfg.overlap_pairs) {
        if (pair.a >= cfg.n_classes || pair.b >= cfg.n_classes || pair.a == pair.b)
            throw std::invalid_argument("gen_synthetic: bad overlap pair");
        if (!(pair.overlap >= 0.0 && pair.overlap <= 1.0))
            throw std::invalid_argument("gen_synthetic: overlap must be in [0,1]");
        const Vec ma = means[pair.a];
        const Vec mb = means[pair.b];
        for (std::size_t d = 0; d < cfg.dim; ++d) {
            means[pair.a][d] = ma[d] + 0.5 * pair.overlap * (mb[d] - ma[d]);
            means[pair.b][d] = mb[d] + 0.5 * pair.overlap * (ma[d] - mb[d]);
        }
    }

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto draw = [&](std::size_t per_class, const char *split) {
        Dataset ds;
        ds.n_classes = cfg.n_classes;
        ds.dim = cfg.dim;
        ds.split = split;
        ds.features.reserve(per_class * cfg.n_classes * cfg.dim);
        ds.labels.reserve(per_class * cfg.n_classes);
        for (std::size_t cls = 0; cls < cfg.n_classes; ++cls)
            for (std::size_t k = 0; k < per_class; ++k) {
                for (std::size_t d = 0; d < cfg.dim; ++d)
                    ds.features.push_back(means[cls][d] + gauss(rng));
                ds.labels.push_back(static_cast<int>(cls));
            }
        return ds;
    };
    Dataset train = draw(cfg.train_per_class, "train");
    Dataset test = draw(cfg.test_per_class, "test");
    return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> gen_synthetic_images(const SyntheticImageConfig &cfg) {
    if (cfg.n_classes < 2) throw std::invalid_argument("gen_synthetic_images: need n_classes >= 2");
    if (cfg.height < 4 || cfg.width < 4)
        throw std::invalid_argument("gen_synthetic_images: image too small");
    if (cfg.train_per_class == 0 || cfg.test_per_class == 0)
        throw std::invalid_argument("gen_synthetic_images: all sizes must be positive");

    std::vector<std::pair<double, double>> centers =
        cfg.spot_centers.empty() ? default_spot_centers(cfg.n_classes, cfg.height, cfg.width)
                                 : cfg.spot_centers;
    if (centers.size() != cfg.n_classes)
        throw std::invalid_argument("gen_synthetic_images: one spot center per class required");
    std::vector<double> sigmas =
        cfg.spot_sigmas.empty() ? std::vector<double>(cfg.n_classes, cfg.spot_sigma)
                                : cfg.spot_sigmas;
    if (sigmas.size() != cfg.n_classes)
        throw std::invalid_argument("gen_synthetic_images: one spot sigma per class required");
    for (double s : sigmas)
        if (!(s > 0.0)) throw std::invalid_argument("gen_synthetic_images: sigma must be > 0");

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> jitter(-cfg.center_jitter, cfg.center_jitter);

    auto draw = [&](std::size_t per_class, const char *split) {
        Dataset ds;
        ds.n_classes = cfg.n_classes;
        ds.height = cfg.height;
        ds.width = cfg.width;
        ds.channels = 1;
        ds.dim = cfg.height * cfg.width;
        ds.split = split;
        ds.features.reserve(per_class * cfg.n_classes * ds.dim);
        ds.labels.reserve(per_class * cfg.n_classes);
        for (std::size_t cls = 0; cls < cfg.n_classes; ++cls) {
            const double two_sigma_sq = 2.0 * sigmas[cls] * sigmas[cls];
            for (std::size_t k = 0; k < per_class; ++k) {
                const double cy = centers[cls].first + (cfg.center_jitter > 0.0 ? jitter(rng) : 0.0);
                const double cx = centers[cls].second + (cfg.center_jitter > 0.0 ? jitter(rng) : 0.0);
                for (std::size_t y = 0; y < cfg.height; ++y)
                    for (std::size_t x = 0; x < cfg.width; ++x) {
                        const double dy = static_cast<double>(y) - cy;
                        const double dx = static_cast<double>(x) - cx;
                        const double spot =
                            cfg.amplitude * std::exp(-(dy * dy + dx * dx) / two_sigma_sq);
                        ds.features.push_back(
                            clamp01(cfg.background + spot + cfg.noise * gauss(rng)));
                    }
                ds.labels.push_back(static_cast<int>(cls));
            }
        }
        return ds;
    };
    Dataset train = draw(cfg.train_per_class, "train");
    Dataset test = draw(cfg.test_per_class, "test");
    return {std::move(train), std::move(test)};
}

namespace {

Vec random_resized_crop(const Vec &px, std::size_t h, std::size_t w, std::size_t c,
                        double lower_bound, std::mt19937_64 &rng) {
    const double area_frac =
        lower_bound >= 1.0 ? 1.0 : std::uniform_real_distribution<double>(lower_bound, 1.0)(rng);
    const double side = std::sqrt(area_frac * static_cast<double>(h) * static_cast<double>(w));
    const std::size_t s = std::min<std::size_t>(
        std::min(h, w),
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(side))));
    std::size_t top = 0, left = 0;
    if (h > s) top = std::uniform_int_distribution<std::size_t>(0, h - s)(rng);
    if (w > s) left = std::uniform_int_distribution<std::size_t>(0, w - s)(rng);

    Vec out(px.size());
    const double scale_y = static_cast<double>(s) / static_cast<double>(h);
    const double scale_x = static_cast<double>(s) / static_cast<double>(w);
    for (std::size_t dy = 0; dy < h; ++dy) {
        double sy = (static_cast<double>(dy) + 0.5) * scale_y - 0.5;
        sy = std::min(std::max(sy, 0.0), static_cast<double>(s - 1));
        const std::size_t y0 = static_cast<std::size_t>(sy);
        const std::size_t y1 = std::min(y0 + 1, s - 1);
        const double fy = sy - static_cast<double>(y0);
        for (std::size_t dx = 0; dx < w; ++dx) {
            double sx = (static_cast<double>(dx) + 0.5) * scale_x - 0.5;
            sx = std::min(std::max(sx, 0.0), static_cast<double>(s - 1));
            const std::size_t x0 = static_cast<std::size_t>(sx);
            const std::size_t x1 = std::min(x0 + 1, s - 1);
            const double fx = sx - static_cast<double>(x0);
            for (std::size_t ch = 0; ch < c; ++ch) {
                auto at = [&](std::size_t yy, std::size_t xx) {
                    return px[((top + yy) * w + (left + xx)) * c + ch];
                };
                const double v = (1.0 - fy) * ((1.0 - fx) * at(y0, x0) + fx * at(y0, x1)) +
                                 fy * ((1.0 - fx) * at(y1, x0) + fx * at(y1, x1));
                out[(dy * w + dx) * c + ch] = clamp01(v);
            }
        }
    }
    return out;
}

Vec color_jitter(const Vec &px, std::size_t c, const AugmentationSpec &spec,
                 std::mt19937_64 &rng) {
    Vec out = px;
    auto factor = [&](double strength) {
        if (strength <= 0.0) return 1.0;
        return std::uniform_real_distribution<double>(std::max(0.0, 1.0 - strength),
                                                      1.0 + strength)(rng);
    };
    const double fb = factor(spec.brightness);
    for (double &p : out) p = clamp01(p * fb);

    const double fc = factor(spec.contrast);
    if (fc != 1.0) {
        double mean = 0.0;
        for (double p : out) mean += p;
        mean /= static_cast<double>(out.size());
        for (double &p : out) p = clamp01(mean + fc * (p - mean));
    }

    if (c == 3 && spec.saturation > 0.0) {
        const double fs = factor(spec.saturation);
        for (std::size_t i = 0; i < out.size(); i += 3) {
            const double luma = 0.299 * out[i] + 0.587 * out[i + 1] + 0.114 * out[i + 2];
            for (std::size_t ch = 0; ch < 3; ++ch)
                out[i + ch] = clamp01(luma + fs * (out[i + ch] - luma));
        }
    }
    return out;
}

}  // namespace

Vec augment(const Vec &pixels, std::size_t h, std::size_t w, std::size_t c,
            const AugmentationSpec &spec, std::mt19937_64 &rng) {
    spec.validate();
    if (pixels.size() != h * w * c)
        throw std::invalid_argument("augment: pixel buffer does not match shape");
    if (h == 0 || w == 0 || c == 0)
        throw std::invalid_argument("augment: image input required");
    switch (spec.kind) {
        case AugmentKind::None: return pixels;
        case AugmentKind::RandomResizedCrop:
            return random_resized_crop(pixels, h, w, c, spec.crop_lower_bound, rng);
        case AugmentKind::ColorJitter: return color_jitter(pixels, c, spec, rng);
    }
    return pixels;
}

}  // namespace clam
