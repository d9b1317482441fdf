#include "clam/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace clam {

namespace {

void softmax_inplace(double *z, std::size_t n) {
    double mx = z[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, z[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = std::exp(z[i] - mx);
        sum += z[i];
    }
    for (std::size_t i = 0; i < n; ++i) z[i] /= sum;
}

// z = W x + b, W is rows x cols flat row-major.
void affine(const Vec &W, const Vec &b, const double *x, std::size_t rows, std::size_t cols,
            double *z) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = b[r];
        const double *wr = W.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
        z[r] = acc;
    }
}

void check_finite(const Vec &g, const char *what) {
    for (double x : g)
        if (!std::isfinite(x))
            throw std::runtime_error(std::string("grad_step: non-finite gradient in ") + what);
}

std::size_t argmax_row(const double *p, std::size_t n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (p[i] > p[best]) best = i;
    return best;
}

}  // namespace

std::string to_string(Architecture a) {
    return a == Architecture::Softmax ? "softmax" : "mlp";
}

Architecture architecture_from_string(const std::string &name) {
    if (name == "softmax") return Architecture::Softmax;
    if (name == "mlp") return Architecture::Mlp;
    throw std::invalid_argument("unknown architecture: " + name);
}

ClassifierParams ClassifierParams::init_softmax(std::size_t d, std::size_t n,
                                                std::mt19937_64 &rng) {
    if (d == 0 || n < 2) throw std::invalid_argument("init_softmax: need d >= 1, n >= 2");
    ClassifierParams p;
    p.arch = Architecture::Softmax;
    p.d = d;
    p.n = n;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    std::uniform_real_distribution<double> u(-scale, scale);
    p.W1.resize(n * d);
    for (double &w : p.W1) w = u(rng);
    p.b1.assign(n, 0.0);
    return p;
}

ClassifierParams ClassifierParams::init_mlp(std::size_t d, std::size_t h, std::size_t n,
                                            std::mt19937_64 &rng) {
    if (d == 0 || h == 0 || n < 2) throw std::invalid_argument("init_mlp: need d, h >= 1, n >= 2");
    ClassifierParams p;
    p.arch = Architecture::Mlp;
    p.d = d;
    p.h = h;
    p.n = n;
    const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(h));
    std::uniform_real_distribution<double> u1(-s1, s1);
    std::uniform_real_distribution<double> u2(-s2, s2);
    p.W1.resize(h * d);
    for (double &w : p.W1) w = u1(rng);
    p.b1.assign(h, 0.0);
    p.W2.resize(n * h);
    for (double &w : p.W2) w = u2(rng);
    p.b2.assign(n, 0.0);
    return p;
}

bool ClassifierParams::finite() const {
    auto ok = [](const Vec &v) {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    };
    return ok(W1) && ok(b1) && ok(W2) && ok(b2);
}

void TrainConfig::validate() const {
    if (epochs == 0 || batch_size == 0) throw std::invalid_argument("TrainConfig: zero size");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (arch == Architecture::Mlp && hidden == 0)
        throw std::invalid_argument("TrainConfig: hidden must be > 0 for the MLP");
    augmentation.validate();
}

Vec forward_probs(const ClassifierParams &params, const Vec &x, std::size_t rows) {
    if (x.size() != rows * params.d)
        throw std::invalid_argument("forward_probs: input shape mismatch");
    for (double xi : x)
        if (!std::isfinite(xi)) throw std::invalid_argument("forward_probs: non-finite input");

    Vec probs(rows * params.n);
    Vec hidden(params.arch == Architecture::Mlp ? params.h : 0);
    for (std::size_t r = 0; r < rows; ++r) {
        const double *xr = x.data() + r * params.d;
        double *pr = probs.data() + r * params.n;
        if (params.arch == Architecture::Softmax) {
            affine(params.W1, params.b1, xr, params.n, params.d, pr);
        } else {
            affine(params.W1, params.b1, xr, params.h, params.d, hidden.data());
            for (double &a : hidden) a = std::max(a, 0.0);
            affine(params.W2, params.b2, hidden.data(), params.n, params.h, pr);
        }
        softmax_inplace(pr, params.n);
    }
    return probs;
}

PerClassLoss per_class_batch_loss(const Vec &probs, const std::vector<int> &labels,
                                  std::size_t n, const LossSpec &base) {
    if (labels.empty() || probs.size() != labels.size() * n)
        throw std::invalid_argument("per_class_batch_loss: shape mismatch");
    PerClassLoss out;
    out.loss.assign(n, 0.0);
    out.absent.assign(n, true);
    std::vector<std::size_t> counts(n, 0);
    for (std::size_t r = 0; r < labels.size(); ++r) {
        const int y = labels[r];
        if (y < 0 || static_cast<std::size_t>(y) >= n)
            throw std::invalid_argument("per_class_batch_loss: invalid label");
        out.loss[y] += sample_loss(probs[r * n + y], base);
        ++counts[y];
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (counts[i] > 0) {
            out.loss[i] /= static_cast<double>(counts[i]);
            out.absent[i] = false;
        }
    }
    return out;
}

double weighted_loss(const Vec &L, const Vec &w, std::size_t n) {
    if (L.size() != n || w.size() != n)
        throw std::invalid_argument("weighted_loss: dimension mismatch");
    double out = 0.0;
    for (std::size_t i = 0; i < n; ++i) out += static_cast<double>(n) * w[i] * L[i];
    return out;
}

double weighted_batch_loss(const ClassifierParams &params, const Vec &x, std::size_t rows,
                           const std::vector<int> &labels, const Vec &sample_weights,
                           const LossSpec &spec) {
    if (labels.size() != rows || sample_weights.size() != rows)
        throw std::invalid_argument("weighted_batch_loss: shape mismatch");
    const Vec probs = forward_probs(params, x, rows);
    double loss = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
        loss += sample_weights[r] * sample_loss(probs[r * params.n + labels[r]], spec);
    return loss / static_cast<double>(rows);
}

double grad_step(ClassifierParams &params, const Vec &x, std::size_t rows,
                 const std::vector<int> &labels, const Vec &sample_weights, double lr,
                 const LossSpec &spec) {
    if (rows == 0) throw std::invalid_argument("grad_step: empty batch");
    if (x.size() != rows * params.d || labels.size() != rows || sample_weights.size() != rows)
        throw std::invalid_argument("grad_step: shape mismatch");

    const std::size_t n = params.n;
    const bool mlp = params.arch == Architecture::Mlp;
    const std::size_t h = mlp ? params.h : 0;

    Vec gW1(params.W1.size(), 0.0), gb1(params.b1.size(), 0.0);
    Vec gW2(params.W2.size(), 0.0), gb2(params.b2.size(), 0.0);
    Vec z1(h), a1(h), logits(n), dz2(n), da1(h);
    const double inv_rows = 1.0 / static_cast<double>(rows);
    double loss = 0.0;

    for (std::size_t r = 0; r < rows; ++r) {
        const double *xr = x.data() + r * params.d;
        const int y = labels[r];
        if (y < 0 || static_cast<std::size_t>(y) >= n)
            throw std::invalid_argument("grad_step: invalid label");

        if (mlp) {
            affine(params.W1, params.b1, xr, h, params.d, z1.data());
            for (std::size_t i = 0; i < h; ++i) a1[i] = std::max(z1[i], 0.0);
            affine(params.W2, params.b2, a1.data(), n, params.h, logits.data());
        } else {
            affine(params.W1, params.b1, xr, n, params.d, logits.data());
        }
        softmax_inplace(logits.data(), n);  // logits now hold probabilities
        const double p_true = logits[y];
        const double scale = sample_weights[r] * inv_rows;
        loss += scale * sample_loss(p_true, spec);

        // d loss / d logit_k = phi'(p_y) * p_y * (1[k==y] - p_k)
        const double dphi = loss_derivative(p_true, spec) * p_true * scale;
        for (std::size_t k = 0; k < n; ++k)
            dz2[k] = dphi * ((k == static_cast<std::size_t>(y) ? 1.0 : 0.0) - logits[k]);

        if (mlp) {
            for (std::size_t k = 0; k < n; ++k) {
                gb2[k] += dz2[k];
                double *gw = gW2.data() + k * h;
                const double dk = dz2[k];
                for (std::size_t i = 0; i < h; ++i) gw[i] += dk * a1[i];
            }
            std::fill(da1.begin(), da1.end(), 0.0);
            for (std::size_t k = 0; k < n; ++k) {
                const double dk = dz2[k];
                const double *wk = params.W2.data() + k * h;
                for (std::size_t i = 0; i < h; ++i) da1[i] += dk * wk[i];
            }
            for (std::size_t i = 0; i < h; ++i) {
                if (z1[i] <= 0.0) continue;  // relu'(z) = 0 at and below zero
                gb1[i] += da1[i];
                double *gw = gW1.data() + i * params.d;
                for (std::size_t c = 0; c < params.d; ++c) gw[c] += da1[i] * xr[c];
            }
        } else {
            for (std::size_t k = 0; k < n; ++k) {
                gb1[k] += dz2[k];
                double *gw = gW1.data() + k * params.d;
                for (std::size_t c = 0; c < params.d; ++c) gw[c] += dz2[k] * xr[c];
            }
        }
    }

    check_finite(gW1, "W1");
    check_finite(gb1, "b1");
    if (mlp) {
        check_finite(gW2, "W2");
        check_finite(gb2, "b2");
    }

    for (std::size_t i = 0; i < params.W1.size(); ++i) params.W1[i] -= lr * gW1[i];
    for (std::size_t i = 0; i < params.b1.size(); ++i) params.b1[i] -= lr * gb1[i];
    for (std::size_t i = 0; i < params.W2.size(); ++i) params.W2[i] -= lr * gW2[i];
    for (std::size_t i = 0; i < params.b2.size(); ++i) params.b2[i] -= lr * gb2[i];
    return loss;
}

ClassAccuracies class_accuracies(const ClassifierParams &params, const Dataset &dataset) {
    if (dataset.size() == 0) throw std::invalid_argument("class_accuracies: empty dataset");
    if (dataset.dim != params.d)
        throw std::invalid_argument("class_accuracies: feature dimension mismatch");

    ClassAccuracies out;
    out.v.assign(params.n, 0.0);
    out.counts.assign(params.n, 0);
    std::vector<std::size_t> correct(params.n, 0);

    Vec xrow(params.d);
    Vec hidden(params.arch == Architecture::Mlp ? params.h : 0);
    Vec logits(params.n);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const double *xr = dataset.row(i);
        if (params.arch == Architecture::Softmax) {
            affine(params.W1, params.b1, xr, params.n, params.d, logits.data());
        } else {
            affine(params.W1, params.b1, xr, params.h, params.d, hidden.data());
            for (double &a : hidden) a = std::max(a, 0.0);
            affine(params.W2, params.b2, hidden.data(), params.n, params.h, logits.data());
        }
        const std::size_t pred = argmax_row(logits.data(), params.n);
        const std::size_t y = static_cast<std::size_t>(dataset.labels[i]);
        ++out.counts[y];
        if (pred == y) ++correct[y];
    }
    for (std::size_t i = 0; i < params.n; ++i)
        out.v[i] = out.counts[i] > 0
                       ? static_cast<double>(correct[i]) / static_cast<double>(out.counts[i])
                       : 1.0;  // no evidence of failure
    return out;
}

TrainResult train_run(const Dataset &train, const Dataset &test, const TrainConfig &tcfg,
                      const LossSpec &spec) {
    tcfg.validate();
    spec.validate();
    train.validate();
    test.validate();
    if (train.n_classes != test.n_classes || train.dim != test.dim)
        throw std::invalid_argument("train_run: train/test shape mismatch");
    if (tcfg.augmentation.active() && !train.is_image())
        throw std::invalid_argument("train_run: augmentation requires image data");

    const std::size_t n = train.n_classes;
    const std::size_t N = train.size();
    const std::size_t B = std::min(tcfg.batch_size, N);
    const std::size_t K =
        tcfg.iters_per_epoch > 0 ? tcfg.iters_per_epoch : (N + B - 1) / B;

    std::mt19937_64 rng(tcfg.seed);
    ClassifierParams params =
        tcfg.arch == Architecture::Softmax
            ? ClassifierParams::init_softmax(train.dim, n, rng)
            : ClassifierParams::init_mlp(train.dim, tcfg.hidden, n, rng);

    const bool mw_weights = spec.variant == LossVariant::CLAM;
    const bool tce_weights = spec.variant == LossVariant::TCE;
    const bool ggf_weights = spec.variant == LossVariant::GGF;

    const double u_min = spec.clam_u_min < 0.0 ? 1.0 / (2.0 * static_cast<double>(n))
                                               : spec.clam_u_min;
    RestrictedSimplex simplex(n, mw_weights ? u_min : 0.0);
    MWConfig mw{spec.clam_tau, spec.clam_projection};

    Vec w = uniform_weights(n);   // simplex point for CLAM / TCE
    Vec prev_acc;                 // previous epoch's training accuracies (GGF)

    TrainResult result;
    result.method = spec;
    result.config = tcfg;
    result.epochs.reserve(tcfg.epochs);

    std::vector<std::size_t> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    Vec batch_x(B * train.dim);
    std::vector<int> batch_y(B);
    Vec batch_wt(B);

    for (std::size_t epoch = 0; epoch < tcfg.epochs; ++epoch) {
        // Class multipliers in effect this epoch; per-sample weight is
        // multipliers[label].
        Vec multipliers;
        if (mw_weights || tce_weights) {
            multipliers.resize(n);
            for (std::size_t i = 0; i < n; ++i) multipliers[i] = static_cast<double>(n) * w[i];
        } else if (ggf_weights && epoch > 0) {
            multipliers = ggf_epoch_weights(prev_acc, spec.ggf_alpha, spec.ggf_w_min, epoch,
                                            spec.ggf_f);
        } else {
            multipliers.assign(n, 1.0);
        }

        std::shuffle(perm.begin(), perm.end(), rng);
        std::size_t cursor = 0;
        std::vector<std::size_t> correct(n, 0), seen(n, 0);
        Vec ce_sum(n, 0.0);
        std::vector<std::size_t> ce_count(n, 0);
        double loss_sum = 0.0;

        for (std::size_t k = 0; k < K; ++k) {
            if (cursor >= N) {
                std::shuffle(perm.begin(), perm.end(), rng);
                cursor = 0;
            }
            const std::size_t take = std::min(B, N - cursor);
            for (std::size_t r = 0; r < take; ++r) {
                const std::size_t idx = perm[cursor + r];
                const double *src = train.row(idx);
                if (tcfg.augmentation.active()) {
                    Vec aug = augment(Vec(src, src + train.dim), train.height, train.width,
                                      train.channels, tcfg.augmentation, rng);
                    std::copy(aug.begin(), aug.end(), batch_x.begin() + r * train.dim);
                } else {
                    std::copy(src, src + train.dim, batch_x.begin() + r * train.dim);
                }
                batch_y[r] = train.labels[idx];
                batch_wt[r] = multipliers[static_cast<std::size_t>(batch_y[r])];
            }
            cursor += take;

            if (take != B) {
                batch_x.resize(take * train.dim);
                batch_y.resize(take);
                batch_wt.resize(take);
            }

            // Record predictions before the step; these accumulate into the
            // epoch's training accuracies.
            const Vec probs = forward_probs(params, batch_x, take);
            for (std::size_t r = 0; r < take; ++r) {
                const std::size_t y = static_cast<std::size_t>(batch_y[r]);
                ++seen[y];
                if (argmax_row(probs.data() + r * n, n) == y) ++correct[y];
                if (tce_weights) {
                    ce_sum[y] += ce_loss(probs[r * n + y]);
                    ++ce_count[y];
                }
            }

            loss_sum += grad_step(params, batch_x, take, batch_y, batch_wt,
                                  tcfg.learning_rate, spec);

            if (take != B) {
                batch_x.resize(B * train.dim);
                batch_y.resize(B);
                batch_wt.resize(B);
            }
        }

        Vec v_train(n);
        if (tcfg.full_pass_train_acc) {
            v_train = class_accuracies(params, train).v;
        } else {
            for (std::size_t i = 0; i < n; ++i)
                v_train[i] = seen[i] > 0
                                 ? static_cast<double>(correct[i]) / static_cast<double>(seen[i])
                                 : 1.0;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.class_weights = (mw_weights || tce_weights) ? w : multipliers;
        rec.train_acc = v_train;
        rec.test_acc = class_accuracies(params, test).v;
        rec.mean_loss = loss_sum / static_cast<double>(K);
        result.epochs.push_back(std::move(rec));

        if (mw_weights) {
            w = mw_update(w, v_train, mw, simplex);
        } else if (tce_weights) {
            Vec class_loss(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                if (ce_count[i] > 0) class_loss[i] = ce_sum[i] / static_cast<double>(ce_count[i]);
            w = tce_weights_update(w, class_loss, spec.gamma);
        } else if (ggf_weights) {
            prev_acc = v_train;
        }
    }

    result.params = std::move(params);
    return result;
}

TrainResult train_clam(const Dataset &train, const Dataset &test, const TrainConfig &tcfg,
                       const MWConfig &mw, const RestrictedSimplex &s) {
    if (s.n != train.n_classes) throw std::invalid_argument("train_clam: simplex size mismatch");
    return train_run(train, test, tcfg, LossSpec::clam(mw.tau, s.u_min, mw.projection));
}

TrainResult train_baseline(const Dataset &train, const Dataset &test, const TrainConfig &tcfg,
                           const LossSpec &spec) {
    if (spec.variant == LossVariant::CLAM)
        throw std::invalid_argument("train_baseline: use train_clam for the CLAM method");
    return train_run(train, test, tcfg, spec);
}

}  // namespace clam
