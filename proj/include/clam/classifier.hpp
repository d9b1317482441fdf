#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "clam/data.hpp"
#include "clam/losses.hpp"
#include "clam/simplex.hpp"

namespace clam {

enum class Architecture { Softmax, Mlp };

std::string to_string(Architecture a);
Architecture architecture_from_string(const std::string &name);

/// Parameters of a softmax regression (d -> n) or a one-hidden-layer ReLU MLP
/// (d -> h -> n). Matrices are flat row-major; the softmax variant uses only
/// W1 (n x d) and b1. Initial weights are symmetric uniform scaled by fan-in,
/// biases zero.
struct ClassifierParams {
    Architecture arch = Architecture::Softmax;
    std::size_t d = 0, h = 0, n = 0;
    Vec W1, b1;
    Vec W2, b2;

    static ClassifierParams init_softmax(std::size_t d, std::size_t n, std::mt19937_64 &rng);
    static ClassifierParams init_mlp(std::size_t d, std::size_t h, std::size_t n,
                                     std::mt19937_64 &rng);
    bool finite() const;
};

struct TrainConfig {
    std::size_t epochs = 40;
    std::size_t iters_per_epoch = 0;  // 0 = one full pass, ceil(N / batch_size)
    std::size_t batch_size = 128;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
    Architecture arch = Architecture::Mlp;
    std::size_t hidden = 64;
    // The class weights are always driven by training accuracies. By default
    // they are accumulated from the epoch's own minibatch forward passes
    // (recorded before each step); this flag switches to an exact full pass
    // over the clean training set at epoch end.
    bool full_pass_train_acc = false;
    AugmentationSpec augmentation;

    void validate() const;
};

/// Per-class accuracy under argmax prediction (ties to the lowest class
/// index). Classes with no samples get accuracy 1 by convention; their counts
/// stay zero so callers can tell.
struct ClassAccuracies {
    Vec v;
    std::vector<std::size_t> counts;
};

/// Per-class mean of the per-sample losses in a batch. Classes absent from
/// the batch get loss 0 and absent = true.
struct PerClassLoss {
    Vec loss;
    std::vector<bool> absent;
};

struct EpochRecord {
    std::size_t epoch = 0;
    Vec class_weights;  // weights in effect during the epoch (CLAM/TCE: simplex
                        // point; GGF: raw rank weights; otherwise uniform)
    Vec train_acc;
    Vec test_acc;
    double mean_loss = 0.0;
};

struct TrainResult {
    ClassifierParams params;
    std::vector<EpochRecord> epochs;
    LossSpec method;
    TrainConfig config;
};

/// Class probabilities for a batch of rows (x is rows*d flat, output rows*n
/// flat). Softmax is computed with max subtraction; every row sums to one.
Vec forward_probs(const ClassifierParams &params, const Vec &x, std::size_t rows);

PerClassLoss per_class_batch_loss(const Vec &probs, const std::vector<int> &labels,
                                  std::size_t n, const LossSpec &base);

/// sum_i (n * w_i) * L_i. The weights are rescaled so a uniform w reproduces
/// the plain sum of the per-class losses.
double weighted_loss(const Vec &L, const Vec &w, std::size_t n);

/// Mean weighted per-sample loss of a batch; the differentiable objective of
/// one SGD step.
double weighted_batch_loss(const ClassifierParams &params, const Vec &x, std::size_t rows,
                           const std::vector<int> &labels, const Vec &sample_weights,
                           const LossSpec &spec);

/// One SGD step on the mean weighted per-sample loss, with analytic gradients
/// through either architecture. Returns the pre-step batch loss. Throws if a
/// gradient goes non-finite.
double grad_step(ClassifierParams &params, const Vec &x, std::size_t rows,
                 const std::vector<int> &labels, const Vec &sample_weights, double lr,
                 const LossSpec &spec);

ClassAccuracies class_accuracies(const ClassifierParams &params, const Dataset &dataset);

/// The class-dependent multiplicative-weights training loop: K weighted
/// minibatch steps per epoch with per-sample weight n * w_label, then the
/// multiplicative-weights update of w from the epoch's training accuracies.
TrainResult train_clam(const Dataset &train, const Dataset &test, const TrainConfig &tcfg,
                       const MWConfig &mw, const RestrictedSimplex &s);

/// Baseline training loops: Normal/Focal/PW with their per-sample losses and
/// unit class weights, TCE with per-epoch tilted weights from the epoch-mean
/// class losses, GGF with rank weights at its frequency.
TrainResult train_baseline(const Dataset &train, const Dataset &test, const TrainConfig &tcfg,
                           const LossSpec &spec);

/// Shared engine behind train_clam / train_baseline.
TrainResult train_run(const Dataset &train, const Dataset &test, const TrainConfig &tcfg,
                      const LossSpec &spec);

}  // namespace clam
