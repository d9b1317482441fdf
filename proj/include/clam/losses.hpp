#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "clam/simplex.hpp"

namespace clam {

enum class LossVariant { Normal, Focal, TCE, PW, GGF, CLAM };

std::string to_string(LossVariant v);
LossVariant loss_variant_from_string(const std::string &name);

/// Training method selector plus its hyperparameters. Only the fields of the
/// active variant are read. Defaults follow the published baseline settings:
/// Focal gamma 2.0, TCE gamma 0.5, PW gamma 2.5 / theta 0.8.
struct LossSpec {
    LossVariant variant = LossVariant::Normal;

    double gamma = 0.0;       // Focal / TCE / PW
    double theta_pw = 0.0;    // PW additive factor

    double ggf_alpha = 0.9;   // GGF rank decay, in (0,1)
    double ggf_w_min = 0.1;   // GGF weight floor
    std::size_t ggf_f = 1;    // GGF application frequency (1 = every epoch)

    double clam_tau = 1.0;                                  // CLAM update rate
    double clam_u_min = -1.0;                               // < 0 means 1/(2n)
    Projection clam_projection = Projection::ScaledClip;

    static LossSpec normal();
    static LossSpec focal(double gamma = 2.0);
    static LossSpec tce(double gamma = 0.5);
    static LossSpec pw(double gamma = 2.5, double theta = 0.8);
    static LossSpec ggf(double alpha, double w_min, std::size_t f = 1);
    static LossSpec clam(double tau = 1.0, double u_min = -1.0,
                         Projection projection = Projection::ScaledClip);

    void validate() const;
};

/// Cross entropy -ln(p) of the true-class probability. p must be positive;
/// values below 1e-12 are clamped before the log.
double ce_loss(double p_true);

/// Focal loss -ln(p) * (1-p)^gamma; gamma = 0 reduces exactly to ce_loss.
double focal_loss(double p_true, double gamma);

/// Performance-weighted loss -ln(p) * ((1-p)^gamma + theta).
double pw_loss(double p_true, double gamma, double theta_pw);

/// d/dp of the per-sample loss for the given variant (Normal, Focal, PW).
double loss_derivative(double p_true, const LossSpec &spec);

/// Per-sample loss for the given variant (Normal, Focal, PW).
double sample_loss(double p_true, const LossSpec &spec);

/// Tilted-cross-entropy weight update: blends the previous class weights with
/// the softmax of the per-class losses,
///   w_t(c) = (1 - gamma) w_{t-1}(c) + gamma * exp(L(c)) / sum_i exp(L(i)).
/// Output is again a probability vector.
Vec tce_weights_update(const Vec &w_prev, const Vec &class_losses, double gamma);

/// GGF epoch weights from the previous epoch's class accuracies:
/// rank classes ascending by accuracy (rank 1 = worst, ties by class index)
/// and assign max(alpha^(rank-1), w_min). On epochs where epoch % f != 0 the
/// standard loss applies and all weights are 1. Weights are used raw, not
/// renormalized.
Vec ggf_epoch_weights(const Vec &prev_epoch_acc, double alpha, double w_min,
                      std::size_t epoch, std::size_t f);

}  // namespace clam
