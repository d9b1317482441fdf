#include "clam/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace clam {

namespace {

constexpr double kProbFloor = 1e-12;

double clamp_prob(double p, const char *who) {
    if (!(p > 0.0)) throw std::domain_error(std::string(who) + ": probability must be > 0");
    return std::min(std::max(p, kProbFloor), 1.0);
}

}  // namespace

std::string to_string(LossVariant v) {
    switch (v) {
        case LossVariant::Normal: return "normal";
        case LossVariant::Focal: return "focal";
        case LossVariant::TCE: return "tce";
        case LossVariant::PW: return "pw";
        case LossVariant::GGF: return "ggf";
        case LossVariant::CLAM: return "clam";
    }
    return "unknown";
}

LossVariant loss_variant_from_string(const std::string &name) {
    if (name == "normal") return LossVariant::Normal;
    if (name == "focal") return LossVariant::Focal;
    if (name == "tce") return LossVariant::TCE;
    if (name == "pw") return LossVariant::PW;
    if (name == "ggf") return LossVariant::GGF;
    if (name == "clam") return LossVariant::CLAM;
    throw std::invalid_argument("unknown loss variant: " + name);
}

LossSpec LossSpec::normal() { return LossSpec{}; }

LossSpec LossSpec::focal(double gamma) {
    LossSpec s;
    s.variant = LossVariant::Focal;
    s.gamma = gamma;
    return s;
}

LossSpec LossSpec::tce(double gamma) {
    LossSpec s;
    s.variant = LossVariant::TCE;
    s.gamma = gamma;
    return s;
}

LossSpec LossSpec::pw(double gamma, double theta) {
    LossSpec s;
    s.variant = LossVariant::PW;
    s.gamma = gamma;
    s.theta_pw = theta;
    return s;
}

LossSpec LossSpec::ggf(double alpha, double w_min, std::size_t f) {
    LossSpec s;
    s.variant = LossVariant::GGF;
    s.ggf_alpha = alpha;
    s.ggf_w_min = w_min;
    s.ggf_f = f;
    return s;
}

LossSpec LossSpec::clam(double tau, double u_min, Projection projection) {
    LossSpec s;
    s.variant = LossVariant::CLAM;
    s.clam_tau = tau;
    s.clam_u_min = u_min;
    s.clam_projection = projection;
    return s;
}

void LossSpec::validate() const {
    switch (variant) {
        case LossVariant::Normal: break;
        case LossVariant::Focal:
        case LossVariant::TCE:
            if (gamma < 0.0) throw std::invalid_argument("LossSpec: gamma must be >= 0");
            break;
        case LossVariant::PW:
            if (gamma < 0.0 || theta_pw < 0.0)
                throw std::invalid_argument("LossSpec: gamma and theta_pw must be >= 0");
            break;
        case LossVariant::GGF:
            if (!(ggf_alpha > 0.0 && ggf_alpha <= 1.0))
                throw std::invalid_argument("LossSpec: ggf alpha must be in (0,1]");
            if (ggf_w_min < 0.0) throw std::invalid_argument("LossSpec: ggf w_min must be >= 0");
            if (ggf_f == 0) throw std::invalid_argument("LossSpec: ggf f must be >= 1");
            break;
        case LossVariant::CLAM:
            if (clam_tau < 0.0) throw std::invalid_argument("LossSpec: clam tau must be >= 0");
            break;
    }
}

double ce_loss(double p_true) { return -std::log(clamp_prob(p_true, "ce_loss")); }

double focal_loss(double p_true, double gamma) {
    if (gamma < 0.0) throw std::invalid_argument("focal_loss: gamma must be >= 0");
    const double p = clamp_prob(p_true, "focal_loss");
    if (gamma == 0.0) return -std::log(p);
    return -std::log(p) * std::pow(1.0 - p, gamma);
}

double pw_loss(double p_true, double gamma, double theta_pw) {
    if (gamma < 0.0 || theta_pw < 0.0)
        throw std::invalid_argument("pw_loss: gamma and theta_pw must be >= 0");
    const double p = clamp_prob(p_true, "pw_loss");
    if (gamma == 0.0 && theta_pw == 0.0) return -std::log(p);
    return -std::log(p) * (std::pow(1.0 - p, gamma) + theta_pw);
}

double sample_loss(double p_true, const LossSpec &spec) {
    switch (spec.variant) {
        case LossVariant::Focal: return focal_loss(p_true, spec.gamma);
        case LossVariant::PW: return pw_loss(p_true, spec.gamma, spec.theta_pw);
        default: return ce_loss(p_true);  // Normal, TCE, GGF, CLAM use plain CE
    }
}

double loss_derivative(double p_true, const LossSpec &spec) {
    const double p = clamp_prob(p_true, "loss_derivative");
    const double q = 1.0 - p;

    double gamma = 0.0;
    double theta = 0.0;
    switch (spec.variant) {
        case LossVariant::Focal: gamma = spec.gamma; break;
        case LossVariant::PW:
            gamma = spec.gamma;
            theta = spec.theta_pw;
            break;
        default: break;
    }
    if (gamma == 0.0) return -(1.0 + theta) / p;

    // d/dp [ -ln(p) ((1-p)^g + theta) ]
    //   = -((1-p)^g + theta)/p + g ln(p) (1-p)^(g-1)
    // The second term vanishes as p -> 1 for g > 0 (ln p ~ -(1-p)).
    const double factor = std::pow(q, gamma) + theta;
    double tail = 0.0;
    if (q > 0.0) tail = gamma * std::log(p) * std::pow(q, gamma - 1.0);
    return -factor / p + tail;
}

Vec tce_weights_update(const Vec &w_prev, const Vec &class_losses, double gamma) {
    if (w_prev.size() != class_losses.size())
        throw std::invalid_argument("tce_weights_update: dimension mismatch");
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("tce_weights_update: gamma must be in [0,1]");
    for (double l : class_losses)
        if (!std::isfinite(l)) throw std::invalid_argument("tce_weights_update: non-finite loss");

    // Softmax of the class losses, stabilized by the max.
    const double max_l = *std::max_element(class_losses.begin(), class_losses.end());
    Vec soft(class_losses.size());
    double z = 0.0;
    for (std::size_t i = 0; i < soft.size(); ++i) {
        soft[i] = std::exp(class_losses[i] - max_l);
        z += soft[i];
    }
    Vec out(w_prev.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (1.0 - gamma) * w_prev[i] + gamma * (soft[i] / z);
    return out;
}

Vec ggf_epoch_weights(const Vec &prev_epoch_acc, double alpha, double w_min,
                      std::size_t epoch, std::size_t f) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("ggf_epoch_weights: alpha must be in (0,1]");
    if (f == 0) throw std::invalid_argument("ggf_epoch_weights: f must be >= 1");
    const std::size_t n = prev_epoch_acc.size();
    if (epoch % f != 0) return Vec(n, 1.0);

    // Rank ascending by accuracy, ties by class index; rank 1 gets alpha^0.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return prev_epoch_acc[a] < prev_epoch_acc[b];
    });
    Vec out(n);
    for (std::size_t rank = 0; rank < n; ++rank)
        out[order[rank]] = std::max(std::pow(alpha, static_cast<double>(rank)), w_min);
    return out;
}

}  // namespace clam
