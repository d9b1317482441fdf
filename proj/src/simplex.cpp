#include "clam/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace clam {

namespace {

constexpr double kSumTol = 1e-9;
constexpr double kBoundTol = 1e-12;

double checked_sum(const Vec &x, const char *who) {
    if (x.empty()) throw std::invalid_argument(std::string(who) + ": empty vector");
    double s = 0.0;
    bool positive = false;
    for (double xi : x) {
        if (!std::isfinite(xi)) throw std::invalid_argument(std::string(who) + ": non-finite component");
        if (xi < 0.0) throw std::invalid_argument(std::string(who) + ": negative component");
        if (xi > 0.0) positive = true;
        s += xi;
    }
    if (!positive) throw std::invalid_argument(std::string(who) + ": all components zero");
    return s;
}

void check_dims(std::size_t a, std::size_t b, const char *who) {
    if (a != b) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

Vec normalized(const Vec &x, double sum) {
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] / sum;
    return out;
}

// Clip-renormalize on the normalized input; may exit the simplex (see header).
Vec proof_clip(const Vec &xhat, double u_min) {
    Vec out(xhat.size());
    double z = 0.0;
    for (std::size_t i = 0; i < xhat.size(); ++i) {
        out[i] = std::max(xhat[i], u_min);
        z += out[i];
    }
    for (double &o : out) o /= z;
    return out;
}

// Solves sum_i max(c*x_i, u_min) = 1 exactly over the piecewise-linear
// segments of c. The k largest components stay unclipped; scan k downward.
Vec scaled_clip(const Vec &x, double u_min) {
    const std::size_t n = x.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });

    Vec prefix(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + x[idx[k]];

    double best_c = -1.0;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t k = n; k >= 1; --k) {
        const double mass = 1.0 - static_cast<double>(n - k) * u_min;
        if (prefix[k] <= 0.0 || mass <= 0.0) continue;
        const double c = mass / prefix[k];
        const bool low_ok = c * x[idx[k - 1]] >= u_min - kBoundTol;
        const bool high_ok = (k == n) || (c * x[idx[k]] <= u_min + kBoundTol);
        if (low_ok && high_ok) {
            best_c = c;
            break;
        }
        // Track the closest segment in case float noise rejects all of them.
        double sum = static_cast<double>(n - k) * u_min;
        for (std::size_t i = 0; i < k; ++i) sum += std::max(c * x[idx[i]], u_min);
        if (std::abs(sum - 1.0) < best_err) {
            best_err = std::abs(sum - 1.0);
            best_c = c;
        }
    }
    if (best_c <= 0.0) {
        // All mass clipped: only consistent when n*u_min == 1.
        return Vec(n, u_min);
    }
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::max(best_c * x[i], u_min);
    return out;
}

// Water-filling L2 projection onto {w : sum w = 1, w >= u_min} after shifting
// out the lower bound.
Vec euclidean_project(const Vec &xhat, double u_min) {
    const std::size_t n = xhat.size();
    const double budget = 1.0 - static_cast<double>(n) * u_min;
    Vec z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = xhat[i] - u_min;
    if (budget <= 0.0) return Vec(n, u_min);

    Vec sorted = z;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        cumsum += sorted[k];
        const double cand = (cumsum - budget) / static_cast<double>(k + 1);
        if (sorted[k] - cand > 0.0) theta = cand;
    }
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = u_min + std::max(z[i] - theta, 0.0);
    return out;
}

}  // namespace

std::string to_string(Projection p) {
    switch (p) {
        case Projection::ProofClip: return "proof_clip";
        case Projection::ScaledClip: return "scaled_clip";
        case Projection::Euclidean: return "euclidean";
    }
    return "unknown";
}

Projection projection_from_string(const std::string &name) {
    if (name == "proof_clip") return Projection::ProofClip;
    if (name == "scaled_clip") return Projection::ScaledClip;
    if (name == "euclidean") return Projection::Euclidean;
    throw std::invalid_argument("unknown projection: " + name);
}

RestrictedSimplex::RestrictedSimplex(std::size_t n_, double u_min_) : n(n_), u_min(u_min_) {
    if (n < 2) throw std::invalid_argument("RestrictedSimplex: need n >= 2");
    if (!std::isfinite(u_min) || u_min < 0.0)
        throw std::invalid_argument("RestrictedSimplex: u_min must be >= 0");
    if (static_cast<double>(n) * u_min > 1.0 + 1e-12)
        throw std::invalid_argument("RestrictedSimplex: infeasible, n*u_min > 1");
}

bool RestrictedSimplex::contains(const Vec &w) const {
    if (w.size() != n) return false;
    double s = 0.0;
    for (double wi : w) {
        if (!(wi >= u_min - kBoundTol)) return false;
        s += wi;
    }
    return std::abs(s - 1.0) <= kSumTol;
}

GgfWeights::GgfWeights(Vec weights) : w(std::move(weights)) {
    if (w.empty()) throw std::invalid_argument("GgfWeights: empty");
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(w[i] > 0.0)) throw std::invalid_argument("GgfWeights: weights must be positive");
        if (i > 0 && w[i] > w[i - 1] + kBoundTol)
            throw std::invalid_argument("GgfWeights: weights must be non-increasing");
        s += w[i];
    }
    if (std::abs(s - 1.0) > kSumTol) throw std::invalid_argument("GgfWeights: must sum to 1");
}

Vec uniform_weights(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_weights: n == 0");
    return Vec(n, 1.0 / static_cast<double>(n));
}

bool is_weight_vector(const Vec &w) {
    if (w.empty()) return false;
    double s = 0.0;
    for (double wi : w) {
        if (!(wi >= 0.0)) return false;
        s += wi;
    }
    return std::abs(s - 1.0) <= kSumTol;
}

Vec project(const Vec &x, const RestrictedSimplex &s, Projection method) {
    check_dims(x.size(), s.n, "project");
    const double sum = checked_sum(x, "project");

    // Identity on feasible points, all methods. Keeps fixed points exact.
    if (std::abs(sum - 1.0) <= kSumTol) {
        bool feasible = true;
        for (double xi : x)
            if (!(xi >= s.u_min - kBoundTol)) {
                feasible = false;
                break;
            }
        if (feasible) return x;
    }

    switch (method) {
        case Projection::ProofClip: return proof_clip(normalized(x, sum), s.u_min);
        case Projection::ScaledClip: return scaled_clip(x, s.u_min);
        case Projection::Euclidean: return euclidean_project(normalized(x, sum), s.u_min);
    }
    throw std::invalid_argument("project: unknown method");
}

Vec mw_update(const Vec &w, const Vec &v, const MWConfig &cfg, const RestrictedSimplex &s) {
    check_dims(w.size(), v.size(), "mw_update");
    check_dims(w.size(), s.n, "mw_update");
    if (!(cfg.tau >= 0.0)) throw std::invalid_argument("mw_update: tau must be >= 0");
    Vec u(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) u[i] = w[i] * std::exp(-cfg.tau * v[i]);
    return project(u, s, cfg.projection);
}

double weighted_value(const Vec &w, const Vec &v) {
    check_dims(w.size(), v.size(), "weighted_value");
    double out = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) out += w[i] * v[i];
    return out;
}

std::pair<Vec, double> min_linear_over_simplex(const Vec &v, const RestrictedSimplex &s) {
    check_dims(v.size(), s.n, "min_linear_over_simplex");
    for (double vi : v)
        if (!std::isfinite(vi)) throw std::invalid_argument("min_linear_over_simplex: non-finite v");

    std::size_t arg = 0;
    double vsum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        vsum += v[i];
        if (v[i] < v[arg]) arg = i;  // lowest index wins ties
    }
    const double slack = 1.0 - static_cast<double>(s.n) * s.u_min;
    Vec w(s.n, s.u_min);
    w[arg] += slack;
    const double value = s.u_min * vsum + slack * v[arg];
    return {std::move(w), value};
}

double ggf_value(const GgfWeights &g, const Vec &u) {
    check_dims(g.w.size(), u.size(), "ggf_value");
    Vec sorted = u;
    std::sort(sorted.begin(), sorted.end());
    double out = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) out += g.w[j] * sorted[j];
    return out;
}

}  // namespace clam
