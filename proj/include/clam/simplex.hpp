#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace clam {

using Vec = std::vector<double>;

/// Projection rules onto the restricted simplex.
///
/// ProofClip:   clip-then-renormalize, max(x_i, u_min) / sum_j max(x_j, u_min),
///              applied to the normalized input. Single pass; the output can
///              end up slightly below u_min after renormalization whenever any
///              clipping occurred. This is the form used by the regret analysis.
/// ScaledClip:  w_i = max(c * x_i, u_min) with c > 0 the unique scalar making
///              the result sum to one. Always lands inside the restricted
///              simplex; default for training.
/// Euclidean:   L2 projection of the normalized input, w_i = max(x_i - theta, u_min)
///              with theta the water-filling threshold.
enum class Projection { ProofClip, ScaledClip, Euclidean };

std::string to_string(Projection p);
Projection projection_from_string(const std::string &name);

/// The restricted simplex: { w : sum_i w_i = 1, w_i >= u_min for all i }.
///
/// Requires n >= 2 and 0 <= u_min <= 1/n. u_min = 0 degenerates to the full
/// simplex (plain Hedge updates), u_min = 1/n to the single uniform point.
struct RestrictedSimplex {
    std::size_t n;
    double u_min;

    RestrictedSimplex(std::size_t n, double u_min);

    /// Membership test with tolerance (sum within 1e-9, components within
    /// 1e-12 of the lower bound).
    bool contains(const Vec &w) const;
};

/// Multiplicative-weights update configuration. tau >= 0; tau = 0 freezes the
/// weights (every update is the identity after projection).
struct MWConfig {
    double tau = 1.0;
    Projection projection = Projection::ScaledClip;
};

/// Fixed fairness weights for the generalized Gini welfare value:
/// non-increasing, positive, summing to one.
struct GgfWeights {
    Vec w;

    explicit GgfWeights(Vec weights);
};

/// Uniform weight vector (1/n, ..., 1/n).
Vec uniform_weights(std::size_t n);

/// True if w is a probability vector: componentwise >= 0, sums to 1 within 1e-9.
bool is_weight_vector(const Vec &w);

/// Projects a nonnegative vector onto the restricted simplex with the chosen
/// rule. Inputs need not be normalized. An input that already lies in the
/// simplex is returned unchanged (bitwise), for all three rules.
Vec project(const Vec &x, const RestrictedSimplex &s, Projection method);

/// One multiplicative-weights step: project(w * exp(-tau * v)) onto s.
/// With u_min = 0 and ProofClip this is the plain Hedge update.
Vec mw_update(const Vec &w, const Vec &v, const MWConfig &cfg, const RestrictedSimplex &s);

/// Inner product sum_i w_i v_i (the min player's one-round loss).
double weighted_value(const Vec &w, const Vec &v);

/// Exact minimizer of <w, v> over the restricted simplex: every component
/// receives u_min and the remaining mass goes to the smallest entry of v
/// (lowest index on ties). Returns the minimizer and the value
/// u_min * sum(v) + (1 - n*u_min) * min(v).
std::pair<Vec, double> min_linear_over_simplex(const Vec &v, const RestrictedSimplex &s);

/// Generalized Gini welfare value: sorts u ascending and pairs it with the
/// non-increasing weights, sum_j g_j * u_(j). Equals the minimum of
/// sum_i g_{s(i)} u_i over all permutations s.
double ggf_value(const GgfWeights &g, const Vec &u);

}  // namespace clam
