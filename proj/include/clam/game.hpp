#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "clam/simplex.hpp"

namespace clam {

/// Finite zero-sum game: rows are classes, columns are parameter choices,
/// entry (i, j) is the accuracy of choice j on class i, in [0, 1].
struct PayoffMatrix {
    std::size_t n = 0;  // rows (classes)
    std::size_t m = 0;  // columns (parameter choices)
    std::vector<double> entries;  // row-major

    PayoffMatrix(std::size_t n, std::size_t m, std::vector<double> entries);

    double at(std::size_t i, std::size_t j) const { return entries[i * m + j]; }
    Vec column(std::size_t j) const;

    static PayoffMatrix random(std::size_t n, std::size_t m, std::uint64_t seed);
};

/// One round of the adapted multiplicative-weights game.
struct GameRound {
    Vec w;           // min player's weights at the start of the round
    std::size_t j;   // max player's best-response column
    Vec v;           // payoff column M[:, j]
    double value;    // <w, v>
    Vec x_next;      // normalized pre-projection vector u^t / sum(u^t)
};

struct GameTrace {
    std::size_t n = 0;
    double u_min = 0.0;
    double tau = 0.0;
    Projection projection = Projection::ProofClip;
    std::vector<GameRound> rounds;

    std::size_t epochs() const { return rounds.size(); }
};

/// Per-round and aggregate diagnostics for the regret bound.
///
/// For each round, eps_i = pi(x)_i / x_i - 1 measures how much the projection
/// lifted component i, and alpha is the fraction of the comparator's loss
/// carried by lifted components. The per-step inequality bounds the KL-divergence
/// decrease towards the comparator:
///   KL(w~||w^{t+1}) - KL(w~||w^t) <= -(1 - e^-tau) V_t + (1 + alpha_t) tau <w~, v^t>.
struct RegretDiagnostics {
    bool valid = false;           // false when the trace was not produced with ProofClip
    Vec comparator;               // w~: exact best fixed strategy in hindsight
    std::vector<Vec> eps;         // per round: pi(x)_i / x_i - 1
    std::vector<double> alpha;    // alpha_t per round
    std::vector<double> step_slack;  // lhs - rhs of the per-step inequality
    double max_alpha = 0.0;
    double lhs = 0.0;             // (1/T) sum_t V_t
    double best_fixed = 0.0;      // (1/T) min_w~ sum_t <w~, v^t>
    double rhs_exact = 0.0;       // exact penultimate bound on the average loss
    double rhs_theorem = 0.0;     // best_fixed + ln(n)/T + (1 + max alpha) sqrt(ln(n)/T)
    double max_step_slack = 0.0;
    std::size_t per_step_violations = 0;  // rounds where slack exceeds 1e-9
    bool summed_bound_holds = false;      // lhs <= rhs_exact
};

struct LastIterateReport {
    bool converged = false;       // trailing-window weight variation below tol
    double weight_variation = 0.0;
    double last_value = 0.0;
    double window_mean = 0.0;
    double gap = 0.0;             // |last_value - window_mean|
    double bound = 0.0;           // tol * n + payoff fluctuation within the window
    bool holds = false;           // gap <= bound (meaningful only when converged)
};

/// argmax_j sum_i w_i M[i][j]; lowest index wins ties.
std::size_t best_response_column(const PayoffMatrix &M, const Vec &w);

/// Runs the adapted multiplicative-weights game for T rounds: the max player
/// best-responds to w^t, the min player applies mw_update. w0 defaults to
/// uniform. The trace records every round including the pre-projection vector.
GameTrace run_mw_game(const PayoffMatrix &M, std::size_t T, const MWConfig &cfg,
                      const RestrictedSimplex &s, const std::optional<Vec> &w0 = std::nullopt);

/// Verifies the regret bound on a ProofClip trace: checks the per-step KL
/// inequality for every round (slack tolerance 1e-9) against the exact best
/// fixed strategy, and evaluates both the exact penultimate bound and the
/// simplified bound from the theorem statement.
RegretDiagnostics verify_regret_bound(const GameTrace &trace, const RestrictedSimplex &s, double tau);

/// The learning rate from the theorem statement:
/// ln(1 + sqrt(ln(n)/T) / (1 + alpha_max)).
double tau_theorem(std::size_t n, std::size_t T, double alpha_max);

/// Checks that the last-iterate value matches the trailing-window average
/// when the weights have stopped moving (trailing-window infinity-norm
/// variation below tol).
LastIterateReport last_iterate_check(const GameTrace &trace, std::size_t window, double tol);

/// CSV export: header then one row per round, t, j, V, w_1..w_n.
void write_trace_csv(const GameTrace &trace, std::ostream &os);

/// JSON export of the diagnostics (lhs, best_fixed, rhs_exact, rhs_theorem,
/// max_alpha, per_step_violations, plus run parameters).
std::string diagnostics_json(const RegretDiagnostics &d, const GameTrace &trace);

}  // namespace clam
