#include "clam/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace clam {

namespace {

constexpr double kStepTol = 1e-9;

double kl_divergence(const Vec &p, const Vec &q) {
    double out = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;  // 0 * ln 0 := 0
        if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
        out += p[i] * std::log(p[i] / q[i]);
    }
    return out;
}

}  // namespace

PayoffMatrix::PayoffMatrix(std::size_t n_, std::size_t m_, std::vector<double> entries_)
    : n(n_), m(m_), entries(std::move(entries_)) {
    if (n < 2 || m < 1) throw std::invalid_argument("PayoffMatrix: need n >= 2, m >= 1");
    if (entries.size() != n * m) throw std::invalid_argument("PayoffMatrix: wrong entry count");
    for (double e : entries)
        if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("PayoffMatrix: entries must be in [0,1]");
}

Vec PayoffMatrix::column(std::size_t j) const {
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = at(i, j);
    return out;
}

PayoffMatrix PayoffMatrix::random(std::size_t n, std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> e(n * m);
    for (double &x : e) x = unit(rng);
    return PayoffMatrix(n, m, std::move(e));
}

std::size_t best_response_column(const PayoffMatrix &M, const Vec &w) {
    if (w.size() != M.n) throw std::invalid_argument("best_response_column: dimension mismatch");
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < M.m; ++j) {
        double value = 0.0;
        for (std::size_t i = 0; i < M.n; ++i) value += w[i] * M.at(i, j);
        if (value > best_value) {
            best_value = value;
            best = j;
        }
    }
    return best;
}

GameTrace run_mw_game(const PayoffMatrix &M, std::size_t T, const MWConfig &cfg,
                      const RestrictedSimplex &s, const std::optional<Vec> &w0) {
    if (s.n != M.n) throw std::invalid_argument("run_mw_game: simplex/matrix dimension mismatch");
    Vec w = w0 ? *w0 : uniform_weights(M.n);
    if (w0 && !s.contains(*w0)) throw std::invalid_argument("run_mw_game: w0 not in the restricted simplex");

    GameTrace trace;
    trace.n = M.n;
    trace.u_min = s.u_min;
    trace.tau = cfg.tau;
    trace.projection = cfg.projection;
    trace.rounds.reserve(T);

    for (std::size_t t = 0; t < T; ++t) {
        GameRound round;
        round.w = w;
        round.j = best_response_column(M, w);
        round.v = M.column(round.j);
        round.value = weighted_value(w, round.v);

        Vec u(M.n);
        double z = 0.0;
        for (std::size_t i = 0; i < M.n; ++i) {
            u[i] = w[i] * std::exp(-cfg.tau * round.v[i]);
            z += u[i];
        }
        round.x_next = u;
        if (z != 1.0)
            for (double &xi : round.x_next) xi /= z;

        w = project(round.x_next, s, cfg.projection);
        trace.rounds.push_back(std::move(round));
    }
    return trace;
}

RegretDiagnostics verify_regret_bound(const GameTrace &trace, const RestrictedSimplex &s, double tau) {
    RegretDiagnostics d;
    d.valid = trace.projection == Projection::ProofClip;
    const std::size_t T = trace.epochs();
    if (T == 0) {
        d.summed_bound_holds = true;
        return d;
    }
    if (s.n != trace.n) throw std::invalid_argument("verify_regret_bound: dimension mismatch");

    // Comparator: the best fixed strategy in hindsight. sum_t <w, v^t> is
    // linear in w, so the minimizer over the simplex of the time-summed
    // payoff vector is exact.
    Vec v_sum(trace.n, 0.0);
    for (const GameRound &r : trace.rounds)
        for (std::size_t i = 0; i < trace.n; ++i) v_sum[i] += r.v[i];
    auto [w_tilde, total_best] = min_linear_over_simplex(v_sum, s);
    d.comparator = w_tilde;
    d.best_fixed = total_best / static_cast<double>(T);

    d.eps.reserve(T);
    d.alpha.reserve(T);
    d.step_slack.reserve(T);
    double value_sum = 0.0;
    d.max_step_slack = -std::numeric_limits<double>::infinity();

    for (std::size_t t = 0; t < T; ++t) {
        const GameRound &r = trace.rounds[t];
        value_sum += r.value;

        const Vec &w_next =
            (t + 1 < T) ? trace.rounds[t + 1].w : project(r.x_next, s, trace.projection);

        double v_tilde = weighted_value(w_tilde, r.v);
        double lifted = 0.0;
        Vec eps_t(trace.n, 0.0);
        for (std::size_t i = 0; i < trace.n; ++i) {
            const double xi = r.x_next[i];
            eps_t[i] = xi > 0.0 ? w_next[i] / xi - 1.0
                                : (w_next[i] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
            if (eps_t[i] > 0.0) lifted += w_tilde[i] * r.v[i];
        }
        d.eps.push_back(std::move(eps_t));
        const double alpha_t = v_tilde > 0.0 ? lifted / v_tilde : 0.0;
        d.alpha.push_back(alpha_t);
        d.max_alpha = std::max(d.max_alpha, alpha_t);

        const double kl_step = kl_divergence(w_tilde, w_next) - kl_divergence(w_tilde, r.w);
        const double rhs = -(1.0 - std::exp(-tau)) * r.value + (1.0 + alpha_t) * tau * v_tilde;
        const double slack = kl_step - rhs;
        d.step_slack.push_back(slack);
        d.max_step_slack = std::max(d.max_step_slack, slack);
        if (slack > kStepTol) ++d.per_step_violations;
    }

    d.lhs = value_sum / static_cast<double>(T);

    const double Td = static_cast<double>(T);
    const double log_n = std::log(static_cast<double>(trace.n));
    const double tail = log_n / Td + (1.0 + d.max_alpha) * std::sqrt(log_n / Td);
    const double exact_coef =
        (1.0 + d.max_alpha) / Td + 0.5 * std::sqrt(log_n / (Td * Td * Td));
    d.rhs_exact = exact_coef * total_best + tail;
    d.rhs_theorem = d.best_fixed + tail;
    d.summed_bound_holds = d.lhs <= d.rhs_exact + kStepTol;
    return d;
}

double tau_theorem(std::size_t n, std::size_t T, double alpha_max) {
    if (n < 2) throw std::invalid_argument("tau_theorem: need n >= 2");
    if (T < 1) throw std::invalid_argument("tau_theorem: need T >= 1");
    if (!(alpha_max >= 0.0 && alpha_max <= 1.0))
        throw std::invalid_argument("tau_theorem: alpha_max must be in [0,1]");
    const double z = std::sqrt(std::log(static_cast<double>(n)) / static_cast<double>(T));
    return std::log1p(z / (1.0 + alpha_max));
}

LastIterateReport last_iterate_check(const GameTrace &trace, std::size_t window, double tol) {
    const std::size_t T = trace.epochs();
    if (window < 2) throw std::invalid_argument("last_iterate_check: window must be >= 2");
    if (window > T) throw std::invalid_argument("last_iterate_check: window larger than trace");

    LastIterateReport rep;
    const std::size_t start = T - window;

    // Per-component spread over the window equals the max pairwise inf-norm.
    double variation = 0.0;
    for (std::size_t i = 0; i < trace.n; ++i) {
        double lo = trace.rounds[start].w[i];
        double hi = lo;
        for (std::size_t t = start + 1; t < T; ++t) {
            lo = std::min(lo, trace.rounds[t].w[i]);
            hi = std::max(hi, trace.rounds[t].w[i]);
        }
        variation = std::max(variation, hi - lo);
    }
    rep.weight_variation = variation;
    rep.converged = variation < tol;

    double mean = 0.0;
    double fluctuation = 0.0;
    const Vec &v_last = trace.rounds[T - 1].v;
    for (std::size_t t = start; t < T; ++t) {
        mean += trace.rounds[t].value;
        for (std::size_t i = 0; i < trace.n; ++i)
            fluctuation = std::max(fluctuation, std::abs(trace.rounds[t].v[i] - v_last[i]));
    }
    mean /= static_cast<double>(window);

    rep.last_value = trace.rounds[T - 1].value;
    rep.window_mean = mean;
    rep.gap = std::abs(rep.last_value - mean);
    rep.bound = tol * static_cast<double>(trace.n) + fluctuation;
    rep.holds = rep.converged && rep.gap <= rep.bound;
    return rep;
}

void write_trace_csv(const GameTrace &trace, std::ostream &os) {
    os << "t,j,V";
    for (std::size_t i = 1; i <= trace.n; ++i) os << ",w_" << i;
    os << "\n";
    os.precision(17);
    for (std::size_t t = 0; t < trace.epochs(); ++t) {
        const GameRound &r = trace.rounds[t];
        os << (t + 1) << ',' << r.j << ',' << r.value;
        for (double wi : r.w) os << ',' << wi;
        os << "\n";
    }
}

std::string diagnostics_json(const RegretDiagnostics &d, const GameTrace &trace) {
    nlohmann::json j;
    j["n"] = trace.n;
    j["T"] = trace.epochs();
    j["tau"] = trace.tau;
    j["u_min"] = trace.u_min;
    j["projection"] = to_string(trace.projection);
    j["valid"] = d.valid;
    j["lhs"] = d.lhs;
    j["best_fixed"] = d.best_fixed;
    j["rhs_exact"] = d.rhs_exact;
    j["rhs_theorem"] = d.rhs_theorem;
    j["max_alpha"] = d.max_alpha;
    j["per_step_violations"] = d.per_step_violations;
    j["max_step_slack"] = d.max_step_slack;
    j["summed_bound_holds"] = d.summed_bound_holds;
    j["comparator"] = d.comparator;
    return j.dump(2);
}

}  // namespace clam
