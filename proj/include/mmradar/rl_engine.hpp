#ifndef MMRADAR_RL_ENGINE_HPP
#define MMRADAR_RL_ENGINE_HPP

// Tabular SARSA agent that picks how many of the strongest bins to focus on.
//
// States s^(i) and actions a^(j) are both indexed 0..K: the state is the
// (capped) number of detections, the action is the number of top-ranked bins
// the transmitter focuses on next. The module also holds the reward, the
// three action-selection policies, the reward-driven adaptation of the
// exploration rate and learning rate, and the non-learning controllers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mmradar/beamformer.hpp"
#include "mmradar/detector.hpp"
#include "mmradar/environment.hpp"
#include "mmradar/errors.hpp"
#include "mmradar/rng.hpp"

namespace mmradar {

/// (K+1) x (K+1) state-action values, rows are states, columns actions.
class QMatrix {
public:
    QMatrix() = default;
    explicit QMatrix(int max_targets, double diagonal = 1.0)
        : dim_(static_cast<std::size_t>(max_targets) + 1), values_(dim_ * dim_, 0.0) {
        if (max_targets < 0) throw ConfigError("K must be non-negative");
        for (std::size_t i = 0; i < dim_; ++i) values_[i * dim_ + i] = diagonal;
    }

    static QMatrix zeros(int max_targets) { return QMatrix(max_targets, 0.0); }

    int max_targets() const { return static_cast<int>(dim_) - 1; }
    std::size_t dim() const { return dim_; }

    double operator()(int s, int a) const { return values_[index(s, a)]; }
    double& operator()(int s, int a) { return values_[index(s, a)]; }

    bool operator==(const QMatrix&) const = default;

private:
    std::size_t index(int s, int a) const {
        if (s < 0 || a < 0 || static_cast<std::size_t>(s) >= dim_ || static_cast<std::size_t>(a) >= dim_)
            throw ConfigError("state/action index outside [0, K]");
        return static_cast<std::size_t>(s) * dim_ + static_cast<std::size_t>(a);
    }

    std::size_t dim_ = 0;
    std::vector<double> values_;
};

/// Bins of the action_j largest statistics; empty for action 0.
inline std::vector<BinNumber> omega_set(const DetectionReport& report, int action_j) {
    if (action_j < 0) throw ConfigError("action index must be non-negative");
    const std::size_t n = std::min(static_cast<std::size_t>(action_j), report.sorted_bins.size());
    return {report.sorted_bins.begin(), report.sorted_bins.begin() + static_cast<std::ptrdiff_t>(n)};
}

/// r = sum of P_D estimates over the top-i_k bins minus the sum over the
/// remaining bins of the top-K set.
inline double reward(const DetectionReport& report, int K) {
    const std::size_t psi = std::min(static_cast<std::size_t>(std::max(K, 0)), report.sorted_bins.size());
    const std::size_t phi = std::min(static_cast<std::size_t>(std::max(report.state_index, 0)), psi);
    double r = 0.0;
    for (std::size_t n = 0; n < psi; ++n) {
        const double pd = report.pd(report.sorted_bins[n]);
        r += n < phi ? pd : -pd;
    }
    return r;
}

/// Q(s,a) += alpha (r + gamma Q(s',a') - Q(s,a)); no other entry changes.
inline QMatrix sarsa_update(QMatrix q, int s, int a, double r, int s_next, int a_next, double alpha, double gamma) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("learning rate must lie in (0, 1)");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("discount factor must lie in [0, 1]");
    const double target = r + gamma * q(s_next, a_next);
    q(s, a) += alpha * (target - q(s, a));
    return q;
}

/// argmax_a Q(s, a), lowest action index on ties.
inline int greedy_action(const QMatrix& q, int s) {
    int best = 0;
    for (int a = 1; a <= q.max_targets(); ++a)
        if (q(s, a) > q(s, best)) best = a;
    return best;
}

enum class PolicyKind { eps_greedy, quasi, recovery };

inline PolicyKind parse_policy(std::string_view s) {
    if (s == "eps" || s == "eps_greedy") return PolicyKind::eps_greedy;
    if (s == "quasi") return PolicyKind::quasi;
    if (s == "recovery") return PolicyKind::recovery;
    throw ConfigError("unknown policy kind '" + std::string(s) + "' (expected eps|quasi|recovery)");
}

inline std::string_view to_string(PolicyKind p) {
    switch (p) {
        case PolicyKind::eps_greedy: return "eps";
        case PolicyKind::quasi: return "quasi";
        case PolicyKind::recovery: return "recovery";
    }
    return "?";
}

struct ActionChoice {
    int action = 0;
    bool explored = false;  // true iff the random branch produced the action
};

namespace detail {
/// Greedy w.p. 1 - eps, else uniform over the actions >= min_action other than greedy.
inline ActionChoice explore_or_exploit(const QMatrix& q, int s, int min_action, double eps, Rng& rng) {
    const int greedy = greedy_action(q, s);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (!(coin(rng) < eps)) return {greedy, false};
    std::vector<int> pool;
    for (int a = std::max(min_action, 0); a <= q.max_targets(); ++a)
        if (a != greedy) pool.push_back(a);
    if (pool.empty()) return {greedy, false};
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    return {pool[pick(rng)], true};
}
}  // namespace detail

/// Next action under the given policy.
///
/// eps_greedy explores over every action but the greedy one. quasi only
/// explores actions that focus on at least as many bins as are currently
/// detected. recovery re-uses the previous state's greedy action whenever the
/// detection count drops, and behaves like quasi otherwise.
inline ActionChoice select_action(PolicyKind kind, const QMatrix& q, int s_curr, int s_prev, double eps, Rng& rng) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError("exploration rate must lie in [0, 1]");
    switch (kind) {
        case PolicyKind::eps_greedy: return detail::explore_or_exploit(q, s_curr, 0, eps, rng);
        case PolicyKind::quasi: return detail::explore_or_exploit(q, s_curr, s_curr, eps, rng);
        case PolicyKind::recovery:
            if (s_curr < s_prev) return {greedy_action(q, s_prev), false};
            return detail::explore_or_exploit(q, s_curr, s_curr, eps, rng);
    }
    throw ConfigError("unknown policy kind");
}

/// Constants of the reward-driven update of one hyper-parameter.
struct AdaptationConstants {
    double x_min = 0.0;
    double x_max = 1.0;
    double c1 = 0.8;   // decrease factor, in (0, 1)
    double c2 = 2.0;   // increase factor, > 1
    double eta1 = 0.5;
    double eta2 = 1.8;

    void validate() const {
        if (!(x_min <= x_max)) throw ConfigError("x_min must not exceed x_max");
        if (!(c1 > 0.0 && c1 < 1.0)) throw ConfigError("c1 must lie in (0, 1)");
        if (!(c2 > 1.0)) throw ConfigError("c2 must exceed 1");
        if (!(eta1 >= 0.0 && eta1 <= eta2)) throw ConfigError("need 0 <= eta1 <= eta2");
    }
};

inline AdaptationConstants default_eps_constants() { return {0.1, 0.8, 0.8, 2.0, 0.5, 1.8}; }
inline AdaptationConstants default_alpha_constants() { return {0.2, 0.6, 0.9, 2.5, 0.5, 1.8}; }

/// One multiplicative-decrease / multiplicative-increase / reset step driven by |d|.
/// Boundaries belong to the lower branch: [0, eta1] decrease, (eta1, eta2] increase, above reset.
inline double adapt_value(double x, double abs_d, const AdaptationConstants& c) {
    if (abs_d <= c.eta1) return std::max(c.c1 * x, c.x_min);
    if (abs_d <= c.eta2) return std::min(c.c2 * x, c.x_max);
    return c.x_max;
}

struct HyperParamState {
    double eps = 0.8;
    double alpha = 0.6;
    AdaptationConstants eps_constants = default_eps_constants();
    AdaptationConstants alpha_constants = default_alpha_constants();
    bool adapt_eps = true;
    bool adapt_alpha = true;
    double last_reward = 0.0;

    /// Adaptive parameters start at x_max; static ones at the given values.
    static HyperParamState make(bool adapt_eps, bool adapt_alpha, double static_eps, double static_alpha,
                                AdaptationConstants eps_c = default_eps_constants(),
                                AdaptationConstants alpha_c = default_alpha_constants()) {
        eps_c.validate();
        alpha_c.validate();
        HyperParamState h;
        h.eps_constants = eps_c;
        h.alpha_constants = alpha_c;
        h.adapt_eps = adapt_eps;
        h.adapt_alpha = adapt_alpha;
        h.eps = adapt_eps ? eps_c.x_max : static_eps;
        h.alpha = adapt_alpha ? alpha_c.x_max : static_alpha;
        return h;
    }
};

/// d_k = r_k - r_{k-1} (d_1 = r_1). Values are frozen when both of the last two
/// actions came from the exploration branch; last_reward always advances.
inline HyperParamState adapt_hyperparam(HyperParamState h, double r_new, int k, bool explored_prev, bool explored_curr) {
    const double d = k == 1 ? r_new : r_new - h.last_reward;
    h.last_reward = r_new;
    if (explored_prev && explored_curr) return h;
    if (h.adapt_eps) h.eps = adapt_value(h.eps, std::abs(d), h.eps_constants);
    if (h.adapt_alpha) h.alpha = adapt_value(h.alpha, std::abs(d), h.alpha_constants);
    return h;
}

enum class BaselineKind { orthogonal, nrl_c, clairvoyant };

/// Focus set of a non-learning controller. The clairvoyant controller ignores
/// the report and aims at the bins of the targets active at time k.
inline FocusRequest baseline_action(BaselineKind kind, const DetectionReport& report, const Scenario& scenario, int k,
                                    double p_max) {
    FocusRequest req;
    req.p_max = p_max;
    switch (kind) {
        case BaselineKind::orthogonal: break;
        case BaselineKind::nrl_c:
            for (std::size_t l = 0; l < report.detections.size(); ++l)
                if (report.detections[l]) req.bins.push_back(static_cast<BinNumber>(l + 1));
            break;
        case BaselineKind::clairvoyant:
            for (std::size_t t : scenario.active_targets(k)) {
                const BinNumber b = scenario.targets[t].bin;
                if (std::find(req.bins.begin(), req.bins.end(), b) == req.bins.end()) req.bins.push_back(b);
            }
            std::sort(req.bins.begin(), req.bins.end());
            break;
    }
    return req;
}

}  // namespace mmradar

#endif  // MMRADAR_RL_ENGINE_HPP
