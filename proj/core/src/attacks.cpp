#include "fedsim/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fedsim {

namespace {

double max_abs(const ParamVector& w) { return w.size() ? w.cwiseAbs().maxCoeff() : 0.0; }

void check_budget(double epsilon_s, double epsilon_h) {
    if (epsilon_s <= 0.0 || epsilon_s >= epsilon_h) {
        throw std::invalid_argument("attack requires 0 < epsilon_s < epsilon_h");
    }
}

double positive_magnitude(double b, RngStream& rng) {
    double m = std::abs(rng.laplace(b));
    if (m == 0.0) m = std::numeric_limits<double>::min();
    return m;
}

}  // namespace

void attack_gaussian(std::vector<ClientUpdate*>& members, double sigma, RngStream& rng) {
    if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
    for (ClientUpdate* m : members) {
        for (Eigen::Index j = 0; j < m->params.size(); ++j) m->params[j] += rng.normal(sigma);
    }
}

void attack_fedavg_budget(std::vector<ClientUpdate*>& members, double epsilon_s, double epsilon_h,
                          int rounds, RngStream& rng) {
    check_budget(epsilon_s, epsilon_h);
    for (ClientUpdate* m : members) {
        auto spec = laplace_scale(max_abs(m->params), rounds, m->n_k, {epsilon_s});
        m->params = perturb_update(m->params, spec, rng);
    }
}

void attack_fedavg_sync(std::vector<ClientUpdate*>& members, double epsilon_s, double epsilon_h,
                        int rounds, RngStream& rng) {
    check_budget(epsilon_s, epsilon_h);
    if (members.empty()) return;
    const Eigen::Index d = members.front()->params.size();

    // one sign per coordinate per round, shared by the whole coalition
    Eigen::VectorXd signs(d);
    for (Eigen::Index j = 0; j < d; ++j) signs[j] = rng.uniform01() < 0.5 ? -1.0 : 1.0;

    for (ClientUpdate* m : members) {
        auto spec = laplace_scale(max_abs(m->params), rounds, m->n_k, {epsilon_s});
        for (Eigen::Index j = 0; j < d; ++j) {
            m->params[j] += signs[j] * std::abs(rng.laplace(spec.scale_b));
        }
    }
}

double attack_krum_collusion(std::vector<ClientUpdate*>& members,
                             const std::vector<const ParamVector*>& honest, double epsilon_h,
                             std::span<const double> candidates, int rounds, RngStream& rng) {
    if (members.empty()) throw std::invalid_argument("empty coalition");
    const int c = static_cast<int>(members.size());
    const Eigen::Index d = members.front()->params.size();

    ParamVector base = ParamVector::Zero(d);
    for (const ClientUpdate* m : members) base += m->params;
    base /= c;
    const double d_max = max_abs(base);
    const int n_k = members.front()->n_k;

    auto craft = [&](double eps) {
        auto spec = laplace_scale(d_max, rounds, n_k, {eps});
        return perturb_update(base, spec, rng);
    };

    const int K = static_cast<int>(honest.size()) + c;
    ParamVector chosen;
    double chosen_eps = epsilon_h;
    bool found = false;

    // Krum needs K - c - 2 >= 1 to simulate; otherwise fall back to the
    // honest budget directly.
    if (!honest.empty() && K - c - 2 >= 1) {
        UpdateSet sim;
        sim.updates.reserve(K);
        int id = 0;
        for (const ParamVector* h : honest) sim.updates.push_back({id++, *h, n_k, false});
        for (int i = 0; i < c; ++i) sim.updates.push_back({id++, ParamVector(), n_k, true});
        // strongest noise first: walk candidates ascending
        for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
            ParamVector cand = craft(*it);
            for (int i = 0; i < c; ++i) sim.updates[honest.size() + i].params = cand;
            if (krum_select(sim, c).first >= static_cast<int>(honest.size())) {
                chosen = std::move(cand);
                chosen_eps = *it;
                found = true;
                break;
            }
        }
    }
    if (!found) chosen = craft(epsilon_h);

    for (ClientUpdate* m : members) m->params = chosen;
    return chosen_eps;
}

void attack_trimmed_mean(std::vector<ClientUpdate*>& members,
                         const std::vector<const ParamVector*>& honest,
                         const Eigen::VectorXd& direction, double epsilon_s, int rounds,
                         RngStream& rng) {
    if (members.empty() || honest.empty()) return;
    const Eigen::Index d = members.front()->params.size();
    if (direction.size() != d) throw std::invalid_argument("direction dimension mismatch");
    const int c = static_cast<int>(members.size());
    const int H = static_cast<int>(honest.size());

    // c-th order statistic per coordinate, counted from the side opposite
    // the intended direction
    std::vector<double> column(H);
    std::vector<double> stat_lo(d), stat_hi(d);
    bool need_lo = (direction.array() > 0.0).any();
    bool need_hi = (direction.array() < 0.0).any();
    const int ord = std::min(c, H) - 1;  // 0-based rank of the c-th order statistic
    for (Eigen::Index j = 0; j < d; ++j) {
        if (direction[j] == 0.0) continue;
        for (int i = 0; i < H; ++i) column[i] = (*honest[i])[j];
        std::sort(column.begin(), column.end());
        if (need_lo) stat_lo[j] = column[ord];
        if (need_hi) stat_hi[j] = column[H - 1 - ord];
    }

    for (ClientUpdate* m : members) {
        auto spec = laplace_scale(max_abs(m->params), rounds, m->n_k, {epsilon_s});
        for (Eigen::Index j = 0; j < d; ++j) {
            if (direction[j] > 0.0) {
                m->params[j] = stat_lo[j] - positive_magnitude(spec.scale_b, rng);
            } else if (direction[j] < 0.0) {
                m->params[j] = stat_hi[j] + positive_magnitude(spec.scale_b, rng);
            }
        }
    }
}

Eigen::VectorXd intended_direction(const ParamVector& target, const ParamVector& reference) {
    if (target.size() != reference.size()) throw std::invalid_argument("dimension mismatch");
    Eigen::VectorXd dir(target.size());
    for (Eigen::Index j = 0; j < target.size(); ++j) {
        double delta = target[j] - reference[j];
        dir[j] = delta > 0.0 ? 1.0 : (delta < 0.0 ? -1.0 : 0.0);
    }
    return dir;
}

}  // namespace fedsim
