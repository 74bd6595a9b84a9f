#pragma once

#include <span>
#include <vector>

#include "fedsim/aggregation.hpp"
#include "fedsim/dp.hpp"
#include "fedsim/model.hpp"

namespace fedsim {

enum class AttackKind { kNone, kGaussian, kBudget, kSyncLaplace, kKrumCollusion, kTmDirectional };
enum class Knowledge { kOmniscient, kHistoryOnly };

struct AttackSpec {
    AttackKind kind = AttackKind::kNone;
    double epsilon_s = 0.3;      // Sybil privacy budget, < epsilon_h
    double gaussian_sigma = 0.3; // baseline attack only
    Knowledge knowledge = Knowledge::kOmniscient;
};

// All attack entry points mutate only the coalition members handed to them.
// Members act on one shared stream (collusion).

// Baseline: elementwise i.i.d. Gaussian(0, sigma^2) noise on each member.
void attack_gaussian(std::vector<ClientUpdate*>& members, double sigma, RngStream& rng);

// Laplace perturbation at the Sybil budget epsilon_s instead of the honest
// budget; scale per member from its own D_max and n_k.
void attack_fedavg_budget(std::vector<ClientUpdate*>& members, double epsilon_s, double epsilon_h,
                          int rounds, RngStream& rng);

// Half-Laplace magnitudes with one shared sign per coordinate per round, so
// member noises add coherently instead of cancelling.
void attack_fedavg_sync(std::vector<ClientUpdate*>& members, double epsilon_s, double epsilon_h,
                        int rounds, RngStream& rng);

// One crafted vector (coalition mean plus Laplace noise at a tuned
// epsilon_s) copied to every member for zero intra-coalition distance.
// The tuner walks the candidate budgets from strongest noise to weakest and
// keeps the first whose copies win a simulated Krum selection against the
// visible honest updates; with no visible honest updates (or no winning
// candidate) the honest budget is used. Returns the epsilon_s actually used.
double attack_krum_collusion(std::vector<ClientUpdate*>& members,
                             const std::vector<const ParamVector*>& honest, double epsilon_h,
                             std::span<const double> candidates, int rounds, RngStream& rng);

// Per coordinate j with direction d_j != 0: every member's value becomes
// the c-th order statistic of the honest values on the side opposite d_j,
// pushed further by a half-Laplace magnitude at the Sybil budget.
// Coordinates with d_j = 0 are left unmodified.
void attack_trimmed_mean(std::vector<ClientUpdate*>& members,
                         const std::vector<const ParamVector*>& honest,
                         const Eigen::VectorXd& direction, double epsilon_s, int rounds,
                         RngStream& rng);

// Coordinate-wise sign of (target - reference): the direction each global
// parameter intends to move. Zero where the two agree exactly.
Eigen::VectorXd intended_direction(const ParamVector& target, const ParamVector& reference);

}  // namespace fedsim
