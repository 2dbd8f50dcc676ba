#pragma once

#include "delay.hpp"
#include "nn.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace idrl {

struct BoundCertificate {
  std::string kind;  // "belief", "reward", "performance"
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  int delay = 0;
  double lt = 0.0;
  double lr = 0.0;
  double gamma = 0.0;
  double r_max = 0.0;
  int instance = -1;  // index of the MDP within a suite
  int x = -1;         // augmented index for tabular certificates
  int action = -1;
  bool pass = false;
};

inline constexpr double kCertificateTolerance = 1e-9;

BoundCertificate make_certificate(std::string kind, double lhs, double rhs, int delay, double lt, double lr,
                                  double gamma, double r_max);

// Exact W1 between two distributions on the same 1-D support.
double w1_discrete(const Vec& p, const Vec& q, const Vec& coords);

// W1(b(x), δ_{s_{t-Δ}}) <= Δ L_T for every augmented state and Δ = 1..delay_max.
// `lt` overrides the exact constant (negative controls).
std::vector<BoundCertificate> certify_belief_bound(const TabularMDP& mdp, int delay_max,
                                                   std::optional<double> lt = std::nullopt);

// For b^{(k)} the belief after the first k window actions, returns
// W1(b^{(k-1)}, b^{(k)}) + W1(b^{(k-1)}, δ) - W1(b^{(k)}, δ) for k = 1..Δ.
std::vector<double> belief_telescoping_gaps(const TabularMDP& mdp, int obs, const std::vector<int>& window);

// |E_{s~b} R(s,a) - R(s_{t-Δ},a)| <= Δ L_R L_T for every (x, a). `reward`
// replaces the MDP's own table when given (e.g. a learned reward).
std::vector<BoundCertificate> certify_reward_bound(const TabularMDP& mdp, int delay,
                                                   const std::optional<Mat>& reward = std::nullopt,
                                                   std::optional<double> lt = std::nullopt);

using RewardFn = std::function<double(const Vec& state, const Vec& action)>;

// Monte-Carlo reward-bound check at given (x, a) points of a continuous env.
std::vector<BoundCertificate> certify_reward_bound_mc(const Env& env, const RewardFn& reward, double lr,
                                                      const std::vector<std::pair<AugmentedState, Vec>>& points,
                                                      int n_particles, std::uint64_t seed);

// Monte-Carlo belief-bound check: W1 to a Dirac is the mean distance to it.
std::vector<BoundCertificate> certify_belief_bound_mc(const Env& env, const std::vector<AugmentedState>& points,
                                                      int n_particles, std::uint64_t seed);

// max_i ||d net / d input[cols]|| over the sampled rows, times 1.1.
double estimate_lipschitz(const Mlp& net, const Mat& points, int col_start, int col_count);

// max_x |V^{π_Δ}(x) - V^π(x)| <= (R_max + Δ L_R L_T) / (1 - γ). `policy_aug`
// is (augmented states x actions); `policy_obs` (states x actions) acts on
// the delayed observation alone.
BoundCertificate certify_perf_bound(const TabularMDP& mdp, const Mat& policy_aug, const Mat& policy_obs, int delay,
                                    double gamma, std::optional<double> lt = std::nullopt);

// Rewards are drawn in [0, 1]. Transition rows are random with a random
// number of zero entries; embedding is the state index.
TabularMDP random_mdp(int n_states, int n_actions, Rng& rng);
Mat random_policy(int rows, int n_actions, Rng& rng);

struct CertifySuiteConfig {
  int n_mdps = 100;
  int max_states = 6;
  int max_actions = 3;
  int max_delay = 3;
  double gamma = 0.9;
  double lt_scale = 1.0;  // < 1 corrupts L_T
  std::uint64_t seed = 0;
};

struct CertifySummary {
  int total = 0;
  int failures = 0;
  double min_slack = 0.0;
  std::vector<std::pair<std::string, std::pair<int, int>>> by_kind;  // kind -> (total, failures)
};

std::vector<BoundCertificate> run_certify_suite(const CertifySuiteConfig& cfg);
CertifySummary summarize(const std::vector<BoundCertificate>& certs);
std::string certificates_csv(const std::vector<BoundCertificate>& certs);
std::string summary_json(const CertifySummary& s);

}  // namespace idrl
