#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "consort/game.hpp"

namespace consort {

struct ValuationEstimate {
  std::string member_id;
  std::string method;  // exact | permutation | stratified | cluster
  double value = 0.0;
  double std_error = 0.0;  // 0 for exact
  std::uint64_t samples = 0;
  std::uint64_t evals = 0;  // v queries attributable to this row
};

// Fixed random order for deleting the other members from the full set.
// Prefix coalition T_k drops the first k of `order`, so |T_k| = N - 1 - k.
struct RemovalChain {
  int subject = 0;
  std::vector<int> order;  // all members except the subject, removal order
};

// Uniform random chain, a pure function of (seed, subject, index).
RemovalChain sample_chain(int subject, int n_members, std::uint64_t seed,
                          std::uint64_t index);

struct MarginalProfile {
  std::vector<double> delta;  // delta[k] = v(T_k + subject) - v(T_k)
  std::vector<int> flips;     // k where the decision differs with the subject
  bool fell_back = false;     // binary search bailed out to the full scan
  std::uint64_t queries = 0;  // v queries issued for this chain
};

// Evaluates every prefix of the chain directly: 2N queries, always exact.
MarginalProfile marginal_profile_scan(Game& game, const RemovalChain& chain);

// Binary search for the first prefix where the subject flips the decision,
// assuming the flip indicator is a single ascending step along the chain.
// The flipped tail is evaluated explicitly (verifying it as a side effect);
// the quiet prefix is checked at its endpoints and midpoint. Any violation
// falls back to the full scan and flags the chain.
MarginalProfile marginal_profile_bsearch(Game& game, const RemovalChain& chain);

struct ShapleyRun {
  std::vector<ValuationEstimate> estimates;  // dataset member order
  double grand_value = 0.0;                  // v(M)
  double residual = 0.0;                     // v(M) - sum of estimates
  std::uint64_t fallback_count = 0;
  std::map<int, std::uint64_t> flip_histogram;  // chains by flip-set size
  std::uint64_t total_queries = 0;
};

// Exact Shapley values by subset enumeration with the closed-form ordering
// weights; equal to the average over all N! orderings. Guarded at 20 members
// (2^N evaluations); larger games must sample.
ShapleyRun exact_shapley(Game& game);

struct PermutationOptions {
  std::uint64_t n_permutations = 20000;
  std::uint64_t seed = 0;
  int workers = 1;
};

// Mean marginal contribution over uniform random member orderings.
ShapleyRun permutation_shapley(Game& game, const PermutationOptions& options);

struct StratifiedOptions {
  std::uint64_t n_chains = 2000;
  std::uint64_t seed = 0;
  bool use_bsearch = false;
  int workers = 1;
};

// Removal-chain estimator stratified by coalition size: each chain yields one
// marginal sample at every size, sizes are averaged uniformly (each size is
// equally likely under a uniform ordering, so no reweighting is needed).
ShapleyRun stratified_shapley(Game& game, const StratifiedOptions& options);

// k-means over per-member features (normalized signal, one-hot segment,
// min-max scaled volume) with farthest-first seeding. Nearest-centroid ties
// break toward the lowest cluster id.
std::unordered_map<std::string, int> cluster_members(
    const MemberDataset& dataset, int k, std::uint64_t seed,
    const PipelineConfig& config = PipelineConfig{});

struct ClusterOptions {
  int k = 1;
  int sample_per_cluster = 2;
  std::uint64_t n_chains = 2000;
  std::uint64_t seed = 0;
  int workers = 1;
};

// Clusters members, runs the stratified estimator on a sample from each
// cluster, and assigns the sample mean to every member of the cluster. The
// efficiency residual is reported, never redistributed.
ShapleyRun clustered_shapley(GameHandle& game, const ClusterOptions& options);

namespace detail {
// Cluster ids aligned with dataset member order.
std::vector<int> cluster_assignments(const MemberDataset& dataset, int k,
                                     std::uint64_t seed,
                                     const PipelineConfig& config);
}  // namespace detail

}  // namespace consort
