#include "consort/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "consort/error.hpp"
#include "consort/parallel.hpp"
#include "consort/rng.hpp"

namespace consort {

namespace {

constexpr std::uint64_t kChainStream = 0x636e6831ull;
constexpr std::uint64_t kPermStream = 0x7065726dull;
constexpr std::uint64_t kClusterSeedStream = 0x636c7364ull;
constexpr std::uint64_t kClusterPickStream = 0x636c7069ull;

double binomial(int n, int k) {
  double result = 1.0;
  for (int i = 1; i <= k; ++i) result = result * double(n - k + i) / double(i);
  return result;
}

struct MeanVar {
  double mean = 0.0;
  double m2 = 0.0;
  std::uint64_t n = 0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / double(n);
    m2 += d * (x - mean);
  }
  // standard error of the mean; 0 with fewer than two samples
  double std_error() const {
    if (n < 2) return 0.0;
    return std::sqrt(m2 / double(n - 1) / double(n));
  }
};

void finish_run(Game& game, ShapleyRun& run, std::uint64_t queries_before) {
  double total = 0.0;
  for (const auto& e : run.estimates) total += e.value;
  run.grand_value = game.value(Mask::full(game.n_members())).value;
  run.residual = run.grand_value - total;
  run.total_queries = game.query_count() - queries_before;
}

struct MemberStratified {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t queries = 0;
};

// One member's stratified estimate over n_chains removal chains. Chains are
// keyed by (seed, subject, index), so any caller drawing the same parameters
// sees the same chains. The chain aggregate (mean marginal over the N size
// strata) is the per-chain sample; its spread gives a standard error that
// includes the cross-stratum correlation within a chain.
MemberStratified stratified_member(Game& game, int subject,
                                   const StratifiedOptions& options,
                                   ShapleyRun& run) {
  const int n = game.n_members();
  std::vector<double> slab(std::size_t(options.n_chains) * std::size_t(n), 0.0);
  std::vector<std::uint64_t> chain_queries(options.n_chains, 0);
  std::vector<int> chain_flips(options.n_chains, 0);
  std::vector<char> chain_fell_back(options.n_chains, 0);

  parallel_for(options.n_chains, options.workers, [&](std::size_t c) {
    const RemovalChain chain = sample_chain(subject, n, options.seed, c);
    const MarginalProfile profile = options.use_bsearch
                                        ? marginal_profile_bsearch(game, chain)
                                        : marginal_profile_scan(game, chain);
    std::copy(profile.delta.begin(), profile.delta.end(),
              slab.begin() + std::ptrdiff_t(c) * n);
    chain_queries[c] = profile.queries;
    chain_flips[c] = int(profile.flips.size());
    chain_fell_back[c] = profile.fell_back ? 1 : 0;
  });

  MeanVar agg;
  MemberStratified out;
  for (std::size_t c = 0; c < options.n_chains; ++c) {
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += slab[c * std::size_t(n) + std::size_t(k)];
    agg.add(sum / double(n));
    out.queries += chain_queries[c];
    ++run.flip_histogram[chain_flips[c]];
    run.fallback_count += chain_fell_back[c];
  }
  out.value = agg.mean;
  out.std_error = agg.std_error();
  return out;
}

}  // namespace

RemovalChain sample_chain(int subject, int n_members, std::uint64_t seed,
                          std::uint64_t index) {
  if (subject < 0 || subject >= n_members)
    throw InputError("sample_chain: subject out of range");
  RemovalChain chain;
  chain.subject = subject;
  chain.order.reserve(std::size_t(n_members) - 1);
  for (int i = 0; i < n_members; ++i)
    if (i != subject) chain.order.push_back(i);
  Rng rng(mix_seed({seed, kChainStream, std::uint64_t(subject), index}));
  rng.shuffle(chain.order);
  return chain;
}

MarginalProfile marginal_profile_scan(Game& game, const RemovalChain& chain) {
  const int n = game.n_members();
  MarginalProfile profile;
  profile.delta.assign(std::size_t(n), 0.0);
  Mask rest = Mask::full(n).without(chain.subject);
  for (int k = 0; k < n; ++k) {
    const CoalitionValue with = game.value(rest.with(chain.subject));
    const CoalitionValue without = game.value(rest);
    profile.queries += 2;
    profile.delta[std::size_t(k)] = with.value - without.value;
    if (!game.same_decision(with, without)) profile.flips.push_back(k);
    if (k < n - 1) rest.reset(chain.order[std::size_t(k)]);
  }
  return profile;
}

MarginalProfile marginal_profile_bsearch(Game& game,
                                         const RemovalChain& chain) {
  const int n = game.n_members();
  std::vector<Mask> coalition(std::size_t(n));
  {
    Mask rest = Mask::full(n).without(chain.subject);
    for (int k = 0; k < n; ++k) {
      coalition[std::size_t(k)] = rest;
      if (k < n - 1) rest.reset(chain.order[std::size_t(k)]);
    }
  }

  MarginalProfile profile;
  profile.delta.assign(std::size_t(n), 0.0);
  std::vector<char> known(std::size_t(n), 0);
  std::vector<CoalitionValue> with_v(std::size_t(n));
  std::vector<CoalitionValue> without_v(std::size_t(n));

  auto flips_at = [&](int k) {
    if (!known[std::size_t(k)]) {
      with_v[std::size_t(k)] =
          game.value(coalition[std::size_t(k)].with(chain.subject));
      without_v[std::size_t(k)] = game.value(coalition[std::size_t(k)]);
      profile.queries += 2;
      known[std::size_t(k)] = 1;
    }
    return !game.same_decision(with_v[std::size_t(k)], without_v[std::size_t(k)]);
  };

  auto full_scan = [&] {
    profile.flips.clear();
    for (int k = 0; k < n; ++k) {
      const bool flipped = flips_at(k);
      profile.delta[std::size_t(k)] =
          with_v[std::size_t(k)].value - without_v[std::size_t(k)].value;
      if (flipped) profile.flips.push_back(k);
    }
    profile.fell_back = true;
  };

  const bool first = flips_at(0);
  const bool last = flips_at(n - 1);
  int pivot = n;  // first flipped prefix; n means none
  if (first) {
    pivot = 0;
  } else if (last) {
    int lo = 0, hi = n - 1;  // invariant: no flip at lo, flip at hi
    while (hi - lo > 1) {
      const int mid = lo + (hi - lo) / 2;
      if (flips_at(mid)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    pivot = hi;
  } else {
    // assumed all-quiet; endpoints are done, probe the midpoint
    if (flips_at((n - 1) / 2)) {
      full_scan();
      return profile;
    }
    return profile;  // delta stays all-zero
  }

  // Explicit marginals on the flipped tail; doubles as its verification.
  // Equal decisions force a zero marginal, so the quiet prefix is exact
  // whenever the step assumption holds.
  for (int k = pivot; k < n; ++k) {
    if (!flips_at(k)) {
      full_scan();
      return profile;
    }
    profile.delta[std::size_t(k)] =
        with_v[std::size_t(k)].value - without_v[std::size_t(k)].value;
  }
  if (pivot > 0) {
    const int tail = pivot - 1;
    if (flips_at(0) || flips_at(tail) || flips_at(tail / 2)) {
      full_scan();
      return profile;
    }
  }
  for (int k = pivot; k < n; ++k) profile.flips.push_back(k);
  return profile;
}

ShapleyRun exact_shapley(Game& game) {
  const int n = game.n_members();
  if (n > 20) {
    throw CapacityError(
        "exact_shapley: " + std::to_string(n) +
        " members need 2^" + std::to_string(n) +
        " coalition evaluations; use a sampling method (permutation, "
        "stratified, or cluster)");
  }
  const std::uint64_t queries_before = game.query_count();
  ShapleyRun run;
  if (n == 0) return run;

  const std::size_t size = std::size_t{1} << n;
  std::vector<double> table(size);
  for (std::size_t m = 0; m < size; ++m)
    table[m] = game.value_uncached(Mask::from_bits(m, n)).value;

  // |S|! (N-|S|-1)! / N!  ==  1 / (N * C(N-1, |S|))
  std::vector<double> weight(std::size_t(n));
  for (int s = 0; s < n; ++s)
    weight[std::size_t(s)] = 1.0 / (double(n) * binomial(n - 1, s));

  std::vector<double> phi(std::size_t(n), 0.0);
  for (std::size_t m = 0; m < size; ++m) {
    const double w = weight[std::size_t(std::popcount(m))];
    for (int i = 0; i < n; ++i) {
      const std::size_t bit = std::size_t{1} << i;
      if (m & bit) continue;
      phi[std::size_t(i)] += w * (table[m | bit] - table[m]);
    }
  }

  run.estimates.reserve(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    run.estimates.push_back(ValuationEstimate{game.member_id(i), "exact",
                                              phi[std::size_t(i)], 0.0, 0,
                                              std::uint64_t(size)});
  }
  double total = 0.0;
  for (double v : phi) total += v;
  run.grand_value = table[size - 1];
  run.residual = run.grand_value - total;
  run.total_queries = game.query_count() - queries_before;
  return run;
}

ShapleyRun permutation_shapley(Game& game, const PermutationOptions& options) {
  if (options.n_permutations < 1)
    throw InputError("permutation_shapley: n_permutations must be >= 1");
  const int n = game.n_members();
  const std::uint64_t queries_before = game.query_count();
  ShapleyRun run;
  if (n == 0) return run;

  std::vector<double> slab(std::size_t(options.n_permutations) * std::size_t(n));
  parallel_for(options.n_permutations, options.workers, [&](std::size_t t) {
    std::vector<int> order(std::size_t(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed({options.seed, kPermStream, t}));
    rng.shuffle(order);
    Mask prefix(n);
    CoalitionValue prev = game.value(prefix);
    for (int pos = 0; pos < n; ++pos) {
      prefix.set(order[std::size_t(pos)]);
      const CoalitionValue cur = game.value(prefix);
      slab[t * std::size_t(n) + std::size_t(order[std::size_t(pos)])] =
          cur.value - prev.value;
      prev = cur;
    }
  });
  const std::uint64_t sampling_queries = game.query_count() - queries_before;

  run.estimates.reserve(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    MeanVar agg;
    for (std::size_t t = 0; t < options.n_permutations; ++t)
      agg.add(slab[t * std::size_t(n) + std::size_t(i)]);
    run.estimates.push_back(ValuationEstimate{
        game.member_id(i), "permutation", agg.mean, agg.std_error(),
        options.n_permutations, sampling_queries});
  }
  finish_run(game, run, queries_before);
  return run;
}

ShapleyRun stratified_shapley(Game& game, const StratifiedOptions& options) {
  if (options.n_chains < 1)
    throw InputError("stratified_shapley: n_chains must be >= 1");
  const int n = game.n_members();
  const std::uint64_t queries_before = game.query_count();
  ShapleyRun run;
  if (n == 0) return run;

  run.estimates.reserve(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    const MemberStratified est = stratified_member(game, i, options, run);
    run.estimates.push_back(ValuationEstimate{game.member_id(i), "stratified",
                                              est.value, est.std_error,
                                              options.n_chains, est.queries});
  }
  finish_run(game, run, queries_before);
  return run;
}

namespace detail {

std::vector<int> cluster_assignments(const MemberDataset& dataset, int k,
                                     std::uint64_t seed,
                                     const PipelineConfig& config) {
  const int n = int(dataset.members.size());
  if (k < 1 || k > n)
    throw InputError("cluster_members: k must be between 1 and the member count");

  const PipelineView view = PipelineView::build(dataset, config);
  const int n_segments = view.n_segments;
  const int dim = 1 + n_segments + 1;

  int vol_min = view.volume[0], vol_max = view.volume[0];
  for (int v : view.volume) {
    vol_min = std::min(vol_min, v);
    vol_max = std::max(vol_max, v);
  }
  std::vector<double> features(std::size_t(n) * std::size_t(dim), 0.0);
  for (int i = 0; i < n; ++i) {
    double* f = &features[std::size_t(i) * std::size_t(dim)];
    f[0] = view.signal[std::size_t(i)];
    f[1 + view.segment[std::size_t(i)]] = 1.0;
    f[1 + n_segments] = vol_max > vol_min
                            ? double(view.volume[std::size_t(i)] - vol_min) /
                                  double(vol_max - vol_min)
                            : 0.5;
  }
  auto dist2 = [&](const double* a, const double* b) {
    double d = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double diff = a[j] - b[j];
      d += diff * diff;
    }
    return d;
  };
  auto feature = [&](int i) {
    return &features[std::size_t(i) * std::size_t(dim)];
  };

  // Farthest-first seeding: a random first centre, then repeatedly the
  // member farthest from every chosen centre (ties to the lowest index).
  std::vector<double> centroids(std::size_t(k) * std::size_t(dim), 0.0);
  std::vector<char> chosen(std::size_t(n), 0);
  std::vector<double> nearest(std::size_t(n), 0.0);
  {
    Rng rng(mix_seed({seed, kClusterSeedStream}));
    const int c0 = int(rng.next_below(std::uint64_t(n)));
    chosen[std::size_t(c0)] = 1;
    std::copy(feature(c0), feature(c0) + dim, centroids.begin());
    for (int i = 0; i < n; ++i)
      nearest[std::size_t(i)] = dist2(feature(i), feature(c0));
    for (int c = 1; c < k; ++c) {
      int far = -1;
      double far_dist = -1.0;
      for (int i = 0; i < n; ++i) {
        if (chosen[std::size_t(i)]) continue;
        if (nearest[std::size_t(i)] > far_dist) {
          far_dist = nearest[std::size_t(i)];
          far = i;
        }
      }
      chosen[std::size_t(far)] = 1;
      std::copy(feature(far), feature(far) + dim,
                centroids.begin() + std::ptrdiff_t(c) * dim);
      for (int i = 0; i < n; ++i) {
        nearest[std::size_t(i)] = std::min(
            nearest[std::size_t(i)],
            dist2(feature(i), &centroids[std::size_t(c) * std::size_t(dim)]));
      }
    }
  }

  // Lloyd iterations until assignments stabilize (at most 100). Nearest-
  // centroid ties break toward the lowest cluster id; emptied clusters keep
  // their previous centroid.
  std::vector<int> assignment(std::size_t(n), 0);
  std::vector<int> previous(std::size_t(n), -1);
  std::vector<int> counts(std::size_t(k), 0);
  std::vector<double> sums(std::size_t(k) * std::size_t(dim), 0.0);
  for (int iter = 0; iter < 100; ++iter) {
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_dist = dist2(feature(i), &centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d =
            dist2(feature(i), &centroids[std::size_t(c) * std::size_t(dim)]);
        if (d < best_dist) {
          best_dist = d;
          best = c;
        }
      }
      assignment[std::size_t(i)] = best;
    }
    if (assignment == previous) break;
    previous = assignment;
    std::fill(counts.begin(), counts.end(), 0);
    std::fill(sums.begin(), sums.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      const int c = assignment[std::size_t(i)];
      ++counts[std::size_t(c)];
      const double* f = feature(i);
      double* s = &sums[std::size_t(c) * std::size_t(dim)];
      for (int j = 0; j < dim; ++j) s[j] += f[j];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[std::size_t(c)] == 0) continue;
      double* centroid = &centroids[std::size_t(c) * std::size_t(dim)];
      const double* s = &sums[std::size_t(c) * std::size_t(dim)];
      for (int j = 0; j < dim; ++j)
        centroid[j] = s[j] / double(counts[std::size_t(c)]);
    }
  }
  return assignment;
}

}  // namespace detail

std::unordered_map<std::string, int> cluster_members(
    const MemberDataset& dataset, int k, std::uint64_t seed,
    const PipelineConfig& config) {
  const std::vector<int> assignment =
      detail::cluster_assignments(dataset, k, seed, config);
  std::unordered_map<std::string, int> out;
  out.reserve(dataset.members.size());
  for (std::size_t i = 0; i < dataset.members.size(); ++i)
    out.emplace(dataset.members[i].member_id, assignment[i]);
  return out;
}

ShapleyRun clustered_shapley(GameHandle& game, const ClusterOptions& options) {
  if (options.k < 1) throw InputError("clustered_shapley: k must be >= 1");
  if (options.sample_per_cluster < 1)
    throw InputError("clustered_shapley: sample_per_cluster must be >= 1");
  if (options.n_chains < 1)
    throw InputError("clustered_shapley: n_chains must be >= 1");
  const int n = game.n_members();
  const std::uint64_t queries_before = game.query_count();
  ShapleyRun run;
  if (n == 0) return run;

  const std::vector<int> assignment = detail::cluster_assignments(
      game.dataset(), options.k, options.seed, game.config());

  StratifiedOptions chain_options;
  chain_options.n_chains = options.n_chains;
  chain_options.seed = options.seed;
  chain_options.use_bsearch = false;
  chain_options.workers = options.workers;

  run.estimates.assign(std::size_t(n), ValuationEstimate{});
  for (int c = 0; c < options.k; ++c) {
    std::vector<int> cluster;
    for (int i = 0; i < n; ++i)
      if (assignment[std::size_t(i)] == c) cluster.push_back(i);
    if (cluster.empty()) continue;

    // sample without replacement, a fresh stream per cluster
    const int take = std::min<int>(options.sample_per_cluster, int(cluster.size()));
    std::vector<int> pool = cluster;
    Rng rng(mix_seed({options.seed, kClusterPickStream, std::uint64_t(c)}));
    for (int t = 0; t < take; ++t) {
      const std::size_t j =
          std::size_t(t) + std::size_t(rng.next_below(pool.size() - std::size_t(t)));
      std::swap(pool[std::size_t(t)], pool[j]);
    }

    double value_sum = 0.0;
    double variance_sum = 0.0;
    std::uint64_t cluster_queries = 0;
    for (int t = 0; t < take; ++t) {
      const MemberStratified est =
          stratified_member(game, pool[std::size_t(t)], chain_options, run);
      value_sum += est.value;
      variance_sum += est.std_error * est.std_error;
      cluster_queries += est.queries;
    }
    const double cluster_value = value_sum / double(take);
    const double cluster_se = std::sqrt(variance_sum) / double(take);
    const std::uint64_t samples = std::uint64_t(take) * options.n_chains;
    for (int i : cluster) {
      run.estimates[std::size_t(i)] =
          ValuationEstimate{game.member_id(i), "cluster",    cluster_value,
                            cluster_se,        samples,      cluster_queries};
    }
  }
  finish_run(game, run, queries_before);
  return run;
}

}  // namespace consort
