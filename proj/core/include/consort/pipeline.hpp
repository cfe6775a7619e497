#pragma once

#include <map>
#include <string>
#include <vector>

#include "consort/domain.hpp"
#include "consort/mask.hpp"

namespace consort {

struct PipelineConfig {
  double tau = 2.0;        // significance threshold on |z|
  double sigma_min = 0.05; // floor for the weighted signal std dev
  int n_min = 3;           // minimum effective sample size to trade
  double clip = 1.0;       // normalized signals clipped to [-clip, clip]
  double eps = 1.0;        // denominator floor for the growth ratio
  double capital = 1.0;

  // Throws InputError naming the offending field.
  void validate() const;
};

enum class Action { NoTrade, Long, Short };

const char* to_string(Action action);

struct TradeDecision {
  Action action = Action::NoTrade;
  double z = 0.0;
  double score = 0.0;
};

struct CoalitionValue {
  double value = 0.0;  // realized relative profit/loss times capital
  TradeDecision decision;
};

// z = score * sqrt(n_eff) / sigma: significance grows with both the score and
// the amount of data behind it.
inline double significance_z(double score, double sigma, double n_eff) {
  return score * std::sqrt(n_eff) / sigma;
}

// Per-member growth signal: spend in [entry, exit) versus spend before entry,
// divided by max(pre-entry spend, eps) and clipped. Nulled amounts count as 0;
// records with a nulled period fall in neither window. Members with no
// records get signal 0.
std::map<std::string, double> normalize_signals(const MemberDataset& dataset,
                                                const PipelineConfig& config);

// Weights making the coalition's segment mix match the target population,
// renormalized over the segments present. Members without data get weight 0
// and do not enter the denominator; the rest sum to 1. Throws InputError when
// the coalition holds no data at all.
std::map<std::string, double> panel_weights(const MemberDataset& dataset,
                                            const Mask& mask);

// Weighted mean of normalized signals. Same precondition as panel_weights.
double score(const MemberDataset& dataset, const Mask& mask,
             const PipelineConfig& config);

// Empty (or dataless) coalitions never trade. Otherwise trades long/short by
// the sign of the score when n_eff clears n_min and |z| clears tau.
TradeDecision decide(const MemberDataset& dataset, const Mask& mask,
                     const PipelineConfig& config);

double realize_pnl(const TradeDecision& decision, const PriceSeries& prices,
                   const PipelineConfig& config);

// decide composed with realize_pnl. Depends only on the member set.
CoalitionValue coalition_value(const MemberDataset& dataset, const Mask& mask,
                               const PipelineConfig& config);

// Mask for a list of member ids; throws InputError on unknown ids.
Mask mask_of_ids(const MemberDataset& dataset,
                 const std::vector<std::string>& member_ids);

// Dataset digested for repeated coalition evaluation: signals, segment
// indices, and prices resolved once. All the public operations above are thin
// wrappers over this, so cached and uncached paths share one arithmetic.
struct PipelineView {
  int n_members = 0;
  int n_segments = 0;
  std::vector<double> signal;            // per member
  std::vector<int> segment;              // member -> segment index
  std::vector<int> volume;               // per member
  std::vector<double> segment_target;    // segment index -> target share
  std::vector<std::string> member_ids;
  std::vector<std::string> segment_labels;
  double entry_price = 0.0;
  double exit_price = 0.0;
  PipelineConfig config;

  static PipelineView build(const MemberDataset& dataset,
                            const PipelineConfig& config);

  CoalitionValue evaluate(const Mask& mask) const;

  // Per-member weights (0 for members without data); throws InputError when
  // the coalition holds no data.
  std::vector<double> weights(const Mask& mask) const;
};

}  // namespace consort
