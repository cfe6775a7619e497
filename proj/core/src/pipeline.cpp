#include "consort/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "consort/error.hpp"

namespace consort {

namespace {

double pnl_for(Action action, double entry_price, double exit_price,
               double capital) {
  if (action == Action::NoTrade) return 0.0;
  const double move = (exit_price - entry_price) / entry_price;
  return action == Action::Long ? capital * move : -capital * move;
}

// Equal weights land an epsilon below their integer n_eff; the gate must not
// flip on that.
constexpr double kNeffSlack = 1e-9;

}  // namespace

void PipelineConfig::validate() const {
  if (!(tau > 0.0)) throw InputError("pipeline config: tau must be > 0");
  if (!(sigma_min > 0.0))
    throw InputError("pipeline config: sigma_min must be > 0");
  if (n_min < 1) throw InputError("pipeline config: n_min must be >= 1");
  if (!(clip > 0.0)) throw InputError("pipeline config: clip must be > 0");
  if (!(eps > 0.0)) throw InputError("pipeline config: eps must be > 0");
  if (!(capital > 0.0)) throw InputError("pipeline config: capital must be > 0");
}

const char* to_string(Action action) {
  switch (action) {
    case Action::NoTrade: return "NoTrade";
    case Action::Long: return "Long";
    case Action::Short: return "Short";
  }
  return "NoTrade";
}

PipelineView PipelineView::build(const MemberDataset& dataset,
                                 const PipelineConfig& config) {
  config.validate();
  PipelineView view;
  view.config = config;
  view.n_members = int(dataset.members.size());

  std::set<std::string> labels;
  for (const auto& [segment, share] : dataset.target_shares)
    labels.insert(segment);
  for (const auto& m : dataset.members) labels.insert(m.segment);
  view.segment_labels.assign(labels.begin(), labels.end());
  view.n_segments = int(view.segment_labels.size());

  std::unordered_map<std::string, int> segment_index;
  for (int g = 0; g < view.n_segments; ++g)
    segment_index.emplace(view.segment_labels[g], g);
  view.segment_target.assign(std::size_t(view.n_segments), 0.0);
  for (const auto& [segment, share] : dataset.target_shares)
    view.segment_target[std::size_t(segment_index.at(segment))] = share;

  std::unordered_map<std::string, int> member_index;
  view.member_ids.reserve(dataset.members.size());
  view.segment.reserve(dataset.members.size());
  view.volume.reserve(dataset.members.size());
  for (int i = 0; i < view.n_members; ++i) {
    const auto& m = dataset.members[std::size_t(i)];
    member_index.emplace(m.member_id, i);
    view.member_ids.push_back(m.member_id);
    view.segment.push_back(segment_index.at(m.segment));
    view.volume.push_back(m.volume);
  }

  const int entry = dataset.prices.entry_period;
  const int exit = dataset.prices.exit_period;
  auto entry_it = dataset.prices.prices.find(entry);
  auto exit_it = dataset.prices.prices.find(exit);
  if (entry_it == dataset.prices.prices.end() ||
      exit_it == dataset.prices.prices.end()) {
    throw InputError("pipeline: price series lacks entry or exit period");
  }
  view.entry_price = entry_it->second;
  view.exit_price = exit_it->second;

  std::vector<double> before(std::size_t(view.n_members), 0.0);
  std::vector<double> during(std::size_t(view.n_members), 0.0);
  for (const auto& rec : dataset.records) {
    auto it = member_index.find(rec.member_id);
    if (it == member_index.end()) continue;  // orphans are validation findings
    if (!rec.period) continue;               // nulled period: neither window
    const int p = *rec.period;
    const double amount = rec.amount.value_or(0.0);
    if (p < entry) {
      before[std::size_t(it->second)] += amount;
    } else if (p < exit) {
      during[std::size_t(it->second)] += amount;
    }
  }
  view.signal.assign(std::size_t(view.n_members), 0.0);
  for (int i = 0; i < view.n_members; ++i) {
    const double base = std::max(before[std::size_t(i)], config.eps);
    const double raw = (during[std::size_t(i)] - before[std::size_t(i)]) / base;
    view.signal[std::size_t(i)] = std::clamp(raw, -config.clip, config.clip);
  }
  return view;
}

std::vector<double> PipelineView::weights(const Mask& mask) const {
  std::vector<double> w(std::size_t(n_members), 0.0);
  std::vector<int> count(std::size_t(n_segments), 0);
  int n_data = 0;
  mask.for_each([&](int i) {
    if (volume[std::size_t(i)] <= 0) return;
    ++count[std::size_t(segment[std::size_t(i)])];
    ++n_data;
  });
  if (n_data == 0)
    throw InputError("panel weights: coalition contains no member data");

  double present_target = 0.0;
  for (int g = 0; g < n_segments; ++g) {
    if (count[std::size_t(g)] > 0) present_target += segment_target[std::size_t(g)];
  }
  if (!(present_target > 0.0))
    throw InputError("panel weights: coalition segments have no target share");

  std::vector<double> u(std::size_t(n_segments), 0.0);
  double total_u = 0.0;
  for (int g = 0; g < n_segments; ++g) {
    if (count[std::size_t(g)] == 0) continue;
    const double renormalized = segment_target[std::size_t(g)] / present_target;
    const double coalition_share = double(count[std::size_t(g)]) / double(n_data);
    u[std::size_t(g)] = renormalized / coalition_share;
    total_u += double(count[std::size_t(g)]) * u[std::size_t(g)];
  }
  mask.for_each([&](int i) {
    if (volume[std::size_t(i)] <= 0) return;
    w[std::size_t(i)] = u[std::size_t(segment[std::size_t(i)])] / total_u;
  });
  return w;
}

CoalitionValue PipelineView::evaluate(const Mask& mask) const {
  std::vector<int> count(std::size_t(n_segments), 0);
  std::vector<double> sum_s(std::size_t(n_segments), 0.0);
  std::vector<double> sum_s2(std::size_t(n_segments), 0.0);
  int n_data = 0;
  mask.for_each([&](int i) {
    if (volume[std::size_t(i)] <= 0) return;  // no data, no influence
    const std::size_t g = std::size_t(segment[std::size_t(i)]);
    const double s = signal[std::size_t(i)];
    ++count[g];
    sum_s[g] += s;
    sum_s2[g] += s * s;
    ++n_data;
  });

  TradeDecision decision;
  if (n_data == 0) return CoalitionValue{0.0, decision};

  double present_target = 0.0;
  for (int g = 0; g < n_segments; ++g)
    if (count[std::size_t(g)] > 0) present_target += segment_target[std::size_t(g)];
  if (!(present_target > 0.0)) return CoalitionValue{0.0, decision};

  double mean = 0.0, mean_sq = 0.0, weight_sq = 0.0;
  {
    double total_u = 0.0;
    std::vector<double> u(std::size_t(n_segments), 0.0);
    for (int g = 0; g < n_segments; ++g) {
      if (count[std::size_t(g)] == 0) continue;
      const double renormalized = segment_target[std::size_t(g)] / present_target;
      const double coalition_share = double(count[std::size_t(g)]) / double(n_data);
      u[std::size_t(g)] = renormalized / coalition_share;
      total_u += double(count[std::size_t(g)]) * u[std::size_t(g)];
    }
    for (int g = 0; g < n_segments; ++g) {
      if (count[std::size_t(g)] == 0) continue;
      const double w = u[std::size_t(g)] / total_u;
      mean += w * sum_s[std::size_t(g)];
      mean_sq += w * sum_s2[std::size_t(g)];
      weight_sq += double(count[std::size_t(g)]) * w * w;
    }
  }

  const double variance = std::max(0.0, mean_sq - mean * mean);
  const double sigma = std::max(config.sigma_min, std::sqrt(variance));
  const double n_eff = 1.0 / weight_sq;
  const double z = significance_z(mean, sigma, n_eff);
  decision.score = mean;
  decision.z = z;
  const bool enough_data = n_eff + kNeffSlack >= double(config.n_min);
  if (enough_data && std::abs(z) >= config.tau) {
    decision.action = mean > 0.0 ? Action::Long : Action::Short;
  }
  return CoalitionValue{
      pnl_for(decision.action, entry_price, exit_price, config.capital),
      decision};
}

std::map<std::string, double> normalize_signals(const MemberDataset& dataset,
                                                const PipelineConfig& config) {
  const PipelineView view = PipelineView::build(dataset, config);
  std::map<std::string, double> out;
  for (int i = 0; i < view.n_members; ++i)
    out[view.member_ids[std::size_t(i)]] = view.signal[std::size_t(i)];
  return out;
}

std::map<std::string, double> panel_weights(const MemberDataset& dataset,
                                            const Mask& mask) {
  const PipelineView view = PipelineView::build(dataset, PipelineConfig{});
  const std::vector<double> w = view.weights(mask);
  std::map<std::string, double> out;
  mask.for_each(
      [&](int i) { out[view.member_ids[std::size_t(i)]] = w[std::size_t(i)]; });
  return out;
}

double score(const MemberDataset& dataset, const Mask& mask,
             const PipelineConfig& config) {
  const PipelineView view = PipelineView::build(dataset, config);
  const std::vector<double> w = view.weights(mask);
  double total = 0.0;
  mask.for_each([&](int i) {
    total += w[std::size_t(i)] * view.signal[std::size_t(i)];
  });
  return total;
}

TradeDecision decide(const MemberDataset& dataset, const Mask& mask,
                     const PipelineConfig& config) {
  return PipelineView::build(dataset, config).evaluate(mask).decision;
}

double realize_pnl(const TradeDecision& decision, const PriceSeries& prices,
                   const PipelineConfig& config) {
  auto entry_it = prices.prices.find(prices.entry_period);
  auto exit_it = prices.prices.find(prices.exit_period);
  if (entry_it == prices.prices.end() || exit_it == prices.prices.end())
    throw InputError("realize_pnl: price series lacks entry or exit period");
  return pnl_for(decision.action, entry_it->second, exit_it->second,
                 config.capital);
}

CoalitionValue coalition_value(const MemberDataset& dataset, const Mask& mask,
                               const PipelineConfig& config) {
  return PipelineView::build(dataset, config).evaluate(mask);
}

Mask mask_of_ids(const MemberDataset& dataset,
                 const std::vector<std::string>& member_ids) {
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < int(dataset.members.size()); ++i)
    index.emplace(dataset.members[std::size_t(i)].member_id, i);
  Mask mask(int(dataset.members.size()));
  for (const auto& id : member_ids) {
    auto it = index.find(id);
    if (it == index.end())
      throw InputError("mask_of_ids: unknown member '" + id + "'");
    mask.set(it->second);
  }
  return mask;
}

}  // namespace consort
