#include "consort/payout.hpp"

#include <algorithm>
#include <unordered_map>

#include "consort/error.hpp"

namespace consort {

std::map<std::string, double> allocate(
    const std::vector<ValuationEstimate>& estimates,
    const std::vector<MemberRecord>& members, const PayoutPolicy& policy) {
  if (policy.kind != PayoutKind::direct && policy.pot < 0.0)
    throw InputError("payout: pot must be >= 0");
  if (policy.alpha < 0.0 || policy.alpha > 1.0)
    throw InputError("payout: alpha must be in [0, 1]");

  std::unordered_map<std::string, double> value_by_id;
  for (const auto& e : estimates) {
    if (!value_by_id.emplace(e.member_id, e.value).second)
      throw InputError("payout: duplicate estimate for member '" + e.member_id +
                       "'");
  }
  if (value_by_id.size() != members.size())
    throw InputError("payout: estimates do not cover the member set");
  for (const auto& m : members) {
    if (!value_by_id.count(m.member_id))
      throw InputError("payout: no estimate for member '" + m.member_id + "'");
  }

  const std::size_t n = members.size();
  std::map<std::string, double> out;
  if (n == 0) return out;

  double positive_total = 0.0;
  double volume_total = 0.0;
  for (const auto& m : members) {
    positive_total += std::max(value_by_id.at(m.member_id), 0.0);
    volume_total += double(m.volume);
  }
  auto value_share = [&](const MemberRecord& m) {
    if (positive_total > 0.0)
      return std::max(value_by_id.at(m.member_id), 0.0) / positive_total;
    return 1.0 / double(n);  // nothing positive: equal split
  };
  auto volume_share = [&](const MemberRecord& m) {
    if (volume_total > 0.0) return double(m.volume) / volume_total;
    return 1.0 / double(n);
  };

  for (const auto& m : members) {
    double payout = 0.0;
    switch (policy.kind) {
      case PayoutKind::direct:
        payout = value_by_id.at(m.member_id);
        break;
      case PayoutKind::nonneg_proportional:
        payout = policy.pot * value_share(m);
        break;
      case PayoutKind::volume_blend:
        payout = policy.pot * (policy.alpha * volume_share(m) +
                               (1.0 - policy.alpha) * value_share(m));
        break;
    }
    out[m.member_id] = payout;
  }
  return out;
}

}  // namespace consort
