#pragma once

#include <map>
#include <string>
#include <vector>

#include "consort/domain.hpp"
#include "consort/shapley.hpp"

namespace consort {

enum class PayoutKind { direct, nonneg_proportional, volume_blend };

struct PayoutPolicy {
  PayoutKind kind = PayoutKind::direct;
  double pot = 0.0;    // distributed by the proportional kinds
  double alpha = 0.5;  // volume_blend weight on the volume share
};

// direct pays the estimate itself (negative values stay negative).
// nonneg_proportional splits the pot by clamped-positive value shares, or
// equally when no value is positive. volume_blend mixes the volume share and
// the nonneg value share by alpha. Estimates must cover exactly the member
// set.
std::map<std::string, double> allocate(
    const std::vector<ValuationEstimate>& estimates,
    const std::vector<MemberRecord>& members, const PayoutPolicy& policy);

}  // namespace consort
