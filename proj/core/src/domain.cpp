#include "consort/domain.hpp"

#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "consort/error.hpp"

namespace consort {

const char* to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::DUPLICATE_MEMBER_ID: return "DUPLICATE_MEMBER_ID";
    case ViolationCode::GRANT_FIELDS_EMPTY: return "GRANT_FIELDS_EMPTY";
    case ViolationCode::ORPHAN_RECORD: return "ORPHAN_RECORD";
    case ViolationCode::PERIOD_RANGE: return "PERIOD_RANGE";
    case ViolationCode::AMOUNT_NEGATIVE: return "AMOUNT_NEGATIVE";
    case ViolationCode::VOLUME_MISMATCH: return "VOLUME_MISMATCH";
    case ViolationCode::TARGET_SHARES_SUM: return "TARGET_SHARES_SUM";
    case ViolationCode::TARGET_SHARE_RANGE: return "TARGET_SHARE_RANGE";
    case ViolationCode::UNKNOWN_SEGMENT: return "UNKNOWN_SEGMENT";
    case ViolationCode::PRICE_NOT_POSITIVE: return "PRICE_NOT_POSITIVE";
    case ViolationCode::PRICE_ENDPOINT_MISSING: return "PRICE_ENDPOINT_MISSING";
    case ViolationCode::PERIOD_ORDER: return "PERIOD_ORDER";
  }
  return "UNKNOWN";
}

std::vector<SignalRecord> apply_grant_filters(
    const std::vector<SignalRecord>& raw_records,
    std::vector<MemberRecord>& members) {
  std::unordered_map<std::string, MemberRecord*> by_id;
  by_id.reserve(members.size());
  for (auto& m : members) by_id.emplace(m.member_id, &m);

  std::vector<SignalRecord> kept;
  kept.reserve(raw_records.size());
  for (std::size_t idx = 0; idx < raw_records.size(); ++idx) {
    const SignalRecord& rec = raw_records[idx];
    auto it = by_id.find(rec.member_id);
    if (it == by_id.end()) {
      throw InputError("grant filter: record " + std::to_string(idx) +
                       " references unknown member '" + rec.member_id + "'");
    }
    const DataGrant& grant = it->second->grant;
    if (!grant.allows_source(rec.source)) continue;
    SignalRecord out = rec;
    if (!grant.allows_field(kFieldAmount)) out.amount.reset();
    if (!grant.allows_field(kFieldCompany)) out.company.reset();
    if (!grant.allows_field(kFieldPeriod)) out.period.reset();
    kept.push_back(std::move(out));
  }

  for (auto& m : members) m.volume = 0;
  for (const auto& rec : kept) ++by_id.at(rec.member_id)->volume;
  return kept;
}

MemberDataset exclude_insiders(const MemberDataset& dataset) {
  MemberDataset out;
  out.prices = dataset.prices;
  out.target_shares = dataset.target_shares;
  std::unordered_set<std::string> kept_ids;
  out.members.reserve(dataset.members.size());
  for (const auto& m : dataset.members) {
    if (m.insider) continue;
    out.members.push_back(m);
    kept_ids.insert(m.member_id);
  }
  out.records.reserve(dataset.records.size());
  for (const auto& rec : dataset.records) {
    if (kept_ids.count(rec.member_id)) out.records.push_back(rec);
  }
  return out;
}

std::vector<Violation> validate_dataset(const MemberDataset& dataset) {
  std::vector<Violation> out;
  auto add = [&out](ViolationCode code, std::string detail) {
    out.push_back(Violation{code, std::move(detail)});
  };

  std::unordered_set<std::string> ids;
  for (const auto& m : dataset.members) {
    if (!ids.insert(m.member_id).second) {
      add(ViolationCode::DUPLICATE_MEMBER_ID,
          "member '" + m.member_id + "' appears more than once");
    }
    if (!m.grant.allowed_sources.empty() && m.grant.allowed_fields.empty()) {
      add(ViolationCode::GRANT_FIELDS_EMPTY,
          "member '" + m.member_id + "' grants sources but no fields");
    }
    if (dataset.target_shares.find(m.segment) == dataset.target_shares.end()) {
      add(ViolationCode::UNKNOWN_SEGMENT, "member '" + m.member_id +
                                              "' has segment '" + m.segment +
                                              "' absent from target shares");
    }
  }

  const bool have_prices = !dataset.prices.prices.empty();
  const int period_lo = have_prices ? dataset.prices.prices.begin()->first : 0;
  const int period_hi = have_prices ? dataset.prices.prices.rbegin()->first : 0;

  std::unordered_map<std::string, int> record_counts;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const SignalRecord& rec = dataset.records[i];
    if (!ids.count(rec.member_id)) {
      add(ViolationCode::ORPHAN_RECORD,
          "record " + std::to_string(i) + " references absent member '" +
              rec.member_id + "'");
    } else {
      ++record_counts[rec.member_id];
    }
    if (rec.period &&
        (*rec.period < 0 ||
         (have_prices && (*rec.period < period_lo || *rec.period > period_hi)))) {
      add(ViolationCode::PERIOD_RANGE,
          "record " + std::to_string(i) + " period " +
              std::to_string(*rec.period) + " outside [" +
              std::to_string(period_lo) + ", " + std::to_string(period_hi) +
              "]");
    }
    if (rec.amount && *rec.amount < 0.0) {
      add(ViolationCode::AMOUNT_NEGATIVE,
          "record " + std::to_string(i) + " has negative amount");
    }
  }

  for (const auto& m : dataset.members) {
    auto it = record_counts.find(m.member_id);
    const int n = it == record_counts.end() ? 0 : it->second;
    if (n != m.volume) {
      add(ViolationCode::VOLUME_MISMATCH,
          "member '" + m.member_id + "' volume " + std::to_string(m.volume) +
              " does not match record count " + std::to_string(n));
    }
  }

  double share_sum = 0.0;
  for (const auto& [segment, share] : dataset.target_shares) {
    share_sum += share;
    if (!(share > 0.0 && share <= 1.0)) {
      add(ViolationCode::TARGET_SHARE_RANGE,
          "segment '" + segment + "' share " + std::to_string(share) +
              " outside (0, 1]");
    }
  }
  if (std::abs(share_sum - 1.0) > 1e-9) {
    add(ViolationCode::TARGET_SHARES_SUM,
        "target shares sum to " + std::to_string(share_sum));
  }

  if (dataset.prices.entry_period >= dataset.prices.exit_period) {
    add(ViolationCode::PERIOD_ORDER,
        "entry period " + std::to_string(dataset.prices.entry_period) +
            " not before exit period " +
            std::to_string(dataset.prices.exit_period));
  }
  for (const auto& [period, price] : dataset.prices.prices) {
    if (!(price > 0.0)) {
      add(ViolationCode::PRICE_NOT_POSITIVE,
          "price at period " + std::to_string(period) + " is not positive");
    }
  }
  if (!dataset.prices.prices.count(dataset.prices.entry_period)) {
    add(ViolationCode::PRICE_ENDPOINT_MISSING,
        "no price at entry period " +
            std::to_string(dataset.prices.entry_period));
  }
  if (!dataset.prices.prices.count(dataset.prices.exit_period)) {
    add(ViolationCode::PRICE_ENDPOINT_MISSING,
        "no price at exit period " + std::to_string(dataset.prices.exit_period));
  }
  return out;
}

const MemberRecord* find_member(const MemberDataset& dataset,
                                const std::string& member_id) {
  for (const auto& m : dataset.members) {
    if (m.member_id == member_id) return &m;
  }
  return nullptr;
}

}  // namespace consort
