#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace consort {

inline constexpr const char* kDefaultSource = "receipts";
inline constexpr const char* kFieldAmount = "amount";
inline constexpr const char* kFieldCompany = "company";
inline constexpr const char* kFieldPeriod = "period";

// What a member lets the consortium read: records from sources outside
// allowed_sources are never collected, and collected records keep only the
// fields listed in allowed_fields.
struct DataGrant {
  std::set<std::string> allowed_sources;
  std::set<std::string> allowed_fields;  // subset of {amount, company, period}

  bool allows_source(const std::string& source) const {
    return allowed_sources.count(source) != 0;
  }
  bool allows_field(const std::string& field) const {
    return allowed_fields.count(field) != 0;
  }
  friend bool operator==(const DataGrant&, const DataGrant&) = default;
};

struct MemberRecord {
  std::string member_id;
  std::string segment;
  bool insider = false;
  DataGrant grant;
  int volume = 0;  // records surviving grant filtering

  friend bool operator==(const MemberRecord&, const MemberRecord&) = default;
};

// One spend observation. Fields a grant disallows are nulled, not deleted:
// a receipt with only an amount is still a contributed record.
struct SignalRecord {
  std::string member_id;
  std::optional<int> period;
  std::optional<double> amount;
  std::optional<std::string> company;
  std::string source = kDefaultSource;  // not persisted in signals.csv

  friend bool operator==(const SignalRecord&, const SignalRecord&) = default;
};

struct PriceSeries {
  int entry_period = 0;
  int exit_period = 1;
  std::map<int, double> prices;  // period -> price, strictly positive

  friend bool operator==(const PriceSeries&, const PriceSeries&) = default;
};

// The world state the trading pipeline reads. Records are post-grant-filter.
struct MemberDataset {
  std::vector<MemberRecord> members;
  std::vector<SignalRecord> records;
  PriceSeries prices;
  std::map<std::string, double> target_shares;  // segment -> share, sums to 1
};

enum class ViolationCode {
  DUPLICATE_MEMBER_ID,
  GRANT_FIELDS_EMPTY,
  ORPHAN_RECORD,
  PERIOD_RANGE,
  AMOUNT_NEGATIVE,
  VOLUME_MISMATCH,
  TARGET_SHARES_SUM,
  TARGET_SHARE_RANGE,
  UNKNOWN_SEGMENT,
  PRICE_NOT_POSITIVE,
  PRICE_ENDPOINT_MISSING,
  PERIOD_ORDER,
};

const char* to_string(ViolationCode code);

// Violations are data, not faults: validation never throws.
struct Violation {
  ViolationCode code;
  std::string detail;
};

// Drops records from sources a member did not grant, nulls fields outside the
// grant, and recomputes each member's volume. Throws InputError when a record
// names an unknown member.
std::vector<SignalRecord> apply_grant_filters(
    const std::vector<SignalRecord>& raw_records,
    std::vector<MemberRecord>& members);

// Removes members flagged as insiders along with all their records.
// Target shares are left unchanged.
MemberDataset exclude_insiders(const MemberDataset& dataset);

// Empty result iff every dataset invariant holds.
std::vector<Violation> validate_dataset(const MemberDataset& dataset);

const MemberRecord* find_member(const MemberDataset& dataset,
                                const std::string& member_id);

}  // namespace consort
