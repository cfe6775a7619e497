#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>

#include "consort/domain.hpp"
#include "consort/mask.hpp"
#include "consort/pipeline.hpp"

namespace consort {

// A coalition game v(S). Evaluations are memoized; the cache never changes a
// value, only the cost of getting it. Queries count every request for v,
// evals only fresh computations, so query totals are deterministic under any
// worker count while eval totals show what memoization saved.
class Game {
 public:
  explicit Game(int n_members) : n_members_(n_members) {}
  virtual ~Game() = default;

  int n_members() const { return n_members_; }
  virtual std::string member_id(int i) const { return "m" + std::to_string(i); }

  CoalitionValue value(const Mask& mask);

  // Bypasses the cache entirely (still counted). Used by the exact valuer,
  // which keeps its own dense table.
  CoalitionValue value_uncached(const Mask& mask);

  // Two coalition outcomes count as the same decision when their trade
  // actions match. Table-backed test games override this.
  virtual bool same_decision(const CoalitionValue& a,
                             const CoalitionValue& b) const {
    return a.decision.action == b.decision.action;
  }

  std::uint64_t query_count() const {
    return queries_.load(std::memory_order_relaxed);
  }
  std::uint64_t eval_count() const {
    return evals_.load(std::memory_order_relaxed);
  }

  // Not safe to toggle while evaluations are in flight.
  void set_cache_enabled(bool enabled) { cache_enabled_ = enabled; }
  void clear_cache();

 protected:
  virtual CoalitionValue compute(const Mask& mask) const = 0;

 private:
  int n_members_ = 0;
  bool cache_enabled_ = true;
  std::atomic<std::uint64_t> queries_{0};
  std::atomic<std::uint64_t> evals_{0};
  mutable std::mutex cache_mu_;
  std::unordered_map<Mask, CoalitionValue, MaskHash> cache_;
};

// The trading pipeline as a coalition game over a dataset.
class GameHandle final : public Game {
 public:
  GameHandle(MemberDataset dataset, PipelineConfig config);

  const MemberDataset& dataset() const { return dataset_; }
  const PipelineConfig& config() const { return view_.config; }
  const PipelineView& view() const { return view_; }

  std::string member_id(int i) const override {
    return view_.member_ids[std::size_t(i)];
  }

 protected:
  CoalitionValue compute(const Mask& mask) const override {
    return view_.evaluate(mask);
  }

 private:
  MemberDataset dataset_;
  PipelineView view_;
};

}  // namespace consort
