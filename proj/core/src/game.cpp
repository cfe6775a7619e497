#include "consort/game.hpp"

#include <utility>

namespace consort {

CoalitionValue Game::value(const Mask& mask) {
  queries_.fetch_add(1, std::memory_order_relaxed);
  if (cache_enabled_) {
    {
      std::lock_guard<std::mutex> g(cache_mu_);
      auto it = cache_.find(mask);
      if (it != cache_.end()) return it->second;
    }
    const CoalitionValue v = compute(mask);
    evals_.fetch_add(1, std::memory_order_relaxed);
    {
      std::lock_guard<std::mutex> g(cache_mu_);
      cache_.emplace(mask, v);
    }
    return v;
  }
  evals_.fetch_add(1, std::memory_order_relaxed);
  return compute(mask);
}

CoalitionValue Game::value_uncached(const Mask& mask) {
  queries_.fetch_add(1, std::memory_order_relaxed);
  evals_.fetch_add(1, std::memory_order_relaxed);
  return compute(mask);
}

void Game::clear_cache() {
  std::lock_guard<std::mutex> g(cache_mu_);
  cache_.clear();
}

GameHandle::GameHandle(MemberDataset dataset, PipelineConfig config)
    : Game(int(dataset.members.size())),
      dataset_(std::move(dataset)),
      view_(PipelineView::build(dataset_, config)) {}

}  // namespace consort
