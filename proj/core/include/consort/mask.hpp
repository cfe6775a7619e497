#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace consort {

// Subset of dataset members by position: bit i follows the order of
// MemberDataset::members. Values are set-semantic, so two masks over the same
// dataset compare equal iff they name the same members.
class Mask {
 public:
  Mask() = default;
  explicit Mask(int n_members)
      : n_(n_members), words_(std::size_t(n_members + 63) / 64, 0) {}

  static Mask full(int n_members) {
    Mask m(n_members);
    for (int i = 0; i < n_members; ++i) m.set(i);
    return m;
  }

  // Low 64 bits given directly; only meaningful for n_members <= 64.
  static Mask from_bits(std::uint64_t bits, int n_members) {
    Mask m(n_members);
    if (!m.words_.empty()) m.words_[0] = bits;
    return m;
  }

  int size() const { return n_; }

  bool test(int i) const {
    return (words_[std::size_t(i) >> 6] >> (i & 63)) & 1u;
  }
  void set(int i) { words_[std::size_t(i) >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(int i) {
    words_[std::size_t(i) >> 6] &= ~(std::uint64_t{1} << (i & 63));
  }

  Mask with(int i) const {
    Mask m = *this;
    m.set(i);
    return m;
  }
  Mask without(int i) const {
    Mask m = *this;
    m.reset(i);
    return m;
  }

  int count() const {
    int c = 0;
    for (auto w : words_) c += std::popcount(w);
    return c;
  }
  bool any() const {
    for (auto w : words_)
      if (w) return true;
    return false;
  }

  std::uint64_t low_word() const { return words_.empty() ? 0 : words_[0]; }

  // Visits set member indices in ascending order.
  template <class F>
  void for_each(F&& fn) const {
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
      for (std::uint64_t w = words_[wi]; w != 0; w &= w - 1) {
        fn(int(wi * 64) + std::countr_zero(w));
      }
    }
  }

  friend bool operator==(const Mask&, const Mask&) = default;

  std::size_t hash() const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull ^ std::uint64_t(n_);
    for (auto w : words_) h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return std::size_t(h);
  }

 private:
  int n_ = 0;
  std::vector<std::uint64_t> words_;
};

struct MaskHash {
  std::size_t operator()(const Mask& m) const { return m.hash(); }
};

}  // namespace consort
