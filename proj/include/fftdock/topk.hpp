#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <tuple>
#include <vector>

namespace fftdock {

struct Pose {
  int rotation_index = 0;
  std::array<int, 3> translation{};  // cyclic voxel shift, each in [0, n)
  double score = 0.0;

  friend bool operator==(const Pose&, const Pose&) = default;
};

// Total order used for every ranking: higher score first, then smaller
// (rotation_index, tx, ty, tz).
inline bool ranks_before(const Pose& a, const Pose& b) {
  if (a.score != b.score) return a.score > b.score;
  return std::tie(a.rotation_index, a.translation) < std::tie(b.rotation_index, b.translation);
}

// Keeps the best `capacity` poses seen so far under ranks_before. Because the
// order is total, the retained set does not depend on insertion order.
class PoseHeap {
 public:
  explicit PoseHeap(std::size_t capacity) : capacity_(capacity) { heap_.reserve(std::min<std::size_t>(capacity, 4096)); }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return heap_.size(); }

  // Worst retained pose; only meaningful when full().
  const Pose& worst() const { return heap_.front(); }
  bool full() const { return heap_.size() >= capacity_; }

  // Cheap pre-check for hot loops.
  bool would_accept(const Pose& p) const { return !full() || ranks_before(p, heap_.front()); }

  void push(const Pose& p) {
    if (capacity_ == 0) return;
    if (!full()) {
      heap_.push_back(p);
      std::push_heap(heap_.begin(), heap_.end(), ranks_before);
    } else if (ranks_before(p, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), ranks_before);
      heap_.back() = p;
      std::push_heap(heap_.begin(), heap_.end(), ranks_before);
    }
  }

  void merge(const PoseHeap& other) {
    for (const Pose& p : other.heap_) push(p);
  }

  std::vector<Pose> sorted() const {
    std::vector<Pose> out = heap_;
    std::sort(out.begin(), out.end(), ranks_before);
    return out;
  }

 private:
  std::size_t capacity_;
  std::vector<Pose> heap_;  // max-heap under ranks_before: front is the worst
};

}  // namespace fftdock
