#pragma once

#include <cmath>
#include <ranges>

namespace spikes {

// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

template <std::ranges::input_range R, typename F>
double compensated_sum(R&& range, F&& transform) {
  CompensatedSum acc;
  for (auto&& x : range) acc += transform(x);
  return acc.value();
}

template <std::ranges::input_range R>
double compensated_sum(R&& range) {
  return compensated_sum(std::forward<R>(range), [](double x) { return x; });
}

}  // namespace spikes
