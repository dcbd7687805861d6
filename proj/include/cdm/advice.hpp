#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cdm/core.hpp"
#include "cdm/error.hpp"

namespace cdm {

// What the learner may know about an arm. Truth is deliberately absent.
struct ArmInfo {
  Category category = Category::kGender;
  std::size_t headline = 0;  // local index within the treatment
};

// N experts x K arms of mapped probabilities: entry (n, a) is expert n's
// probability that arm a is the rewarding one.
class AdviceMatrix {
 public:
  AdviceMatrix() = default;
  AdviceMatrix(std::size_t experts, std::size_t arms)
      : experts_(experts), arms_(arms), values_(experts * arms, 0.0), meta_(arms) {}

  std::size_t experts() const { return experts_; }
  std::size_t arms() const { return arms_; }

  double operator()(std::size_t expert, std::size_t arm) const {
    return values_[expert * arms_ + arm];
  }
  double& operator()(std::size_t expert, std::size_t arm) { return values_[expert * arms_ + arm]; }

  std::span<const double> row(std::size_t expert) const {
    return {values_.data() + expert * arms_, arms_};
  }

  std::vector<double> column(std::size_t arm) const {
    std::vector<double> out(experts_);
    for (std::size_t n = 0; n < experts_; ++n) out[n] = (*this)(n, arm);
    return out;
  }

  double column_mean(std::size_t arm) const {
    double s = 0.0;
    for (std::size_t n = 0; n < experts_; ++n) s += (*this)(n, arm);
    return s / static_cast<double>(experts_);
  }

  const ArmInfo& arm_info(std::size_t arm) const { return meta_[arm]; }
  ArmInfo& arm_info(std::size_t arm) { return meta_[arm]; }

  void validate() const {
    if (experts_ < 1) throw ValidationError("advice matrix needs at least one expert");
    if (arms_ < 2) throw ValidationError("advice matrix needs at least two arms");
    for (double v : values_) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw ValidationError("advice entry outside [0,1]: " + std::to_string(v));
    }
  }

 private:
  std::size_t experts_ = 0;
  std::size_t arms_ = 0;
  std::vector<double> values_;
  std::vector<ArmInfo> meta_;
};

}  // namespace cdm
