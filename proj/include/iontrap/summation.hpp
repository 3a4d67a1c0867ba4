#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace iontrap {

/// Neumaier-compensated accumulator. Keeps cancellation between large terms
/// of opposite sign accurate to one rounding of the final value.
template <class Scalar>
class CompensatedSum {
 public:
  void add(Scalar x) {
    using std::abs;
    const Scalar t = sum_ + x;
    if (abs(sum_) >= abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  Scalar value() const { return sum_ + comp_; }

 private:
  Scalar sum_ = Scalar(0);
  Scalar comp_ = Scalar(0);
};

/// Compensated sum taken largest-magnitude first. Sorts the input in place.
template <class Scalar>
Scalar sum_descending(std::vector<Scalar>& terms) {
  using std::abs;
  std::sort(terms.begin(), terms.end(),
            [](Scalar a, Scalar b) { return abs(a) > abs(b); });
  CompensatedSum<Scalar> acc;
  for (const Scalar t : terms) acc.add(t);
  return acc.value();
}

/// Integer power by squaring.
template <class Scalar>
Scalar ipow(Scalar base, int n) {
  if (n < 0) return Scalar(1) / ipow(base, -n);
  Scalar result = Scalar(1);
  Scalar b = base;
  while (n != 0) {
    if (n & 1) result *= b;
    b *= b;
    n >>= 1;
  }
  return result;
}

}  // namespace iontrap
