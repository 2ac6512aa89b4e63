// Small helpers shared by the unit tests.

#ifndef OG_TEST_SUPPORT_HPP
#define OG_TEST_SUPPORT_HPP

#include <cmath>
#include <vector>

#include "og/autodiff.hpp"
#include "og/corpus.hpp"

namespace og::test {

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1, double hi = 1) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<Real>(rng.uniform(lo, hi));
  return t;
}

inline Tokens words(const std::string& s) {
  Tokens out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Sets every entry of parameter `index` to `value`.
inline void fill_param(ParamSet& ps, std::size_t index, Real value) { ps[index].value.fill(value); }

}  // namespace og::test

#endif  // OG_TEST_SUPPORT_HPP
