#ifndef OG_GRADCHECK_HPP
#define OG_GRADCHECK_HPP

#include <cstddef>
#include <functional>
#include <string>

#include "og/autodiff.hpp"

namespace og {

// Builds a scalar loss on the given tape from the tape's parameter set.
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckOptions {
  Real epsilon = Real(1e-5);
  Real tolerance = Real(1e-4);
  // Denominator floor for the relative error, so entries whose true gradient
  // is ~0 are judged on absolute error instead.
  Real abs_floor = Real(1e-5);
};

struct GradCheckReport {
  std::size_t entries_checked = 0;
  Real max_rel_error = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
  Real worst_analytic = 0;
  Real worst_numeric = 0;
  bool passed = false;
};

// Compares backward() against central differences on every parameter entry.
// Throws std::domain_error when the loss is not finite.
GradCheckReport grad_check(const LossBuilder& loss, ParamSet& params,
                           const GradCheckOptions& options = {});

}  // namespace og

#endif  // OG_GRADCHECK_HPP
