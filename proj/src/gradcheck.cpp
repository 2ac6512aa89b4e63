#include "og/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace og {

namespace {

Real evaluate(const LossBuilder& loss, const ParamSet& params) {
  Tape tape(&params);
  const Real value = tape.scalar(loss(tape));
  if (!std::isfinite(value)) throw std::domain_error("grad_check: non-finite loss");
  return value;
}

}  // namespace

GradCheckReport grad_check(const LossBuilder& loss, ParamSet& params,
                           const GradCheckOptions& options) {
  if (!(options.epsilon >= Real(1e-6) && options.epsilon <= Real(1e-4))) {
    throw std::invalid_argument("grad_check: epsilon must lie in [1e-6, 1e-4]");
  }
  GradSet grads(params);
  {
    Tape tape(&params, &grads);
    Var l = loss(tape);
    if (!std::isfinite(tape.scalar(l))) throw std::domain_error("grad_check: non-finite loss");
    tape.backward(l);
  }

  GradCheckReport report;
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto values = params[p].value.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const Real saved = values[i];
      values[i] = saved + options.epsilon;
      const Real up = evaluate(loss, params);
      values[i] = saved - options.epsilon;
      const Real down = evaluate(loss, params);
      values[i] = saved;

      const Real numeric = (up - down) / (2 * options.epsilon);
      const Real analytic = grads[p][i];
      const Real denom = std::max({std::abs(analytic), std::abs(numeric), options.abs_floor});
      const Real rel = std::abs(analytic - numeric) / denom;
      ++report.entries_checked;
      if (rel > report.max_rel_error || report.worst_param.empty()) {
        report.max_rel_error = rel;
        report.worst_param = params[p].name;
        report.worst_index = i;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error <= options.tolerance;
  return report;
}

}  // namespace og
