#include "camel/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "camel/numerics/ops.hpp"

namespace camel {

namespace {

GradCheckReport abort_report(std::string why) {
  GradCheckReport r;
  r.aborted = true;
  r.diagnostic = std::move(why);
  return r;
}

}  // namespace

GradCheckReport grad_check(const LossFn& loss_fn, ParamStore& params,
                           const GradCheckOptions& options) {
  params.zero_grad();
  ReluPatternScope base_pattern;
  const Tensor loss = loss_fn();
  if (!std::isfinite(loss.item())) {
    return abort_report("loss is not finite (" + std::to_string(loss.item()) + ")");
  }
  loss.backward();

  GradCheckReport report;
  std::mt19937_64 rng(options.seed);
  for (const auto& [name, tensor] : params.entries()) {
    Tensor t = tensor;
    const std::vector<double> analytic =
        t.has_grad() ? std::vector<double>(t.grad().begin(), t.grad().end())
                     : std::vector<double>(t.numel(), 0.0);

    std::vector<std::size_t> indices(t.numel());
    std::iota(indices.begin(), indices.end(), 0);
    if (indices.size() > options.max_elements_per_tensor) {
      std::shuffle(indices.begin(), indices.end(), rng);
      indices.resize(options.max_elements_per_tensor);
      std::sort(indices.begin(), indices.end());
    }

    auto values = t.mutable_data();
    for (auto idx : indices) {
      const double orig = values[idx];
      double plus = 0.0, minus = 0.0;
      bool kink = false;
      {
        NoGradGuard guard;
        ReluPatternScope plus_pattern;
        values[idx] = orig + options.eps;
        plus = loss_fn().item();
        kink |= plus_pattern.hash() != base_pattern.hash();
      }
      {
        NoGradGuard guard;
        ReluPatternScope minus_pattern;
        values[idx] = orig - options.eps;
        minus = loss_fn().item();
        kink |= minus_pattern.hash() != base_pattern.hash();
      }
      values[idx] = orig;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        std::ostringstream os;
        os << "non-finite loss while perturbing " << name << "[" << idx << "]";
        return abort_report(os.str());
      }
      if (kink) {
        // A relu input changed sign inside [x - eps, x + eps], so the
        // difference quotient is not a derivative there.
        ++report.kinks_skipped;
        continue;
      }
      const double numeric = (plus - minus) / (2.0 * options.eps);
      const double noise = options.rounding_factor * std::numeric_limits<double>::epsilon() *
                           std::max(std::abs(plus), std::abs(minus)) / options.eps;
      const double denom = std::max({std::abs(numeric), std::abs(analytic[idx]),
                                     options.relative_floor, noise / options.tolerance});
      const double rel = std::abs(numeric - analytic[idx]) / denom;
      ++report.elements_checked;
      if (report.worst_parameter.empty() || rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_parameter = name;
        report.worst_index = idx;
      }
    }
  }
  params.zero_grad();
  const std::size_t attempted = report.elements_checked + report.kinks_skipped;
  const bool few_kinks = static_cast<double>(report.kinks_skipped) <=
                         options.max_kink_fraction * static_cast<double>(attempted);
  report.passed = report.max_relative_error < options.tolerance && few_kinks;
  std::ostringstream os;
  os << "checked " << report.elements_checked << " elements, max relative error "
     << report.max_relative_error << " at " << report.worst_parameter << "["
     << report.worst_index << "], " << report.kinks_skipped << " skipped at relu kinks";
  report.diagnostic = os.str();
  return report;
}

}  // namespace camel
