#include "prgm/losses.hpp"

#include <cmath>

#include "prgm/errors.hpp"

namespace prgm {

double intrinsic_loss(const FamilySpec& fam, double theta, double delta) {
  require_interior(fam, theta, "theta");
  require_interior(fam, delta, "delta");
  if (theta == delta) return 0.0;
  double v = fam.log_beta(theta) - fam.log_beta(delta) + (delta - theta) * fam.h(theta);
  // Nonnegative in exact arithmetic; clip rounding noise near the diagonal.
  return v < 0.0 ? 0.0 : v;
}

double posterior_risk(const FamilySpec& fam, double delta, double post_mean_H, double post_mean_logbeta,
                      double post_mean_thetaH) {
  require_interior(fam, delta, "delta");
  if (!std::isfinite(post_mean_H) || !std::isfinite(post_mean_logbeta) || !std::isfinite(post_mean_thetaH)) {
    throw DomainError("posterior_risk: posterior expectations must be finite");
  }
  return post_mean_logbeta - fam.log_beta(delta) + delta * post_mean_H - post_mean_thetaH;
}

double posterior_regret(const FamilySpec& fam, double delta_bayes, double delta) {
  return intrinsic_loss(fam, delta_bayes, delta);
}

}  // namespace prgm
