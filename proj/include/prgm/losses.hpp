#pragma once

#include "prgm/exp_family.hpp"

namespace prgm {

/// Intrinsic (Kullback-Leibler) loss of reporting `delta` when the truth is
/// `theta`, in nats:
///   log beta(theta) - log beta(delta) + (delta - theta) H(theta).
/// Evaluated from log beta so that beta itself is never formed.
double intrinsic_loss(const FamilySpec& fam, double theta, double delta);

/// Posterior risk of `delta` given the three posterior expectations
/// E[H], E[log beta] and E[theta H].
double posterior_risk(const FamilySpec& fam, double delta, double post_mean_H, double post_mean_logbeta,
                      double post_mean_thetaH);

/// Regret of choosing `delta` over the Bayes action `delta_bayes`. Equal to
/// intrinsic_loss(delta_bayes, delta).
double posterior_regret(const FamilySpec& fam, double delta_bayes, double delta);

}  // namespace prgm
