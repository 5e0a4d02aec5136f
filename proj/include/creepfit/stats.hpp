// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace creepfit {

/// Regularized incomplete beta function I_x(a, b), accurate to at least six
/// significant digits via the Lentz continued-fraction expansion.
double regularized_incomplete_beta(double a, double b, double x);

/// CDF of the F distribution with (d1, d2) degrees of freedom.
double f_cdf(double f, double d1, double d2);

/// Upper tail P(F > f); the ANOVA P-value.
double f_survival(double f, double d1, double d2);

}  // namespace creepfit
