#pragma once

namespace matfactor {

// Distribution functions for test p-values. Degrees of freedom may be
// fractional but must be positive; x must be non-negative (x = +inf allowed).
double f_cdf(double x, double df1, double df2);
/// 1 - f_cdf, evaluated without cancellation.
double f_sf(double x, double df1, double df2);
double chi2_cdf(double x, double df);
double chi2_sf(double x, double df);

}  // namespace matfactor
