#include "matfactor/distributions.hpp"

#include <cmath>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>

#include "matfactor/error.hpp"

namespace matfactor {

namespace {

void check(double x, double df1, double df2 = 1.0) {
  require(!std::isnan(x) && x >= 0, ErrorCode::kDomain, "distribution argument must be non-negative");
  require(df1 > 0 && df2 > 0 && std::isfinite(df1) && std::isfinite(df2), ErrorCode::kDomain,
          "degrees of freedom must be positive");
}

}  // namespace

double f_cdf(double x, double df1, double df2) {
  check(x, df1, df2);
  if (std::isinf(x)) return 1.0;
  return boost::math::cdf(boost::math::fisher_f(df1, df2), x);
}

double f_sf(double x, double df1, double df2) {
  check(x, df1, df2);
  if (std::isinf(x)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::fisher_f(df1, df2), x));
}

double chi2_cdf(double x, double df) {
  check(x, df);
  if (std::isinf(x)) return 1.0;
  return boost::math::cdf(boost::math::chi_squared(df), x);
}

double chi2_sf(double x, double df) {
  check(x, df);
  if (std::isinf(x)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

}  // namespace matfactor
