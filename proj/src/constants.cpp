#include "fpcsa/constants.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fpcsa/errors.hpp"

namespace fpcsa {

namespace {

void check_r(double r) {
  if (!(r >= 0.0 && r <= 1.0))
    throw DomainError("r must lie in [0, 1]");
}

// Adaptive Gauss-Kronrod over the full support. The integrands are smooth
// and decay at both ends of [-200, 200]; the error estimate lands far below
// the 1e-12 budget the calibration needs.
template <typename F>
double integrate(const F& f) {
  double error = 0;
  double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, -200.0, 200.0, 18, 1e-14, &error);
  if (!(error < 1e-12))
    throw DomainError("quadrature failed to converge");
  return v;
}

}  // namespace

double nu(double z, double r) {
  check_r(r);
  if (r == 0.0) return 0.0;
  double lead = -std::expm1(-std::exp2(-z)) * r;
  if (lead == 0.0) return 0.0;
  double log_rest = 0.0;
  for (int j = 1;; ++j) {
    double x = std::exp2(-z - j);
    if (x < 1e-18) break;
    log_rest += std::log1p(r * std::expm1(-x));
    if (log_rest == -std::numeric_limits<double>::infinity()) return 0.0;
  }
  return lead * std::exp(log_rest);
}

double phi(double t, double r) {
  if (!(t > 0.0 && t <= 0.75))
    throw DomainError("phi requires t in (0, 3/4]");
  check_r(r);
  return integrate([t, r](double z) { return std::exp2(t * z) * nu(z, r); });
}

PsiMoments psi_moments(double r) {
  check_r(r);
  double m1 = integrate([r](double z) { return z * nu(z, r); });
  double m2 = integrate([r](double z) { return z * z * nu(z, r); });
  return {m1, m2 - m1 * m1};
}

const EstimatorConstants& constants_for(uint32_t m, uint64_t field_order) {
  if (m < 3) throw ConfigError("estimator requires at least 3 rows");
  if (field_order < 2) throw ConfigError("field order must be at least 2");

  static std::mutex mu;
  static std::map<std::pair<uint32_t, uint64_t>, EstimatorConstants> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({m, field_order});
  if (it != cache.end()) return it->second;

  EstimatorConstants c;
  c.m = m;
  c.field_order = field_order;
  c.r = 1.0 - 1.0 / static_cast<double>(field_order);
  c.phi_1m = phi(1.0 / m, c.r);
  c.phi_2m = phi(2.0 / m, c.r);
  double ln1 = std::log(c.phi_1m);
  double ln2 = std::log(c.phi_2m);
  c.norm_factor = std::exp(-static_cast<double>(m) * ln1) * m;
  // phi_2m >= phi_1m^2 (Cauchy-Schwarz); expm1 keeps precision at large m.
  c.rel_error_exact = std::sqrt(std::max(0.0, std::expm1(m * (ln2 - 2.0 * ln1))));
  PsiMoments psi = psi_moments(c.r);
  c.psi_mean = psi.mean;
  c.psi_variance = psi.variance;
  c.rel_error_asymptotic = std::log(2.0) * std::sqrt(psi.variance / m);
  return cache.emplace(std::make_pair(m, field_order), c).first->second;
}

}  // namespace fpcsa
