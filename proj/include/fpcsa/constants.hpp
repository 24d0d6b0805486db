#pragma once

#include <cstdint>

namespace fpcsa {

// Density of the smoothed highest-nonzero-level position of one sketch row
// at unit cardinality scale, parameterized by r = 1 - 1/|F|:
//   nu(z, r) = (1 - e^(-2^-z)) r prod_{j>=1} (1 - (1 - e^(-2^-z-j)) r).
// The product is accumulated as a sum of log1p terms and truncated once
// 2^(-z-j) < 1e-18 (omitted factors differ from 1 by less than that).
double nu(double z, double r);

// phi(t, r) = integral of 2^(tz) nu(z, r) dz, the transform the estimator
// calibration is built from. Domain: t in (0, 3/4] (covers t = 1/m and 2/m
// for every m >= 3; the integral diverges as t -> 1), r in [0, 1].
double phi(double t, double r);

struct PsiMoments {
  double mean;      // E X,   X ~ nu(., r)
  double variance;  // Var X
};
PsiMoments psi_moments(double r);

// Calibration constants for a sketch with m rows over a field of the given
// order. norm_factor * 2^(mean of row positions) is the cardinality estimate.
struct EstimatorConstants {
  uint32_t m;
  uint64_t field_order;
  double r;                     // 1 - 1/field_order
  double phi_1m;                // phi(1/m, r)
  double phi_2m;                // phi(2/m, r)
  double norm_factor;           // phi(1/m, r)^(-m) * m
  double rel_error_exact;       // sqrt(phi_1m^(-2m) phi_2m^m - 1)
  double psi_mean;
  double psi_variance;
  double rel_error_asymptotic;  // ln(2) sqrt(psi_variance / m)
};

// Cached; computing a new (m, field_order) pair runs the quadrature once.
// Thread-safe. m >= 3, field_order >= 2.
const EstimatorConstants& constants_for(uint32_t m, uint64_t field_order);

}  // namespace fpcsa
