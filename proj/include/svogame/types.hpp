#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace svogame {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

// Longitudinal state of one vehicle. Position is measured along the lane
// relative to the conflict point: negative upstream, zero at the point,
// positive past it.
struct VehicleState {
  double position{0.0};  // m
  double speed{0.0};     // m/s
};

struct Control {
  double acceleration{0.0};  // m/s^2
};

// Per-vehicle acceleration sequence over a planning horizon.
using ControlSequence = std::vector<Control>;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Map an unconstrained parameter to an SVO angle in (0, pi/2).
inline double phi_from_psi(double psi) {
  double phi = kHalfPi * sigmoid(psi);
  // sigmoid saturates in floating point; keep the interval open.
  if (phi >= kHalfPi) phi = std::nextafter(kHalfPi, 0.0);
  if (phi <= 0.0) phi = std::numeric_limits<double>::min();
  return phi;
}

/// Inverse of phi_from_psi on the open interval (0, pi/2).
inline double psi_from_phi(double phi) {
  if (!(phi > 0.0 && phi < kHalfPi)) {
    throw std::domain_error("psi_from_phi: angle must lie strictly inside (0, pi/2)");
  }
  const double s = phi / kHalfPi;
  return std::log(s / (1.0 - s));
}

// SVO angles of both players. phi1 weights the CAV, phi2 the HDV; psi is the
// unconstrained parameter with phi2 = (pi/2) * sigmoid(psi).
struct SvoPair {
  double phi1{kHalfPi / 2.0};
  double phi2{kHalfPi / 2.0};
  double psi{0.0};
};

inline SvoPair make_svo(double phi1, double phi2) {
  if (!(phi1 > 0.0 && phi1 < kHalfPi)) {
    throw std::domain_error("make_svo: phi1 must lie strictly inside (0, pi/2)");
  }
  return SvoPair{phi1, phi2, psi_from_phi(phi2)};
}

inline SvoPair make_svo_from_psi(double phi1, double psi) {
  if (!(phi1 > 0.0 && phi1 < kHalfPi)) {
    throw std::domain_error("make_svo_from_psi: phi1 must lie strictly inside (0, pi/2)");
  }
  return SvoPair{phi1, phi_from_psi(psi), psi};
}

// One observed step of the joint system, as consumed by the SVO estimator.
struct TrajectorySegment {
  VehicleState x1;       // CAV at the segment start
  VehicleState x2;       // HDV at the segment start
  VehicleState x1_next;
  VehicleState x2_next;
  Control u1;
  Control u2;
};

}  // namespace svogame
