#pragma once

#include <vector>

#include "ulfit/vec2.hpp"

namespace ulfit {

// 1D pulse shape w, smooth and supported in ]-eta, 0[. Stored as uniform
// samples over [-eta, 0] and evaluated by linear interpolation (zero
// outside). The default is the C-infinity mollifier bump
//   w(s) = exp(-1 / (1 - q^2)),  q = 2 s / eta + 1.
struct PulseProfile {
  double eta = 0.0;
  std::vector<double> samples;

  static PulseProfile bump(double eta, int n = 257);
  double operator()(double s) const;
};

// Transverse beam envelope A(|r|), even in r, supported in [-R, R]; stored
// as radial samples over [0, R]. The profile does not vary along the beam.
struct BeamProfile {
  double radius = 0.0;
  std::vector<double> samples;

  static BeamProfile bump(double radius, int n = 129);
  double operator()(double r) const;
  // integral of A over the full transverse line (trapezoid on the samples,
  // exact for the interpolant); this is the gamma-vector magnitude
  double transverse_integral() const;
};

// One acoustic pulse: origin y outside the domain, unit direction xi,
// profiles w and A, speed c normalizing time to z = c t. The induced
// current points along tau = (-xi_2, xi_1).
struct PulseSpec {
  Vec2 origin;
  Vec2 xi;
  PulseProfile w;
  BeamProfile beam;
  double speed = 1.0;
  double amplitude = 1.0;  // folds |B|/e+ and any gain into one scale

  Vec2 tau() const { return perp(xi); }
  double axial(const Vec2& x) const { return dot(x - origin, xi); }
  double transverse(const Vec2& x) const { return dot(x - origin, tau()); }
  // velocity amplitude v(x, t) = w(z - c t) A(z, |r|)
  double v(const Vec2& x, double t) const;

  void validate() const;
};

}  // namespace ulfit
