#include "ulfit/pulse.hpp"

#include <cmath>

#include "ulfit/errors.hpp"

namespace ulfit {

namespace {

double interp_uniform(const std::vector<double>& samples, double t01) {
  // t01 in [0,1] across the sample range; zero outside
  if (samples.empty() || t01 < 0.0 || t01 > 1.0) return 0.0;
  double s = t01 * (samples.size() - 1);
  std::size_t i = static_cast<std::size_t>(s);
  if (i + 1 >= samples.size()) return samples.back();
  double f = s - i;
  return samples[i] * (1.0 - f) + samples[i + 1] * f;
}

}  // namespace

PulseProfile PulseProfile::bump(double eta, int n) {
  if (eta <= 0 || n < 3) throw ValidationError("PulseProfile::bump: bad parameters");
  PulseProfile p;
  p.eta = eta;
  p.samples.resize(n);
  for (int i = 0; i < n; ++i) {
    double s = -eta + eta * i / (n - 1);
    double q = 2.0 * s / eta + 1.0;
    double arg = 1.0 - q * q;
    p.samples[i] = arg > 1e-12 ? std::exp(-1.0 / arg) : 0.0;
  }
  return p;
}

double PulseProfile::operator()(double s) const {
  if (eta <= 0) return 0.0;
  return interp_uniform(samples, (s + eta) / eta);
}

BeamProfile BeamProfile::bump(double radius, int n) {
  if (radius <= 0 || n < 3) throw ValidationError("BeamProfile::bump: bad parameters");
  BeamProfile b;
  b.radius = radius;
  b.samples.resize(n);
  for (int i = 0; i < n; ++i) {
    double q = static_cast<double>(i) / (n - 1);
    double arg = 1.0 - q * q;
    b.samples[i] = arg > 1e-12 ? std::exp(-1.0 / arg) : 0.0;
  }
  return b;
}

double BeamProfile::operator()(double r) const {
  if (radius <= 0) return 0.0;
  return interp_uniform(samples, std::abs(r) / radius);
}

double BeamProfile::transverse_integral() const {
  if (samples.size() < 2) return 0.0;
  double h = radius / (samples.size() - 1);
  double acc = 0.5 * (samples.front() + samples.back());
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) acc += samples[i];
  return 2.0 * acc * h;  // even in r
}

double PulseSpec::v(const Vec2& x, double t) const {
  double z = axial(x);
  double r = transverse(x);
  if (std::abs(r) >= beam.radius) return 0.0;
  return amplitude * w(z - speed * t) * beam(r);
}

void PulseSpec::validate() const {
  if (std::abs(norm(xi) - 1.0) > 1e-12)
    throw ValidationError("PulseSpec: direction must be a unit vector");
  if (speed <= 0) throw ValidationError("PulseSpec: speed must be positive");
  if (w.eta <= 0 || w.samples.size() < 2)
    throw ValidationError("PulseSpec: pulse profile missing");
  if (beam.radius <= 0 || beam.samples.size() < 2)
    throw ValidationError("PulseSpec: beam profile missing");
}

}  // namespace ulfit
