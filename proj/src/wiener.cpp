#include "ulfit/wiener.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "ulfit/errors.hpp"
#include "ulfit/fft.hpp"

namespace ulfit {

std::vector<double> wiener_deconvolve(const std::vector<double>& curve,
                                      const std::vector<double>& kernel,
                                      const WienerConfig& cfg) {
  const std::size_t n = curve.size();
  if (n == 0) throw ValidationError("wiener_deconvolve: empty curve");
  bool all_zero = true;
  for (double k : kernel) all_zero = all_zero && (k == 0.0);
  if (kernel.empty() || all_zero)
    throw ValidationError("wiener_deconvolve: kernel is identically zero");
  if (cfg.noise_variance > 0 && cfg.snr_estimate <= 0)
    throw ValidationError("wiener_deconvolve: positive noise requires snr_estimate > 0");
  if (cfg.snr_estimate < 0)
    throw ValidationError("wiener_deconvolve: snr_estimate must be nonnegative");

  std::size_t nfft = cfg.fft_size ? cfg.fft_size : fft::next_pow2(2 * n);
  if (nfft < 2 * n || (nfft & (nfft - 1)) != 0)
    throw ValidationError("wiener_deconvolve: fft_size must be a power of two >= 2x length");
  if (kernel.size() > nfft)
    throw ValidationError("wiener_deconvolve: kernel longer than fft window");

  std::vector<std::complex<double>> m(nfft, 0.0), w(nfft, 0.0);
  for (std::size_t i = 0; i < n; ++i) m[i] = curve[i];
  // raised-cosine roll-off over the tail of the measured window
  if (cfg.taper_fraction > 0) {
    std::size_t t = static_cast<std::size_t>(cfg.taper_fraction * n);
    for (std::size_t i = 0; i < t; ++i) {
      double s = static_cast<double>(i + 1) / (t + 1);  // 0..1 toward the end
      m[n - 1 - i] *= 0.5 * (1.0 + std::cos(std::numbers::pi * (1.0 - s)));
    }
  }
  for (std::size_t i = 0; i < kernel.size(); ++i) w[i] = kernel[i];

  auto mf = fft::forward(m);
  auto wf = fft::forward(w);

  double max_pw = 0.0;
  for (const auto& v : wf) max_pw = std::max(max_pw, std::norm(v));
  const double floor = 1e-14 * max_pw;
  const double q = cfg.snr_estimate;

  std::vector<std::complex<double>> pf(nfft, 0.0);
  for (std::size_t k = 0; k < nfft; ++k) {
    double pw = std::norm(wf[k]);
    if (pw < floor) continue;  // zeroed rather than amplified
    pf[k] = mf[k] * std::conj(wf[k]) / (pw + q);
  }

  auto phi = fft::inverse(pf);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = phi[i].real();
  return out;
}

double estimate_snr(const std::vector<double>& curve, double kernel_bandwidth) {
  const std::size_t n = curve.size();
  if (n < 16) throw ValidationError("estimate_snr: need at least 16 samples");

  std::vector<std::complex<double>> x(curve.begin(), curve.end());
  auto xf = fft::forward(x);
  const std::size_t half = n / 2;  // bins 1..half (skip DC)

  double cut_frac = std::clamp(std::max(0.75, kernel_bandwidth), 0.0, 0.95);
  std::size_t cut = std::max<std::size_t>(2, static_cast<std::size_t>(cut_frac * half));
  if (cut >= half) cut = half - 1;

  double tail_power = 0.0, low_power = 0.0;
  std::size_t tail_n = 0, low_n = 0;
  for (std::size_t k = 1; k <= half; ++k) {
    double p = std::norm(xf[k]);
    if (k >= cut) {
      tail_power += p;
      ++tail_n;
    } else {
      low_power += p;
      ++low_n;
    }
  }
  if (tail_n == 0 || low_n == 0) return 0.0;
  tail_power /= tail_n;
  low_power /= low_n;

  double nu = std::sqrt(tail_power);
  if (nu == 0.0) return 0.0;
  double signal = std::sqrt(std::max(low_power - tail_power, 0.0));
  if (signal == 0.0) return 1e6;
  return std::min(nu / signal, 1e6);
}

double kernel_bandwidth_fraction(const std::vector<double>& kernel) {
  if (kernel.empty()) return 0.0;
  std::size_t nfft = fft::next_pow2(std::max<std::size_t>(64, 4 * kernel.size()));
  std::vector<std::complex<double>> w(nfft, 0.0);
  for (std::size_t i = 0; i < kernel.size(); ++i) w[i] = kernel[i];
  auto wf = fft::forward(w);
  double max_mag = 0.0;
  for (std::size_t k = 0; k <= nfft / 2; ++k) max_mag = std::max(max_mag, std::abs(wf[k]));
  if (max_mag == 0.0) return 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k <= nfft / 2; ++k)
    if (std::abs(wf[k]) > 1e-3 * max_mag) last = k;
  return static_cast<double>(last) / (nfft / 2);
}

}  // namespace ulfit
