#pragma once

#include <cstddef>
#include <vector>

namespace ulfit {

// Frequency-domain deconvolution settings. The filter applied per bin is
//   conj(W_hat) / (|W_hat|^2 + snr_estimate)
// with a single scalar snr_estimate = nu / S (noise level over mean signal
// spectral density). Bins where |W_hat|^2 falls below 1e-14 x its maximum
// are zeroed instead of amplified.
struct WienerConfig {
  double noise_variance = 0.0;  // nu^2 per sample
  double snr_estimate = 0.0;    // nu / S, >= 0
  std::size_t fft_size = 0;     // power of two >= 2x curve length; 0 = auto
  // raised-cosine roll-off applied to this tail fraction of the curve
  // before transforming, against circular wrap on non-decaying inputs
  double taper_fraction = 0.05;
};

// Recovers phi from curve = kernel (x) phi (discrete convolution). kernel[j]
// is W(z) = w(-z) sampled at lag j dz on the curve's grid; output has the
// curve's length. Throws ValidationError for an all-zero kernel or for
// noise_variance > 0 with snr_estimate <= 0.
std::vector<double> wiener_deconvolve(const std::vector<double>& curve,
                                      const std::vector<double>& kernel,
                                      const WienerConfig& cfg);

// A-priori nu/S estimate: noise floor from the mean spectral power of the
// high-frequency tail (bins above max(3/4 Nyquist, kernel_bandwidth)),
// signal power from the remaining band. Returns 0 for a silent curve and
// caps the ratio at 1e6 when no signal band is detectable.
double estimate_snr(const std::vector<double>& curve, double kernel_bandwidth);

// Fraction of Nyquist below which |K_hat| stays above 1e-3 of its maximum.
double kernel_bandwidth_fraction(const std::vector<double>& kernel);

}  // namespace ulfit
