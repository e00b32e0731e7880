#pragma once

#include <complex>
#include <vector>

namespace ulfit::fft {

// In-order complex DFT (FFTW backend, unnormalized forward transform;
// inverse divides by n). Thread-safe: planner access is serialized.
std::vector<std::complex<double>> forward(const std::vector<std::complex<double>>& in);
std::vector<std::complex<double>> inverse(const std::vector<std::complex<double>>& in);

std::size_t next_pow2(std::size_t n);

}  // namespace ulfit::fft
