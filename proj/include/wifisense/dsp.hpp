#pragma once

#include <complex>
#include <vector>

namespace wifisense::dsp {

// In-place DFT/IDFT. Radix-2 when the length is a power of two, direct
// O(n^2) evaluation otherwise (lengths here are small). The inverse
// transform includes the 1/n factor.
void fft_inplace(std::vector<std::complex<double>>& x, bool inverse);

std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x);
std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& x);

// Sum of x[k] * exp(-j*2*pi*f_norm*k) for k = 0..n-1, with f_norm in cycles
// per sample. Incremental phasor with periodic renormalization.
std::complex<double> dtft_point(const std::complex<double>* x, std::size_t n,
                                double f_norm);

// Unwraps phase jumps larger than pi in place.
void unwrap_inplace(std::vector<double>& phase);

}  // namespace wifisense::dsp
