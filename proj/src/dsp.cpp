#include "wifisense/dsp.hpp"

#include <cmath>
#include <numbers>

namespace wifisense::dsp {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<std::complex<double>>& x, bool inverse) {
    const std::size_t n = x.size();
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = x[i + k];
                const auto v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

void dft_direct(std::vector<std::complex<double>>& x, bool inverse) {
    const std::size_t n = x.size();
    const double sign = inverse ? 1.0 : -1.0;
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t m = 0; m < n; ++m) {
            const double ang = sign * 2.0 * std::numbers::pi *
                               static_cast<double>(k * m % n) / static_cast<double>(n);
            acc += x[m] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    x = std::move(out);
}

}  // namespace

void fft_inplace(std::vector<std::complex<double>>& x, bool inverse) {
    if (x.empty()) return;
    if (is_pow2(x.size())) {
        fft_radix2(x, inverse);
    } else {
        dft_direct(x, inverse);
    }
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(x.size());
        for (auto& v : x) v *= inv_n;
    }
}

std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x) {
    auto y = x;
    fft_inplace(y, false);
    return y;
}

std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& x) {
    auto y = x;
    fft_inplace(y, true);
    return y;
}

std::complex<double> dtft_point(const std::complex<double>* x, std::size_t n,
                                double f_norm) {
    const double ang = -2.0 * std::numbers::pi * f_norm;
    const std::complex<double> step(std::cos(ang), std::sin(ang));
    std::complex<double> w(1.0, 0.0);
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        acc += x[k] * w;
        w *= step;
        if ((k & 0xFFu) == 0xFFu) {
            // Keep the phasor on the unit circle over long sums.
            w /= std::abs(w);
        }
    }
    return acc;
}

void unwrap_inplace(std::vector<double>& phase) {
    constexpr double pi = std::numbers::pi;
    double offset = 0.0;
    for (std::size_t i = 1; i < phase.size(); ++i) {
        const double raw = phase[i] + offset;
        double d = raw - phase[i - 1];
        while (d > pi) {
            offset -= 2.0 * pi;
            d -= 2.0 * pi;
        }
        while (d < -pi) {
            offset += 2.0 * pi;
            d += 2.0 * pi;
        }
        phase[i] = phase[i - 1] + d;
    }
}

}  // namespace wifisense::dsp
