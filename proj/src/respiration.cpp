#include "wifisense/respiration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "wifisense/dsp.hpp"
#include "wifisense/errors.hpp"

namespace wifisense {

namespace {

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid),
                     v.end());
    double m = v[mid];
    if (n % 2 == 0) {
        // Even windows occur at the truncated edges.
        const auto lower = std::max_element(
            v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        m = (m + *lower) / 2.0;
    }
    return m;
}

// Linear-interpolated percentile, q in [0, 100].
double percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - w) + v[hi] * w;
}

}  // namespace

void PhaseTrace::validate() const {
    if (phase_rad.empty()) throw ValidationError("empty phase trace");
    if (!(epoch_s > 0.0)) throw ValidationError("epoch_s must be positive");
    for (double p : phase_rad) {
        if (!std::isfinite(p)) throw ValidationError("non-finite phase sample");
    }
}

double phase_sensitivity(double displacement_m, double wavelength_m) {
    if (!(wavelength_m > 0.0)) {
        throw ValidationError("wavelength must be positive");
    }
    if (displacement_m < 0.0) {
        throw ValidationError("displacement must be non-negative");
    }
    return 2.0 * std::numbers::pi * displacement_m / wavelength_m;
}

PhaseTrace extract_phase(const IqTrace& ref, const IqTrace& surv,
                         double epoch_s) {
    ref.validate();
    surv.validate();
    if (ref.sample_rate_hz != surv.sample_rate_hz) {
        throw ShapeError("reference and surveillance sample rates differ");
    }
    if (ref.samples.size() != surv.samples.size()) {
        throw ShapeError("reference and surveillance lengths differ");
    }
    const double fs = ref.sample_rate_hz;
    const auto epoch_samples =
        static_cast<std::size_t>(std::llround(epoch_s * fs));
    if (epoch_samples < 10) {
        throw ValidationError("epoch must span at least 10 samples");
    }
    if (epoch_samples > ref.samples.size()) {
        throw RangeError("epoch longer than the signal");
    }

    const std::size_t n_epochs = ref.samples.size() / epoch_samples;
    PhaseTrace trace;
    trace.epoch_s = epoch_s;
    trace.t0_s = ref.t0_s + epoch_s / 2.0;
    trace.phase_rad.resize(n_epochs);
    for (std::size_t e = 0; e < n_epochs; ++e) {
        std::complex<double> acc(0.0, 0.0);
        const std::size_t start = e * epoch_samples;
        for (std::size_t i = 0; i < epoch_samples; ++i) {
            acc += std::conj(std::complex<double>(ref.samples[start + i])) *
                   std::complex<double>(surv.samples[start + i]);
        }
        trace.phase_rad[e] = std::arg(acc);
    }
    dsp::unwrap_inplace(trace.phase_rad);
    return trace;
}

PhaseTrace hampel(const PhaseTrace& trace, int window, double k) {
    trace.validate();
    if (window < 3 || window % 2 == 0) {
        throw ValidationError("window must be odd and >= 3");
    }
    if (!(k > 0.0)) throw ValidationError("k must be positive");

    const auto n = trace.phase_rad.size();
    const auto half = static_cast<std::size_t>(window / 2);
    PhaseTrace out = trace;
    std::vector<double> buf;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(i + half, n - 1);
        buf.assign(trace.phase_rad.begin() + static_cast<std::ptrdiff_t>(lo),
                   trace.phase_rad.begin() + static_cast<std::ptrdiff_t>(hi + 1));
        const double med = median_of(buf);
        for (double& b : buf) b = std::abs(b - med);
        const double mad = median_of(std::move(buf));
        buf.clear();
        if (std::abs(trace.phase_rad[i] - med) > k * 1.4826 * mad) {
            out.phase_rad[i] = med;
        }
    }
    return out;
}

RespirationEstimate estimate_rate(const PhaseTrace& trace, double f_lo_hz,
                                  double f_hi_hz) {
    trace.validate();
    if (!(f_lo_hz > 0.0) || !(f_hi_hz > f_lo_hz)) {
        throw ValidationError("need 0 < f_lo < f_hi");
    }
    const double nyquist = 0.5 / trace.epoch_s;
    if (f_hi_hz > nyquist + 1e-12) {
        throw ValidationError("band exceeds the trace Nyquist rate");
    }
    const auto n = trace.phase_rad.size();
    const double duration = static_cast<double>(n) * trace.epoch_s;
    if (duration < 3.0 / f_lo_hz) {
        throw ValidationError("trace shorter than three periods of f_lo");
    }

    const double mean =
        std::accumulate(trace.phase_rad.begin(), trace.phase_rad.end(), 0.0) /
        static_cast<double>(n);
    std::vector<std::complex<double>> x(n);
    double energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = trace.phase_rad[i] - mean;
        x[i] = v;
        energy += v * v;
    }

    // Periodogram on the native grid k / (n * epoch).
    const double df = 1.0 / duration;
    const auto k_max = n / 2;
    auto power_at = [&](std::size_t k) {
        return std::norm(dsp::dtft_point(
            x.data(), n, static_cast<double>(k) / static_cast<double>(n)));
    };

    std::size_t best_k = 0;
    double best_p = -1.0;
    for (std::size_t k = 1; k <= k_max; ++k) {
        const double f = static_cast<double>(k) * df;
        if (f < f_lo_hz || f > f_hi_hz) continue;
        const double p = power_at(k);
        if (p > best_p) {
            best_p = p;
            best_k = k;
        }
    }
    if (best_k == 0) {
        throw ValidationError("band contains no periodogram bins");
    }

    RespirationEstimate est;
    est.band_lo_hz = f_lo_hz;
    est.band_hi_hz = f_hi_hz;
    est.peak_to_peak_rad =
        percentile(trace.phase_rad, 98.0) - percentile(trace.phase_rad, 2.0);
    if (best_p <= 1e-12 * static_cast<double>(n) * energy || energy == 0.0) {
        return est;  // detected stays false
    }

    double delta = 0.0;
    if (best_k > 1 && best_k < k_max) {
        const double a = power_at(best_k - 1);
        const double b = best_p;
        const double c = power_at(best_k + 1);
        const double denom = a - 2.0 * b + c;
        if (denom != 0.0) delta = 0.5 * (a - c) / denom;
    }
    est.detected = true;
    est.rate_hz = std::clamp((static_cast<double>(best_k) + delta) * df,
                             f_lo_hz, f_hi_hz);
    est.rate_bpm = 60.0 * est.rate_hz;
    return est;
}

}  // namespace wifisense
