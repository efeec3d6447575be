#include "wifisense/doppler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wifisense/dsp.hpp"
#include "wifisense/errors.hpp"

namespace wifisense {

namespace {

// Symmetric odd-length frequency grid covering [-max, +max] at the given
// step.
std::vector<double> doppler_grid(double max_hz, double step_hz) {
    const int n_half = static_cast<int>(std::floor(max_hz / step_hz + 1e-9));
    std::vector<double> axis;
    axis.reserve(static_cast<std::size_t>(2 * n_half + 1));
    for (int k = -n_half; k <= n_half; ++k) {
        axis.push_back(static_cast<double>(k) * step_hz);
    }
    return axis;
}

}  // namespace

void CafConfig::validate() const {
    if (!(batch_len_s > 0.0)) throw ValidationError("batch_len_s must be positive");
    if (!(batch_hop_s > 0.0)) throw ValidationError("batch_hop_s must be positive");
    if (batch_hop_s > batch_len_s) {
        throw ValidationError("batch_hop_s must not exceed batch_len_s");
    }
    if (!(max_doppler_hz > 0.0)) {
        throw ValidationError("max_doppler_hz must be positive");
    }
    if (effective_step_hz() > 2.0 * max_doppler_hz) {
        throw ValidationError("doppler_step_hz must not exceed 2 * max_doppler_hz");
    }
    if (delay_bins < 1) throw ValidationError("delay_bins must be >= 1");
}

void DopplerSpectrogram::validate() const {
    if (batch_times_s.empty() || doppler_axis_hz.empty()) {
        throw ValidationError("empty spectrogram");
    }
    if (magnitudes.size() != batch_times_s.size() * doppler_axis_hz.size()) {
        throw ShapeError("spectrogram storage does not match axes");
    }
    for (double m : magnitudes) {
        if (!(m >= 0.0) || !std::isfinite(m)) {
            throw ValidationError("magnitudes must be finite and non-negative");
        }
    }
    for (std::size_t i = 1; i < doppler_axis_hz.size(); ++i) {
        if (doppler_axis_hz[i] <= doppler_axis_hz[i - 1]) {
            throw ValidationError("doppler axis must be ascending");
        }
    }
}

DopplerSpectrogram caf_batch(const IqTrace& ref, const IqTrace& surv,
                             const CafConfig& config) {
    config.validate();
    ref.validate();
    surv.validate();
    if (ref.sample_rate_hz != surv.sample_rate_hz) {
        throw ShapeError("reference and surveillance sample rates differ");
    }
    if (ref.samples.size() != surv.samples.size()) {
        throw ShapeError("reference and surveillance lengths differ");
    }
    const double fs = ref.sample_rate_hz;
    if (config.max_doppler_hz > fs / 2.0) {
        throw ValidationError("max_doppler_hz exceeds the Nyquist rate");
    }
    const auto n = ref.samples.size();
    const auto batch_len =
        static_cast<std::size_t>(std::llround(config.batch_len_s * fs));
    const auto hop =
        static_cast<std::size_t>(std::llround(config.batch_hop_s * fs));
    if (batch_len < 2 || hop < 1) {
        throw ValidationError("batch shorter than two samples");
    }
    if (batch_len > n) throw RangeError("batch longer than the signal");

    const std::size_t n_batches = (n - batch_len) / hop + 1;
    DopplerSpectrogram spec;
    spec.doppler_axis_hz =
        doppler_grid(config.max_doppler_hz, config.effective_step_hz());
    spec.resolution_hz = 1.0 / config.batch_len_s;
    spec.batch_times_s.resize(n_batches);
    spec.magnitudes.assign(n_batches * spec.doppler_axis_hz.size(), 0.0);

    std::vector<std::complex<double>> product(batch_len);
    for (std::size_t b = 0; b < n_batches; ++b) {
        const std::size_t start = b * hop;
        spec.batch_times_s[b] =
            ref.t0_s + (static_cast<double>(start) +
                        static_cast<double>(batch_len) / 2.0) / fs;
        for (int d = 0; d < config.delay_bins; ++d) {
            const auto shift = static_cast<std::size_t>(d);
            if (start + batch_len - 1 + shift >= n) break;
            for (std::size_t i = 0; i < batch_len; ++i) {
                product[i] =
                    std::conj(std::complex<double>(ref.samples[start + i])) *
                    std::complex<double>(surv.samples[start + i + shift]);
            }
            for (std::size_t f = 0; f < spec.doppler_axis_hz.size(); ++f) {
                const double f_norm = spec.doppler_axis_hz[f] / fs;
                const auto z = dsp::dtft_point(product.data(), batch_len, f_norm);
                double& cell = spec.at(static_cast<int>(b), static_cast<int>(f));
                cell = std::max(cell, std::norm(z));
            }
        }
    }
    spec.validate();
    return spec;
}

DopplerSpectrogram stft_csi(const std::vector<CsiMatrix>& series,
                            double sample_spacing_s, double window_s,
                            double hop_s, bool hann, bool subtract_mean) {
    if (series.empty()) throw ValidationError("empty CSI series");
    if (!(sample_spacing_s > 0.0)) {
        throw ValidationError("sample_spacing_s must be positive");
    }
    if (!(window_s > 0.0) || !(hop_s > 0.0) || hop_s > window_s) {
        throw ValidationError("need 0 < hop_s <= window_s");
    }
    const int n_groups = series.front().n_groups;
    for (const auto& m : series) {
        m.validate();
        if (m.n_groups != n_groups || m.n_antennas != series.front().n_antennas) {
            throw ShapeError("CSI series entries disagree in shape");
        }
    }
    const auto len = series.size();
    const auto w =
        static_cast<std::size_t>(std::llround(window_s / sample_spacing_s));
    const auto hop =
        static_cast<std::size_t>(std::llround(hop_s / sample_spacing_s));
    if (w < 2 || hop < 1) throw ValidationError("window shorter than two samples");
    if (w > len) throw RangeError("window longer than the CSI series");

    const int k_half = static_cast<int>(w / 2);
    const std::size_t n_batches = (len - w) / hop + 1;

    DopplerSpectrogram spec;
    spec.resolution_hz = 1.0 / window_s;
    for (int k = -k_half; k <= k_half; ++k) {
        spec.doppler_axis_hz.push_back(
            static_cast<double>(k) /
            (static_cast<double>(w) * sample_spacing_s));
    }
    spec.batch_times_s.resize(n_batches);
    spec.magnitudes.assign(n_batches * spec.doppler_axis_hz.size(), 0.0);

    std::vector<double> taper(w, 1.0);
    if (hann) {
        for (std::size_t i = 0; i < w; ++i) {
            taper[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi *
                                             static_cast<double>(i) /
                                             static_cast<double>(w - 1)));
        }
    }

    std::vector<std::complex<double>> windowed(w);
    for (std::size_t b = 0; b < n_batches; ++b) {
        const std::size_t start = b * hop;
        spec.batch_times_s[b] =
            (static_cast<double>(start) + static_cast<double>(w) / 2.0) *
            sample_spacing_s;
        for (int g = 0; g < n_groups; ++g) {
            std::complex<double> mean(0.0, 0.0);
            if (subtract_mean) {
                for (std::size_t i = 0; i < w; ++i) {
                    mean += series[start + i].at(0, g);
                }
                mean /= static_cast<double>(w);
            }
            for (std::size_t i = 0; i < w; ++i) {
                windowed[i] = taper[i] * (series[start + i].at(0, g) - mean);
            }
            for (std::size_t f = 0; f < spec.doppler_axis_hz.size(); ++f) {
                const double f_norm =
                    spec.doppler_axis_hz[f] * sample_spacing_s;
                const auto z = dsp::dtft_point(windowed.data(), w, f_norm);
                spec.at(static_cast<int>(b), static_cast<int>(f)) +=
                    std::norm(z) / static_cast<double>(n_groups);
            }
        }
    }
    spec.validate();
    return spec;
}

std::vector<std::pair<double, double>> doppler_envelope(
    const DopplerSpectrogram& spec, double exclude_hz, double normalizer) {
    spec.validate();
    if (!(exclude_hz >= 0.0)) {
        throw ValidationError("exclude_hz must be non-negative");
    }
    const double max_axis =
        std::max(std::abs(spec.doppler_axis_hz.front()),
                 std::abs(spec.doppler_axis_hz.back()));
    if (exclude_hz >= max_axis) {
        throw ValidationError("exclude_hz covers the whole Doppler axis");
    }

    std::vector<double> sums(static_cast<std::size_t>(spec.n_batches()), 0.0);
    for (int b = 0; b < spec.n_batches(); ++b) {
        double s = 0.0;
        for (int f = 0; f < spec.n_doppler(); ++f) {
            if (std::abs(spec.doppler_axis_hz[static_cast<std::size_t>(f)]) >
                exclude_hz) {
                s += spec.at(b, f);
            }
        }
        sums[static_cast<std::size_t>(b)] = s;
    }

    double denom = normalizer;
    if (denom <= 0.0) {
        denom = *std::max_element(sums.begin(), sums.end());
    }
    std::vector<std::pair<double, double>> out;
    out.reserve(sums.size());
    for (int b = 0; b < spec.n_batches(); ++b) {
        const double v =
            denom > 0.0 ? std::min(1.0, sums[static_cast<std::size_t>(b)] / denom)
                        : 0.0;
        out.emplace_back(spec.batch_times_s[static_cast<std::size_t>(b)], v);
    }
    return out;
}

}  // namespace wifisense
