#pragma once

#include <utility>
#include <vector>

#include "wifisense/waveform.hpp"

namespace wifisense {

struct CafConfig {
    double batch_len_s = 0.5;
    double batch_hop_s = 0.25;
    double max_doppler_hz = 60.0;
    double doppler_step_hz = 0.0;  // 0 selects native resolution 1/batch_len_s
    int delay_bins = 1;            // 1 = zero-delay cut only

    double effective_step_hz() const {
        return doppler_step_hz > 0.0 ? doppler_step_hz : 1.0 / batch_len_s;
    }

    void validate() const;
};

// Time x Doppler magnitude grid, linear power, row-major over
// (batch, doppler bin).
struct DopplerSpectrogram {
    std::vector<double> magnitudes;
    std::vector<double> batch_times_s;   // batch centers
    std::vector<double> doppler_axis_hz; // symmetric about 0, ascending
    double resolution_hz = 0.0;          // 1 / batch length

    int n_batches() const { return static_cast<int>(batch_times_s.size()); }
    int n_doppler() const { return static_cast<int>(doppler_axis_hz.size()); }

    double& at(int batch, int bin) {
        return magnitudes[static_cast<std::size_t>(batch) * doppler_axis_hz.size() +
                          static_cast<std::size_t>(bin)];
    }
    const double& at(int batch, int bin) const {
        return magnitudes[static_cast<std::size_t>(batch) * doppler_axis_hz.size() +
                          static_cast<std::size_t>(bin)];
    }

    void validate() const;
};

// Cross-ambiguity spectrogram of a (reference, surveillance) pair:
// per batch and Doppler hypothesis f, |sum_t ref*(t) surv(t) e^{-j2pi f t}|^2
// over the batch window. delay_bins > 1 takes the maximum over
// sample-shifted surveillance copies.
DopplerSpectrogram caf_batch(const IqTrace& ref, const IqTrace& surv,
                             const CafConfig& config);

// STFT baseline over a uniformly sampled CSI time series: windowed DFT of
// each subcarrier group's series for antenna 0, power averaged over groups.
// Keeps the stationary (DC) component unless subtract_mean is set.
DopplerSpectrogram stft_csi(const std::vector<CsiMatrix>& series,
                            double sample_spacing_s, double window_s,
                            double hop_s, bool hann = false,
                            bool subtract_mean = false);

// Per-batch activity intensity: total magnitude outside +-exclude_hz,
// divided by `normalizer` and clamped to [0, 1]. normalizer <= 0 selects
// the trace maximum (ad-hoc mode).
std::vector<std::pair<double, double>> doppler_envelope(
    const DopplerSpectrogram& spec, double exclude_hz, double normalizer = 0.0);

}  // namespace wifisense
