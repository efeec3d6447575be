#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace wifisense {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// 802.11-style OFDM numerology. Carrier frequency is metadata only; the
// simulation is baseband, with the carrier driving wavelength/Doppler math.
struct WaveformConfig {
    double carrier_hz = 2.4e9;
    double bandwidth_hz = 20e6;
    int n_subcarriers = 64;      // FFT size at critical sampling
    int n_active = 52;           // symmetric around DC, DC unused
    double sample_rate_hz = 20e6;
    double beacon_interval_s = 0.1;
    double burst_duration_s = 4e-6;

    double wavelength_m() const { return kSpeedOfLight / carrier_hz; }

    // Integer oversampling factor relative to the OFDM bandwidth.
    int oversample() const;
    int fft_size() const { return n_subcarriers * oversample(); }
    int cp_len() const { return fft_size() / 4; }
    int symbol_samples() const { return fft_size() + cp_len(); }
    double symbol_duration_s() const {
        return static_cast<double>(symbol_samples()) / sample_rate_hz;
    }
    double subcarrier_spacing_hz() const {
        return bandwidth_hz / n_subcarriers;
    }

    // Throws ValidationError when any invariant is violated.
    void validate() const;
};

// Complex baseband sample stream.
struct IqTrace {
    std::vector<std::complex<float>> samples;
    double sample_rate_hz = 0.0;
    double carrier_hz = 0.0;
    double t0_s = 0.0;

    double duration_s() const {
        return static_cast<double>(samples.size()) / sample_rate_hz;
    }
    std::size_t size() const { return samples.size(); }

    void validate() const;
};

// Per-antenna, per-subcarrier-group channel estimate. Entries are complex
// h[i][j] = |h| * exp(j*phi), row-major over (antenna, group).
struct CsiMatrix {
    int n_antennas = 0;
    int n_groups = 0;
    std::vector<std::complex<double>> h;
    // Group center frequency offsets from the carrier, in Hz.
    std::vector<double> group_freq_hz;

    std::complex<double>& at(int antenna, int group) {
        return h[static_cast<std::size_t>(antenna) * n_groups + group];
    }
    const std::complex<double>& at(int antenna, int group) const {
        return h[static_cast<std::size_t>(antenna) * n_groups + group];
    }

    void validate() const;
};

// Signed active subcarrier indices (ascending, DC excluded).
std::vector<int> active_subcarriers(const WaveformConfig& config);

// Subset of active subcarriers carrying fixed pilot values.
std::vector<int> pilot_subcarriers(const WaveformConfig& config);

// Partition of the active subcarriers into n_groups contiguous groups,
// ordered by frequency; sizes differ by at most one.
std::vector<std::vector<int>> subcarrier_groups(const WaveformConfig& config,
                                                int n_groups);

// Burst of OFDM data symbols: fixed pilots, seeded QPSK data subcarriers,
// cyclic prefix of a quarter symbol, mean power normalized to 1.
IqTrace gen_ofdm_burst(const WaveformConfig& config, std::uint64_t seed);

// Beacon-mode transmission: one preamble symbol plus one data symbol per
// burst, repeated every beacon_interval_s, exact zeros in between.
IqTrace gen_beacon_train(const WaveformConfig& config, double duration_s,
                         std::uint64_t seed);

// Least-squares CSI from one received OFDM symbol per antenna against the
// known transmitted symbol, grouped by averaging adjacent active
// subcarriers.
CsiMatrix estimate_csi(const std::vector<IqTrace>& received_per_antenna,
                       const WaveformConfig& config, const IqTrace& tx_symbol,
                       int n_groups = 30);

// Single-antenna convenience overload (1 x n_groups result).
CsiMatrix estimate_csi(const IqTrace& received, const WaveformConfig& config,
                       const IqTrace& tx_symbol, int n_groups = 30);

}  // namespace wifisense
