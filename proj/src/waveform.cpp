#include "wifisense/waveform.hpp"

#include <cmath>
#include <numbers>

#include "wifisense/dsp.hpp"
#include "wifisense/errors.hpp"
#include "wifisense/rng.hpp"

namespace wifisense {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865476;

// QPSK point from two random bits.
std::complex<double> qpsk_point(std::uint64_t bits) {
    const double re = (bits & 1u) ? -kInvSqrt2 : kInvSqrt2;
    const double im = (bits & 2u) ? -kInvSqrt2 : kInvSqrt2;
    return {re, im};
}

// One OFDM symbol (CP + core) from frequency-domain values on the active
// subcarriers. No power normalization here; callers normalize per burst.
std::vector<std::complex<double>> ofdm_symbol(
    const WaveformConfig& config, const std::vector<int>& subcarriers,
    const std::vector<std::complex<double>>& values) {
    const int n_fft = config.fft_size();
    std::vector<std::complex<double>> freq(static_cast<std::size_t>(n_fft));
    for (std::size_t i = 0; i < subcarriers.size(); ++i) {
        const int k = subcarriers[i];
        const int bin = k >= 0 ? k : k + n_fft;
        freq[static_cast<std::size_t>(bin)] = values[i];
    }
    dsp::fft_inplace(freq, true);
    // Undo the 1/n of the inverse transform so sample power is O(1).
    const double scale = static_cast<double>(n_fft);
    const int cp = config.cp_len();
    std::vector<std::complex<double>> out(
        static_cast<std::size_t>(n_fft + cp));
    for (int i = 0; i < cp; ++i) {
        out[static_cast<std::size_t>(i)] =
            freq[static_cast<std::size_t>(n_fft - cp + i)] * scale;
    }
    for (int i = 0; i < n_fft; ++i) {
        out[static_cast<std::size_t>(cp + i)] =
            freq[static_cast<std::size_t>(i)] * scale;
    }
    return out;
}

// Fixed BPSK preamble on all active subcarriers, derived from an internal
// constant seed so receivers can treat it as known.
std::vector<std::complex<double>> preamble_values(std::size_t n_active) {
    Rng rng(0x5eedbea7ULL);
    std::vector<std::complex<double>> v(n_active);
    for (auto& s : v) s = (rng.next_u64() & 1u) ? -1.0 : 1.0;
    return v;
}

void normalize_unit_power(std::vector<std::complex<double>>& x) {
    double p = 0.0;
    for (const auto& s : x) p += std::norm(s);
    p /= static_cast<double>(x.size());
    const double g = 1.0 / std::sqrt(p);
    for (auto& s : x) s *= g;
}

std::vector<std::complex<float>> to_float(
    const std::vector<std::complex<double>>& x) {
    std::vector<std::complex<float>> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::complex<float>(static_cast<float>(x[i].real()),
                                     static_cast<float>(x[i].imag()));
    }
    return out;
}

}  // namespace

int WaveformConfig::oversample() const {
    const double ratio = sample_rate_hz / bandwidth_hz;
    const int os = static_cast<int>(std::lround(ratio));
    return os;
}

void WaveformConfig::validate() const {
    if (!(carrier_hz > 0.0)) throw ValidationError("carrier_hz must be positive");
    if (!(bandwidth_hz > 0.0)) throw ValidationError("bandwidth_hz must be positive");
    if (sample_rate_hz < bandwidth_hz) {
        throw ValidationError("sample_rate_hz must be >= bandwidth_hz");
    }
    const double ratio = sample_rate_hz / bandwidth_hz;
    if (std::abs(ratio - std::lround(ratio)) > 1e-9) {
        throw ValidationError("sample_rate_hz must be an integer multiple of bandwidth_hz");
    }
    if (n_subcarriers < 4) throw ValidationError("n_subcarriers must be >= 4");
    if (n_active < 2 || n_active % 2 != 0 || n_active > n_subcarriers - 2) {
        throw ValidationError("n_active must be even and <= n_subcarriers - 2");
    }
    if (!(beacon_interval_s > burst_duration_s)) {
        throw ValidationError("beacon_interval_s must exceed burst_duration_s");
    }
    if (!(burst_duration_s > 0.0)) {
        throw ValidationError("burst_duration_s must be positive");
    }
    const double recon = wavelength_m() * carrier_hz;
    if (std::abs(recon - kSpeedOfLight) > kSpeedOfLight * 1e-9) {
        throw ValidationError("wavelength/carrier inconsistency");
    }
}

void IqTrace::validate() const {
    if (samples.empty()) throw ValidationError("IqTrace must contain samples");
    if (!(sample_rate_hz > 0.0)) throw ValidationError("sample_rate_hz must be positive");
}

void CsiMatrix::validate() const {
    if (n_antennas <= 0 || n_groups <= 0) throw ValidationError("empty CsiMatrix");
    if (h.size() != static_cast<std::size_t>(n_antennas) * n_groups) {
        throw ShapeError("CsiMatrix storage does not match dimensions");
    }
    for (const auto& v : h) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw ValidationError("CsiMatrix entries must be finite");
        }
    }
}

std::vector<int> active_subcarriers(const WaveformConfig& config) {
    const int half = config.n_active / 2;
    std::vector<int> idx;
    idx.reserve(static_cast<std::size_t>(config.n_active));
    for (int k = -half; k <= half; ++k) {
        if (k != 0) idx.push_back(k);
    }
    return idx;
}

std::vector<int> pilot_subcarriers(const WaveformConfig& config) {
    const int half = config.n_active / 2;
    std::vector<int> pilots;
    for (int k : {-21, -7, 7, 21}) {
        if (std::abs(k) <= half) pilots.push_back(k);
    }
    if (pilots.empty()) {
        // Narrow configs: fall back to the band edges.
        pilots = {-half, half};
    }
    return pilots;
}

std::vector<std::vector<int>> subcarrier_groups(const WaveformConfig& config,
                                                int n_groups) {
    if (n_groups < 1 || n_groups > config.n_active) {
        throw ValidationError("n_groups must be in [1, n_active]");
    }
    const auto active = active_subcarriers(config);
    const int n = static_cast<int>(active.size());
    std::vector<std::vector<int>> groups(static_cast<std::size_t>(n_groups));
    for (int g = 0; g < n_groups; ++g) {
        const int begin = g * n / n_groups;
        const int end = (g + 1) * n / n_groups;
        for (int i = begin; i < end; ++i) {
            groups[static_cast<std::size_t>(g)].push_back(active[static_cast<std::size_t>(i)]);
        }
    }
    return groups;
}

IqTrace gen_ofdm_burst(const WaveformConfig& config, std::uint64_t seed) {
    config.validate();
    const double sym_dur = config.symbol_duration_s();
    if (config.burst_duration_s < sym_dur * (1.0 - 1e-9)) {
        throw ValidationError("burst_duration_s shorter than one OFDM symbol");
    }
    const int n_symbols =
        static_cast<int>(std::floor(config.burst_duration_s / sym_dur + 1e-9));

    const auto active = active_subcarriers(config);
    const auto pilots = pilot_subcarriers(config);
    // Fixed pilot polarity, 802.11a-style mostly-positive pattern.
    auto is_pilot = [&](int k) {
        for (int p : pilots)
            if (p == k) return true;
        return false;
    };

    Rng rng(seed);
    std::vector<std::complex<double>> burst;
    burst.reserve(static_cast<std::size_t>(n_symbols) * config.symbol_samples());
    std::vector<std::complex<double>> values(active.size());
    for (int s = 0; s < n_symbols; ++s) {
        for (std::size_t i = 0; i < active.size(); ++i) {
            const int k = active[i];
            if (is_pilot(k)) {
                values[i] = (k == pilots.back()) ? -1.0 : 1.0;
            } else {
                values[i] = qpsk_point(rng.next_u64());
            }
        }
        auto sym = ofdm_symbol(config, active, values);
        burst.insert(burst.end(), sym.begin(), sym.end());
    }
    normalize_unit_power(burst);

    IqTrace out;
    out.samples = to_float(burst);
    out.sample_rate_hz = config.sample_rate_hz;
    out.carrier_hz = config.carrier_hz;
    out.t0_s = 0.0;
    return out;
}

IqTrace gen_beacon_train(const WaveformConfig& config, double duration_s,
                         std::uint64_t seed) {
    config.validate();
    if (!(duration_s > 0.0)) throw ValidationError("duration_s must be positive");

    // Beacon burst = known preamble symbol + one seeded data symbol.
    const auto active = active_subcarriers(config);
    const auto pre_vals = preamble_values(active.size());
    auto burst = ofdm_symbol(config, active, pre_vals);
    {
        const auto pilots = pilot_subcarriers(config);
        auto is_pilot = [&](int k) {
            for (int p : pilots)
                if (p == k) return true;
            return false;
        };
        Rng rng(seed);
        std::vector<std::complex<double>> values(active.size());
        for (std::size_t i = 0; i < active.size(); ++i) {
            const int k = active[i];
            if (is_pilot(k)) {
                values[i] = (k == pilots.back()) ? -1.0 : 1.0;
            } else {
                values[i] = qpsk_point(rng.next_u64());
            }
        }
        auto data_sym = ofdm_symbol(config, active, values);
        burst.insert(burst.end(), data_sym.begin(), data_sym.end());
    }
    normalize_unit_power(burst);
    const double burst_dur =
        static_cast<double>(burst.size()) / config.sample_rate_hz;
    if (burst_dur > config.beacon_interval_s) {
        throw ValidationError("beacon burst longer than beacon_interval_s");
    }

    const auto n_total = static_cast<std::size_t>(
        std::llround(duration_s * config.sample_rate_hz));
    if (n_total == 0) throw ValidationError("duration_s too short for one sample");

    IqTrace out;
    out.samples.assign(n_total, std::complex<float>(0.0f, 0.0f));
    out.sample_rate_hz = config.sample_rate_hz;
    out.carrier_hz = config.carrier_hz;
    out.t0_s = 0.0;

    const auto interval_samples = static_cast<std::size_t>(
        std::llround(config.beacon_interval_s * config.sample_rate_hz));
    for (std::size_t start = 0; start < n_total; start += interval_samples) {
        const std::size_t n_copy = std::min(burst.size(), n_total - start);
        for (std::size_t i = 0; i < n_copy; ++i) {
            out.samples[start + i] =
                std::complex<float>(static_cast<float>(burst[i].real()),
                                    static_cast<float>(burst[i].imag()));
        }
        if (interval_samples == 0) break;
    }
    return out;
}

CsiMatrix estimate_csi(const std::vector<IqTrace>& received_per_antenna,
                       const WaveformConfig& config, const IqTrace& tx_symbol,
                       int n_groups) {
    config.validate();
    if (received_per_antenna.empty()) {
        throw ShapeError("estimate_csi requires at least one antenna trace");
    }
    const auto sym_len = static_cast<std::size_t>(config.symbol_samples());
    if (tx_symbol.samples.size() != sym_len) {
        throw ShapeError("tx_symbol must span exactly one OFDM symbol");
    }
    for (const auto& rx : received_per_antenna) {
        if (rx.samples.size() != sym_len) {
            throw ShapeError("received trace must span exactly one OFDM symbol");
        }
    }

    const int n_fft = config.fft_size();
    const int cp = config.cp_len();
    auto spectrum = [&](const IqTrace& t) {
        std::vector<std::complex<double>> core(static_cast<std::size_t>(n_fft));
        for (int i = 0; i < n_fft; ++i) {
            const auto& s = t.samples[static_cast<std::size_t>(cp + i)];
            core[static_cast<std::size_t>(i)] = {s.real(), s.imag()};
        }
        dsp::fft_inplace(core, false);
        return core;
    };

    const auto tx_spec = spectrum(tx_symbol);
    const auto groups = subcarrier_groups(config, n_groups);
    const double df = config.subcarrier_spacing_hz();

    CsiMatrix csi;
    csi.n_antennas = static_cast<int>(received_per_antenna.size());
    csi.n_groups = n_groups;
    csi.h.resize(static_cast<std::size_t>(csi.n_antennas) * n_groups);
    csi.group_freq_hz.resize(static_cast<std::size_t>(n_groups));
    for (int g = 0; g < n_groups; ++g) {
        double f = 0.0;
        for (int k : groups[static_cast<std::size_t>(g)]) f += k * df;
        csi.group_freq_hz[static_cast<std::size_t>(g)] =
            f / static_cast<double>(groups[static_cast<std::size_t>(g)].size());
    }

    for (int a = 0; a < csi.n_antennas; ++a) {
        const auto rx_spec = spectrum(received_per_antenna[static_cast<std::size_t>(a)]);
        for (int g = 0; g < n_groups; ++g) {
            std::complex<double> acc(0.0, 0.0);
            for (int k : groups[static_cast<std::size_t>(g)]) {
                const int bin = k >= 0 ? k : k + n_fft;
                const auto tx_v = tx_spec[static_cast<std::size_t>(bin)];
                if (std::abs(tx_v) < 1e-12) {
                    throw NumericalError("zero transmitted subcarrier value");
                }
                acc += rx_spec[static_cast<std::size_t>(bin)] / tx_v;
            }
            csi.at(a, g) = acc / static_cast<double>(
                                     groups[static_cast<std::size_t>(g)].size());
        }
    }
    csi.validate();
    return csi;
}

CsiMatrix estimate_csi(const IqTrace& received, const WaveformConfig& config,
                       const IqTrace& tx_symbol, int n_groups) {
    return estimate_csi(std::vector<IqTrace>{received}, config, tx_symbol,
                        n_groups);
}

}  // namespace wifisense
