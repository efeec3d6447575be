#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>
#include <vector>

#include "wifisense/dsp.hpp"
#include "wifisense/errors.hpp"
#include "wifisense/rng.hpp"
#include "wifisense/waveform.hpp"

using namespace wifisense;

namespace {

WaveformConfig small_config() {
    WaveformConfig c;
    c.carrier_hz = 2.4e9;
    c.bandwidth_hz = 1e6;
    c.sample_rate_hz = 1e6;
    c.n_subcarriers = 64;
    c.n_active = 52;
    c.beacon_interval_s = 0.01;
    c.burst_duration_s = 160e-6;  // two symbols at critical sampling
    return c;
}

double mean_power(const IqTrace& t) {
    double p = 0.0;
    for (const auto& s : t.samples) p += std::norm(std::complex<double>(s));
    return p / static_cast<double>(t.samples.size());
}

}  // namespace

TEST_CASE("config validation rejects bad parameters") {
    WaveformConfig c = small_config();
    CHECK_NOTHROW(c.validate());

    WaveformConfig bad = c;
    bad.sample_rate_hz = 0.5e6;  // below bandwidth
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = c;
    bad.sample_rate_hz = 1.5e6;  // non-integer oversampling
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = c;
    bad.n_active = 51;  // odd
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = c;
    bad.n_active = 64;  // no room for DC + guards
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = c;
    bad.beacon_interval_s = 100e-6;  // shorter than the burst
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("active subcarriers are symmetric and skip DC") {
    const WaveformConfig c = small_config();
    const auto active = active_subcarriers(c);
    REQUIRE(active.size() == 52);
    CHECK(active.front() == -26);
    CHECK(active.back() == 26);
    CHECK(std::find(active.begin(), active.end(), 0) == active.end());
    CHECK(std::is_sorted(active.begin(), active.end()));
}

TEST_CASE("pilot subcarriers use the standard four tones") {
    const auto pilots = pilot_subcarriers(small_config());
    CHECK(pilots == std::vector<int>{-21, -7, 7, 21});
}

TEST_CASE("subcarrier grouping is a contiguous even partition") {
    const WaveformConfig c = small_config();
    const auto groups = subcarrier_groups(c, 30);
    REQUIRE(groups.size() == 30);

    std::vector<int> flattened;
    for (const auto& g : groups) {
        REQUIRE(!g.empty());
        CHECK(g.size() <= 2);
        CHECK(g.size() >= 1);
        flattened.insert(flattened.end(), g.begin(), g.end());
    }
    CHECK(flattened == active_subcarriers(c));
}

TEST_CASE("subcarrier grouping properties hold for random shapes") {
    Rng rng(0xA11CE5ULL);
    for (int trial = 0; trial < 50; ++trial) {
        WaveformConfig c = small_config();
        c.n_active = 2 * (1 + static_cast<int>(rng.uniform(0.0, 31.0)));
        const int n_groups = 1 + static_cast<int>(
            rng.uniform(0.0, static_cast<double>(c.n_active)));
        const auto groups = subcarrier_groups(c, n_groups);
        REQUIRE(static_cast<int>(groups.size()) == n_groups);

        std::size_t min_size = groups[0].size(), max_size = groups[0].size();
        std::vector<int> flattened;
        for (const auto& g : groups) {
            REQUIRE(!g.empty());
            min_size = std::min(min_size, g.size());
            max_size = std::max(max_size, g.size());
            flattened.insert(flattened.end(), g.begin(), g.end());
        }
        CHECK(max_size - min_size <= 1);
        CHECK(flattened == active_subcarriers(c));
    }
}

TEST_CASE("burst length equals a whole number of OFDM symbols") {
    WaveformConfig c = small_config();
    c.burst_duration_s = 10 * c.symbol_duration_s();
    const auto burst = gen_ofdm_burst(c, 7);
    CHECK(burst.samples.size() ==
          static_cast<std::size_t>(10 * c.symbol_samples()));
    CHECK(burst.sample_rate_hz == c.sample_rate_hz);
    CHECK(burst.carrier_hz == c.carrier_hz);
}

TEST_CASE("burst generation is deterministic in the seed") {
    const WaveformConfig c = small_config();
    const auto a = gen_ofdm_burst(c, 42);
    const auto b = gen_ofdm_burst(c, 42);
    REQUIRE(a.samples.size() == b.samples.size());
    CHECK(std::memcmp(a.samples.data(), b.samples.data(),
                      a.samples.size() * sizeof(a.samples[0])) == 0);

    const auto other = gen_ofdm_burst(c, 43);
    CHECK(std::memcmp(a.samples.data(), other.samples.data(),
                      a.samples.size() * sizeof(a.samples[0])) != 0);
}

TEST_CASE("burst mean power is normalized to one") {
    const WaveformConfig c = small_config();
    for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
        const auto burst = gen_ofdm_burst(c, seed);
        CHECK(mean_power(burst) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("cyclic prefix replicates the symbol tail") {
    WaveformConfig c = small_config();
    c.burst_duration_s = c.symbol_duration_s();
    const auto burst = gen_ofdm_burst(c, 11);
    const int cp = c.cp_len();
    const int n = c.fft_size();
    REQUIRE(burst.samples.size() == static_cast<std::size_t>(cp + n));
    for (int i = 0; i < cp; ++i) {
        CHECK(burst.samples[static_cast<std::size_t>(i)] ==
              burst.samples[static_cast<std::size_t>(n + i)]);
    }
}

TEST_CASE("beacon train places bursts on the interval grid") {
    const WaveformConfig c = small_config();
    const auto train = gen_beacon_train(c, 0.1, 5);
    REQUIRE(train.samples.size() == 100000);

    const auto interval = static_cast<std::size_t>(
        std::llround(c.beacon_interval_s * c.sample_rate_hz));
    const auto burst_len = static_cast<std::size_t>(2 * c.symbol_samples());

    int n_bursts = 0;
    for (std::size_t start = 0; start < train.samples.size();
         start += interval) {
        double energy = 0.0;
        for (std::size_t i = 0; i < burst_len; ++i) {
            energy += std::norm(std::complex<double>(train.samples[start + i]));
        }
        CHECK(energy / static_cast<double>(burst_len) ==
              doctest::Approx(1.0).epsilon(1e-6));
        ++n_bursts;
        for (std::size_t i = start + burst_len;
             i < std::min(start + interval, train.samples.size()); ++i) {
            REQUIRE(train.samples[i] == std::complex<float>(0.0f, 0.0f));
        }
    }
    CHECK(n_bursts == 10);
}

TEST_CASE("short capture yields a single beacon burst") {
    const WaveformConfig c = small_config();
    const auto train = gen_beacon_train(c, 0.005, 5);
    REQUIRE(train.samples.size() == 5000);
    const auto burst_len = static_cast<std::size_t>(2 * c.symbol_samples());
    for (std::size_t i = burst_len; i < train.samples.size(); ++i) {
        REQUIRE(train.samples[i] == std::complex<float>(0.0f, 0.0f));
    }
}

TEST_CASE("beacon train is deterministic in the seed") {
    const WaveformConfig c = small_config();
    const auto a = gen_beacon_train(c, 0.02, 17);
    const auto b = gen_beacon_train(c, 0.02, 17);
    REQUIRE(a.samples.size() == b.samples.size());
    CHECK(std::memcmp(a.samples.data(), b.samples.data(),
                      a.samples.size() * sizeof(a.samples[0])) == 0);
}

TEST_CASE("identity channel gives unit CSI") {
    WaveformConfig c = small_config();
    c.burst_duration_s = c.symbol_duration_s();
    const auto tx = gen_ofdm_burst(c, 3);
    const auto csi = estimate_csi(tx, c, tx, 30);
    REQUIRE(csi.n_antennas == 1);
    REQUIRE(csi.n_groups == 30);
    for (int g = 0; g < 30; ++g) {
        CHECK(std::abs(csi.at(0, g) - std::complex<double>(1.0, 0.0)) < 1e-6);
    }
}

TEST_CASE("complex channel gain is recovered per group") {
    WaveformConfig c = small_config();
    c.burst_duration_s = c.symbol_duration_s();
    const auto tx = gen_ofdm_burst(c, 3);
    const std::complex<double> gain(0.5, -0.25);

    IqTrace rx = tx;
    for (auto& s : rx.samples) {
        const auto v = gain * std::complex<double>(s);
        s = {static_cast<float>(v.real()), static_cast<float>(v.imag())};
    }
    const auto csi = estimate_csi(rx, c, tx, 30);
    for (int g = 0; g < 30; ++g) {
        CHECK(std::abs(csi.at(0, g) - gain) < 1e-6);
    }
}

TEST_CASE("multi-antenna CSI keeps per-antenna rows") {
    WaveformConfig c = small_config();
    c.burst_duration_s = c.symbol_duration_s();
    const auto tx = gen_ofdm_burst(c, 3);
    IqTrace rx2 = tx;
    for (auto& s : rx2.samples) s *= 2.0f;

    const auto csi = estimate_csi(std::vector<IqTrace>{tx, rx2}, c, tx, 10);
    REQUIRE(csi.n_antennas == 2);
    REQUIRE(csi.n_groups == 10);
    for (int g = 0; g < 10; ++g) {
        CHECK(std::abs(csi.at(0, g) - 1.0) < 1e-6);
        CHECK(std::abs(csi.at(1, g) - 2.0) < 1e-6);
    }
}

TEST_CASE("integer sample delay produces the expected phase slope") {
    WaveformConfig c = small_config();
    c.burst_duration_s = c.symbol_duration_s();
    const auto tx = gen_ofdm_burst(c, 21);
    const int delay = 3;  // stays within the cyclic prefix

    IqTrace rx = tx;
    rx.samples.assign(tx.samples.size(), {0.0f, 0.0f});
    for (std::size_t i = delay; i < tx.samples.size(); ++i) {
        rx.samples[i] = tx.samples[i - static_cast<std::size_t>(delay)];
    }

    const auto csi = estimate_csi(rx, c, tx, 30);
    std::vector<double> phase(30);
    for (int g = 0; g < 30; ++g) phase[static_cast<std::size_t>(g)] = std::arg(csi.at(0, g));
    dsp::unwrap_inplace(phase);

    // Least-squares slope of phase against group frequency offset.
    double sf = 0.0, sp = 0.0, sff = 0.0, sfp = 0.0;
    for (int g = 0; g < 30; ++g) {
        const double f = csi.group_freq_hz[static_cast<std::size_t>(g)];
        const double p = phase[static_cast<std::size_t>(g)];
        sf += f;
        sp += p;
        sff += f * f;
        sfp += f * p;
    }
    const double n = 30.0;
    const double slope = (n * sfp - sf * sp) / (n * sff - sf * sf);
    const double expected = -2.0 * std::numbers::pi *
                            static_cast<double>(delay) / c.sample_rate_hz;
    CHECK(slope == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("csi estimation validates input shapes") {
    WaveformConfig c = small_config();
    c.burst_duration_s = c.symbol_duration_s();
    const auto tx = gen_ofdm_burst(c, 1);

    IqTrace wrong = tx;
    wrong.samples.resize(tx.samples.size() - 1);
    CHECK_THROWS_AS(estimate_csi(wrong, c, tx, 30), ShapeError);
    CHECK_THROWS_AS(estimate_csi(tx, c, wrong, 30), ShapeError);
    CHECK_THROWS_AS(estimate_csi(std::vector<IqTrace>{}, c, tx, 30),
                    ShapeError);
}

TEST_CASE("oversampled config keeps numerology consistent") {
    WaveformConfig c = small_config();
    c.sample_rate_hz = 2e6;  // 2x oversampling
    CHECK(c.oversample() == 2);
    CHECK(c.fft_size() == 128);
    CHECK(c.cp_len() == 32);
    CHECK(c.symbol_duration_s() == doctest::Approx(80e-6));

    c.burst_duration_s = c.symbol_duration_s();
    const auto tx = gen_ofdm_burst(c, 9);
    CHECK(tx.samples.size() == 160);
    CHECK(mean_power(tx) == doctest::Approx(1.0).epsilon(1e-6));

    const auto csi = estimate_csi(tx, c, tx, 30);
    for (int g = 0; g < 30; ++g) {
        CHECK(std::abs(csi.at(0, g) - 1.0) < 1e-6);
    }
}
