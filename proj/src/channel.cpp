#include "wifisense/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wifisense/errors.hpp"
#include "wifisense/rng.hpp"

namespace wifisense {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double db_loss_to_amplitude(double loss_db) {
    return std::pow(10.0, -loss_db / 20.0);
}

// Adds one propagation path to `out`: nearest-sample delay plus continuous
// carrier-phase rotation. `range_m` is evaluated at each output sample time.
template <typename RangeFn>
void add_path(std::vector<std::complex<double>>& out, const IqTrace& tx,
              double amplitude, double wavelength_m, RangeFn range_m) {
    const double fs = tx.sample_rate_hz;
    const std::size_t n = tx.samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double t = tx.t0_s + static_cast<double>(i) / fs;
        const double r = range_m(t);
        const auto delay = static_cast<std::size_t>(
            std::llround(r / kSpeedOfLight * fs));
        if (i + delay >= n) continue;
        const double phase = -kTwoPi * r / wavelength_m;
        out[i + delay] += amplitude * std::polar(1.0, phase) *
                          std::complex<double>(tx.samples[i]);
    }
}

}  // namespace

std::string to_string(GestureLabel label) {
    switch (label) {
        case GestureLabel::g1_pick_up: return "g1";
        case GestureLabel::g2_sit_down: return "g2";
        case GestureLabel::g3_stand_up: return "g3";
        case GestureLabel::g4_fall: return "g4";
        case GestureLabel::g5_stand_after_fall: return "g5";
        case GestureLabel::g6_out_of_bed: return "g6";
    }
    throw ValidationError("unknown gesture label");
}

GestureLabel gesture_from_string(const std::string& name) {
    for (int i = 0; i < kNumGestures; ++i) {
        if (name == to_string(static_cast<GestureLabel>(i))) {
            return static_cast<GestureLabel>(i);
        }
    }
    throw ValidationError("unknown gesture label: " + name);
}

void ScattererTrack::validate() const {
    if (keyframes.empty()) throw ValidationError("track needs keyframes");
    for (std::size_t i = 0; i < keyframes.size(); ++i) {
        if (!keyframes[i].pos.finite() || !std::isfinite(keyframes[i].t_s)) {
            throw ValidationError("non-finite keyframe");
        }
        if (i > 0 && keyframes[i].t_s <= keyframes[i - 1].t_s) {
            throw ValidationError("keyframe times must be strictly increasing");
        }
    }
    if (!std::isfinite(reflectivity)) {
        throw ValidationError("non-finite reflectivity");
    }
}

Vec3 ScattererTrack::position(double t_s) const {
    if (keyframes.empty()) throw ValidationError("track needs keyframes");
    if (t_s < span_begin_s() || t_s > span_end_s()) {
        throw RangeError("time outside scatterer keyframe span");
    }
    const auto it = std::upper_bound(
        keyframes.begin(), keyframes.end(), t_s,
        [](double t, const Keyframe& k) { return t < k.t_s; });
    if (it == keyframes.begin()) return keyframes.front().pos;
    if (it == keyframes.end()) return keyframes.back().pos;
    const Keyframe& b = *it;
    const Keyframe& a = *(it - 1);
    const double w = (t_s - a.t_s) / (b.t_s - a.t_s);
    return a.pos + (b.pos - a.pos) * w;
}

ScattererTrack pad_track(const ScattererTrack& track, double t_begin,
                         double t_end) {
    track.validate();
    if (t_begin > t_end) throw ValidationError("pad interval reversed");
    ScattererTrack out = track;
    if (t_begin < out.span_begin_s()) {
        out.keyframes.insert(out.keyframes.begin(),
                             Keyframe{t_begin, out.keyframes.front().pos});
    }
    if (t_end > out.span_end_s()) {
        out.keyframes.push_back(Keyframe{t_end, out.keyframes.back().pos});
    }
    return out;
}

void Scene::validate() const {
    if (!tx_pos.finite() || !ref_rx_pos.finite()) {
        throw ValidationError("non-finite scene geometry");
    }
    if (surv_rx_pos.empty()) {
        throw ValidationError("scene needs at least one surveillance receiver");
    }
    for (const auto& p : surv_rx_pos) {
        if (!p.finite()) throw ValidationError("non-finite receiver position");
    }
    if (wall_attenuation_db < 0.0 || direct_leakage_db < 0.0) {
        throw ValidationError("attenuations must be non-negative dB losses");
    }
    if (!(noise_power >= 0.0)) {
        throw ValidationError("noise_power must be non-negative");
    }
    for (const auto& s : scatterers) s.validate();
}

double bistatic_range(const Scene& scene, int scatterer_index, int surv_index,
                      double t_s) {
    if (scatterer_index < 0 ||
        scatterer_index >= static_cast<int>(scene.scatterers.size())) {
        throw ValidationError("scatterer index out of range");
    }
    if (surv_index < 0 ||
        surv_index >= static_cast<int>(scene.surv_rx_pos.size())) {
        throw ValidationError("surveillance index out of range");
    }
    const Vec3 p =
        scene.scatterers[static_cast<std::size_t>(scatterer_index)].position(t_s);
    return distance(scene.tx_pos, p) +
           distance(p, scene.surv_rx_pos[static_cast<std::size_t>(surv_index)]);
}

double instantaneous_doppler(const Scene& scene, int scatterer_index,
                             int surv_index, double t_s, double wavelength_m) {
    if (!(wavelength_m > 0.0)) {
        throw ValidationError("wavelength must be positive");
    }
    if (scatterer_index < 0 ||
        scatterer_index >= static_cast<int>(scene.scatterers.size())) {
        throw ValidationError("scatterer index out of range");
    }
    const auto& track =
        scene.scatterers[static_cast<std::size_t>(scatterer_index)];
    const double lo = track.span_begin_s();
    const double hi = track.span_end_s();
    const double dt =
        std::min({1e-4, (t_s - lo) / 2.0, (hi - t_s) / 2.0});
    if (!(dt > 0.0)) {
        throw RangeError("time not interior to the keyframe span");
    }
    const double r_fwd = bistatic_range(scene, scatterer_index, surv_index, t_s + dt);
    const double r_bwd = bistatic_range(scene, scatterer_index, surv_index, t_s - dt);
    return -(r_fwd - r_bwd) / (2.0 * dt * wavelength_m);
}

SceneOutput apply_scene(const IqTrace& tx_signal, const Scene& scene) {
    tx_signal.validate();
    scene.validate();
    if (!(tx_signal.carrier_hz > 0.0)) {
        throw ValidationError("tx carrier frequency must be positive");
    }
    const double wavelength = kSpeedOfLight / tx_signal.carrier_hz;
    const std::size_t n = tx_signal.samples.size();
    const double fs = tx_signal.sample_rate_hz;
    const double t_last =
        tx_signal.t0_s + static_cast<double>(n - 1) / fs;
    for (const auto& s : scene.scatterers) {
        if (tx_signal.t0_s < s.span_begin_s() || t_last > s.span_end_s()) {
            throw RangeError("signal extends outside a scatterer keyframe span");
        }
    }

    auto make_trace = [&](const std::vector<std::complex<double>>& acc) {
        IqTrace t;
        t.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            t.samples[i] =
                std::complex<float>(static_cast<float>(acc[i].real()),
                                    static_cast<float>(acc[i].imag()));
        }
        t.sample_rate_hz = fs;
        t.carrier_hz = tx_signal.carrier_hz;
        t.t0_s = tx_signal.t0_s;
        return t;
    };
    auto add_noise = [&](std::vector<std::complex<double>>& acc,
                         std::uint64_t stream) {
        if (scene.noise_power <= 0.0) return;
        Rng rng(derive_seed(scene.noise_seed, stream));
        for (auto& v : acc) v += rng.complex_gaussian(scene.noise_power);
    };

    SceneOutput out;

    // Reference channel: unit-gain direct path.
    {
        std::vector<std::complex<double>> acc(n);
        const double r_direct = distance(scene.tx_pos, scene.ref_rx_pos);
        add_path(acc, tx_signal, 1.0, wavelength,
                 [&](double) { return r_direct; });
        add_noise(acc, 0);
        out.ref = make_trace(acc);
    }

    const double leak_amp = db_loss_to_amplitude(scene.direct_leakage_db);
    const double wall_amp = db_loss_to_amplitude(scene.wall_attenuation_db);
    for (std::size_t s = 0; s < scene.surv_rx_pos.size(); ++s) {
        std::vector<std::complex<double>> acc(n);
        const double r_leak = distance(scene.tx_pos, scene.surv_rx_pos[s]);
        add_path(acc, tx_signal, leak_amp, wavelength,
                 [&](double) { return r_leak; });
        for (const auto& scat : scene.scatterers) {
            add_path(acc, tx_signal, scat.reflectivity * wall_amp, wavelength,
                     [&](double t) {
                         const Vec3 p = scat.position(t);
                         return distance(scene.tx_pos, p) +
                                distance(p, scene.surv_rx_pos[s]);
                     });
        }
        add_noise(acc, 1 + s);
        out.surv.push_back(make_trace(acc));
    }
    return out;
}

ScattererTrack gesture_track(GestureLabel label, double start_s,
                             const Vec3& anchor, std::uint64_t rng_seed) {
    // Velocity templates along +x, (speed m/s, duration s) per segment.
    // Positive speed moves away from a transmitter/receiver pair placed on
    // the -x side, which lengthens the bistatic path and reads as negative
    // Doppler.
    std::vector<std::pair<double, double>> segments;
    switch (label) {
        case GestureLabel::g1_pick_up:
            segments = {{0.6, 1.2}, {0.0, 0.5}, {-0.6, 1.2}};
            break;
        case GestureLabel::g2_sit_down:
            segments = {{0.5, 1.5}};
            break;
        case GestureLabel::g3_stand_up:
            segments = {{-0.5, 1.5}};
            break;
        case GestureLabel::g4_fall:
            segments = {{1.25, 0.8}};
            break;
        case GestureLabel::g5_stand_after_fall:
            segments = {{-0.3, 2.5}};
            break;
        case GestureLabel::g6_out_of_bed:
            segments = {{0.35, 0.5}, {-0.35, 0.5}, {0.35, 0.5}, {-0.5, 1.5}};
            break;
    }

    Rng rng(rng_seed);
    ScattererTrack track;
    track.label = to_string(label);
    double t = start_s;
    Vec3 pos = anchor;
    track.keyframes.push_back({t, pos});
    for (const auto& [speed, duration] : segments) {
        const double v = speed * (1.0 + 0.15 * rng.uniform(-1.0, 1.0));
        const double d = duration * (1.0 + 0.15 * rng.uniform(-1.0, 1.0));
        t += d;
        pos = pos + Vec3{v * d, 0.0, 0.0};
        track.keyframes.push_back({t, pos});
    }
    track.validate();
    return track;
}

ScattererTrack respiration_track(double rate_hz, double amplitude_m,
                                 const Vec3& anchor, double span_s,
                                 const Vec3& tx_pos) {
    if (!(amplitude_m > 0.0) || amplitude_m > 0.05) {
        throw ValidationError("amplitude_m must be in (0, 0.05] m");
    }
    if (!(rate_hz > 0.05) || !(rate_hz < 1.0)) {
        throw ValidationError("rate_hz must be in (0.05, 1.0)");
    }
    if (!(span_s > 0.0)) throw ValidationError("span_s must be positive");
    const Vec3 dir = (anchor - tx_pos).normalized();
    if (dir.norm() == 0.0) {
        throw ValidationError("anchor must differ from tx position");
    }

    // Dense enough that piecewise-linear interpolation error is far below
    // the displacement amplitude.
    const double dt = std::min(0.05, 1.0 / (40.0 * rate_hz));
    const auto n = static_cast<std::size_t>(std::ceil(span_s / dt));

    ScattererTrack track;
    track.label = "respiration";
    track.keyframes.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = std::min(static_cast<double>(i) * dt, span_s);
        const double displacement =
            amplitude_m * std::sin(kTwoPi * rate_hz * t);
        track.keyframes.push_back({t, anchor + dir * displacement});
        if (t >= span_s) break;
    }
    track.validate();
    return track;
}

}  // namespace wifisense
