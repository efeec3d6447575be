#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wifisense/geometry.hpp"
#include "wifisense/waveform.hpp"

namespace wifisense {

// Six gesture classes, ordered; the integer value is the class index used
// by classifiers and transition models.
enum class GestureLabel : int {
    g1_pick_up = 0,
    g2_sit_down = 1,
    g3_stand_up = 2,
    g4_fall = 3,
    g5_stand_after_fall = 4,
    g6_out_of_bed = 5,
};

inline constexpr int kNumGestures = 6;

std::string to_string(GestureLabel label);
GestureLabel gesture_from_string(const std::string& name);

struct Keyframe {
    double t_s = 0.0;
    Vec3 pos;
};

// Point scatterer moving along piecewise-linear keyframes. Position
// queries outside the keyframe span throw RangeError.
struct ScattererTrack {
    std::vector<Keyframe> keyframes;  // strictly increasing t_s
    double reflectivity = 1.0;        // linear amplitude coefficient
    std::string label;                // "g1".."g6", "respiration", "static", ...

    Vec3 position(double t_s) const;
    double span_begin_s() const { return keyframes.front().t_s; }
    double span_end_s() const { return keyframes.back().t_s; }

    void validate() const;
};

// Extends a track so it covers [t_begin, t_end], holding the boundary
// positions before the first and after the last keyframe.
ScattererTrack pad_track(const ScattererTrack& track, double t_begin,
                         double t_end);

// Bistatic scene: one transmitter, one reference receiver on the direct
// path, one or more surveillance receivers watching reflections.
struct Scene {
    Vec3 tx_pos;
    Vec3 ref_rx_pos;
    std::vector<Vec3> surv_rx_pos;
    std::vector<ScattererTrack> scatterers;
    double wall_attenuation_db = 0.0;  // loss on surveillance reflections
    double direct_leakage_db = 30.0;   // loss of direct path into surveillance
    double noise_power = 0.0;          // complex noise variance per channel
    std::uint64_t noise_seed = 0;

    void validate() const;
};

// |tx - p(t)| + |p(t) - surv_rx|.
double bistatic_range(const Scene& scene, int scatterer_index, int surv_index,
                      double t_s);

// -1/wavelength * d(bistatic_range)/dt by central finite difference;
// t_s must be interior to the scatterer's keyframe span.
double instantaneous_doppler(const Scene& scene, int scatterer_index,
                             int surv_index, double t_s, double wavelength_m);

struct SceneOutput {
    IqTrace ref;
    std::vector<IqTrace> surv;
};

// Propagates tx_signal through the scene: direct path into the reference
// channel; per surveillance channel, the sum over scatterers of the
// delayed, attenuated, carrier-phase-rotated signal plus direct leakage.
// Seeded complex white Gaussian noise is added to every channel.
SceneOutput apply_scene(const IqTrace& tx_signal, const Scene& scene);

// Keyframed track following the velocity template of the given gesture,
// starting at rest at `anchor` and moving along +x. Durations and speeds
// carry seeded +-15% jitter for intra-class variation.
ScattererTrack gesture_track(GestureLabel label, double start_s,
                             const Vec3& anchor, std::uint64_t rng_seed);

// Chest-wall motion: sinusoidal displacement of the given amplitude about
// `anchor`, along the unit vector from tx_pos to anchor, sampled densely
// enough that linear interpolation error is negligible.
ScattererTrack respiration_track(double rate_hz, double amplitude_m,
                                 const Vec3& anchor, double span_s,
                                 const Vec3& tx_pos);

}  // namespace wifisense
