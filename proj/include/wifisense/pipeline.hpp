#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "wifisense/channel.hpp"
#include "wifisense/doppler.hpp"
#include "wifisense/io.hpp"
#include "wifisense/recognition.hpp"
#include "wifisense/respiration.hpp"

namespace wifisense::pipeline {

// End-to-end studies on synthetic scenes. Classification and respiration
// need Doppler structure, not bandwidth, so these run at a few kHz of
// complex sample rate; the physics (carrier wavelength, geometry, noise)
// is unchanged.

struct GestureStudyConfig {
    double sample_rate_hz = 3000.0;  // also the occupied bandwidth
    double carrier_hz = 2.4e9;
    double trace_len_s = 4.0;
    double gesture_start_s = 0.4;
    double snr_db = 10.0;        // reflection power over noise power
    double reflectivity = 0.5;
    std::uint64_t seed = 1;

    CafConfig caf{0.5, 0.125, 40.0, 2.0, 1};
    double segment_threshold = 0.2;
    double min_len_s = 0.4;
    double min_gap_s = 0.7;
    int pca_components = 20;
    int sparsity_k = 3;
    int knn_k = 3;
};

struct GestureSample {
    GestureLabel label = GestureLabel::g1_pick_up;
    GestureWindow window;
};

// One labelled observation: waveform -> seeded gesture scene -> cross
// ambiguity -> segmentation (largest window; whole trace if nothing
// crosses the threshold).
GestureSample synth_gesture_sample(GestureLabel label, std::uint64_t seed,
                                   const GestureStudyConfig& config);

// n_per_class samples per class with per-sample derived seeds.
std::vector<GestureSample> synth_gesture_dataset(
    int n_per_class, const GestureStudyConfig& config);

struct TestOutcome {
    int dataset_index = 0;
    GestureLabel truth = GestureLabel::g1_pick_up;
    GestureLabel src = GestureLabel::g1_pick_up;
    GestureLabel knn = GestureLabel::g1_pick_up;
};

struct EvalResult {
    io::RecognitionModel model;
    double src_accuracy = 0.0;
    double knn_accuracy = 0.0;
    // confusion[true][predicted], from the sparse classifier.
    std::array<std::array<int, kNumGestures>, kNumGestures> confusion{};
    std::vector<TestOutcome> outcomes;
    int n_train = 0;
    int n_test = 0;
};

// Stratified split (the last ceil(fraction * n) samples of every class
// are held out), PCA + dictionary fit on the rest, both classifiers
// scored on the holdout.
EvalResult train_and_eval(const std::vector<GestureSample>& dataset,
                          double holdout_fraction,
                          const GestureStudyConfig& config);

struct RespirationStudyConfig {
    double rate_hz = 0.25;
    double amplitude_m = 0.01;
    double wall_attenuation_db = 20.0;
    double snr_db = 10.0;        // through-wall reflection power over noise
    double duration_s = 32.0;
    double epoch_s = 0.1;
    double band_lo_hz = 0.1;
    double band_hi_hz = 0.5;
    double sample_rate_hz = 2000.0;
    double carrier_hz = 2.4e9;
    std::uint64_t seed = 1;
};

struct RespirationArtifacts {
    Scene scene;
    IqTrace tx;
    IqTrace ref;
    IqTrace surv;
    PhaseTrace phase;  // outlier-filtered epoch phase
    RespirationEstimate estimate;
};

// Right-angle bistatic geometry with the subject on the transmitter's
// boresight, chest motion toward the transmitter, behind the configured
// wall. Runs the full receive chain.
RespirationArtifacts run_respiration_trial(const RespirationStudyConfig& config);

// Self-contained demonstration runs, each writing a directory of
// artifacts plus a manifest.json naming every file and parameter.
// Case 1: through-wall respiration. Case 2: gesture recognition study.
// Case 3: daily activity monitoring with HMM smoothing.
void run_demo(int case_id, std::uint64_t seed,
              const std::filesystem::path& out_dir);

}  // namespace wifisense::pipeline
