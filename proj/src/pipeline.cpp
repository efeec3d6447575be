#include "wifisense/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "json.hpp"
#include "wifisense/errors.hpp"
#include "wifisense/monitor.hpp"
#include "wifisense/rng.hpp"

namespace wifisense::pipeline {

namespace {

using nlohmann::json;

WaveformConfig make_waveform(double sample_rate_hz, double carrier_hz,
                             double duration_s) {
    WaveformConfig wf;
    wf.carrier_hz = carrier_hz;
    wf.bandwidth_hz = sample_rate_hz;
    wf.sample_rate_hz = sample_rate_hz;
    wf.burst_duration_s = duration_s;
    wf.beacon_interval_s = 2.0 * duration_s;
    wf.validate();
    return wf;
}

double window_energy(const GestureWindow& w) {
    double e = 0.0;
    for (double v : w.slice) e += v;
    return e;
}

// Collects artifact names while a demo runs, then freezes them into the
// manifest so reruns list identical content.
struct DemoDir {
    std::filesystem::path dir;
    std::vector<std::string> files;

    explicit DemoDir(const std::filesystem::path& d) : dir(d) {
        std::filesystem::create_directories(dir);
    }
    std::filesystem::path at(const std::string& name) {
        files.push_back(name);
        return dir / name;
    }
    void note(const std::string& name) { files.push_back(name); }
    void finish(int case_id, std::uint64_t seed, json parameters) {
        json manifest;
        manifest["case"] = case_id;
        manifest["seed"] = seed;
        manifest["parameters"] = std::move(parameters);
        std::sort(files.begin(), files.end());
        manifest["files"] = files;
        io::atomic_write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    }
};

void write_iq_tracked(DemoDir& demo, const std::string& name,
                      const IqTrace& trace) {
    io::write_iq(demo.at(name), trace);
    demo.note(name + ".meta");
}

void demo_respiration(std::uint64_t seed, const std::filesystem::path& out) {
    RespirationStudyConfig config;
    config.seed = seed;
    auto art = run_respiration_trial(config);

    DemoDir demo(out);
    io::write_scene_json(demo.at("scene.json"), art.scene);
    write_iq_tracked(demo, "tx.iq", art.tx);
    write_iq_tracked(demo, "ref.iq", art.ref);
    write_iq_tracked(demo, "surv0.iq", art.surv);

    std::string phase_csv = "t_s,phase_rad\n";
    for (std::size_t i = 0; i < art.phase.phase_rad.size(); ++i) {
        phase_csv += io::format_double(
            art.phase.t0_s + static_cast<double>(i) * art.phase.epoch_s);
        phase_csv += ',';
        phase_csv += io::format_double(art.phase.phase_rad[i]);
        phase_csv += '\n';
    }
    io::atomic_write_text(demo.at("phase.csv"), phase_csv);

    const double wavelength = kSpeedOfLight / config.carrier_hz;
    json rate;
    rate["detected"] = art.estimate.detected;
    rate["rate_hz"] = art.estimate.rate_hz;
    rate["rate_bpm"] = art.estimate.rate_bpm;
    rate["peak_to_peak_rad"] = art.estimate.peak_to_peak_rad;
    rate["band_lo_hz"] = art.estimate.band_lo_hz;
    rate["band_hi_hz"] = art.estimate.band_hi_hz;
    rate["expected_rate_hz"] = config.rate_hz;
    rate["expected_peak_to_peak_rad"] =
        2.0 * phase_sensitivity(config.amplitude_m, wavelength);
    io::atomic_write_text(demo.at("rate.json"), rate.dump(2) + "\n");

    json params;
    params["rate_hz"] = config.rate_hz;
    params["amplitude_m"] = config.amplitude_m;
    params["wall_attenuation_db"] = config.wall_attenuation_db;
    params["snr_db"] = config.snr_db;
    params["duration_s"] = config.duration_s;
    params["epoch_s"] = config.epoch_s;
    params["sample_rate_hz"] = config.sample_rate_hz;
    params["carrier_hz"] = config.carrier_hz;
    demo.finish(1, seed, std::move(params));
}

void demo_gestures(std::uint64_t seed, const std::filesystem::path& out) {
    GestureStudyConfig config;
    config.seed = seed;
    const int per_class = 8;
    auto dataset = synth_gesture_dataset(per_class, config);
    auto eval = train_and_eval(dataset, 0.25, config);

    DemoDir demo(out);
    io::write_model_json(demo.at("model.json"), eval.model);

    std::string confusion = "true\\pred";
    for (int c = 0; c < kNumGestures; ++c) {
        confusion += ',' + to_string(static_cast<GestureLabel>(c));
    }
    confusion += '\n';
    for (int t = 0; t < kNumGestures; ++t) {
        confusion += to_string(static_cast<GestureLabel>(t));
        for (int p = 0; p < kNumGestures; ++p) {
            confusion += ',' + std::to_string(eval.confusion[t][p]);
        }
        confusion += '\n';
    }
    io::atomic_write_text(demo.at("confusion.csv"), confusion);

    json metrics;
    metrics["src_accuracy"] = eval.src_accuracy;
    metrics["knn_accuracy"] = eval.knn_accuracy;
    metrics["n_train"] = eval.n_train;
    metrics["n_test"] = eval.n_test;
    io::atomic_write_text(demo.at("metrics.json"), metrics.dump(2) + "\n");

    std::string lines;
    for (const auto& o : eval.outcomes) {
        json line;
        line["index"] = o.dataset_index;
        line["true"] = to_string(o.truth);
        line["src"] = to_string(o.src);
        line["knn"] = to_string(o.knn);
        lines += line.dump() + "\n";
    }
    io::atomic_write_text(demo.at("labels.jsonl"), lines);

    // One held-out example window per class, as a plain grid.
    for (int c = 0; c < kNumGestures; ++c) {
        for (const auto& o : eval.outcomes) {
            if (o.truth != static_cast<GestureLabel>(c)) continue;
            const auto name =
                "window_" + to_string(o.truth) + ".csv";
            io::write_window_csv(
                demo.at(name),
                dataset[static_cast<std::size_t>(o.dataset_index)].window);
            break;
        }
    }

    json params;
    params["per_class"] = per_class;
    params["holdout_fraction"] = 0.25;
    params["snr_db"] = config.snr_db;
    params["sample_rate_hz"] = config.sample_rate_hz;
    params["trace_len_s"] = config.trace_len_s;
    params["pca_components"] = config.pca_components;
    params["sparsity_k"] = config.sparsity_k;
    demo.finish(2, seed, std::move(params));
}

// Zigzag walk between two x positions at the given speed.
ScattererTrack walk_track(double t_start, double t_end, double x0, double x1,
                          double speed, double reflectivity,
                          const std::string& label) {
    ScattererTrack track;
    track.reflectivity = reflectivity;
    track.label = label;
    const double leg_s = std::abs(x1 - x0) / speed;
    double t = t_start;
    double x = x0;
    track.keyframes.push_back({t, {x, 2.0, 0.0}});
    while (t + leg_s <= t_end + 1e-9) {
        t += leg_s;
        x = x == x0 ? x1 : x0;
        track.keyframes.push_back({t, {x, 2.0, 0.0}});
    }
    return track;
}

void demo_monitor(std::uint64_t seed, const std::filesystem::path& out) {
    const double duration_s = 150.0;
    const double fs = 3000.0;
    auto wf = make_waveform(fs, 2.4e9, duration_s);
    IqTrace tx = gen_ofdm_burst(wf, derive_seed(seed, 0));

    Scene scene;
    scene.tx_pos = {0.0, 0.0, 0.0};
    scene.ref_rx_pos = {1.0, 0.0, 0.0};
    scene.surv_rx_pos = {{2.0, 0.0, 0.0}};
    scene.direct_leakage_db = 30.0;
    scene.noise_power = 0.5 * 0.5 * 0.1;  // 10 dB below the moderate bout
    scene.noise_seed = derive_seed(seed, 1);
    scene.scatterers.push_back(pad_track(
        walk_track(20.0, 50.0, 4.0, 7.0, 0.5, 0.5, "walk"), 0.0, duration_s));
    scene.scatterers.push_back(pad_track(
        walk_track(80.0, 110.0, 4.0, 7.0, 1.2, 0.7, "exercise"), 0.0,
        duration_s));
    auto channels = apply_scene(tx, scene);

    CafConfig caf{0.5, 0.25, 40.0, 2.0, 1};
    auto spec = caf_batch(channels.ref, channels.surv[0], caf);
    auto envelope = doppler_envelope(spec, 1.0);
    auto intensity = intensity_from_envelope(envelope, 10.0);
    auto summary = summarize(intensity, 0.4, 0.7);

    DemoDir demo(out);
    io::write_scene_json(demo.at("scene.json"), scene);
    io::write_spectrogram_csv(demo.at("spectrogram.csv"), spec);
    io::write_spectrogram_pgm(demo.at("spectrogram.pgm"), spec);
    io::write_intensity_csv(demo.at("intensity.csv"), intensity);

    json s;
    s["sedentary_min"] = summary.sedentary_min;
    s["moderate_min"] = summary.moderate_min;
    s["vigorous_min"] = summary.vigorous_min;
    s["total_min"] = summary.total_min;
    s["sleep_min"] = summary.sleep_min;
    s["sedentary_excl_sleep_min"] = summary.sedentary_excl_sleep_min;
    s["total_excl_sleep_min"] = summary.total_excl_sleep_min;
    s["t1"] = summary.t1;
    s["t2"] = summary.t2;
    io::atomic_write_text(demo.at("summary.json"), s.dump(2) + "\n");

    // Label-sequence smoothing: a planted gesture sequence with noisy
    // classifier residuals, decoded with and without temporal coupling.
    std::vector<std::string> states;
    for (int c = 0; c < kNumGestures; ++c) {
        states.push_back(to_string(static_cast<GestureLabel>(c)));
    }
    std::vector<std::vector<double>> counts(
        static_cast<std::size_t>(kNumGestures),
        std::vector<double>(static_cast<std::size_t>(kNumGestures), 1.0));
    for (int c = 0; c < kNumGestures; ++c) {
        counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)] = 6.0;
    }
    // Leaving bed cannot directly follow sitting down.
    const std::vector<std::pair<int, int>> forbidden = {{1, 5}};
    auto model = build_transitions(states, counts, forbidden);

    Rng rng(derive_seed(seed, 2));
    const int frames = 60;
    int state = 0;
    std::vector<int> truth;
    std::vector<std::vector<double>> emissions;
    for (int f = 0; f < frames; ++f) {
        if (f > 0) {
            const double u = rng.uniform();
            double acc = 0.0;
            for (int j = 0; j < kNumGestures; ++j) {
                acc += model.at(state, j);
                if (u < acc) {
                    state = j;
                    break;
                }
            }
        }
        truth.push_back(state);
        std::vector<double> residuals(static_cast<std::size_t>(kNumGestures));
        for (int c = 0; c < kNumGestures; ++c) {
            residuals[static_cast<std::size_t>(c)] =
                c == state ? rng.uniform(0.1, 0.3) : rng.uniform(0.5, 1.0);
        }
        if (rng.uniform() < 0.2) {
            const int wrong = static_cast<int>(rng.next_u64() % kNumGestures);
            residuals[static_cast<std::size_t>(wrong)] = rng.uniform(0.05, 0.1);
        }
        emissions.push_back(src_to_emission(residuals));
    }
    const std::vector<double> initial(static_cast<std::size_t>(kNumGestures),
                                      1.0 / kNumGestures);
    auto smoothed = viterbi(emissions, model, initial);

    std::string lines;
    const double frame_s = 2.0;
    for (int f = 0; f < frames; ++f) {
        const auto& row = emissions[static_cast<std::size_t>(f)];
        const int raw = static_cast<int>(
            std::max_element(row.begin(), row.end()) - row.begin());
        json line;
        line["t_start_s"] = static_cast<double>(f) * frame_s;
        line["t_end_s"] = static_cast<double>(f + 1) * frame_s;
        line["truth"] = states[static_cast<std::size_t>(truth[static_cast<std::size_t>(f)])];
        line["argmax"] = states[static_cast<std::size_t>(raw)];
        line["label"] = states[static_cast<std::size_t>(smoothed[static_cast<std::size_t>(f)])];
        line["smoothed"] = true;
        lines += line.dump() + "\n";
    }
    io::atomic_write_text(demo.at("labels.jsonl"), lines);

    json t;
    t["states"] = states;
    t["prob"] = model.prob;
    t["forbidden"] = json::array();
    for (const auto& [a, b] : forbidden) {
        t["forbidden"].push_back(json::array({a, b}));
    }
    io::atomic_write_text(demo.at("transitions.json"), t.dump(2) + "\n");

    json params;
    params["duration_s"] = duration_s;
    params["sample_rate_hz"] = fs;
    params["epoch_len_s"] = 10.0;
    params["t1"] = 0.4;
    params["t2"] = 0.7;
    params["frames"] = frames;
    demo.finish(3, seed, std::move(params));
}

}  // namespace

GestureSample synth_gesture_sample(GestureLabel label, std::uint64_t seed,
                                   const GestureStudyConfig& config) {
    auto wf = make_waveform(config.sample_rate_hz, config.carrier_hz,
                            config.trace_len_s);
    IqTrace tx = gen_ofdm_burst(wf, derive_seed(seed, 0));

    Scene scene;
    scene.tx_pos = {0.0, 0.0, 0.0};
    scene.ref_rx_pos = {1.0, 0.0, 0.0};
    scene.surv_rx_pos = {{2.0, 0.0, 0.0}};
    scene.direct_leakage_db = 30.0;

    auto track = gesture_track(label, config.gesture_start_s, {4.0, 0.0, 0.0},
                               derive_seed(seed, 1));
    track.reflectivity = config.reflectivity;
    scene.scatterers.push_back(
        pad_track(track, tx.t0_s, tx.t0_s + config.trace_len_s));

    const double reflection_power = config.reflectivity * config.reflectivity;
    scene.noise_power =
        reflection_power * std::pow(10.0, -config.snr_db / 10.0);
    scene.noise_seed = derive_seed(seed, 2);

    auto channels = apply_scene(tx, scene);
    auto spec = caf_batch(channels.ref, channels.surv[0], config.caf);
    auto windows = segment(spec, config.segment_threshold, config.min_len_s,
                           config.min_gap_s);

    GestureSample sample;
    sample.label = label;
    if (windows.empty()) {
        sample.window = window_from_spec(spec, 0, spec.n_batches() - 1);
    } else {
        std::size_t best = 0;
        for (std::size_t i = 1; i < windows.size(); ++i) {
            if (window_energy(windows[i]) > window_energy(windows[best])) {
                best = i;
            }
        }
        sample.window = std::move(windows[best]);
    }
    return sample;
}

std::vector<GestureSample> synth_gesture_dataset(
    int n_per_class, const GestureStudyConfig& config) {
    if (n_per_class < 1) {
        throw ValidationError("need at least one sample per class");
    }
    std::vector<GestureSample> dataset;
    dataset.reserve(static_cast<std::size_t>(n_per_class) * kNumGestures);
    for (int c = 0; c < kNumGestures; ++c) {
        for (int i = 0; i < n_per_class; ++i) {
            const auto sample_seed = derive_seed(
                config.seed, static_cast<std::uint64_t>(c) * n_per_class + i);
            dataset.push_back(synth_gesture_sample(
                static_cast<GestureLabel>(c), sample_seed, config));
        }
    }
    return dataset;
}

EvalResult train_and_eval(const std::vector<GestureSample>& dataset,
                          double holdout_fraction,
                          const GestureStudyConfig& config) {
    if (dataset.empty()) throw ValidationError("empty dataset");
    if (!(holdout_fraction > 0.0) || !(holdout_fraction < 1.0)) {
        throw ValidationError("holdout fraction must be in (0, 1)");
    }

    std::array<std::vector<int>, kNumGestures> by_class;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        by_class[static_cast<std::size_t>(dataset[i].label)].push_back(
            static_cast<int>(i));
    }
    std::vector<int> train_idx;
    std::vector<int> test_idx;
    for (const auto& members : by_class) {
        if (members.empty()) continue;
        if (members.size() < 2) {
            throw ValidationError("every class needs at least 2 samples");
        }
        const auto n_test = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(
                   holdout_fraction * static_cast<double>(members.size()))));
        const auto n_train = members.size() - n_test;
        if (n_train == 0) {
            throw ValidationError("holdout fraction leaves no training data");
        }
        train_idx.insert(train_idx.end(), members.begin(),
                         members.begin() + static_cast<long>(n_train));
        test_idx.insert(test_idx.end(),
                        members.begin() + static_cast<long>(n_train),
                        members.end());
    }

    std::vector<GestureWindow> train_windows;
    std::vector<GestureLabel> train_labels;
    for (int i : train_idx) {
        train_windows.push_back(dataset[static_cast<std::size_t>(i)].window);
        train_labels.push_back(dataset[static_cast<std::size_t>(i)].label);
    }

    const int dim = train_windows.front().n_t * train_windows.front().n_f;
    const int n_components =
        std::min({config.pca_components,
                  static_cast<int>(train_windows.size()) - 1, dim});
    if (n_components < 1) {
        throw ValidationError("too little training data for a PCA basis");
    }

    EvalResult result;
    result.model.pca = pca_fit(train_windows, n_components);
    std::vector<FeatureVector> train_features;
    for (const auto& w : train_windows) {
        train_features.push_back(pca_project(result.model.pca, w));
    }
    result.model.dict = build_dictionary(train_features, train_labels);
    result.n_train = static_cast<int>(train_idx.size());
    result.n_test = static_cast<int>(test_idx.size());

    const int sparsity =
        std::min(config.sparsity_k, result.model.dict.n_atoms());
    int knn_k = std::min(config.knn_k, static_cast<int>(train_idx.size()));
    if (knn_k % 2 == 0) --knn_k;

    int src_hits = 0;
    int knn_hits = 0;
    for (int i : test_idx) {
        const auto& sample = dataset[static_cast<std::size_t>(i)];
        const auto y = pca_project(result.model.pca, sample.window);
        const auto src = src_classify(y, result.model.dict, sparsity);
        const auto knn =
            knn_classify(y, train_features, train_labels, knn_k);
        TestOutcome o;
        o.dataset_index = i;
        o.truth = sample.label;
        o.src = src.label;
        o.knn = knn;
        result.outcomes.push_back(o);
        result.confusion[static_cast<std::size_t>(o.truth)]
                        [static_cast<std::size_t>(o.src)] += 1;
        if (o.src == o.truth) ++src_hits;
        if (o.knn == o.truth) ++knn_hits;
    }
    result.src_accuracy =
        static_cast<double>(src_hits) / static_cast<double>(test_idx.size());
    result.knn_accuracy =
        static_cast<double>(knn_hits) / static_cast<double>(test_idx.size());
    return result;
}

RespirationArtifacts run_respiration_trial(
    const RespirationStudyConfig& config) {
    auto wf = make_waveform(config.sample_rate_hz, config.carrier_hz,
                            config.duration_s);
    RespirationArtifacts art;
    art.tx = gen_ofdm_burst(wf, derive_seed(config.seed, 0));

    art.scene.tx_pos = {0.0, 0.0, 0.0};
    art.scene.ref_rx_pos = {1.0, 0.0, 0.0};
    art.scene.surv_rx_pos = {{3.0, 4.0, 0.0}};
    art.scene.wall_attenuation_db = config.wall_attenuation_db;
    art.scene.direct_leakage_db = 30.0;
    art.scene.scatterers.push_back(
        respiration_track(config.rate_hz, config.amplitude_m, {3.0, 0.0, 0.0},
                          config.duration_s, art.scene.tx_pos));

    const double reflection_amp =
        std::pow(10.0, -config.wall_attenuation_db / 20.0);
    art.scene.noise_power = reflection_amp * reflection_amp *
                            std::pow(10.0, -config.snr_db / 10.0);
    art.scene.noise_seed = derive_seed(config.seed, 1);

    auto channels = apply_scene(art.tx, art.scene);
    art.ref = std::move(channels.ref);
    art.surv = std::move(channels.surv[0]);

    auto raw = extract_phase(art.ref, art.surv, config.epoch_s);
    art.phase = hampel(raw, 11, 3.0);
    art.estimate =
        estimate_rate(art.phase, config.band_lo_hz, config.band_hi_hz);
    return art;
}

void run_demo(int case_id, std::uint64_t seed,
              const std::filesystem::path& out_dir) {
    switch (case_id) {
        case 1:
            demo_respiration(seed, out_dir);
            return;
        case 2:
            demo_gestures(seed, out_dir);
            return;
        case 3:
            demo_monitor(seed, out_dir);
            return;
        default:
            throw ValidationError("demo case must be 1, 2, or 3");
    }
}

}  // namespace wifisense::pipeline
