// Command-line front end: seeded, file-based runs of the synthesis,
// simulation, Doppler, respiration, recognition, and monitoring stages.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wifisense/channel.hpp"
#include "wifisense/doppler.hpp"
#include "wifisense/errors.hpp"
#include "wifisense/io.hpp"
#include "wifisense/monitor.hpp"
#include "wifisense/pipeline.hpp"
#include "wifisense/recognition.hpp"
#include "wifisense/respiration.hpp"
#include "wifisense/waveform.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wifisense;

namespace {

// Files created by the running command, removed if it fails so a bad run
// leaves nothing half-written behind.
struct Outputs {
    std::vector<fs::path> written;

    fs::path add(fs::path p) {
        written.push_back(p);
        return written.back();
    }
    void discard() {
        for (auto it = written.rbegin(); it != written.rend(); ++it) {
            std::error_code ec;
            fs::remove(*it, ec);
        }
    }
    void report() const {
        for (const auto& p : written) {
            std::cout << "wrote " << p.string() << "\n";
        }
    }
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataFormatError("config " + path + ": " + e.what());
    }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) throw ValidationError("unknown config key: " + key);
    }
}

double jnum(const json& j, const char* key, double dflt) {
    if (!j.contains(key)) return dflt;
    const auto& v = j.at(key);
    if (!v.is_number()) {
        throw DataFormatError(std::string("config key ") + key +
                              " must be a number");
    }
    return v.get<double>();
}

int jint(const json& j, const char* key, int dflt) {
    if (!j.contains(key)) return dflt;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) {
        throw DataFormatError(std::string("config key ") + key +
                              " must be an integer");
    }
    return v.get<int>();
}

std::string jstr(const json& j, const char* key, const std::string& dflt) {
    if (!j.contains(key)) return dflt;
    const auto& v = j.at(key);
    if (!v.is_string()) {
        throw DataFormatError(std::string("config key ") + key +
                              " must be a string");
    }
    return v.get<std::string>();
}

fs::path prepare_out_dir(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw ValidationError("cannot create output directory: " + out);
    }
    return dir;
}

void write_iq_out(Outputs& outputs, const fs::path& path,
                  const IqTrace& trace) {
    io::write_iq(path, trace);
    outputs.add(path);
    outputs.add(fs::path(path.string() + ".meta"));
}

void cmd_synth(const std::string& config_path, std::uint64_t seed,
               const std::string& out, Outputs& outputs) {
    const json cfg = load_config(config_path);
    check_keys(cfg, {"mode", "carrier_hz", "bandwidth_hz", "n_subcarriers",
                     "n_active", "sample_rate_hz", "beacon_interval_s",
                     "burst_duration_s", "duration_s"});
    WaveformConfig wf;
    wf.carrier_hz = jnum(cfg, "carrier_hz", wf.carrier_hz);
    wf.bandwidth_hz = jnum(cfg, "bandwidth_hz", wf.bandwidth_hz);
    wf.n_subcarriers = jint(cfg, "n_subcarriers", wf.n_subcarriers);
    wf.n_active = jint(cfg, "n_active", wf.n_active);
    wf.sample_rate_hz = jnum(cfg, "sample_rate_hz", wf.sample_rate_hz);
    wf.beacon_interval_s = jnum(cfg, "beacon_interval_s", wf.beacon_interval_s);
    wf.burst_duration_s = jnum(cfg, "burst_duration_s", wf.burst_duration_s);

    const std::string mode = jstr(cfg, "mode", "burst");
    IqTrace trace;
    if (mode == "burst") {
        trace = gen_ofdm_burst(wf, seed);
    } else if (mode == "beacon") {
        trace = gen_beacon_train(wf, jnum(cfg, "duration_s", 1.0), seed);
    } else {
        throw ValidationError("mode must be 'burst' or 'beacon'");
    }
    write_iq_out(outputs, prepare_out_dir(out) / "tx.iq", trace);
}

void cmd_simulate(const std::string& scene_path, const std::string& tx_path,
                  std::uint64_t seed, bool seed_given, const std::string& out,
                  Outputs& outputs) {
    Scene scene = io::read_scene_json(scene_path);
    if (seed_given) scene.noise_seed = seed;
    const IqTrace tx = io::read_iq(tx_path);
    const auto channels = apply_scene(tx, scene);

    const fs::path dir = prepare_out_dir(out);
    write_iq_out(outputs, dir / "ref.iq", channels.ref);
    for (std::size_t i = 0; i < channels.surv.size(); ++i) {
        write_iq_out(outputs, dir / ("surv" + std::to_string(i) + ".iq"),
                     channels.surv[i]);
    }
}

void cmd_caf(const std::string& ref_path, const std::string& surv_path,
             const std::string& config_path, bool pgm, const std::string& out,
             Outputs& outputs) {
    const json cfg = load_config(config_path);
    check_keys(cfg, {"batch_len_s", "batch_hop_s", "max_doppler_hz",
                     "doppler_step_hz", "delay_bins"});
    CafConfig caf;
    caf.batch_len_s = jnum(cfg, "batch_len_s", caf.batch_len_s);
    caf.batch_hop_s = jnum(cfg, "batch_hop_s", caf.batch_hop_s);
    caf.max_doppler_hz = jnum(cfg, "max_doppler_hz", caf.max_doppler_hz);
    caf.doppler_step_hz = jnum(cfg, "doppler_step_hz", caf.doppler_step_hz);
    caf.delay_bins = jint(cfg, "delay_bins", caf.delay_bins);

    const IqTrace ref = io::read_iq(ref_path);
    const IqTrace surv = io::read_iq(surv_path);
    const auto spec = caf_batch(ref, surv, caf);

    const fs::path dir = prepare_out_dir(out);
    io::write_spectrogram_csv(outputs.add(dir / "spectrogram.csv"), spec);
    if (pgm) {
        io::write_spectrogram_pgm(outputs.add(dir / "spectrogram.pgm"), spec);
    }
}

void cmd_respire(const std::string& ref_path, const std::string& surv_path,
                 const std::string& config_path, const std::string& out,
                 Outputs& outputs) {
    const json cfg = load_config(config_path);
    check_keys(cfg, {"epoch_s", "band_lo_hz", "band_hi_hz", "hampel_window",
                     "hampel_k"});
    const double epoch_s = jnum(cfg, "epoch_s", 0.1);
    const double band_lo = jnum(cfg, "band_lo_hz", 0.1);
    const double band_hi = jnum(cfg, "band_hi_hz", 0.5);
    const int hampel_window = jint(cfg, "hampel_window", 11);
    const double hampel_k = jnum(cfg, "hampel_k", 3.0);

    const IqTrace ref = io::read_iq(ref_path);
    const IqTrace surv = io::read_iq(surv_path);
    const auto phase = hampel(extract_phase(ref, surv, epoch_s),
                              hampel_window, hampel_k);
    const auto estimate = estimate_rate(phase, band_lo, band_hi);

    json result;
    result["detected"] = estimate.detected;
    result["rate_hz"] = estimate.rate_hz;
    result["rate_bpm"] = estimate.rate_bpm;
    result["peak_to_peak_rad"] = estimate.peak_to_peak_rad;
    result["band_lo_hz"] = estimate.band_lo_hz;
    result["band_hi_hz"] = estimate.band_hi_hz;
    io::atomic_write_text(outputs.add(prepare_out_dir(out) / "rate.json"),
                          result.dump(2) + "\n");
}

void cmd_train(const std::string& data_path, const std::string& config_path,
               const std::string& out, Outputs& outputs) {
    const json cfg = load_config(config_path);
    check_keys(cfg, {"pca_components"});

    json data;
    {
        std::ifstream in(data_path);
        if (!in) throw ValidationError("cannot open dataset: " + data_path);
        try {
            data = json::parse(in);
        } catch (const json::exception& e) {
            throw DataFormatError("dataset " + data_path + ": " + e.what());
        }
    }
    if (!data.is_object() || !data.contains("samples") ||
        !data.at("samples").is_array()) {
        throw DataFormatError("dataset must be an object with a samples array");
    }

    const fs::path base = fs::path(data_path).parent_path();
    std::vector<GestureWindow> windows;
    std::vector<GestureLabel> labels;
    for (const auto& sample : data.at("samples")) {
        if (!sample.is_object() || !sample.contains("window") ||
            !sample.contains("label") || !sample.at("window").is_string() ||
            !sample.at("label").is_string()) {
            throw DataFormatError(
                "each sample needs string fields 'window' and 'label'");
        }
        fs::path wpath(sample.at("window").get<std::string>());
        if (wpath.is_relative()) wpath = base / wpath;
        windows.push_back(io::read_window_csv(wpath));
        try {
            labels.push_back(
                gesture_from_string(sample.at("label").get<std::string>()));
        } catch (const ValidationError& e) {
            throw DataFormatError(e.what());
        }
    }
    if (windows.empty()) throw ValidationError("dataset has no samples");

    const int dim = windows.front().n_t * windows.front().n_f;
    const int n_components =
        std::min({jint(cfg, "pca_components", 20),
                  static_cast<int>(windows.size()) - 1, dim});
    if (n_components < 1) {
        throw ValidationError("need at least 2 samples to fit a basis");
    }

    io::RecognitionModel model;
    model.pca = pca_fit(windows, n_components);
    std::vector<FeatureVector> features;
    for (const auto& w : windows) {
        features.push_back(pca_project(model.pca, w));
    }
    model.dict = build_dictionary(features, labels);
    io::write_model_json(outputs.add(prepare_out_dir(out) / "model.json"),
                         model);
}

void cmd_classify(const std::string& model_path,
                  const std::vector<std::string>& window_paths,
                  const std::string& config_path, const std::string& out,
                  Outputs& outputs) {
    const json cfg = load_config(config_path);
    check_keys(cfg, {"sparsity_k"});
    const auto model = io::read_model_json(model_path);
    const int sparsity =
        std::min(jint(cfg, "sparsity_k", 3), model.dict.n_atoms());

    std::string lines;
    for (const auto& path : window_paths) {
        const auto window = io::read_window_csv(path);
        const auto y = pca_project(model.pca, window);
        const auto result = src_classify(y, model.dict, sparsity);
        json line;
        line["window"] = fs::path(path).filename().string();
        line["label"] = to_string(result.label);
        line["class_residuals"] = result.class_residuals;
        line["omp_residual"] = result.omp_residual;
        lines += line.dump() + "\n";
    }
    io::atomic_write_text(outputs.add(prepare_out_dir(out) / "labels.jsonl"),
                          lines);
}

void cmd_monitor(const std::string& spec_path, const std::string& intensity_path,
                 const std::string& config_path, const std::string& out,
                 Outputs& outputs) {
    const json cfg = load_config(config_path);
    check_keys(cfg, {"exclude_hz", "normalizer", "epoch_len_s", "t1", "t2"});
    const double epoch_len_s = jnum(cfg, "epoch_len_s", 30.0);
    const double t1 = jnum(cfg, "t1", 0.4);
    const double t2 = jnum(cfg, "t2", 0.7);

    IntensityTrace trace;
    const fs::path dir = prepare_out_dir(out);
    if (!spec_path.empty()) {
        const auto spec = io::read_spectrogram_csv(spec_path);
        const auto envelope = doppler_envelope(spec, jnum(cfg, "exclude_hz", 1.0),
                                               jnum(cfg, "normalizer", 0.0));
        trace = intensity_from_envelope(envelope, epoch_len_s);
        io::write_intensity_csv(outputs.add(dir / "intensity.csv"), trace);
    } else {
        trace = io::read_intensity_csv(intensity_path, epoch_len_s);
    }
    const auto summary = summarize(trace, t1, t2);

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
    io::atomic_write_text(outputs.add(dir / "summary.json"), s.dump(2) + "\n");
}

void cmd_demo(int case_id, std::uint64_t seed, const std::string& out) {
    const fs::path dir(out);
    const bool existed = fs::exists(dir);
    try {
        pipeline::run_demo(case_id, seed, dir);
    } catch (...) {
        if (!existed) {
            std::error_code ec;
            fs::remove_all(dir, ec);
        }
        throw;
    }
    std::cout << "wrote " << (dir / "manifest.json").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Passive WiFi sensing toolkit: synthesis, channel "
                 "simulation, Doppler extraction, respiration, gesture "
                 "recognition, and activity monitoring"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 1;
    std::string scene_path, tx_path, ref_path, surv_path;
    std::string data_path, model_path, spec_path, intensity_path;
    std::vector<std::string> window_paths;
    bool pgm = false;
    int demo_case = 1;

    auto* synth = app.add_subcommand("synth", "Generate a transmit trace");
    synth->add_option("--config", config_path, "Waveform config JSON")
        ->check(CLI::ExistingFile);
    synth->add_option("--seed", seed, "RNG seed");
    synth->add_option("--out", out_dir, "Output directory")->required();

    auto* simulate =
        app.add_subcommand("simulate", "Propagate a trace through a scene");
    simulate->add_option("--scene", scene_path, "Scene JSON")
        ->required()
        ->check(CLI::ExistingFile);
    simulate->add_option("--tx", tx_path, "Transmit .iq trace")
        ->required()
        ->check(CLI::ExistingFile);
    auto* sim_seed = simulate->add_option("--seed", seed, "Noise seed override");
    simulate->add_option("--out", out_dir, "Output directory")->required();

    auto* caf = app.add_subcommand(
        "caf", "Batched Doppler spectrogram from a channel pair");
    caf->add_option("--ref", ref_path, "Reference .iq trace")
        ->required()
        ->check(CLI::ExistingFile);
    caf->add_option("--surv", surv_path, "Surveillance .iq trace")
        ->required()
        ->check(CLI::ExistingFile);
    caf->add_option("--config", config_path, "Batch config JSON")
        ->check(CLI::ExistingFile);
    caf->add_flag("--pgm", pgm, "Also write a PGM rendering");
    caf->add_option("--out", out_dir, "Output directory")->required();

    auto* respire = app.add_subcommand(
        "respire", "Respiration rate from a channel pair");
    respire->add_option("--ref", ref_path, "Reference .iq trace")
        ->required()
        ->check(CLI::ExistingFile);
    respire->add_option("--surv", surv_path, "Surveillance .iq trace")
        ->required()
        ->check(CLI::ExistingFile);
    respire->add_option("--config", config_path, "Estimator config JSON")
        ->check(CLI::ExistingFile);
    respire->add_option("--out", out_dir, "Output directory")->required();

    auto* train = app.add_subcommand(
        "train", "Fit a recognition model from labeled windows");
    train->add_option("--data", data_path,
                      "Dataset JSON listing window CSVs and labels")
        ->required()
        ->check(CLI::ExistingFile);
    train->add_option("--config", config_path, "Training config JSON")
        ->check(CLI::ExistingFile);
    train->add_option("--out", out_dir, "Output directory")->required();

    auto* classify =
        app.add_subcommand("classify", "Label window CSVs with a model");
    classify->add_option("--model", model_path, "Model JSON")
        ->required()
        ->check(CLI::ExistingFile);
    classify->add_option("--config", config_path, "Classifier config JSON")
        ->check(CLI::ExistingFile);
    classify->add_option("--out", out_dir, "Output directory")->required();
    classify->add_option("windows", window_paths, "Window CSV files")
        ->required()
        ->check(CLI::ExistingFile);

    auto* monitor = app.add_subcommand(
        "monitor", "Activity summary from a spectrogram or intensity trace");
    auto* mon_spec = monitor->add_option("--spectrogram", spec_path,
                                         "Doppler spectrogram CSV")
                         ->check(CLI::ExistingFile);
    monitor->add_option("--intensity", intensity_path, "Intensity CSV")
        ->check(CLI::ExistingFile)
        ->excludes(mon_spec);
    monitor->add_option("--config", config_path, "Monitor config JSON")
        ->check(CLI::ExistingFile);
    monitor->add_option("--out", out_dir, "Output directory")->required();

    auto* demo = app.add_subcommand(
        "demo", "Seeded end-to-end demonstration (cases 1-3)");
    demo->add_option("--case", demo_case, "Demo case")
        ->required()
        ->check(CLI::Range(1, 3));
    demo->add_option("--seed", seed, "RNG seed");
    demo->add_option("--out", out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    Outputs outputs;
    try {
        if (*synth) {
            cmd_synth(config_path, seed, out_dir, outputs);
        } else if (*simulate) {
            cmd_simulate(scene_path, tx_path, seed, sim_seed->count() > 0,
                         out_dir, outputs);
        } else if (*caf) {
            cmd_caf(ref_path, surv_path, config_path, pgm, out_dir, outputs);
        } else if (*respire) {
            cmd_respire(ref_path, surv_path, config_path, out_dir, outputs);
        } else if (*train) {
            cmd_train(data_path, config_path, out_dir, outputs);
        } else if (*classify) {
            cmd_classify(model_path, window_paths, config_path, out_dir,
                         outputs);
        } else if (*monitor) {
            if (spec_path.empty() && intensity_path.empty()) {
                throw ValidationError(
                    "monitor needs --spectrogram or --intensity");
            }
            cmd_monitor(spec_path, intensity_path, config_path, out_dir,
                        outputs);
        } else if (*demo) {
            cmd_demo(demo_case, seed, out_dir);
        }
        outputs.report();
        return 0;
    } catch (const DataFormatError& e) {
        outputs.discard();
        std::cerr << "data format error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        outputs.discard();
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        outputs.discard();
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        outputs.discard();
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
