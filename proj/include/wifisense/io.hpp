#pragma once

#include <filesystem>
#include <string>

#include "wifisense/channel.hpp"
#include "wifisense/doppler.hpp"
#include "wifisense/monitor.hpp"
#include "wifisense/recognition.hpp"

namespace wifisense::io {

// Shortest round-trip decimal representation, locale independent.
std::string format_double(double value);

// Writes via a temporary file in the same directory, then renames, so
// readers never observe partial contents.
void atomic_write_text(const std::filesystem::path& path,
                       const std::string& content);
void atomic_write_bytes(const std::filesystem::path& path, const void* data,
                        std::size_t n_bytes);

// Little-endian float32 interleaved I/Q, with a `<name>.meta` sidecar of
// key=value lines: sample_rate_hz, carrier_hz, t0_s, n_samples.
void write_iq(const std::filesystem::path& path, const IqTrace& trace);
IqTrace read_iq(const std::filesystem::path& path);

// CSV grid: first row = Doppler axis (Hz) with an empty corner cell,
// first column = batch time (s), cells = linear magnitude.
void write_spectrogram_csv(const std::filesystem::path& path,
                           const DopplerSpectrogram& spec);
DopplerSpectrogram read_spectrogram_csv(const std::filesystem::path& path);

// 8-bit binary PGM, rows = batches, columns = Doppler bins, scaled by the
// trace maximum.
void write_spectrogram_pgm(const std::filesystem::path& path,
                           const DopplerSpectrogram& spec);

void write_scene_json(const std::filesystem::path& path, const Scene& scene);
Scene read_scene_json(const std::filesystem::path& path);

struct RecognitionModel {
    PcaModel pca;
    Dictionary dict;
};

void write_model_json(const std::filesystem::path& path,
                      const RecognitionModel& model);
RecognitionModel read_model_json(const std::filesystem::path& path);

// CSV with a "t_start_s,intensity" header; epoch length is inferred from
// the row spacing (fallback_epoch_s when there is a single row).
void write_intensity_csv(const std::filesystem::path& path,
                         const IntensityTrace& trace);
IntensityTrace read_intensity_csv(const std::filesystem::path& path,
                                  double fallback_epoch_s = 60.0);

// Plain numeric CSV grid, one row per time bin.
void write_window_csv(const std::filesystem::path& path,
                      const GestureWindow& window);
GestureWindow read_window_csv(const std::filesystem::path& path);

}  // namespace wifisense::io
