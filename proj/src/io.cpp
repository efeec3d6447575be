#include "wifisense/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "wifisense/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "raw float I/Q files assume a little-endian host");

namespace wifisense::io {

namespace {

using nlohmann::json;

double parse_double(const std::string& cell) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw DataFormatError("malformed number: '" + cell + "'");
    }
    return value;
}

std::uint64_t parse_u64(const std::string& cell) {
    std::uint64_t value = 0;
    auto [ptr, ec] =
        std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw DataFormatError("malformed integer: '" + cell + "'");
    }
    return value;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

// Lines without the trailing newline; a final empty line is dropped.
std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::string read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

json parse_json_file(const std::filesystem::path& path) {
    const std::string text = read_all(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw DataFormatError(path.string() + ": " + e.what());
    }
}

// Typed accessors so a missing or mistyped key reports as bad data, not
// as an unhandled library exception.
json require_key(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw DataFormatError(std::string("missing key '") + key + "'");
    }
    return j.at(key);
}

double as_double(const json& j, const char* key) {
    auto v = require_key(j, key);
    if (!v.is_number()) {
        throw DataFormatError(std::string("key '") + key + "' must be a number");
    }
    return v.get<double>();
}

Vec3 as_vec3(const json& v, const char* what) {
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() ||
        !v[1].is_number() || !v[2].is_number()) {
        throw DataFormatError(std::string(what) + " must be [x, y, z]");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

std::vector<double> as_double_array(const json& j, const char* key,
                                    std::size_t expect) {
    auto v = require_key(j, key);
    if (!v.is_array() || (expect > 0 && v.size() != expect)) {
        throw DataFormatError(std::string("key '") + key +
                              "' has the wrong element count");
    }
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number()) {
            throw DataFormatError(std::string("key '") + key +
                                  "' must contain numbers");
        }
        out.push_back(e.get<double>());
    }
    return out;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw NumericalError("unformattable double");
    return std::string(buf, ptr);
}

void atomic_write_bytes(const std::filesystem::path& path, const void* data,
                        std::size_t n_bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot open " + tmp.string());
        out.write(static_cast<const char*>(data),
                  static_cast<std::streamsize>(n_bytes));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw ValidationError("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

void atomic_write_text(const std::filesystem::path& path,
                       const std::string& content) {
    atomic_write_bytes(path, content.data(), content.size());
}

void write_iq(const std::filesystem::path& path, const IqTrace& trace) {
    trace.validate();
    atomic_write_bytes(path, trace.samples.data(),
                       trace.samples.size() * sizeof(std::complex<float>));
    std::string meta;
    meta += "sample_rate_hz=" + format_double(trace.sample_rate_hz) + "\n";
    meta += "carrier_hz=" + format_double(trace.carrier_hz) + "\n";
    meta += "t0_s=" + format_double(trace.t0_s) + "\n";
    meta += "n_samples=" + std::to_string(trace.samples.size()) + "\n";
    auto meta_path = path;
    meta_path += ".meta";
    atomic_write_text(meta_path, meta);
}

IqTrace read_iq(const std::filesystem::path& path) {
    auto meta_path = path;
    meta_path += ".meta";
    std::map<std::string, std::string> meta;
    for (const auto& line : read_lines(meta_path)) {
        if (line.empty()) continue;
        const auto pos = line.find('=');
        if (pos == std::string::npos) {
            throw DataFormatError(meta_path.string() + ": expected key=value");
        }
        meta[line.substr(0, pos)] = line.substr(pos + 1);
    }
    for (const char* key :
         {"sample_rate_hz", "carrier_hz", "t0_s", "n_samples"}) {
        if (!meta.count(key)) {
            throw DataFormatError(meta_path.string() + ": missing " + key);
        }
    }

    IqTrace trace;
    trace.sample_rate_hz = parse_double(meta["sample_rate_hz"]);
    trace.carrier_hz = parse_double(meta["carrier_hz"]);
    trace.t0_s = parse_double(meta["t0_s"]);
    const auto n = parse_u64(meta["n_samples"]);

    const std::string raw = read_all(path);
    if (raw.size() != n * sizeof(std::complex<float>)) {
        throw DataFormatError(path.string() +
                              ": size disagrees with the meta sidecar");
    }
    trace.samples.resize(n);
    std::memcpy(trace.samples.data(), raw.data(), raw.size());
    trace.validate();
    return trace;
}

void write_spectrogram_csv(const std::filesystem::path& path,
                           const DopplerSpectrogram& spec) {
    spec.validate();
    std::string text;
    for (int f = 0; f < spec.n_doppler(); ++f) {
        text += ',';
        text += format_double(spec.doppler_axis_hz[static_cast<std::size_t>(f)]);
    }
    text += '\n';
    for (int b = 0; b < spec.n_batches(); ++b) {
        text += format_double(spec.batch_times_s[static_cast<std::size_t>(b)]);
        for (int f = 0; f < spec.n_doppler(); ++f) {
            text += ',';
            text += format_double(spec.at(b, f));
        }
        text += '\n';
    }
    atomic_write_text(path, text);
}

DopplerSpectrogram read_spectrogram_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.size() < 2) {
        throw DataFormatError(path.string() + ": need a header and one batch");
    }
    const auto header = split(lines[0], ',');
    if (header.size() < 2 || !header[0].empty()) {
        throw DataFormatError(path.string() +
                              ": header must start with an empty corner cell");
    }
    DopplerSpectrogram spec;
    for (std::size_t i = 1; i < header.size(); ++i) {
        spec.doppler_axis_hz.push_back(parse_double(header[i]));
    }
    for (std::size_t row = 1; row < lines.size(); ++row) {
        if (lines[row].empty()) continue;
        const auto cells = split(lines[row], ',');
        if (cells.size() != header.size()) {
            throw DataFormatError(path.string() + ": ragged row " +
                                  std::to_string(row));
        }
        spec.batch_times_s.push_back(parse_double(cells[0]));
        for (std::size_t i = 1; i < cells.size(); ++i) {
            spec.magnitudes.push_back(parse_double(cells[i]));
        }
    }
    // The batch length is not stored; the bin spacing is its best proxy.
    if (spec.doppler_axis_hz.size() > 1) {
        spec.resolution_hz = spec.doppler_axis_hz[1] - spec.doppler_axis_hz[0];
    }
    spec.validate();
    return spec;
}

void write_spectrogram_pgm(const std::filesystem::path& path,
                           const DopplerSpectrogram& spec) {
    spec.validate();
    double peak = 0.0;
    for (double m : spec.magnitudes) peak = std::max(peak, m);
    std::string bytes = "P5\n" + std::to_string(spec.n_doppler()) + " " +
                        std::to_string(spec.n_batches()) + "\n255\n";
    for (double m : spec.magnitudes) {
        const double scaled = peak > 0.0 ? m / peak * 255.0 : 0.0;
        bytes += static_cast<char>(
            static_cast<unsigned char>(std::lround(scaled)));
    }
    atomic_write_bytes(path, bytes.data(), bytes.size());
}

void write_scene_json(const std::filesystem::path& path, const Scene& scene) {
    scene.validate();
    json j;
    j["tx_pos"] = vec3_to_json(scene.tx_pos);
    j["ref_rx_pos"] = vec3_to_json(scene.ref_rx_pos);
    j["surv_rx_pos"] = json::array();
    for (const auto& p : scene.surv_rx_pos) {
        j["surv_rx_pos"].push_back(vec3_to_json(p));
    }
    j["wall_attenuation_db"] = scene.wall_attenuation_db;
    j["direct_leakage_db"] = scene.direct_leakage_db;
    j["noise_power"] = scene.noise_power;
    j["noise_seed"] = scene.noise_seed;
    j["scatterers"] = json::array();
    for (const auto& s : scene.scatterers) {
        json t;
        t["reflectivity"] = s.reflectivity;
        t["label"] = s.label;
        t["keyframes"] = json::array();
        for (const auto& k : s.keyframes) {
            t["keyframes"].push_back(
                json::array({k.t_s, k.pos.x, k.pos.y, k.pos.z}));
        }
        j["scatterers"].push_back(std::move(t));
    }
    atomic_write_text(path, j.dump(2) + "\n");
}

Scene read_scene_json(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    Scene scene;
    scene.tx_pos = as_vec3(require_key(j, "tx_pos"), "tx_pos");
    scene.ref_rx_pos = as_vec3(require_key(j, "ref_rx_pos"), "ref_rx_pos");
    auto surv = require_key(j, "surv_rx_pos");
    if (!surv.is_array()) {
        throw DataFormatError("surv_rx_pos must be an array of positions");
    }
    for (const auto& p : surv) {
        scene.surv_rx_pos.push_back(as_vec3(p, "surv_rx_pos entry"));
    }
    scene.wall_attenuation_db = as_double(j, "wall_attenuation_db");
    scene.direct_leakage_db = as_double(j, "direct_leakage_db");
    scene.noise_power = as_double(j, "noise_power");
    auto seed = require_key(j, "noise_seed");
    if (!seed.is_number_unsigned()) {
        throw DataFormatError("noise_seed must be an unsigned integer");
    }
    scene.noise_seed = seed.get<std::uint64_t>();

    auto scatterers = require_key(j, "scatterers");
    if (!scatterers.is_array()) {
        throw DataFormatError("scatterers must be an array");
    }
    for (const auto& t : scatterers) {
        ScattererTrack track;
        track.reflectivity = as_double(t, "reflectivity");
        auto label = require_key(t, "label");
        if (!label.is_string()) {
            throw DataFormatError("scatterer label must be a string");
        }
        track.label = label.get<std::string>();
        auto keyframes = require_key(t, "keyframes");
        if (!keyframes.is_array()) {
            throw DataFormatError("keyframes must be an array");
        }
        for (const auto& k : keyframes) {
            if (!k.is_array() || k.size() != 4 || !k[0].is_number() ||
                !k[1].is_number() || !k[2].is_number() || !k[3].is_number()) {
                throw DataFormatError("keyframes must be [t, x, y, z]");
            }
            track.keyframes.push_back(
                {k[0].get<double>(),
                 {k[1].get<double>(), k[2].get<double>(), k[3].get<double>()}});
        }
        scene.scatterers.push_back(std::move(track));
    }
    scene.validate();
    return scene;
}

void write_model_json(const std::filesystem::path& path,
                      const RecognitionModel& model) {
    model.pca.validate();
    model.dict.validate();
    if (model.dict.n_features != model.pca.n_components) {
        throw ShapeError("dictionary features disagree with the PCA output");
    }
    json j;
    j["pca"]["dim"] = model.pca.dim;
    j["pca"]["n_components"] = model.pca.n_components;
    j["pca"]["mean"] = model.pca.mean;
    j["pca"]["components"] = model.pca.components;
    j["pca"]["explained_variance"] = model.pca.explained_variance;
    j["dictionary"]["n_features"] = model.dict.n_features;
    j["dictionary"]["atoms"] = model.dict.atoms;
    j["dictionary"]["labels"] = json::array();
    for (auto label : model.dict.labels) {
        j["dictionary"]["labels"].push_back(to_string(label));
    }
    atomic_write_text(path, j.dump(2) + "\n");
}

RecognitionModel read_model_json(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    RecognitionModel model;

    auto pca = require_key(j, "pca");
    auto dim = require_key(pca, "dim");
    auto n_comp = require_key(pca, "n_components");
    if (!dim.is_number_integer() || !n_comp.is_number_integer()) {
        throw DataFormatError("pca dimensions must be integers");
    }
    model.pca.dim = dim.get<int>();
    model.pca.n_components = n_comp.get<int>();
    if (model.pca.dim < 1 || model.pca.n_components < 1) {
        throw DataFormatError("pca dimensions must be positive");
    }
    const auto d = static_cast<std::size_t>(model.pca.dim);
    const auto c = static_cast<std::size_t>(model.pca.n_components);
    model.pca.mean = as_double_array(pca, "mean", d);
    model.pca.components = as_double_array(pca, "components", c * d);
    model.pca.explained_variance = as_double_array(pca, "explained_variance", c);

    auto dict = require_key(j, "dictionary");
    auto nf = require_key(dict, "n_features");
    if (!nf.is_number_integer()) {
        throw DataFormatError("n_features must be an integer");
    }
    model.dict.n_features = nf.get<int>();
    auto labels = require_key(dict, "labels");
    if (!labels.is_array() || labels.empty()) {
        throw DataFormatError("labels must be a non-empty array");
    }
    for (const auto& l : labels) {
        if (!l.is_string()) throw DataFormatError("labels must be strings");
        try {
            model.dict.labels.push_back(gesture_from_string(l.get<std::string>()));
        } catch (const Error&) {
            throw DataFormatError("unknown gesture label '" +
                                  l.get<std::string>() + "'");
        }
    }
    if (model.dict.n_features < 1) {
        throw DataFormatError("n_features must be positive");
    }
    model.dict.atoms = as_double_array(
        dict, "atoms",
        model.dict.labels.size() * static_cast<std::size_t>(model.dict.n_features));

    model.pca.validate();
    model.dict.validate();
    if (model.dict.n_features != model.pca.n_components) {
        throw DataFormatError("dictionary features disagree with the PCA output");
    }
    return model;
}

void write_intensity_csv(const std::filesystem::path& path,
                         const IntensityTrace& trace) {
    trace.validate();
    std::string text = "t_start_s,intensity\n";
    for (std::size_t i = 0; i < trace.intensity.size(); ++i) {
        text += format_double(trace.t0_s +
                              static_cast<double>(i) * trace.epoch_len_s);
        text += ',';
        text += format_double(trace.intensity[i]);
        text += '\n';
    }
    atomic_write_text(path, text);
}

IntensityTrace read_intensity_csv(const std::filesystem::path& path,
                                  double fallback_epoch_s) {
    const auto lines = read_lines(path);
    if (lines.empty() || lines[0] != "t_start_s,intensity") {
        throw DataFormatError(path.string() +
                              ": expected a t_start_s,intensity header");
    }
    std::vector<double> times;
    IntensityTrace trace;
    for (std::size_t row = 1; row < lines.size(); ++row) {
        if (lines[row].empty()) continue;
        const auto cells = split(lines[row], ',');
        if (cells.size() != 2) {
            throw DataFormatError(path.string() + ": row " +
                                  std::to_string(row) + " is not t,intensity");
        }
        times.push_back(parse_double(cells[0]));
        trace.intensity.push_back(parse_double(cells[1]));
    }
    if (times.empty()) {
        throw DataFormatError(path.string() + ": no data rows");
    }
    trace.t0_s = times[0];
    trace.epoch_len_s = times.size() > 1 ? times[1] - times[0] : fallback_epoch_s;
    if (!(trace.epoch_len_s > 0.0)) {
        throw DataFormatError(path.string() + ": epochs must advance in time");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double expected = trace.t0_s + static_cast<double>(i) * trace.epoch_len_s;
        if (std::abs(times[i] - expected) > 1e-6 * std::max(1.0, trace.epoch_len_s)) {
            throw DataFormatError(path.string() + ": epochs are not contiguous");
        }
    }
    trace.validate();
    return trace;
}

void write_window_csv(const std::filesystem::path& path,
                      const GestureWindow& window) {
    window.validate();
    std::string text;
    for (int t = 0; t < window.n_t; ++t) {
        for (int f = 0; f < window.n_f; ++f) {
            if (f > 0) text += ',';
            text += format_double(window.at(t, f));
        }
        text += '\n';
    }
    atomic_write_text(path, text);
}

GestureWindow read_window_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    GestureWindow window;
    window.n_t = 0;
    std::size_t n_f = 0;
    for (std::size_t row = 0; row < lines.size(); ++row) {
        if (lines[row].empty()) continue;
        const auto cells = split(lines[row], ',');
        if (n_f == 0) {
            n_f = cells.size();
        } else if (cells.size() != n_f) {
            throw DataFormatError(path.string() + ": ragged row " +
                                  std::to_string(row));
        }
        for (const auto& cell : cells) {
            window.slice.push_back(parse_double(cell));
        }
        ++window.n_t;
    }
    if (window.n_t == 0) {
        throw DataFormatError(path.string() + ": empty grid");
    }
    window.n_f = static_cast<int>(n_f);
    // The CSV carries only the grid; give the window a neutral unit span.
    window.start_s = 0.0;
    window.end_s = 1.0;
    window.validate();
    return window;
}

}  // namespace wifisense::io
