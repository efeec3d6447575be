#include "wifisense/recognition.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wifisense/errors.hpp"

namespace wifisense {

namespace {

// Bilinear resampling of a row-major src_r x src_c grid to dst_r x dst_c.
std::vector<double> resample_bilinear(const std::vector<double>& src,
                                      int src_r, int src_c, int dst_r,
                                      int dst_c) {
    auto coord = [](int i, int dst_n, int src_n) {
        if (src_n == 1) return 0.0;
        if (dst_n == 1) return static_cast<double>(src_n - 1) / 2.0;
        return static_cast<double>(i) * (src_n - 1) / (dst_n - 1);
    };
    std::vector<double> dst(static_cast<std::size_t>(dst_r) * dst_c);
    for (int i = 0; i < dst_r; ++i) {
        const double u = coord(i, dst_r, src_r);
        const int u0 = std::min(static_cast<int>(u), src_r - 1);
        const int u1 = std::min(u0 + 1, src_r - 1);
        const double fu = u - u0;
        for (int j = 0; j < dst_c; ++j) {
            const double v = coord(j, dst_c, src_c);
            const int v0 = std::min(static_cast<int>(v), src_c - 1);
            const int v1 = std::min(v0 + 1, src_c - 1);
            const double fv = v - v0;
            auto s = [&](int r, int c) {
                return src[static_cast<std::size_t>(r) * src_c +
                           static_cast<std::size_t>(c)];
            };
            dst[static_cast<std::size_t>(i) * dst_c + static_cast<std::size_t>(j)] =
                (1.0 - fu) * ((1.0 - fv) * s(u0, v0) + fv * s(u0, v1)) +
                fu * ((1.0 - fv) * s(u1, v0) + fv * s(u1, v1));
        }
    }
    return dst;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(
        v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void GestureWindow::validate() const {
    if (!(end_s > start_s)) throw ValidationError("window must have positive span");
    if (n_t < 1 || n_f < 1) throw ValidationError("window grid must be non-empty");
    if (slice.size() != static_cast<std::size_t>(n_t) * n_f) {
        throw ShapeError("window slice does not match its grid");
    }
    for (double v : slice) {
        if (!std::isfinite(v)) throw ValidationError("non-finite window value");
    }
}

void PcaModel::validate() const {
    if (dim < 1 || n_components < 1 || n_components > dim) {
        throw ValidationError("bad PCA dimensions");
    }
    if (mean.size() != static_cast<std::size_t>(dim) ||
        components.size() != static_cast<std::size_t>(n_components) * dim ||
        explained_variance.size() != static_cast<std::size_t>(n_components)) {
        throw ShapeError("PCA storage does not match dimensions");
    }
    for (std::size_t i = 1; i < explained_variance.size(); ++i) {
        if (explained_variance[i] > explained_variance[i - 1] + 1e-12) {
            throw ValidationError("explained variance must be non-increasing");
        }
    }
    for (int a = 0; a < n_components; ++a) {
        for (int b = a; b < n_components; ++b) {
            double dot = 0.0;
            for (int d = 0; d < dim; ++d) {
                dot += components[static_cast<std::size_t>(a) * dim + d] *
                       components[static_cast<std::size_t>(b) * dim + d];
            }
            const double expected = a == b ? 1.0 : 0.0;
            if (std::abs(dot - expected) > 1e-8) {
                throw ValidationError("components are not orthonormal");
            }
        }
    }
}

void Dictionary::validate() const {
    if (n_features < 1 || labels.empty()) {
        throw ValidationError("empty dictionary");
    }
    if (atoms.size() != labels.size() * static_cast<std::size_t>(n_features)) {
        throw ShapeError("dictionary storage does not match dimensions");
    }
    for (int i = 0; i < n_atoms(); ++i) {
        double norm2 = 0.0;
        for (int d = 0; d < n_features; ++d) {
            norm2 += atom(i)[d] * atom(i)[d];
        }
        if (std::abs(std::sqrt(norm2) - 1.0) > 1e-9) {
            throw ValidationError("dictionary atoms must be unit norm");
        }
    }
}

namespace {

double batch_hop_s(const DopplerSpectrogram& spec) {
    if (spec.n_batches() > 1) {
        return spec.batch_times_s[1] - spec.batch_times_s[0];
    }
    return spec.resolution_hz > 0.0 ? 1.0 / spec.resolution_hz : 1.0;
}

}  // namespace

GestureWindow window_from_spec(const DopplerSpectrogram& spec,
                               int first_batch, int last_batch, int out_t,
                               int out_f) {
    spec.validate();
    if (first_batch < 0 || last_batch < first_batch ||
        last_batch >= spec.n_batches()) {
        throw RangeError("batch range outside the spectrogram");
    }
    if (out_t < 1 || out_f < 1) {
        throw ValidationError("output grid must be non-empty");
    }
    const int nf = spec.n_doppler();
    const int count = last_batch - first_batch + 1;
    const double hop = batch_hop_s(spec);

    GestureWindow w;
    w.start_s =
        spec.batch_times_s[static_cast<std::size_t>(first_batch)] - hop / 2.0;
    w.end_s =
        spec.batch_times_s[static_cast<std::size_t>(last_batch)] + hop / 2.0;
    w.n_t = out_t;
    w.n_f = out_f;
    std::vector<double> src(static_cast<std::size_t>(count) * nf);
    for (int b = 0; b < count; ++b) {
        for (int f = 0; f < nf; ++f) {
            src[static_cast<std::size_t>(b) * nf + static_cast<std::size_t>(f)] =
                spec.at(first_batch + b, f);
        }
    }
    w.slice = resample_bilinear(src, count, nf, out_t, out_f);
    w.validate();
    return w;
}

std::vector<GestureWindow> segment(const DopplerSpectrogram& spec,
                                   double threshold, double min_len_s,
                                   double min_gap_s, double exclude_hz,
                                   int out_t, int out_f) {
    if (spec.magnitudes.empty()) throw ShapeError("empty spectrogram");
    spec.validate();
    if (!(threshold > 0.0) || !(threshold < 1.0)) {
        throw ValidationError("threshold must be in (0, 1)");
    }
    if (min_len_s < 0.0 || min_gap_s < 0.0) {
        throw ValidationError("durations must be non-negative");
    }
    if (out_t < 1 || out_f < 1) {
        throw ValidationError("output grid must be non-empty");
    }

    const int nb = spec.n_batches();
    const int nf = spec.n_doppler();
    std::vector<double> energy(static_cast<std::size_t>(nb), 0.0);
    double max_energy = 0.0;
    for (int b = 0; b < nb; ++b) {
        double e = 0.0;
        for (int f = 0; f < nf; ++f) {
            if (std::abs(spec.doppler_axis_hz[static_cast<std::size_t>(f)]) >
                exclude_hz) {
                e += spec.at(b, f);
            }
        }
        energy[static_cast<std::size_t>(b)] = e;
        max_energy = std::max(max_energy, e);
    }
    if (max_energy <= 0.0) return {};

    const double hop = batch_hop_s(spec);

    // Maximal runs of active batches.
    struct Run {
        int first;
        int last;
    };
    std::vector<Run> runs;
    const double cut = threshold * max_energy;
    for (int b = 0; b < nb; ++b) {
        if (energy[static_cast<std::size_t>(b)] < cut) continue;
        if (!runs.empty() && runs.back().last == b - 1) {
            runs.back().last = b;
        } else {
            runs.push_back({b, b});
        }
    }

    // Merge across short gaps first so a brief dip inside one gesture does
    // not split it, then drop runs that are still too short.
    std::vector<Run> merged;
    for (const Run& r : runs) {
        if (!merged.empty() &&
            static_cast<double>(r.first - merged.back().last - 1) * hop <
                min_gap_s) {
            merged.back().last = r.last;
        } else {
            merged.push_back(r);
        }
    }

    std::vector<GestureWindow> windows;
    for (const Run& r : merged) {
        const int count = r.last - r.first + 1;
        if (static_cast<double>(count) * hop < min_len_s) continue;
        windows.push_back(window_from_spec(spec, r.first, r.last, out_t, out_f));
    }
    return windows;
}

PcaModel pca_fit(const std::vector<GestureWindow>& windows, int n_components) {
    if (n_components < 1) throw ValidationError("n_components must be >= 1");
    if (windows.size() < static_cast<std::size_t>(n_components) + 1) {
        throw ValidationError("need at least n_components + 1 windows");
    }
    const int n_t = windows.front().n_t;
    const int n_f = windows.front().n_f;
    const int dim = n_t * n_f;
    if (n_components > dim) {
        throw ValidationError("n_components exceeds the window dimension");
    }
    for (const auto& w : windows) {
        w.validate();
        if (w.n_t != n_t || w.n_f != n_f) {
            throw ShapeError("windows disagree in grid size");
        }
    }

    const auto n = static_cast<Eigen::Index>(windows.size());
    Eigen::MatrixXd x(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        x.row(i) = to_eigen(windows[static_cast<std::size_t>(i)].slice);
    }
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
    const auto& v = svd.matrixV();
    const auto& sigma = svd.singularValues();

    PcaModel model;
    model.dim = dim;
    model.n_components = n_components;
    model.mean.assign(mean.data(), mean.data() + dim);
    model.components.resize(static_cast<std::size_t>(n_components) * dim);
    model.explained_variance.resize(static_cast<std::size_t>(n_components));
    for (int c = 0; c < n_components; ++c) {
        Eigen::VectorXd comp = v.col(c);
        // Deterministic sign: the largest-magnitude coordinate is positive.
        Eigen::Index max_idx = 0;
        comp.cwiseAbs().maxCoeff(&max_idx);
        if (comp(max_idx) < 0.0) comp = -comp;
        for (int d = 0; d < dim; ++d) {
            model.components[static_cast<std::size_t>(c) * dim + d] = comp(d);
        }
        const double s = sigma(c);
        model.explained_variance[static_cast<std::size_t>(c)] =
            s * s / static_cast<double>(n - 1);
    }
    model.validate();
    return model;
}

FeatureVector pca_project(const PcaModel& model, const GestureWindow& window) {
    window.validate();
    if (window.n_t * window.n_f != model.dim) {
        throw ShapeError("window does not match the PCA input size");
    }
    const Eigen::VectorXd centered =
        to_eigen(window.slice) - to_eigen(model.mean);
    FeatureVector out;
    out.coefficients.resize(static_cast<std::size_t>(model.n_components));
    for (int c = 0; c < model.n_components; ++c) {
        const Eigen::Map<const Eigen::VectorXd> comp(
            model.components.data() + static_cast<std::size_t>(c) * model.dim,
            model.dim);
        out.coefficients[static_cast<std::size_t>(c)] = comp.dot(centered);
    }
    return out;
}

Dictionary build_dictionary(const std::vector<FeatureVector>& features,
                            const std::vector<GestureLabel>& labels) {
    if (features.empty() || features.size() != labels.size()) {
        throw ValidationError("features and labels must align and be non-empty");
    }
    const auto dim = features.front().coefficients.size();
    Dictionary dict;
    dict.n_features = static_cast<int>(dim);
    dict.labels = labels;
    dict.atoms.resize(features.size() * dim);
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].coefficients.size() != dim) {
            throw ShapeError("feature vectors disagree in length");
        }
        double norm = 0.0;
        for (double v : features[i].coefficients) norm += v * v;
        norm = std::sqrt(norm);
        if (norm <= 0.0) {
            throw ValidationError("zero-norm training feature");
        }
        for (std::size_t d = 0; d < dim; ++d) {
            dict.atoms[i * dim + d] = features[i].coefficients[d] / norm;
        }
    }
    dict.validate();
    return dict;
}

SrcResult src_classify(const FeatureVector& y, const Dictionary& dict,
                       int sparsity_k, double tol) {
    dict.validate();
    if (sparsity_k < 1 || sparsity_k > dict.n_atoms()) {
        throw ValidationError("sparsity_k must be in [1, n_atoms]");
    }
    if (static_cast<int>(y.coefficients.size()) != dict.n_features) {
        throw ShapeError("query does not match the dictionary feature size");
    }

    const Eigen::VectorXd yv = to_eigen(y.coefficients);
    SrcResult result;
    if (yv.norm() == 0.0) {
        // All unit-norm atoms are equidistant from the origin; report the
        // first and flag it.
        result.label = dict.labels.front();
        result.degenerate = true;
        return result;
    }

    const int n_atoms = dict.n_atoms();
    const int nf = dict.n_features;
    Eigen::MatrixXd a(nf, n_atoms);
    for (int i = 0; i < n_atoms; ++i) {
        for (int d = 0; d < nf; ++d) {
            a(d, i) = dict.atom(i)[d];
        }
    }

    std::vector<int> support;
    Eigen::VectorXd coeffs;
    Eigen::VectorXd residual = yv;
    while (static_cast<int>(support.size()) < sparsity_k &&
           residual.norm() >= tol) {
        int best = -1;
        double best_corr = 0.0;
        for (int i = 0; i < n_atoms; ++i) {
            if (std::find(support.begin(), support.end(), i) != support.end()) {
                continue;
            }
            const double corr = std::abs(a.col(i).dot(residual));
            if (corr > best_corr) {
                best_corr = corr;
                best = i;
            }
        }
        if (best < 0) break;  // residual orthogonal to every remaining atom
        support.push_back(best);

        Eigen::MatrixXd sub(nf, static_cast<Eigen::Index>(support.size()));
        for (std::size_t s = 0; s < support.size(); ++s) {
            sub.col(static_cast<Eigen::Index>(s)) =
                a.col(support[s]);
        }
        coeffs = sub.colPivHouseholderQr().solve(yv);
        residual = yv - sub * coeffs;
    }
    result.omp_residual = residual.norm();

    for (int c = 0; c < kNumGestures; ++c) {
        Eigen::VectorXd approx = Eigen::VectorXd::Zero(nf);
        for (std::size_t s = 0; s < support.size(); ++s) {
            if (dict.labels[static_cast<std::size_t>(support[s])] ==
                static_cast<GestureLabel>(c)) {
                approx += coeffs(static_cast<Eigen::Index>(s)) * a.col(support[s]);
            }
        }
        result.class_residuals[static_cast<std::size_t>(c)] =
            (yv - approx).norm();
    }

    int best_class = 0;
    for (int c = 1; c < kNumGestures; ++c) {
        if (result.class_residuals[static_cast<std::size_t>(c)] <
            result.class_residuals[static_cast<std::size_t>(best_class)]) {
            best_class = c;
        }
    }
    result.label = static_cast<GestureLabel>(best_class);
    return result;
}

GestureLabel knn_classify(const FeatureVector& y,
                          const std::vector<FeatureVector>& train,
                          const std::vector<GestureLabel>& labels, int k) {
    if (train.empty()) throw ValidationError("empty training set");
    if (train.size() != labels.size()) {
        throw ValidationError("training features and labels must align");
    }
    if (k < 1 || k % 2 == 0 || k > static_cast<int>(train.size())) {
        throw ValidationError("k must be odd and within the training size");
    }

    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (train[i].coefficients.size() != y.coefficients.size()) {
            throw ShapeError("feature sizes disagree");
        }
        double d2 = 0.0;
        for (std::size_t d = 0; d < y.coefficients.size(); ++d) {
            const double diff = y.coefficients[d] - train[i].coefficients[d];
            d2 += diff * diff;
        }
        order.emplace_back(d2, i);
    }
    std::sort(order.begin(), order.end());

    std::array<int, kNumGestures> votes{};
    for (int i = 0; i < k; ++i) {
        ++votes[static_cast<std::size_t>(labels[order[static_cast<std::size_t>(i)].second])];
    }
    const int top = *std::max_element(votes.begin(), votes.end());
    // On a tie between classes, side with the class of the closest
    // neighbor among the tied classes.
    for (int i = 0; i < k; ++i) {
        const auto label = labels[order[static_cast<std::size_t>(i)].second];
        if (votes[static_cast<std::size_t>(label)] == top) return label;
    }
    return labels[order[0].second];
}

std::array<double, 4> curve_features(const GestureWindow& window) {
    window.validate();
    const double center = (window.n_f - 1) / 2.0;
    std::vector<double> centroid(static_cast<std::size_t>(window.n_t), 0.0);
    for (int t = 0; t < window.n_t; ++t) {
        double mass = 0.0, moment = 0.0;
        for (int f = 0; f < window.n_f; ++f) {
            mass += window.at(t, f);
            moment += (f - center) * window.at(t, f);
        }
        centroid[static_cast<std::size_t>(t)] = mass > 0.0 ? moment / mass : 0.0;
    }

    double peak = 0.0, lo = centroid[0], hi = centroid[0], slope = 0.0;
    int crossings = 0;
    for (std::size_t t = 0; t < centroid.size(); ++t) {
        peak = std::max(peak, std::abs(centroid[t]));
        lo = std::min(lo, centroid[t]);
        hi = std::max(hi, centroid[t]);
        if (t > 0) {
            slope = std::max(slope, std::abs(centroid[t] - centroid[t - 1]));
            if (centroid[t - 1] * centroid[t] < 0.0) ++crossings;
        }
    }
    return {peak, hi - lo, slope, static_cast<double>(crossings)};
}

}  // namespace wifisense
