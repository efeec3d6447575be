#include "wifisense/recognition.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "doctest.h"
#include "wifisense/errors.hpp"
#include "wifisense/rng.hpp"

using namespace wifisense;

namespace {

// Hand-built spectrogram: nb batches at 0.25 s hop, 5-bin axis so that
// exclude_hz = 1 keeps exactly the +-2 Hz columns.
DopplerSpectrogram make_spec(int nb, double hop = 0.25) {
    DopplerSpectrogram spec;
    spec.doppler_axis_hz = {-2.0, -1.0, 0.0, 1.0, 2.0};
    spec.resolution_hz = 2.0;
    for (int b = 0; b < nb; ++b) {
        spec.batch_times_s.push_back(hop / 2.0 + b * hop);
    }
    spec.magnitudes.assign(static_cast<std::size_t>(nb) * 5, 0.0);
    return spec;
}

GestureWindow make_window(int n_t, int n_f, std::vector<double> slice) {
    GestureWindow w;
    w.start_s = 0.0;
    w.end_s = 1.0;
    w.n_t = n_t;
    w.n_f = n_f;
    w.slice = std::move(slice);
    return w;
}

FeatureVector fv(std::vector<double> c) { return FeatureVector{std::move(c)}; }

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Gaussian elimination with partial pivoting on a k x k system; returns
// false on a near-singular matrix.
bool solve_small(std::vector<double> m, std::vector<double> rhs, int k,
                 std::vector<double>& out) {
    for (int col = 0; col < k; ++col) {
        int pivot = col;
        for (int r = col + 1; r < k; ++r) {
            if (std::abs(m[r * k + col]) > std::abs(m[pivot * k + col])) pivot = r;
        }
        if (std::abs(m[pivot * k + col]) < 1e-12) return false;
        for (int c = 0; c < k; ++c) std::swap(m[col * k + c], m[pivot * k + c]);
        std::swap(rhs[col], rhs[pivot]);
        for (int r = col + 1; r < k; ++r) {
            const double f = m[r * k + col] / m[col * k + col];
            for (int c = col; c < k; ++c) m[r * k + c] -= f * m[col * k + c];
            rhs[r] -= f * rhs[col];
        }
    }
    out.assign(static_cast<std::size_t>(k), 0.0);
    for (int r = k - 1; r >= 0; --r) {
        double s = rhs[r];
        for (int c = r + 1; c < k; ++c) s -= m[r * k + c] * out[c];
        out[r] = s / m[r * k + r];
    }
    return true;
}

struct ExhaustiveResult {
    GestureLabel label{};
    std::array<double, kNumGestures> class_residuals{};
    double residual = 0.0;
    bool found = false;
};

// Reference SRC oracle: enumerate every support of size 1..max_k in
// lexicographic order, least-squares fit each via the normal equations,
// keep the strictly smallest residual, then score classes from the
// winning fit exactly as the classifier defines them.
ExhaustiveResult exhaustive_src(const std::vector<double>& y,
                                const Dictionary& dict, int max_k) {
    const int n = dict.n_atoms();
    const int nf = dict.n_features;
    ExhaustiveResult best;
    double best_res = std::numeric_limits<double>::infinity();
    std::vector<int> support;

    auto consider = [&](const std::vector<int>& s) {
        const int k = static_cast<int>(s.size());
        std::vector<double> gram(static_cast<std::size_t>(k) * k);
        std::vector<double> rhs(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                double g = 0.0;
                for (int d = 0; d < nf; ++d) g += dict.atom(s[i])[d] * dict.atom(s[j])[d];
                gram[i * k + j] = g;
            }
            double r = 0.0;
            for (int d = 0; d < nf; ++d) r += dict.atom(s[i])[d] * y[static_cast<std::size_t>(d)];
            rhs[static_cast<std::size_t>(i)] = r;
        }
        std::vector<double> coeff;
        if (!solve_small(gram, rhs, k, coeff)) return;
        double res2 = 0.0;
        for (int d = 0; d < nf; ++d) {
            double v = y[static_cast<std::size_t>(d)];
            for (int i = 0; i < k; ++i) v -= coeff[static_cast<std::size_t>(i)] * dict.atom(s[i])[d];
            res2 += v * v;
        }
        const double res = std::sqrt(res2);
        if (res < best_res) {
            best_res = res;
            best.residual = res;
            best.found = true;
            for (int c = 0; c < kNumGestures; ++c) {
                double r2 = 0.0;
                for (int d = 0; d < nf; ++d) {
                    double v = y[static_cast<std::size_t>(d)];
                    for (int i = 0; i < k; ++i) {
                        if (dict.labels[static_cast<std::size_t>(s[i])] ==
                            static_cast<GestureLabel>(c)) {
                            v -= coeff[static_cast<std::size_t>(i)] * dict.atom(s[i])[d];
                        }
                    }
                    r2 += v * v;
                }
                best.class_residuals[static_cast<std::size_t>(c)] = std::sqrt(r2);
            }
            int arg = 0;
            for (int c = 1; c < kNumGestures; ++c) {
                if (best.class_residuals[static_cast<std::size_t>(c)] <
                    best.class_residuals[static_cast<std::size_t>(arg)]) {
                    arg = c;
                }
            }
            best.label = static_cast<GestureLabel>(arg);
        }
    };

    std::function<void(int, int)> recurse = [&](int start, int remaining) {
        if (!support.empty()) consider(support);
        if (remaining == 0) return;
        for (int i = start; i < n; ++i) {
            support.push_back(i);
            recurse(i + 1, remaining - 1);
            support.pop_back();
        }
    };
    recurse(0, max_k);
    return best;
}

}  // namespace

TEST_CASE("segment: silent spectrogram yields no windows") {
    auto spec = make_spec(12);
    CHECK(segment(spec, 0.5, 0.5, 0.5).empty());
}

TEST_CASE("segment: empty spectrogram is a shape error") {
    DopplerSpectrogram spec;
    CHECK_THROWS_AS(segment(spec, 0.5, 0.5, 0.5), ShapeError);
}

TEST_CASE("segment: parameter validation") {
    auto spec = make_spec(8);
    spec.at(2, 4) = 1.0;
    CHECK_THROWS_AS(segment(spec, 0.0, 0.5, 0.5), ValidationError);
    CHECK_THROWS_AS(segment(spec, 1.0, 0.5, 0.5), ValidationError);
    CHECK_THROWS_AS(segment(spec, 0.5, -0.1, 0.5), ValidationError);
    CHECK_THROWS_AS(segment(spec, 0.5, 0.5, -0.1), ValidationError);
    CHECK_THROWS_AS(segment(spec, 0.5, 0.5, 0.5, 1.0, 0, 3), ValidationError);
}

TEST_CASE("segment: one active burst becomes one window spanning it") {
    auto spec = make_spec(20);
    for (int b = 5; b <= 12; ++b) spec.at(b, 4) = 1.0;
    auto windows = segment(spec, 0.5, 1.0, 0.5);
    REQUIRE(windows.size() == 1);
    CHECK(windows[0].start_s == doctest::Approx(spec.batch_times_s[5] - 0.125));
    CHECK(windows[0].end_s == doctest::Approx(spec.batch_times_s[12] + 0.125));
    CHECK(windows[0].end_s - windows[0].start_s == doctest::Approx(2.0));
    CHECK(windows[0].n_t == kWindowTimeBins);
    CHECK(windows[0].n_f == kWindowDopplerBins);
    CHECK(windows[0].slice.size() ==
          static_cast<std::size_t>(kWindowTimeBins) * kWindowDopplerBins);
}

TEST_CASE("segment: energy inside the exclusion band is ignored") {
    auto spec = make_spec(20);
    // Strong clutter at DC and +-1 Hz everywhere, real burst at +2 Hz.
    for (int b = 0; b < 20; ++b) {
        spec.at(b, 1) = 50.0;
        spec.at(b, 2) = 100.0;
        spec.at(b, 3) = 50.0;
    }
    for (int b = 8; b <= 13; ++b) spec.at(b, 4) = 1.0;
    auto windows = segment(spec, 0.5, 1.0, 0.5);
    REQUIRE(windows.size() == 1);
    CHECK(windows[0].start_s == doctest::Approx(spec.batch_times_s[8] - 0.125));
}

TEST_CASE("segment: gap wider than min_gap keeps bursts separate") {
    auto spec = make_spec(20);
    for (int b = 2; b <= 6; ++b) spec.at(b, 0) = 1.0;
    for (int b = 13; b <= 17; ++b) spec.at(b, 0) = 1.0;
    // Gap is 6 batches = 1.5 s.
    auto separate = segment(spec, 0.5, 1.0, 1.0);
    REQUIRE(separate.size() == 2);
    CHECK(separate[0].end_s <= separate[1].start_s + 1e-12);

    auto merged = segment(spec, 0.5, 1.0, 2.0);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].start_s == doctest::Approx(spec.batch_times_s[2] - 0.125));
    CHECK(merged[0].end_s == doctest::Approx(spec.batch_times_s[17] + 0.125));
}

TEST_CASE("segment: runs merge across short gaps before the length cut") {
    auto spec = make_spec(12);
    // Two 2-batch runs split by a single quiet batch: 0.5 s each, 1.25 s
    // merged. Only the merged run survives min_len 1.0.
    for (int b : {3, 4, 6, 7}) spec.at(b, 4) = 1.0;
    auto windows = segment(spec, 0.5, 1.0, 0.5);
    REQUIRE(windows.size() == 1);
    CHECK(windows[0].end_s - windows[0].start_s == doctest::Approx(1.25));
}

TEST_CASE("segment: short isolated run is dropped") {
    auto spec = make_spec(12);
    spec.at(5, 0) = 1.0;
    CHECK(segment(spec, 0.5, 0.5, 0.1).empty());
}

TEST_CASE("segment: bilinear resample matches hand values") {
    DopplerSpectrogram spec;
    spec.doppler_axis_hz = {-2.0, 0.0, 2.0};
    spec.resolution_hz = 2.0;
    spec.batch_times_s = {0.125, 0.375};
    spec.magnitudes = {4.0, 0.0, 0.0,
                       0.0, 0.0, 8.0};
    auto windows = segment(spec, 0.1, 0.0, 0.0, 1.0, 3, 3);
    REQUIRE(windows.size() == 1);
    const auto& w = windows[0];
    // Middle output row interpolates halfway between the two batches.
    CHECK(w.at(0, 0) == doctest::Approx(4.0));
    CHECK(w.at(1, 0) == doctest::Approx(2.0));
    CHECK(w.at(1, 2) == doctest::Approx(4.0));
    CHECK(w.at(2, 2) == doctest::Approx(8.0));
    CHECK(w.at(1, 1) == doctest::Approx(0.0));

    // Collapsing to a single cell samples the source centre (the -2 Hz
    // column only marks the batches active; at the centre it has no weight).
    DopplerSpectrogram centre = spec;
    centre.magnitudes = {1.0, 4.0, 0.0,
                         1.0, 8.0, 0.0};
    auto one = segment(centre, 0.1, 0.0, 0.0, 1.0, 1, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].at(0, 0) == doctest::Approx(6.0));
}

TEST_CASE("segment: windows are disjoint, ordered, and long enough") {
    Rng rng(0x5e6a13bULL);
    for (int trial = 0; trial < 40; ++trial) {
        const int nb = 10 + static_cast<int>(rng.next_u64() % 30);
        auto spec = make_spec(nb);
        for (int b = 0; b < nb; ++b) {
            for (int f = 0; f < 5; ++f) {
                spec.at(b, f) = rng.uniform() < 0.4 ? 0.0 : rng.uniform(0.0, 5.0);
            }
        }
        const double threshold = rng.uniform(0.2, 0.8);
        const double min_len = rng.uniform(0.0, 1.0);
        const double min_gap = rng.uniform(0.0, 1.0);
        auto windows = segment(spec, threshold, min_len, min_gap, 1.0, 8, 5);
        for (std::size_t i = 0; i < windows.size(); ++i) {
            CHECK(windows[i].end_s - windows[i].start_s >= min_len - 1e-12);
            if (i > 0) CHECK(windows[i].start_s >= windows[i - 1].end_s - 1e-12);
            for (double v : windows[i].slice) CHECK(v >= -1e-12);
        }
    }
}

TEST_CASE("pca: two-dimensional fit matches the hand eigendecomposition") {
    std::vector<GestureWindow> windows = {
        make_window(1, 2, {2.0, 0.0}),
        make_window(1, 2, {-2.0, 0.0}),
        make_window(1, 2, {0.0, 1.0}),
    };
    auto model = pca_fit(windows, 2);
    // Mean (0, 1/3); sample covariance diag(4, 1/3) with zero cross term.
    CHECK(model.mean[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(model.mean[1] == doctest::Approx(1.0 / 3.0));
    CHECK(model.explained_variance[0] == doctest::Approx(4.0));
    CHECK(model.explained_variance[1] == doctest::Approx(1.0 / 3.0));
    CHECK(model.components[0] == doctest::Approx(1.0));
    CHECK(std::abs(model.components[1]) < 1e-9);
    CHECK(std::abs(model.components[2]) < 1e-9);
    CHECK(model.components[3] == doctest::Approx(1.0));

    auto c = pca_project(model, windows[0]);
    CHECK(c.coefficients[0] == doctest::Approx(2.0));
    CHECK(c.coefficients[1] == doctest::Approx(-1.0 / 3.0));

    auto zero = pca_project(model, make_window(1, 2, {0.0, 1.0 / 3.0}));
    CHECK(std::abs(zero.coefficients[0]) < 1e-9);
    CHECK(std::abs(zero.coefficients[1]) < 1e-9);
}

TEST_CASE("pca: rank-1 data concentrates the variance") {
    Rng rng(0x9c0ffeeULL);
    std::vector<double> direction(12);
    for (auto& v : direction) v = rng.gaussian();
    std::vector<GestureWindow> windows;
    for (int i = 0; i < 10; ++i) {
        const double a = rng.uniform(-3.0, 3.0);
        std::vector<double> slice(12);
        for (int d = 0; d < 12; ++d) slice[d] = 5.0 + a * direction[d];
        windows.push_back(make_window(3, 4, std::move(slice)));
    }
    auto model = pca_fit(windows, 3);
    const double total = model.explained_variance[0] +
                         model.explained_variance[1] +
                         model.explained_variance[2];
    CHECK(model.explained_variance[0] / total > 0.999);
}

TEST_CASE("pca: components are orthonormal and diagonalize the training set") {
    Rng rng(0xdecade5ULL);
    std::vector<GestureWindow> windows;
    for (int i = 0; i < 14; ++i) {
        std::vector<double> slice(20);
        for (auto& v : slice) v = rng.uniform(0.0, 4.0);
        windows.push_back(make_window(4, 5, std::move(slice)));
    }
    const int nc = 5;
    auto model = pca_fit(windows, nc);
    model.validate();
    for (int a = 0; a < nc; ++a) {
        for (int b = 0; b < nc; ++b) {
            double g = 0.0;
            for (int d = 0; d < model.dim; ++d) {
                g += model.components[a * model.dim + d] *
                     model.components[b * model.dim + d];
            }
            CHECK(g == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-9));
        }
    }

    // Projected training coefficients must be uncorrelated with variances
    // equal to the reported spectrum.
    std::vector<FeatureVector> proj;
    for (const auto& w : windows) proj.push_back(pca_project(model, w));
    for (int a = 0; a < nc; ++a) {
        for (int b = a; b < nc; ++b) {
            double cov = 0.0;
            for (const auto& p : proj) cov += p.coefficients[a] * p.coefficients[b];
            cov /= static_cast<double>(windows.size() - 1);
            if (a == b) {
                CHECK(cov == doctest::Approx(model.explained_variance[a]));
            } else {
                CHECK(std::abs(cov) < 1e-8);
            }
        }
    }
}

TEST_CASE("pca: full basis reconstructs the input") {
    Rng rng(0xfeedf00dULL);
    std::vector<GestureWindow> windows;
    for (int i = 0; i < 10; ++i) {
        std::vector<double> slice(6);
        for (auto& v : slice) v = rng.uniform(0.0, 2.0);
        windows.push_back(make_window(2, 3, std::move(slice)));
    }
    auto model = pca_fit(windows, 6);
    for (const auto& w : windows) {
        auto c = pca_project(model, w);
        for (int d = 0; d < 6; ++d) {
            double rec = model.mean[d];
            for (int k = 0; k < 6; ++k) {
                rec += c.coefficients[k] * model.components[k * 6 + d];
            }
            CHECK(rec == doctest::Approx(w.slice[d]).epsilon(1e-9));
        }
    }
}

TEST_CASE("pca: input validation") {
    std::vector<GestureWindow> two = {
        make_window(1, 2, {1.0, 0.0}),
        make_window(1, 2, {0.0, 1.0}),
    };
    CHECK_THROWS_AS(pca_fit(two, 2), ValidationError);
    CHECK_THROWS_AS(pca_fit({}, 1), ValidationError);
    CHECK_THROWS_AS(pca_fit(two, 0), ValidationError);

    std::vector<GestureWindow> ragged = {
        make_window(1, 2, {1.0, 0.0}),
        make_window(2, 1, {0.0, 1.0}),
        make_window(1, 2, {1.0, 1.0}),
    };
    CHECK_THROWS_AS(pca_fit(ragged, 1), ShapeError);

    std::vector<GestureWindow> three = {
        make_window(1, 2, {2.0, 0.0}),
        make_window(1, 2, {-2.0, 0.0}),
        make_window(1, 2, {0.0, 1.0}),
    };
    CHECK_THROWS_AS(pca_fit(three, 3), ValidationError);
    auto model = pca_fit(three, 2);
    CHECK_THROWS_AS(pca_project(model, make_window(1, 3, {1.0, 2.0, 3.0})),
                    ShapeError);
}

TEST_CASE("dictionary: atoms are unit-normalized training features") {
    auto dict = build_dictionary({fv({3.0, 4.0}), fv({0.0, -2.0})},
                                 {GestureLabel::g1_pick_up,
                                  GestureLabel::g2_sit_down});
    CHECK(dict.atom(0)[0] == doctest::Approx(0.6));
    CHECK(dict.atom(0)[1] == doctest::Approx(0.8));
    CHECK(dict.atom(1)[0] == doctest::Approx(0.0));
    CHECK(dict.atom(1)[1] == doctest::Approx(-1.0));

    CHECK_THROWS_AS(build_dictionary({fv({0.0, 0.0})},
                                     {GestureLabel::g1_pick_up}),
                    ValidationError);
    CHECK_THROWS_AS(build_dictionary({fv({1.0}), fv({1.0, 2.0})},
                                     {GestureLabel::g1_pick_up,
                                      GestureLabel::g2_sit_down}),
                    ShapeError);
    CHECK_THROWS_AS(build_dictionary({fv({1.0})}, {}), ValidationError);
}

TEST_CASE("src: exact atom match gives a zero class residual") {
    auto dict = build_dictionary(
        {fv({1.0, 0.0, 0.0}), fv({0.0, 1.0, 0.0}), fv({0.0, 0.0, 1.0})},
        {GestureLabel::g1_pick_up, GestureLabel::g2_sit_down,
         GestureLabel::g3_stand_up});
    auto res = src_classify(fv({0.0, 2.5, 0.0}), dict, 1);
    CHECK(res.label == GestureLabel::g2_sit_down);
    CHECK(res.omp_residual == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(res.class_residuals[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(res.class_residuals[0] == doctest::Approx(2.5));
    CHECK(res.class_residuals[2] == doctest::Approx(2.5));
    // Classes with no atoms keep the full query norm as their residual.
    CHECK(res.class_residuals[5] == doctest::Approx(2.5));
    CHECK_FALSE(res.degenerate);
}

TEST_CASE("src: two-atom combination resolved over orthogonal atoms") {
    auto dict = build_dictionary(
        {fv({1.0, 0.0, 0.0, 0.0}), fv({0.0, 1.0, 0.0, 0.0}),
         fv({0.0, 0.0, 1.0, 0.0}), fv({0.0, 0.0, 0.0, 1.0})},
        {GestureLabel::g1_pick_up, GestureLabel::g2_sit_down,
         GestureLabel::g3_stand_up, GestureLabel::g4_fall});
    auto res = src_classify(fv({1.0, 0.5, 0.0, 0.0}), dict, 2);
    CHECK(res.label == GestureLabel::g1_pick_up);
    CHECK(res.omp_residual == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(res.class_residuals[0] == doctest::Approx(0.5));
    CHECK(res.class_residuals[1] == doctest::Approx(1.0));
}

TEST_CASE("src: label is invariant to positive scaling of the query") {
    Rng rng(0xabc123ULL);
    std::vector<FeatureVector> feats;
    std::vector<GestureLabel> labels;
    for (int i = 0; i < 9; ++i) {
        std::vector<double> v(5);
        for (auto& x : v) x = rng.gaussian();
        feats.push_back(fv(std::move(v)));
        labels.push_back(static_cast<GestureLabel>(i % kNumGestures));
    }
    auto dict = build_dictionary(feats, labels);
    for (int t = 0; t < 10; ++t) {
        std::vector<double> y(5);
        for (auto& x : y) x = rng.gaussian();
        auto a = src_classify(fv(y), dict, 3);
        for (auto& x : y) x *= 7.5;
        auto b = src_classify(fv(y), dict, 3);
        CHECK(a.label == b.label);
    }
}

TEST_CASE("src: pursuit residual is non-increasing in the sparsity budget") {
    Rng rng(0x7777777ULL);
    std::vector<FeatureVector> feats;
    std::vector<GestureLabel> labels;
    for (int i = 0; i < 8; ++i) {
        std::vector<double> v(5);
        for (auto& x : v) x = rng.gaussian();
        feats.push_back(fv(std::move(v)));
        labels.push_back(static_cast<GestureLabel>(i % kNumGestures));
    }
    auto dict = build_dictionary(feats, labels);
    for (int t = 0; t < 8; ++t) {
        std::vector<double> y(5);
        for (auto& x : y) x = rng.gaussian();
        double prev = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= 5; ++k) {
            auto res = src_classify(fv(y), dict, k);
            CHECK(res.omp_residual <= prev + 1e-12);
            prev = res.omp_residual;
        }
    }
}

TEST_CASE("src: degenerate zero query is flagged") {
    auto dict = build_dictionary(
        {fv({1.0, 0.0}), fv({0.0, 1.0})},
        {GestureLabel::g4_fall, GestureLabel::g5_stand_after_fall});
    auto res = src_classify(fv({0.0, 0.0}), dict, 1);
    CHECK(res.degenerate);
    CHECK(res.label == GestureLabel::g4_fall);
}

TEST_CASE("src: argument validation") {
    auto dict = build_dictionary(
        {fv({1.0, 0.0}), fv({0.0, 1.0})},
        {GestureLabel::g1_pick_up, GestureLabel::g2_sit_down});
    CHECK_THROWS_AS(src_classify(fv({1.0, 0.0}), dict, 0), ValidationError);
    CHECK_THROWS_AS(src_classify(fv({1.0, 0.0}), dict, 3), ValidationError);
    CHECK_THROWS_AS(src_classify(fv({1.0, 0.0, 0.0}), dict, 1), ShapeError);
    Dictionary bad = dict;
    bad.atoms[0] = 2.0;
    CHECK_THROWS_AS(src_classify(fv({1.0, 0.0}), bad, 1), ValidationError);
}

TEST_CASE("src: pursuit agrees with exhaustive search on margined instances") {
    Rng rng(0xc1a551f1ULL);
    int kept = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int n_atoms = 6 + static_cast<int>(rng.next_u64() % 3);
        // Feature-space dimension of the default pipeline. Low mutual
        // coherence keeps the greedy pursuit on the planted support.
        const int dim = 20;
        std::vector<FeatureVector> feats;
        std::vector<GestureLabel> labels;
        for (int i = 0; i < n_atoms; ++i) {
            std::vector<double> v(static_cast<std::size_t>(dim));
            bool accepted = false;
            while (!accepted) {
                double norm = 0.0;
                for (auto& x : v) {
                    x = rng.gaussian();
                    norm += x * x;
                }
                norm = std::sqrt(norm);
                for (auto& x : v) x /= norm;
                accepted = true;
                for (const auto& prev : feats) {
                    if (std::abs(dot(prev.coefficients, v)) > 0.4) {
                        accepted = false;
                        break;
                    }
                }
            }
            feats.push_back(fv(v));
            labels.push_back(static_cast<GestureLabel>(i % kNumGestures));
        }
        auto dict = build_dictionary(feats, labels);

        const int true_k = 1 + static_cast<int>(rng.next_u64() % 2);
        std::vector<int> chosen;
        while (static_cast<int>(chosen.size()) < true_k) {
            int c = static_cast<int>(rng.next_u64() % n_atoms);
            if (std::find(chosen.begin(), chosen.end(), c) == chosen.end()) {
                chosen.push_back(c);
            }
        }
        std::vector<double> y(static_cast<std::size_t>(dim), 0.0);
        for (int c : chosen) {
            const double amp =
                (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.8, 1.5);
            for (int d = 0; d < dim; ++d) y[static_cast<std::size_t>(d)] += amp * dict.atom(c)[d];
        }
        for (auto& x : y) x += 0.02 * rng.gaussian();

        auto oracle = exhaustive_src(y, dict, 2);
        REQUIRE(oracle.found);
        auto sorted = oracle.class_residuals;
        std::sort(sorted.begin(), sorted.end());
        if (sorted[1] <= 0.0 || (sorted[1] - sorted[0]) / sorted[1] < 0.1) {
            continue;  // ambiguous instance, outside the agreement contract
        }
        ++kept;
        auto res = src_classify(fv(y), dict, 2);
        CHECK(res.label == oracle.label);
    }
    CHECK(kept >= 25);
}

TEST_CASE("knn: nearest neighbor and majority vote") {
    std::vector<FeatureVector> train = {fv({0.0, 0.0}), fv({1.0, 0.0})};
    std::vector<GestureLabel> labels = {GestureLabel::g1_pick_up,
                                        GestureLabel::g2_sit_down};
    CHECK(knn_classify(fv({0.1, 0.0}), train, labels, 1) ==
          GestureLabel::g1_pick_up);
    CHECK(knn_classify(fv({0.9, 0.0}), train, labels, 1) ==
          GestureLabel::g2_sit_down);

    std::vector<FeatureVector> three = {fv({0.1, 0.0}), fv({0.2, 0.0}),
                                        fv({0.3, 0.0})};
    std::vector<GestureLabel> tl = {GestureLabel::g1_pick_up,
                                    GestureLabel::g2_sit_down,
                                    GestureLabel::g2_sit_down};
    CHECK(knn_classify(fv({0.0, 0.0}), three, tl, 3) ==
          GestureLabel::g2_sit_down);
}

TEST_CASE("knn: class ties fall to the nearest tied neighbor") {
    // Three-way tie at k = 3; g3 sits closest despite appearing last.
    std::vector<FeatureVector> train = {fv({2.0, 0.0}), fv({3.0, 0.0}),
                                        fv({1.0, 0.0})};
    std::vector<GestureLabel> labels = {GestureLabel::g1_pick_up,
                                        GestureLabel::g2_sit_down,
                                        GestureLabel::g3_stand_up};
    CHECK(knn_classify(fv({0.0, 0.0}), train, labels, 3) ==
          GestureLabel::g3_stand_up);
}

TEST_CASE("knn: equal distances break on training index") {
    std::vector<FeatureVector> train = {fv({1.0, 0.0}), fv({-1.0, 0.0})};
    std::vector<GestureLabel> labels = {GestureLabel::g2_sit_down,
                                        GestureLabel::g1_pick_up};
    CHECK(knn_classify(fv({0.0, 0.0}), train, labels, 1) ==
          GestureLabel::g2_sit_down);
}

TEST_CASE("knn: argument validation") {
    std::vector<FeatureVector> train = {fv({0.0}), fv({1.0}), fv({2.0})};
    std::vector<GestureLabel> labels = {GestureLabel::g1_pick_up,
                                        GestureLabel::g2_sit_down,
                                        GestureLabel::g3_stand_up};
    CHECK_THROWS_AS(knn_classify(fv({0.0}), train, labels, 2), ValidationError);
    CHECK_THROWS_AS(knn_classify(fv({0.0}), train, labels, 5), ValidationError);
    CHECK_THROWS_AS(knn_classify(fv({0.0}), {}, {}, 1), ValidationError);
    CHECK_THROWS_AS(knn_classify(fv({0.0, 1.0}), train, labels, 1), ShapeError);
    std::vector<GestureLabel> short_labels = {GestureLabel::g1_pick_up};
    CHECK_THROWS_AS(knn_classify(fv({0.0}), train, short_labels, 1),
                    ValidationError);
}

TEST_CASE("curve features: centroid trajectory statistics") {
    auto w = make_window(2, 3, {4.0, 0.0, 0.0,
                                0.0, 0.0, 8.0});
    auto f = curve_features(w);
    CHECK(f[0] == doctest::Approx(1.0));  // peak |centroid|
    CHECK(f[1] == doctest::Approx(2.0));  // span
    CHECK(f[2] == doctest::Approx(2.0));  // max step
    CHECK(f[3] == doctest::Approx(1.0));  // one sign change

    auto quiet = make_window(3, 3, {4.0, 0.0, 0.0,
                                    0.0, 0.0, 0.0,
                                    0.0, 0.0, 4.0});
    auto g = curve_features(quiet);
    CHECK(g[0] == doctest::Approx(1.0));
    CHECK(g[1] == doctest::Approx(2.0));
    CHECK(g[2] == doctest::Approx(1.0));
    CHECK(g[3] == doctest::Approx(0.0));  // zero row pins the middle to 0
}
