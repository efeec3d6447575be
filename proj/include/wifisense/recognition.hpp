#pragma once

#include <array>
#include <vector>

#include "wifisense/channel.hpp"
#include "wifisense/doppler.hpp"

namespace wifisense {

inline constexpr int kWindowTimeBins = 32;
inline constexpr int kWindowDopplerBins = 41;

// One candidate gesture: a spectrogram slice resampled to a fixed
// [n_t x n_f] grid, row-major over (time, doppler).
struct GestureWindow {
    double start_s = 0.0;
    double end_s = 0.0;
    int n_t = kWindowTimeBins;
    int n_f = kWindowDopplerBins;
    std::vector<double> slice;

    double& at(int t, int f) {
        return slice[static_cast<std::size_t>(t) * n_f + static_cast<std::size_t>(f)];
    }
    const double& at(int t, int f) const {
        return slice[static_cast<std::size_t>(t) * n_f + static_cast<std::size_t>(f)];
    }

    void validate() const;
};

struct FeatureVector {
    std::vector<double> coefficients;
};

// Trained PCA basis; components are row-major [n_components x dim],
// pairwise orthonormal, ordered by non-increasing explained variance.
struct PcaModel {
    int dim = 0;
    int n_components = 0;
    std::vector<double> mean;
    std::vector<double> components;
    std::vector<double> explained_variance;

    void validate() const;
};

// Class-labelled atom matrix for sparse classification; one unit-norm
// column per training sample, stored row-major [n_atoms x n_features].
struct Dictionary {
    int n_features = 0;
    std::vector<double> atoms;
    std::vector<GestureLabel> labels;

    int n_atoms() const { return static_cast<int>(labels.size()); }
    const double* atom(int i) const {
        return atoms.data() + static_cast<std::size_t>(i) * n_features;
    }

    void validate() const;
};

struct SrcResult {
    GestureLabel label = GestureLabel::g1_pick_up;
    std::array<double, kNumGestures> class_residuals{};
    double omp_residual = 0.0;  // ||y - D x|| after the final refit
    bool degenerate = false;    // zero-norm query; label = globally nearest atom
};

// Runs of batches whose off-zero-Doppler energy reaches
// threshold * trace max. Runs separated by less than min_gap_s are merged,
// then runs shorter than min_len_s are dropped; surviving slices are
// bilinearly resampled to [out_t x out_f].
std::vector<GestureWindow> segment(const DopplerSpectrogram& spec,
                                   double threshold, double min_len_s,
                                   double min_gap_s, double exclude_hz = 1.0,
                                   int out_t = kWindowTimeBins,
                                   int out_f = kWindowDopplerBins);

// Bilinear resample of the inclusive batch range [first_batch, last_batch]
// onto an [out_t x out_f] grid; the window span covers the batches'
// hop-centered extent.
GestureWindow window_from_spec(const DopplerSpectrogram& spec,
                               int first_batch, int last_batch,
                               int out_t = kWindowTimeBins,
                               int out_f = kWindowDopplerBins);

PcaModel pca_fit(const std::vector<GestureWindow>& windows, int n_components);

FeatureVector pca_project(const PcaModel& model, const GestureWindow& window);

// Unit-normalized feature vectors as dictionary atoms, one per sample.
Dictionary build_dictionary(const std::vector<FeatureVector>& features,
                            const std::vector<GestureLabel>& labels);

// Sparse representation classification via orthogonal matching pursuit:
// greedy atom selection with a least-squares refit each step, stopping at
// sparsity_k atoms or residual norm < tol. The label minimizes the
// per-class residual ||y - D delta_c(x)||; ties go to the lowest class
// index.
SrcResult src_classify(const FeatureVector& y, const Dictionary& dict,
                       int sparsity_k, double tol = 1e-9);

// Majority vote among the k nearest training points by Euclidean
// distance; ties between classes go to the class of the nearest neighbor
// among the tied classes.
GestureLabel knn_classify(const FeatureVector& y,
                          const std::vector<FeatureVector>& train,
                          const std::vector<GestureLabel>& labels, int k);

// Empirical curve features of the Doppler centroid trajectory:
// {peak |centroid|, span, max |slope| per time step, zero-crossing count}.
// Optional alternative to PCA features; not used by the default pipeline.
std::array<double, 4> curve_features(const GestureWindow& window);

}  // namespace wifisense
