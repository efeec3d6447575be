#pragma once

#include <string>
#include <utility>
#include <vector>

namespace wifisense {

// Contiguous per-epoch activity intensities in [0, 1].
struct IntensityTrace {
    std::vector<double> intensity;
    double epoch_len_s = 60.0;
    double t0_s = 0.0;

    double duration_min() const {
        return static_cast<double>(intensity.size()) * epoch_len_s / 60.0;
    }

    void validate() const;
};

// Three-level daily activity statistics, in minutes. The *_excl_sleep
// variants subtract the single longest consecutive sedentary run.
struct ActivitySummary {
    double sedentary_min = 0.0;
    double moderate_min = 0.0;
    double vigorous_min = 0.0;
    double total_min = 0.0;
    double sleep_min = 0.0;
    double sedentary_excl_sleep_min = 0.0;
    double total_excl_sleep_min = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
};

// Bins each epoch by intensity: [0, t1) sedentary, [t1, t2) moderate,
// [t2, 1] vigorous.
ActivitySummary summarize(const IntensityTrace& trace, double t1 = 0.4,
                          double t2 = 0.7);

// Row-stochastic state transition matrix with hard-forbidden entries.
struct TransitionModel {
    std::vector<std::string> states;
    std::vector<double> prob;  // row-major [n x n]

    int n() const { return static_cast<int>(states.size()); }
    double& at(int from, int to) {
        return prob[static_cast<std::size_t>(from) * states.size() +
                    static_cast<std::size_t>(to)];
    }
    const double& at(int from, int to) const {
        return prob[static_cast<std::size_t>(from) * states.size() +
                    static_cast<std::size_t>(to)];
    }

    void validate() const;
};

// Row-normalized prior counts with the forbidden entries zeroed first.
TransitionModel build_transitions(
    const std::vector<std::string>& states,
    const std::vector<std::vector<double>>& counts,
    const std::vector<std::pair<int, int>>& forbidden);

// Maximum a-posteriori state path in the log domain;
// log_emissions is [n_frames][n_states]. Ties break toward the lower
// state index.
std::vector<int> viterbi(const std::vector<std::vector<double>>& log_emissions,
                         const TransitionModel& model,
                         const std::vector<double>& initial);

// Per-class log-likelihoods from SRC residuals: log softmax of
// -beta * residual.
std::vector<double> src_to_emission(const std::vector<double>& residuals,
                                    double beta = 5.0);

// Averages envelope intensities into fixed epochs starting at the first
// sample time; epochs with no samples get intensity 0.
IntensityTrace intensity_from_envelope(
    const std::vector<std::pair<double, double>>& envelope,
    double epoch_len_s);

}  // namespace wifisense
