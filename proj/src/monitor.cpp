#include "wifisense/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wifisense/errors.hpp"

namespace wifisense {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

}  // namespace

void IntensityTrace::validate() const {
    if (intensity.empty()) throw ValidationError("empty intensity trace");
    if (!(epoch_len_s > 0.0)) {
        throw ValidationError("epoch length must be positive");
    }
    for (double v : intensity) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw ValidationError("intensities must lie in [0, 1]");
        }
    }
}

ActivitySummary summarize(const IntensityTrace& trace, double t1, double t2) {
    trace.validate();
    if (!(0.0 < t1) || !(t1 < t2) || !(t2 < 1.0)) {
        throw ValidationError("thresholds must satisfy 0 < t1 < t2 < 1");
    }
    const double epoch_min = trace.epoch_len_s / 60.0;
    long sed = 0, mod = 0, vig = 0;
    long run = 0, longest = 0;
    for (double v : trace.intensity) {
        if (v < t1) {
            ++sed;
            ++run;
            longest = std::max(longest, run);
        } else {
            run = 0;
            if (v < t2) {
                ++mod;
            } else {
                ++vig;
            }
        }
    }
    ActivitySummary s;
    s.sedentary_min = static_cast<double>(sed) * epoch_min;
    s.moderate_min = static_cast<double>(mod) * epoch_min;
    s.vigorous_min = static_cast<double>(vig) * epoch_min;
    s.total_min = static_cast<double>(sed + mod + vig) * epoch_min;
    s.sleep_min = static_cast<double>(longest) * epoch_min;
    s.sedentary_excl_sleep_min = static_cast<double>(sed - longest) * epoch_min;
    s.total_excl_sleep_min =
        static_cast<double>(sed + mod + vig - longest) * epoch_min;
    s.t1 = t1;
    s.t2 = t2;
    return s;
}

void TransitionModel::validate() const {
    if (states.empty()) throw ValidationError("transition model has no states");
    const auto size = states.size();
    if (prob.size() != size * size) {
        throw ShapeError("transition matrix does not match the state count");
    }
    for (std::size_t from = 0; from < size; ++from) {
        double sum = 0.0;
        for (std::size_t to = 0; to < size; ++to) {
            const double p = prob[from * size + to];
            if (!std::isfinite(p) || p < 0.0) {
                throw ValidationError("transition probabilities must be finite and non-negative");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ValidationError("transition rows must sum to 1");
        }
    }
}

TransitionModel build_transitions(
    const std::vector<std::string>& states,
    const std::vector<std::vector<double>>& counts,
    const std::vector<std::pair<int, int>>& forbidden) {
    const int n = static_cast<int>(states.size());
    if (n == 0) throw ValidationError("no states");
    if (counts.size() != states.size()) {
        throw ShapeError("counts must be one row per state");
    }

    TransitionModel model;
    model.states = states;
    model.prob.assign(states.size() * states.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(i)].size() != states.size()) {
            throw ShapeError("counts must be square");
        }
        for (int j = 0; j < n; ++j) {
            const double c = counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (!std::isfinite(c) || c < 0.0) {
                throw ValidationError("prior counts must be finite and non-negative");
            }
            model.at(i, j) = c;
        }
    }
    for (const auto& [from, to] : forbidden) {
        if (from < 0 || from >= n || to < 0 || to >= n) {
            throw ValidationError("forbidden pair references an unknown state");
        }
        model.at(from, to) = 0.0;
    }
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += model.at(i, j);
        if (sum <= 0.0) {
            throw ValidationError("state row has no admissible transitions");
        }
        for (int j = 0; j < n; ++j) model.at(i, j) /= sum;
    }
    model.validate();
    return model;
}

std::vector<int> viterbi(const std::vector<std::vector<double>>& log_emissions,
                         const TransitionModel& model,
                         const std::vector<double>& initial) {
    model.validate();
    const int n = model.n();
    const auto n_frames = log_emissions.size();
    if (n_frames == 0) throw ValidationError("no frames to decode");
    if (initial.size() != static_cast<std::size_t>(n)) {
        throw ShapeError("initial distribution does not match the state count");
    }
    double isum = 0.0;
    for (double p : initial) {
        if (!std::isfinite(p) || p < 0.0) {
            throw ValidationError("initial probabilities must be finite and non-negative");
        }
        isum += p;
    }
    if (std::abs(isum - 1.0) > 1e-9) {
        throw ValidationError("initial distribution must sum to 1");
    }
    for (const auto& frame : log_emissions) {
        if (frame.size() != static_cast<std::size_t>(n)) {
            throw ShapeError("emission frame does not match the state count");
        }
        bool any = false;
        for (double e : frame) {
            if (std::isnan(e) || e == std::numeric_limits<double>::infinity()) {
                throw ValidationError("emissions must be log-likelihoods");
            }
            if (e > kNegInf) any = true;
        }
        if (!any) throw ValidationError("frame with no admissible state");
    }

    std::vector<double> log_trans(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            log_trans[static_cast<std::size_t>(i) * n + j] = safe_log(model.at(i, j));
        }
    }

    std::vector<double> dp(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
        dp[static_cast<std::size_t>(s)] =
            safe_log(initial[static_cast<std::size_t>(s)]) + log_emissions[0][static_cast<std::size_t>(s)];
    }
    std::vector<std::vector<int>> back(n_frames, std::vector<int>(static_cast<std::size_t>(n), -1));
    std::vector<double> next(static_cast<std::size_t>(n));
    for (std::size_t f = 1; f < n_frames; ++f) {
        for (int j = 0; j < n; ++j) {
            double best = kNegInf;
            int arg = -1;
            for (int i = 0; i < n; ++i) {
                const double cand =
                    dp[static_cast<std::size_t>(i)] + log_trans[static_cast<std::size_t>(i) * n + j];
                if (cand > best) {
                    best = cand;
                    arg = i;
                }
            }
            next[static_cast<std::size_t>(j)] = best + log_emissions[f][static_cast<std::size_t>(j)];
            back[f][static_cast<std::size_t>(j)] = arg;
        }
        dp.swap(next);
    }

    int last = 0;
    for (int s = 1; s < n; ++s) {
        if (dp[static_cast<std::size_t>(s)] > dp[static_cast<std::size_t>(last)]) last = s;
    }
    if (dp[static_cast<std::size_t>(last)] == kNegInf) {
        throw NumericalError("no admissible state path");
    }
    std::vector<int> path(n_frames);
    path[n_frames - 1] = last;
    for (std::size_t f = n_frames - 1; f > 0; --f) {
        path[f - 1] = back[f][static_cast<std::size_t>(path[f])];
    }
    return path;
}

std::vector<double> src_to_emission(const std::vector<double>& residuals,
                                    double beta) {
    if (residuals.empty()) throw ValidationError("no residuals");
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw ValidationError("beta must be positive and finite");
    }
    std::vector<double> logits(residuals.size());
    double peak = kNegInf;
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        if (!std::isfinite(residuals[i]) || residuals[i] < 0.0) {
            throw ValidationError("residuals must be finite and non-negative");
        }
        logits[i] = -beta * residuals[i];
        peak = std::max(peak, logits[i]);
    }
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - peak);
    const double lse = peak + std::log(sum);
    for (double& l : logits) l -= lse;
    return logits;
}

IntensityTrace intensity_from_envelope(
    const std::vector<std::pair<double, double>>& envelope,
    double epoch_len_s) {
    if (envelope.empty()) throw ValidationError("empty envelope");
    if (!(epoch_len_s > 0.0)) {
        throw ValidationError("epoch length must be positive");
    }
    const double t0 = envelope.front().first;
    double prev = t0;
    for (const auto& [t, v] : envelope) {
        if (!std::isfinite(t) || t < prev) {
            throw ValidationError("envelope times must be non-decreasing");
        }
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw ValidationError("envelope intensities must lie in [0, 1]");
        }
        prev = t;
    }

    const auto n_epochs = static_cast<std::size_t>(
        std::floor((envelope.back().first - t0) / epoch_len_s)) + 1;
    std::vector<double> sums(n_epochs, 0.0);
    std::vector<long> counts(n_epochs, 0);
    for (const auto& [t, v] : envelope) {
        auto idx = static_cast<std::size_t>(std::floor((t - t0) / epoch_len_s));
        idx = std::min(idx, n_epochs - 1);
        sums[idx] += v;
        ++counts[idx];
    }
    IntensityTrace trace;
    trace.epoch_len_s = epoch_len_s;
    trace.t0_s = t0;
    trace.intensity.resize(n_epochs);
    for (std::size_t i = 0; i < n_epochs; ++i) {
        trace.intensity[i] = counts[i] > 0 ? sums[i] / static_cast<double>(counts[i]) : 0.0;
    }
    trace.validate();
    return trace;
}

}  // namespace wifisense
