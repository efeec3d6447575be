#pragma once

#include <vector>

#include "wifisense/waveform.hpp"

namespace wifisense {

// Unwrapped phase samples at a fixed epoch spacing.
struct PhaseTrace {
    std::vector<double> phase_rad;
    double epoch_s = 0.0;
    double t0_s = 0.0;

    double duration_s() const {
        return static_cast<double>(phase_rad.size()) * epoch_s;
    }

    void validate() const;
};

struct RespirationEstimate {
    bool detected = false;
    double rate_hz = 0.0;
    double rate_bpm = 0.0;
    double peak_to_peak_rad = 0.0;
    double band_lo_hz = 0.0;
    double band_hi_hz = 0.0;
};

// Phase change produced by a path-length change of displacement_m:
// 2*pi*displacement/wavelength.
double phase_sensitivity(double displacement_m, double wavelength_m);

// Per-epoch phase of the cross-correlation arg(sum ref* . surv), unwrapped
// across epochs.
PhaseTrace extract_phase(const IqTrace& ref, const IqTrace& surv,
                         double epoch_s);

// Sliding-median outlier rejection: a sample deviating from its window
// median by more than k * 1.4826 * MAD is replaced by that median.
// Windows are centered, truncated at the edges, and always taken over the
// input values.
PhaseTrace hampel(const PhaseTrace& trace, int window, double k);

// Dominant in-band periodogram frequency, refined by quadratic peak
// interpolation; peak-to-peak from the 2nd/98th percentiles of the trace.
RespirationEstimate estimate_rate(const PhaseTrace& trace, double f_lo_hz,
                                  double f_hi_hz);

}  // namespace wifisense
