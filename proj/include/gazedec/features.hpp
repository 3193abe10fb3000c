#pragma once

#include "gazedec/core.hpp"

#include <array>
#include <vector>

namespace gazedec {

// The nine global eye movement measures. Durations in ms, saccade
// lengths in word-index units, rates in [0,1], speed in words/second.
struct GlobalFeatures {
    double mean_first_fixation_duration = 0.0;
    double mean_gaze_duration = 0.0;
    double mean_total_reading_time_per_word = 0.0;
    double mean_single_fixation_duration = 0.0;
    double mean_forward_saccade_length = 0.0;
    double regression_rate = 0.0;
    double first_pass_skip_rate = 0.0;
    double refixation_rate = 0.0;
    double reading_speed = 0.0;

    std::array<double, 9> as_array() const {
        return {mean_first_fixation_duration, mean_gaze_duration,
                mean_total_reading_time_per_word, mean_single_fixation_duration,
                mean_forward_saccade_length, regression_rate, first_pass_skip_rate,
                refixation_rate, reading_speed};
    }
    static const std::array<const char*, 9>& names();
};

GlobalFeatures global_features(const Trial& trial);

// Total reading time of the paragraph divided by its word count.
double reading_time_per_word(const Trial& trial);

// Per-fixation feature layout. Off-text fixations carry zeroed word
// properties and incoming class Other; the first fixation has incoming
// length 0 and class Other.
inline constexpr int kFixDim = 13;
inline constexpr int kFixDuration = 0;
inline constexpr int kFixIncomingLength = 1;
inline constexpr int kFixClassOneHot = 2; // 6 slots, SaccadeClass order
inline constexpr int kFixIsFirstPass = 8;
inline constexpr int kFixWordLength = 9;
inline constexpr int kFixLogFrequency = 10;
inline constexpr int kFixSurprisal = 11;
inline constexpr int kFixRelPosition = 12;

struct FixationFeatures {
    size_t rows = 0;
    std::vector<double> data;          // rows x kFixDim, row-major
    std::vector<int> incoming_class;   // per fixation, SaccadeClass as int

    double* row(size_t i) { return data.data() + i * kFixDim; }
    const double* row(size_t i) const { return data.data() + i * kFixDim; }
};

FixationFeatures fixation_features(const Trial& trial);

// Zero mean / unit variance transform estimated on a training set.
// Zero-variance dimensions pass through unscaled.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> sd;     // 1.0 where degenerate
    std::vector<bool> active;   // false where degenerate

    size_t dim() const { return mean.size(); }
    void apply_row(double* row) const;
    void invert_row(double* row) const;
    std::vector<double> apply(const std::vector<double>& row) const;
};

// rows: n x dim row-major.
Standardizer fit_standardizer(const std::vector<double>& rows, size_t dim);

} // namespace gazedec
