#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "urag/core/types.hpp"

namespace urag::conformal {

using core::OptionDistribution;
using core::PredictionSet;
using core::ScoreMethod;

// Calibrated conformal threshold for one score method.
struct CalibrationModel {
    ScoreMethod method = ScoreMethod::LAC;
    double alpha = 0.1;
    std::size_t n = 0;     // calibration count
    double q_hat = 0.0;    // +inf when ceil((n+1)(1-alpha)) > n

    bool infinite() const { return std::isinf(q_hat); }
};

struct ScoredInstance {
    std::string instance_id;
    OptionDistribution distribution;
    std::size_t gold_index = 0;
};

// Nonconformity of the candidate option: 1 - p_c.
double lac_score(const OptionDistribution& dist, std::size_t option_index);

// Cumulative mass of all options at least as probable as the candidate
// (ties included via the >= comparison on probabilities).
double aps_score(const OptionDistribution& dist, std::size_t option_index);

double nonconformity(ScoreMethod method, const OptionDistribution& dist, std::size_t option_index);

// Finite-sample quantile calibration: q_hat is the ceil((n+1)(1-alpha))-th
// smallest gold-option score, or +inf when that rank exceeds n.
CalibrationModel calibrate(const std::vector<ScoredInstance>& scored, ScoreMethod method,
                           double alpha);

// All options whose nonconformity is <= q_hat; the +inf sentinel yields the
// full option set. force_nonempty inserts the argmax into an empty set.
PredictionSet predict_set(const CalibrationModel& model, const OptionDistribution& dist,
                          bool force_nonempty = false);

// {method, alpha, n, q_hat} record file; q_hat serialized as null when infinite.
void save_model(const CalibrationModel& model, const std::string& path);
CalibrationModel load_model(const std::string& path);

}  // namespace urag::conformal
