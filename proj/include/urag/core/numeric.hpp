#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "urag/core/errors.hpp"

namespace urag::core {

// Index of the maximum entry; ties break to the lowest index.
inline std::size_t stable_argmax(const std::vector<double>& values) {
    if (values.empty()) throw ArgumentError("stable_argmax: empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

// Shift-invariant softmax; output sums to exactly what the final division yields.
inline std::vector<double> softmax(const std::vector<double>& logits) {
    if (logits.empty()) throw ArgumentError("softmax: empty vector");
    double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

inline double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline void l2_normalize(std::vector<double>& v) {
    double n = l2_norm(v);
    if (n <= 0.0) throw ArgumentError("l2_normalize: zero vector");
    for (auto& x : v) x /= n;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ArgumentError("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace urag::core
