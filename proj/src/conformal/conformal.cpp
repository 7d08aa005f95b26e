#include "urag/conformal/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "urag/core/errors.hpp"

namespace urag::conformal {

using nlohmann::json;

double lac_score(const OptionDistribution& dist, std::size_t option_index) {
    if (option_index >= dist.size())
        throw core::ArgumentError("lac_score: option index out of range");
    return 1.0 - dist[option_index];
}

double aps_score(const OptionDistribution& dist, std::size_t option_index) {
    if (option_index >= dist.size())
        throw core::ArgumentError("aps_score: option index out of range");
    double p_c = dist[option_index];
    double mass = 0.0;
    for (double p : dist.probs) {
        if (p >= p_c) mass += p;
    }
    return mass;
}

double nonconformity(ScoreMethod method, const OptionDistribution& dist,
                     std::size_t option_index) {
    return method == ScoreMethod::LAC ? lac_score(dist, option_index)
                                      : aps_score(dist, option_index);
}

CalibrationModel calibrate(const std::vector<ScoredInstance>& scored, ScoreMethod method,
                           double alpha) {
    if (scored.empty()) throw core::ArgumentError("calibrate: empty calibration set");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw core::ArgumentError("calibrate: alpha must lie in (0,1)");

    std::vector<double> scores;
    scores.reserve(scored.size());
    for (const auto& s : scored) scores.push_back(nonconformity(method, s.distribution, s.gold_index));
    std::sort(scores.begin(), scores.end());

    const std::size_t n = scores.size();
    // The 1e-9 shift keeps exact-integer ranks (e.g. 20 * 0.9) from being
    // pushed up a slot by floating-point noise in (n+1)(1-alpha).
    double raw = static_cast<double>(n + 1) * (1.0 - alpha);
    auto rank = static_cast<std::size_t>(std::ceil(raw - 1e-9));

    CalibrationModel model;
    model.method = method;
    model.alpha = alpha;
    model.n = n;
    model.q_hat = (rank > n) ? std::numeric_limits<double>::infinity() : scores[rank - 1];
    return model;
}

PredictionSet predict_set(const CalibrationModel& model, const OptionDistribution& dist,
                          bool force_nonempty) {
    PredictionSet set;
    set.method = model.method;
    set.threshold = model.q_hat;
    for (std::size_t c = 0; c < dist.size(); ++c) {
        if (nonconformity(model.method, dist, c) <= model.q_hat) set.members.push_back(c);
    }
    if (set.members.empty() && force_nonempty) {
        set.members.push_back(core::stable_argmax(dist.probs));
    }
    return set;
}

void save_model(const CalibrationModel& model, const std::string& path) {
    json j;
    j["method"] = core::score_method_name(model.method);
    j["alpha"] = model.alpha;
    j["n"] = model.n;
    if (model.infinite()) {
        j["q_hat"] = nullptr;
    } else {
        j["q_hat"] = model.q_hat;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw core::ArgumentError("cannot write model file: " + path);
    out << j.dump(2) << '\n';
}

CalibrationModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw core::ArgumentError("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw core::ReportError("malformed model file " + path + ": " + e.what());
    }
    CalibrationModel model;
    std::string method = j.at("method").get<std::string>();
    if (method == "LAC") {
        model.method = ScoreMethod::LAC;
    } else if (method == "APS") {
        model.method = ScoreMethod::APS;
    } else {
        throw core::ReportError("unknown score method '" + method + "' in " + path);
    }
    model.alpha = j.at("alpha").get<double>();
    model.n = j.at("n").get<std::size_t>();
    model.q_hat = j.at("q_hat").is_null() ? std::numeric_limits<double>::infinity()
                                          : j.at("q_hat").get<double>();
    return model;
}

}  // namespace urag::conformal
