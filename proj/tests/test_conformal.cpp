#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "urag/conformal/conformal.hpp"
#include "urag/core/rng.hpp"

using namespace urag;
using conformal::CalibrationModel;
using conformal::ScoredInstance;
using core::OptionDistribution;
using core::ScoreMethod;

namespace {

// Independent quantile oracle: full sort plus direct rank arithmetic.
double oracle_q_hat(std::vector<double> scores, double alpha, bool& infinite) {
    std::sort(scores.begin(), scores.end());
    auto n = scores.size();
    long double raw = static_cast<long double>(n + 1) * (1.0L - static_cast<long double>(alpha));
    auto rank = static_cast<std::size_t>(std::ceil(raw - 1e-12L));
    if (rank > n) {
        infinite = true;
        return 0.0;
    }
    infinite = false;
    return scores[rank - 1];
}

std::vector<ScoredInstance> from_scores(const std::vector<double>& gold_probs) {
    // two-option distributions whose gold LAC scores equal 1 - p
    std::vector<ScoredInstance> out;
    for (std::size_t i = 0; i < gold_probs.size(); ++i) {
        out.push_back({"s" + std::to_string(i),
                       OptionDistribution({gold_probs[i], 1.0 - gold_probs[i]}), 0});
    }
    return out;
}

}  // namespace

TEST_CASE("lac_score worked examples") {
    OptionDistribution p({0.6, 0.3, 0.1});
    CHECK(conformal::lac_score(p, 0) == doctest::Approx(0.4).epsilon(1e-12));
    OptionDistribution certain({1.0, 0.0});
    CHECK(conformal::lac_score(certain, 0) == doctest::Approx(0.0));
    OptionDistribution uniform({0.25, 0.25, 0.25, 0.25});
    for (std::size_t c = 0; c < 4; ++c) {
        CHECK(conformal::lac_score(uniform, c) == doctest::Approx(0.75));
    }
    CHECK_THROWS_AS(conformal::lac_score(p, 3), ArgumentError);
}

TEST_CASE("aps_score cumulative-mass examples") {
    OptionDistribution p({0.5, 0.3, 0.2});
    CHECK(conformal::aps_score(p, 0) == doctest::Approx(0.5));
    CHECK(conformal::aps_score(p, 1) == doctest::Approx(0.8));
    CHECK(conformal::aps_score(p, 2) == doctest::Approx(1.0));

    // the unique top option always scores exactly its own probability
    core::Rng rng(7);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> probs = core::dirichlet_sample(rng, 4, 1.0);
        auto top = core::stable_argmax(probs);
        bool unique = true;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (i != top && probs[i] == probs[top]) unique = false;
        }
        if (!unique) continue;
        OptionDistribution d(probs);
        CHECK(conformal::aps_score(d, top) == doctest::Approx(probs[top]).epsilon(1e-12));
    }

    OptionDistribution tied({0.4, 0.4, 0.2});
    CHECK(conformal::aps_score(tied, 0) == doctest::Approx(0.8));  // ties both counted
}

TEST_CASE("calibrate worked examples") {
    SUBCASE("n=9 alpha=0.1 takes the largest score") {
        std::vector<double> gold = {0.95, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2};
        auto model = conformal::calibrate(from_scores(gold), ScoreMethod::LAC, 0.1);
        CHECK(model.n == 9);
        double max_score = 0.0;
        for (double p : gold) max_score = std::max(max_score, 1.0 - p);
        CHECK(model.q_hat == doctest::Approx(max_score).epsilon(1e-12));
    }
    SUBCASE("n=19 alpha=0.1 picks the 18th smallest") {
        std::vector<double> gold;
        for (int i = 1; i <= 19; ++i) gold.push_back(1.0 - 0.01 * i);  // scores 0.01..0.19
        auto model = conformal::calibrate(from_scores(gold), ScoreMethod::LAC, 0.1);
        CHECK(model.q_hat == doctest::Approx(0.18).epsilon(1e-9));
    }
    SUBCASE("n=4 alpha=0.1 overflows to the infinite sentinel") {
        auto model =
            conformal::calibrate(from_scores({0.9, 0.8, 0.7, 0.6}), ScoreMethod::LAC, 0.1);
        CHECK(model.infinite());
    }
    CHECK_THROWS_AS(conformal::calibrate({}, ScoreMethod::LAC, 0.1), ArgumentError);
}

TEST_CASE("predict_set worked examples") {
    SUBCASE("LAC membership") {
        CalibrationModel model{ScoreMethod::LAC, 0.1, 10, 0.5};
        auto set = conformal::predict_set(model, OptionDistribution({0.6, 0.3, 0.1}));
        CHECK(set.members == std::vector<std::size_t>{0});
    }
    SUBCASE("APS membership") {
        CalibrationModel model{ScoreMethod::APS, 0.1, 10, 0.8};
        auto set = conformal::predict_set(model, OptionDistribution({0.5, 0.3, 0.2}));
        CHECK(set.members == std::vector<std::size_t>{0, 1});
    }
    SUBCASE("infinite sentinel yields the full option set") {
        CalibrationModel model{ScoreMethod::LAC, 0.1, 4,
                               std::numeric_limits<double>::infinity()};
        auto set = conformal::predict_set(model, OptionDistribution({0.4, 0.3, 0.2, 0.1}));
        CHECK(set.members == std::vector<std::size_t>{0, 1, 2, 3});
    }
}

TEST_CASE("LAC membership identity: c in set iff p_c >= 1 - q_hat") {
    core::Rng rng(11);
    for (int t = 0; t < 500; ++t) {
        auto probs = core::dirichlet_sample(rng, 3 + core::bounded(rng, 4), 0.7);
        double q = core::uniform01(rng);
        CalibrationModel model{ScoreMethod::LAC, 0.1, 10, q};
        OptionDistribution d(probs);
        auto set = conformal::predict_set(model, d);
        for (std::size_t c = 0; c < probs.size(); ++c) {
            CHECK(set.contains(c) == (probs[c] >= 1.0 - q - 1e-15));
        }
    }
}

TEST_CASE("APS sets are top-down when probabilities are distinct") {
    core::Rng rng(13);
    for (int t = 0; t < 500; ++t) {
        auto probs = core::dirichlet_sample(rng, 4, 1.0);
        std::set<double> uniq(probs.begin(), probs.end());
        if (uniq.size() != probs.size()) continue;
        CalibrationModel model{ScoreMethod::APS, 0.1, 10, core::uniform01(rng)};
        OptionDistribution d(probs);
        auto set = conformal::predict_set(model, d);
        for (std::size_t c = 0; c < probs.size(); ++c) {
            if (!set.contains(c)) continue;
            for (std::size_t o = 0; o < probs.size(); ++o) {
                if (probs[o] > probs[c]) CHECK(set.contains(o));
            }
        }
    }
}

TEST_CASE("calibrate matches the brute-force sort oracle for n in [1,200]") {
    core::Rng rng(17);
    for (std::size_t n = 1; n <= 200; ++n) {
        for (int rep = 0; rep < 3; ++rep) {
            double alpha = 0.02 + 0.45 * core::uniform01(rng);
            std::vector<double> gold_probs(n);
            std::vector<double> scores(n);
            for (std::size_t i = 0; i < n; ++i) {
                gold_probs[i] = core::uniform01(rng);
                scores[i] = 1.0 - gold_probs[i];
            }
            auto model = conformal::calibrate(from_scores(gold_probs), ScoreMethod::LAC, alpha);
            bool oracle_infinite = false;
            double oracle = oracle_q_hat(scores, alpha, oracle_infinite);
            CHECK(model.infinite() == oracle_infinite);
            if (!oracle_infinite) {
                CHECK(model.q_hat == doctest::Approx(oracle).epsilon(1e-15));
            }
        }
    }
}

TEST_CASE("model file round-trip, including the sentinel") {
    namespace fs = std::filesystem;
    std::string path = (fs::temp_directory_path() / "urag_model.json").string();

    CalibrationModel model{ScoreMethod::APS, 0.1, 19, 0.18};
    conformal::save_model(model, path);
    auto loaded = conformal::load_model(path);
    CHECK(loaded.method == ScoreMethod::APS);
    CHECK(loaded.alpha == doctest::Approx(0.1));
    CHECK(loaded.n == 19);
    CHECK(loaded.q_hat == doctest::Approx(0.18));

    CalibrationModel inf{ScoreMethod::LAC, 0.1, 4, std::numeric_limits<double>::infinity()};
    conformal::save_model(inf, path);
    CHECK(conformal::load_model(path).infinite());
}

TEST_CASE("Monte Carlo coverage on an exchangeable synthetic world") {
    // gold labels drawn from the scored distributions themselves
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        core::Rng rng(seed);
        const std::size_t n_cal = 1000, n_test = 4000, k = 4;
        auto draw = [&](std::vector<ScoredInstance>& out, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) {
                auto probs = core::dirichlet_sample(rng, k, 1.0);
                double u = core::uniform01(rng);
                std::size_t gold = k - 1;
                double acc = 0.0;
                for (std::size_t c = 0; c < k; ++c) {
                    acc += probs[c];
                    if (u < acc) {
                        gold = c;
                        break;
                    }
                }
                out.push_back({"x", OptionDistribution(probs), gold});
            }
        };
        std::vector<ScoredInstance> cal, test;
        draw(cal, n_cal);
        draw(test, n_test);

        for (auto method : {ScoreMethod::LAC, ScoreMethod::APS}) {
            auto model = conformal::calibrate(cal, method, 0.1);
            std::size_t covered = 0;
            for (const auto& t : test) {
                auto set = conformal::predict_set(model, t.distribution);
                if (set.contains(t.gold_index)) ++covered;
            }
            double cr = static_cast<double>(covered) / n_test;
            CHECK(cr > 0.87);
            CHECK(cr < 0.93);
        }
    }
}
