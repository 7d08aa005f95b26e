#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "urag/conformal/conformal.hpp"
#include "urag/core/types.hpp"

namespace urag::eval {

struct InstanceRecord {
    std::string instance_id;
    std::size_t gold_index = 0;
    bool in_calibration = false;
    core::OptionDistribution distribution;
    std::size_t top1 = 0;
    bool top1_correct = false;
    std::optional<core::PredictionSet> set_lac;
    std::optional<core::PredictionSet> set_aps;
    std::vector<std::string> flags;
    std::vector<std::string> notes;
    std::string failure;  // non-empty = strategy run failed; no distribution
    core::StrategyTrace trace;
    std::optional<core::StrategyTrace> prior_trace;            // self/wrong-aware
    std::optional<core::OptionDistribution> prior_distribution;

    bool usable() const { return failure.empty(); }
    bool headline_eligible() const { return usable() && flags.empty(); }
};

struct MethodAggregates {
    double acc = 0.0;
    double cr = 0.0;
    double ss = 0.0;
    std::size_t count = 0;
};

struct Aggregates {
    double acc = 0.0;
    double cr_lac = 0.0, cr_aps = 0.0;
    double ss_lac = 0.0, ss_aps = 0.0;
    double ss_headline = 0.0;  // mean of the LAC and APS set sizes
    std::size_t count = 0;
};

struct QualityManifest {
    std::size_t flagged_excluded = 0;
    std::size_t failed = 0;
    std::map<std::string, std::size_t> flag_counts;
};

struct RunReport {
    int schema_version = 1;
    std::string strategy;
    std::string dataset;
    std::string protocol;
    double alpha = 0.1;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<std::string> provider_identities;
    std::vector<std::string> watermarks;
    std::map<std::string, std::string> metadata;
    conformal::CalibrationModel model_lac;
    conformal::CalibrationModel model_aps;
    std::vector<InstanceRecord> records;  // deterministic id order
    Aggregates aggregates;                // test split, flagged/failed excluded
    std::map<std::string, Aggregates> subset_aggregates;
    QualityManifest manifest;
    std::vector<std::string> invariant_violations;
};

// acc = top-1 correctness, cr = gold-in-set, ss = set cardinality; means over
// the given records for one score method.
MethodAggregates aggregate(const std::vector<InstanceRecord>& records, core::ScoreMethod method);

nlohmann::ordered_json trace_to_json(const core::StrategyTrace& trace);
core::StrategyTrace trace_from_json(const nlohmann::json& j);
nlohmann::ordered_json record_to_json(const InstanceRecord& record);
InstanceRecord record_from_json(const nlohmann::json& j);
nlohmann::ordered_json report_to_json(const RunReport& report, bool include_records = true);

// Artifact layout under dir/: report.json, records.jsonl, aggregates.csv,
// summary.txt, model_lac.json, model_aps.json.
void save_report(const RunReport& report, const std::string& dir);
RunReport load_report(const std::string& dir);

std::string render_aggregates_csv(const RunReport& report);
std::string render_summary(const RunReport& report);

}  // namespace urag::eval
