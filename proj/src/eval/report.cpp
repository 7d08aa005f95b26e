#include "urag/eval/report.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "urag/core/errors.hpp"
#include "urag/core/numeric.hpp"

namespace urag::eval {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered = nlohmann::ordered_json;

MethodAggregates aggregate(const std::vector<InstanceRecord>& records, core::ScoreMethod method) {
    if (records.empty()) throw core::ArgumentError("aggregate: no records");
    MethodAggregates out;
    for (const auto& r : records) {
        const auto& set = method == core::ScoreMethod::LAC ? r.set_lac : r.set_aps;
        if (!set) throw core::ArgumentError("aggregate: record without prediction set");
        out.acc += r.top1_correct ? 1.0 : 0.0;
        out.cr += set->contains(r.gold_index) ? 1.0 : 0.0;
        out.ss += static_cast<double>(set->size());
        ++out.count;
    }
    auto n = static_cast<double>(out.count);
    out.acc /= n;
    out.cr /= n;
    out.ss /= n;
    return out;
}

ordered trace_to_json(const core::StrategyTrace& trace) {
    ordered j;
    j["instance_id"] = trace.instance_id;
    j["strategy"] = trace.strategy;
    auto& steps = j["steps"] = ordered::array();
    for (const auto& s : trace.steps) {
        ordered step;
        step["query"] = s.query;
        step["action"] = s.action;
        step["retrieved_ids"] = s.retrieved_ids;
        step["prompt"] = s.prompt;
        step["completion"] = s.completion;
        steps.push_back(std::move(step));
    }
    j["final_distribution"] = trace.final_distribution.probs;
    j["flags"] = trace.flags;
    j["notes"] = trace.notes;
    return j;
}

core::StrategyTrace trace_from_json(const json& j) {
    core::StrategyTrace trace;
    trace.instance_id = j.at("instance_id").get<std::string>();
    trace.strategy = j.at("strategy").get<std::string>();
    for (const auto& s : j.at("steps")) {
        core::TraceStep step;
        step.query = s.at("query").get<std::string>();
        step.action = s.at("action").get<std::string>();
        step.retrieved_ids = s.at("retrieved_ids").get<std::vector<std::string>>();
        step.prompt = s.at("prompt").get<std::string>();
        step.completion = s.at("completion").get<std::string>();
        trace.steps.push_back(std::move(step));
    }
    trace.final_distribution.probs = j.at("final_distribution").get<std::vector<double>>();
    trace.flags = j.at("flags").get<std::vector<std::string>>();
    trace.notes = j.at("notes").get<std::vector<std::string>>();
    return trace;
}

namespace {

ordered set_to_json(const core::PredictionSet& set) {
    ordered j;
    if (std::isinf(set.threshold)) {
        j["threshold"] = nullptr;
    } else {
        j["threshold"] = set.threshold;
    }
    j["members"] = set.members;
    return j;
}

core::PredictionSet set_from_json(const json& j, core::ScoreMethod method) {
    core::PredictionSet set;
    set.method = method;
    set.threshold = j.at("threshold").is_null() ? std::numeric_limits<double>::infinity()
                                                : j.at("threshold").get<double>();
    set.members = j.at("members").get<std::vector<std::size_t>>();
    return set;
}

ordered aggregates_to_json(const Aggregates& a) {
    ordered j;
    j["acc"] = a.acc;
    j["cr_lac"] = a.cr_lac;
    j["cr_aps"] = a.cr_aps;
    j["ss_lac"] = a.ss_lac;
    j["ss_aps"] = a.ss_aps;
    j["ss_headline"] = a.ss_headline;
    j["count"] = a.count;
    return j;
}

Aggregates aggregates_from_json(const json& j) {
    Aggregates a;
    a.acc = j.at("acc").get<double>();
    a.cr_lac = j.at("cr_lac").get<double>();
    a.cr_aps = j.at("cr_aps").get<double>();
    a.ss_lac = j.at("ss_lac").get<double>();
    a.ss_aps = j.at("ss_aps").get<double>();
    a.ss_headline = j.at("ss_headline").get<double>();
    a.count = j.at("count").get<std::size_t>();
    return a;
}

ordered model_to_json(const conformal::CalibrationModel& m) {
    ordered j;
    j["method"] = core::score_method_name(m.method);
    j["alpha"] = m.alpha;
    j["n"] = m.n;
    if (m.infinite()) {
        j["q_hat"] = nullptr;
    } else {
        j["q_hat"] = m.q_hat;
    }
    return j;
}

conformal::CalibrationModel model_from_json(const json& j) {
    conformal::CalibrationModel m;
    m.method = j.at("method").get<std::string>() == "APS" ? core::ScoreMethod::APS
                                                          : core::ScoreMethod::LAC;
    m.alpha = j.at("alpha").get<double>();
    m.n = j.at("n").get<std::size_t>();
    m.q_hat = j.at("q_hat").is_null() ? std::numeric_limits<double>::infinity()
                                      : j.at("q_hat").get<double>();
    return m;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ordered record_to_json(const InstanceRecord& record) {
    ordered j;
    j["instance_id"] = record.instance_id;
    j["gold_index"] = record.gold_index;
    j["in_calibration"] = record.in_calibration;
    j["failure"] = record.failure;
    if (record.usable()) {
        j["distribution"] = record.distribution.probs;
        j["top1"] = record.top1;
        j["top1_correct"] = record.top1_correct;
        if (record.set_lac) j["set_lac"] = set_to_json(*record.set_lac);
        if (record.set_aps) j["set_aps"] = set_to_json(*record.set_aps);
    }
    j["flags"] = record.flags;
    j["notes"] = record.notes;
    j["trace"] = trace_to_json(record.trace);
    if (record.prior_trace) j["prior_trace"] = trace_to_json(*record.prior_trace);
    if (record.prior_distribution) j["prior_distribution"] = record.prior_distribution->probs;
    return j;
}

InstanceRecord record_from_json(const json& j) {
    InstanceRecord r;
    r.instance_id = j.at("instance_id").get<std::string>();
    r.gold_index = j.at("gold_index").get<std::size_t>();
    r.in_calibration = j.at("in_calibration").get<bool>();
    r.failure = j.at("failure").get<std::string>();
    if (r.failure.empty()) {
        r.distribution.probs = j.at("distribution").get<std::vector<double>>();
        r.top1 = j.at("top1").get<std::size_t>();
        r.top1_correct = j.at("top1_correct").get<bool>();
        if (j.contains("set_lac")) r.set_lac = set_from_json(j["set_lac"], core::ScoreMethod::LAC);
        if (j.contains("set_aps")) r.set_aps = set_from_json(j["set_aps"], core::ScoreMethod::APS);
    }
    r.flags = j.at("flags").get<std::vector<std::string>>();
    r.notes = j.at("notes").get<std::vector<std::string>>();
    r.trace = trace_from_json(j.at("trace"));
    if (j.contains("prior_trace")) r.prior_trace = trace_from_json(j["prior_trace"]);
    if (j.contains("prior_distribution")) {
        core::OptionDistribution d;
        d.probs = j["prior_distribution"].get<std::vector<double>>();
        r.prior_distribution = std::move(d);
    }
    return r;
}

ordered report_to_json(const RunReport& report, bool include_records) {
    ordered j;
    j["schema_version"] = report.schema_version;
    j["strategy"] = report.strategy;
    j["dataset"] = report.dataset;
    j["protocol"] = report.protocol;
    j["alpha"] = report.alpha;
    j["seed"] = report.seed;
    j["config_hash"] = report.config_hash;
    j["provider_identities"] = report.provider_identities;
    j["watermarks"] = report.watermarks;
    j["metadata"] = report.metadata;
    j["model_lac"] = model_to_json(report.model_lac);
    j["model_aps"] = model_to_json(report.model_aps);
    j["aggregates"] = aggregates_to_json(report.aggregates);
    ordered subsets;
    for (const auto& [name, agg] : report.subset_aggregates) subsets[name] = aggregates_to_json(agg);
    j["subset_aggregates"] = std::move(subsets);
    ordered manifest;
    manifest["flagged_excluded"] = report.manifest.flagged_excluded;
    manifest["failed"] = report.manifest.failed;
    manifest["flag_counts"] = report.manifest.flag_counts;
    j["manifest"] = std::move(manifest);
    j["invariant_violations"] = report.invariant_violations;
    if (include_records) {
        auto& records = j["records"] = ordered::array();
        for (const auto& r : report.records) records.push_back(record_to_json(r));
    }
    return j;
}

std::string render_aggregates_csv(const RunReport& report) {
    std::ostringstream out;
    out << "strategy,dataset,protocol,subset,method,acc,cr,ss,ss_headline,count\n";
    auto row = [&](const std::string& subset, const char* method, double acc, double cr,
                   double ss, double ss_headline, std::size_t count) {
        out << report.strategy << ',' << report.dataset << ',' << report.protocol << ',' << subset
            << ',' << method << ',' << format_double(acc) << ',' << format_double(cr) << ','
            << format_double(ss) << ',' << format_double(ss_headline) << ',' << count << '\n';
    };
    auto emit = [&](const std::string& subset, const Aggregates& a) {
        row(subset, "LAC", a.acc, a.cr_lac, a.ss_lac, a.ss_headline, a.count);
        row(subset, "APS", a.acc, a.cr_aps, a.ss_aps, a.ss_headline, a.count);
    };
    emit("all", report.aggregates);
    for (const auto& [name, agg] : report.subset_aggregates) emit(name, agg);
    return out.str();
}

std::string render_summary(const RunReport& report) {
    std::ostringstream out;
    out << "strategy=" << report.strategy << " dataset=" << report.dataset
        << " protocol=" << report.protocol << " alpha=" << report.alpha
        << " seed=" << report.seed << "\n";
    out << "config_hash=" << report.config_hash << "\n";
    out << "providers:";
    for (const auto& p : report.provider_identities) out << ' ' << p;
    out << "\n";
    if (!report.watermarks.empty()) {
        out << "watermarks:";
        for (const auto& w : report.watermarks) out << ' ' << w;
        out << "\n";
    }
    out << std::fixed << std::setprecision(4);
    auto emit = [&](const std::string& name, const Aggregates& a) {
        out << name << ": n=" << a.count << " acc=" << a.acc << " cr_lac=" << a.cr_lac
            << " cr_aps=" << a.cr_aps << " ss_lac=" << a.ss_lac << " ss_aps=" << a.ss_aps
            << " ss=" << a.ss_headline << "\n";
    };
    emit("test", report.aggregates);
    for (const auto& [name, agg] : report.subset_aggregates) emit(name, agg);
    out << "quality: flagged_excluded=" << report.manifest.flagged_excluded
        << " failed=" << report.manifest.failed << "\n";
    if (!report.invariant_violations.empty()) {
        out << "INVARIANT VIOLATIONS:";
        for (const auto& v : report.invariant_violations) out << ' ' << v;
        out << "\n";
    }
    return out.str();
}

void save_report(const RunReport& report, const std::string& dir) {
    fs::create_directories(dir);
    {
        std::ofstream out(fs::path(dir) / "report.json", std::ios::binary);
        out << report_to_json(report, /*include_records=*/false).dump(2) << '\n';
    }
    {
        std::ofstream out(fs::path(dir) / "records.jsonl", std::ios::binary);
        for (const auto& r : report.records) out << record_to_json(r).dump() << '\n';
    }
    {
        std::ofstream out(fs::path(dir) / "aggregates.csv", std::ios::binary);
        out << render_aggregates_csv(report);
    }
    {
        std::ofstream out(fs::path(dir) / "summary.txt", std::ios::binary);
        out << render_summary(report);
    }
    conformal::save_model(report.model_lac, (fs::path(dir) / "model_lac.json").string());
    conformal::save_model(report.model_aps, (fs::path(dir) / "model_aps.json").string());
}

RunReport load_report(const std::string& dir) {
    fs::path base(dir);
    std::ifstream in(base / "report.json");
    if (!in) throw core::ReportError("missing report.json in " + dir);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw core::ReportError("malformed report.json in " + dir + ": " + e.what());
    }
    RunReport report;
    int version = j.value("schema_version", -1);
    if (version != report.schema_version)
        throw core::ReportError("schema version mismatch in " + dir + ": got " +
                                std::to_string(version) + ", expected " +
                                std::to_string(report.schema_version));
    report.strategy = j.at("strategy").get<std::string>();
    report.dataset = j.at("dataset").get<std::string>();
    report.protocol = j.at("protocol").get<std::string>();
    report.alpha = j.at("alpha").get<double>();
    report.seed = j.at("seed").get<std::uint64_t>();
    report.config_hash = j.at("config_hash").get<std::string>();
    report.provider_identities = j.at("provider_identities").get<std::vector<std::string>>();
    report.watermarks = j.at("watermarks").get<std::vector<std::string>>();
    report.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    report.model_lac = model_from_json(j.at("model_lac"));
    report.model_aps = model_from_json(j.at("model_aps"));
    report.aggregates = aggregates_from_json(j.at("aggregates"));
    for (auto it = j.at("subset_aggregates").begin(); it != j.at("subset_aggregates").end(); ++it) {
        report.subset_aggregates[it.key()] = aggregates_from_json(it.value());
    }
    report.manifest.flagged_excluded = j.at("manifest").at("flagged_excluded").get<std::size_t>();
    report.manifest.failed = j.at("manifest").at("failed").get<std::size_t>();
    report.manifest.flag_counts =
        j.at("manifest").at("flag_counts").get<std::map<std::string, std::size_t>>();
    report.invariant_violations = j.at("invariant_violations").get<std::vector<std::string>>();

    std::ifstream records(base / "records.jsonl");
    if (records) {
        std::string line;
        std::size_t line_number = 0;
        while (std::getline(records, line)) {
            ++line_number;
            if (line.empty()) continue;
            try {
                report.records.push_back(record_from_json(json::parse(line)));
            } catch (const json::exception& e) {
                throw core::ReportError("malformed record at records.jsonl:" +
                                        std::to_string(line_number) + " in " + dir + ": " +
                                        e.what());
            }
        }
    }
    return report;
}

}  // namespace urag::eval
