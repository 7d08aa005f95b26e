#include "urag/core/dataset.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "urag/core/rng.hpp"

namespace urag::core {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

namespace {

json parse_line(const std::string& line, std::size_t line_number) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON record: ") + e.what(), line_number);
    }
}

std::string require_string(const json& j, const char* field, std::size_t line_number) {
    if (!j.contains(field) || !j[field].is_string())
        throw ParseError(std::string("missing or non-string field '") + field + "'", line_number);
    return j[field].get<std::string>();
}

}  // namespace

McqaInstance parse_instance(const std::string& line, std::size_t line_number) {
    json j = parse_line(line, line_number);
    McqaInstance inst;
    inst.id = require_string(j, "id", line_number);
    inst.question = require_string(j, "question", line_number);
    if (!j.contains("options") || !j["options"].is_array())
        throw ParseError("missing or non-array field 'options'", line_number);
    for (const auto& opt : j["options"]) {
        if (!opt.is_string()) throw ParseError("non-string option", line_number);
        inst.options.push_back(opt.get<std::string>());
    }
    if (!j.contains("answer_index") || !j["answer_index"].is_number_integer())
        throw ParseError("missing or non-integer field 'answer_index'", line_number);
    long long ai = j["answer_index"].get<long long>();
    if (ai < 0)
        throw IntegrityError("line " + std::to_string(line_number) + ": negative answer_index");
    inst.answer_index = static_cast<std::size_t>(ai);
    inst.corpus_ref = require_string(j, "corpus_ref", line_number);
    if (j.contains("tags")) {
        if (!j["tags"].is_array()) throw ParseError("non-array field 'tags'", line_number);
        for (const auto& t : j["tags"]) inst.tags.push_back(t.get<std::string>());
    }
    try {
        inst.validate();
    } catch (const IntegrityError& e) {
        throw IntegrityError("line " + std::to_string(line_number) + ": " + e.what());
    }
    return inst;
}

std::string serialize_instance(const McqaInstance& inst) {
    ordered j;
    j["id"] = inst.id;
    j["question"] = inst.question;
    j["options"] = inst.options;
    j["answer_index"] = inst.answer_index;
    j["corpus_ref"] = inst.corpus_ref;
    j["tags"] = inst.tags;
    return j.dump();
}

std::vector<McqaInstance> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open dataset file: " + path);
    std::vector<McqaInstance> out;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_number = 0;
    std::size_t option_count = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        McqaInstance inst = parse_instance(line, line_number);
        if (!ids.insert(inst.id).second)
            throw IntegrityError("line " + std::to_string(line_number) + ": duplicate id '" +
                                 inst.id + "'");
        if (option_count == 0) {
            option_count = inst.options.size();
        } else if (inst.options.size() != option_count) {
            throw IntegrityError("line " + std::to_string(line_number) + ": option count " +
                                 std::to_string(inst.options.size()) +
                                 " differs from dataset-wide K=" + std::to_string(option_count));
        }
        out.push_back(std::move(inst));
    }
    return out;
}

void save_dataset(const std::string& path, const std::vector<McqaInstance>& instances) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write dataset file: " + path);
    for (const auto& inst : instances) out << serialize_instance(inst) << '\n';
}

std::string serialize_document(const Document& doc) {
    ordered j;
    j["id"] = doc.id;
    if (doc.title) j["title"] = *doc.title;
    j["body"] = doc.body;
    return j.dump();
}

std::vector<Document> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open corpus file: " + path);
    std::vector<Document> out;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        json j = parse_line(line, line_number);
        Document doc;
        doc.id = require_string(j, "id", line_number);
        if (j.contains("title") && !j["title"].is_null())
            doc.title = j["title"].get<std::string>();
        doc.body = require_string(j, "body", line_number);
        try {
            doc.validate();
        } catch (const IntegrityError& e) {
            throw IntegrityError("line " + std::to_string(line_number) + ": " + e.what());
        }
        if (!ids.insert(doc.id).second)
            throw IntegrityError("line " + std::to_string(line_number) + ": duplicate id '" +
                                 doc.id + "'");
        out.push_back(std::move(doc));
    }
    return out;
}

void save_corpus(const std::string& path, const std::vector<Document>& docs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write corpus file: " + path);
    for (const auto& doc : docs) out << serialize_document(doc) << '\n';
}

SplitSpec split(const std::vector<McqaInstance>& instances, double fraction, std::uint64_t seed) {
    if (instances.empty()) throw ArgumentError("split: empty instance list");
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ArgumentError("split: fraction must lie in (0,1)");
    std::vector<std::string> ids;
    ids.reserve(instances.size());
    for (const auto& inst : instances) ids.push_back(inst.id);
    Rng rng(seed);
    shuffle_inplace(ids, rng);
    auto n_cal = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(instances.size())));
    SplitSpec spec;
    spec.seed = seed;
    spec.calibration_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_cal));
    spec.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_cal), ids.end());
    return spec;
}

}  // namespace urag::core
