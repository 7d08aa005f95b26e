#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "urag/core/types.hpp"

namespace urag::core {

// Line-delimited JSON records, UTF-8.
// Instance: {"id", "question", "options": [...], "answer_index", "corpus_ref", "tags": [...]}
// Document: {"id", "title"?, "body"}

std::vector<McqaInstance> load_dataset(const std::string& path);
void save_dataset(const std::string& path, const std::vector<McqaInstance>& instances);
std::string serialize_instance(const McqaInstance& inst);
McqaInstance parse_instance(const std::string& line, std::size_t line_number);

std::vector<Document> load_corpus(const std::string& path);
void save_corpus(const std::string& path, const std::vector<Document>& docs);
std::string serialize_document(const Document& doc);

// Seed-deterministic uniform split; |calibration| = round(fraction * n).
SplitSpec split(const std::vector<McqaInstance>& instances, double fraction, std::uint64_t seed);

}  // namespace urag::core
