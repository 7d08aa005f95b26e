#include "urag/strategies/prompts.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "urag/core/errors.hpp"
#include "urag/core/text.hpp"

namespace urag::strategies {

namespace fs = std::filesystem;

namespace {

const char* kMcqa =
    "You are given a multiple-choice question and a set of retrieved context passages.\n"
    "\n"
    "Answer the question using only the provided context.\n"
    "{confidence_block}\n"
    "Do not explain your reasoning.\n"
    "\n"
    "Context:\n"
    "{context}\n"
    "\n"
    "Question:\n"
    "{question}\n"
    "\n"
    "Options:\n"
    "{options}\n"
    "\n"
    "Answer format:\n"
    "Answer|X";

const char* kMcqaNoContext =
    "You are given a multiple-choice question.\n"
    "\n"
    "Answer the question.\n"
    "{confidence_block}\n"
    "Do not explain your reasoning.\n"
    "\n"
    "Question:\n"
    "{question}\n"
    "\n"
    "Options:\n"
    "{options}\n"
    "\n"
    "Answer format:\n"
    "Answer|X";

const char* kMcqaDraft =
    "You are given a multiple-choice question and a reasoning draft.\n"
    "\n"
    "Answer the question, taking the draft into account.\n"
    "{confidence_block}\n"
    "Do not explain your reasoning.\n"
    "\n"
    "Draft:\n"
    "{draft}\n"
    "\n"
    "Question:\n"
    "{question}\n"
    "\n"
    "Options:\n"
    "{options}\n"
    "\n"
    "Answer format:\n"
    "Answer|X";

const char* kHydeSystem =
    "You are a helpful assistant that writes comprehensive and informative passages to answer "
    "questions.";

const char* kHydeUser =
    "Write a detailed, factual passage that would answer the following question.\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Provide a comprehensive answer with relevant facts and information.";

const char* kSelfragDecision =
    "Decide whether answering the question below requires retrieving documents from an external "
    "corpus, or whether parametric knowledge alone suffices.\n"
    "\n"
    "Question:\n"
    "{question}\n"
    "\n"
    "Reply with exactly one token: retrieve or no_retrieve";

const char* kSelfragAnswer =
    "Answer the question using the provided context passages. Give a short, direct answer.\n"
    "\n"
    "Context:\n"
    "{context}\n"
    "\n"
    "Question:\n"
    "{question}\n"
    "\n"
    "Options:\n"
    "{options}\n"
    "\n"
    "Answer:";

const char* kSelfragReflection =
    "Judge the candidate answer against the context and question.\n"
    "\n"
    "Context:\n"
    "{context}\n"
    "\n"
    "Question:\n"
    "{question}\n"
    "\n"
    "Candidate answer:\n"
    "{answer}\n"
    "\n"
    "Reply with exactly three lines:\n"
    "Relevance: relevant|irrelevant\n"
    "Support: fully_supported|partially_supported|no_support\n"
    "Utility: 1-5";

const char* kRatDraft =
    "Think step by step and draft an answer to the question. Write out your reasoning chain.\n"
    "\n"
    "Question:\n"
    "{question}\n"
    "\n"
    "Options:\n"
    "{options}\n"
    "\n"
    "Draft:";

const char* kRatQuery =
    "Given the question and the current draft answer, write one short search query that would "
    "retrieve evidence to check or improve the draft. Reply with the query only.\n"
    "\n"
    "Question:\n"
    "{question}\n"
    "\n"
    "Draft:\n"
    "{draft}\n"
    "\n"
    "Query:";

const char* kRatRevise =
    "Revise the draft answer using the retrieved passages. Correct any statements the passages "
    "contradict and keep the reasoning chain.\n"
    "\n"
    "Context:\n"
    "{context}\n"
    "\n"
    "Question:\n"
    "{question}\n"
    "\n"
    "Draft:\n"
    "{draft}\n"
    "\n"
    "Revised draft:";

const char* kRaptorSummary =
    "Summarize the following passages into one concise, information-dense paragraph. Keep the "
    "facts; drop the filler.\n"
    "\n"
    "Passages:\n"
    "{passages}\n"
    "\n"
    "Summary:";

const char* kForgeNaive =
    "You will generate a fake answer for a RAG MCQA dataset.\n"
    "\n"
    "Given:\n"
    "- Original question: \"{question}\"\n"
    "- Correct answer: \"{correct_answer}\"\n"
    "\n"
    "Output must follow this JSON format:\n"
    "\n"
    "{\n"
    "  \"fake_answer\": \"...\"\n"
    "}\n"
    "\n"
    "Do NOT output anything else.";

const char* kForgeFullBody =
    "You will generate a fake answer and a fake supporting document for a RAG MCQA dataset.\n"
    "\n"
    "Given:\n"
    "- Original document: \"{original_document}\"\n"
    "- Original question: \"{question}\"\n"
    "- Correct answer: \"{correct_answer}\"\n"
    "\n"
    "Your tasks:\n"
    "- Generate ONE fake answer that:\n"
    "  - Is NOT the correct answer.\n"
    "  - Is the same semantic type as the correct answer (e.g., person -> person).\n"
    "  - Is plausible given the question.\n"
    "  - Is similar to the correct answer in one way: choose ONE similarity dimension: "
    "(role-similar, time-similar, lexical-similar, topic-similar).\n"
    "  - Does NOT conflict with safety constraints (no defamation, no sensitive claims).\n"
    "- Generate ONE fake supporting document that:\n"
    "  - Looks realistic and authoritative (e.g., newspaper, government report).\n"
    "  - Provides plausible context for the fake answer.\n"
    "  - Does NOT mention the correct answer.\n"
    "  - CONTRADICTS the original document's claim.\n"
    "  - Avoids sensational, harmful, or political misinformation tone.\n"
    "  - Has internal coherence (dates, events, roles must be consistent).\n"
    "- Output must follow this JSON format:\n"
    "\n"
    "{\n"
    "  \"fake_document_title\": \"...\",\n"
    "  \"fake_document_excerpt\": \"...\",\n"
    "  \"fake_answer\": \"...\",\n"
    "  \"similarity_type\": \"...\"\n"
    "}\n";

const char* kForgeRegenSuffix =
    "\nPreviously, you generated \"{old_incorrect_answer}\" but it's not good enough. Please "
    "generate a more confusing answer.\n"
    "\n"
    "Do NOT output anything else.";

const char* kConfidenceHeader = "Knowing that your previous answer had the following confidence:";

}  // namespace

PromptLibrary::PromptLibrary() {
    templates_["mcqa"] = kMcqa;
    templates_["mcqa_no_context"] = kMcqaNoContext;
    templates_["mcqa_draft"] = kMcqaDraft;
    templates_["hyde_system"] = kHydeSystem;
    templates_["hyde_user"] = kHydeUser;
    templates_["selfrag_decision"] = kSelfragDecision;
    templates_["selfrag_answer"] = kSelfragAnswer;
    templates_["selfrag_reflection"] = kSelfragReflection;
    templates_["rat_draft"] = kRatDraft;
    templates_["rat_query"] = kRatQuery;
    templates_["rat_revise"] = kRatRevise;
    templates_["raptor_summary"] = kRaptorSummary;
    templates_["forge_naive"] = kForgeNaive;
    templates_["forge_full"] = std::string(kForgeFullBody) + "\nDo NOT output anything else.";
    templates_["forge_regen"] = std::string(kForgeFullBody) + kForgeRegenSuffix;

    fusion_system_ = {
        "You are a helpful assistant that rephrases questions while keeping the same meaning.",
        "You are a helpful assistant that creates alternative question formulations.",
        "You are a helpful assistant that generates related questions.",
        "You are a helpful assistant that makes questions more specific.",
        "You are a helpful assistant that simplifies complex questions.",
    };
    fusion_user_ = {
        "Create an alternative question: {question}",
        "Generate a related question: {question}",
        "Make this question more specific: {question}",
        "Simplify this question: {question}",
        "What is another way to ask about the same topic as this question: {question}",
        "Generate a related question that might help answer this question: {question}",
    };
}

void PromptLibrary::load_dir(const std::string& dir) {
    if (!fs::is_directory(dir)) throw core::ArgumentError("prompt directory not found: " + dir);
    auto read_file = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        std::string s = ss.str();
        // Editors add a trailing newline; templates are stored without one.
        while (!s.empty() && s.back() == '\n') s.pop_back();
        return s;
    };
    auto read_lines = [](const fs::path& p) {
        std::ifstream in(p);
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line)) {
            if (!core::trim(line).empty()) lines.push_back(line);
        }
        return lines;
    };
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".txt") continue;
        std::string stem = entry.path().stem().string();
        if (stem == "fusion_system_pool") {
            fusion_system_ = read_lines(entry.path());
        } else if (stem == "fusion_user_pool") {
            fusion_user_ = read_lines(entry.path());
        } else {
            templates_[stem] = read_file(entry.path());
        }
    }
    if (fusion_system_.empty() || fusion_user_.empty())
        throw core::ArgumentError("prompt directory left a fusion pool empty: " + dir);
}

void PromptLibrary::export_dir(const std::string& dir) const {
    fs::create_directories(dir);
    for (const auto& [name, text] : templates_) {
        std::ofstream out(fs::path(dir) / (name + ".txt"), std::ios::binary);
        out << text << '\n';
    }
    {
        std::ofstream out(fs::path(dir) / "fusion_system_pool.txt", std::ios::binary);
        for (const auto& line : fusion_system_) out << line << '\n';
    }
    {
        std::ofstream out(fs::path(dir) / "fusion_user_pool.txt", std::ios::binary);
        for (const auto& line : fusion_user_) out << line << '\n';
    }
}

const std::string& PromptLibrary::raw(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw core::ArgumentError("unknown prompt template: " + name);
    return it->second;
}

std::string PromptLibrary::substitute(const std::string& tmpl,
                                      const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::istringstream lines(tmpl);
    std::string line;
    bool first = true;
    while (std::getline(lines, line)) {
        bool drop = false;
        for (const auto& [key, value] : values) {
            if (value.empty() && core::trim(line) == "{" + key + "}") {
                drop = true;
                break;
            }
        }
        if (drop) continue;
        for (const auto& [key, value] : values) {
            std::string token = "{" + key + "}";
            std::size_t pos = 0;
            while ((pos = line.find(token, pos)) != std::string::npos) {
                line.replace(pos, token.size(), value);
                pos += value.size();
            }
        }
        if (!first) out += '\n';
        out += line;
        first = false;
    }
    return out;
}

std::string PromptLibrary::render(const std::string& name,
                                  const std::map<std::string, std::string>& values) const {
    return substitute(raw(name), values);
}

std::string render_options(const std::vector<std::string>& options) {
    std::string out;
    for (std::size_t i = 0; i < options.size(); ++i) {
        if (i) out += '\n';
        out += core::option_label(i) + ". " + options[i];
    }
    return out;
}

std::string render_confidence_block(const core::OptionDistribution& distribution) {
    std::string out = kConfidenceHeader;
    char buf[32];
    for (std::size_t i = 0; i < distribution.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.2f", distribution[i]);
        out += "\n" + core::option_label(i) + ". " + buf;
    }
    return out;
}

}  // namespace urag::strategies
