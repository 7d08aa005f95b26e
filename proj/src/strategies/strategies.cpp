#include "urag/strategies/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "urag/core/rng.hpp"
#include "urag/core/text.hpp"

namespace urag::strategies {

StrategyKind parse_strategy(const std::string& name) {
    std::string n = core::to_lower(core::trim(name));
    if (n == "no_retrieve" || n == "noretrieve" || n == "none") return StrategyKind::NoRetrieve;
    if (n == "naive") return StrategyKind::Naive;
    if (n == "fusion") return StrategyKind::Fusion;
    if (n == "hyde") return StrategyKind::Hyde;
    if (n == "raptor") return StrategyKind::Raptor;
    if (n == "replug") return StrategyKind::Replug;
    if (n == "selfrag" || n == "self_rag" || n == "self-rag") return StrategyKind::SelfRag;
    if (n == "rat") return StrategyKind::Rat;
    throw core::UsageError("strategy", "unknown strategy '" + name + "'");
}

const char* strategy_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::NoRetrieve: return "no_retrieve";
        case StrategyKind::Naive: return "naive";
        case StrategyKind::Fusion: return "fusion";
        case StrategyKind::Hyde: return "hyde";
        case StrategyKind::Raptor: return "raptor";
        case StrategyKind::Replug: return "replug";
        case StrategyKind::SelfRag: return "selfrag";
        case StrategyKind::Rat: return "rat";
    }
    return "?";
}

ReflectionScores parse_reflection(const std::string& completion) {
    ReflectionScores scores;
    bool any = false;
    std::istringstream lines(completion);
    std::string line;
    while (std::getline(lines, line)) {
        std::string lower = core::to_lower(core::trim(line));
        auto value_after = [&](const char* prefix) -> std::string {
            std::string v = lower.substr(std::string(prefix).size());
            return core::trim(v);
        };
        if (lower.rfind("relevance:", 0) == 0) {
            std::string v = value_after("relevance:");
            // check the longer token first; "irrelevant" contains "relevant"
            if (v.rfind("irrelevant", 0) == 0) {
                scores.rel = 0.0;
                any = true;
            } else if (v.rfind("relevant", 0) == 0) {
                scores.rel = 1.0;
                any = true;
            }
        } else if (lower.rfind("support:", 0) == 0) {
            std::string v = value_after("support:");
            if (v.rfind("fully_supported", 0) == 0) {
                scores.sup = 1.0;
                any = true;
            } else if (v.rfind("partially_supported", 0) == 0) {
                scores.sup = 0.7;
                any = true;
            } else if (v.rfind("no_support", 0) == 0) {
                scores.sup = 0.0;
                any = true;
            }
        } else if (lower.rfind("utility:", 0) == 0) {
            std::string v = value_after("utility:");
            if (!v.empty() && v[0] >= '1' && v[0] <= '5') {
                scores.use = static_cast<double>(v[0] - '0') / 5.0;
                any = true;
            }
        }
    }
    if (!any) {
        scores = ReflectionScores{0.5, 0.5, 0.6, true};
    }
    return scores;
}

double composite_reflection_score(const ReflectionScores& scores, const SelfRagWeights& weights) {
    return weights.rel * scores.rel + weights.sup * scores.sup + weights.use * scores.use;
}

core::OptionDistribution replug_mixture(
    const std::vector<double>& similarities,
    const std::vector<core::OptionDistribution>& distributions) {
    if (distributions.empty()) throw core::ArgumentError("replug_mixture: no distributions");
    if (similarities.size() != distributions.size())
        throw core::ArgumentError("replug_mixture: similarity/distribution count mismatch");
    std::vector<double> lambda = core::softmax(similarities);
    std::size_t k = distributions.front().size();
    std::vector<double> mixed(k, 0.0);
    for (std::size_t d = 0; d < distributions.size(); ++d) {
        if (distributions[d].size() != k)
            throw core::ArgumentError("replug_mixture: distribution length mismatch");
        for (std::size_t c = 0; c < k; ++c) mixed[c] += lambda[d] * distributions[d][c];
    }
    return core::OptionDistribution(mixed);
}

StrategyRunner::StrategyRunner(StrategyKind kind, StrategyConfig config,
                               providers::Providers providers,
                               const retrieval::VectorIndex* index, const RaptorTree* tree,
                               const std::vector<core::Document>* corpus,
                               const PromptLibrary* prompts,
                               providers::ScoreOptionsConfig score_config)
    : kind_(kind),
      config_(std::move(config)),
      providers_(std::move(providers)),
      index_(index),
      tree_(tree),
      prompts_(prompts),
      score_config_(score_config) {
    if (!providers_.chat) throw core::ArgumentError("strategy runner: chat provider required");
    if (!prompts_) throw core::ArgumentError("strategy runner: prompt library required");
    score_config_.temperature = config_.temperature;
    if (corpus) {
        for (const auto& doc : *corpus) documents_[doc.id] = &doc;
    }
}

const retrieval::VectorIndex& StrategyRunner::index_or_throw() const {
    if (!index_ || index_->entries.empty())
        throw core::StrategyError(std::string(strategy_name(kind_)) +
                                  ": no corpus index available");
    return *index_;
}

std::vector<double> StrategyRunner::embed_text(const std::string& text) const {
    if (!providers_.embedder)
        throw core::StrategyError("strategy runner: embedder required but not configured");
    return providers_.embedder->embed_one(text);
}

std::string StrategyRunner::chat_text(const std::vector<providers::ChatMessage>& messages,
                                      double temperature, core::StrategyTrace& trace,
                                      const std::string& action, const std::string& query,
                                      const std::vector<std::string>& retrieved) const {
    providers::ChatRequest request;
    request.messages = messages;
    request.temperature = temperature;
    providers::ChatResult result = providers_.chat->chat(request);
    core::TraceStep step;
    step.query = query;
    step.action = action;
    step.retrieved_ids = retrieved;
    step.prompt = request.flattened();
    step.completion = result.text;
    trace.steps.push_back(std::move(step));
    return result.text;
}

std::vector<retrieval::ScoredHit> StrategyRunner::retrieve(
    const std::string& query_text, const std::vector<double>& query_vector, std::size_t k,
    const core::McqaInstance& instance, std::size_t step_counter, const ProtocolOverlay& overlay,
    core::StrategyTrace& trace, const std::string& action) const {
    const auto& index = index_or_throw();
    auto hits = retrieval::search_scored(index, query_vector, k);

    if (overlay.inject_irrelevant > 0) {
        std::unordered_set<std::string> exclude;
        for (const auto& h : hits) exclude.insert(h.doc_id);
        std::uint64_t salt_step = overlay.inject_fresh_per_step ? step_counter : 0;
        std::uint64_t seed = core::mix_seed(
            core::mix_seed(overlay.run_seed, instance.id),
            "inject-" + std::to_string(salt_step));
        auto injected =
            retrieval::sample_irrelevant(index, exclude, overlay.inject_irrelevant, seed);
        std::unordered_map<std::string, const std::vector<double>*> vectors;
        for (const auto& entry : index.entries) vectors[entry.doc_id] = &entry.vector;
        for (const auto& id : injected) {
            hits.push_back({id, core::dot(*vectors.at(id), query_vector)});
        }
        trace.add_note("irrelevant_injected:step=" + std::to_string(step_counter) +
                       ",count=" + std::to_string(injected.size()));
    }

    core::TraceStep step;
    step.query = query_text;
    step.action = action;
    for (const auto& h : hits) step.retrieved_ids.push_back(h.doc_id);
    trace.steps.push_back(std::move(step));
    return hits;
}

std::string StrategyRunner::document_text(const std::string& doc_id) const {
    auto it = documents_.find(doc_id);
    if (it == documents_.end())
        throw core::IntegrityError("retrieved doc id '" + doc_id +
                                   "' does not resolve against the bound corpus");
    const core::Document& doc = *it->second;
    if (doc.title) return *doc.title + "\n" + doc.body;
    return doc.body;
}

std::string StrategyRunner::assemble_texts(const std::vector<std::string>& texts,
                                           std::size_t budget_tokens,
                                           core::StrategyTrace& trace) const {
    std::string context;
    bool truncated = false;
    std::size_t max_chars = core::token_budget_chars(budget_tokens);
    for (const auto& text : texts) {
        std::string piece = context.empty() ? text : "\n\n" + text;
        if (context.size() + piece.size() > max_chars) {
            std::size_t room = max_chars - context.size();
            if (room > 2) context += piece.substr(0, room);
            truncated = true;
            break;
        }
        context += piece;
    }
    if (truncated) trace.add_note("context_truncated");
    return context;
}

std::string StrategyRunner::assemble_context(const std::vector<std::string>& doc_ids,
                                             std::size_t budget_tokens,
                                             core::StrategyTrace& trace) const {
    std::vector<std::string> texts;
    texts.reserve(doc_ids.size());
    for (const auto& id : doc_ids) texts.push_back(document_text(id));
    return assemble_texts(texts, budget_tokens, trace);
}

core::OptionDistribution StrategyRunner::score_mcqa(const core::McqaInstance& instance,
                                                    const std::string& template_name,
                                                    std::map<std::string, std::string> values,
                                                    const ProtocolOverlay& overlay,
                                                    core::StrategyTrace& trace,
                                                    const std::string& action) const {
    values["question"] = instance.question;
    values["options"] = render_options(instance.options);
    values["confidence_block"] = overlay.confidence_block;
    std::string prompt = prompts_->render(template_name, values);

    std::vector<providers::ChatMessage> messages{{"user", prompt}};
    auto result =
        providers::score_options(*providers_.chat, messages, instance.option_count(), score_config_);

    core::TraceStep step;
    step.action = action;
    step.prompt = prompt;
    step.completion = result.raw.text;
    trace.steps.push_back(std::move(step));
    for (const auto& f : result.flags) trace.add_flag(f);
    return result.distribution;
}

core::StrategyTrace StrategyRunner::run(const core::McqaInstance& instance,
                                        const ProtocolOverlay& overlay) const {
    core::StrategyTrace trace;
    switch (kind_) {
        case StrategyKind::NoRetrieve: trace = run_no_retrieve(instance, overlay); break;
        case StrategyKind::Naive: trace = run_naive(instance, overlay); break;
        case StrategyKind::Fusion: trace = run_fusion(instance, overlay); break;
        case StrategyKind::Hyde: trace = run_hyde(instance, overlay); break;
        case StrategyKind::Raptor: trace = run_raptor(instance, overlay); break;
        case StrategyKind::Replug: trace = run_replug(instance, overlay); break;
        case StrategyKind::SelfRag: trace = run_selfrag(instance, overlay); break;
        case StrategyKind::Rat: trace = run_rat(instance, overlay); break;
    }
    trace.instance_id = instance.id;
    trace.strategy = strategy_name(kind_);
    trace.final_distribution.validate();
    return trace;
}

core::StrategyTrace StrategyRunner::run_no_retrieve(const core::McqaInstance& instance,
                                                    const ProtocolOverlay& overlay) const {
    core::StrategyTrace trace;
    trace.final_distribution = score_mcqa(instance, "mcqa_no_context", {}, overlay, trace);
    return trace;
}

core::StrategyTrace StrategyRunner::run_naive(const core::McqaInstance& instance,
                                              const ProtocolOverlay& overlay) const {
    core::StrategyTrace trace;
    auto hits = retrieve(instance.question, embed_text(instance.question),
                         config_.retrieval_depth, instance, 0, overlay, trace);
    std::vector<std::string> ids;
    for (const auto& h : hits) ids.push_back(h.doc_id);
    std::string context = assemble_context(ids, config_.max_context_tokens, trace);
    trace.final_distribution =
        score_mcqa(instance, "mcqa", {{"context", context}}, overlay, trace);
    return trace;
}

core::StrategyTrace StrategyRunner::run_fusion(const core::McqaInstance& instance,
                                               const ProtocolOverlay& overlay) const {
    if (config_.query_count <= 1) return run_naive(instance, overlay);

    core::StrategyTrace trace;
    core::Rng rng(core::mix_seed(core::mix_seed(config_.seed, overlay.run_seed), instance.id));

    std::vector<std::string> queries{instance.question};
    const auto& system_pool = prompts_->fusion_system_pool();
    const auto& user_pool = prompts_->fusion_user_pool();
    for (int i = 1; i < config_.query_count; ++i) {
        auto sys_idx = core::bounded(rng, system_pool.size());
        auto user_idx = core::bounded(rng, user_pool.size());
        std::string user = PromptLibrary::substitute(user_pool[user_idx],
                                                     {{"question", instance.question}});
        try {
            std::string reformulation = core::trim(
                chat_text({{"system", system_pool[sys_idx]}, {"user", user}},
                          config_.fusion_temperature, trace, "reformulate"));
            if (reformulation.empty()) throw core::ProviderError("empty reformulation");
            queries.push_back(reformulation);
        } catch (const core::ProviderError&) {
            trace.add_flag("fusion_fewer_queries");
        }
    }

    std::vector<retrieval::Ranking> rankings;
    std::size_t step_counter = 0;
    for (const auto& query : queries) {
        auto hits = retrieve(query, embed_text(query), config_.retrieval_depth, instance,
                             step_counter++, overlay, trace);
        retrieval::Ranking ranking;
        ranking.query = query;
        for (const auto& h : hits) ranking.doc_ids.push_back(h.doc_id);
        rankings.push_back(std::move(ranking));
    }

    retrieval::Ranking fused = retrieval::rrf_fuse(rankings, config_.fusion_smoothing_k);
    core::TraceStep fuse_step;
    fuse_step.action = "fuse";
    fuse_step.retrieved_ids = fused.doc_ids;
    trace.steps.push_back(std::move(fuse_step));

    std::string context = assemble_context(fused.doc_ids, config_.max_context_tokens, trace);
    trace.final_distribution =
        score_mcqa(instance, "mcqa", {{"context", context}}, overlay, trace);
    return trace;
}

core::StrategyTrace StrategyRunner::run_hyde(const core::McqaInstance& instance,
                                             const ProtocolOverlay& overlay) const {
    core::StrategyTrace trace;
    std::vector<providers::ChatMessage> messages{
        {"system", prompts_->raw("hyde_system")},
        {"user", prompts_->render("hyde_user", {{"question", instance.question}})}};

    std::string passage;
    for (int attempt = 0; attempt < 2 && passage.empty(); ++attempt) {
        passage = core::trim(chat_text(messages, config_.temperature, trace, "generate_passage"));
    }
    std::string retrieval_text = passage;
    if (retrieval_text.empty()) {
        trace.add_flag("hyde_question_fallback");
        retrieval_text = instance.question;
    }

    auto hits = retrieve(retrieval_text, embed_text(retrieval_text), config_.retrieval_depth,
                         instance, 0, overlay, trace);
    std::vector<std::string> ids;
    for (const auto& h : hits) ids.push_back(h.doc_id);
    std::string context = assemble_context(ids, config_.max_context_tokens, trace);
    trace.final_distribution =
        score_mcqa(instance, "mcqa", {{"context", context}}, overlay, trace);
    return trace;
}

core::StrategyTrace StrategyRunner::run_raptor(const core::McqaInstance& instance,
                                               const ProtocolOverlay& overlay) const {
    if (!tree_ || tree_->nodes.empty())
        throw core::StrategyError("raptor: no tree built for this corpus");
    core::StrategyTrace trace;
    for (const auto& f : tree_->build_flags) trace.add_flag(f);

    auto query_vec = embed_text(instance.question);

    // collapsed tree: every node of every layer competes on cosine similarity
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(tree_->nodes.size());
    for (std::size_t i = 0; i < tree_->nodes.size(); ++i) {
        scored.emplace_back(core::dot(tree_->nodes[i].embedding, query_vec), i);
    }
    std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return tree_->nodes[a.second].id < tree_->nodes[b.second].id;
    });

    // greedy under the token budget; stop at the first node that overflows
    std::vector<std::size_t> selected;
    std::size_t used_tokens = 0;
    for (const auto& [score, idx] : scored) {
        std::size_t cost = core::token_estimate(tree_->nodes[idx].text);
        if (used_tokens + cost > config_.max_context_tokens) break;
        selected.push_back(idx);
        used_tokens += cost;
    }

    core::TraceStep step;
    step.query = instance.question;
    step.action = "search_tree";
    for (auto idx : selected) step.retrieved_ids.push_back(tree_->nodes[idx].id);
    trace.steps.push_back(std::move(step));

    if (overlay.inject_irrelevant > 0 && !tree_->layers.empty()) {
        std::unordered_set<std::size_t> chosen(selected.begin(), selected.end());
        std::vector<std::size_t> pool;
        for (auto leaf : tree_->leaves()) {
            if (!chosen.count(leaf)) pool.push_back(leaf);
        }
        std::size_t want = std::min(overlay.inject_irrelevant, pool.size());
        core::Rng rng(core::mix_seed(core::mix_seed(overlay.run_seed, instance.id), "inject-0"));
        auto picks = core::sample_indices(rng, pool.size(), want);
        for (auto p : picks) selected.push_back(pool[p]);
        trace.add_note("irrelevant_injected:step=0,count=" + std::to_string(want));
    }

    std::vector<std::string> texts;
    for (auto idx : selected) texts.push_back(tree_->nodes[idx].text);
    std::string context = assemble_texts(texts, config_.max_context_tokens, trace);
    trace.final_distribution =
        score_mcqa(instance, "mcqa", {{"context", context}}, overlay, trace);
    return trace;
}

core::StrategyTrace StrategyRunner::run_replug(const core::McqaInstance& instance,
                                               const ProtocolOverlay& overlay) const {
    core::StrategyTrace trace;
    auto hits = retrieve(instance.question, embed_text(instance.question),
                         config_.retrieval_depth, instance, 0, overlay, trace);
    if (hits.empty()) throw core::StrategyError("replug: retrieval returned nothing");

    struct Candidate {
        double similarity;
        core::OptionDistribution distribution;
    };
    std::vector<Candidate> candidates;
    for (const auto& hit : hits) {
        try {
            std::string doc = document_text(hit.doc_id);
            core::StrategyTrace scratch;
            std::string context = assemble_texts({doc}, config_.max_context_tokens, scratch);
            auto dist = score_mcqa(instance, "mcqa", {{"context", context}}, overlay, trace,
                                   "score_doc");
            for (const auto& n : scratch.notes) trace.add_note(n);
            candidates.push_back({hit.score, std::move(dist)});
        } catch (const core::Error& e) {
            trace.add_flag("replug_dropped_doc");
            trace.add_note(std::string("replug_drop:") + hit.doc_id + ":" + e.what());
        }
    }
    if (candidates.empty())
        throw core::StrategyError("replug: every per-document scoring pass failed");

    std::vector<double> sims;
    std::vector<core::OptionDistribution> dists;
    for (auto& c : candidates) {
        sims.push_back(c.similarity);
        dists.push_back(std::move(c.distribution));
    }
    trace.final_distribution = replug_mixture(sims, dists);

    std::vector<double> lambda = core::softmax(sims);
    std::ostringstream note;
    note << "replug_lambdas:";
    for (std::size_t d = 0; d < lambda.size(); ++d) note << (d ? "," : "") << lambda[d];
    trace.add_note(note.str());
    return trace;
}

core::StrategyTrace StrategyRunner::run_selfrag(const core::McqaInstance& instance,
                                                const ProtocolOverlay& overlay) const {
    core::StrategyTrace trace;
    std::string decision = core::to_lower(core::trim(chat_text(
        {{"user", prompts_->render("selfrag_decision", {{"question", instance.question}})}},
        config_.temperature, trace, "decide")));

    bool do_retrieve = !core::contains(decision, "no_retrieve");
    if (!do_retrieve) {
        trace.final_distribution = score_mcqa(instance, "mcqa_no_context", {}, overlay, trace);
        return trace;
    }

    auto hits = retrieve(instance.question, embed_text(instance.question), config_.selfrag_depth,
                         instance, 0, overlay, trace);
    std::vector<std::string> ids;
    for (const auto& h : hits) ids.push_back(h.doc_id);

    // candidate context configurations: no context, top-3 passages, all passages
    std::vector<std::vector<std::string>> configs;
    configs.push_back({});
    configs.push_back(std::vector<std::string>(
        ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(3, ids.size()))));
    configs.push_back(ids);

    struct Candidate {
        double composite;
        core::OptionDistribution distribution;
    };
    std::vector<Candidate> candidates;
    for (std::size_t m = 0; m < configs.size(); ++m) {
        core::StrategyTrace scratch;
        std::string context = configs[m].empty()
                                  ? "(none)"
                                  : assemble_context(configs[m], config_.max_context_tokens,
                                                     scratch);
        for (const auto& n : scratch.notes) trace.add_note(n);

        std::string answer = chat_text(
            {{"user", prompts_->render("selfrag_answer",
                                       {{"context", context},
                                        {"question", instance.question},
                                        {"options", render_options(instance.options)}})}},
            config_.temperature, trace, "candidate_answer");

        std::string reflection = chat_text(
            {{"user", prompts_->render("selfrag_reflection", {{"context", context},
                                                              {"question", instance.question},
                                                              {"answer", core::trim(answer)}})}},
            config_.temperature, trace, "reflect");
        ReflectionScores scores = parse_reflection(reflection);
        if (scores.malformed) trace.add_flag("reflection_defaults");

        core::OptionDistribution dist =
            configs[m].empty()
                ? score_mcqa(instance, "mcqa_no_context", {}, overlay, trace, "score_candidate")
                : score_mcqa(instance, "mcqa", {{"context", context}}, overlay, trace,
                             "score_candidate");

        double composite = composite_reflection_score(scores, config_.selfrag_weights);
        candidates.push_back({composite, std::move(dist)});
        trace.add_note("selfrag_candidate:" + std::to_string(m) +
                       ":composite=" + std::to_string(composite));
    }

    std::size_t best = 0;
    for (std::size_t m = 1; m < candidates.size(); ++m) {
        if (candidates[m].composite > candidates[best].composite) best = m;
    }
    trace.add_note("selfrag_selected:" + std::to_string(best));
    trace.final_distribution = candidates[best].distribution;
    return trace;
}

core::StrategyTrace StrategyRunner::run_rat(const core::McqaInstance& instance,
                                            const ProtocolOverlay& overlay) const {
    core::StrategyTrace trace;
    std::string draft = core::trim(chat_text(
        {{"user", prompts_->render("rat_draft", {{"question", instance.question},
                                                 {"options", render_options(instance.options)}})}},
        config_.temperature, trace, "draft"));

    for (int t = 1; t <= config_.iterations; ++t) {
        std::string query = core::trim(chat_text(
            {{"user", prompts_->render("rat_query",
                                       {{"question", instance.question}, {"draft", draft}})}},
            config_.temperature, trace, "generate_query"));
        if (query.empty()) query = instance.question;

        const auto& index = index_or_throw();
        auto query_vec = embed_text(query);
        auto hits = retrieval::search_scored(index, query_vec, config_.retrieval_depth);
        std::vector<std::string> ids;
        for (const auto& h : hits) ids.push_back(h.doc_id);
        if (overlay.inject_irrelevant > 0) {
            std::unordered_set<std::string> exclude(ids.begin(), ids.end());
            std::uint64_t salt_step = overlay.inject_fresh_per_step ? t : 0;
            std::uint64_t seed = core::mix_seed(core::mix_seed(overlay.run_seed, instance.id),
                                                "inject-" + std::to_string(salt_step));
            for (auto& id :
                 retrieval::sample_irrelevant(index, exclude, overlay.inject_irrelevant, seed)) {
                ids.push_back(std::move(id));
            }
            trace.add_note("irrelevant_injected:step=" + std::to_string(t) +
                           ",count=" + std::to_string(overlay.inject_irrelevant));
        }

        core::StrategyTrace scratch;
        std::string context = assemble_context(ids, config_.max_context_tokens, scratch);
        for (const auto& n : scratch.notes) trace.add_note(n);

        std::string revised = core::trim(chat_text(
            {{"user", prompts_->render("rat_revise", {{"context", context},
                                                      {"question", instance.question},
                                                      {"draft", draft}})}},
            config_.temperature, trace, "retrieve_revise", query, ids));
        if (!revised.empty()) draft = revised;
    }

    trace.final_distribution =
        score_mcqa(instance, "mcqa_draft", {{"draft", draft}}, overlay, trace);
    return trace;
}

}  // namespace urag::strategies
