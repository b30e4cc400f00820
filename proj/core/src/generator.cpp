#include "tsgen/generator.hpp"

#include <json.hpp>

#include <algorithm>
#include <regex>
#include <sstream>

#include "http_client.hpp"
#include "tsgen/errors.hpp"

namespace tsgen {

namespace {

using nlohmann::json;

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(pos));
            break;
        }
        lines.emplace_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Single-line snippet of the first `limit` tokens of a passage.
std::string leading_tokens(const std::string& text, std::size_t limit) {
    const auto spans = token_spans(text);
    if (spans.empty()) return {};
    const std::size_t n = std::min(limit, spans.size());
    std::string out = text.substr(spans[0].begin, spans[n - 1].end - spans[0].begin);
    std::replace(out.begin(), out.end(), '\n', ' ');
    return out;
}

// The block under `## NAME` up to the next section header.
std::string_view section_of(std::string_view prompt, std::string_view header) {
    const std::string needle = "## " + std::string(header);
    auto pos = prompt.find(needle);
    if (pos == std::string_view::npos) return {};
    pos += needle.size();
    if (pos < prompt.size() && prompt[pos] == '\n') ++pos;
    auto end = prompt.find("\n## ", pos);
    if (end == std::string_view::npos) end = prompt.size();
    return prompt.substr(pos, end - pos);
}

}  // namespace

std::string mock_backend(const AssembledPrompt& prompt) {
    const std::string_view text = prompt.text;

    std::string title = "Generated scenario";
    if (const auto scenario = section_of(text, "SCENARIO"); !scenario.empty()) {
        const auto nl = scenario.find('\n');
        title = trim(scenario.substr(0, nl));
    }

    std::vector<std::string> steps;
    static const std::regex entry_start(R"(^\[(\d+)\] (.*)$)");
    const auto context = section_of(text, "CONTEXT");
    std::string entry_rank;
    std::string entry_text;
    auto flush_entry = [&] {
        if (entry_rank.empty()) return;
        steps.push_back("Apply context " + entry_rank + ": " + leading_tokens(entry_text, 8));
        entry_rank.clear();
        entry_text.clear();
    };
    for (const auto& line : split_lines(context)) {
        if (std::smatch m; std::regex_match(line, m, entry_start)) {
            flush_entry();
            entry_rank = m[1].str();
            entry_text = m[2].str();
        } else if (!entry_rank.empty()) {
            entry_text += "\n" + line;
        }
    }
    flush_entry();

    for (const auto& line : split_lines(section_of(text, "GLOSSARY"))) {
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        const std::string term = trim(line.substr(0, colon));
        if (!term.empty()) steps.push_back("Verify term " + term);
    }
    steps.push_back("Verify expected results.");

    std::string out = title;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        out += "\n" + std::to_string(i + 1) + ". " + steps[i];
    }
    return out;
}

RemoteBackend::RemoteBackend(BackendProfile profile, RetryPolicy retry,
                             std::size_t max_output_tokens)
    : profile_(std::move(profile)), retry_(retry), max_output_tokens_(max_output_tokens) {}

std::string RemoteBackend::complete(const AssembledPrompt& prompt, double temperature) {
    const json body = {
        {"model", profile_.model_name},
        {"messages",
         json::array({json{{"role", "system"}, {"content", std::string(kSystemMessage)}},
                      json{{"role", "user"}, {"content", prompt.text}}})},
        {"temperature", temperature},
        {"max_tokens", max_output_tokens_},
    };
    const std::string response =
        detail::post_json(profile_.endpoint, body.dump(),
                          detail::bearer_token("TSGEN_BACKEND_API_KEY"), retry_, "backend");
    json parsed;
    try {
        parsed = json::parse(response);
    } catch (const json::exception&) {
        throw BackendError("backend returned invalid JSON from " + profile_.endpoint);
    }
    if (parsed.contains("choices") && parsed["choices"].is_array() &&
        !parsed["choices"].empty()) {
        const auto& first = parsed["choices"][0];
        if (first.contains("message") && first["message"].contains("content")) {
            return first["message"]["content"].get<std::string>();
        }
        if (first.contains("text")) return first["text"].get<std::string>();
    }
    if (parsed.contains("content") && parsed["content"].is_string()) {
        return parsed["content"].get<std::string>();
    }
    throw BackendError("backend response carries no message text (" + profile_.endpoint + ")");
}

std::unique_ptr<GenerationBackend> make_backend(const BackendProfile& profile,
                                                const RetryPolicy& retry) {
    if (profile.is_mock()) return std::make_unique<MockBackend>();
    return std::make_unique<RemoteBackend>(profile, retry);
}

GeneratedScenario parse_scenario_output(std::string_view raw) {
    if (trim(raw).empty()) throw OutputParseError("backend output is empty", std::string(raw));

    static const std::regex numbered(R"(^\s*\d+[.)]\s+(.*)$)");
    static const std::regex bulleted(R"(^\s*[-*]\s+(.*)$)");
    static const std::regex heading_marks(R"(^#+\s*)");
    static const std::regex title_label(R"(^(TS|Scenario|Title|Test\s+Scenario)\s*\d*\s*:\s*)",
                                        std::regex::icase);

    GeneratedScenario scenario;
    bool have_title = false;
    for (const auto& line : split_lines(raw)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (!have_title) {
            std::string title = std::regex_replace(t, heading_marks, "");
            const std::string unlabeled = std::regex_replace(title, title_label, "");
            scenario.title = unlabeled.empty() ? title : unlabeled;
            have_title = true;
            continue;
        }
        std::smatch m;
        if (std::regex_match(t, m, numbered) || std::regex_match(t, m, bulleted)) {
            scenario.steps.push_back(m[1].str());
        } else if (!scenario.steps.empty()) {
            // continuation of the previous step (wrapped expected results etc.)
            scenario.steps.back() += " " + t;
        }
    }
    if (scenario.steps.empty()) {
        throw OutputParseError("no scenario steps found in backend output", std::string(raw));
    }
    scenario.raw_output = std::string(raw);
    return scenario;
}

std::string render_scenario(const GeneratedScenario& scenario) {
    std::string out = scenario.title;
    for (std::size_t i = 0; i < scenario.steps.size(); ++i) {
        std::string step = scenario.steps[i];
        std::replace(step.begin(), step.end(), '\n', ' ');
        out += "\n" + std::to_string(i + 1) + ". " + step;
    }
    return out;
}

namespace {

void validate_config(const GenerationConfig& config) {
    if (config.top_k == 0) throw ValidationError("top_k must be at least 1");
    if (config.temperature < 0.0) throw ValidationError("temperature must be non-negative");
    if (config.token_budget == 0) throw ValidationError("token budget must be positive");
    if (config.token_budget > config.backend_token_limit) {
        throw ValidationError("token budget " + std::to_string(config.token_budget) +
                              " exceeds the backend token limit " +
                              std::to_string(config.backend_token_limit));
    }
}

void check_index_compatible(const VectorIndex& index, const EmbedderSpec& embedder) {
    if (index.embedder_fingerprint != embedder.fingerprint()) {
        throw ValidationError("stale index: built with \"" + index.embedder_fingerprint +
                              "\" but the pipeline is configured for \"" +
                              embedder.fingerprint() + "\"; rebuild with `index build`");
    }
}

PromptSections sections_for(const RequirementsSet& reqs, const ScenarioRequest& request,
                            PromptMode mode, std::span<const GlossaryEntry> glossary,
                            std::vector<RetrievalHit> hits) {
    PromptSections sections;
    sections.task_instruction = std::string(kDefaultTaskInstruction);
    sections.requirements = reqs.items;
    sections.scenario_description = request.description;
    if (mode == PromptMode::few_shot) {
        sections.example = ExampleBlock{request.example_description, *request.example_scenario};
    }
    sections.context = std::move(hits);
    sections.glossary.assign(glossary.begin(), glossary.end());
    return sections;
}

}  // namespace

GeneratedScenario generate_scenario(const RequirementsSet& reqs,
                                    const ScenarioRequest& request,
                                    std::span<const GlossaryEntry> glossary,
                                    const VectorIndex& index, const GenerationConfig& config,
                                    GenerationBackend& backend, const EmbedderSpec& embedder,
                                    const PromptTemplate& tmpl) {
    validate_config(config);
    check_index_compatible(index, embedder);

    const AssembledPrompt query = build_retrieval_query(reqs, request, config.prompt_mode, tmpl);
    const EmbeddingVector query_vec = embed_text(query.text, embedder);
    std::vector<RetrievalHit> hits = query_top_k(index, query_vec, config.top_k);

    PromptSections sections =
        sections_for(reqs, request, config.prompt_mode, glossary, std::move(hits));
    const AssembledPrompt prompt =
        enforce_token_budget(sections, config.token_budget, embedder, tmpl);

    if (prompt.token_count > config.token_budget) {
        throw std::logic_error("prompt exceeds the token budget at the backend boundary");
    }
    const std::string raw = backend.complete(prompt, config.temperature);

    GeneratedScenario scenario = parse_scenario_output(raw);
    scenario.provenance.config = config;
    scenario.provenance.included_k = prompt.included_k;
    scenario.provenance.included_req_ids = prompt.included_req_ids;
    for (std::size_t i = 0; i < prompt.included_k; ++i) {
        scenario.provenance.hit_passage_ids.push_back(sections.context[i].passage_id);
    }
    return scenario;
}

GeneratedScenario regenerate_scenario(const Provenance& provenance,
                                      const RequirementsSet& reqs,
                                      const ScenarioRequest& request,
                                      std::span<const GlossaryEntry> glossary,
                                      const VectorIndex& index, GenerationBackend& backend,
                                      const EmbedderSpec& embedder,
                                      const PromptTemplate& tmpl) {
    validate_config(provenance.config);
    check_index_compatible(index, embedder);

    // The original retrieval query over the full requirement set gives the
    // reference point for the recorded similarities.
    const AssembledPrompt query =
        build_retrieval_query(reqs, request, provenance.config.prompt_mode, tmpl);
    const EmbeddingVector query_vec = embed_text(query.text, embedder);

    RequirementsSet kept;
    for (const auto& req : reqs.items) {
        if (std::find(provenance.included_req_ids.begin(), provenance.included_req_ids.end(),
                      req.req_id) != provenance.included_req_ids.end()) {
            kept.items.push_back(req);
        }
    }
    if (kept.size() != provenance.included_req_ids.size()) {
        throw ValidationError("provenance names requirements missing from the input set");
    }

    std::vector<RetrievalHit> hits;
    for (std::size_t i = 0; i < provenance.hit_passage_ids.size(); ++i) {
        const IndexEntry* entry = index.find(provenance.hit_passage_ids[i]);
        if (entry == nullptr) {
            throw ValidationError("provenance names passage \"" +
                                  provenance.hit_passage_ids[i] +
                                  "\" missing from the index");
        }
        hits.push_back({entry->passage_id, entry->text,
                        cosine_similarity(entry->vector, query_vec), i + 1});
    }

    PromptSections sections = sections_for(kept, request, provenance.config.prompt_mode,
                                           glossary, std::move(hits));
    AssembledPrompt prompt;
    prompt.stage = PromptStage::generation;
    prompt.text = tmpl.render(sections, PromptStage::generation);
    prompt.token_count = count_tokens(prompt.text);
    prompt.included_k = sections.context.size();
    prompt.included_req_ids = provenance.included_req_ids;
    if (prompt.token_count > provenance.config.token_budget) {
        throw ValidationError("replayed prompt exceeds the recorded token budget");
    }

    const std::string raw = backend.complete(prompt, provenance.config.temperature);
    GeneratedScenario scenario = parse_scenario_output(raw);
    scenario.provenance = provenance;
    return scenario;
}

}  // namespace tsgen
