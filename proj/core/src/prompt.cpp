#include "tsgen/prompt.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "tsgen/errors.hpp"

namespace tsgen {

namespace {

constexpr std::string_view kDefaultSkeleton =
    "{{TASK}}\n\n{{REQUIREMENTS}}\n\n{{SCENARIO}}\n\n{{EXAMPLE}}\n\n{{CONTEXT}}\n\n"
    "{{GLOSSARY}}";

const std::set<std::string>& known_placeholders() {
    static const std::set<std::string> keys = {"TASK",    "REQUIREMENTS", "SCENARIO",
                                               "EXAMPLE", "CONTEXT",      "GLOSSARY"};
    return keys;
}

std::string render_task(const std::string& text) {
    return "## TASK\n" + text;
}

std::string render_requirements(std::span<const Requirement> reqs) {
    std::string out = "## REQUIREMENTS";
    for (const auto& r : reqs) {
        out += "\n- " + r.req_id + " [" + r.section + "]: " + r.statement;
    }
    return out;
}

std::string render_scenario(const std::string& description) {
    return "## SCENARIO\n" + description;
}

std::string render_example(const ExampleBlock& example) {
    std::string out = "## EXAMPLE";
    if (example.description) out += "\n" + *example.description + "\n";
    out += "\n" + example.scenario;
    return out;
}

std::string render_context(std::span<const RetrievalHit> hits) {
    std::string out = "## CONTEXT";
    for (const auto& h : hits) {
        out += "\n[" + std::to_string(h.rank) + "] " + h.text;
    }
    return out;
}

std::string render_glossary(std::span<const GlossaryEntry> glossary) {
    std::string out = "## GLOSSARY";
    for (const auto& g : glossary) {
        out += "\n" + g.term + ": " + g.definition;
    }
    return out;
}

// Collapse blank-line runs left behind by absent sections and trim the ends.
std::string tidy(std::string s) {
    std::string out;
    out.reserve(s.size());
    int newlines = 0;
    for (char c : s) {
        if (c == '\n') {
            ++newlines;
            if (newlines <= 2) out.push_back(c);
        } else {
            newlines = 0;
            out.push_back(c);
        }
    }
    std::size_t begin = out.find_first_not_of("\n ");
    std::size_t end = out.find_last_not_of("\n ");
    if (begin == std::string::npos) return {};
    return out.substr(begin, end - begin + 1);
}

std::vector<std::string> collect_req_ids(std::span<const Requirement> reqs) {
    std::vector<std::string> ids;
    ids.reserve(reqs.size());
    for (const auto& r : reqs) ids.push_back(r.req_id);
    return ids;
}

AssembledPrompt assemble(const PromptSections& sections, PromptStage stage,
                         const PromptTemplate& tmpl) {
    AssembledPrompt prompt;
    prompt.stage = stage;
    prompt.text = tmpl.render(sections, stage);
    prompt.token_count = count_tokens(prompt.text);
    prompt.included_k = stage == PromptStage::generation ? sections.context.size() : 0;
    prompt.included_req_ids = collect_req_ids(sections.requirements);
    return prompt;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string skeleton) : skeleton_(std::move(skeleton)) {}

const PromptTemplate& PromptTemplate::default_template() {
    static const PromptTemplate tmpl{std::string(kDefaultSkeleton)};
    return tmpl;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read template file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string skeleton = std::move(ss).str();
    validate_utf8(skeleton);

    // Reject placeholders outside the known set; typos would silently drop
    // whole sections otherwise.
    std::size_t pos = 0;
    while ((pos = skeleton.find("{{", pos)) != std::string::npos) {
        const auto end = skeleton.find("}}", pos + 2);
        if (end == std::string::npos) break;
        const std::string key = skeleton.substr(pos + 2, end - pos - 2);
        if (known_placeholders().count(key) == 0) {
            throw ValidationError("unknown template placeholder {{" + key + "}} in " +
                                  path.string());
        }
        pos = end + 2;
    }
    return PromptTemplate(std::move(skeleton));
}

std::string PromptTemplate::render(const PromptSections& sections, PromptStage stage) const {
    const bool generation = stage == PromptStage::generation;
    std::string text = skeleton_;
    auto substitute = [&text](std::string_view key, const std::string& value) {
        const std::string marker = "{{" + std::string(key) + "}}";
        std::size_t pos = 0;
        while ((pos = text.find(marker, pos)) != std::string::npos) {
            text.replace(pos, marker.size(), value);
            pos += value.size();
        }
    };
    substitute("TASK", render_task(sections.task_instruction));
    substitute("REQUIREMENTS", render_requirements(sections.requirements));
    substitute("SCENARIO", render_scenario(sections.scenario_description));
    substitute("EXAMPLE", sections.example ? render_example(*sections.example) : "");
    substitute("CONTEXT", generation ? render_context(sections.context) : "");
    substitute("GLOSSARY", generation ? render_glossary(sections.glossary) : "");
    return tidy(std::move(text));
}

AssembledPrompt build_retrieval_query(const RequirementsSet& reqs,
                                      const ScenarioRequest& request, PromptMode mode,
                                      const PromptTemplate& tmpl) {
    if (reqs.empty()) throw ValidationError("cannot build a prompt from zero requirements");
    if (mode == PromptMode::few_shot && !request.example_scenario) {
        throw ValidationError("few-shot prompting requires an example scenario");
    }
    PromptSections sections;
    sections.task_instruction = std::string(kDefaultTaskInstruction);
    sections.requirements = reqs.items;
    sections.scenario_description = request.description;
    if (mode == PromptMode::few_shot) {
        sections.example = ExampleBlock{request.example_description, *request.example_scenario};
    }
    return assemble(sections, PromptStage::retrieval_query, tmpl);
}

AssembledPrompt build_generation_prompt(const AssembledPrompt& query,
                                        std::span<const RetrievalHit> hits,
                                        std::span<const GlossaryEntry> glossary) {
    if (query.stage != PromptStage::retrieval_query) {
        throw ValidationError("generation prompts are built from a retrieval query");
    }
    AssembledPrompt prompt;
    prompt.stage = PromptStage::generation;
    prompt.text = query.text + "\n\n" + render_context(hits) + "\n\n" +
                  render_glossary(glossary);
    prompt.token_count = count_tokens(prompt.text);
    prompt.included_k = hits.size();
    prompt.included_req_ids = query.included_req_ids;
    return prompt;
}

AssembledPrompt enforce_token_budget(const PromptSections& sections, std::size_t budget,
                                     const EmbedderSpec& relevance_embedder,
                                     const PromptTemplate& tmpl) {
    if (budget == 0) throw ValidationError("token budget must be positive");

    PromptSections current = sections;
    AssembledPrompt assembled = assemble(current, PromptStage::generation, tmpl);
    if (assembled.token_count <= budget) return assembled;

    // Strategy (i): shed context hits, lowest rank first.
    while (!current.context.empty()) {
        current.context.pop_back();
        assembled = assemble(current, PromptStage::generation, tmpl);
        if (assembled.token_count <= budget) return assembled;
    }

    // Strategy (ii): shed requirements, least relevant to the scenario first.
    if (!current.requirements.empty()) {
        const EmbeddingVector scenario_vec =
            embed_text(current.scenario_description, relevance_embedder);
        struct Ranked {
            double similarity;
            std::size_t position;
        };
        std::vector<Ranked> drop_order;
        drop_order.reserve(current.requirements.size());
        for (std::size_t i = 0; i < current.requirements.size(); ++i) {
            drop_order.push_back(
                {cosine_similarity(embed_text(current.requirements[i].statement,
                                              relevance_embedder),
                                   scenario_vec),
                 i});
        }
        std::sort(drop_order.begin(), drop_order.end(), [](const Ranked& a, const Ranked& b) {
            if (a.similarity != b.similarity) return a.similarity < b.similarity;
            return a.position > b.position;  // ties: shed later-listed first
        });
        std::set<std::size_t> dropped;
        for (const auto& next : drop_order) {
            dropped.insert(next.position);
            PromptSections reduced = current;
            reduced.requirements.clear();
            for (std::size_t i = 0; i < current.requirements.size(); ++i) {
                if (dropped.count(i) == 0) reduced.requirements.push_back(current.requirements[i]);
            }
            assembled = assemble(reduced, PromptStage::generation, tmpl);
            if (assembled.token_count <= budget) return assembled;
        }
    }

    throw BudgetError("token budget " + std::to_string(budget) +
                          " is infeasible; the minimal achievable prompt is " +
                          std::to_string(assembled.token_count) + " tokens",
                      assembled.token_count);
}

}  // namespace tsgen
