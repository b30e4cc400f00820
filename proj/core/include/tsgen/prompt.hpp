#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsgen/corpus.hpp"
#include "tsgen/embedding.hpp"
#include "tsgen/vector_index.hpp"

namespace tsgen {

enum class PromptMode { zero_shot, few_shot };

enum class PromptStage { retrieval_query, generation };

struct ExampleBlock {
    std::optional<std::string> description;
    std::string scenario;
};

// The staged prompt content. Context and glossary belong to the generation
// stage only; the retrieval query must never carry glossary material so that
// terminology does not mislead retrieval.
struct PromptSections {
    std::string task_instruction;
    std::vector<Requirement> requirements;
    std::string scenario_description;
    std::optional<ExampleBlock> example;   // present iff few-shot
    std::vector<RetrievalHit> context;     // rank order
    std::vector<GlossaryEntry> glossary;
};

struct AssembledPrompt {
    PromptStage stage = PromptStage::retrieval_query;
    std::string text;
    std::size_t token_count = 0;
    std::size_t included_k = 0;
    std::vector<std::string> included_req_ids;
};

// Skeleton with {{TASK}}, {{REQUIREMENTS}}, {{SCENARIO}}, {{EXAMPLE}},
// {{CONTEXT}} and {{GLOSSARY}} placeholders. Each placeholder expands to the
// rendered section including its fixed `## NAME` header line, or to nothing
// when the section is absent at the current stage.
class PromptTemplate {
public:
    static const PromptTemplate& default_template();
    static PromptTemplate load(const std::filesystem::path& path);

    const std::string& skeleton() const { return skeleton_; }
    std::string render(const PromptSections& sections, PromptStage stage) const;

private:
    explicit PromptTemplate(std::string skeleton);
    std::string skeleton_;
};

inline constexpr std::string_view kDefaultTaskInstruction =
    "Write one test scenario with a short title and numbered steps that validates the "
    "behaviour described below against the listed requirements. Keep domain terms exactly "
    "as written in the requirements and glossary.";

// Task, requirements and scenario description (plus the example block for
// few-shot), each under its fixed header. No context, no glossary.
AssembledPrompt build_retrieval_query(const RequirementsSet& reqs,
                                      const ScenarioRequest& request, PromptMode mode,
                                      const PromptTemplate& tmpl = PromptTemplate::default_template());

// Appends the context block (hit texts in rank order, each prefixed by its
// rank) and the glossary block (term: definition, byte-exact) to the query.
AssembledPrompt build_generation_prompt(const AssembledPrompt& query,
                                        std::span<const RetrievalHit> hits,
                                        std::span<const GlossaryEntry> glossary);

// Returns the assembled generation prompt if it fits the budget. Otherwise
// drops context hits from the lowest rank upward, one at a time; only when no
// hits remain, drops requirements in ascending relevance to the scenario
// description (relevance = cosine similarity of their embeddings). The
// example block and the glossary are never dropped. Throws BudgetError with
// the minimal achievable token count when both strategies are exhausted.
AssembledPrompt enforce_token_budget(const PromptSections& sections, std::size_t budget,
                                     const EmbedderSpec& relevance_embedder,
                                     const PromptTemplate& tmpl = PromptTemplate::default_template());

}  // namespace tsgen
