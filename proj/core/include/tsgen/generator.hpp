#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tsgen/corpus.hpp"
#include "tsgen/prompt.hpp"
#include "tsgen/vector_index.hpp"

namespace tsgen {

// Fixed system message sent to chat backends; printed by `show system-message`.
inline constexpr std::string_view kSystemMessage = "You are a software test engineer.";

struct GenerationConfig {
    std::string backend_id;
    PromptMode prompt_mode = PromptMode::zero_shot;
    std::size_t top_k = 1;
    double temperature = 0.0;
    std::size_t token_budget = 3072;        // default: 4096 scaled by 0.75
    std::size_t backend_token_limit = 4096;
};

struct BackendProfile {
    std::string backend_id;
    std::string endpoint;  // "mock" or a chat-completion URL
    std::string model_name;
    std::size_t token_limit = 4096;
    bool is_mock() const { return endpoint == "mock"; }
};

// Everything needed to regenerate a scenario byte-identically against the
// same index and a deterministic backend.
struct Provenance {
    GenerationConfig config;
    std::size_t included_k = 0;
    std::vector<std::string> included_req_ids;
    std::vector<std::string> hit_passage_ids;
};

struct GeneratedScenario {
    std::string title;
    std::vector<std::string> steps;  // at least one
    std::string raw_output;
    Provenance provenance;
};

class GenerationBackend {
public:
    virtual ~GenerationBackend() = default;
    virtual std::string complete(const AssembledPrompt& prompt, double temperature) = 0;
};

// Deterministic offline stand-in: title from the prompt's scenario line, one
// step per context passage, one per glossary term, one fixed closing step.
std::string mock_backend(const AssembledPrompt& prompt);

class MockBackend final : public GenerationBackend {
public:
    std::string complete(const AssembledPrompt& prompt, double /*temperature*/) override {
        return mock_backend(prompt);
    }
};

// Chat-completion client: system message + the assembled prompt as the user
// message, temperature and a max output token bound. Bearer token comes from
// TSGEN_BACKEND_API_KEY or TSGEN_API_KEY.
class RemoteBackend final : public GenerationBackend {
public:
    RemoteBackend(BackendProfile profile, RetryPolicy retry = {},
                  std::size_t max_output_tokens = 1024);
    std::string complete(const AssembledPrompt& prompt, double temperature) override;

private:
    BackendProfile profile_;
    RetryPolicy retry_;
    std::size_t max_output_tokens_;
};

std::unique_ptr<GenerationBackend> make_backend(const BackendProfile& profile,
                                                const RetryPolicy& retry = {});

// First non-empty line (minus a leading label such as `TS:` or markdown
// heading markers) becomes the title; enumerated or bulleted lines become
// steps. Throws OutputParseError when no steps can be found.
GeneratedScenario parse_scenario_output(std::string_view raw);

// Canonical numbered rendering: title line, then "1. step" lines. Parsing it
// back yields the same title and steps.
std::string render_scenario(const GeneratedScenario& scenario);

// The full pipeline: retrieval query, query embedding, top-k retrieval,
// budget-enforced generation prompt, backend call, output parsing.
GeneratedScenario generate_scenario(const RequirementsSet& reqs,
                                    const ScenarioRequest& request,
                                    std::span<const GlossaryEntry> glossary,
                                    const VectorIndex& index, const GenerationConfig& config,
                                    GenerationBackend& backend, const EmbedderSpec& embedder,
                                    const PromptTemplate& tmpl = PromptTemplate::default_template());

// Replays a provenance record against the same inputs and index without
// re-running retrieval or budget enforcement.
GeneratedScenario regenerate_scenario(const Provenance& provenance,
                                      const RequirementsSet& reqs,
                                      const ScenarioRequest& request,
                                      std::span<const GlossaryEntry> glossary,
                                      const VectorIndex& index, GenerationBackend& backend,
                                      const EmbedderSpec& embedder,
                                      const PromptTemplate& tmpl = PromptTemplate::default_template());

}  // namespace tsgen
