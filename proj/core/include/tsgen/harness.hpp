#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsgen/generator.hpp"
#include "tsgen/metrics.hpp"

namespace tsgen {

// The evaluation grid: every backend x prompt mode x k combination is a cell.
struct ConfigGrid {
    std::vector<BackendProfile> backends;
    std::vector<PromptMode> modes;
    std::vector<std::size_t> k_values;
    std::size_t cell_count() const {
        return backends.size() * modes.size() * k_values.size();
    }
};

struct GridInputs {
    RequirementsSet reqs;
    std::vector<GlossaryEntry> glossary;
    VectorIndex index;
    EmbedderSpec embedder;
    // One scenario request per reference scenario text, plus a display label.
    struct Request {
        std::string label;
        ScenarioRequest request;
        std::string reference;
    };
    std::vector<Request> requests;
    double temperature = 0.0;  // grid runs require 0
    std::optional<std::size_t> budget_override;
    MetricParams metric_params;
    RetryPolicy retry;
};

struct ScenarioResult {
    std::string label;
    bool skipped = false;      // few-shot cell, request without an example
    std::string note;
    MetricReport report;
    std::string provenance_digest;
};

struct GridCell {
    std::string backend_id;
    PromptMode mode = PromptMode::zero_shot;
    std::size_t k = 1;
    bool failed = false;
    std::string error;
    MetricReport corpus;
    std::vector<ScenarioResult> scenarios;
};

struct GridResult {
    std::vector<GridCell> cells;
};

// Runs every cell over every request, scoring generated scenarios against
// their references. Backend and budget failures abort only their own cell.
// Cells may run concurrently (jobs > 1); assembly order is deterministic.
GridResult run_grid(const GridInputs& inputs, const ConfigGrid& grid, std::size_t jobs = 1);

// 16-hex-digit digest of a provenance record.
std::string provenance_digest(const Provenance& provenance);

enum class Criterion { relevance, coverage, correctness, coherence, feasibility };

const char* criterion_name(Criterion c);

// "understandability" is accepted as an alias of coherence.
Criterion parse_criterion(std::string_view name);

struct LikertRecord {
    std::string scenario_id;
    Criterion criterion = Criterion::relevance;
    int rating = 0;   // integral, 1..5
    bool excluded = false;
};

struct CriterionStats {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t count = 0;
    std::array<std::size_t, 5> histogram{};  // ratings 1..5
};

struct SurveySummary {
    std::map<Criterion, CriterionStats> per_criterion;
    bool sample_stddev = false;
};

// Mean and standard deviation per criterion over non-excluded records.
// Population standard deviation (divisor n) by default.
SurveySummary aggregate_survey(std::span<const LikertRecord> records,
                               bool sample_stddev = false);

// CSV with header scenario_id,criterion,rating,excluded.
std::vector<LikertRecord> load_ratings(const std::filesystem::path& path);

enum class ReportFormat { csv, table };

// Grid: one row per cell; scores at 9 decimals in CSV, 3 in the table.
std::string render_report(const GridResult& result, ReportFormat format);
// Survey: one row per criterion, "mean (stddev)" presentation in the table.
std::string render_report(const SurveySummary& summary, ReportFormat format);
// One row per cell x request with per-scenario scores and digests.
std::string render_scenarios_csv(const GridResult& result);

// Grid configuration file: `key = value` lines, # comments, repeatable
// backend/request keys, comma-separated arrays. Paths resolve relative to
// the file.
struct GridConfig {
    ConfigGrid grid;
    std::filesystem::path index_path;
    std::filesystem::path reqs_path;
    std::optional<std::filesystem::path> glossary_path;
    std::vector<std::pair<std::filesystem::path, std::filesystem::path>> request_paths;
    double temperature = 0.0;
    std::optional<std::size_t> budget_override;
    std::string embed_endpoint;  // remote-embedder indices only
};

GridConfig load_grid_config(const std::filesystem::path& path);

// Backend profile file: repeatable `backend = id, endpoint, model, limit`.
std::vector<BackendProfile> load_backend_profiles(const std::filesystem::path& path);

}  // namespace tsgen
