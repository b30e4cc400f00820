#include "tsgen/harness.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <regex>

#include "support/test_util.hpp"
#include "tsgen/errors.hpp"

using namespace tsgen;

namespace {

GridInputs demo_inputs(std::size_t request_count = 2, bool with_examples = true) {
    GridInputs inputs;
    inputs.reqs.items = {
        {"R1", "VAT", "The app shall enable switching the USt from 20% to 18%."},
        {"R2", "VAT", "The app shall display the Switch-button in Zustellbasen."},
    };
    inputs.glossary = {{"VB", "Vorbereitung phase"}};

    std::vector<Passage> passages;
    const std::vector<std::string> texts = {
        "The delivery app supports VB mode for packet preparation.",
        "The Switch-button toggles the 18% USt rate for ZAB towns.",
        "Move the app from VB mode to ZL mode after preparation.",
    };
    for (std::size_t i = 0; i < texts.size(); ++i) {
        Passage p;
        p.passage_id = "manual#" + std::to_string(i);
        p.text = texts[i];
        p.token_count = count_tokens(texts[i]);
        p.source_doc = "manual";
        passages.push_back(std::move(p));
    }
    inputs.embedder = EmbedderSpec::local();
    inputs.index = build_index(passages, inputs.embedder);

    for (std::size_t i = 0; i < request_count; ++i) {
        GridInputs::Request req;
        req.label = "request-" + std::to_string(i);
        req.request.description = "Delivery scenario number " + std::to_string(i);
        if (with_examples) {
            req.request.example_scenario = "TS: Example\n1. Open the app.\n2. Scan.";
        }
        req.reference = "Delivery scenario number " + std::to_string(i) +
                        "\n1. Open the app in VB mode.\n2. Verify expected results.";
        inputs.requests.push_back(std::move(req));
    }
    return inputs;
}

ConfigGrid paper_shaped_grid() {
    ConfigGrid grid;
    grid.backends = {{"mock-a", "mock", "mock-small", 4096},
                     {"mock-b", "mock", "mock-large", 8192}};
    grid.modes = {PromptMode::zero_shot, PromptMode::few_shot};
    grid.k_values = {1, 3};
    return grid;
}

}  // namespace

// ===========================================================================
// run_grid

TEST(RunGrid, PaperShapedGridYieldsEightCells) {
    const auto result = run_grid(demo_inputs(), paper_shaped_grid());
    ASSERT_EQ(result.cells.size(), 8u);
    for (const auto& cell : result.cells) {
        EXPECT_FALSE(cell.failed) << cell.error;
        EXPECT_GE(cell.corpus.bleu, 0.0);
        EXPECT_LE(cell.corpus.bleu, 1.0);
        EXPECT_GE(cell.corpus.rouge, 0.0);
        EXPECT_LE(cell.corpus.rouge, 1.0);
        EXPECT_GE(cell.corpus.meteor, 0.0);
        EXPECT_LE(cell.corpus.meteor, 1.0);
        EXPECT_EQ(cell.scenarios.size(), 2u);
    }
    // Cell order is backend-major, then mode, then k.
    EXPECT_EQ(result.cells[0].backend_id, "mock-a");
    EXPECT_EQ(result.cells[0].mode, PromptMode::zero_shot);
    EXPECT_EQ(result.cells[0].k, 1u);
    EXPECT_EQ(result.cells[3].mode, PromptMode::few_shot);
    EXPECT_EQ(result.cells[3].k, 3u);
    EXPECT_EQ(result.cells[4].backend_id, "mock-b");
}

TEST(RunGrid, SingleCellGrid) {
    ConfigGrid grid;
    grid.backends = {{"mock", "mock", "mock", 4096}};
    grid.modes = {PromptMode::zero_shot};
    grid.k_values = {1};
    const auto result = run_grid(demo_inputs(), grid);
    EXPECT_EQ(result.cells.size(), 1u);
}

TEST(RunGrid, DeterministicAcrossRunsAndJobCounts) {
    const auto a = run_grid(demo_inputs(), paper_shaped_grid(), 1);
    const auto b = run_grid(demo_inputs(), paper_shaped_grid(), 1);
    const auto c = run_grid(demo_inputs(), paper_shaped_grid(), 4);
    EXPECT_EQ(render_report(a, ReportFormat::csv), render_report(b, ReportFormat::csv));
    EXPECT_EQ(render_report(a, ReportFormat::csv), render_report(c, ReportFormat::csv));
    EXPECT_EQ(render_scenarios_csv(a), render_scenarios_csv(c));
}

TEST(RunGrid, FewShotSkipsRequestsWithoutExamples) {
    auto inputs = demo_inputs(2, false);
    const auto result = run_grid(inputs, paper_shaped_grid());
    for (const auto& cell : result.cells) {
        if (cell.mode == PromptMode::few_shot) {
            for (const auto& s : cell.scenarios) {
                EXPECT_TRUE(s.skipped);
                EXPECT_FALSE(s.note.empty());
            }
        } else {
            for (const auto& s : cell.scenarios) EXPECT_FALSE(s.skipped);
        }
    }
}

TEST(RunGrid, BackendFailureAbortsOnlyThatCell) {
    auto inputs = demo_inputs();
    inputs.retry = {0, std::chrono::milliseconds(1)};
    ConfigGrid grid;
    grid.backends = {{"broken", "http://127.0.0.1:9/unreachable", "x", 4096},
                     {"mock", "mock", "mock", 4096}};
    grid.modes = {PromptMode::zero_shot};
    grid.k_values = {1};
    const auto result = run_grid(inputs, grid);
    ASSERT_EQ(result.cells.size(), 2u);
    EXPECT_TRUE(result.cells[0].failed);
    EXPECT_FALSE(result.cells[0].error.empty());
    EXPECT_FALSE(result.cells[1].failed);
}

TEST(RunGrid, NonZeroTemperatureRejected) {
    auto inputs = demo_inputs();
    inputs.temperature = 0.7;
    EXPECT_THROW(run_grid(inputs, paper_shaped_grid()), ValidationError);
}

TEST(RunGrid, EmptyAxesRejected) {
    EXPECT_THROW(run_grid(demo_inputs(), ConfigGrid{}), ValidationError);
}

TEST(ProvenanceDigest, StableAndSensitive) {
    Provenance p;
    p.config.backend_id = "mock";
    p.config.top_k = 3;
    p.included_k = 2;
    p.included_req_ids = {"R1", "R2"};
    p.hit_passage_ids = {"a#0", "a#1"};
    const auto digest = provenance_digest(p);
    EXPECT_EQ(digest.size(), 16u);
    EXPECT_EQ(digest, provenance_digest(p));
    Provenance q = p;
    q.hit_passage_ids = {"a#1", "a#0"};
    EXPECT_NE(provenance_digest(q), digest);
}

// ===========================================================================
// survey aggregation

TEST(AggregateSurvey, WorkedExample) {
    std::vector<LikertRecord> records = {
        {"s1", Criterion::relevance, 4, false},
        {"s2", Criterion::relevance, 4, false},
        {"s3", Criterion::relevance, 5, false},
        {"s4", Criterion::relevance, 4, false},
    };
    const auto summary = aggregate_survey(records);
    const auto& stats = summary.per_criterion.at(Criterion::relevance);
    EXPECT_NEAR(stats.mean, 4.25, 1e-12);
    EXPECT_NEAR(stats.stddev, std::sqrt(0.1875), 1e-12);  // 0.433013
    EXPECT_EQ(stats.count, 4u);
    EXPECT_EQ(stats.histogram[3], 3u);
    EXPECT_EQ(stats.histogram[4], 1u);
}

TEST(AggregateSurvey, AllEqualRatingsHaveZeroDeviation) {
    std::vector<LikertRecord> records(5, {"s", Criterion::coverage, 3, false});
    const auto summary = aggregate_survey(records);
    EXPECT_DOUBLE_EQ(summary.per_criterion.at(Criterion::coverage).stddev, 0.0);
}

TEST(AggregateSurvey, OutOfRangeRatingRejected) {
    std::vector<LikertRecord> records = {{"s", Criterion::relevance, 6, false}};
    EXPECT_THROW(aggregate_survey(records), ValidationError);
    records = {{"s", Criterion::relevance, 0, false}};
    EXPECT_THROW(aggregate_survey(records), ValidationError);
}

TEST(AggregateSurvey, ExcludedRecordsAreOmitted) {
    std::vector<LikertRecord> records = {
        {"good", Criterion::relevance, 5, false},
        {"gated", Criterion::relevance, 1, true},
    };
    const auto summary = aggregate_survey(records);
    const auto& stats = summary.per_criterion.at(Criterion::relevance);
    EXPECT_EQ(stats.count, 1u);
    EXPECT_DOUBLE_EQ(stats.mean, 5.0);
}

TEST(AggregateSurvey, EmptyAfterExclusionIsAnError) {
    std::vector<LikertRecord> records = {{"gated", Criterion::relevance, 1, true}};
    EXPECT_THROW(aggregate_survey(records), ValidationError);
}

TEST(AggregateSurvey, DuplicatingRecordsKeepsMeanAndPopulationDeviation) {
    std::vector<LikertRecord> records = {
        {"a", Criterion::coherence, 5, false},
        {"b", Criterion::coherence, 3, false},
        {"c", Criterion::coherence, 4, false},
    };
    auto doubled = records;
    doubled.insert(doubled.end(), records.begin(), records.end());
    const auto once = aggregate_survey(records);
    const auto twice = aggregate_survey(doubled);
    EXPECT_NEAR(once.per_criterion.at(Criterion::coherence).mean,
                twice.per_criterion.at(Criterion::coherence).mean, 1e-12);
    EXPECT_NEAR(once.per_criterion.at(Criterion::coherence).stddev,
                twice.per_criterion.at(Criterion::coherence).stddev, 1e-12);
}

TEST(AggregateSurvey, SampleDeviationFlag) {
    std::vector<LikertRecord> records = {
        {"a", Criterion::relevance, 4, false},
        {"b", Criterion::relevance, 5, false},
    };
    const auto population = aggregate_survey(records, false);
    const auto sample = aggregate_survey(records, true);
    EXPECT_NEAR(population.per_criterion.at(Criterion::relevance).stddev, 0.5, 1e-12);
    EXPECT_NEAR(sample.per_criterion.at(Criterion::relevance).stddev, std::sqrt(0.5), 1e-12);
}

TEST(ParseCriterion, AliasAndUnknown) {
    EXPECT_EQ(parse_criterion("coherence"), Criterion::coherence);
    EXPECT_EQ(parse_criterion("understandability"), Criterion::coherence);
    EXPECT_EQ(parse_criterion("Relevance"), Criterion::relevance);
    EXPECT_THROW(parse_criterion("novelty"), ValidationError);
}

TEST(LoadRatings, ParsesCsvAndValidates) {
    testutil::TempDir dir("ratings");
    testutil::write_file(dir.file("r.csv"),
                         "scenario_id,criterion,rating,excluded\n"
                         "s1,relevance,4,0\n"
                         "s1,understandability,5,false\n"
                         "s2,coverage,1,true\n");
    const auto records = load_ratings(dir.file("r.csv"));
    ASSERT_EQ(records.size(), 3u);
    EXPECT_EQ(records[1].criterion, Criterion::coherence);
    EXPECT_TRUE(records[2].excluded);

    testutil::write_file(dir.file("bad_rating.csv"),
                         "scenario_id,criterion,rating,excluded\ns1,relevance,6,0\n");
    EXPECT_THROW(load_ratings(dir.file("bad_rating.csv")), ValidationError);
    testutil::write_file(dir.file("frac.csv"),
                         "scenario_id,criterion,rating,excluded\ns1,relevance,4.5,0\n");
    EXPECT_THROW(load_ratings(dir.file("frac.csv")), ValidationError);
    testutil::write_file(dir.file("bad_flag.csv"),
                         "scenario_id,criterion,rating,excluded\ns1,relevance,4,maybe\n");
    EXPECT_THROW(load_ratings(dir.file("bad_flag.csv")), ValidationError);
}

// ===========================================================================
// rendering

TEST(RenderReport, GridCsvHasOneRowPerCell) {
    const auto result = run_grid(demo_inputs(), paper_shaped_grid());
    const auto csv = render_report(result, ReportFormat::csv);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);  // header + 8 cells
    EXPECT_TRUE(csv.starts_with("backend,mode,k,status,"));
}

TEST(RenderReport, FailedCellsCarryStatusMarker) {
    GridResult result;
    GridCell cell;
    cell.backend_id = "x";
    cell.mode = PromptMode::zero_shot;
    cell.k = 1;
    cell.failed = true;
    cell.error = "backend down";
    result.cells.push_back(cell);
    const auto csv = render_report(result, ReportFormat::csv);
    EXPECT_NE(csv.find("x,zs,1,failed"), std::string::npos);
    const auto table = render_report(result, ReportFormat::table);
    EXPECT_NE(table.find("failed"), std::string::npos);
}

TEST(RenderReport, TableUsesThreeDecimals) {
    const auto result = run_grid(demo_inputs(), paper_shaped_grid());
    const auto table = render_report(result, ReportFormat::table);
    // Lines look like: "mock-a ... 0.123  0.456  0.789"
    EXPECT_TRUE(std::regex_search(table, std::regex{R"(\d\.\d{3}  \d\.\d{3}  \d\.\d{3})"}));
}

TEST(RenderReport, SurveyShowsMeanSigmaPresentation) {
    std::vector<LikertRecord> records;
    for (const auto criterion : {Criterion::relevance, Criterion::coverage,
                                 Criterion::correctness, Criterion::coherence,
                                 Criterion::feasibility}) {
        records.push_back({"s1", criterion, 4, false});
        records.push_back({"s2", criterion, 5, false});
    }
    const auto summary = aggregate_survey(records);
    const auto table = render_report(summary, ReportFormat::table);
    EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 5);
    EXPECT_TRUE(std::regex_search(table, std::regex{R"(relevance\s+4\.50 \(0\.50\))"}));
    const auto csv = render_report(summary, ReportFormat::csv);
    EXPECT_TRUE(csv.starts_with("criterion,mean,stddev,count,"));
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);  // header + 5 criteria
}

// ===========================================================================
// config files

TEST(LoadGridConfig, ParsesFullFile) {
    testutil::TempDir dir("grid");
    testutil::write_file(dir.file("grid.conf"),
                         "# demo grid\n"
                         "backend = mock-a, mock, mock-small, 4096\n"
                         "backend = mock-b, mock, mock-large, 8192\n"
                         "modes = zs, fs\n"
                         "k = 1, 3\n"
                         "index = data/index.tsv\n"
                         "reqs = data/reqs.csv\n"
                         "glossary = data/glossary.csv\n"
                         "request = data/r1.txt, data/r1.ref\n"
                         "request = data/r2.txt, data/r2.ref\n"
                         "budget = 2048\n");
    const auto config = load_grid_config(dir.file("grid.conf"));
    EXPECT_EQ(config.grid.backends.size(), 2u);
    EXPECT_EQ(config.grid.backends[1].token_limit, 8192u);
    EXPECT_EQ(config.grid.modes.size(), 2u);
    EXPECT_EQ(config.grid.k_values, (std::vector<std::size_t>{1, 3}));
    EXPECT_EQ(config.grid.cell_count(), 8u);
    EXPECT_EQ(config.index_path, dir.path() / "data/index.tsv");
    EXPECT_EQ(config.request_paths.size(), 2u);
    EXPECT_EQ(config.budget_override, std::make_optional<std::size_t>(2048));
}

TEST(LoadGridConfig, RejectsIncompleteOrUnknown) {
    testutil::TempDir dir("grid");
    testutil::write_file(dir.file("no_backend.conf"),
                         "modes = zs\nk = 1\nindex = i\nreqs = r\nrequest = a, b\n");
    EXPECT_THROW(load_grid_config(dir.file("no_backend.conf")), ValidationError);
    testutil::write_file(dir.file("unknown.conf"),
                         "backend = m, mock, m, 10\nmodes = zs\nk = 1\nindex = i\n"
                         "reqs = r\nrequest = a, b\nwat = 1\n");
    EXPECT_THROW(load_grid_config(dir.file("unknown.conf")), ValidationError);
    testutil::write_file(dir.file("bad_mode.conf"),
                         "backend = m, mock, m, 10\nmodes = sideways\nk = 1\nindex = i\n"
                         "reqs = r\nrequest = a, b\n");
    EXPECT_THROW(load_grid_config(dir.file("bad_mode.conf")), ValidationError);
}

TEST(LoadBackendProfiles, ParsesAndValidates) {
    testutil::TempDir dir("backends");
    testutil::write_file(dir.file("b.conf"),
                         "backend = mock, mock, mock, 4096\n"
                         "backend = gpt, https://api/v1/chat, gpt-x, 8192\n");
    const auto profiles = load_backend_profiles(dir.file("b.conf"));
    ASSERT_EQ(profiles.size(), 2u);
    EXPECT_TRUE(profiles[0].is_mock());
    EXPECT_FALSE(profiles[1].is_mock());
    testutil::write_file(dir.file("bad.conf"), "backend = onlyone, two\n");
    EXPECT_THROW(load_backend_profiles(dir.file("bad.conf")), ValidationError);
}
