// tsgen: index domain documentation, generate test scenarios from
// requirements, and evaluate generated scenarios against references.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "tsgen/corpus.hpp"
#include "tsgen/embedding.hpp"
#include "tsgen/errors.hpp"
#include "tsgen/generator.hpp"
#include "tsgen/harness.hpp"
#include "tsgen/metrics.hpp"
#include "tsgen/prompt.hpp"
#include "tsgen/vector_index.hpp"

namespace {

using namespace tsgen;

RetryPolicy retry_from_env() {
    RetryPolicy policy;
    if (const char* ms = std::getenv("TSGEN_BACKOFF_MS"); ms != nullptr && *ms != '\0') {
        policy.initial_backoff = std::chrono::milliseconds(std::atol(ms));
    }
    return policy;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path.string());
    out << content;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

struct IndexBuildArgs {
    std::string corpus_dir;
    std::string out_file;
    std::size_t max_tokens = 512;
    std::size_t overlap = 0;
    std::size_t dimension = 256;
    std::string embedder = "local";
    std::string embed_endpoint;
    std::string embed_model;
};

int cmd_index_build(const IndexBuildArgs& args) {
    EmbedderSpec spec;
    if (args.embedder == "local") {
        spec = EmbedderSpec::local(args.dimension);
    } else if (args.embedder == "remote") {
        if (args.embed_endpoint.empty()) {
            throw ValidationError("--embed-endpoint is required for the remote embedder");
        }
        spec = EmbedderSpec::remote(args.embed_endpoint, args.embed_model, args.dimension);
    } else {
        throw ValidationError("--embedder must be local or remote");
    }

    const auto docs = load_corpus_dir(args.corpus_dir);
    ChunkingPolicy policy{args.max_tokens, args.overlap};
    std::vector<Passage> passages;
    for (const auto& doc : docs) {
        auto chunks = chunk_document(doc, policy);
        passages.insert(passages.end(), std::make_move_iterator(chunks.begin()),
                        std::make_move_iterator(chunks.end()));
    }
    if (passages.empty()) {
        throw ValidationError("corpus produced zero passages; nothing to index");
    }
    const VectorIndex index = build_index(passages, spec, retry_from_env());
    persist_index(index, args.out_file);
    std::cout << "indexed " << index.size() << " passages from " << docs.size()
              << " documents into " << args.out_file << "\n";
    return 0;
}

struct IndexQueryArgs {
    std::string index_file;
    std::string text;
    std::size_t k = 3;
    std::string embed_endpoint;
};

int cmd_index_query(const IndexQueryArgs& args) {
    const VectorIndex index = load_index(args.index_file);
    const EmbedderSpec spec =
        EmbedderSpec::from_fingerprint(index.embedder_fingerprint, args.embed_endpoint);
    const EmbeddingVector query = embed_text(args.text, spec, retry_from_env());
    std::cout << "rank\tsimilarity\tpassage_id\ttext\n";
    for (const auto& hit : query_top_k(index, query, args.k)) {
        std::string preview = hit.text;
        std::replace(preview.begin(), preview.end(), '\n', ' ');
        if (preview.size() > 120) preview = preview.substr(0, 117) + "...";
        char sim[32];
        std::snprintf(sim, sizeof(sim), "%.9f", hit.similarity);
        std::cout << hit.rank << '\t' << sim << '\t' << hit.passage_id << '\t' << preview
                  << "\n";
    }
    return 0;
}

struct GenerateArgs {
    std::string index_file;
    std::string reqs_file;
    std::string request_file;
    std::string glossary_file;
    std::string mode = "zs";
    std::size_t k = 1;
    std::string backend_id = "mock";
    std::string backends_file;
    std::size_t budget = 0;  // 0: derive from the backend token limit
    double temperature = 0.0;
    std::string embed_endpoint;
    std::string template_file;
    std::string out_file;
    std::string provenance_file;
};

nlohmann::json provenance_to_json(const Provenance& p) {
    return {
        {"backend", p.config.backend_id},
        {"mode", p.config.prompt_mode == PromptMode::zero_shot ? "zs" : "fs"},
        {"top_k", p.config.top_k},
        {"temperature", p.config.temperature},
        {"token_budget", p.config.token_budget},
        {"backend_token_limit", p.config.backend_token_limit},
        {"included_k", p.included_k},
        {"included_req_ids", p.included_req_ids},
        {"hit_passage_ids", p.hit_passage_ids},
        {"digest", provenance_digest(p)},
    };
}

int cmd_generate(const GenerateArgs& args) {
    const RequirementsSet reqs = load_requirements(args.reqs_file);
    const ScenarioRequest request = load_request(args.request_file);
    std::vector<GlossaryEntry> glossary;
    if (!args.glossary_file.empty()) glossary = load_glossary(args.glossary_file);

    std::vector<BackendProfile> profiles = {{"mock", "mock", "mock", 4096}};
    if (!args.backends_file.empty()) profiles = load_backend_profiles(args.backends_file);
    const BackendProfile* profile = nullptr;
    for (const auto& p : profiles) {
        if (p.backend_id == args.backend_id) profile = &p;
    }
    if (profile == nullptr) {
        throw ValidationError("unknown backend \"" + args.backend_id +
                              "\"; list it in --backends or use \"mock\"");
    }

    const VectorIndex index = load_index(args.index_file);
    const EmbedderSpec embedder =
        EmbedderSpec::from_fingerprint(index.embedder_fingerprint, args.embed_endpoint);

    GenerationConfig config;
    config.backend_id = profile->backend_id;
    config.prompt_mode = args.mode == "fs" ? PromptMode::few_shot : PromptMode::zero_shot;
    if (args.mode != "zs" && args.mode != "fs") {
        throw ValidationError("--mode must be zs or fs");
    }
    config.top_k = args.k;
    config.temperature = args.temperature;
    config.backend_token_limit = profile->token_limit;
    config.token_budget =
        args.budget > 0 ? args.budget
                        : static_cast<std::size_t>(
                              static_cast<double>(profile->token_limit) * 0.75);

    const PromptTemplate tmpl = args.template_file.empty()
                                    ? PromptTemplate::default_template()
                                    : PromptTemplate::load(args.template_file);
    const auto backend = make_backend(*profile, retry_from_env());
    const GeneratedScenario scenario =
        generate_scenario(reqs, request, glossary, index, config, *backend, embedder, tmpl);

    const std::string rendered = render_scenario(scenario);
    if (args.out_file.empty()) {
        std::cout << rendered << "\n";
    } else {
        write_file(args.out_file, rendered + "\n");
    }
    if (!args.provenance_file.empty()) {
        write_file(args.provenance_file, provenance_to_json(scenario.provenance).dump(2) + "\n");
    }
    return 0;
}

struct ScoreArgs {
    std::string pairs_file;
    std::string out_file;
    bool corpus_bleu = false;
    bool smooth = false;
};

int cmd_eval_score(const ScoreArgs& args) {
    const std::string content = read_file(args.pairs_file);
    const auto base = std::filesystem::path(args.pairs_file).parent_path();

    MetricParams params;
    params.rouge_variants = {RougeVariant::rouge_1, RougeVariant::rouge_2,
                             RougeVariant::rouge_l};
    params.bleu_smoothing = args.smooth;

    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<std::pair<std::string, std::string>> labels;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        const auto nl = content.find('\n', pos);
        const std::string line(content.substr(pos, nl == std::string::npos
                                                        ? std::string::npos
                                                        : nl - pos));
        ++line_no;
        pos = nl == std::string::npos ? content.size() + 1 : nl + 1;
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ValidationError("pairs row at line " + std::to_string(line_no) +
                                  " must be candidate_path,reference_path");
        }
        const std::string cand_path = line.substr(0, comma);
        const std::string ref_path = line.substr(comma + 1);
        pairs.emplace_back(read_file(base / cand_path), read_file(base / ref_path));
        labels.emplace_back(cand_path, ref_path);
    }
    if (pairs.empty()) throw ValidationError("pairs file lists no rows");

    std::string csv = "candidate,reference,bleu,rouge,meteor\n";
    char buf[64];
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const MetricReport r = score_pair(pairs[i].first, pairs[i].second, params);
        csv += labels[i].first + ',' + labels[i].second;
        std::snprintf(buf, sizeof(buf), ",%.9f,%.9f,%.9f\n", r.bleu, r.rouge, r.meteor);
        csv += buf;
    }
    const MetricReport corpus = score_corpus(pairs, params, args.corpus_bleu);
    std::snprintf(buf, sizeof(buf), ",%.9f,%.9f,%.9f\n", corpus.bleu, corpus.rouge,
                  corpus.meteor);
    csv += "corpus,";
    csv += buf + 1;  // skip the duplicated comma

    if (args.out_file.empty()) std::cout << csv;
    else write_file(args.out_file, csv);
    return 0;
}

struct GridArgs {
    std::string config_file;
    std::string out_dir;
    std::size_t jobs = 1;
};

int cmd_eval_grid(const GridArgs& args) {
    const GridConfig config = load_grid_config(args.config_file);

    GridInputs inputs;
    inputs.reqs = load_requirements(config.reqs_path);
    if (config.glossary_path) inputs.glossary = load_glossary(*config.glossary_path);
    inputs.index = load_index(config.index_path);
    inputs.embedder = EmbedderSpec::from_fingerprint(inputs.index.embedder_fingerprint,
                                                     config.embed_endpoint);
    for (const auto& [request_path, reference_path] : config.request_paths) {
        GridInputs::Request req;
        req.label = request_path.filename().string();
        req.request = load_request(request_path);
        req.reference = read_file(reference_path);
        inputs.requests.push_back(std::move(req));
    }
    inputs.temperature = config.temperature;
    inputs.budget_override = config.budget_override;
    inputs.metric_params.rouge_variants = {RougeVariant::rouge_1, RougeVariant::rouge_2,
                                           RougeVariant::rouge_l};
    inputs.retry = retry_from_env();

    const GridResult result = run_grid(inputs, config.grid, args.jobs);

    std::filesystem::create_directories(args.out_dir);
    const auto out = std::filesystem::path(args.out_dir);
    write_file(out / "grid.csv", render_report(result, ReportFormat::csv));
    write_file(out / "scenarios.csv", render_scenarios_csv(result));
    const std::string table = render_report(result, ReportFormat::table);
    write_file(out / "grid_table.txt", table);
    std::cout << table;
    return 0;
}

struct SurveyArgs {
    std::string ratings_file;
    std::string out_file;
    bool sample_stddev = false;
};

int cmd_eval_survey(const SurveyArgs& args) {
    const auto records = load_ratings(args.ratings_file);
    const SurveySummary summary = aggregate_survey(records, args.sample_stddev);
    std::cout << render_report(summary, ReportFormat::table);
    if (!args.out_file.empty()) {
        write_file(args.out_file, render_report(summary, ReportFormat::csv));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"test scenario generation and evaluation pipeline"};
    app.require_subcommand(1);

    // index
    auto* index = app.add_subcommand("index", "build and query the passage index");
    index->require_subcommand(1);
    IndexBuildArgs build_args;
    auto* build = index->add_subcommand("build", "chunk and embed a documentation corpus");
    build->add_option("--corpus", build_args.corpus_dir, "directory of .txt/.md/.html files")
        ->required();
    build->add_option("--out", build_args.out_file, "index file to write")->required();
    build->add_option("--max-tokens", build_args.max_tokens, "chunk size budget");
    build->add_option("--overlap", build_args.overlap, "tokens shared between chunks");
    build->add_option("--dimension", build_args.dimension, "embedding dimension");
    build->add_option("--embedder", build_args.embedder, "local or remote");
    build->add_option("--embed-endpoint", build_args.embed_endpoint, "remote embedder URL");
    build->add_option("--embed-model", build_args.embed_model, "remote embedder model id");

    IndexQueryArgs query_args;
    auto* query = index->add_subcommand("query", "retrieve the top-k passages for a text");
    query->add_option("--index", query_args.index_file, "index file")->required();
    query->add_option("--text", query_args.text, "query text")->required();
    query->add_option("--k", query_args.k, "number of passages");
    query->add_option("--embed-endpoint", query_args.embed_endpoint,
                      "remote embedder URL (remote-built indices)");

    // generate
    GenerateArgs gen_args;
    auto* generate = app.add_subcommand("generate", "generate one test scenario");
    generate->add_option("--index", gen_args.index_file, "index file")->required();
    generate->add_option("--reqs", gen_args.reqs_file, "requirements CSV")->required();
    generate->add_option("--request", gen_args.request_file, "scenario request file")
        ->required();
    generate->add_option("--glossary", gen_args.glossary_file, "glossary CSV");
    generate->add_option("--mode", gen_args.mode, "zs or fs")->required();
    generate->add_option("--k", gen_args.k, "context passages to retrieve")->required();
    generate->add_option("--backend", gen_args.backend_id, "backend id")->required();
    generate->add_option("--backends", gen_args.backends_file, "backend profile file");
    generate->add_option("--budget", gen_args.budget, "prompt token budget");
    generate->add_option("--temperature", gen_args.temperature, "sampling temperature");
    generate->add_option("--embed-endpoint", gen_args.embed_endpoint, "remote embedder URL");
    generate->add_option("--template", gen_args.template_file, "prompt template override");
    generate->add_option("--out", gen_args.out_file, "write the scenario here");
    generate->add_option("--provenance", gen_args.provenance_file,
                         "write the provenance record here (JSON)");

    // eval
    auto* eval = app.add_subcommand("eval", "score scenarios and run the grid");
    eval->require_subcommand(1);
    ScoreArgs score_args;
    auto* score = eval->add_subcommand("score", "score candidate/reference file pairs");
    score->add_option("--pairs", score_args.pairs_file,
                      "two-column file: candidate_path,reference_path")
        ->required();
    score->add_option("--out", score_args.out_file, "write the CSV report here");
    score->add_flag("--corpus-bleu", score_args.corpus_bleu,
                    "aggregate BLEU n-gram counts over the corpus");
    score->add_flag("--smooth", score_args.smooth, "epsilon-smooth empty BLEU counts");

    GridArgs grid_args;
    auto* grid = eval->add_subcommand("grid", "run the configuration grid");
    grid->add_option("--config", grid_args.config_file, "grid config file")->required();
    grid->add_option("--out", grid_args.out_dir, "output directory")->required();
    grid->add_option("--jobs", grid_args.jobs, "concurrent cells (default sequential)");

    SurveyArgs survey_args;
    auto* survey = eval->add_subcommand("survey", "aggregate Likert ratings");
    survey->add_option("--ratings", survey_args.ratings_file, "ratings CSV")->required();
    survey->add_option("--out", survey_args.out_file, "write the CSV summary here");
    survey->add_flag("--sample-stddev", survey_args.sample_stddev,
                     "sample standard deviation (divisor n-1)");

    // show
    auto* show = app.add_subcommand("show", "print embedded configuration");
    show->require_subcommand(1);
    auto* show_template = show->add_subcommand("template", "print the default prompt template");
    auto* show_system = show->add_subcommand("system-message",
                                             "print the backend system message");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return tsgen::kExitValidation;
    }

    try {
        if (build->parsed()) return cmd_index_build(build_args);
        if (query->parsed()) return cmd_index_query(query_args);
        if (generate->parsed()) return cmd_generate(gen_args);
        if (score->parsed()) return cmd_eval_score(score_args);
        if (grid->parsed()) return cmd_eval_grid(grid_args);
        if (survey->parsed()) return cmd_eval_survey(survey_args);
        if (show_template->parsed()) {
            std::cout << tsgen::PromptTemplate::default_template().skeleton() << "\n";
            return 0;
        }
        if (show_system->parsed()) {
            std::cout << tsgen::kSystemMessage << "\n";
            return 0;
        }
    } catch (const tsgen::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
