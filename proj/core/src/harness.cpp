#include "tsgen/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "csv.hpp"
#include "tsgen/embedding.hpp"
#include "tsgen/errors.hpp"
#include "tsgen/unicode.hpp"

namespace tsgen {

namespace {

const char* mode_name(PromptMode mode) {
    return mode == PromptMode::zero_shot ? "zs" : "fs";
}

std::string format_score(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string trim_copy(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view value) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        const auto comma = value.find(',', pos);
        if (comma == std::string_view::npos) {
            parts.push_back(trim_copy(value.substr(pos)));
            break;
        }
        parts.push_back(trim_copy(value.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return parts;
}

GridCell run_cell(const GridInputs& inputs, const BackendProfile& profile, PromptMode mode,
                  std::size_t k) {
    GridCell cell;
    cell.backend_id = profile.backend_id;
    cell.mode = mode;
    cell.k = k;

    GenerationConfig config;
    config.backend_id = profile.backend_id;
    config.prompt_mode = mode;
    config.top_k = k;
    config.temperature = inputs.temperature;
    config.backend_token_limit = profile.token_limit;
    config.token_budget = inputs.budget_override.value_or(
        static_cast<std::size_t>(static_cast<double>(profile.token_limit) * 0.75));

    const auto backend = make_backend(profile, inputs.retry);
    std::vector<std::pair<std::string, std::string>> scored_pairs;
    try {
        for (const auto& req : inputs.requests) {
            ScenarioResult result;
            result.label = req.label;
            if (mode == PromptMode::few_shot && !req.request.example_scenario) {
                result.skipped = true;
                result.note = "no example scenario; skipped in few-shot cells";
                cell.scenarios.push_back(std::move(result));
                continue;
            }
            const GeneratedScenario scenario =
                generate_scenario(inputs.reqs, req.request, inputs.glossary, inputs.index,
                                  config, *backend, inputs.embedder);
            const std::string candidate = render_scenario(scenario);
            result.report = score_pair(candidate, req.reference, inputs.metric_params);
            result.provenance_digest = provenance_digest(scenario.provenance);
            scored_pairs.emplace_back(candidate, req.reference);
            cell.scenarios.push_back(std::move(result));
        }
        if (!scored_pairs.empty()) {
            cell.corpus = score_corpus(scored_pairs, inputs.metric_params);
        }
    } catch (const BackendError& e) {
        cell.failed = true;
        cell.error = e.what();
    } catch (const BudgetError& e) {
        cell.failed = true;
        cell.error = e.what();
    }
    return cell;
}

}  // namespace

GridResult run_grid(const GridInputs& inputs, const ConfigGrid& grid, std::size_t jobs) {
    if (grid.backends.empty() || grid.modes.empty() || grid.k_values.empty()) {
        throw ValidationError("the grid needs at least one backend, one mode and one k");
    }
    if (inputs.temperature != 0.0) {
        throw ValidationError("grid runs require temperature 0");
    }
    if (inputs.requests.empty()) {
        throw ValidationError("the grid needs at least one scenario request");
    }

    struct CellSpec {
        const BackendProfile* profile;
        PromptMode mode;
        std::size_t k;
    };
    std::vector<CellSpec> specs;
    for (const auto& backend : grid.backends) {
        for (const auto mode : grid.modes) {
            for (const auto k : grid.k_values) {
                specs.push_back({&backend, mode, k});
            }
        }
    }

    GridResult result;
    result.cells.resize(specs.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < specs.size(); ++i) {
            result.cells[i] = run_cell(inputs, *specs[i].profile, specs[i].mode, specs[i].k);
        }
        return result;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(specs.size());
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= specs.size()) return;
            try {
                result.cells[i] =
                    run_cell(inputs, *specs[i].profile, specs[i].mode, specs[i].k);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t width = std::min(jobs, specs.size());
    pool.reserve(width);
    for (std::size_t i = 0; i < width; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (const auto& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }
    return result;
}

std::string provenance_digest(const Provenance& provenance) {
    std::string canon = provenance.config.backend_id;
    canon += '|';
    canon += mode_name(provenance.config.prompt_mode);
    canon += '|';
    canon += std::to_string(provenance.config.top_k);
    canon += '|';
    canon += format_score(provenance.config.temperature, 6);
    canon += '|';
    canon += std::to_string(provenance.config.token_budget);
    canon += '|';
    canon += std::to_string(provenance.config.backend_token_limit);
    canon += '|';
    canon += std::to_string(provenance.included_k);
    for (const auto& id : provenance.included_req_ids) {
        canon += '|';
        canon += id;
    }
    canon += '#';
    for (const auto& id : provenance.hit_passage_ids) {
        canon += '|';
        canon += id;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canon)));
    return buf;
}

const char* criterion_name(Criterion c) {
    switch (c) {
        case Criterion::relevance: return "relevance";
        case Criterion::coverage: return "coverage";
        case Criterion::correctness: return "correctness";
        case Criterion::coherence: return "coherence";
        case Criterion::feasibility: return "feasibility";
    }
    return "unknown";
}

Criterion parse_criterion(std::string_view name) {
    std::string lower;
    for (char c : name) lower.push_back(static_cast<char>(std::tolower(c)));
    if (lower == "relevance") return Criterion::relevance;
    if (lower == "coverage") return Criterion::coverage;
    if (lower == "correctness") return Criterion::correctness;
    if (lower == "coherence" || lower == "understandability") return Criterion::coherence;
    if (lower == "feasibility") return Criterion::feasibility;
    throw ValidationError("unknown criterion \"" + std::string(name) + "\"");
}

SurveySummary aggregate_survey(std::span<const LikertRecord> records, bool sample_stddev) {
    for (const auto& r : records) {
        if (r.rating < 1 || r.rating > 5) {
            throw ValidationError("rating " + std::to_string(r.rating) + " for scenario \"" +
                                  r.scenario_id + "\" is outside 1..5");
        }
    }
    std::map<Criterion, std::vector<int>> kept;
    for (const auto& r : records) {
        if (!r.excluded) kept[r.criterion].push_back(r.rating);
    }
    if (kept.empty()) {
        throw ValidationError("no ratings remain after exclusions");
    }

    SurveySummary summary;
    summary.sample_stddev = sample_stddev;
    for (const auto& [criterion, ratings] : kept) {
        CriterionStats stats;
        stats.count = ratings.size();
        double sum = 0.0;
        for (const int r : ratings) {
            sum += r;
            ++stats.histogram[static_cast<std::size_t>(r - 1)];
        }
        stats.mean = sum / static_cast<double>(ratings.size());
        double sq = 0.0;
        for (const int r : ratings) {
            const double d = static_cast<double>(r) - stats.mean;
            sq += d * d;
        }
        if (sample_stddev) {
            stats.stddev = ratings.size() > 1
                               ? std::sqrt(sq / static_cast<double>(ratings.size() - 1))
                               : 0.0;
        } else {
            stats.stddev = std::sqrt(sq / static_cast<double>(ratings.size()));
        }
        summary.per_criterion[criterion] = stats;
    }
    return summary;
}

std::vector<LikertRecord> load_ratings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read ratings file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string content = std::move(ss).str();
    validate_utf8(content);

    const auto rows = detail::parse_csv(content);
    if (rows.empty()) throw ValidationError("ratings file is empty: " + path.string());
    const auto& header = rows.front().fields;
    if (header.size() != 4 || header[0] != "scenario_id" || header[1] != "criterion" ||
        header[2] != "rating" || header[3] != "excluded") {
        throw ValidationError(
            "ratings file must start with header scenario_id,criterion,rating,excluded");
    }
    std::vector<LikertRecord> records;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.fields.size() == 1 && row.fields[0].empty()) continue;
        if (row.fields.size() != 4) {
            throw ValidationError("ratings row at line " + std::to_string(row.line_no) +
                                  " must have 4 fields");
        }
        LikertRecord record;
        record.scenario_id = row.fields[0];
        record.criterion = parse_criterion(row.fields[1]);
        const std::string rating = trim_copy(row.fields[2]);
        std::size_t used = 0;
        try {
            record.rating = std::stoi(rating, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != rating.size() || rating.empty()) {
            throw ValidationError("rating \"" + row.fields[2] + "\" at line " +
                                  std::to_string(row.line_no) + " is not an integer");
        }
        if (record.rating < 1 || record.rating > 5) {
            throw ValidationError("rating " + rating + " at line " +
                                  std::to_string(row.line_no) + " is outside 1..5");
        }
        std::string excluded = trim_copy(row.fields[3]);
        std::transform(excluded.begin(), excluded.end(), excluded.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (excluded == "1" || excluded == "true" || excluded == "yes") {
            record.excluded = true;
        } else if (excluded == "0" || excluded == "false" || excluded == "no" ||
                   excluded.empty()) {
            record.excluded = false;
        } else {
            throw ValidationError("excluded flag \"" + row.fields[3] + "\" at line " +
                                  std::to_string(row.line_no) + " must be 0/1/true/false");
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::string render_report(const GridResult& result, ReportFormat format) {
    std::string out;
    if (format == ReportFormat::csv) {
        out = "backend,mode,k,status,requests,scored,bleu,rouge,meteor\n";
        for (const auto& cell : result.cells) {
            std::size_t scored = 0;
            for (const auto& s : cell.scenarios) {
                if (!s.skipped) ++scored;
            }
            out += cell.backend_id;
            out += ',';
            out += mode_name(cell.mode);
            out += ',';
            out += std::to_string(cell.k);
            out += ',';
            out += cell.failed ? "failed" : "ok";
            out += ',';
            out += std::to_string(cell.scenarios.size());
            out += ',';
            out += std::to_string(cell.failed ? 0 : scored);
            if (cell.failed) {
                out += ",,,\n";
            } else {
                out += ',' + format_score(cell.corpus.bleu, 9);
                out += ',' + format_score(cell.corpus.rouge, 9);
                out += ',' + format_score(cell.corpus.meteor, 9);
                out += '\n';
            }
        }
        return out;
    }

    std::ostringstream table;
    table << "backend          mode  k  status  bleu   rouge  meteor\n";
    for (const auto& cell : result.cells) {
        char line[160];
        if (cell.failed) {
            std::snprintf(line, sizeof(line), "%-16s %-4s  %zu  %-6s  %-5s  %-5s  %-6s\n",
                          cell.backend_id.c_str(), mode_name(cell.mode), cell.k, "failed",
                          "-", "-", "-");
        } else {
            std::snprintf(line, sizeof(line), "%-16s %-4s  %zu  %-6s  %.3f  %.3f  %.3f\n",
                          cell.backend_id.c_str(), mode_name(cell.mode), cell.k, "ok",
                          cell.corpus.bleu, cell.corpus.rouge, cell.corpus.meteor);
        }
        table << line;
    }
    return table.str();
}

std::string render_report(const SurveySummary& summary, ReportFormat format) {
    static constexpr Criterion order[] = {Criterion::relevance, Criterion::coverage,
                                          Criterion::correctness, Criterion::coherence,
                                          Criterion::feasibility};
    std::string out;
    if (format == ReportFormat::csv) {
        out = "criterion,mean,stddev,count,r1,r2,r3,r4,r5\n";
        for (const auto criterion : order) {
            const auto it = summary.per_criterion.find(criterion);
            if (it == summary.per_criterion.end()) continue;
            const auto& s = it->second;
            out += criterion_name(criterion);
            out += ',' + format_score(s.mean, 9);
            out += ',' + format_score(s.stddev, 9);
            out += ',' + std::to_string(s.count);
            for (const auto h : s.histogram) out += ',' + std::to_string(h);
            out += '\n';
        }
        return out;
    }
    for (const auto criterion : order) {
        const auto it = summary.per_criterion.find(criterion);
        if (it == summary.per_criterion.end()) continue;
        const auto& s = it->second;
        char line[160];
        std::snprintf(line, sizeof(line), "%-17s %s (%s)   n=%zu   [%zu %zu %zu %zu %zu]\n",
                      criterion_name(criterion), format_score(s.mean, 2).c_str(),
                      format_score(s.stddev, 2).c_str(), s.count, s.histogram[0],
                      s.histogram[1], s.histogram[2], s.histogram[3], s.histogram[4]);
        out += line;
    }
    return out;
}

std::string render_scenarios_csv(const GridResult& result) {
    std::string out = "backend,mode,k,request,status,bleu,rouge,meteor,provenance\n";
    for (const auto& cell : result.cells) {
        for (const auto& s : cell.scenarios) {
            out += cell.backend_id;
            out += ',';
            out += mode_name(cell.mode);
            out += ',';
            out += std::to_string(cell.k);
            out += ',' + detail::csv_escape(s.label);
            if (s.skipped) {
                out += ",skipped,,,,\n";
            } else {
                out += ",ok";
                out += ',' + format_score(s.report.bleu, 9);
                out += ',' + format_score(s.report.rouge, 9);
                out += ',' + format_score(s.report.meteor, 9);
                out += ',' + s.provenance_digest;
                out += '\n';
            }
        }
    }
    return out;
}

namespace {

struct KvLine {
    std::string key;
    std::string value;
    std::size_t line_no;
};

std::vector<KvLine> parse_kv_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read config file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string content = std::move(ss).str();
    validate_utf8(content);

    std::vector<KvLine> lines;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        const auto nl = content.find('\n', pos);
        std::string line(content.substr(pos, nl == std::string::npos ? std::string::npos
                                                                     : nl - pos));
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string trimmed = trim_copy(line);
        if (!trimmed.empty()) {
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos) {
                throw ValidationError("expected key = value at line " +
                                      std::to_string(line_no) + " of " + path.string());
            }
            lines.push_back({trim_copy(trimmed.substr(0, eq)),
                             trim_copy(trimmed.substr(eq + 1)), line_no});
        }
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    return lines;
}

BackendProfile parse_backend_value(const std::string& value, std::size_t line_no) {
    const auto parts = split_list(value);
    if (parts.size() != 4) {
        throw ValidationError("backend at line " + std::to_string(line_no) +
                              " needs: id, endpoint, model, token_limit");
    }
    BackendProfile profile;
    profile.backend_id = parts[0];
    profile.endpoint = parts[1];
    profile.model_name = parts[2];
    try {
        profile.token_limit = std::stoul(parts[3]);
    } catch (const std::exception&) {
        throw ValidationError("backend token_limit at line " + std::to_string(line_no) +
                              " is not a number");
    }
    if (profile.backend_id.empty() || profile.endpoint.empty() ||
        profile.token_limit == 0) {
        throw ValidationError("incomplete backend profile at line " +
                              std::to_string(line_no));
    }
    return profile;
}

}  // namespace

GridConfig load_grid_config(const std::filesystem::path& path) {
    const auto base = path.has_parent_path() ? path.parent_path()
                                             : std::filesystem::path(".");
    auto resolve = [&](const std::string& p) { return base / p; };

    GridConfig config;
    bool have_modes = false, have_k = false;
    for (const auto& kv : parse_kv_file(path)) {
        if (kv.key == "backend") {
            config.grid.backends.push_back(parse_backend_value(kv.value, kv.line_no));
        } else if (kv.key == "modes") {
            have_modes = true;
            for (const auto& m : split_list(kv.value)) {
                if (m == "zs" || m == "zero_shot") {
                    config.grid.modes.push_back(PromptMode::zero_shot);
                } else if (m == "fs" || m == "few_shot") {
                    config.grid.modes.push_back(PromptMode::few_shot);
                } else {
                    throw ValidationError("unknown mode \"" + m + "\" at line " +
                                          std::to_string(kv.line_no));
                }
            }
        } else if (kv.key == "k") {
            have_k = true;
            for (const auto& v : split_list(kv.value)) {
                try {
                    config.grid.k_values.push_back(std::stoul(v));
                } catch (const std::exception&) {
                    throw ValidationError("k value \"" + v + "\" at line " +
                                          std::to_string(kv.line_no) + " is not a number");
                }
            }
        } else if (kv.key == "index") {
            config.index_path = resolve(kv.value);
        } else if (kv.key == "reqs") {
            config.reqs_path = resolve(kv.value);
        } else if (kv.key == "glossary") {
            config.glossary_path = resolve(kv.value);
        } else if (kv.key == "request") {
            const auto parts = split_list(kv.value);
            if (parts.size() != 2) {
                throw ValidationError("request at line " + std::to_string(kv.line_no) +
                                      " needs: request_file, reference_file");
            }
            config.request_paths.emplace_back(resolve(parts[0]), resolve(parts[1]));
        } else if (kv.key == "temperature") {
            config.temperature = std::stod(kv.value);
        } else if (kv.key == "budget") {
            config.budget_override = std::stoul(kv.value);
        } else if (kv.key == "embed_endpoint") {
            config.embed_endpoint = kv.value;
        } else {
            throw ValidationError("unknown config key \"" + kv.key + "\" at line " +
                                  std::to_string(kv.line_no));
        }
    }
    if (config.grid.backends.empty()) {
        throw ValidationError("grid config lists no backends");
    }
    if (!have_modes || !have_k) {
        throw ValidationError("grid config must set both modes and k");
    }
    if (config.index_path.empty() || config.reqs_path.empty()) {
        throw ValidationError("grid config must set index and reqs paths");
    }
    if (config.request_paths.empty()) {
        throw ValidationError("grid config lists no requests");
    }
    return config;
}

std::vector<BackendProfile> load_backend_profiles(const std::filesystem::path& path) {
    std::vector<BackendProfile> profiles;
    for (const auto& kv : parse_kv_file(path)) {
        if (kv.key != "backend") {
            throw ValidationError("unknown key \"" + kv.key + "\" at line " +
                                  std::to_string(kv.line_no) + " of " + path.string());
        }
        profiles.push_back(parse_backend_value(kv.value, kv.line_no));
    }
    if (profiles.empty()) {
        throw ValidationError("backend profile file lists no backends: " + path.string());
    }
    return profiles;
}

}  // namespace tsgen
