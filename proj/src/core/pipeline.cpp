#include "core/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"

#include "core/error.hpp"
#include "core/explorer.hpp"
#include "core/ratelimit.hpp"
#include "core/rng.hpp"
#include "core/sha256.hpp"
#include "core/text_clean.hpp"
#include "core/util.hpp"

namespace solaudit {

namespace {

namespace fs = std::filesystem;

// Runs fn(0..n) on up to `workers` threads; the first exception wins and is
// rethrown after all threads join.
template <typename Fn>
void parallel_for(size_t n, int workers, Fn&& fn) {
    if (n == 0) return;
    size_t thread_count = std::min<size_t>(std::max(workers, 1), n);
    if (thread_count == 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::vector<std::thread> threads;
    for (size_t t = 0; t < thread_count; ++t) {
        threads.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= n) return;
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (error) return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (std::thread& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

void ensure_dir(const std::string& path) {
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) {
        raise(Errc::io, "cannot create directory " + path + ": " + ec.message());
    }
}

std::string file_sha256(const std::string& path) { return sha256_hex(read_file(path)); }

// Stage manifest next to a stage's primary output: config snapshot, seed and
// content hashes of the inputs. No timestamps, so reruns stay byte-identical.
void write_stage_manifest(const std::string& manifest_path, const RunConfig& config,
                          const std::string& stage,
                          const std::vector<std::pair<std::string, std::string>>& inputs) {
    nlohmann::ordered_json j;
    j["stage"] = stage;
    j["seed"] = config.seed;
    nlohmann::ordered_json in;
    for (const auto& [name, path] : inputs) {
        in[name] = {{"path", path}, {"sha256", file_sha256(path)}};
    }
    j["inputs"] = in;
    j["config"] = nlohmann::ordered_json::parse(config_snapshot(config));
    write_file(manifest_path, j.dump(2) + "\n");
}

std::string sanitize_id(std::string s) {
    for (char& c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    }
    return s.empty() ? std::string("run") : s;
}

struct RunPaths {
    std::string dir;
    std::string manifest;
    std::string cache;
    std::string predictions;
    std::string findings;
};

RunPaths make_run_paths(const RunConfig& config, const std::string& run_id) {
    RunPaths p;
    p.dir = config.out_dir + "/runs/" + sanitize_id(run_id);
    p.manifest = p.dir + "/manifest.json";
    p.cache = p.dir + "/cache.jsonl";
    p.predictions = p.dir + "/predictions.jsonl";
    p.findings = p.dir + "/findings.jsonl";
    ensure_dir(p.dir);
    return p;
}

void write_manifest(const RunPaths& paths, const RunConfig& config, const std::string& strategy,
                    const std::string& model, const std::string& corpus_path) {
    nlohmann::ordered_json j;
    j["run_id"] = fs::path(paths.dir).filename().string();
    j["strategy"] = strategy;
    j["model"] = model;
    j["seed"] = config.seed;
    j["threshold"] = config.threshold;
    j["rendering"] = config.rendering;
    j["top_k"] = config.top_k;
    nlohmann::ordered_json inputs;
    inputs["corpus"] = {{"path", corpus_path}, {"sha256", file_sha256(corpus_path)}};
    if (!config.taxonomy_path.empty()) {
        inputs["taxonomy"] = {{"path", config.taxonomy_path},
                              {"sha256", file_sha256(config.taxonomy_path)}};
    }
    if (!config.synonyms_path.empty()) {
        inputs["synonyms"] = {{"path", config.synonyms_path},
                              {"sha256", file_sha256(config.synonyms_path)}};
    }
    j["inputs"] = inputs;
    j["config"] = nlohmann::ordered_json::parse(config_snapshot(config));
    write_file(paths.manifest, j.dump(2) + "\n");
}

struct FindingsLine {
    std::string address;
    std::string status;
    std::vector<Finding> findings;
    std::vector<CriticScore> scores;  // parallel to findings when scored
};

void save_findings(const std::string& path, const std::vector<FindingsLine>& lines) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        raise(Errc::io, "cannot open for writing: " + path);
    }
    for (const FindingsLine& line : lines) {
        nlohmann::ordered_json j;
        j["address"] = line.address;
        if (!line.status.empty()) j["status"] = line.status;
        auto arr = nlohmann::ordered_json::array();
        for (size_t i = 0; i < line.findings.size(); ++i) {
            const Finding& f = line.findings[i];
            nlohmann::ordered_json fj;
            fj["vulnerability"] = f.vuln_text;
            fj["class"] = f.mapped_class ? nlohmann::ordered_json(class_abbrev(*f.mapped_class))
                                         : nlohmann::ordered_json(nullptr);
            fj["code"] = f.code_excerpt;
            fj["reasoning"] = f.reasoning;
            if (i < line.scores.size()) {
                const CriticScore& s = line.scores[i];
                fj["scores"] = {{"correctness", s.correctness},
                                {"severity", s.severity},
                                {"profitability", s.profitability},
                                {"final_score", s.final_score}};
            }
            arr.push_back(std::move(fj));
        }
        j["findings"] = arr;
        out << j.dump() << '\n';
    }
}

std::vector<FindingsLine> load_findings(const std::string& path) {
    std::vector<FindingsLine> lines;
    std::string text = read_file(path);
    int line_no = 0;
    for (const std::string& raw : split(text, '\n')) {
        ++line_no;
        if (trim(raw).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(raw);
        } catch (const nlohmann::json::exception& e) {
            raise(Errc::parse, path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        FindingsLine line;
        line.address = j.at("address").get<std::string>();
        line.status = j.value("status", std::string{});
        for (const auto& fj : j.value("findings", nlohmann::json::array())) {
            Finding f;
            f.vuln_text = fj.value("vulnerability", std::string{});
            f.code_excerpt = fj.value("code", std::string{});
            f.reasoning = fj.value("reasoning", std::string{});
            if (fj.contains("class") && fj["class"].is_string()) {
                f.mapped_class = class_from_abbrev(fj["class"].get<std::string>());
            }
            line.findings.push_back(std::move(f));
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

struct StrategyContext {
    TaxonomyBundle taxonomy;
    SynonymTable synonyms;
    DetectOptions options;
};

StrategyContext make_context(const RunConfig& config, const std::string& model) {
    StrategyContext ctx{load_taxonomy(config.taxonomy_path),
                        load_synonyms(config.synonyms_path),
                        {}};
    ctx.options.model = model;
    ctx.options.rendering =
        config.rendering == "alpaca" ? Rendering::AlpacaInstruct : Rendering::ChatMessages;
    ctx.options.lenient = !config.strict;
    ctx.options.top_k = config.top_k;
    ctx.options.weights = config.rank_weights;
    ctx.options.threshold = threshold_preset(config.threshold);
    return ctx;
}

LabelSet labels_from_findings(const std::vector<Finding>& findings,
                              std::vector<std::string>* warnings) {
    LabelSet labels;
    for (const Finding& f : findings) {
        if (f.mapped_class) {
            labels.add(*f.mapped_class);
        } else if (warnings) {
            warnings->push_back("finding outside taxonomy ignored: " + f.vuln_text);
        }
    }
    return labels;
}

}  // namespace

IngestStats run_ingest(const RunConfig& config, const std::string& addresses_file,
                       const std::string& out_path) {
    IngestStats stats;
    std::vector<std::string> addresses;
    for (const std::string& line : split(read_file(addresses_file), '\n')) {
        std::string address = trim(line);
        if (address.empty() || address[0] == '#') continue;
        if (!is_contract_address(address)) {
            raise(Errc::invalid_argument,
                  addresses_file + ": malformed address '" + address + "'");
        }
        addresses.push_back(std::move(address));
    }
    stats.requested = addresses.size();

    auto tokenizer = Gpt2Bpe::load_dir(config.bpe_data_dir);
    ExplorerClient explorer(config.corpus);
    TokenBucket bucket(config.corpus.requests_per_second,
                       std::max(1.0, static_cast<double>(config.corpus.parallelism)));

    std::vector<std::optional<ContractRecord>> fetched(addresses.size());
    std::vector<std::string> skip_notes(addresses.size());
    parallel_for(addresses.size(), config.corpus.parallelism, [&](size_t i) {
        bucket.acquire();
        try {
            ContractRecord record = explorer.fetch_verified_source(addresses[i]);
            record.cleaned_source = clean_source(record.raw_source);
            record.token_count = tokenizer->count(record.cleaned_source);
            fetched[i] = std::move(record);
        } catch (const Error& e) {
            if (e.code() == Errc::unverified) {
                skip_notes[i] = e.what();
                return;  // unverified contracts are skipped, not fatal
            }
            throw;
        }
    });

    std::vector<ContractRecord> records;
    for (size_t i = 0; i < fetched.size(); ++i) {
        if (fetched[i]) {
            records.push_back(std::move(*fetched[i]));
        } else {
            ++stats.unverified;
            stats.warnings.push_back(skip_notes[i]);
        }
    }
    stats.fetched = records.size();

    BudgetSplit parts = filter_by_budget(std::move(records), config.corpus);
    stats.kept = parts.kept.size();
    stats.excluded = parts.excluded.size();

    ensure_dir(fs::path(out_path).parent_path().string());
    save_corpus(out_path, parts.kept);
    write_stage_manifest(out_path + ".manifest.json", config, "ingest",
                         {{"addresses", addresses_file}});
    if (!parts.excluded.empty()) {
        fs::path p(out_path);
        std::string excluded_path =
            (p.parent_path() / (p.stem().string() + ".excluded" + p.extension().string()))
                .string();
        save_corpus(excluded_path, parts.excluded);
    }
    return stats;
}

LabelStats run_label(const RunConfig& config, const std::string& corpus_path,
                     const std::string& reports_dir, const std::string& out_path) {
    TaxonomyBundle taxonomy = load_taxonomy(config.taxonomy_path);
    std::vector<ContractRecord> records = load_corpus(corpus_path);

    LabelStats stats;
    std::vector<ToolFinding> findings;
    for (int t = 0; t < kNumTools; ++t) {
        Tool tool = static_cast<Tool>(t);
        std::string path = reports_dir + "/" + std::string(tool_name(tool)) + ".jsonl";
        if (!fs::exists(path)) continue;  // a missing tool simply casts no votes
        ReportLoad load = load_tool_report(tool, path, taxonomy.detectors, config.strict);
        findings.insert(findings.end(), load.findings.begin(), load.findings.end());
        for (const std::string& id : load.unmapped_ids) {
            stats.unmapped_ids.push_back(std::string(tool_name(tool)) + ":" + id);
        }
    }

    stats.summary = label_corpus(records, findings, taxonomy.policy);
    ensure_dir(fs::path(out_path).parent_path().string());
    save_corpus(out_path, records);
    std::vector<std::pair<std::string, std::string>> inputs = {{"corpus", corpus_path}};
    for (int t = 0; t < kNumTools; ++t) {
        std::string report = reports_dir + "/" + std::string(tool_name(static_cast<Tool>(t))) +
                             ".jsonl";
        if (fs::exists(report)) inputs.emplace_back(tool_name(static_cast<Tool>(t)), report);
    }
    write_stage_manifest(out_path + ".manifest.json", config, "label", inputs);
    return stats;
}

DatasetManifest run_export_dataset(const RunConfig& config, const std::string& corpus_path,
                                   const std::string& styles, const std::string& out_path,
                                   size_t cap) {
    SubsetSpec subset;
    subset.record_cap = cap;
    subset.seed = config.seed;
    for (const std::string& style : split(styles, ',')) {
        std::string s = to_lower(trim(style));
        if (s == "generation") subset.include_generation = true;
        else if (s != "detection" && !s.empty()) {
            raise(Errc::invalid_argument, "unknown prompt style: " + s);
        }
    }

    TaxonomyBundle taxonomy = load_taxonomy(config.taxonomy_path);
    auto tokenizer = Gpt2Bpe::load_dir(config.bpe_data_dir);
    std::vector<ContractRecord> records = load_corpus(corpus_path);
    Rendering rendering =
        config.rendering == "alpaca" ? Rendering::AlpacaInstruct : Rendering::ChatMessages;

    ensure_dir(fs::path(out_path).parent_path().string());
    DatasetManifest manifest =
        export_dataset(records, taxonomy.swc, rendering, out_path, subset, *tokenizer);

    nlohmann::ordered_json j;
    j["total_records"] = manifest.total_records;
    j["detection_count"] = manifest.detection_count;
    j["generation_count"] = manifest.generation_count;
    j["token_total"] = manifest.token_total;
    j["rendering"] = rendering == Rendering::AlpacaInstruct ? "alpaca" : "chat";
    j["source_corpus"] = {{"path", corpus_path}, {"sha256", file_sha256(corpus_path)}};
    j["cap"] = cap;
    j["seed"] = config.seed;
    j["config"] = nlohmann::ordered_json::parse(config_snapshot(config));
    write_file(out_path + ".manifest.json", j.dump(2) + "\n");
    return manifest;
}

FinetuneJob run_finetune(const RunConfig& config, const std::string& training_file,
                         const std::string& base_model, int epochs, bool wait,
                         int poll_interval_ms) {
    auto cache = std::make_shared<ResponseCache>(config.out_dir + "/runs/finetune-cache.jsonl");
    ensure_dir(config.out_dir + "/runs");
    LlmGateway gateway(config.endpoint_for(base_model), cache, config.offline);
    FinetuneJob job = gateway.create_finetune(training_file, base_model, epochs);
    while (wait && job.status != JobStatus::Succeeded && job.status != JobStatus::Failed) {
        std::this_thread::sleep_for(std::chrono::milliseconds(poll_interval_ms));
        job = gateway.poll(job);
    }
    return job;
}

DetectStats run_detect(const RunConfig& config, const std::string& strategy_str,
                       const std::string& model, const std::string& corpus_path,
                       const std::string& run_id) {
    auto strategy = strategy_from_name(strategy_str);
    if (!strategy) {
        raise(Errc::invalid_argument, "unknown strategy: " + strategy_str);
    }
    std::vector<ContractRecord> records = load_corpus(corpus_path);
    StrategyContext ctx = make_context(config, model);

    std::string id = run_id.empty() ? strategy_str + "-" + sanitize_id(model) : run_id;
    RunPaths paths = make_run_paths(config, id);
    write_manifest(paths, config, strategy_str, model, corpus_path);

    DetectStats stats;
    stats.run_dir = paths.dir;
    stats.contracts = records.size();

    if (*strategy == Strategy::Random) {
        std::vector<std::string> addresses;
        for (const ContractRecord& r : records) addresses.push_back(r.address);
        save_predictions(paths.predictions, random_baseline(config.seed, addresses));
        return stats;
    }

    auto cache = std::make_shared<ResponseCache>(paths.cache);
    LlmGateway gateway(config.endpoint_for(model), cache, config.offline);

    std::vector<Prediction> predictions(records.size());
    std::vector<FindingsLine> findings_lines(records.size());
    bool has_findings = *strategy != Strategy::Finetuned;

    parallel_for(records.size(), config.parallelism, [&](size_t i) {
        const ContractRecord& record = records[i];
        Prediction pred;
        pred.address = record.address;
        pred.strategy = *strategy;
        pred.model = model;
        FindingsLine fl;
        fl.address = record.address;

        switch (*strategy) {
            case Strategy::Finetuned:
                pred = detect_finetuned(gateway, record, ctx.taxonomy.swc, ctx.options);
                break;
            case Strategy::ZeroShot: {
                ZeroShotResult zs = detect_zero_shot(gateway, record, ctx.taxonomy.swc,
                                                     ctx.synonyms, model);
                pred.fingerprints.push_back(zs.fingerprint);
                fl.status = zs.status == ZeroShotStatus::ExploitFound ? "Exploit Found"
                                                                      : "No Exploit";
                fl.findings = zs.findings;
                if (zs.status == ZeroShotStatus::ExploitFound) {
                    pred.labels = labels_from_findings(zs.findings, &pred.warnings);
                } else if (!zs.findings.empty()) {
                    pred.warnings.push_back("exploits listed under No Exploit status ignored");
                }
                break;
            }
            case Strategy::ZeroShotCritic: {
                ZeroShotResult zs = detect_zero_shot(gateway, record, ctx.taxonomy.swc,
                                                     ctx.synonyms, model);
                pred.fingerprints.push_back(zs.fingerprint);
                std::vector<Finding> candidates =
                    zs.status == ZeroShotStatus::ExploitFound ? zs.findings
                                                              : std::vector<Finding>{};
                CriticResult critic = critic_pass(gateway, candidates, ctx.taxonomy.swc,
                                                  ctx.synonyms, model);
                if (!critic.fingerprint.empty()) {
                    pred.fingerprints.push_back(critic.fingerprint);
                }
                fl.status = zs.status == ZeroShotStatus::ExploitFound ? "Exploit Found"
                                                                      : "No Exploit";
                fl.findings = critic.confirmed;
                pred.labels = labels_from_findings(critic.confirmed, &pred.warnings);
                break;
            }
            case Strategy::GptLens: {
                std::string audit_fp;
                std::vector<Finding> found =
                    gptlens_audit(gateway, record, ctx.taxonomy.swc, ctx.synonyms, model,
                                  ctx.options.top_k, &audit_fp);
                pred.fingerprints.push_back(audit_fp);
                std::string critic_fp;
                auto scored = gptlens_critic(gateway, found, model, ctx.options.weights,
                                             &critic_fp, &pred.warnings);
                if (!critic_fp.empty()) pred.fingerprints.push_back(critic_fp);
                pred.labels = apply_threshold(scored, ctx.options.threshold);
                for (auto& [finding, score] : scored) {
                    fl.findings.push_back(finding);
                    fl.scores.push_back(score);
                }
                break;
            }
            case Strategy::Random:
                break;  // handled above
        }
        predictions[i] = std::move(pred);
        findings_lines[i] = std::move(fl);
    });

    save_predictions(paths.predictions, predictions);
    if (has_findings) {
        save_findings(paths.findings, findings_lines);
    }
    for (const Prediction& p : predictions) stats.warnings += p.warnings.size();
    return stats;
}

DetectStats run_critic(const RunConfig& config, const std::string& model,
                       const std::string& prior_run_dir, const std::string& run_id) {
    std::vector<FindingsLine> prior = load_findings(prior_run_dir + "/findings.jsonl");
    StrategyContext ctx = make_context(config, model);

    std::string id = run_id.empty() ? "critic-" + sanitize_id(model) : run_id;
    RunPaths paths = make_run_paths(config, id);

    auto cache = std::make_shared<ResponseCache>(paths.cache);
    LlmGateway gateway(config.endpoint_for(model), cache, config.offline);

    std::vector<Prediction> predictions(prior.size());
    std::vector<FindingsLine> confirmed_lines(prior.size());
    parallel_for(prior.size(), config.parallelism, [&](size_t i) {
        const FindingsLine& line = prior[i];
        Prediction pred;
        pred.address = line.address;
        pred.strategy = Strategy::ZeroShotCritic;
        pred.model = model;

        CriticResult critic =
            critic_pass(gateway, line.findings, ctx.taxonomy.swc, ctx.synonyms, model);
        if (!critic.fingerprint.empty()) pred.fingerprints.push_back(critic.fingerprint);
        pred.labels = labels_from_findings(critic.confirmed, &pred.warnings);

        FindingsLine out;
        out.address = line.address;
        out.findings = critic.confirmed;
        confirmed_lines[i] = std::move(out);
        predictions[i] = std::move(pred);
    });

    save_predictions(paths.predictions, predictions);
    save_findings(paths.findings, confirmed_lines);

    DetectStats stats;
    stats.run_dir = paths.dir;
    stats.contracts = prior.size();
    for (const Prediction& p : predictions) stats.warnings += p.warnings.size();
    return stats;
}

DetectStats run_replay(const RunConfig& config, const std::string& prior_run_dir,
                       const std::string& run_id) {
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file(prior_run_dir + "/manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::parse, prior_run_dir + "/manifest.json: " + e.what());
    }

    RunConfig replay_config = config;
    replay_config.offline = true;  // replay must never touch the network
    replay_config.seed = manifest.value("seed", config.seed);
    replay_config.threshold = manifest.value("threshold", config.threshold);
    replay_config.rendering = manifest.value("rendering", config.rendering);
    replay_config.top_k = manifest.value("top_k", config.top_k);

    std::string strategy = manifest.at("strategy").get<std::string>();
    std::string model = manifest.at("model").get<std::string>();
    std::string corpus_path = manifest.at("inputs").at("corpus").at("path").get<std::string>();

    std::string id = run_id.empty()
                         ? "replay-" + fs::path(prior_run_dir).filename().string()
                         : run_id;
    RunPaths paths = make_run_paths(replay_config, id);
    // The prior cache is the sole response source; copy it for provenance.
    fs::copy_file(prior_run_dir + "/cache.jsonl", paths.cache,
                  fs::copy_options::overwrite_existing);
    return run_detect(replay_config, strategy, model, corpus_path,
                      fs::path(paths.dir).filename().string());
}

MetricsReport run_score(const RunConfig& config, const std::string& predictions_path,
                        const std::string& gold_path, const std::string& out_dir) {
    std::vector<Prediction> predictions = load_predictions(predictions_path);
    std::vector<ContractRecord> gold = load_corpus(gold_path);
    SupportMode mode =
        config.support_mode == "tp" ? SupportMode::TruePositives : SupportMode::GoldPositives;
    MetricsReport report = score_run(predictions, gold, mode);

    ensure_dir(out_dir);
    std::vector<MetricsReport> reports = {report};
    write_file(out_dir + "/report.txt", report_table(reports));
    write_file(out_dir + "/report.csv", report_csv(reports));
    write_file(out_dir + "/report.jsonl", report_jsonl(reports));
    write_stage_manifest(out_dir + "/manifest.json", config, "score",
                         {{"predictions", predictions_path}, {"gold", gold_path}});
    return report;
}

std::string run_report(const std::vector<std::string>& report_paths,
                       const std::string& format) {
    std::vector<MetricsReport> reports;
    for (const std::string& path : report_paths) {
        std::vector<MetricsReport> loaded = parse_reports_jsonl(read_file(path));
        reports.insert(reports.end(), loaded.begin(), loaded.end());
    }
    if (format == "table") return report_table(reports);
    if (format == "csv") return report_csv(reports);
    if (format == "jsonl") return report_jsonl(reports);
    raise(Errc::invalid_argument, "unknown report format: " + format);
}

}  // namespace solaudit
