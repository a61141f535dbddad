// solaudit command-line interface. Talks to the pipeline exclusively through
// the public C API in solaudit/solaudit.h.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "solaudit/solaudit.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPipeline = 1;
constexpr int kExitUsage = 2;

struct CtxGuard {
    solaudit_ctx* ctx = nullptr;
    ~CtxGuard() { solaudit_ctx_close(ctx); }
};

struct StringGuard {
    char* s = nullptr;
    ~StringGuard() { solaudit_string_free(s); }
};

int fail(const char* stage, solaudit_status status) {
    std::fprintf(stderr, "solaudit: %s failed (status %d): %s\n", stage,
                 static_cast<int>(status), solaudit_last_error());
    return status == SOLAUDIT_ERR_CONFIG || status == SOLAUDIT_ERR_INVALID_ARGUMENT
               ? kExitUsage
               : kExitPipeline;
}

// Flags override the config file, which overrides built-in defaults.
struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string bpe_data_dir;
    std::string taxonomy;
    std::string synonyms;
    std::string threshold;
    std::string rendering;
    std::string seed;
    std::string parallelism;
    bool offline = false;
    bool strict = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Config file (or SOLAUDIT_CONFIG)");
    cmd->add_option("--out", opts.out_dir, "Artifact directory");
    cmd->add_option("--bpe-data", opts.bpe_data_dir, "Tokenizer data directory");
    cmd->add_option("--taxonomy", opts.taxonomy, "Taxonomy config file");
    cmd->add_option("--synonyms", opts.synonyms, "Synonym table file");
    cmd->add_option("--threshold", opts.threshold, "Threshold preset (gte1c, gt1c..gt7c, gt5f-gt5c)");
    cmd->add_option("--rendering", opts.rendering, "Prompt rendering: chat|alpaca");
    cmd->add_option("--seed", opts.seed, "Deterministic seed");
    cmd->add_option("--parallelism", opts.parallelism, "Worker pool size");
    cmd->add_flag("--offline", opts.offline, "Serve every model call from the cache");
    cmd->add_flag("--strict", opts.strict, "Escalate warnings to errors");
}

int open_ctx(const CommonOpts& opts, CtxGuard& guard) {
    const char* config_path = nullptr;
    std::string resolved = opts.config_path;
    if (resolved.empty()) {
        if (const char* env = std::getenv("SOLAUDIT_CONFIG")) resolved = env;
    }
    if (!resolved.empty()) config_path = resolved.c_str();

    solaudit_status status = solaudit_ctx_open(config_path, &guard.ctx);
    if (status != SOLAUDIT_OK) return fail("config", status);

    auto set = [&](const char* key, const std::string& value) -> int {
        if (value.empty()) return kExitOk;
        solaudit_status s = solaudit_ctx_set(guard.ctx, key, value.c_str());
        return s == SOLAUDIT_OK ? kExitOk : fail(key, s);
    };
    int rc;
    if ((rc = set("out_dir", opts.out_dir))) return rc;
    if ((rc = set("bpe_data_dir", opts.bpe_data_dir))) return rc;
    if ((rc = set("taxonomy", opts.taxonomy))) return rc;
    if ((rc = set("synonyms", opts.synonyms))) return rc;
    if ((rc = set("threshold", opts.threshold))) return rc;
    if ((rc = set("rendering", opts.rendering))) return rc;
    if ((rc = set("seed", opts.seed))) return rc;
    if ((rc = set("parallelism", opts.parallelism))) return rc;
    if (opts.offline && (rc = set("offline", "true"))) return rc;
    if (opts.strict && (rc = set("strict", "true"))) return rc;
    return kExitOk;
}

void print_summary(const char* stage, const char* json) {
    std::printf("%s: %s\n", stage, json ? json : "{}");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"smart-contract vulnerability detection pipeline"};
    app.require_subcommand(1);

    CommonOpts opts;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Fetch, clean and token-filter contracts");
    std::string addresses_file, corpus_out;
    std::string max_tokens, explorer_url;
    ingest->add_option("--addresses-file", addresses_file, "One 0x address per line")
        ->required();
    ingest->add_option("--corpus-out", corpus_out, "Corpus output file (JSONL)");
    ingest->add_option("--max-tokens", max_tokens, "Token budget (default 7340)");
    ingest->add_option("--explorer-url", explorer_url, "Explorer base URL");
    add_common(ingest, opts);

    // label
    auto* label = app.add_subcommand("label", "Majority-vote gold labels from tool reports");
    std::string corpus_in, reports_dir, labeled_out;
    label->add_option("--corpus", corpus_in, "Corpus JSONL")->required();
    label->add_option("--reports", reports_dir, "Directory of <tool>.jsonl reports")->required();
    label->add_option("--labeled-out", labeled_out, "Labeled corpus output");
    add_common(label, opts);

    // build-prompts / export
    std::string bp_corpus, bp_styles = "detection", bp_out;
    uint64_t bp_cap = 0;
    auto add_prompt_opts = [&](CLI::App* cmd) {
        cmd->add_option("--corpus", bp_corpus, "Labeled corpus JSONL")->required();
        cmd->add_option("--styles", bp_styles, "detection or detection,generation");
        cmd->add_option("--cap", bp_cap, "Record cap (stratified sample, uses --seed)");
        cmd->add_option("--dataset-out", bp_out, "Dataset output file");
        add_common(cmd, opts);
    };
    auto* build_prompts =
        app.add_subcommand("build-prompts", "Render a fine-tuning prompt dataset");
    add_prompt_opts(build_prompts);
    auto* export_cmd = app.add_subcommand("export", "Export a fine-tuning dataset subset");
    add_prompt_opts(export_cmd);

    // finetune
    auto* finetune = app.add_subcommand("finetune", "Upload a dataset and run a fine-tune job");
    std::string ft_file, ft_model;
    int ft_epochs = 3;
    bool ft_wait = false;
    finetune->add_option("--training-file", ft_file, "Chat-format JSONL")->required();
    finetune->add_option("--base-model", ft_model, "Base model name")->required();
    finetune->add_option("--epochs", ft_epochs, "Training epochs");
    finetune->add_flag("--wait", ft_wait, "Poll until the job settles");
    add_common(finetune, opts);

    // detect
    auto* detect = app.add_subcommand("detect", "Run a detection strategy over a corpus");
    std::string d_strategy, d_model = "random", d_corpus, d_run_id;
    detect->add_option("--strategy", d_strategy,
                       "finetuned|zeroshot|zeroshot-critic|gptlens|random")
        ->required();
    detect->add_option("--model", d_model, "Model name (selects the endpoint)");
    detect->add_option("--corpus", d_corpus, "Corpus JSONL")->required();
    detect->add_option("--run-id", d_run_id, "Run directory name");
    add_common(detect, opts);

    // critic
    auto* critic = app.add_subcommand("critic", "Critic post-pass over a prior run");
    std::string c_model, c_prior, c_run_id;
    critic->add_option("--model", c_model, "Critic model")->required();
    critic->add_option("--run", c_prior, "Prior run directory with findings.jsonl")->required();
    critic->add_option("--run-id", c_run_id, "Run directory name");
    add_common(critic, opts);

    // replay
    auto* replay = app.add_subcommand("replay", "Re-run a prior detection from its cache");
    std::string r_prior, r_run_id;
    replay->add_option("--run", r_prior, "Prior run directory")->required();
    replay->add_option("--run-id", r_run_id, "Run directory name");
    add_common(replay, opts);

    // score
    auto* score = app.add_subcommand("score", "Score predictions against gold labels");
    std::string s_preds, s_gold, s_out;
    score->add_option("--preds", s_preds, "predictions.jsonl")->required();
    score->add_option("--gold", s_gold, "Labeled corpus JSONL")->required();
    score->add_option("--report-out", s_out, "Report output directory");
    add_common(score, opts);

    // report
    auto* report = app.add_subcommand("report", "Merge saved reports into one document");
    std::vector<std::string> rp_inputs;
    std::string rp_format = "table";
    report->add_option("--inputs", rp_inputs, "report.jsonl files")->required();
    report->add_option("--format", rp_format, "table|csv|jsonl");
    add_common(report, opts);

    CLI11_PARSE(app, argc, argv);

    CtxGuard guard;
    if (int rc = open_ctx(opts, guard)) return rc;
    solaudit_ctx* ctx = guard.ctx;

    auto out_dir_default = [&](const std::string& leaf) {
        std::string base = opts.out_dir.empty() ? "out" : opts.out_dir;
        return base + "/" + leaf;
    };

    solaudit_status status = SOLAUDIT_OK;
    StringGuard summary;

    if (ingest->parsed()) {
        if (!max_tokens.empty() &&
            (status = solaudit_ctx_set(ctx, "corpus.max_tokens", max_tokens.c_str()))) {
            return fail("corpus.max_tokens", status);
        }
        if (!explorer_url.empty() &&
            (status = solaudit_ctx_set(ctx, "corpus.explorer_base_url", explorer_url.c_str()))) {
            return fail("corpus.explorer_base_url", status);
        }
        std::string out = corpus_out.empty() ? out_dir_default("corpus/corpus.jsonl") : corpus_out;
        status = solaudit_ingest(ctx, addresses_file.c_str(), out.c_str(), &summary.s);
        if (status != SOLAUDIT_OK) return fail("ingest", status);
        print_summary("ingest", summary.s);
    } else if (label->parsed()) {
        std::string out = labeled_out.empty() ? out_dir_default("labels/labeled.jsonl")
                                              : labeled_out;
        status = solaudit_label(ctx, corpus_in.c_str(), reports_dir.c_str(), out.c_str(),
                                &summary.s);
        if (status != SOLAUDIT_OK) return fail("label", status);
        print_summary("label", summary.s);
    } else if (build_prompts->parsed() || export_cmd->parsed()) {
        std::string out = bp_out.empty() ? out_dir_default("prompts/dataset.jsonl") : bp_out;
        status = solaudit_export_dataset(ctx, bp_corpus.c_str(), bp_styles.c_str(), bp_cap,
                                         out.c_str(), &summary.s);
        if (status != SOLAUDIT_OK) return fail("export", status);
        print_summary(build_prompts->parsed() ? "build-prompts" : "export", summary.s);
    } else if (finetune->parsed()) {
        status = solaudit_finetune(ctx, ft_file.c_str(), ft_model.c_str(), ft_epochs,
                                   ft_wait ? 1 : 0, &summary.s);
        if (status != SOLAUDIT_OK) return fail("finetune", status);
        print_summary("finetune", summary.s);
    } else if (detect->parsed()) {
        status = solaudit_detect(ctx, d_strategy.c_str(), d_model.c_str(), d_corpus.c_str(),
                                 d_run_id.empty() ? nullptr : d_run_id.c_str(), &summary.s);
        if (status != SOLAUDIT_OK) return fail("detect", status);
        print_summary("detect", summary.s);
    } else if (critic->parsed()) {
        status = solaudit_critic(ctx, c_model.c_str(), c_prior.c_str(),
                                 c_run_id.empty() ? nullptr : c_run_id.c_str(), &summary.s);
        if (status != SOLAUDIT_OK) return fail("critic", status);
        print_summary("critic", summary.s);
    } else if (replay->parsed()) {
        status = solaudit_replay(ctx, r_prior.c_str(),
                                 r_run_id.empty() ? nullptr : r_run_id.c_str(), &summary.s);
        if (status != SOLAUDIT_OK) return fail("replay", status);
        print_summary("replay", summary.s);
    } else if (score->parsed()) {
        std::string out = s_out.empty() ? out_dir_default("reports") : s_out;
        status = solaudit_score(ctx, s_preds.c_str(), s_gold.c_str(), out.c_str(), &summary.s);
        if (status != SOLAUDIT_OK) return fail("score", status);
        print_summary("score", summary.s);
    } else if (report->parsed()) {
        std::string joined;
        for (const std::string& p : rp_inputs) {
            if (!joined.empty()) joined += ';';
            joined += p;
        }
        status = solaudit_report(ctx, joined.c_str(), rp_format.c_str(), &summary.s);
        if (status != SOLAUDIT_OK) return fail("report", status);
        std::fputs(summary.s ? summary.s : "", stdout);
    }
    return kExitOk;
}
