#include "core/config.hpp"

#include <cstdlib>
#include <filesystem>

#include "json.hpp"

#include "core/error.hpp"
#include "core/util.hpp"

namespace solaudit {

namespace {

std::string interpolate_env(const std::string& value) {
    std::string out;
    size_t pos = 0;
    while (pos < value.size()) {
        size_t open = value.find("${", pos);
        if (open == std::string::npos) {
            out += value.substr(pos);
            break;
        }
        size_t close = value.find('}', open + 2);
        if (close == std::string::npos) {
            out += value.substr(pos);
            break;
        }
        out += value.substr(pos, open - pos);
        std::string name = value.substr(open + 2, close - open - 2);
        const char* env = std::getenv(name.c_str());
        if (!env) {
            raise(Errc::config, "config references unset environment variable " + name);
        }
        out += env;
        pos = close + 1;
    }
    return out;
}

std::string get_path(const nlohmann::json& j, const char* key, const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    std::string path = interpolate_env(j[key].get<std::string>());
    if (!path.empty() && !std::filesystem::exists(path)) {
        raise(Errc::config, std::string(key) + " does not exist: " + path);
    }
    return path;
}

EndpointConfig endpoint_from_json(const nlohmann::json& j) {
    EndpointConfig e;
    e.base_url = interpolate_env(j.value("base_url", std::string{}));
    e.api_key_env_var = j.value("api_key_env_var", e.api_key_env_var);
    e.max_attempts = j.value("max_attempts", e.max_attempts);
    e.backoff_base_ms = j.value("backoff_base_ms", e.backoff_base_ms);
    e.backoff_factor = j.value("backoff_factor", e.backoff_factor);
    e.requests_per_second = j.value("requests_per_second", e.requests_per_second);
    return e;
}

}  // namespace

const EndpointConfig& RunConfig::endpoint_for(const std::string& model) const {
    auto it = endpoints.find(model);
    if (it != endpoints.end()) return it->second;
    it = endpoints.find("default");
    if (it != endpoints.end()) return it->second;
    raise(Errc::config, "no endpoint configured for model " + model + " and no default");
}

RunConfig default_run_config() {
    RunConfig config;
    config.bpe_data_dir = "data/gpt2";
    return config;
}

RunConfig load_run_config(const std::string& path) {
    if (!std::filesystem::exists(path)) {
        raise(Errc::config, "config file does not exist: " + path);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const Error&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::config, "bad config file " + path + ": " + e.what());
    }

    RunConfig config = default_run_config();
    if (j.contains("endpoints")) {
        for (auto it = j["endpoints"].begin(); it != j["endpoints"].end(); ++it) {
            config.endpoints[it.key()] = endpoint_from_json(it.value());
        }
    }
    if (j.contains("corpus")) {
        const nlohmann::json& c = j["corpus"];
        config.corpus.max_tokens = c.value("max_tokens", config.corpus.max_tokens);
        config.corpus.explorer_base_url =
            interpolate_env(c.value("explorer_base_url", config.corpus.explorer_base_url));
        config.corpus.api_key_env_var =
            c.value("api_key_env_var", config.corpus.api_key_env_var);
        config.corpus.max_attempts = c.value("max_attempts", config.corpus.max_attempts);
        config.corpus.backoff_base_ms = c.value("backoff_base_ms", config.corpus.backoff_base_ms);
        config.corpus.backoff_factor = c.value("backoff_factor", config.corpus.backoff_factor);
        config.corpus.parallelism = c.value("parallelism", config.corpus.parallelism);
        config.corpus.requests_per_second =
            c.value("requests_per_second", config.corpus.requests_per_second);
    }
    config.bpe_data_dir = get_path(j, "bpe_data_dir", config.bpe_data_dir);
    config.taxonomy_path = get_path(j, "taxonomy", config.taxonomy_path);
    config.synonyms_path = get_path(j, "synonyms", config.synonyms_path);
    config.threshold = j.value("threshold", config.threshold);
    config.rendering = j.value("rendering", config.rendering);
    config.seed = j.value("seed", config.seed);
    config.parallelism = j.value("parallelism", config.parallelism);
    config.offline = j.value("offline", config.offline);
    config.strict = j.value("strict", config.strict);
    config.top_k = j.value("top_k", config.top_k);
    if (j.contains("rank_weights")) {
        const nlohmann::json& w = j["rank_weights"];
        config.rank_weights.correctness = w.value("correctness", config.rank_weights.correctness);
        config.rank_weights.severity = w.value("severity", config.rank_weights.severity);
        config.rank_weights.profitability =
            w.value("profitability", config.rank_weights.profitability);
    }
    config.support_mode = j.value("support_mode", config.support_mode);
    config.out_dir = j.value("out_dir", config.out_dir);

    threshold_preset(config.threshold);  // fail fast on unknown presets
    if (config.rendering != "chat" && config.rendering != "alpaca") {
        raise(Errc::config, "rendering must be 'chat' or 'alpaca'");
    }
    if (config.support_mode != "gold" && config.support_mode != "tp") {
        raise(Errc::config, "support_mode must be 'gold' or 'tp'");
    }
    return config;
}

std::string config_snapshot(const RunConfig& config) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json endpoints;
    for (const auto& [name, e] : config.endpoints) {
        endpoints[name] = {{"base_url", e.base_url},
                           {"api_key_env_var", e.api_key_env_var},
                           {"max_attempts", e.max_attempts},
                           {"backoff_base_ms", e.backoff_base_ms},
                           {"backoff_factor", e.backoff_factor},
                           {"requests_per_second", e.requests_per_second}};
    }
    j["endpoints"] = endpoints;
    j["corpus"] = {{"max_tokens", config.corpus.max_tokens},
                   {"explorer_base_url", config.corpus.explorer_base_url},
                   {"api_key_env_var", config.corpus.api_key_env_var},
                   {"max_attempts", config.corpus.max_attempts},
                   {"backoff_base_ms", config.corpus.backoff_base_ms},
                   {"backoff_factor", config.corpus.backoff_factor},
                   {"parallelism", config.corpus.parallelism},
                   {"requests_per_second", config.corpus.requests_per_second}};
    j["bpe_data_dir"] = config.bpe_data_dir;
    j["taxonomy"] = config.taxonomy_path;
    j["synonyms"] = config.synonyms_path;
    j["threshold"] = config.threshold;
    j["rendering"] = config.rendering;
    j["seed"] = config.seed;
    j["parallelism"] = config.parallelism;
    j["offline"] = config.offline;
    j["strict"] = config.strict;
    j["top_k"] = config.top_k;
    j["rank_weights"] = {{"correctness", config.rank_weights.correctness},
                         {"severity", config.rank_weights.severity},
                         {"profitability", config.rank_weights.profitability}};
    j["support_mode"] = config.support_mode;
    j["out_dir"] = config.out_dir;
    return j.dump(2);
}

TaxonomyBundle load_taxonomy(const std::string& path_or_empty) {
    TaxonomyBundle bundle;
    if (path_or_empty.empty()) return bundle;

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path_or_empty));
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::config, "bad taxonomy config " + path_or_empty + ": " + e.what());
    }

    if (j.contains("swc")) {
        for (auto it = j["swc"].begin(); it != j["swc"].end(); ++it) {
            auto c = class_from_abbrev(it.key());
            if (!c) {
                raise(Errc::config, "unknown class in swc mapping: " + it.key());
            }
            SwcEntry entry;
            entry.swc_id = it.value().at("id").get<std::string>();
            entry.display_name = it.value().at("name").get<std::string>();
            if (entry.swc_id.rfind("SWC-", 0) != 0) {
                raise(Errc::config, "swc id must match SWC-<digits>: " + entry.swc_id);
            }
            bundle.swc.set(*c, std::move(entry));
        }
    }

    if (j.contains("detectors")) {
        DetectorTable table;  // full replacement, not a merge
        for (auto tool_it = j["detectors"].begin(); tool_it != j["detectors"].end(); ++tool_it) {
            auto tool = tool_from_name(tool_it.key());
            if (!tool) {
                raise(Errc::config, "unknown tool in detector table: " + tool_it.key());
            }
            for (auto cls_it = tool_it.value().begin(); cls_it != tool_it.value().end();
                 ++cls_it) {
                auto c = class_from_abbrev(cls_it.key());
                if (!c) {
                    raise(Errc::config, "unknown class in detector table: " + cls_it.key());
                }
                for (const auto& id : cls_it.value()) {
                    table.add(*tool, id.get<std::string>(), *c);
                }
            }
        }
        bundle.detectors = table;
        bundle.policy = VotePolicy::strict_majority(table);
    }

    if (j.contains("quorum")) {
        if (j["quorum"].is_number_integer()) {
            bundle.policy = VotePolicy::k_of_all(j["quorum"].get<int>());
        } else if (j["quorum"].get<std::string>() != "strict-majority") {
            raise(Errc::config, "quorum must be 'strict-majority' or an integer k");
        }
    }

    if (j.contains("supporting_tools")) {
        for (auto it = j["supporting_tools"].begin(); it != j["supporting_tools"].end(); ++it) {
            auto c = class_from_abbrev(it.key());
            if (!c) {
                raise(Errc::config, "unknown class in supporting_tools: " + it.key());
            }
            std::set<Tool> tools;
            for (const auto& name : it.value()) {
                auto tool = tool_from_name(name.get<std::string>());
                if (!tool) {
                    raise(Errc::config,
                          "unknown tool in supporting_tools: " + name.get<std::string>());
                }
                tools.insert(*tool);
            }
            bundle.policy.set_supporting(*c, std::move(tools));
        }
    }
    return bundle;
}

SynonymTable load_synonyms(const std::string& path_or_empty) {
    if (path_or_empty.empty()) return SynonymTable::defaults();
    return SynonymTable::load(path_or_empty);
}

}  // namespace solaudit
