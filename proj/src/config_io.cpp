#include "slab/config_io.hpp"

#include <fstream>

namespace slab {

using nlohmann::json;

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    raise(errc::invalid_dims, "config field '" + field + "': " + why);
}

SortRule parse_sort_rule(const std::string& name) {
    if (name == "none") return SortRule::none;
    if (name == "sizes_asc_rates_desc") return SortRule::sizes_asc_rates_desc;
    if (name == "sizes_asc_rates_asc") return SortRule::sizes_asc_rates_asc;
    bad_field("generator.sort_rule", "unknown rule '" + name + "'");
}

const char* sort_rule_name(SortRule rule) {
    switch (rule) {
        case SortRule::none: return "none";
        case SortRule::sizes_asc_rates_desc: return "sizes_asc_rates_desc";
        case SortRule::sizes_asc_rates_asc: return "sizes_asc_rates_asc";
    }
    return "none";
}

CodeRequest parse_code(const json& doc) {
    if (!doc.is_object() || !doc.contains("type")) {
        bad_field("codes[]", "each entry needs a 'type'");
    }
    const std::string type = doc.at("type").get<std::string>();
    CodeRequest request;
    if (type == "mds") {
        request.kind = CodeRequest::Kind::mds;
    } else if (type == "group") {
        const auto alloc = doc.value("alloc", json("optimal"));
        if (alloc.is_string() && alloc.get<std::string>() == "optimal") {
            request.kind = CodeRequest::Kind::group_optimal;
        } else if (alloc.is_string() && alloc.get<std::string>() == "even") {
            request.kind = CodeRequest::Kind::group_even;
        } else if (alloc.is_array()) {
            request.kind = CodeRequest::Kind::group_fixed;
            request.per_group = alloc.get<std::vector<int>>();
        } else {
            bad_field("codes[].alloc", "expected \"optimal\", \"even\", or an integer array");
        }
    } else if (type == "product") {
        request.kind = CodeRequest::Kind::product;
        if (!doc.contains("sqrt_n") || !doc.contains("sqrt_k")) {
            bad_field("codes[]", "product code needs sqrt_n and sqrt_k");
        }
        request.sqrt_n = doc.at("sqrt_n").get<int>();
        request.sqrt_k = doc.at("sqrt_k").get<int>();
    } else {
        bad_field("codes[].type", "unknown code type '" + type + "'");
    }
    return request;
}

} // namespace

ExperimentConfig parse_experiment_config(const json& doc) {
    ExperimentConfig config;
    if (!doc.is_object()) bad_field("<root>", "expected an object");
    config.schema_version = doc.value("schema_version", 0);
    if (config.schema_version != 1) {
        bad_field("schema_version", "expected 1, got " + std::to_string(config.schema_version));
    }
    if (doc.contains("system")) {
        const auto& sys = doc.at("system");
        if (!sys.contains("sizes") || !sys.contains("rates")) {
            bad_field("system", "needs 'sizes' and 'rates' arrays");
        }
        config.system = new_group_system(sys.at("sizes").get<std::vector<int>>(),
                                         sys.at("rates").get<std::vector<double>>());
    }
    if (doc.contains("generator")) {
        const auto& gen = doc.at("generator");
        SystemGenerator generator;
        generator.num_groups = gen.value("L", 2);
        const auto size_dist = gen.value("size_dist", std::vector<double>{});
        const auto rate_dist = gen.value("rate_dist", std::vector<double>{});
        if (size_dist.size() != 2 || rate_dist.size() != 2) {
            bad_field("generator", "size_dist and rate_dist must be uniform [low, high] pairs");
        }
        generator.size_range = {size_dist[0], size_dist[1]};
        generator.rate_range = {rate_dist[0], rate_dist[1]};
        generator.sort_rule = parse_sort_rule(gen.value("sort_rule", std::string("none")));
        config.generator = generator;
    }
    if (!doc.contains("k")) bad_field("k", "missing");
    config.k = doc.at("k").get<int>();
    if (!doc.contains("codes")) bad_field("codes", "missing");
    for (const auto& entry : doc.at("codes")) config.codes.push_back(parse_code(entry));
    config.beta = doc.value("beta", 2.0);
    config.alpha_grid = doc.value("alpha_grid", std::vector<double>{});
    config.trials = doc.value("trials", 1);
    config.master_seed = doc.value("master_seed", std::uint64_t{0});
    validate_config(config);
    return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        raise(errc::invalid_dims, "cannot read config file " + path.string());
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        raise(errc::invalid_dims, "config parse error in " + path.string() + ": " + e.what());
    }
    return parse_experiment_config(doc);
}

json config_to_json(const ExperimentConfig& config) {
    json doc;
    doc["schema_version"] = config.schema_version;
    if (config.system) {
        doc["system"] = {{"sizes", config.system->group_sizes}, {"rates", config.system->rates}};
    }
    if (config.generator) {
        doc["generator"] = {
            {"L", config.generator->num_groups},
            {"size_dist", {config.generator->size_range.low, config.generator->size_range.high}},
            {"rate_dist", {config.generator->rate_range.low, config.generator->rate_range.high}},
            {"sort_rule", sort_rule_name(config.generator->sort_rule)}};
    }
    doc["k"] = config.k;
    json codes = json::array();
    for (const auto& code : config.codes) {
        json entry;
        switch (code.kind) {
            case CodeRequest::Kind::mds: entry["type"] = "mds"; break;
            case CodeRequest::Kind::group_optimal:
                entry["type"] = "group";
                entry["alloc"] = "optimal";
                break;
            case CodeRequest::Kind::group_even:
                entry["type"] = "group";
                entry["alloc"] = "even";
                break;
            case CodeRequest::Kind::group_fixed:
                entry["type"] = "group";
                entry["alloc"] = code.per_group;
                break;
            case CodeRequest::Kind::product:
                entry["type"] = "product";
                entry["sqrt_n"] = code.sqrt_n;
                entry["sqrt_k"] = code.sqrt_k;
                break;
        }
        codes.push_back(entry);
    }
    doc["codes"] = codes;
    doc["beta"] = config.beta;
    doc["alpha_grid"] = config.alpha_grid;
    doc["trials"] = config.trials;
    doc["master_seed"] = config.master_seed;
    return doc;
}

json summary_to_json(const ExperimentSummary& summary) {
    json doc;
    doc["trials"] = summary.trials;
    doc["master_seed"] = summary.master_seed;
    doc["config"] = config_to_json(summary.config);
    json codes = json::array();
    for (const auto& code : summary.codes) {
        json entry;
        entry["label"] = code.label;
        entry["mean_t_comp"] = code.mean_t_comp;
        entry["se_t_comp"] = code.se_t_comp;
        entry["min_t_comp"] = code.min_t_comp;
        entry["max_t_comp"] = code.max_t_comp;
        entry["mean_dec_units"] = code.mean_dec_units;
        entry["mean_rho"] = code.mean_rho;
        if (!summary.config.alpha_grid.empty()) {
            json execs = json::array();
            for (double alpha : summary.config.alpha_grid) {
                execs.push_back(code.mean_t_comp + alpha * code.mean_dec_units);
            }
            entry["mean_t_exec"] = execs;
        }
        codes.push_back(entry);
    }
    doc["codes"] = codes;
    return doc;
}

} // namespace slab
