#include "ctxbai/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ctxbai {

namespace {

using boost::property_tree::ptree;

[[noreturn]] void fail(const std::string& message) {
    throw std::invalid_argument("config: " + message);
}

std::vector<std::string> split_ws(const std::string& value) {
    std::vector<std::string> out;
    std::istringstream stream(value);
    std::string token;
    while (stream >> token) {
        out.push_back(token);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) fail(key + ": trailing characters in '" + value + "'");
        return v;
    } catch (const std::invalid_argument&) {
        fail(key + ": expected a number, got '" + value + "'");
    } catch (const std::out_of_range&) {
        fail(key + ": number out of range: '" + value + "'");
    }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::int64_t v = std::stoll(value, &used);
        if (used != value.size()) fail(key + ": trailing characters in '" + value + "'");
        return v;
    } catch (const std::invalid_argument&) {
        fail(key + ": expected an integer, got '" + value + "'");
    } catch (const std::out_of_range&) {
        fail(key + ": integer out of range: '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    fail(key + ": expected a boolean, got '" + value + "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const std::string& token : split_ws(value)) {
        out.push_back(parse_double(key, token));
    }
    if (out.empty()) fail(key + ": empty list");
    return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<std::int64_t> out;
    for (const std::string& token : split_ws(value)) {
        out.push_back(parse_int(key, token));
    }
    if (out.empty()) fail(key + ": empty list");
    return out;
}

// Section view with typo detection: every key must be consumed.
class Section {
public:
    Section(std::string name, const ptree& tree) : name_(std::move(name)) {
        for (const auto& [key, child] : tree) {
            if (!child.empty()) fail(name_ + "." + key + ": nested values are not allowed");
            if (!values_.emplace(key, child.data()).second) {
                fail(name_ + "." + key + ": duplicate key");
            }
        }
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string take(const std::string& key) {
        const auto it = values_.find(key);
        if (it == values_.end()) fail(name_ + "." + key + ": missing required key");
        consumed_.insert(key);
        return it->second;
    }

    std::string take_or(const std::string& key, const std::string& fallback) {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        consumed_.insert(key);
        return it->second;
    }

    void finish() const {
        for (const auto& [key, value] : values_) {
            (void)value;
            if (consumed_.count(key) == 0) {
                fail(name_ + "." + key + ": unknown key");
            }
        }
    }

    const std::map<std::string, std::string>& values() const { return values_; }
    const std::string& name() const { return name_; }

private:
    std::string name_;
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
    ptree tree;
    try {
        std::istringstream stream(text);
        boost::property_tree::read_ini(stream, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        fail(std::string("malformed INI: ") + e.what());
    }

    ExperimentConfig config;
    std::set<std::string> seen_sections;
    for (const auto& [section, subtree] : tree) {
        if (subtree.empty()) fail("top-level key '" + section + "' outside a section");
        if (!seen_sections.insert(section).second) fail("duplicate section [" + section + "]");
        for (const auto& [key, child] : subtree) {
            config.echo[section + "." + key] = child.data();
        }
    }

    if (tree.find("instance") == tree.not_found()) fail("missing [instance] section");
    Section instance("instance", tree.get_child("instance"));
    {
        const std::string family = instance.take("family");
        if (family == "gaussian") {
            config.instance.family = RewardFamily::kGaussianLocationShift;
        } else if (family == "bernoulli") {
            config.instance.family = RewardFamily::kBernoulli;
        } else {
            fail("instance.family: expected gaussian or bernoulli, got '" + family + "'");
        }
        config.instance.context_probs =
            parse_double_list("instance.context_probs", instance.take("context_probs"));
        for (int a = 0;; ++a) {
            const std::string key = "mean_" + std::to_string(a);
            if (!instance.has(key)) break;
            config.instance.means.push_back(
                parse_double_list("instance." + key, instance.take(key)));
        }
        if (config.instance.means.empty()) fail("instance.mean_0: missing required key");
        if (config.instance.family == RewardFamily::kGaussianLocationShift) {
            for (int a = 0; a < static_cast<int>(config.instance.means.size()); ++a) {
                const std::string key = "sd_" + std::to_string(a);
                config.instance.sds.push_back(
                    parse_double_list("instance." + key, instance.take(key)));
            }
        }
        config.instance.bounds.c_mu =
            parse_double("instance.c_mu", instance.take_or("c_mu", "100"));
        config.instance.bounds.c_nu =
            parse_double("instance.c_nu", instance.take_or("c_nu", "10000"));
        config.instance.bounds.c_sigma2 =
            parse_double("instance.c_sigma2", instance.take_or("c_sigma2", "100"));
        config.strategy.bounds = config.instance.bounds;
        instance.finish();
    }

    if (tree.find("strategy") != tree.not_found()) {
        Section strategy("strategy", tree.get_child("strategy"));
        const std::string name = strategy.take_or("name", "rs_aipw");
        if (name == "rs_aipw") {
            config.strategy_name = StrategyName::kRsAipw;
        } else if (name == "uniform_eba") {
            config.strategy_name = StrategyName::kUniformEba;
        } else {
            fail("strategy.name: expected rs_aipw or uniform_eba, got '" + name + "'");
        }
        config.strategy.init_rounds_per_arm = static_cast<int>(
            parse_int("strategy.init_rounds_per_arm",
                      strategy.take_or("init_rounds_per_arm", "1")));
        config.strategy.mixing.enabled = parse_bool(
            "strategy.mixing_enabled", strategy.take_or("mixing_enabled", "true"));
        config.strategy.mixing.exponent = parse_double(
            "strategy.mixing_exponent", strategy.take_or("mixing_exponent", "0.5"));
        const std::string mode = strategy.take_or("nuisance_mode", "estimate");
        if (mode == "estimate") {
            config.strategy.nuisance_mode = StrategyConfig::NuisanceMode::kEstimate;
        } else if (mode == "oracle") {
            config.strategy.nuisance_mode = StrategyConfig::NuisanceMode::kOracle;
        } else if (mode == "frozen_uniform") {
            config.strategy.nuisance_mode = StrategyConfig::NuisanceMode::kFrozenUniform;
        } else {
            fail("strategy.nuisance_mode: expected estimate, oracle, or frozen_uniform");
        }
        strategy.finish();
    }

    if (tree.find("experiment") != tree.not_found()) {
        Section experiment("experiment", tree.get_child("experiment"));
        config.budgets =
            parse_int_list("experiment.budgets", experiment.take("budgets"));
        config.n_trials =
            parse_int("experiment.n_trials", experiment.take_or("n_trials", "1"));
        config.base_seed = static_cast<std::uint64_t>(
            parse_int("experiment.base_seed", experiment.take_or("base_seed", "1")));
        config.threads = static_cast<int>(
            parse_int("experiment.threads", experiment.take_or("threads", "0")));
        const std::string format = experiment.take_or("format", "csv");
        if (format == "csv") {
            config.format = ExperimentConfig::Format::kCsv;
        } else if (format == "json") {
            config.format = ExperimentConfig::Format::kJson;
        } else {
            fail("experiment.format: expected csv or json, got '" + format + "'");
        }
        config.out_path = experiment.take_or("out", "");
        experiment.finish();
    }

    if (tree.find("diagnostics") != tree.not_found()) {
        Section diagnostics("diagnostics", tree.get_child("diagnostics"));
        if (diagnostics.has("xi_grid")) {
            config.diagnostics.xi_grid =
                parse_int_list("diagnostics.xi_grid", diagnostics.take("xi_grid"));
        }
        config.diagnostics.variance = parse_bool(
            "diagnostics.variance", diagnostics.take_or("variance", "false"));
        config.diagnostics.allocation = parse_bool(
            "diagnostics.allocation", diagnostics.take_or("allocation", "false"));
        diagnostics.finish();
        config.strategy.record_diagnostics = config.diagnostics.any();
    }

    if (tree.find("oracle") != tree.not_found()) {
        Section oracle("oracle", tree.get_child("oracle"));
        config.oracle_grid_step = parse_double(
            "oracle.grid_step", oracle.take_or("grid_step", "0.001"));
        oracle.finish();
    }

    for (const auto& [section, subtree] : tree) {
        (void)subtree;
        if (section != "instance" && section != "strategy" &&
            section != "experiment" && section != "diagnostics" &&
            section != "oracle") {
            fail("unknown section [" + section + "]");
        }
    }
    return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        fail("cannot open config file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return parse_experiment_config(buffer.str());
}

}  // namespace ctxbai
