#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "ctxbai/config.hpp"
#include "ctxbai/json_io.hpp"

namespace {

using ctxbai::ExperimentConfig;

struct CommonFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> trials;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<int> threads;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--seed", flags.seed, "Override experiment.base_seed");
    cmd->add_option("--trials", flags.trials, "Override experiment.n_trials");
    cmd->add_option("--out", flags.out, "Override experiment.out (output path)");
    cmd->add_option("--format", flags.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--threads", flags.threads, "Worker thread count (0 = hardware)");
}

ExperimentConfig load_with_overrides(const std::string& path, const CommonFlags& flags) {
    ExperimentConfig config = ctxbai::load_experiment_config(path);
    if (flags.seed) config.base_seed = *flags.seed;
    if (flags.trials) config.n_trials = *flags.trials;
    if (flags.out) config.out_path = *flags.out;
    if (flags.format) {
        config.format = *flags.format == "json" ? ExperimentConfig::Format::kJson
                                                : ExperimentConfig::Format::kCsv;
    }
    if (flags.threads) {
        config.threads = *flags.threads;
    } else if (const char* env = std::getenv("CTXBAI_THREADS")) {
        config.threads = std::atoi(env);
    }
    return config;
}

void emit(const std::string& path, const std::string& payload) {
    if (path.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw std::runtime_error("cannot open output path '" + path + "'");
    }
    file << payload;
    if (!file) {
        throw std::runtime_error("failed writing output path '" + path + "'");
    }
}

int cmd_run(const std::string& config_path, const CommonFlags& flags) {
    const ExperimentConfig config = load_with_overrides(config_path, flags);
    const ctxbai::ExperimentResult result = ctxbai::run_experiment(config);
    if (config.format == ExperimentConfig::Format::kCsv) {
        emit(config.out_path, ctxbai::to_csv(result));
    } else {
        emit(config.out_path, ctxbai::result_to_json(result).dump(2) + "\n");
    }
    return 0;
}

void print_allocation_text(std::ostream& out, const ctxbai::BanditInstance& instance,
                           const ctxbai::AllocationTable& table) {
    out << "optimal allocation w*(a|x)\n";
    char buffer[64];
    out << "  arm\\ctx";
    for (int x = 0; x < table.M; ++x) {
        std::snprintf(buffer, sizeof(buffer), " %12s",
                      instance.context_space().labels[static_cast<std::size_t>(x)].c_str());
        out << buffer;
    }
    out << '\n';
    for (int a = 0; a < table.K; ++a) {
        std::snprintf(buffer, sizeof(buffer), "  %-7d", a);
        out << buffer;
        for (int x = 0; x < table.M; ++x) {
            std::snprintf(buffer, sizeof(buffer), " %12.8f", table.at(a, x));
            out << buffer;
        }
        out << (a == instance.best_arm() ? "   (best)\n" : "\n");
    }
}

void print_rates_text(std::ostream& out, const ctxbai::RateReport& rates) {
    char buffer[128];
    std::snprintf(buffer, sizeof(buffer),
                  "rates: lower_exponent=%.10g upper_exponent=%.10g binding_arm=%d\n",
                  rates.lower_exponent, rates.upper_exponent, rates.binding_arm);
    out << buffer;
    out << "per-arm variance constants:";
    for (double v : rates.per_arm_omega) {
        std::snprintf(buffer, sizeof(buffer), " %.10g", v);
        out << buffer;
    }
    out << '\n';
    if (!rates.context_constant_gaps) {
        out << "note: per-context gaps vary; the lower-bound formula applies "
               "only to the context-constant-gap regime\n";
    }
}

int cmd_allocation(const std::string& config_path, const CommonFlags& flags) {
    const ExperimentConfig config = load_with_overrides(config_path, flags);
    const ctxbai::BanditInstance instance = config.instance.build();
    const ctxbai::AllocationTable table = ctxbai::optimal_allocation(instance);
    const ctxbai::RateReport rates = ctxbai::upper_bound_rate(instance);

    std::ostringstream text;
    print_allocation_text(text, instance, table);
    print_rates_text(text, rates);
    nlohmann::json doc{{"allocation", ctxbai::allocation_to_json(table)},
                       {"rates", ctxbai::rate_report_to_json(rates)}};
    emit(config.out_path, text.str() + doc.dump(2) + "\n");
    return 0;
}

int cmd_oracle(const std::string& config_path, const CommonFlags& flags) {
    const ExperimentConfig config = load_with_overrides(config_path, flags);
    const ctxbai::BanditInstance instance = config.instance.build();
    const ctxbai::AllocationTable formula = ctxbai::optimal_allocation(instance);
    const ctxbai::OracleResult oracle =
        ctxbai::oracle_maximin_allocation(instance, config.oracle_grid_step);
    const double formula_value = ctxbai::maximin_objective(instance, formula).value;

    double sup_distance = 0.0;
    for (int a = 0; a < formula.K; ++a) {
        for (int x = 0; x < formula.M; ++x) {
            sup_distance = std::max(sup_distance,
                                    std::abs(formula.at(a, x) - oracle.table.at(a, x)));
        }
    }
    std::ostringstream text;
    char buffer[256];
    std::snprintf(buffer, sizeof(buffer),
                  "grid step %.6g: |w_formula - w_grid|_sup = %.6g\n"
                  "maximin value: formula %.12g vs grid %.12g (formula - grid = %.3g)\n",
                  config.oracle_grid_step, sup_distance, formula_value, oracle.value,
                  formula_value - oracle.value);
    text << buffer;
    nlohmann::json doc{{"formula", ctxbai::allocation_to_json(formula)},
                       {"grid", ctxbai::allocation_to_json(oracle.table)},
                       {"formula_value", formula_value},
                       {"grid_value", oracle.value},
                       {"sup_distance", sup_distance}};
    emit(config.out_path, text.str() + doc.dump(2) + "\n");
    return 0;
}

int cmd_diagnose(const std::string& config_path, const CommonFlags& flags) {
    ExperimentConfig config = load_with_overrides(config_path, flags);
    if (!config.diagnostics.any()) {
        // Default suite: residual grid at quartiles of each budget plus the
        // variance and allocation convergence summaries.
        for (std::int64_t budget : config.budgets) {
            config.diagnostics.xi_grid.push_back(std::max<std::int64_t>(1, budget / 4));
            config.diagnostics.xi_grid.push_back(std::max<std::int64_t>(1, budget / 2));
            config.diagnostics.xi_grid.push_back(budget);
        }
        std::sort(config.diagnostics.xi_grid.begin(), config.diagnostics.xi_grid.end());
        config.diagnostics.xi_grid.erase(
            std::unique(config.diagnostics.xi_grid.begin(),
                        config.diagnostics.xi_grid.end()),
            config.diagnostics.xi_grid.end());
        config.diagnostics.variance = true;
        config.diagnostics.allocation = true;
        config.strategy.record_diagnostics = true;
    }
    const ctxbai::ExperimentResult result = ctxbai::run_experiment(config);

    std::ostringstream text;
    char buffer[160];
    for (const ctxbai::BudgetDiagnostics& diag : result.diagnostics) {
        std::snprintf(buffer, sizeof(buffer), "budget %lld\n",
                      static_cast<long long>(diag.budget));
        text << buffer;
        for (std::size_t s = 0; s < diag.xi.size(); ++s) {
            for (const ctxbai::XiGridStat& stat : diag.xi[s]) {
                std::snprintf(buffer, sizeof(buffer),
                              "  arm %d t=%lld: mean(xi)=% .3e se=%.3e |mean|/se=%.2f\n",
                              diag.tracked_arms[s], static_cast<long long>(stat.t),
                              stat.mean, stat.se,
                              stat.se > 0 ? std::abs(stat.mean) / stat.se : 0.0);
                text << buffer;
            }
        }
        if (diag.v_t) {
            std::snprintf(buffer, sizeof(buffer), "  V_T = %.6g\n", *diag.v_t);
            text << buffer;
        }
        if (diag.allocation_distance) {
            std::snprintf(buffer, sizeof(buffer),
                          "  mean sup|w_hat - w*| = %.6g\n", *diag.allocation_distance);
            text << buffer;
        }
    }
    emit(config.out_path, text.str() + ctxbai::result_to_json(result).dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contextual fixed-budget best-arm identification simulator"};
    app.require_subcommand(1);

    std::string run_config;
    std::string allocation_config;
    std::string oracle_config;
    std::string diagnose_config;
    CommonFlags flags;

    CLI::App* run = app.add_subcommand("run", "Run the Monte Carlo experiment");
    run->add_option("config", run_config, "Experiment config file")->required();
    add_common_flags(run, flags);

    CLI::App* allocation =
        app.add_subcommand("allocation", "Print the target allocation and rate report");
    allocation->add_option("config", allocation_config, "Config file")->required();
    add_common_flags(allocation, flags);

    CLI::App* oracle =
        app.add_subcommand("oracle", "Grid-search verification of the closed form");
    oracle->add_option("config", oracle_config, "Config file")->required();
    add_common_flags(oracle, flags);

    CLI::App* diagnose =
        app.add_subcommand("diagnose", "Martingale residual and convergence suite");
    diagnose->add_option("config", diagnose_config, "Config file")->required();
    add_common_flags(diagnose, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run->parsed()) return cmd_run(run_config, flags);
        if (allocation->parsed()) return cmd_allocation(allocation_config, flags);
        if (oracle->parsed()) return cmd_oracle(oracle_config, flags);
        if (diagnose->parsed()) return cmd_diagnose(diagnose_config, flags);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
