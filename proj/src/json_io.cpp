#include "ctxbai/json_io.hpp"

#include <nlohmann/json.hpp>

namespace ctxbai {

using nlohmann::json;

namespace {

json optional_to_json(const std::optional<double>& value) {
    if (value) return *value;
    return nullptr;
}

std::optional<double> optional_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

json decay_to_json(const DecayFit& fit) {
    return json{{"budgets", fit.budgets}, {"p_hat", fit.p_hat},
                {"p_se", fit.p_se},       {"slope", fit.slope},
                {"slope_se", fit.slope_se}, {"intercept", fit.intercept},
                {"r2", fit.r2}};
}

DecayFit decay_from_json(const json& j) {
    DecayFit fit;
    fit.budgets = j.at("budgets").get<std::vector<std::int64_t>>();
    fit.p_hat = j.at("p_hat").get<std::vector<double>>();
    fit.p_se = j.at("p_se").get<std::vector<double>>();
    fit.slope = j.at("slope").get<double>();
    fit.slope_se = j.at("slope_se").get<double>();
    fit.intercept = j.at("intercept").get<double>();
    fit.r2 = j.at("r2").get<double>();
    return fit;
}

json diag_to_json(const BudgetDiagnostics& diag) {
    json xi = json::array();
    for (const auto& arm_stats : diag.xi) {
        json rows = json::array();
        for (const XiGridStat& stat : arm_stats) {
            rows.push_back(json{{"t", stat.t},
                                {"mean", stat.mean},
                                {"se", stat.se},
                                {"n", stat.n}});
        }
        xi.push_back(rows);
    }
    return json{{"budget", diag.budget},
                {"tracked_arms", diag.tracked_arms},
                {"xi", xi},
                {"v_t", optional_to_json(diag.v_t)},
                {"allocation_distance", optional_to_json(diag.allocation_distance)}};
}

BudgetDiagnostics diag_from_json(const json& j) {
    BudgetDiagnostics diag;
    diag.budget = j.at("budget").get<std::int64_t>();
    diag.tracked_arms = j.at("tracked_arms").get<std::vector<int>>();
    for (const json& rows : j.at("xi")) {
        std::vector<XiGridStat> arm_stats;
        for (const json& row : rows) {
            XiGridStat stat;
            stat.t = row.at("t").get<std::int64_t>();
            stat.mean = row.at("mean").get<double>();
            stat.se = row.at("se").get<double>();
            stat.n = row.at("n").get<std::int64_t>();
            arm_stats.push_back(stat);
        }
        diag.xi.push_back(std::move(arm_stats));
    }
    diag.v_t = optional_from_json(j.at("v_t"));
    diag.allocation_distance = optional_from_json(j.at("allocation_distance"));
    return diag;
}

}  // namespace

json rate_report_to_json(const RateReport& report) {
    return json{{"lower_exponent", report.lower_exponent},
                {"upper_exponent", report.upper_exponent},
                {"per_arm_omega", report.per_arm_omega},
                {"binding_arm", report.binding_arm},
                {"context_constant_gaps", report.context_constant_gaps}};
}

namespace {

RateReport rate_report_from_json(const json& j) {
    RateReport report;
    report.lower_exponent = j.at("lower_exponent").get<double>();
    report.upper_exponent = j.at("upper_exponent").get<double>();
    report.per_arm_omega = j.at("per_arm_omega").get<std::vector<double>>();
    report.binding_arm = j.at("binding_arm").get<int>();
    report.context_constant_gaps = j.at("context_constant_gaps").get<bool>();
    return report;
}

}  // namespace

json result_to_json(const ExperimentResult& result) {
    json rows = json::array();
    for (const BudgetRow& row : result.rows) {
        rows.push_back(json{{"T", row.budget},
                            {"trials", row.n_trials},
                            {"misid", row.misidentified},
                            {"p_hat", row.p_hat},
                            {"se", row.se},
                            {"neg_log_p_over_T", optional_to_json(row.neg_log_p_over_t)}});
    }
    json diagnostics = json::array();
    for (const BudgetDiagnostics& diag : result.diagnostics) {
        diagnostics.push_back(diag_to_json(diag));
    }
    return json{{"version", result.version},
                {"config", result.config_echo},
                {"rates", rate_report_to_json(result.rates)},
                {"rows", rows},
                {"decay_fit", result.decay ? decay_to_json(*result.decay) : json(nullptr)},
                {"decay_fit_error", result.decay_error},
                {"diagnostics", diagnostics}};
}

ExperimentResult result_from_json(const json& j) {
    ExperimentResult result;
    result.version = j.at("version").get<std::string>();
    result.config_echo =
        j.at("config").get<std::map<std::string, std::string>>();
    result.rates = rate_report_from_json(j.at("rates"));
    for (const json& row : j.at("rows")) {
        BudgetRow out;
        out.budget = row.at("T").get<std::int64_t>();
        out.n_trials = row.at("trials").get<std::int64_t>();
        out.misidentified = row.at("misid").get<std::int64_t>();
        out.p_hat = row.at("p_hat").get<double>();
        out.se = row.at("se").get<double>();
        out.neg_log_p_over_t = optional_from_json(row.at("neg_log_p_over_T"));
        result.rows.push_back(out);
    }
    if (!j.at("decay_fit").is_null()) {
        result.decay = decay_from_json(j.at("decay_fit"));
    }
    result.decay_error = j.at("decay_fit_error").get<std::string>();
    for (const json& diag : j.at("diagnostics")) {
        result.diagnostics.push_back(diag_from_json(diag));
    }
    return result;
}

json allocation_to_json(const AllocationTable& table) {
    json per_arm = json::array();
    for (int a = 0; a < table.K; ++a) {
        json row = json::array();
        for (int x = 0; x < table.M; ++x) {
            row.push_back(table.at(a, x));
        }
        per_arm.push_back(row);
    }
    return json{{"arms", table.K}, {"contexts", table.M}, {"w", per_arm}};
}

json nuisance_snapshot_json(const NuisanceState& state) {
    json counts = json::array();
    json mu = json::array();
    json var = json::array();
    for (int a = 0; a < state.num_arms(); ++a) {
        json count_row = json::array();
        json mu_row = json::array();
        json var_row = json::array();
        for (int x = 0; x < state.num_contexts(); ++x) {
            count_row.push_back(state.count(a, x));
            mu_row.push_back(state.mu_hat(a, x));
            var_row.push_back(state.var_hat(a, x));
        }
        counts.push_back(count_row);
        mu.push_back(mu_row);
        var.push_back(var_row);
    }
    return json{{"count", counts}, {"mu_hat", mu}, {"var_hat", var}};
}

}  // namespace ctxbai
