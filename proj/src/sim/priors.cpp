#include "drtci/sim/priors.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "drtci/common.hpp"

namespace drtci {

using nlohmann::json;

double Distribution::param(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end())
        throw ConfigError("distribution '" + name + "' is missing parameter '" + key + "'");
    return it->second;
}

double Distribution::param_or(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void Distribution::validate() const {
    if (kind == "point") {
        param("value");
    } else if (kind == "normal") {
        param("mean");
        if (param("sd") < 0.0) throw ConfigError("distribution '" + name + "': sd must be >= 0");
    } else if (kind == "truncated_normal") {
        param("mean");
        if (param("sd") < 0.0) throw ConfigError("distribution '" + name + "': sd must be >= 0");
        const double lo = param_or("lo", -std::numeric_limits<double>::infinity());
        const double hi = param_or("hi", std::numeric_limits<double>::infinity());
        if (lo > hi) throw ConfigError("distribution '" + name + "': lo > hi");
    } else if (kind == "truncated_lognormal") {
        param("mu");
        if (param("sigma") <= 0.0) throw ConfigError("distribution '" + name + "': sigma must be > 0");
        if (param("lo") <= 0.0 || param("hi") <= 0.0)
            throw ConfigError("distribution '" + name + "': bounds must be > 0");
        if (param("lo") > param("hi")) throw ConfigError("distribution '" + name + "': lo > hi");
    } else if (kind == "categorical") {
        if (labels.empty() || labels.size() != weights.size())
            throw ConfigError("distribution '" + name + "': labels/weights mismatch");
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw ConfigError("distribution '" + name + "': negative weight");
            total += w;
        }
        if (total <= 0.0) throw ConfigError("distribution '" + name + "': weights sum to zero");
    } else {
        throw ConfigError("distribution '" + name + "': unknown kind '" + kind + "'");
    }
}

double Distribution::sample(RngStream& rng) const {
    if (kind == "point") return param("value");
    if (kind == "normal") return rng.normal(param("mean"), param("sd"));
    if (kind == "truncated_normal") {
        const double lo = param_or("lo", -std::numeric_limits<double>::infinity());
        const double hi = param_or("hi", std::numeric_limits<double>::infinity());
        return rng.truncated_normal(param("mean"), param("sd"), lo, hi);
    }
    if (kind == "truncated_lognormal") {
        const double z = rng.truncated_normal(param("mu"), param("sigma"),
                                              std::log(param("lo")), std::log(param("hi")));
        return std::exp(z);
    }
    throw ConfigError("distribution '" + name + "' is not numeric-sampled (kind " + kind + ")");
}

std::size_t Distribution::sample_index(RngStream& rng) const {
    if (kind != "categorical")
        throw ConfigError("distribution '" + name + "' is not categorical");
    return rng.categorical(weights);
}

namespace {

Distribution make_numeric(std::string name, std::string kind,
                          std::initializer_list<std::pair<const char*, double>> ps) {
    Distribution d;
    d.name = std::move(name);
    d.kind = std::move(kind);
    for (const auto& [k, v] : ps) d.params[k] = v;
    return d;
}

Distribution make_categorical(std::string name, std::vector<std::string> labels,
                              std::vector<double> weights) {
    Distribution d;
    d.name = std::move(name);
    d.kind = "categorical";
    d.labels = std::move(labels);
    d.weights = std::move(weights);
    return d;
}

}  // namespace

SimPriors SimPriors::defaults() {
    SimPriors p;
    // Stage mix from lung-cancer stage observation counts; per-stage initial
    // diameters are lognormal with wide sigma, so the truncation bounds carry
    // most of the shape.
    p.distributions.push_back(make_categorical(
        "initial_stage", {"I", "II", "IIIA", "IIIB", "IV"}, {1432, 128, 1306, 7248, 12840}));
    p.distributions.push_back(make_numeric("initial_diameter_I", "truncated_lognormal",
                                           {{"mu", 1.72}, {"sigma", 4.70}, {"lo", 0.3}, {"hi", 5.0}}));
    p.distributions.push_back(make_numeric("initial_diameter_II", "truncated_lognormal",
                                           {{"mu", 1.96}, {"sigma", 1.63}, {"lo", 0.3}, {"hi", 13.0}}));
    p.distributions.push_back(make_numeric("initial_diameter_IIIA", "truncated_lognormal",
                                           {{"mu", 1.91}, {"sigma", 9.40}, {"lo", 0.3}, {"hi", 13.0}}));
    p.distributions.push_back(make_numeric("initial_diameter_IIIB", "truncated_lognormal",
                                           {{"mu", 2.76}, {"sigma", 6.87}, {"lo", 0.3}, {"hi", 13.0}}));
    p.distributions.push_back(make_numeric("initial_diameter_IV", "truncated_lognormal",
                                           {{"mu", 3.86}, {"sigma", 8.82}, {"lo", 0.3}, {"hi", 13.0}}));
    p.distributions.push_back(
        make_numeric("rho", "truncated_normal", {{"mean", 7.0e-5}, {"sd", 7.23e-3}, {"lo", 0.0}}));
    p.distributions.push_back(
        make_numeric("alpha_r", "truncated_normal", {{"mean", 0.0398}, {"sd", 0.168}, {"lo", 0.0}}));
    p.distributions.push_back(
        make_numeric("beta_c", "truncated_normal", {{"mean", 0.028}, {"sd", 0.0007}, {"lo", 0.0}}));
    p.distributions.push_back(make_numeric("noise", "normal", {{"mean", 0.0}, {"sd", 0.01}}));
    p.distributions.push_back(make_categorical("patient_type", {"1", "2", "3"}, {1, 1, 1}));
    return p;
}

bool SimPriors::has(const std::string& name) const {
    for (const auto& d : distributions)
        if (d.name == name) return true;
    return false;
}

const Distribution& SimPriors::dist(const std::string& name) const {
    for (const auto& d : distributions)
        if (d.name == name) return d;
    throw ConfigError("prior config has no distribution named '" + name + "'");
}

void SimPriors::validate() const {
    for (const auto& d : distributions) d.validate();
    for (const char* required : {"initial_stage", "rho", "alpha_r", "beta_c", "noise", "patient_type"})
        dist(required);
    if (!(death_diameter_cm > 0.0) || !(carrying_capacity_diameter_cm > 0.0))
        throw ConfigError("prior config: diameters must be positive");
    if (alpha_beta_ratio <= 0.0) throw ConfigError("prior config: alpha_beta_ratio must be > 0");
    if (rho_alpha_corr < -1.0 || rho_alpha_corr > 1.0)
        throw ConfigError("prior config: rho_alpha_corr outside [-1, 1]");
}

std::string SimPriors::to_json() const {
    json out;
    out["version"] = version;
    json dists = json::array();
    for (const auto& d : distributions) {
        json e;
        e["name"] = d.name;
        e["kind"] = d.kind;
        if (!d.params.empty()) e["params"] = d.params;
        if (!d.labels.empty()) {
            e["labels"] = d.labels;
            e["weights"] = d.weights;
        }
        dists.push_back(e);
    }
    out["distributions"] = dists;
    out["constants"] = {{"carrying_capacity_diameter_cm", carrying_capacity_diameter_cm},
                        {"alpha_beta_ratio", alpha_beta_ratio},
                        {"rho_alpha_corr", rho_alpha_corr},
                        {"chemo_dose", chemo_dose},
                        {"chemo_decay", chemo_decay},
                        {"radio_dose_gy", radio_dose_gy},
                        {"dbar_window_days", dbar_window_days},
                        {"death_diameter_cm", death_diameter_cm},
                        {"recovery_volume_cm3", recovery_volume_cm3},
                        {"sigmoid_intercept_cm", sigmoid_intercept_cm},
                        {"type_sensitivity_log_step", type_sensitivity_log_step}};
    return out.dump(2) + "\n";
}

SimPriors SimPriors::from_json(const std::string& text) {
    json in;
    try {
        in = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("prior config is not valid JSON: ") + e.what());
    }
    SimPriors p;
    p.distributions.clear();
    p.version = in.value("version", 1);
    for (const auto& e : in.at("distributions")) {
        Distribution d;
        d.name = e.at("name").get<std::string>();
        d.kind = e.at("kind").get<std::string>();
        if (e.contains("params"))
            d.params = e.at("params").get<std::map<std::string, double>>();
        if (e.contains("labels")) {
            d.labels = e.at("labels").get<std::vector<std::string>>();
            d.weights = e.at("weights").get<std::vector<double>>();
        }
        p.distributions.push_back(std::move(d));
    }
    if (in.contains("constants")) {
        const auto& c = in.at("constants");
        p.carrying_capacity_diameter_cm = c.value("carrying_capacity_diameter_cm", p.carrying_capacity_diameter_cm);
        p.alpha_beta_ratio = c.value("alpha_beta_ratio", p.alpha_beta_ratio);
        p.rho_alpha_corr = c.value("rho_alpha_corr", p.rho_alpha_corr);
        p.chemo_dose = c.value("chemo_dose", p.chemo_dose);
        p.chemo_decay = c.value("chemo_decay", p.chemo_decay);
        p.radio_dose_gy = c.value("radio_dose_gy", p.radio_dose_gy);
        p.dbar_window_days = c.value("dbar_window_days", p.dbar_window_days);
        p.death_diameter_cm = c.value("death_diameter_cm", p.death_diameter_cm);
        p.recovery_volume_cm3 = c.value("recovery_volume_cm3", p.recovery_volume_cm3);
        p.sigmoid_intercept_cm = c.value("sigmoid_intercept_cm", p.sigmoid_intercept_cm);
        p.type_sensitivity_log_step = c.value("type_sensitivity_log_step", p.type_sensitivity_log_step);
    }
    p.validate();
    return p;
}

SimPriors SimPriors::load(const std::string& path) { return from_json(read_file(path)); }

}  // namespace drtci
