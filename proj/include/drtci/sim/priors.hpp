#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "drtci/rng.hpp"

namespace drtci {

// One named sampling distribution from the simulator prior config.
// kinds: point{value}, normal{mean,sd}, truncated_normal{mean,sd,lo[,hi]},
//        truncated_lognormal{mu,sigma,lo,hi}, categorical{labels,weights}
struct Distribution {
    std::string name;
    std::string kind;
    std::map<std::string, double> params;
    std::vector<std::string> labels;   // categorical only
    std::vector<double> weights;       // categorical only

    double param(const std::string& key) const;
    double param_or(const std::string& key, double fallback) const;
    void validate() const;
    double sample(RngStream& rng) const;
    std::size_t sample_index(RngStream& rng) const;  // categorical only
};

// Versioned prior configuration for the tumour-growth simulator. The default
// values are pinned here and in config/sim_priors.json; tests assert against
// this file, so changing a prior is a schema-version event.
struct SimPriors {
    int version = 1;
    std::vector<Distribution> distributions;

    // Fixed constants of the growth and assignment model.
    double carrying_capacity_diameter_cm = 30.0;
    double alpha_beta_ratio = 10.0;      // beta_r = alpha_r / ratio
    double rho_alpha_corr = 0.87;        // growth rate correlates with radio sensitivity
    double chemo_dose = 5.0;
    double chemo_decay = 0.5;
    double radio_dose_gy = 2.0;
    int dbar_window_days = 15;
    double death_diameter_cm = 13.0;
    double recovery_volume_cm3 = 0.01;
    double sigmoid_intercept_cm = 6.5;   // delta_c = delta_r = death diameter / 2
    double type_sensitivity_log_step = 0.1;

    static SimPriors defaults();
    static SimPriors from_json(const std::string& text);
    static SimPriors load(const std::string& path);
    std::string to_json() const;

    bool has(const std::string& name) const;
    const Distribution& dist(const std::string& name) const;
    void validate() const;
};

}  // namespace drtci
