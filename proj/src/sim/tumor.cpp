#include "drtci/sim/tumor.hpp"

#include <algorithm>
#include <cmath>

namespace drtci {

namespace {
constexpr double kPi = 3.14159265358979323846;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

double diameter_from_volume(double volume_cm3) {
    if (volume_cm3 < 0.0) throw ContractViolation("diameter_from_volume: volume must be >= 0");
    return 2.0 * std::cbrt(volume_cm3 * 3.0 / (4.0 * kPi));
}

double volume_from_diameter(double diameter_cm) {
    if (diameter_cm < 0.0) throw ContractViolation("volume_from_diameter: diameter must be >= 0");
    const double r = diameter_cm / 2.0;
    return 4.0 / 3.0 * kPi * r * r * r;
}

TreatmentVector TreatmentVector::from_onehot(const std::vector<double>& v) {
    if (v.size() != kTreatmentOptions)
        throw ContractViolation("treatment one-hot must have length 4");
    int idx = -1;
    for (int k = 0; k < kTreatmentOptions; ++k) {
        if (v[static_cast<std::size_t>(k)] == 1.0) {
            if (idx >= 0) throw ContractViolation("treatment one-hot has multiple ones");
            idx = k;
        } else if (v[static_cast<std::size_t>(k)] != 0.0) {
            throw ContractViolation("treatment one-hot entries must be 0 or 1");
        }
    }
    if (idx < 0) throw ContractViolation("treatment one-hot has no one");
    return TreatmentVector{idx};
}

void PatientParams::validate() const {
    if (!(v0 > 0.0)) throw ConfigError("patient params: V0 must be > 0");
    if (!(kappa > v0)) throw ConfigError("patient params: kappa must exceed V0");
    if (rho < 0.0 || beta_c < 0.0 || alpha_r < 0.0 || beta_r < 0.0)
        throw ConfigError("patient params: rates must be >= 0");
    if (noise_sd < 0.0) throw ConfigError("patient params: noise sd must be >= 0");
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::death: return "death";
        case Termination::recovery: return "recovery";
        case Termination::horizon: return "horizon";
    }
    return "horizon";
}

Termination termination_from_string(const std::string& s) {
    if (s == "death") return Termination::death;
    if (s == "recovery") return Termination::recovery;
    if (s == "horizon") return Termination::horizon;
    throw ConfigError("unknown termination: " + s);
}

PatientParams sample_patient_params(RngStream& rng, const SimPriors& priors) {
    priors.validate();
    PatientParams p;
    const auto& stage_dist = priors.dist("initial_stage");
    p.stage = static_cast<int>(stage_dist.sample_index(rng));
    p.patient_type = static_cast<int>(priors.dist("patient_type").sample_index(rng));

    if (priors.has("v0")) {
        p.v0 = priors.dist("v0").sample(rng);
    } else {
        const std::string& label = stage_dist.labels[static_cast<std::size_t>(p.stage)];
        const double diam = priors.dist("initial_diameter_" + label).sample(rng);
        p.v0 = volume_from_diameter(diam);
    }

    p.kappa = priors.has("kappa") ? priors.dist("kappa").sample(rng)
                                  : volume_from_diameter(priors.carrying_capacity_diameter_cm);

    const auto& alpha_dist = priors.dist("alpha_r");
    const auto& rho_dist = priors.dist("rho");
    const double corr = priors.rho_alpha_corr;
    const bool jointly = corr != 0.0 && alpha_dist.kind == "truncated_normal" &&
                         rho_dist.kind == "truncated_normal";
    if (jointly) {
        // Correlated pair via a shared standard-normal component, rejected
        // jointly until both truncation bounds hold.
        const double ma = alpha_dist.param("mean"), sa = alpha_dist.param("sd");
        const double mr = rho_dist.param("mean"), sr = rho_dist.param("sd");
        const double alo = alpha_dist.param_or("lo", -1e300), ahi = alpha_dist.param_or("hi", 1e300);
        const double rlo = rho_dist.param_or("lo", -1e300), rhi = rho_dist.param_or("hi", 1e300);
        const double tail = std::sqrt(std::max(0.0, 1.0 - corr * corr));
        bool ok = false;
        for (int i = 0; i < 4096 && !ok; ++i) {
            const double z1 = rng.normal();
            const double z2 = rng.normal();
            const double a = ma + sa * z1;
            const double r = mr + sr * (corr * z1 + tail * z2);
            if (a >= alo && a <= ahi && r >= rlo && r <= rhi) {
                p.alpha_r = a;
                p.rho = r;
                ok = true;
            }
        }
        if (!ok) throw ConfigError("patient params: correlated (alpha_r, rho) rejection failed");
    } else {
        p.alpha_r = alpha_dist.sample(rng);
        p.rho = rho_dist.sample(rng);
    }

    p.beta_c = priors.dist("beta_c").sample(rng);
    p.beta_r = priors.has("beta_r") ? priors.dist("beta_r").sample(rng)
                                    : p.alpha_r / priors.alpha_beta_ratio;

    // Patient type tilts treatment sensitivity: higher types respond better
    // to chemo, lower types to radio.
    const int n_types = static_cast<int>(priors.dist("patient_type").labels.size());
    const double centered = p.patient_type - (n_types - 1) / 2.0;
    const double s = priors.type_sensitivity_log_step;
    if (s != 0.0) {
        p.beta_c *= std::exp(s * centered);
        p.alpha_r *= std::exp(-s * centered);
        p.beta_r *= std::exp(-s * centered);
    }

    const auto& noise_dist = priors.dist("noise");
    p.noise_sd = noise_dist.kind == "point" ? noise_dist.param("value") : noise_dist.param("sd");

    p.validate();
    return p;
}

double step_volume(double v_t, double conc, double dose_gy, double noise, const PatientParams& p) {
    if (!(v_t > 0.0)) throw ContractViolation("step_volume: V_t must be > 0");
    const double factor = 1.0 + p.rho * std::log(p.kappa / v_t) - p.beta_c * conc -
                          (p.alpha_r * dose_gy + p.beta_r * dose_gy * dose_gy) + noise;
    return std::max(0.0, factor * v_t);
}

double update_chemo_concentration(double c_prev, bool chemo_applied, const SimConfig& cfg) {
    if (c_prev < 0.0) throw ContractViolation("update_chemo_concentration: C_prev must be >= 0");
    const double decayed = c_prev * cfg.priors.chemo_decay;
    if (cfg.chemo_literal_recurrence) return cfg.priors.chemo_dose + decayed;
    return decayed + (chemo_applied ? cfg.priors.chemo_dose : 0.0);
}

TreatmentVector assign_treatment(double d_bar_cm, double gamma_c, double gamma_r, RngStream& rng,
                                 const SimConfig* hooks) {
    if (d_bar_cm < 0.0) throw ContractViolation("assign_treatment: mean diameter must be >= 0");
    static const SimPriors default_priors = SimPriors::defaults();
    const SimPriors& pri = hooks ? hooks->priors : default_priors;
    const double d_max = pri.death_diameter_cm;
    const double p_c = (hooks && hooks->force_pc) ? *hooks->force_pc
                                                  : sigmoid(gamma_c / d_max * (d_bar_cm - pri.sigmoid_intercept_cm));
    const double p_r = (hooks && hooks->force_pr) ? *hooks->force_pr
                                                  : sigmoid(gamma_r / d_max * (d_bar_cm - pri.sigmoid_intercept_cm));
    const bool chemo = rng.bernoulli(p_c);
    const bool radio = rng.bernoulli(p_r);
    return TreatmentVector::from_flags(chemo, radio);
}

double mean_recent_diameter(const std::vector<double>& diameters, int window) {
    if (diameters.empty()) throw ContractViolation("mean_recent_diameter: empty history");
    const std::size_t n = std::min<std::size_t>(diameters.size(), static_cast<std::size_t>(window));
    double total = 0.0;
    for (std::size_t i = diameters.size() - n; i < diameters.size(); ++i) total += diameters[i];
    return total / static_cast<double>(n);
}

PatientTrajectory simulate_trajectory(int id, const PatientParams& params, const SimConfig& cfg,
                                      RngStream& rng) {
    params.validate();
    PatientTrajectory traj;
    traj.id = id;
    traj.params = params;
    traj.termination = Termination::horizon;

    // Noise for the full horizon up front so counterfactual simulations can
    // reuse the factual draws at matching timesteps.
    traj.noise.resize(static_cast<std::size_t>(cfg.horizon));
    for (int t = 0; t < cfg.horizon; ++t) traj.noise[static_cast<std::size_t>(t)] = params.noise_sd * rng.normal();

    const double death_volume = volume_from_diameter(cfg.priors.death_diameter_cm);
    double volume = params.v0;
    double conc = 0.0;  // chemo concentration entering day 1
    std::vector<double> diameters;
    diameters.reserve(static_cast<std::size_t>(cfg.horizon));

    for (int t = 1; t <= cfg.horizon; ++t) {
        diameters.push_back(diameter_from_volume(volume));
        const double d_bar = mean_recent_diameter(diameters, cfg.priors.dbar_window_days);
        const TreatmentVector a = assign_treatment(d_bar, cfg.gamma_c, cfg.gamma_r, rng, &cfg);

        TrajectoryStep step;
        step.t = t;
        step.volume = volume;
        step.chemo_conc = conc;
        step.treatment = a;

        conc = update_chemo_concentration(conc, a.chemo(), cfg);
        const double dose = a.radio() ? cfg.priors.radio_dose_gy : 0.0;
        const double next = step_volume(volume, conc, dose, traj.noise[static_cast<std::size_t>(t - 1)], params);
        step.outcome = next;
        traj.steps.push_back(step);

        if (next >= death_volume) {
            traj.termination = Termination::death;
            break;
        }
        if (next <= cfg.priors.recovery_volume_cm3) {
            traj.termination = Termination::recovery;
            break;
        }
        volume = next;
    }
    return traj;
}

namespace {

// Forward-simulates `count` steps from (volume, conc) at trajectory step
// index `start` (0-based), applying per-offset treatments from `plan`.
// A volume at or below zero is absorbing.
std::vector<double> rollout_counterfactual(const PatientTrajectory& traj, const SimConfig& cfg,
                                           std::size_t start, int count,
                                           const std::vector<TreatmentVector>& plan) {
    const TrajectoryStep& s0 = traj.steps[start];
    double volume = s0.volume;
    double conc = s0.chemo_conc;
    std::vector<double> outcomes;
    outcomes.reserve(static_cast<std::size_t>(count));
    for (int m = 0; m < count; ++m) {
        const TreatmentVector a = plan[static_cast<std::size_t>(m)];
        conc = update_chemo_concentration(conc, a.chemo(), cfg);
        const double dose = a.radio() ? cfg.priors.radio_dose_gy : 0.0;
        const double e = traj.noise[start + static_cast<std::size_t>(m)];
        volume = volume > 0.0 ? step_volume(volume, conc, dose, e, traj.params) : 0.0;
        outcomes.push_back(volume);
    }
    return outcomes;
}

}  // namespace

void annotate_encoder_cf(PatientTrajectory& traj, const SimConfig& cfg) {
    traj.cf_encoder.clear();
    traj.cf_encoder.reserve(traj.steps.size());
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
        EncoderCf cf{};
        // The factual option recomputes through the identical operations, so
        // its entry matches the recorded outcome bit-exactly.
        for (int k = 0; k < kTreatmentOptions; ++k) {
            const std::vector<TreatmentVector> plan{TreatmentVector{k}};
            cf[static_cast<std::size_t>(k)] = rollout_counterfactual(traj, cfg, i, 1, plan)[0];
        }
        traj.cf_encoder.push_back(cf);
    }
}

void annotate_decoder_cf(PatientTrajectory& traj, int tau, const SimConfig& cfg) {
    if (tau < 2) throw ContractViolation("annotate_decoder_cf: tau must be >= 2");
    traj.cf_decoder.clear();
    const int T = traj.length();
    for (int t = 1; t + tau - 1 <= T; ++t) {
        DecoderCfTimestep entry;
        entry.t = t;
        for (int arm = 0; arm < 2; ++arm) {
            const bool chemo_arm = arm == 0;
            for (int offset = 0; offset < tau; ++offset) {
                std::vector<TreatmentVector> plan(static_cast<std::size_t>(tau), TreatmentVector{0});
                plan[static_cast<std::size_t>(offset)] =
                    TreatmentVector::from_flags(chemo_arm, !chemo_arm);
                DecoderCfSequence seq;
                seq.chemo_arm = chemo_arm;
                seq.offset = offset;
                seq.outcomes =
                    rollout_counterfactual(traj, cfg, static_cast<std::size_t>(t - 1), tau, plan);
                entry.sequences.push_back(std::move(seq));
            }
        }
        traj.cf_decoder.push_back(std::move(entry));
    }
}

}  // namespace drtci
