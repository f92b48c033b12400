#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "drtci/rng.hpp"
#include "drtci/sim/priors.hpp"

namespace drtci {

inline constexpr int kTreatmentOptions = 4;

// Sphere geometry linking the diameter-based assignment policy to the
// volume state the dynamics evolve.
double diameter_from_volume(double volume_cm3);
double volume_from_diameter(double diameter_cm);

// Option index encodes (chemo, radio) as index = chemo + 2 * radio:
// 0 = none, 1 = chemo, 2 = radio, 3 = both.
struct TreatmentVector {
    int index = 0;

    bool chemo() const { return index == 1 || index == 3; }
    bool radio() const { return index == 2 || index == 3; }
    static TreatmentVector from_flags(bool chemo, bool radio) {
        return TreatmentVector{(chemo ? 1 : 0) + (radio ? 2 : 0)};
    }
    std::array<double, kTreatmentOptions> onehot() const {
        std::array<double, kTreatmentOptions> v{0, 0, 0, 0};
        v[static_cast<std::size_t>(index)] = 1.0;
        return v;
    }
    static TreatmentVector from_onehot(const std::vector<double>& v);
};

struct PatientParams {
    int stage = 0;         // index into the stage labels of the prior config
    int patient_type = 0;  // 0-based index into the type labels
    double v0 = 0.0;       // initial tumour volume, cm^3
    double rho = 0.0;      // growth rate, 1/day
    double kappa = 0.0;    // carrying capacity, cm^3
    double beta_c = 0.0;   // chemo effect per unit concentration
    double alpha_r = 0.0;  // radio linear effect, 1/Gy
    double beta_r = 0.0;   // radio quadratic effect, 1/Gy^2
    double noise_sd = 0.0;

    void validate() const;
};

enum class Termination { death, recovery, horizon };
std::string to_string(Termination t);
Termination termination_from_string(const std::string& s);

struct TrajectoryStep {
    int t = 0;               // 1-based day index
    double volume = 0.0;     // V(t)
    double chemo_conc = 0.0; // concentration present at observation, before day-t dosing
    TreatmentVector treatment;
    double outcome = 0.0;    // V(t+1)
};

// Per timestep: V(t+1) under each of the K options, same noise draw.
using EncoderCf = std::array<double, kTreatmentOptions>;

struct DecoderCfSequence {
    bool chemo_arm = true;  // true: chemo at `offset`, false: radio at `offset`
    int offset = 0;         // 0..tau-1
    std::vector<double> outcomes;  // V(t+1) .. V(t+tau)
};

struct DecoderCfTimestep {
    int t = 0;
    std::vector<DecoderCfSequence> sequences;  // exactly 2*tau entries
};

struct PatientTrajectory {
    int id = 0;
    PatientParams params;
    std::vector<TrajectoryStep> steps;
    Termination termination = Termination::horizon;
    std::vector<EncoderCf> cf_encoder;          // parallel to steps; test split only
    std::vector<DecoderCfTimestep> cf_decoder;  // test split only, tau >= 2
    std::vector<double> noise;                  // e(t) for t = 1..horizon, kept for annotation

    int length() const { return static_cast<int>(steps.size()); }
};

struct SimConfig {
    double gamma_c = 0.0;
    double gamma_r = 0.0;
    int horizon = 60;
    bool chemo_literal_recurrence = false;  // C(t) = dose + C(t-1)/2 every step when set
    SimPriors priors = SimPriors::defaults();
    // Test hooks: force the assignment probabilities instead of the sigmoid policy.
    std::optional<double> force_pc;
    std::optional<double> force_pr;
};

PatientParams sample_patient_params(RngStream& rng, const SimPriors& priors);

// V(t+1) = (1 + rho*log(kappa/V) - beta_c*C - (alpha_r*d + beta_r*d^2) + e) * V, floored at 0.
double step_volume(double v_t, double conc, double dose_gy, double noise, const PatientParams& p);

double update_chemo_concentration(double c_prev, bool chemo_applied, const SimConfig& cfg);

TreatmentVector assign_treatment(double d_bar_cm, double gamma_c, double gamma_r, RngStream& rng,
                                 const SimConfig* hooks = nullptr);

// Mean diameter over the most recent `window` entries of the diameter history.
double mean_recent_diameter(const std::vector<double>& diameters, int window);

PatientTrajectory simulate_trajectory(int id, const PatientParams& params, const SimConfig& cfg,
                                      RngStream& rng);

// One-step outcomes under all K options at every recorded timestep, reusing
// the factual noise draw. The factual option's entry equals the factual outcome.
void annotate_encoder_cf(PatientTrajectory& traj, const SimConfig& cfg);

// 2*tau sequences per eligible timestep t (t + tau - 1 <= T): tau sequences
// giving chemotherapy at exactly one offset in 0..tau-1 and nothing else, and
// tau sequences doing the same with radiotherapy. Factual noise draws are
// reused at matching timesteps.
void annotate_decoder_cf(PatientTrajectory& traj, int tau, const SimConfig& cfg);

}  // namespace drtci
