#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drtci/sim/tumor.hpp"

namespace drtci {

struct DatasetConfig {
    double gamma_c = 0.0;
    double gamma_r = 0.0;
    int tau = 1;
    int horizon = 60;
    std::size_t train_size = 10000;
    std::size_t val_size = 1000;
    std::size_t test_size = 1000;
    std::uint64_t seed = 1;
    bool chemo_literal_recurrence = false;
    int jobs = 1;
    SimPriors priors = SimPriors::defaults();

    void validate() const;
    SimConfig sim_config() const;
    // Canonical JSON of the semantic fields (excludes jobs); hashing this
    // string fingerprints the dataset.
    std::string fingerprint_string() const;
};

struct Dataset {
    DatasetConfig config;
    std::vector<PatientTrajectory> train;
    std::vector<PatientTrajectory> val;
    std::vector<PatientTrajectory> test;
};

// Generates all three splits from index-derived RNG streams. The test split
// carries encoder counterfactual annotations always, decoder annotations when
// tau >= 2. Identical output for identical (config, seed) regardless of jobs.
Dataset generate_dataset(const DatasetConfig& cfg);

std::string trajectory_to_jsonl(const PatientTrajectory& traj);
PatientTrajectory trajectory_from_jsonl(const std::string& line);

// Writes train/val/test.jsonl plus manifest.json into dir.
void write_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace drtci
