#include "drtci/sim/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "drtci/common.hpp"

namespace drtci {

using nlohmann::json;

void DatasetConfig::validate() const {
    if (gamma_c < 0.0 || gamma_c > 10.0 || gamma_r < 0.0 || gamma_r > 10.0)
        throw ConfigError("gamma_c and gamma_r must lie in [0, 10]");
    if (tau < 1) throw ConfigError("tau must be >= 1");
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    if (train_size == 0 || val_size == 0 || test_size == 0)
        throw ConfigError("split sizes must be positive");
    priors.validate();
}

SimConfig DatasetConfig::sim_config() const {
    SimConfig sc;
    sc.gamma_c = gamma_c;
    sc.gamma_r = gamma_r;
    sc.horizon = horizon;
    sc.chemo_literal_recurrence = chemo_literal_recurrence;
    sc.priors = priors;
    return sc;
}

std::string DatasetConfig::fingerprint_string() const {
    json j;
    j["gamma_c"] = gamma_c;
    j["gamma_r"] = gamma_r;
    j["tau"] = tau;
    j["horizon"] = horizon;
    j["train_size"] = train_size;
    j["val_size"] = val_size;
    j["test_size"] = test_size;
    j["seed"] = seed;
    j["chemo_literal_recurrence"] = chemo_literal_recurrence;
    j["priors"] = fingerprint(priors.to_json());
    return j.dump();
}

namespace {

enum SplitId : std::uint64_t { kTrain = 0, kVal = 1, kTest = 2 };

std::vector<PatientTrajectory> generate_split(const DatasetConfig& cfg, SplitId split,
                                              std::size_t count, bool annotate) {
    const SimConfig sim = cfg.sim_config();
    std::vector<PatientTrajectory> out(count);
    const int jobs = std::max(1, cfg.jobs);

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            RngStream rng = RngStream::derive(cfg.seed, split, i);
            const PatientParams params = sample_patient_params(rng, cfg.priors);
            PatientTrajectory traj = simulate_trajectory(static_cast<int>(i), params, sim, rng);
            if (annotate) {
                annotate_encoder_cf(traj, sim);
                if (cfg.tau >= 2) annotate_decoder_cf(traj, cfg.tau, sim);
            }
            out[i] = std::move(traj);
        }
    };

    if (jobs == 1 || count < 2) {
        work(0, count);
    } else {
        std::vector<std::thread> threads;
        const std::size_t chunk = (count + static_cast<std::size_t>(jobs) - 1) / static_cast<std::size_t>(jobs);
        for (int j = 0; j < jobs; ++j) {
            const std::size_t b = static_cast<std::size_t>(j) * chunk;
            const std::size_t e = std::min(count, b + chunk);
            if (b >= e) break;
            threads.emplace_back(work, b, e);
        }
        for (auto& t : threads) t.join();
    }
    return out;
}

}  // namespace

Dataset generate_dataset(const DatasetConfig& cfg) {
    cfg.validate();
    Dataset ds;
    ds.config = cfg;
    ds.train = generate_split(cfg, kTrain, cfg.train_size, false);
    ds.val = generate_split(cfg, kVal, cfg.val_size, false);
    ds.test = generate_split(cfg, kTest, cfg.test_size, true);
    return ds;
}

std::string trajectory_to_jsonl(const PatientTrajectory& traj) {
    json j;
    j["id"] = traj.id;
    j["static"] = {{"stage", traj.params.stage}, {"patient_type", traj.params.patient_type}};
    json steps = json::array();
    for (const auto& s : traj.steps) {
        json e;
        e["t"] = s.t;
        e["covariates"] = {s.volume, s.chemo_conc};
        json onehot = json::array();
        for (double v : s.treatment.onehot()) onehot.push_back(v);
        e["treatment_onehot"] = onehot;
        e["outcome"] = s.outcome;
        steps.push_back(std::move(e));
    }
    j["steps"] = steps;
    if (!traj.cf_encoder.empty()) {
        json cf = json::array();
        for (const auto& a : traj.cf_encoder) cf.push_back({a[0], a[1], a[2], a[3]});
        j["cf_encoder"] = cf;
    } else {
        j["cf_encoder"] = nullptr;
    }
    if (!traj.cf_decoder.empty()) {
        json cf = json::array();
        for (const auto& ts : traj.cf_decoder) {
            json e;
            e["t"] = ts.t;
            json seqs = json::array();
            for (const auto& s : ts.sequences) {
                seqs.push_back({{"kind", s.chemo_arm ? "chemo" : "radio"},
                                {"offset", s.offset},
                                {"outcomes", s.outcomes}});
            }
            e["sequences"] = seqs;
            cf.push_back(std::move(e));
        }
        j["cf_decoder"] = cf;
    } else {
        j["cf_decoder"] = nullptr;
    }
    j["termination"] = to_string(traj.termination);
    return j.dump();
}

PatientTrajectory trajectory_from_jsonl(const std::string& line) {
    json j = json::parse(line);
    PatientTrajectory traj;
    traj.id = j.at("id").get<int>();
    traj.params.stage = j.at("static").at("stage").get<int>();
    traj.params.patient_type = j.at("static").at("patient_type").get<int>();
    for (const auto& e : j.at("steps")) {
        TrajectoryStep s;
        s.t = e.at("t").get<int>();
        const auto cov = e.at("covariates").get<std::vector<double>>();
        if (cov.size() != 2) throw RuntimeFailure("dataset step has malformed covariates");
        s.volume = cov[0];
        s.chemo_conc = cov[1];
        s.treatment = TreatmentVector::from_onehot(e.at("treatment_onehot").get<std::vector<double>>());
        s.outcome = e.at("outcome").get<double>();
        traj.steps.push_back(s);
    }
    if (j.contains("cf_encoder") && !j.at("cf_encoder").is_null()) {
        for (const auto& e : j.at("cf_encoder")) {
            const auto v = e.get<std::vector<double>>();
            if (v.size() != kTreatmentOptions) throw RuntimeFailure("malformed cf_encoder row");
            EncoderCf cf{v[0], v[1], v[2], v[3]};
            traj.cf_encoder.push_back(cf);
        }
    }
    if (j.contains("cf_decoder") && !j.at("cf_decoder").is_null()) {
        for (const auto& e : j.at("cf_decoder")) {
            DecoderCfTimestep ts;
            ts.t = e.at("t").get<int>();
            for (const auto& sq : e.at("sequences")) {
                DecoderCfSequence s;
                s.chemo_arm = sq.at("kind").get<std::string>() == "chemo";
                s.offset = sq.at("offset").get<int>();
                s.outcomes = sq.at("outcomes").get<std::vector<double>>();
                ts.sequences.push_back(std::move(s));
            }
            traj.cf_decoder.push_back(std::move(ts));
        }
    }
    traj.termination = termination_from_string(j.at("termination").get<std::string>());
    return traj;
}

namespace {

std::string split_to_string(const std::vector<PatientTrajectory>& split) {
    std::ostringstream out;
    for (const auto& traj : split) out << trajectory_to_jsonl(traj) << "\n";
    return out.str();
}

std::vector<PatientTrajectory> split_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RuntimeFailure("cannot open dataset split: " + path);
    std::vector<PatientTrajectory> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(trajectory_from_jsonl(line));
    }
    return out;
}

}  // namespace

void write_dataset(const Dataset& ds, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::string train_s = split_to_string(ds.train);
    const std::string val_s = split_to_string(ds.val);
    const std::string test_s = split_to_string(ds.test);
    write_file(dir + "/train.jsonl", train_s);
    write_file(dir + "/val.jsonl", val_s);
    write_file(dir + "/test.jsonl", test_s);

    json manifest;
    manifest["kind"] = "drtci-dataset";
    manifest["format_version"] = 1;
    manifest["tool_version"] = kToolVersion;
    manifest["config"] = json::parse(ds.config.fingerprint_string());
    manifest["config_fingerprint"] = fingerprint(ds.config.fingerprint_string());
    manifest["priors"] = json::parse(ds.config.priors.to_json());
    manifest["splits"] = {
        {"train", {{"file", "train.jsonl"}, {"count", ds.train.size()}, {"hash", fingerprint(train_s)}}},
        {"val", {{"file", "val.jsonl"}, {"count", ds.val.size()}, {"hash", fingerprint(val_s)}}},
        {"test", {{"file", "test.jsonl"}, {"count", ds.test.size()}, {"hash", fingerprint(test_s)}}}};
    write_file(dir + "/manifest.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const std::string& dir) {
    const std::string manifest_path = dir + "/manifest.json";
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw RuntimeFailure("malformed dataset manifest at " + manifest_path + ": " + e.what());
    }
    Dataset ds;
    const auto& c = manifest.at("config");
    ds.config.gamma_c = c.at("gamma_c").get<double>();
    ds.config.gamma_r = c.at("gamma_r").get<double>();
    ds.config.tau = c.at("tau").get<int>();
    ds.config.horizon = c.at("horizon").get<int>();
    ds.config.train_size = c.at("train_size").get<std::size_t>();
    ds.config.val_size = c.at("val_size").get<std::size_t>();
    ds.config.test_size = c.at("test_size").get<std::size_t>();
    ds.config.seed = c.at("seed").get<std::uint64_t>();
    ds.config.chemo_literal_recurrence = c.at("chemo_literal_recurrence").get<bool>();
    ds.config.priors = SimPriors::from_json(manifest.at("priors").dump());
    ds.train = split_from_file(dir + "/train.jsonl");
    ds.val = split_from_file(dir + "/val.jsonl");
    ds.test = split_from_file(dir + "/test.jsonl");
    return ds;
}

}  // namespace drtci
