#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spinid/degeneracy.hpp"
#include "spinid/dynamics.hpp"
#include "spinid/io.hpp"
#include "spinid/model.hpp"
#include "spinid/reconstruct.hpp"
#include "spinid/spectral.hpp"

namespace spinid {

enum class DataMode { exact_eigendata, exact_signal, shot };
DataMode data_mode_from_string(const std::string& s);
std::string to_string(DataMode m);

enum class LiftPolicy { none, auto_random, constructive };
LiftPolicy lift_policy_from_string(const std::string& s);
std::string to_string(LiftPolicy p);

struct GeneratorSpec {
    LatticeKind kind = LatticeKind::chain;
    std::vector<int> dims{8};
    double coupling_lo = -2.0;  // both bounds strictly negative
    double coupling_hi = -0.5;
    double field_lo = -1.0;
    double field_hi = 1.0;
    double delta = 0.0;
    std::uint64_t seed = 1;
};

// Uniform couplings/fields drawn in edge order then node order; the same
// seed always yields the same network.
SpinNetwork generate_network(const GeneratorSpec& spec, std::uint64_t seed);

// Gateway rules for the standard lattices: "end" (chain), "pair" (cycle),
// "side" (grid2d, the x=0 column), "face" (grid3d, the x=0 face), "all".
std::vector<int> named_gateway(const std::string& name, LatticeKind kind,
                               const std::vector<int>& dims);

// Per-knob overrides for the stage tolerances; entries <= 0 keep the
// mode-dependent defaults.
struct ToleranceOverrides {
    double sv_rel_tol = 0.0;
    double noise_sv_factor = 0.0;
    double merge_abs = 0.0;
    double merge_rel = 0.0;
    double dark_floor = 0.0;
    double imag_tol = 0.0;
    double nonedge_rel = 0.0;
    double row_norm_tol = 0.0;
    double zero_pivot_rel = 0.0;
    double group_tol = 0.0;
};

struct RunConfig {
    std::string network_path;  // non-empty: load; empty: generate
    GeneratorSpec generator;

    std::vector<int> gateway;  // explicit 0-based list wins
    std::string gateway_name;  // else a named rule; else the file's gateway

    DataMode mode = DataMode::exact_signal;
    long shots = 10000;
    std::uint64_t shot_seed = 1;
    double oversample = 2.0;
    int samples_per_frequency = 8;

    LiftPolicy lift_policy = LiftPolicy::none;
    std::uint64_t lift_seed = 1;
    double lift_strength = 0.0;  // random lift; <= 0 picks a safe default

    ToleranceOverrides tol;
};

RunConfig run_config_from_json(const Json& j);
Json run_config_to_json(const RunConfig& config);

struct ErrorTable {
    std::vector<double> edge_abs;  // per topology edge, couplings c
    std::vector<double> edge_rel;
    std::vector<double> node_abs;  // fields b
    std::vector<double> node_rel;
    double max_coupling_abs = 0.0;
    double mean_coupling_abs = 0.0;
    double max_coupling_rel = 0.0;
    double max_field_abs = 0.0;
    double mean_field_abs = 0.0;
    double ground_energy_abs = 0.0;
    double max_energy_abs = 0.0;  // vs the spectrum the data came from
};

ErrorTable compare_networks(const SpinNetwork& truth, const ReconstructionResult& result);

struct StageTimings {
    double build_ms = 0.0;
    double lift_ms = 0.0;
    double simulate_ms = 0.0;
    double spectral_ms = 0.0;
    double reconstruct_ms = 0.0;
    double total_ms = 0.0;
};

struct Report {
    RunConfig config;
    SpinNetwork truth;
    std::vector<int> gateway;
    ForcingOutcome forcing;
    std::vector<DegenerateGroup> degeneracies;  // of the unperturbed matrix
    bool lifted = false;
    LiftOutcome lift;            // meaningful when lifted
    TomographyDataset dataset;   // signal modes only
    FrequencyEstimate spectral;  // signal modes only
    double design_cond = 0.0;
    EigendataEstimate eigendata;
    Json fft_view;  // coarse spectrum diagnostic, signal modes only
    ReconstructionResult result;
    ErrorTable errors;
    StageTimings timings;
    std::vector<std::string> notes;
};

// The whole experiment: resolve the truth network and gateway, fail fast on
// a non-infecting gateway, lift degeneracies per policy, produce data for
// the configured mode, estimate, reconstruct (subtracting any applied lift
// block), and compare against truth. Deterministic given the seeds.
Report run_pipeline(const RunConfig& config);

Json report_to_json(const Report& report, bool include_timings = true);

}  // namespace spinid
