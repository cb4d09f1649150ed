#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinid/dynamics.hpp"

namespace spinid {

struct SpectralOptions {
    // Exact data: singular values below sv_rel_tol * sigma_max are noise.
    double sv_rel_tol = 1e-8;
    // Shot data: threshold = noise_sv_factor * median singular value instead.
    bool noise_mode = false;
    double noise_sv_factor = 6.0;
    // Optional hard cap on the model order (0 = no cap beyond pencil size).
    int max_model_order = 0;
    // Ratio sigma_kept/sigma_dropped below this is an ambiguous cut.
    double rank_gap_min = 10.0;
    // |omega*dt| beyond (1 - band_edge_margin)*pi suggests aliasing.
    double band_edge_margin = 0.02;
    // Reject amplitude fits through a Vandermonde worse conditioned than this.
    double condition_cap = 1e12;
    // Throw on rank ambiguity / band-edge hits instead of warning.
    bool strict = true;
};

struct FrequencyEstimate {
    std::vector<double> frequencies;  // ascending, principal band (-pi/dt, pi/dt]
    int model_order = 0;
    Eigen::VectorXd singular_values;  // of the stacked Hankel matrix
    double rank_gap = 0.0;            // sigma at cut / sigma after cut (inf if none dropped)
    double dt = 0.0;
    std::vector<std::string> warnings;
};

// Per-signal least-squares amplitudes against a fixed frequency list.
struct SignalAmplitudes {
    int site = -1;
    int initial_site = -1;
    std::vector<std::complex<double>> amplitudes;  // aligned with the frequency list
    double residual_rel = 0.0;                     // ||fit - data|| / ||data||
};

// One experiment family: joint frequencies plus amplitudes for every
// observed site, all on the family's shared time grid.
struct FamilyLines {
    int initial_site = -1;
    std::vector<double> frequencies;
    std::vector<SignalAmplitudes> amplitudes;
};

struct AssembleOptions {
    // Two lines merge when they differ by max(merge_abs, merge_rel * spread).
    double merge_abs = 0.0;
    double merge_rel = 1e-6;
    // A line whose diagonal amplitude is below dark_floor on every gateway
    // site contradicts the no-dark-line guarantee for an infecting gateway.
    double dark_floor = 1e-9;
    // Imaginary parts above imag_tol * amplitude scale flag a broken model.
    double imag_tol = 1e-6;
};

struct EigendataDiagnostics {
    double max_imag_residue = 0.0;       // largest |Im a| / amplitude scale seen
    double max_rank1_inconsistency = 0.0;  // worst |a_{n,n0} - W_n W_n0|
    double max_amplitude_residual = 0.0;   // worst per-signal fit residual
    int line_count = 0;
    std::vector<std::string> warnings;
};

// Assembled spectral data on the gateway: frequencies are relative to the
// ground level, components are the real eigenvector entries on gateway rows
// with one sign fixed per line (reference row positive).
struct EigendataEstimate {
    std::vector<int> gateway;         // ascending
    std::vector<double> frequencies;  // ascending
    Eigen::MatrixXd components;       // |gateway| x lines, rows follow `gateway`
    EigendataDiagnostics diagnostics;
};

// Matrix pencil over the stacked per-signal Hankel matrices. All signals
// must share one uniform time grid; the pencil length is half the sample
// count. Frequencies come back sorted ascending.
FrequencyEstimate estimate_frequencies(const std::vector<Signal>& signals,
                                       const SpectralOptions& options = {});

// Least-squares fit of sum_j a_j exp(-i w_j t) to each signal on its grid,
// sharing one Vandermonde factorization across signals.
std::vector<SignalAmplitudes> estimate_amplitudes(const std::vector<Signal>& signals,
                                                  const std::vector<double>& frequencies,
                                                  const SpectralOptions& options = {});

// Condition number of the design matrix the amplitude fit solves against.
double design_condition(const std::vector<double>& times,
                        const std::vector<double>& frequencies);

// Merge per-family lines into one frequency list, pick a reference site per
// line (largest diagonal amplitude), recover gateway eigenvector entries
// from amplitude ratios, and cross-validate every amplitude against the
// rank-1 model a_{n,n0} = W_n W_n0.
EigendataEstimate assemble_eigendata(const std::vector<FamilyLines>& families,
                                     const std::vector<int>& gateway,
                                     const AssembleOptions& options = {});

}  // namespace spinid
