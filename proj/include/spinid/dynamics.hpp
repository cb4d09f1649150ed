#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "spinid/graph.hpp"
#include "spinid/model.hpp"

namespace spinid {

// One experiment family: prepare (|vac> + |n0>)/sqrt(2), evolve, read out the
// transverse spin components on each observed gateway site at the sample
// times. shots == 0 means exact expectation values.
struct ExperimentConfig {
    int initial_site = 0;
    std::vector<int> observed_sites;
    std::vector<double> sample_times;  // nonnegative, strictly increasing
    long shots = 0;                    // 0 = exact
    std::uint64_t rng_seed = 0;
};

// Time trace of s_n(t) = e^{i E0 t} <n|U(t)|n0>. The measured single-spin
// expectations are <sx_n> = Re s and <sy_n> = -Im s, so the complex signal
// is exactly what tomography on spin n reconstructs.
struct Signal {
    int site = -1;
    int initial_site = -1;
    std::vector<double> times;
    std::vector<std::complex<double>> values;
};

struct TomographyDataset {
    std::vector<Signal> signals;
    long shots = 0;  // 0 = exact
    std::uint64_t rng_seed = 0;
    double dt = 0.0;           // grid spacing when uniform, else 0
    double radius_bound = 0.0; // Nyquist bound the grid was built from, if any
};

// s_n(t) = sum_j V[n][j] V[n0][j] exp(-i (E_j - E0) t). Only shifted
// energies enter; a constant added to every eigenvalue and to E0 cancels.
Signal exact_signal(const Eigensystem& eig, int initial_site, int site,
                    const std::vector<double>& times);

// Exact mode reproduces exact_signal. Shot mode draws, for each sample and
// each quadrature, the mean of `shots` independent +-1 outcomes with the
// exact Bernoulli probability. Every draw is seeded from
// (rng_seed, n0, n, sample index, quadrature) alone, so results do not
// depend on evaluation order and any parallel partitioning would give the
// same dataset.
TomographyDataset simulate_tomography(const Eigensystem& eig, const ExperimentConfig& config);

// Uniform grid t_k = k*dt with dt = pi/(oversample*bound), sized to
// samples_per_frequency*n_frequencies points.
std::vector<double> nyquist_times(double bound, int n_frequencies,
                                  double oversample = 2.0,
                                  int samples_per_frequency = 8);

}  // namespace spinid
