#include "spinid/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "spinid/error.hpp"

namespace spinid {

namespace {

void check_times(const std::vector<double>& times) {
    if (times.empty())
        throw Error("invalid_config", "sample_times is empty");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] >= 0.0))
            throw Error("invalid_config", "sample times must be nonnegative");
        if (k > 0 && !(times[k] > times[k - 1]))
            throw Error("invalid_config", "sample times must be strictly increasing");
    }
}

void check_site(const Eigensystem& eig, int site, const char* what) {
    if (site < 0 || site >= static_cast<int>(eig.eigenvalues.size()))
        throw Error("invalid_config",
                    std::string(what) + " " + std::to_string(site + 1) + " out of range");
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    // splitmix64 finalizer over a running combine; cheap and well dispersed
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return h;
}

// Mean of `shots` +-1 outcomes with P(+1) = (1+expect)/2, via one binomial draw.
double sampled_mean(double expect, long shots, std::uint64_t seed) {
    double p = 0.5 * (1.0 + expect);
    p = std::clamp(p, 0.0, 1.0);
    std::mt19937_64 eng(seed);
    std::binomial_distribution<long> dist(shots, p);
    long ups = dist(eng);
    return 2.0 * static_cast<double>(ups) / static_cast<double>(shots) - 1.0;
}

}  // namespace

Signal exact_signal(const Eigensystem& eig, int initial_site, int site,
                    const std::vector<double>& times) {
    check_site(eig, initial_site, "initial site");
    check_site(eig, site, "site");
    check_times(times);

    const int levels = static_cast<int>(eig.eigenvalues.size());
    Signal out;
    out.site = site;
    out.initial_site = initial_site;
    out.times = times;
    out.values.reserve(times.size());
    for (double t : times) {
        std::complex<double> s(0.0, 0.0);
        for (int j = 0; j < levels; ++j) {
            double amp = eig.vectors(site, j) * eig.vectors(initial_site, j);
            double phase = -(eig.eigenvalues[j] - eig.ground_energy) * t;
            s += amp * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        out.values.push_back(s);
    }
    return out;
}

TomographyDataset simulate_tomography(const Eigensystem& eig, const ExperimentConfig& config) {
    check_site(eig, config.initial_site, "initial site");
    if (config.observed_sites.empty())
        throw Error("invalid_config", "no observed sites");
    for (int n : config.observed_sites) check_site(eig, n, "observed site");
    check_times(config.sample_times);
    if (config.shots < 0)
        throw Error("invalid_config", "shots must be nonnegative");

    TomographyDataset out;
    out.shots = config.shots;
    out.rng_seed = config.rng_seed;
    for (int n : config.observed_sites) {
        Signal sig = exact_signal(eig, config.initial_site, n, config.sample_times);
        if (config.shots > 0) {
            for (std::size_t k = 0; k < sig.values.size(); ++k) {
                std::uint64_t base = mix(config.rng_seed, 0x73696d756c617465ULL);
                base = mix(base, static_cast<std::uint64_t>(config.initial_site));
                base = mix(base, static_cast<std::uint64_t>(n));
                base = mix(base, static_cast<std::uint64_t>(k));
                double re = sampled_mean(sig.values[k].real(), config.shots, mix(base, 0));
                // <sy> = -Im s, so the sampled sy mean estimates -Im s
                double sy = sampled_mean(-sig.values[k].imag(), config.shots, mix(base, 1));
                sig.values[k] = std::complex<double>(re, -sy);
            }
        }
        out.signals.push_back(std::move(sig));
    }
    return out;
}

std::vector<double> nyquist_times(double bound, int n_frequencies,
                                  double oversample, int samples_per_frequency) {
    if (!(bound > 0.0))
        throw Error("invalid_config", "frequency bound must be positive");
    if (n_frequencies < 1)
        throw Error("invalid_config", "need at least one frequency");
    if (!(oversample >= 1.0))
        throw Error("invalid_config", "oversample factor must be >= 1");
    if (samples_per_frequency < 2)
        throw Error("invalid_config", "need at least two samples per frequency");

    const double pi = 3.14159265358979323846;
    double dt = pi / (oversample * bound);
    int count = samples_per_frequency * n_frequencies;
    std::vector<double> times(count);
    for (int k = 0; k < count; ++k) times[k] = k * dt;
    return times;
}

}  // namespace spinid
