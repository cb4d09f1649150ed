#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "spinid/dynamics.hpp"

using namespace spinid;

namespace {

const double pi = 3.14159265358979323846;

Eigensystem two_spin_eigensystem() {
    SingleExcitationMatrix m;
    m.m = Eigen::MatrixXd::Zero(2, 2);
    m.m(0, 1) = m.m(1, 0) = -2.0;
    return eigendecompose(m);
}

SpinNetwork random_connected_network(std::mt19937_64& eng, int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int a = 0; a < n; ++a)
        for (int b = a + 2; b < n; ++b)
            if (u(eng) < 0.3) edges.emplace_back(a, b);
    GraphTopology topo(n, edges);
    std::uniform_real_distribution<double> c(-2.0, -0.5), f(-1.0, 1.0);
    std::vector<double> couplings(topo.edges().size());
    for (double& x : couplings) x = c(eng);
    std::vector<double> fields(n);
    for (double& x : fields) x = f(eng);
    return SpinNetwork::checked(std::move(topo), std::move(couplings), std::move(fields),
                                0.5, SignConvention::ferromagnetic);
}

std::vector<double> grid(int count, double dt) {
    std::vector<double> t(count);
    for (int k = 0; k < count; ++k) t[k] = k * dt;
    return t;
}

}  // namespace

TEST_CASE("two-spin closed forms") {
    Eigensystem eig = two_spin_eigensystem();
    std::vector<double> times = grid(40, 0.07);
    Signal s1 = exact_signal(eig, 0, 0, times);
    Signal s2 = exact_signal(eig, 0, 1, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
        double t = times[k];
        CHECK(std::abs(s1.values[k] - std::complex<double>(std::cos(2 * t), 0.0)) < 1e-12);
        CHECK(std::abs(s2.values[k] - std::complex<double>(0.0, std::sin(2 * t))) < 1e-12);
    }
}

TEST_CASE("initial sample is a delta") {
    std::mt19937_64 eng(3);
    SpinNetwork net = random_connected_network(eng, 6);
    Eigensystem eig = eigendecompose(build_single_excitation(net));
    std::vector<double> times = grid(4, 0.2);
    for (int n = 0; n < 6; ++n) {
        Signal s = exact_signal(eig, 2, n, times);
        std::complex<double> expect(n == 2 ? 1.0 : 0.0, 0.0);
        CHECK(std::abs(s.values[0] - expect) < 1e-12);
        for (const std::complex<double>& v : s.values) CHECK(std::abs(v) <= 1.0 + 1e-12);
    }
}

TEST_CASE("unitarity across all sites") {
    std::mt19937_64 eng(17);
    for (int trial = 0; trial < 5; ++trial) {
        SpinNetwork net = random_connected_network(eng, 6);
        Eigensystem eig = eigendecompose(build_single_excitation(net));
        std::vector<double> times = grid(12, 0.31);
        for (std::size_t k = 0; k < times.size(); ++k) {
            double total = 0.0;
            for (int n = 0; n < 6; ++n)
                total += std::norm(exact_signal(eig, 1, n, times).values[k]);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("exact signals match full-space evolution") {
    std::mt19937_64 eng(29);
    SpinNetwork net = random_connected_network(eng, 6);
    Eigensystem eig = eigendecompose(build_single_excitation(net));
    FullSpaceMatrix full = build_full_space(net);
    const long dim = full.m.rows();
    const int n0 = 1;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(full.m);
    Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(dim);
    psi0(0) = 1.0 / std::sqrt(2.0);
    psi0(1L << n0) = 1.0 / std::sqrt(2.0);

    std::vector<double> times = grid(10, 0.23);
    for (double t : times) {
        Eigen::VectorXcd phases(dim);
        for (long i = 0; i < dim; ++i) {
            double a = -solver.eigenvalues()(i) * t;
            phases(i) = std::complex<double>(std::cos(a), std::sin(a));
        }
        Eigen::VectorXcd psi = solver.eigenvectors().cast<std::complex<double>>() *
                               (phases.array() *
                                (solver.eigenvectors().transpose() * psi0.real()).array()
                                    .cast<std::complex<double>>())
                                   .matrix();
        for (int n = 0; n < 6; ++n) {
            // sx_n flips bit n; sy_n adds +-i depending on the flipped direction.
            std::complex<double> sx(0.0, 0.0), sy(0.0, 0.0);
            for (long s = 0; s < dim; ++s) {
                long flipped = s ^ (1L << n);
                bool up = (s >> n) & 1;
                sx += std::conj(psi(flipped)) * psi(s);
                sy += std::conj(psi(flipped)) * psi(s) *
                      (up ? std::complex<double>(0.0, 1.0)
                          : std::complex<double>(0.0, -1.0));
            }
            Signal sig = exact_signal(eig, n0, n, {t});
            CHECK(std::abs(sig.values[0].real() - sx.real()) < 1e-8);
            CHECK(std::abs(-sig.values[0].imag() - sy.real()) < 1e-8);
        }
    }
}

TEST_CASE("global phase invariance") {
    std::mt19937_64 eng(31);
    SpinNetwork net = random_connected_network(eng, 5);
    Eigensystem eig = eigendecompose(build_single_excitation(net));
    Eigensystem shifted = eig;
    shifted.eigenvalues.array() += 7.5;
    shifted.ground_energy += 7.5;
    std::vector<double> times = grid(16, 0.4);
    for (int n = 0; n < 5; ++n) {
        Signal a = exact_signal(eig, 0, n, times);
        Signal b = exact_signal(shifted, 0, n, times);
        for (std::size_t k = 0; k < times.size(); ++k)
            CHECK(std::abs(a.values[k] - b.values[k]) < 1e-12);
    }
}

TEST_CASE("signal symmetry under swapping sites") {
    std::mt19937_64 eng(37);
    SpinNetwork net = random_connected_network(eng, 7);
    Eigensystem eig = eigendecompose(build_single_excitation(net));
    std::vector<double> times = grid(9, 0.19);
    for (int a = 0; a < 7; ++a)
        for (int b = a; b < 7; ++b) {
            Signal f = exact_signal(eig, a, b, times);
            Signal g = exact_signal(eig, b, a, times);
            for (std::size_t k = 0; k < times.size(); ++k)
                CHECK(std::abs(f.values[k] - g.values[k]) < 1e-14);
        }
}

TEST_CASE("exact mode reproduces exact_signal bit for bit") {
    Eigensystem eig = two_spin_eigensystem();
    ExperimentConfig config;
    config.initial_site = 0;
    config.observed_sites = {0, 1};
    config.sample_times = grid(20, 0.11);
    config.shots = 0;
    TomographyDataset data = simulate_tomography(eig, config);
    REQUIRE(data.signals.size() == 2);
    for (int n = 0; n < 2; ++n) {
        Signal ref = exact_signal(eig, 0, n, config.sample_times);
        for (std::size_t k = 0; k < ref.values.size(); ++k)
            CHECK(data.signals[n].values[k] == ref.values[k]);
    }
}

TEST_CASE("single-shot quadratures are signs") {
    Eigensystem eig = two_spin_eigensystem();
    ExperimentConfig config;
    config.initial_site = 0;
    config.observed_sites = {0, 1};
    config.sample_times = grid(25, 0.13);
    config.shots = 1;
    config.rng_seed = 99;
    TomographyDataset data = simulate_tomography(eig, config);
    for (const Signal& s : data.signals)
        for (const std::complex<double>& v : s.values) {
            CHECK(std::abs(std::abs(v.real()) - 1.0) < 1e-15);
            CHECK(std::abs(std::abs(v.imag()) - 1.0) < 1e-15);
        }
}

TEST_CASE("shot noise shrinks as one over root shots") {
    Eigensystem eig = two_spin_eigensystem();
    ExperimentConfig config;
    config.initial_site = 0;
    config.observed_sites = {0, 1};
    config.sample_times = grid(32, 0.17);

    std::vector<double> log_shots, log_rms;
    for (long shots : {1000L, 10000L, 100000L, 1000000L}) {
        double sq = 0.0;
        long count = 0;
        for (std::uint64_t seed = 1; seed <= 8; ++seed) {
            config.shots = shots;
            config.rng_seed = seed;
            TomographyDataset noisy = simulate_tomography(eig, config);
            for (int n = 0; n < 2; ++n) {
                Signal ref = exact_signal(eig, 0, n, config.sample_times);
                for (std::size_t k = 0; k < ref.values.size(); ++k) {
                    sq += std::norm(noisy.signals[n].values[k] - ref.values[k]);
                    ++count;
                }
            }
        }
        log_shots.push_back(std::log10(static_cast<double>(shots)));
        log_rms.push_back(std::log10(std::sqrt(sq / count)));
    }
    // Least-squares slope of log-RMS against log-shots.
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < log_shots.size(); ++i) {
        mx += log_shots[i];
        my += log_rms[i];
    }
    mx /= log_shots.size();
    my /= log_rms.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < log_shots.size(); ++i) {
        num += (log_shots[i] - mx) * (log_rms[i] - my);
        den += (log_shots[i] - mx) * (log_shots[i] - mx);
    }
    double slope = num / den;
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.2));
}

TEST_CASE("shot sampling is deterministic and order independent") {
    Eigensystem eig = two_spin_eigensystem();
    ExperimentConfig config;
    config.initial_site = 0;
    config.observed_sites = {0, 1};
    config.sample_times = grid(10, 0.2);
    config.shots = 100;
    config.rng_seed = 5;
    TomographyDataset a = simulate_tomography(eig, config);
    TomographyDataset b = simulate_tomography(eig, config);
    for (std::size_t s = 0; s < a.signals.size(); ++s)
        for (std::size_t k = 0; k < a.signals[s].values.size(); ++k)
            CHECK(a.signals[s].values[k] == b.signals[s].values[k]);

    // Reordering the observation list must not change any signal's draws.
    config.observed_sites = {1, 0};
    TomographyDataset c = simulate_tomography(eig, config);
    for (std::size_t k = 0; k < a.signals[0].values.size(); ++k) {
        CHECK(a.signals[0].values[k] == c.signals[1].values[k]);
        CHECK(a.signals[1].values[k] == c.signals[0].values[k]);
    }

    config.observed_sites = {0, 1};
    config.rng_seed = 6;
    TomographyDataset d = simulate_tomography(eig, config);
    bool differs = false;
    for (std::size_t k = 0; k < a.signals[0].values.size(); ++k)
        if (a.signals[0].values[k] != d.signals[0].values[k]) differs = true;
    CHECK(differs);
}

TEST_CASE("sampling grid construction") {
    std::vector<double> t = nyquist_times(4.0, 4, 2.0, 8);
    REQUIRE(t.size() == 32);
    CHECK(t[0] == 0.0);
    CHECK(t[1] == doctest::Approx(pi / 8.0));
    CHECK(t[31] == doctest::Approx(31.0 * pi / 8.0));

    CHECK_THROWS_AS(nyquist_times(0.0, 4), Error);
    CHECK_THROWS_AS(nyquist_times(4.0, 0), Error);
    CHECK_THROWS_AS(nyquist_times(4.0, 4, 0.5), Error);
    CHECK_THROWS_AS(nyquist_times(4.0, 4, 2.0, 1), Error);
}

TEST_CASE("experiment validation") {
    Eigensystem eig = two_spin_eigensystem();
    CHECK_THROWS_AS(exact_signal(eig, 0, 5, {0.0}), Error);
    CHECK_THROWS_AS(exact_signal(eig, -1, 0, {0.0}), Error);
    CHECK_THROWS_AS(exact_signal(eig, 0, 0, {}), Error);
    CHECK_THROWS_AS(exact_signal(eig, 0, 0, {-0.1, 0.2}), Error);
    CHECK_THROWS_AS(exact_signal(eig, 0, 0, {0.2, 0.1}), Error);

    ExperimentConfig config;
    config.initial_site = 0;
    config.observed_sites = {};
    config.sample_times = {0.0, 0.1};
    CHECK_THROWS_AS(simulate_tomography(eig, config), Error);
    config.observed_sites = {0};
    config.shots = -1;
    CHECK_THROWS_AS(simulate_tomography(eig, config), Error);
}
