#include "spinid/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "spinid/error.hpp"

namespace spinid {

namespace {

constexpr double kPi = 3.14159265358979323846;

// All signals must share one uniform, strictly increasing grid. Returns dt.
double shared_uniform_dt(const std::vector<Signal>& signals) {
    if (signals.empty())
        throw Error("invalid_config", "no signals given");
    const std::vector<double>& t0 = signals.front().times;
    if (t0.size() < 2)
        throw Error("invalid_config", "need at least two samples per signal");
    double dt = t0[1] - t0[0];
    if (!(dt > 0.0))
        throw Error("invalid_config", "time grid must be strictly increasing");
    double scale = std::max(std::abs(t0.back()), 1.0);
    for (std::size_t k = 1; k < t0.size(); ++k) {
        if (std::abs((t0[k] - t0[k - 1]) - dt) > 1e-9 * scale)
            throw Error("invalid_config", "time grid is not uniform");
    }
    for (const Signal& s : signals) {
        if (s.values.size() != s.times.size())
            throw Error("invalid_config", "signal values and times differ in length");
        if (s.times.size() != t0.size())
            throw Error("invalid_config", "signals do not share one time grid");
        for (std::size_t k = 0; k < t0.size(); ++k) {
            if (std::abs(s.times[k] - t0[k]) > 1e-12 * scale)
                throw Error("invalid_config", "signals do not share one time grid");
        }
    }
    return dt;
}

}  // namespace

FrequencyEstimate estimate_frequencies(const std::vector<Signal>& signals,
                                       const SpectralOptions& options) {
    double dt = shared_uniform_dt(signals);
    const int samples = static_cast<int>(signals.front().times.size());
    const int pencil = samples / 2;            // delay window
    const int rows_per_signal = samples - pencil;
    if (pencil < 1 || rows_per_signal < 1)
        throw Error("invalid_config", "too few samples for a pencil estimate");

    Eigen::MatrixXcd hankel(rows_per_signal * static_cast<int>(signals.size()), pencil + 1);
    for (std::size_t s = 0; s < signals.size(); ++s) {
        const auto& v = signals[s].values;
        for (int i = 0; i < rows_per_signal; ++i)
            for (int j = 0; j <= pencil; ++j)
                hankel(static_cast<int>(s) * rows_per_signal + i, j) = v[i + j];
    }

    Eigen::BDCSVD<Eigen::MatrixXcd> svd(hankel, Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();

    double threshold;
    if (options.noise_mode) {
        // The bulk of the singular values is pure shot noise; cut a safe
        // factor above its median.
        Eigen::VectorXd sorted = sv;
        std::sort(sorted.data(), sorted.data() + sorted.size());
        double median = sorted(sorted.size() / 2);
        threshold = options.noise_sv_factor * median;
        threshold = std::max(threshold, 1e-12 * sv(0));
    } else {
        threshold = options.sv_rel_tol * sv(0);
    }

    int order = 0;
    while (order < sv.size() && sv(order) > threshold) ++order;
    int order_cap = std::min(pencil, rows_per_signal * static_cast<int>(signals.size()));
    if (options.max_model_order > 0) order_cap = std::min(order_cap, options.max_model_order);
    order = std::min(order, order_cap);
    if (order == 0)
        throw Error("rank_ambiguity", "no singular value above the noise threshold");

    FrequencyEstimate out;
    out.dt = dt;
    out.singular_values = sv;
    out.model_order = order;
    out.rank_gap = (order < sv.size() && sv(order) > 0.0)
                       ? sv(order - 1) / sv(order)
                       : std::numeric_limits<double>::infinity();
    if (out.rank_gap < options.rank_gap_min) {
        std::string msg = "ambiguous model order cut: singular value ratio " +
                          std::to_string(out.rank_gap) + " at order " + std::to_string(order);
        if (options.strict && !options.noise_mode)
            throw Error("rank_ambiguity", msg);
        out.warnings.push_back(msg);
    }

    // Signal-space pencil: shift-invariance of the Hankel windows puts the
    // mode phases into the spectrum of pinv(V0) * V1. The right singular
    // vectors carry the conjugated mode profiles, so each eigenvalue is
    // exp(+i w dt) for a signal term exp(-i w t).
    Eigen::MatrixXcd vbase = svd.matrixV().leftCols(order);
    Eigen::MatrixXcd v0 = vbase.topRows(pencil);
    Eigen::MatrixXcd v1 = vbase.bottomRows(pencil);
    Eigen::MatrixXcd shift = v0.colPivHouseholderQr().solve(v1);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(shift);
    if (es.info() != Eigen::Success)
        throw Error("convergence_failure", "pencil eigenvalue solve failed");

    out.frequencies.resize(order);
    for (int j = 0; j < order; ++j) {
        std::complex<double> z = es.eigenvalues()(j);
        double omega = std::arg(z) / dt;
        out.frequencies[j] = omega;
        if (std::abs(std::abs(z) - 1.0) > 0.1)
            out.warnings.push_back("mode " + std::to_string(j) +
                                   " is strongly damped; model misfit");
        if (std::abs(std::arg(z)) > (1.0 - options.band_edge_margin) * kPi) {
            std::string msg = "frequency " + std::to_string(omega) +
                              " sits at the Nyquist band edge; sampling too slow?";
            if (options.strict && !options.noise_mode) throw Error("aliasing", msg);
            out.warnings.push_back(msg);
        }
    }
    std::sort(out.frequencies.begin(), out.frequencies.end());
    return out;
}

std::vector<SignalAmplitudes> estimate_amplitudes(const std::vector<Signal>& signals,
                                                  const std::vector<double>& frequencies,
                                                  const SpectralOptions& options) {
    if (signals.empty())
        throw Error("invalid_config", "no signals given");
    if (frequencies.empty())
        throw Error("invalid_config", "no frequencies given");
    const std::vector<double>& times = signals.front().times;
    for (const Signal& s : signals) {
        if (s.times != times)
            throw Error("invalid_config", "signals do not share one time grid");
        if (s.values.size() != times.size())
            throw Error("invalid_config", "signal values and times differ in length");
    }
    if (times.size() < frequencies.size())
        throw Error("invalid_config", "fewer samples than frequencies");

    const int rows = static_cast<int>(times.size());
    const int cols = static_cast<int>(frequencies.size());
    Eigen::MatrixXcd vand(rows, cols);
    for (int k = 0; k < rows; ++k)
        for (int j = 0; j < cols; ++j) {
            double phase = -frequencies[j] * times[k];
            vand(k, j) = std::complex<double>(std::cos(phase), std::sin(phase));
        }

    Eigen::BDCSVD<Eigen::MatrixXcd> cond(vand);
    double smin = cond.singularValues()(cond.singularValues().size() - 1);
    double smax = cond.singularValues()(0);
    if (!(smin > 0.0) || smax / smin > options.condition_cap)
        throw Error("ill_conditioned",
                    "frequency design matrix condition " +
                        std::to_string(smin > 0.0 ? smax / smin
                                                  : std::numeric_limits<double>::infinity()) +
                        " exceeds the cap; frequencies too close for this grid");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(vand);
    std::vector<SignalAmplitudes> out;
    out.reserve(signals.size());
    for (const Signal& s : signals) {
        Eigen::VectorXcd rhs(rows);
        for (int k = 0; k < rows; ++k) rhs(k) = s.values[k];
        Eigen::VectorXcd a = qr.solve(rhs);
        SignalAmplitudes sa;
        sa.site = s.site;
        sa.initial_site = s.initial_site;
        sa.amplitudes.assign(a.data(), a.data() + a.size());
        double denom = rhs.norm();
        sa.residual_rel = (vand * a - rhs).norm() / std::max(denom, 1e-300);
        out.push_back(std::move(sa));
    }
    return out;
}

double design_condition(const std::vector<double>& times,
                        const std::vector<double>& frequencies) {
    if (times.empty() || frequencies.empty())
        throw Error("invalid_config", "empty design matrix");
    Eigen::MatrixXcd vand(times.size(), frequencies.size());
    for (std::size_t k = 0; k < times.size(); ++k)
        for (std::size_t j = 0; j < frequencies.size(); ++j) {
            double phase = -frequencies[j] * times[k];
            vand(static_cast<int>(k), static_cast<int>(j)) =
                std::complex<double>(std::cos(phase), std::sin(phase));
        }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(vand);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
    return svd.singularValues()(0) / smin;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

EigendataEstimate assemble_eigendata(const std::vector<FamilyLines>& families,
                                     const std::vector<int>& gateway,
                                     const AssembleOptions& options) {
    if (families.empty())
        throw Error("invalid_config", "no experiment families given");
    if (gateway.empty() || !std::is_sorted(gateway.begin(), gateway.end()) ||
        std::adjacent_find(gateway.begin(), gateway.end()) != gateway.end())
        throw Error("invalid_config", "gateway list must be sorted and duplicate free");

    const int nc = static_cast<int>(gateway.size());
    auto gateway_row = [&](int site) {
        auto it = std::lower_bound(gateway.begin(), gateway.end(), site);
        if (it == gateway.end() || *it != site)
            throw Error("invalid_config",
                        "site " + std::to_string(site + 1) + " is not in the gateway");
        return static_cast<int>(it - gateway.begin());
    };

    // Every family must carry amplitudes for the full gateway, aligned with
    // its own frequency list.
    for (const FamilyLines& f : families) {
        gateway_row(f.initial_site);
        if (f.amplitudes.size() != gateway.size())
            throw Error("invalid_config", "family must observe every gateway site");
        std::vector<char> seen(gateway.size(), 0);
        for (const SignalAmplitudes& sa : f.amplitudes) {
            int row = gateway_row(sa.site);
            if (seen[row]++)
                throw Error("invalid_config", "duplicate observed site in a family");
            if (sa.initial_site != f.initial_site)
                throw Error("invalid_config", "family amplitudes disagree on the initial site");
            if (sa.amplitudes.size() != f.frequencies.size())
                throw Error("invalid_config", "amplitude list does not match frequency list");
        }
    }

    // Flatten every (family, line) pair and merge by frequency proximity.
    struct Item {
        int family;
        int line;
        double freq;
    };
    std::vector<Item> items;
    for (std::size_t f = 0; f < families.size(); ++f)
        for (std::size_t l = 0; l < families[f].frequencies.size(); ++l)
            items.push_back({static_cast<int>(f), static_cast<int>(l),
                             families[f].frequencies[l]});
    if (items.empty())
        throw Error("invalid_config", "no spectral lines given");

    double lo = items.front().freq, hi = items.front().freq;
    for (const Item& it : items) {
        lo = std::min(lo, it.freq);
        hi = std::max(hi, it.freq);
    }
    double tol = std::max(options.merge_abs, options.merge_rel * (hi - lo));

    std::vector<int> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return items[a].freq < items[b].freq; });
    UnionFind uf(static_cast<int>(items.size()));
    for (std::size_t k = 1; k < order.size(); ++k)
        if (items[order[k]].freq - items[order[k - 1]].freq <= tol)
            uf.unite(order[k], order[k - 1]);

    // Cluster ids in ascending frequency order.
    std::vector<int> root_of(items.size());
    std::vector<int> cluster_id(items.size(), -1);
    int nclusters = 0;
    for (int k : order) {
        int r = uf.find(k);
        if (cluster_id[r] < 0) cluster_id[r] = nclusters++;
        root_of[k] = cluster_id[r];
    }

    EigendataEstimate out;
    out.gateway = gateway;
    out.frequencies.assign(nclusters, 0.0);
    std::vector<int> cluster_size(nclusters, 0);
    // member[c][f] = line index of family f in cluster c, or -1 if absent
    std::vector<std::vector<int>> member(nclusters,
                                         std::vector<int>(families.size(), -1));
    for (std::size_t k = 0; k < items.size(); ++k) {
        int c = root_of[k];
        out.frequencies[c] += items[k].freq;
        cluster_size[c]++;
        if (member[c][items[k].family] >= 0)
            throw Error("merge_failure",
                        "two lines of one experiment fall inside the merge tolerance; "
                        "unresolved degeneracy or a too-loose tolerance");
        member[c][items[k].family] = items[k].line;
    }
    for (int c = 0; c < nclusters; ++c) out.frequencies[c] /= cluster_size[c];

    // Amplitude scale for imaginary-part and darkness checks.
    double amp_scale = 0.0;
    for (const FamilyLines& f : families)
        for (const SignalAmplitudes& sa : f.amplitudes)
            for (const std::complex<double>& a : sa.amplitudes)
                amp_scale = std::max(amp_scale, std::abs(a));
    if (amp_scale == 0.0)
        throw Error("dark_line", "all amplitudes vanish");

    // Amplitude of family f at observed site row n for cluster c (absent -> 0).
    auto amp_at = [&](int c, int f, int row) -> std::complex<double> {
        int line = member[c][f];
        if (line < 0) return {0.0, 0.0};
        for (const SignalAmplitudes& sa : families[f].amplitudes)
            if (gateway_row(sa.site) == row) return sa.amplitudes[line];
        return {0.0, 0.0};
    };

    out.components = Eigen::MatrixXd::Zero(nc, nclusters);
    EigendataDiagnostics& diag = out.diagnostics;
    diag.line_count = nclusters;
    for (const FamilyLines& f : families)
        for (const SignalAmplitudes& sa : f.amplitudes)
            diag.max_amplitude_residual = std::max(diag.max_amplitude_residual, sa.residual_rel);

    for (int c = 0; c < nclusters; ++c) {
        // Reference row: the family whose own-site (diagonal) amplitude is
        // largest. Diagonal amplitudes are W_n^2, so this maximizes the
        // divisor used for the ratio reconstruction below.
        int ref_family = -1;
        double best = -1.0;
        for (std::size_t f = 0; f < families.size(); ++f) {
            int row = gateway_row(families[f].initial_site);
            double mag = std::abs(amp_at(c, static_cast<int>(f), row));
            if (mag > best) {
                best = mag;
                ref_family = static_cast<int>(f);
            }
        }
        if (best < options.dark_floor)
            throw Error("dark_line",
                        "line at frequency " + std::to_string(out.frequencies[c]) +
                            " has no weight on any gateway site");

        int ref_row = gateway_row(families[ref_family].initial_site);
        std::complex<double> diag_amp = amp_at(c, ref_family, ref_row);
        if (std::abs(diag_amp.imag()) > options.imag_tol * amp_scale ||
            diag_amp.real() <= 0.0)
            throw Error("gauge_failure",
                        "diagonal amplitude is not positive real at frequency " +
                            std::to_string(out.frequencies[c]));
        diag.max_imag_residue =
            std::max(diag.max_imag_residue, std::abs(diag_amp.imag()) / amp_scale);

        double wref = std::sqrt(diag_amp.real());
        out.components(ref_row, c) = wref;
        for (int row = 0; row < nc; ++row) {
            if (row == ref_row) continue;
            std::complex<double> a = amp_at(c, ref_family, row);
            diag.max_imag_residue =
                std::max(diag.max_imag_residue, std::abs(a.imag()) / amp_scale);
            out.components(row, c) = a.real() / wref;
        }

        // Every measured amplitude, from every family, must match the
        // rank-1 product of the recovered entries. Families absent from the
        // cluster measured zero there, so they participate with a = 0.
        for (std::size_t f = 0; f < families.size(); ++f) {
            int frow = gateway_row(families[f].initial_site);
            for (int row = 0; row < nc; ++row) {
                std::complex<double> a = amp_at(c, static_cast<int>(f), row);
                double model = out.components(row, c) * out.components(frow, c);
                diag.max_rank1_inconsistency =
                    std::max(diag.max_rank1_inconsistency, std::abs(a - model));
            }
        }
    }

    if (static_cast<int>(out.frequencies.size()) != nclusters)
        throw Error("merge_failure", "internal cluster bookkeeping error");
    return out;
}

}  // namespace spinid
