#include "spinid/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>

namespace spinid {

SignConvention sign_convention_from_string(const std::string& s) {
    if (s == "ferromagnetic") return SignConvention::ferromagnetic;
    if (s == "antiferromagnetic") return SignConvention::antiferromagnetic;
    throw Error("invalid_network", "unknown sign convention '" + s + "'");
}

std::string to_string(SignConvention c) {
    return c == SignConvention::ferromagnetic ? "ferromagnetic" : "antiferromagnetic";
}

SpinNetwork SpinNetwork::checked(GraphTopology topology, std::vector<double> couplings,
                                 std::vector<double> fields, double delta,
                                 SignConvention convention) {
    if (couplings.size() != topology.edges().size())
        throw Error("invalid_network", "need one coupling per edge");
    if (fields.size() != static_cast<size_t>(topology.node_count()))
        throw Error("invalid_network", "need one field per node");
    for (size_t e = 0; e < couplings.size(); ++e) {
        const double c = couplings[e];
        if (!std::isfinite(c) ||
            (convention == SignConvention::ferromagnetic && c >= 0.0) ||
            (convention == SignConvention::antiferromagnetic && c <= 0.0)) {
            auto [m, n] = topology.edges()[e];
            throw Error("invalid_network",
                        "coupling on edge (" + std::to_string(m + 1) + "," +
                            std::to_string(n + 1) + ") violates " + to_string(convention) +
                            " convention: c=" + std::to_string(c));
        }
    }
    for (double b : fields)
        if (!std::isfinite(b))
            throw Error("invalid_network", "field must be finite");
    if (!std::isfinite(delta))
        throw Error("invalid_network", "delta must be finite");

    SpinNetwork net;
    net.topology = std::move(topology);
    net.couplings = std::move(couplings);
    net.fields = std::move(fields);
    net.delta = delta;
    net.convention = convention;
    return net;
}

double SpinNetwork::coupling(int m, int n) const {
    const int e = topology.edge_index(m, n);
    return e >= 0 ? couplings[e] : 0.0;
}

double SpinNetwork::coupling_sum() const {
    return std::accumulate(couplings.begin(), couplings.end(), 0.0);
}

double SpinNetwork::field_sum() const {
    return std::accumulate(fields.begin(), fields.end(), 0.0);
}

double SpinNetwork::ground_energy() const {
    return delta * coupling_sum() - field_sum();
}

SingleExcitationMatrix build_single_excitation(const SpinNetwork& net) {
    const int n = net.topology.node_count();
    const double coupling_total = net.coupling_sum();
    const double field_total = net.field_sum();

    SingleExcitationMatrix out;
    out.m = Eigen::MatrixXd::Zero(n, n);
    out.ground_energy = net.delta * coupling_total - field_total;

    for (size_t e = 0; e < net.topology.edges().size(); ++e) {
        auto [a, b] = net.topology.edges()[e];
        out.m(a, b) = out.m(b, a) = 2.0 * net.couplings[e];
    }
    for (int m = 0; m < n; ++m) {
        double neighbor_sum = 0.0;
        for (int w : net.topology.neighbors(m)) neighbor_sum += net.coupling(m, w);
        out.m(m, m) = net.delta * (coupling_total - 2.0 * neighbor_sum) +
                      2.0 * net.fields[m] - field_total;
    }
    return out;
}

FullSpaceMatrix build_full_space(const SpinNetwork& net) {
    const int n = net.topology.node_count();
    if (n > 12)
        throw Error("too_large", "full-space oracle capped at 12 spins, got " +
                                     std::to_string(n));
    const long dim = 1L << n;
    FullSpaceMatrix out;
    out.spins = n;
    out.m = Eigen::MatrixXd::Zero(dim, dim);

    for (long s = 0; s < dim; ++s) {
        double diag = 0.0;
        for (size_t e = 0; e < net.topology.edges().size(); ++e) {
            auto [a, b] = net.topology.edges()[e];
            const double za = (s >> a) & 1 ? 1.0 : -1.0;
            const double zb = (s >> b) & 1 ? 1.0 : -1.0;
            diag += net.couplings[e] * net.delta * za * zb;
            // XX+YY flips an up/down pair; matrix element 2c.
            if (za * zb < 0.0) {
                const long t = s ^ (1L << a) ^ (1L << b);
                out.m(t, s) += 2.0 * net.couplings[e];
            }
        }
        for (int v = 0; v < n; ++v)
            diag += net.fields[v] * ((s >> v) & 1 ? 1.0 : -1.0);
        out.m(s, s) = diag;
    }
    return out;
}

SingleExcitationMatrix project_full_to_single(const FullSpaceMatrix& full) {
    const int n = full.spins;
    SingleExcitationMatrix out;
    out.m.resize(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            out.m(a, b) = full.m(1L << a, 1L << b);
    out.ground_energy = full.m(0, 0);
    return out;
}

Eigensystem eigendecompose(const SingleExcitationMatrix& matrix) {
    const auto& m = matrix.m;
    if (m.rows() != m.cols())
        throw Error("invalid_network", "matrix must be square");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success)
        throw Error("convergence_failure", "symmetric eigensolver did not converge");

    Eigensystem sys;
    sys.eigenvalues = solver.eigenvalues();
    sys.vectors = solver.eigenvectors();
    sys.ground_energy = matrix.ground_energy;

    // Sign gauge: first component of largest magnitude positive.
    for (int j = 0; j < sys.vectors.cols(); ++j) {
        int pivot = 0;
        double best = std::abs(sys.vectors(0, j));
        for (int i = 1; i < sys.vectors.rows(); ++i) {
            const double a = std::abs(sys.vectors(i, j));
            if (a > best) {
                best = a;
                pivot = i;
            }
        }
        if (sys.vectors(pivot, j) < 0.0) sys.vectors.col(j) = -sys.vectors.col(j);
    }

    const double scale = m.norm();
    const double tol = 1e-10 * std::max(scale, 1.0);
    for (int j = 0; j < sys.eigenvalues.size(); ++j) {
        const double resid =
            (m * sys.vectors.col(j) - sys.eigenvalues[j] * sys.vectors.col(j)).norm();
        if (resid > tol)
            throw Error("convergence_failure",
                        "eigenpair residual " + std::to_string(resid) + " above tolerance");
    }
    return sys;
}

double spectral_radius_bound(double max_coupling, double max_field,
                             const GraphTopology& topology, double delta) {
    if (max_coupling < 0.0 || max_field < 0.0)
        throw Error("invalid_config", "entry bounds must be nonnegative");
    // Row sums of the shifted one-excitation matrix: the diagonal is bounded
    // by 2|delta|*deg*cmax + 2*bmax and the off-diagonal row sum by 2*deg*cmax.
    double bound = 0.0;
    for (int m = 0; m < topology.node_count(); ++m) {
        const double deg = static_cast<double>(topology.neighbors(m).size());
        bound = std::max(bound, 2.0 * (1.0 + std::abs(delta)) * deg * max_coupling +
                                    2.0 * max_field);
    }
    return bound;
}

}  // namespace spinid
