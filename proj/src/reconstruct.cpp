#include "spinid/reconstruct.hpp"

#include <algorithm>
#include <cmath>

#include "spinid/error.hpp"

namespace spinid {

namespace {

void check_gateway_nodes(const std::vector<int>& gateway, int node_count) {
    if (gateway.empty())
        throw Error("invalid_config", "gateway is empty");
    if (!std::is_sorted(gateway.begin(), gateway.end()) ||
        std::adjacent_find(gateway.begin(), gateway.end()) != gateway.end())
        throw Error("invalid_config", "gateway list must be sorted and duplicate free");
    if (gateway.front() < 0 || gateway.back() >= node_count)
        throw Error("invalid_config", "gateway node out of range");
}

double spectral_sum(const ReconstructionState& st, int m, int n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < st.omega.size(); ++j)
        acc += st.omega[j] * st.rows(m, j) * st.rows(n, j);
    return acc;
}

}  // namespace

Eigendata eigendata_from_spectrum(const Eigensystem& eig, const std::vector<int>& gateway) {
    check_gateway_nodes(gateway, static_cast<int>(eig.eigenvalues.size()));
    Eigendata out;
    out.gateway = gateway;
    out.frequencies.resize(static_cast<std::size_t>(eig.eigenvalues.size()));
    for (int j = 0; j < eig.eigenvalues.size(); ++j)
        out.frequencies[static_cast<std::size_t>(j)] = eig.eigenvalues[j] - eig.ground_energy;
    out.components.resize(static_cast<int>(gateway.size()), eig.vectors.cols());
    for (std::size_t r = 0; r < gateway.size(); ++r)
        out.components.row(static_cast<int>(r)) = eig.vectors.row(gateway[r]);
    return out;
}

Eigendata eigendata_from_estimate(const EigendataEstimate& est) {
    Eigendata out;
    out.gateway = est.gateway;
    out.frequencies = est.frequencies;
    out.components = est.components;
    return out;
}

ReconstructionState couplings_within_gateway(const Eigendata& data,
                                             const GraphTopology& topology,
                                             const ReconstructOptions& options) {
    const int nodes = topology.node_count();
    check_gateway_nodes(data.gateway, nodes);
    const int nc = static_cast<int>(data.gateway.size());
    const int lines = static_cast<int>(data.frequencies.size());
    if (lines == 0)
        throw Error("invalid_config", "no spectral lines");
    if (data.components.rows() != nc || data.components.cols() != lines)
        throw Error("bad_dims", "component matrix shape does not match gateway and lines");
    if (!std::is_sorted(data.frequencies.begin(), data.frequencies.end()))
        throw Error("invalid_config", "frequencies must be ascending");

    ReconstructionState st;
    st.topology = topology;
    st.gateway = data.gateway;
    st.omega = data.frequencies;
    st.rows = Eigen::MatrixXd::Zero(nodes, lines);
    st.known.assign(nodes, 0);
    st.shifted_diag = Eigen::VectorXd::Zero(nodes);
    st.couplings = Eigen::MatrixXd::Zero(nodes, nodes);
    st.adjustment = Eigen::MatrixXd::Zero(nodes, nodes);
    for (double w : st.omega) st.omega_scale = std::max(st.omega_scale, std::abs(w));
    if (st.omega_scale == 0.0)
        throw Error("invalid_config", "all frequencies are zero");

    if (options.gateway_adjustment.size() > 0) {
        if (options.gateway_adjustment.rows() != nc || options.gateway_adjustment.cols() != nc)
            throw Error("bad_dims", "gateway adjustment block has the wrong shape");
        double asym = (options.gateway_adjustment - options.gateway_adjustment.transpose())
                          .cwiseAbs()
                          .maxCoeff();
        if (asym > 1e-12 * std::max(1.0, options.gateway_adjustment.cwiseAbs().maxCoeff()))
            throw Error("invalid_config", "gateway adjustment block must be symmetric");
        for (int a = 0; a < nc; ++a)
            for (int b = 0; b < nc; ++b)
                st.adjustment(data.gateway[a], data.gateway[b]) =
                    options.gateway_adjustment(a, b);
    }

    for (int r = 0; r < nc; ++r) {
        int node = data.gateway[r];
        st.rows.row(node) = data.components.row(r);
        st.known[node] = 1;
        double norm2 = st.rows.row(node).squaredNorm();
        double residue = std::abs(norm2 - 1.0);
        st.max_row_norm_residue = std::max(st.max_row_norm_residue, residue);
        if (residue > options.row_norm_tol)
            throw Error("norm_failure",
                        "gateway row " + std::to_string(node + 1) + " has squared norm " +
                            std::to_string(norm2) +
                            "; lines are missing or the data is inconsistent");
        st.shifted_diag(node) = spectral_sum(st, node, node);
    }

    const double nonedge_tol = options.nonedge_rel * st.omega_scale;
    for (int a = 0; a < nc; ++a) {
        for (int b = a + 1; b < nc; ++b) {
            int m = data.gateway[a], n = data.gateway[b];
            double raw = spectral_sum(st, m, n);
            bool edge = st.topology.has_edge(m, n);
            double adj = st.adjustment(m, n);
            if (!edge && adj == 0.0) {
                st.max_nonedge_residual = std::max(st.max_nonedge_residual, std::abs(raw));
                if (std::abs(raw) > nonedge_tol)
                    throw Error("non_edge_violation",
                                "sites " + std::to_string(m + 1) + "," + std::to_string(n + 1) +
                                    " are not linked but their matrix element is " +
                                    std::to_string(raw));
                continue;  // keep an exact zero rather than the residual noise
            }
            if (!edge) {
                // Lift-created element: beyond the adjustment nothing may remain.
                st.max_nonedge_residual =
                    std::max(st.max_nonedge_residual, std::abs(raw - adj));
                if (std::abs(raw - adj) > nonedge_tol)
                    throw Error("non_edge_violation",
                                "sites " + std::to_string(m + 1) + "," + std::to_string(n + 1) +
                                    " disagree with the declared gateway adjustment");
            }
            st.couplings(m, n) = st.couplings(n, m) = raw;
        }
    }
    return st;
}

void propagate_step(ReconstructionState& state, const ForcingStep& step,
                    SignConvention convention, const ReconstructOptions& options) {
    const int nodes = state.topology.node_count();
    if (step.infector < 0 || step.infector >= nodes || step.forced < 0 || step.forced >= nodes)
        throw Error("invalid_step", "step site out of range");
    const int mu = step.infector, nu = step.forced;
    if (!state.known[mu])
        throw Error("invalid_step", "infector " + std::to_string(mu + 1) + " is not known yet");
    if (state.known[nu])
        throw Error("invalid_step", "target " + std::to_string(nu + 1) + " is already known");
    int unknown_neighbors = 0;
    for (int n : state.topology.neighbors(mu))
        if (!state.known[n]) ++unknown_neighbors;
    if (!state.topology.has_edge(mu, nu) || unknown_neighbors != 1)
        throw Error("invalid_step",
                    "site " + std::to_string(mu + 1) + " cannot force site " +
                        std::to_string(nu + 1));

    const int lines = static_cast<int>(state.omega.size());
    Eigen::VectorXd r(lines);
    for (int j = 0; j < lines; ++j) {
        double acc = (state.omega[j] - state.shifted_diag(mu)) * state.rows(mu, j);
        // Subtract every already-known element out of row mu. Entries the
        // state never filled are zero and drop out on their own.
        for (int m = 0; m < nodes; ++m)
            if (state.known[m] && state.couplings(mu, m) != 0.0)
                acc -= state.couplings(mu, m) * state.rows(m, j);
        r(j) = acc;
    }

    double norm = r.norm();
    if (norm <= options.zero_pivot_rel * state.omega_scale)
        throw Error("zero_pivot",
                    "vanishing residual while forcing site " + std::to_string(nu + 1) +
                        "; the link from site " + std::to_string(mu + 1) +
                        " is too weak to resolve");
    double pivot = (convention == SignConvention::ferromagnetic) ? -norm : norm;

    state.rows.row(nu) = (r / pivot).transpose();
    state.known[nu] = 1;
    state.shifted_diag(nu) = spectral_sum(state, nu, nu);
    state.couplings(mu, nu) = state.couplings(nu, mu) = pivot;
    state.pivot_magnitudes.push_back(norm);

    double recomputed = spectral_sum(state, mu, nu);
    state.max_step_inconsistency =
        std::max(state.max_step_inconsistency, std::abs(recomputed - pivot));

    for (int m : state.topology.neighbors(nu)) {
        if (m == mu || !state.known[m]) continue;
        double elem = spectral_sum(state, m, nu);
        state.couplings(m, nu) = state.couplings(nu, m) = elem;
    }
}

Eigen::VectorXd recover_fields(const ReconstructionState& state, double delta) {
    const int nodes = state.topology.node_count();
    for (int m = 0; m < nodes; ++m)
        if (!state.known[m])
            throw Error("invalid_step",
                        "site " + std::to_string(m + 1) + " was never reached");
    Eigen::VectorXd b(nodes);
    for (int m = 0; m < nodes; ++m) {
        double neighbor_sum = 0.0;
        for (int n : state.topology.neighbors(m))
            neighbor_sum += state.couplings(m, n) - state.adjustment(m, n);
        b(m) = 0.5 * (state.shifted_diag(m) - state.adjustment(m, m) + delta * neighbor_sum);
    }
    return b;
}

double recover_ground_energy(const ReconstructionState& state, double delta,
                             const Eigen::VectorXd& fields) {
    double coupling_sum = 0.0;
    for (const auto& [m, n] : state.topology.edges())
        coupling_sum += 0.5 * (state.couplings(m, n) - state.adjustment(m, n));
    return delta * coupling_sum - fields.sum();
}

ReconstructionResult full_reconstruct(const Eigendata& data, const GraphTopology& topology,
                                      SignConvention convention, double delta,
                                      const ReconstructOptions& options) {
    if (static_cast<int>(data.frequencies.size()) < topology.node_count())
        throw Error("line_count_deficit",
                    "got " + std::to_string(data.frequencies.size()) + " lines for " +
                        std::to_string(topology.node_count()) +
                        " sites; degenerate levels need a lifting perturbation");
    if (static_cast<int>(data.frequencies.size()) > topology.node_count())
        throw Error("invalid_config",
                    "more spectral lines than sites; spurious lines in the input");

    GatewaySet gw = GatewaySet::checked(data.gateway, topology);
    ForcingOutcome forcing = forcing_sequence(topology, gw);
    if (!forcing.infecting) {
        std::string msg = "gateway does not infect the network; stuck with " +
                          std::to_string(forcing.closure.size()) + " of " +
                          std::to_string(topology.node_count()) + " sites";
        throw Error("not_infecting", msg);
    }

    ReconstructionState st = couplings_within_gateway(data, topology, options);
    for (const ForcingStep& step : forcing.sequence.steps)
        propagate_step(st, step, convention, options);

    ReconstructionResult out;
    out.topology = topology;
    out.sequence = forcing.sequence;
    out.fields = recover_fields(st, delta);
    out.ground_energy = recover_ground_energy(st, delta, out.fields);
    out.energies.resize(st.omega.size());
    for (std::size_t j = 0; j < st.omega.size(); ++j)
        out.energies[j] = st.omega[j] + out.ground_energy;

    out.edge_elements.reserve(topology.edges().size());
    out.edge_couplings.reserve(topology.edges().size());
    int sign_violations = 0;
    for (const auto& [em, en] : topology.edges()) {
        double elem = st.couplings(em, en) - st.adjustment(em, en);
        out.edge_elements.push_back(elem);
        out.edge_couplings.push_back(0.5 * elem);
        bool bad_sign = (convention == SignConvention::ferromagnetic) ? (elem >= 0.0)
                                                                      : (elem <= 0.0);
        if (bad_sign) ++sign_violations;
    }

    ReconstructionDiagnostics& diag = out.diagnostics;
    diag.pivot_magnitudes = st.pivot_magnitudes;
    diag.min_pivot = st.pivot_magnitudes.empty()
                         ? 0.0
                         : *std::min_element(st.pivot_magnitudes.begin(),
                                             st.pivot_magnitudes.end());
    diag.max_step_inconsistency = st.max_step_inconsistency;
    diag.max_row_norm_residue = st.max_row_norm_residue;
    diag.sign_violations = sign_violations;

    // Full-graph consistency sweep: every non-linked pair must sum to its
    // adjustment entry (zero almost everywhere). Diagnostic only; noisy
    // input shows up here rather than failing late.
    double worst = st.max_nonedge_residual;
    for (int m = 0; m < topology.node_count(); ++m)
        for (int n = m + 1; n < topology.node_count(); ++n) {
            if (topology.has_edge(m, n)) continue;
            double raw = spectral_sum(st, m, n);
            worst = std::max(worst, std::abs(raw - st.adjustment(m, n)));
        }
    diag.max_nonedge_residual = worst;

    // Independent check on the recovered totals: the level shifts carry the
    // trace of the sector matrix, which pins the field sum.
    double elem_sum = 0.0;
    for (double j : out.edge_elements) elem_sum += j;
    double trace_adj = 0.0;
    for (int v = 0; v < topology.node_count(); ++v) trace_adj += st.adjustment(v, v);
    double omega_sum = 0.0;
    for (double w : st.omega) omega_sum += w;
    diag.trace_identity_mismatch =
        std::abs(omega_sum - (-2.0 * delta * elem_sum + 2.0 * out.fields.sum() + trace_adj));

    return out;
}

}  // namespace spinid
