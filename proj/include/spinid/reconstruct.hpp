#pragma once

#include <vector>

#include <Eigen/Dense>

#include "spinid/graph.hpp"
#include "spinid/model.hpp"
#include "spinid/spectral.hpp"

namespace spinid {

// What reconstruction consumes: level spacings relative to the ground level
// and eigenvector components on the gateway rows. Column signs are
// arbitrary; the algorithm is invariant under flipping any column.
struct Eigendata {
    std::vector<int> gateway;         // ascending
    std::vector<double> frequencies;  // ascending
    Eigen::MatrixXd components;       // |gateway| x lines
};

Eigendata eigendata_from_spectrum(const Eigensystem& eig, const std::vector<int>& gateway);
Eigendata eigendata_from_estimate(const EigendataEstimate& est);

struct ReconstructOptions {
    // Data-consistency gates, all relative to the frequency scale where a
    // scale applies. Loosen these for shot-sampled input.
    double nonedge_rel = 1e-6;
    double row_norm_tol = 1e-6;
    double zero_pivot_rel = 1e-9;
    // Known Hermitian block already added to the gateway (a lifting
    // perturbation). Rows/cols follow the gateway list; empty means none.
    Eigen::MatrixXd gateway_adjustment;
};

// Progressive solve state. `couplings` and `shifted_diag` hold raw values
// for the Hamiltonian the data came from, adjustment included; the final
// result subtracts the adjustment again.
struct ReconstructionState {
    GraphTopology topology;
    std::vector<int> gateway;
    std::vector<double> omega;
    Eigen::MatrixXd rows;          // |V| x lines, valid where known
    std::vector<char> known;       // per node
    Eigen::VectorXd shifted_diag;  // per node, valid where known
    Eigen::MatrixXd couplings;     // |V| x |V| symmetric raw elements
    Eigen::MatrixXd adjustment;    // |V| x |V|, zero outside the gateway block
    double omega_scale = 0.0;

    std::vector<double> pivot_magnitudes;
    double max_step_inconsistency = 0.0;
    double max_nonedge_residual = 0.0;
    double max_row_norm_residue = 0.0;
};

struct ReconstructionDiagnostics {
    double min_pivot = 0.0;
    std::vector<double> pivot_magnitudes;
    double max_step_inconsistency = 0.0;
    double max_nonedge_residual = 0.0;
    double max_row_norm_residue = 0.0;
    double trace_identity_mismatch = 0.0;
    int sign_violations = 0;
};

struct ReconstructionResult {
    GraphTopology topology;
    std::vector<double> edge_elements;   // J_mn per topology edge order
    std::vector<double> edge_couplings;  // c_mn = J_mn / 2
    Eigen::VectorXd fields;
    double ground_energy = 0.0;
    std::vector<double> energies;  // absolute levels, ascending
    ForcingSequence sequence;
    ReconstructionDiagnostics diagnostics;
};

// Stage 1: matrix elements between gateway sites via the spectral sums
// J_mn = sum_j w_j W_m W_n. Non-edges inside the gateway must come out at
// the adjustment value (zero without a lift); violations throw.
ReconstructionState couplings_within_gateway(const Eigendata& data,
                                             const GraphTopology& topology,
                                             const ReconstructOptions& options = {});

// Stage 2: one forcing step. The infector must have exactly one unknown
// neighbor left; its row, shifted diagonal, the pivot element and the
// elements to all other known neighbors are filled in.
void propagate_step(ReconstructionState& state, const ForcingStep& step,
                    SignConvention convention, const ReconstructOptions& options = {});

// Stage 3, after every node is known.
Eigen::VectorXd recover_fields(const ReconstructionState& state, double delta);
double recover_ground_energy(const ReconstructionState& state, double delta,
                             const Eigen::VectorXd& fields);

// Whole chain: forcing schedule, gateway block, propagation, fields, ground
// energy. Needs one line per node.
ReconstructionResult full_reconstruct(const Eigendata& data, const GraphTopology& topology,
                                      SignConvention convention, double delta,
                                      const ReconstructOptions& options = {});

}  // namespace spinid
