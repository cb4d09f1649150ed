#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spinid/graph.hpp"

namespace spinid {

// Sign restriction on the couplings. The reconstruction recovers coupling
// magnitudes from vector norms, so the sign must be declared up front;
// networks mixing signs are rejected.
enum class SignConvention { ferromagnetic, antiferromagnetic };

SignConvention sign_convention_from_string(const std::string& s);
std::string to_string(SignConvention c);

// A spin-1/2 network: XXZ-type couplings c on the edges of a known graph,
// local z-fields b on the nodes, anisotropy delta. Ferromagnetic convention
// requires every c < 0, antiferromagnetic every c > 0.
struct SpinNetwork {
    GraphTopology topology;
    std::vector<double> couplings;  // c per edge, aligned with topology.edges()
    std::vector<double> fields;     // b per node
    double delta = 0.0;
    SignConvention convention = SignConvention::ferromagnetic;

    static SpinNetwork checked(GraphTopology topology, std::vector<double> couplings,
                               std::vector<double> fields, double delta,
                               SignConvention convention);

    double coupling(int m, int n) const;  // 0 for non-edges
    double coupling_sum() const;          // S = sum of c over edges
    double field_sum() const;             // B = sum of b over nodes
    // Energy of the all-down state: delta*S - B.
    double ground_energy() const;
};

// Restriction of the Hamiltonian to the one-excitation subspace, in the site
// basis. With standard Pauli operators the matrix elements are
//
//   M[m][n] = 2*c_mn                                   for edges (m,n),
//   M[m][m] = delta*(S - 2*sum_{n~m} c_mn) + 2*b_m - B,
//
// so the off-diagonal entries are J_mn = 2*c_mn, twice the coupling. Both J
// and c appear in outputs; every formula here is pinned by the full-space
// oracle test rather than by convention bookkeeping.
struct SingleExcitationMatrix {
    Eigen::MatrixXd m;           // |V| x |V| real symmetric
    double ground_energy = 0.0;  // vacuum expectation, carried for shifting
};

// Dense 2^N oracle Hamiltonian. Basis index bit n holds the state of spin n
// (set bit = up); the one-excitation basis states are the indices 1<<n.
struct FullSpaceMatrix {
    Eigen::MatrixXd m;
    int spins = 0;
};

struct Eigensystem {
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::MatrixXd vectors;      // column j is the eigenvector of E_j
    double ground_energy = 0.0;

    // omega_j = E_j - E0, the only energies observable from the gateway.
    Eigen::VectorXd shifted() const { return eigenvalues.array() - ground_energy; }
};

SingleExcitationMatrix build_single_excitation(const SpinNetwork& net);

// Full 2^N construction; the oracle the one-excitation builder is tested
// against. Throws "too_large" above 12 spins.
FullSpaceMatrix build_full_space(const SpinNetwork& net);

SingleExcitationMatrix project_full_to_single(const FullSpaceMatrix& full);

// Symmetric eigendecomposition with a deterministic sign gauge: in each
// column the first component of largest magnitude is made positive.
Eigensystem eigendecompose(const SingleExcitationMatrix& matrix);

// Gershgorin-type bound on max_j |E_j - E0| given entrywise bounds
// |c| <= max_coupling, |b| <= max_field. Sets the Nyquist rate for sampling.
double spectral_radius_bound(double max_coupling, double max_field,
                             const GraphTopology& topology, double delta);

}  // namespace spinid
