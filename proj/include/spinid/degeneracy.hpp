#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "spinid/graph.hpp"
#include "spinid/model.hpp"

namespace spinid {

// A cluster of eigenvalues closer than the grouping tolerance, with the
// eigenvector components of its members on the gateway rows.
struct DegenerateGroup {
    double eigenvalue = 0.0;          // mean of the members
    std::vector<int> members;         // eigenvalue indices, ascending
    Eigen::MatrixXd gateway_block;    // |gateway| x multiplicity
};

// group_tol <= 0 picks 1e-8 * spectral spread.
std::vector<DegenerateGroup> find_degeneracies(const Eigensystem& eig,
                                               const std::vector<int>& gateway,
                                               double group_tol = 0.0);

struct RankCheck {
    bool full_rank = false;
    bool multiplicity_ok = false;     // multiplicity <= gateway size
    Eigen::VectorXd singular_values;  // of the gateway block
};

// An infecting gateway guarantees full column rank of every degenerate
// block; a failure here means the gateway assumption is broken.
RankCheck check_rank(const DegenerateGroup& group);

struct LiftOperator {
    Eigen::MatrixXd block;   // |gateway| x |gateway|, symmetric, unit spectral norm
    double scale = 0.0;      // applied term is scale * block
    std::string provenance;  // "constructive" or "random_field"
};

struct LiftOutcome {
    std::vector<LiftOperator> operators;
    Eigen::MatrixXd total_block;       // sum of applied scale*block terms
    SingleExcitationMatrix lifted;     // original plus the embedded total block
    Eigensystem lifted_spectrum;
    double min_gap_before = 0.0;       // smallest positive level gap
    double min_gap_after = 0.0;
    int iterations = 0;                // groups split / retries used
    double max_split_deviation = 0.0;  // worst first-order splitting error seen
};

struct ConstructiveLiftOptions {
    double group_tol = 0.0;        // <= 0: auto from the spread
    double lambda_fraction = 0.5;  // of min(current gap, remaining budget)
    int max_iterations = 0;        // <= 0: twice the node count
    double rank_rel_tol = 1e-10;
};

// Splits every degenerate cluster with gateway-supported operators built
// from the cluster's own block: distinct first-order shifts for the
// members, no mixing between clusters at first order, vacuum untouched.
// Scales are budgeted so the total perturbation norm stays strictly below
// the original smallest positive gap.
LiftOutcome constructive_lift(const SingleExcitationMatrix& ham, const GatewaySet& gateway,
                              const ConstructiveLiftOptions& options = {});

struct RandomLiftOptions {
    double group_tol = 0.0;
    double strength = 0.0;  // <= 0: quarter of the smallest positive gap
    std::uint64_t seed = 0;
    int max_retries = 32;
};

// Random diagonal fields on the gateway sites, redrawn until the spectrum
// separates. Returns immediately with a zero operator when nothing is
// degenerate. Throws "exhausted" when no draw works.
LiftOutcome random_field_lift(const SingleExcitationMatrix& ham, const GatewaySet& gateway,
                              const RandomLiftOptions& options = {});

}  // namespace spinid
