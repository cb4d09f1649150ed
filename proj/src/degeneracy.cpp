#include "spinid/degeneracy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "spinid/error.hpp"

namespace spinid {

namespace {

double auto_group_tol(const Eigensystem& eig, double group_tol) {
    if (group_tol > 0.0) return group_tol;
    double spread = eig.eigenvalues(eig.eigenvalues.size() - 1) - eig.eigenvalues(0);
    return 1e-8 * std::max(spread, 1.0);
}

// Smallest gap between adjacent distinct levels (0 if all coincide).
double min_positive_gap(const Eigensystem& eig, double tol) {
    double best = 0.0;
    for (int j = 1; j < eig.eigenvalues.size(); ++j) {
        double gap = eig.eigenvalues(j) - eig.eigenvalues(j - 1);
        if (gap > tol && (best == 0.0 || gap < best)) best = gap;
    }
    return best;
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return h;
}

void embed_block(Eigen::MatrixXd& m, const std::vector<int>& gateway,
                 const Eigen::MatrixXd& block, double scale) {
    for (std::size_t a = 0; a < gateway.size(); ++a)
        for (std::size_t b = 0; b < gateway.size(); ++b)
            m(gateway[a], gateway[b]) +=
                scale * block(static_cast<int>(a), static_cast<int>(b));
}

}  // namespace

std::vector<DegenerateGroup> find_degeneracies(const Eigensystem& eig,
                                               const std::vector<int>& gateway,
                                               double group_tol) {
    if (eig.eigenvalues.size() == 0)
        throw Error("invalid_config", "empty spectrum");
    for (int n : gateway)
        if (n < 0 || n >= eig.vectors.rows())
            throw Error("invalid_config", "gateway node out of range");

    double tol = auto_group_tol(eig, group_tol);
    std::vector<DegenerateGroup> out;
    int j = 0;
    while (j < eig.eigenvalues.size()) {
        int k = j;
        while (k + 1 < eig.eigenvalues.size() &&
               eig.eigenvalues(k + 1) - eig.eigenvalues(k) <= tol)
            ++k;
        if (k > j) {
            DegenerateGroup g;
            for (int i = j; i <= k; ++i) g.members.push_back(i);
            double mean = 0.0;
            for (int i : g.members) mean += eig.eigenvalues(i);
            g.eigenvalue = mean / static_cast<double>(g.members.size());
            g.gateway_block.resize(static_cast<int>(gateway.size()),
                                   static_cast<int>(g.members.size()));
            for (std::size_t r = 0; r < gateway.size(); ++r)
                for (std::size_t c = 0; c < g.members.size(); ++c)
                    g.gateway_block(static_cast<int>(r), static_cast<int>(c)) =
                        eig.vectors(gateway[r], g.members[c]);
            out.push_back(std::move(g));
        }
        j = k + 1;
    }
    return out;
}

RankCheck check_rank(const DegenerateGroup& group) {
    RankCheck out;
    out.multiplicity_ok = group.gateway_block.cols() <= group.gateway_block.rows();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(group.gateway_block);
    out.singular_values = svd.singularValues();
    double smax = out.singular_values(0);
    double smin = out.singular_values(out.singular_values.size() - 1);
    out.full_rank = out.multiplicity_ok && smin > 1e-10 * std::max(smax, 1e-300);
    return out;
}

LiftOutcome constructive_lift(const SingleExcitationMatrix& ham, const GatewaySet& gateway,
                              const ConstructiveLiftOptions& options) {
    const int nc = static_cast<int>(gateway.members.size());
    LiftOutcome out;
    out.total_block = Eigen::MatrixXd::Zero(nc, nc);
    out.lifted = ham;

    Eigensystem eig = eigendecompose(ham);
    double tol = auto_group_tol(eig, options.group_tol);
    out.min_gap_before = min_positive_gap(eig, tol);

    const int max_iter =
        options.max_iterations > 0 ? options.max_iterations : 2 * static_cast<int>(ham.m.rows());
    const double budget = out.min_gap_before;
    double spent = 0.0;

    while (true) {
        std::vector<DegenerateGroup> groups =
            find_degeneracies(eig, gateway.members, options.group_tol > 0.0 ? options.group_tol
                                                                            : tol);
        if (groups.empty()) break;
        if (out.iterations >= max_iter)
            throw Error("no_progress",
                        "degeneracies persist after " + std::to_string(out.iterations) +
                            " lifting rounds");

        const DegenerateGroup& g = groups.front();
        RankCheck rank = check_rank(g);
        if (!rank.multiplicity_ok)
            throw Error("rank_deficient",
                        "level multiplicity " + std::to_string(g.members.size()) +
                            " exceeds the gateway size; no gateway perturbation can split it");
        double smax = rank.singular_values(0);
        double smin = rank.singular_values(rank.singular_values.size() - 1);
        if (!(smin > options.rank_rel_tol * std::max(smax, 1e-300)))
            throw Error("rank_deficient",
                        "gateway block of the degenerate level is rank deficient; "
                        "the gateway does not resolve this level");

        // Build a gateway-supported operator whose restriction to the
        // degenerate subspace has the prescribed distinct eigenvalues
        // 1..multiplicity: with the thin factorization Phi = Q R this is
        // B = Q R^-T diag(eps) R^-1 Q^T, since Phi^T B Phi = diag(eps).
        const int mult = static_cast<int>(g.members.size());
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(g.gateway_block);
        Eigen::MatrixXd q = Eigen::MatrixXd::Identity(nc, mult);
        q = qr.householderQ() * q;
        Eigen::MatrixXd r = qr.matrixQR().topRows(mult).triangularView<Eigen::Upper>();
        Eigen::VectorXd eps(mult);
        for (int d = 0; d < mult; ++d) eps(d) = static_cast<double>(d + 1);
        Eigen::MatrixXd rinv = r.triangularView<Eigen::Upper>().solve(
            Eigen::MatrixXd::Identity(mult, mult));
        Eigen::MatrixXd inner = rinv.transpose() * eps.asDiagonal() * rinv;
        Eigen::MatrixXd block = q * inner * q.transpose();
        block = 0.5 * (block + block.transpose());

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> bs(block);
        double bnorm = std::max(std::abs(bs.eigenvalues()(0)),
                                std::abs(bs.eigenvalues()(bs.eigenvalues().size() - 1)));
        if (!(bnorm > 0.0))
            throw Error("rank_deficient", "lifting operator collapsed to zero");
        block /= bnorm;

        double current_gap = min_positive_gap(eig, tol);
        double remaining = budget - spent;
        double lambda = options.lambda_fraction * std::min(current_gap, remaining);
        if (!(lambda > 0.0))
            throw Error("no_progress", "lifting budget exhausted before separation");

        embed_block(out.lifted.m, gateway.members, block, lambda);
        out.total_block += lambda * block;
        spent += lambda;
        out.operators.push_back({block, lambda, "constructive"});
        ++out.iterations;

        Eigensystem next = eigendecompose(out.lifted);
        // First-order prediction: member d of the group moves to
        // E + lambda * eps_d / bnorm. Compare against the nearest actual
        // level to bound the splitting error.
        for (int d = 0; d < mult; ++d) {
            double predicted = g.eigenvalue + lambda * eps(d) / bnorm;
            double nearest = std::numeric_limits<double>::infinity();
            for (int i = 0; i < next.eigenvalues.size(); ++i)
                nearest = std::min(nearest, std::abs(next.eigenvalues(i) - predicted));
            out.max_split_deviation = std::max(out.max_split_deviation, nearest);
        }
        eig = std::move(next);
    }

    out.lifted_spectrum = std::move(eig);
    out.min_gap_after = min_positive_gap(out.lifted_spectrum, tol);
    return out;
}

LiftOutcome random_field_lift(const SingleExcitationMatrix& ham, const GatewaySet& gateway,
                              const RandomLiftOptions& options) {
    const int nc = static_cast<int>(gateway.members.size());
    LiftOutcome out;
    out.total_block = Eigen::MatrixXd::Zero(nc, nc);
    out.lifted = ham;

    Eigensystem eig = eigendecompose(ham);
    double tol = auto_group_tol(eig, options.group_tol);
    out.min_gap_before = min_positive_gap(eig, tol);
    out.lifted_spectrum = eig;
    out.min_gap_after = out.min_gap_before;
    if (find_degeneracies(eig, gateway.members, options.group_tol > 0.0 ? options.group_tol : tol)
            .empty())
        return out;  // nothing to lift

    double strength = options.strength;
    if (strength <= 0.0) strength = 0.25 * out.min_gap_before;
    if (out.min_gap_before > 0.0 && strength > 0.5 * out.min_gap_before)
        throw Error("invalid_config",
                    "lift strength " + std::to_string(strength) +
                        " exceeds half the smallest level gap " +
                        std::to_string(out.min_gap_before));

    for (int attempt = 0; attempt < options.max_retries; ++attempt) {
        std::mt19937_64 eng(mix(options.seed, static_cast<std::uint64_t>(attempt)));
        std::uniform_real_distribution<double> dist(-strength, strength);
        Eigen::VectorXd draw(nc);
        for (int i = 0; i < nc; ++i) draw(i) = dist(eng);

        SingleExcitationMatrix trial = ham;
        for (int i = 0; i < nc; ++i) trial.m(gateway.members[i], gateway.members[i]) += draw(i);
        Eigensystem teig = eigendecompose(trial);
        if (!find_degeneracies(teig, gateway.members,
                               options.group_tol > 0.0 ? options.group_tol : tol)
                 .empty())
            continue;

        double peak = draw.cwiseAbs().maxCoeff();
        LiftOperator op;
        op.scale = peak;
        op.block = Eigen::MatrixXd(
            (peak > 0.0 ? (draw / peak).eval() : draw).asDiagonal());
        op.provenance = "random_field";
        out.operators.push_back(std::move(op));
        out.total_block = Eigen::MatrixXd(draw.asDiagonal());
        out.lifted = std::move(trial);
        out.lifted_spectrum = std::move(teig);
        out.min_gap_after = min_positive_gap(out.lifted_spectrum, tol);
        out.iterations = attempt + 1;
        return out;
    }
    throw Error("exhausted",
                "no random gateway field separated the spectrum in " +
                    std::to_string(options.max_retries) + " draws");
}

}  // namespace spinid
