// Mixing coefficients of a discretized copula chain and the lower-envelope
// certificate for exponential rho-mixing.
//
// For the cell transition matrix Q of an n-grid:
//   rho_k  = largest singular value of Q^k on the mean-zero subspace,
//            i.e. of Q^k - J/n (the constant direction deflated away);
//   beta_k = (1/(2 n^2)) sum_ij |n Q^k[i][j] - 1|;
//   phi_k  = max_i (1/(2n)) sum_j |n Q^k[i][j] - 1|.
// beta/phi are exact between the cell sigma-algebras and lower bounds for
// the continuous coefficients.  The certificate: whenever the AC density
// satisfies c(x,y) >= eps1(x) + eps2(y), rho_1 <= 1 - (int eps1 + int eps2)/2.

#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "copmix/copula.hpp"
#include "copmix/errors.hpp"
#include "copmix/quadrature.hpp"
#include "copmix/rng.hpp"
#include "copmix/transition.hpp"

namespace copmix {

namespace detail {

// Dense SVD below this size; power iteration on A^T A above it.
constexpr int kSvdCrossover = 400;

inline double top_singular_value_power_iteration(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    UniformStream stream(0x5eedULL);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = stream.next() - 0.5;
    v.array() -= v.mean(); // start inside the deflated subspace
    double norm = v.norm();
    if (norm == 0.0) {
        v.setLinSpaced(n, -1.0, 1.0);
        norm = v.norm();
    }
    v /= norm;

    double sigma = 0.0;
    double residual = std::numeric_limits<double>::infinity();
    constexpr int kMaxIters = 100000;
    for (int iter = 0; iter < kMaxIters; ++iter) {
        Eigen::VectorXd y = a * v;
        const double sigma_new = y.norm();
        if (sigma_new == 0.0) return 0.0;
        Eigen::VectorXd w = a.transpose() * y;
        residual = (w - sigma_new * sigma_new * v).norm();
        const double wnorm = w.norm();
        if (wnorm == 0.0) return 0.0;
        v = w / wnorm;
        if (std::fabs(sigma_new - sigma) <= 1e-10 * std::max(1.0, sigma_new)) {
            return sigma_new;
        }
        sigma = sigma_new;
    }
    throw NumericFailure("rho_n: power iteration did not converge", residual);
}

inline double deflated_operator_norm(const Eigen::MatrixXd& q) {
    const int n = static_cast<int>(q.rows());
    Eigen::MatrixXd deflated = q.array() - 1.0 / n;
    if (n <= kSvdCrossover) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(deflated);
        return svd.singularValues()(0);
    }
    return top_singular_value_power_iteration(deflated);
}

} // namespace detail

// Maximal-correlation estimate at lag k: the second singular value of the
// doubly stochastic Q^k (the first is 1, carried by the constants).
inline double rho_n(const TransitionMatrix& q, int lag) {
    if (lag < 1) throw InvalidParameter("rho_n: lag must be >= 1");
    const TransitionMatrix qk = lag == 1 ? q : q.power(lag);
    return detail::deflated_operator_norm(qk.matrix());
}

// Absolute-regularity estimate between the cell sigma-algebras.
inline double beta_n(const TransitionMatrix& q, int lag) {
    if (lag < 1) throw InvalidParameter("beta_n: lag must be >= 1");
    const TransitionMatrix qk = lag == 1 ? q : q.power(lag);
    const int n = qk.size();
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) total += std::fabs(n * qk(i, j) - 1.0);
    }
    return total / (2.0 * n * n);
}

// Uniform-mixing estimate; the essential supremum is realized as a max over
// cells, exact for piecewise-constant grid kernels.
inline double phi_n(const TransitionMatrix& q, int lag) {
    if (lag < 1) throw InvalidParameter("phi_n: lag must be >= 1");
    const TransitionMatrix qk = lag == 1 ? q : q.power(lag);
    const int n = qk.size();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += std::fabs(n * qk(i, j) - 1.0);
        worst = std::max(worst, row / (2.0 * n));
    }
    return worst;
}

// Certified upper bound on rho_1 given the envelope integrals
// int eps1 and int eps2 with c(x,y) >= eps1(x) + eps2(y).
inline double theorem2_bound(double int_eps1, double int_eps2) {
    if (!(int_eps1 >= 0.0 && int_eps2 >= 0.0)) {
        throw InvalidEnvelope("theorem2_bound: envelope integrals must be nonnegative");
    }
    if (int_eps1 + int_eps2 > 2.0) {
        throw InvalidEnvelope("theorem2_bound: envelope integrals exceed total mass 2");
    }
    return 1.0 - 0.5 * (int_eps1 + int_eps2);
}

// Envelope functions supplied as tables on uniform grids over [0,1];
// trapezoid-integrated before applying the bound.
inline double theorem2_bound_from_tables(const std::vector<double>& eps1,
                                         const std::vector<double>& eps2) {
    for (const auto* table : {&eps1, &eps2}) {
        for (double v : *table) {
            if (!(v >= 0.0)) throw InvalidEnvelope("theorem2_bound: envelope values must be nonnegative");
        }
    }
    return theorem2_bound(trapezoid_table(eps1, 0.0, 1.0), trapezoid_table(eps2, 0.0, 1.0));
}

struct MinorantCertificate {
    double epsilon = 0.0; // constant envelope: c(x,y) >= epsilon on the grid
    double bound = 1.0;   // 1 - epsilon/2
};

// Scans the AC density on the cell-midpoint grid for its minimum and turns it
// into a constant-envelope certificate (eps1 = eps2 = epsilon/2).
inline MinorantCertificate extract_constant_minorant(const Copula& copula, int grid_n) {
    if (grid_n < 2) throw InvalidParameter("extract_constant_minorant: grid_n must be >= 2");
    double eps = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_n; ++i) {
        const double u = (i + 0.5) / grid_n;
        for (int j = 0; j < grid_n; ++j) {
            eps = std::min(eps, copula.ac_density(u, (j + 0.5) / grid_n));
        }
    }
    eps = std::max(eps, 0.0);
    // A mixture carrying independence weight lambda has AC density >= lambda
    // everywhere; the scan must not report less.
    const double lambda = copula.independence_weight();
    if (eps < lambda - 1e-9) {
        throw NumericFailure("extract_constant_minorant: grid minimum fell below the "
                             "independence weight of the mixture", lambda - eps);
    }
    return {eps, theorem2_bound(0.5 * eps, 0.5 * eps)};
}

// Per-lag margins of the inequality chain
//   beta_k <= phi_k,  rho_k <= 2 sqrt(phi_k),  rho_k <= rho_1^k.
// margin = rhs - lhs; an inequality holds when its margin >= -slack.
struct AuditFlags {
    std::vector<int> lags;
    std::vector<double> beta_le_phi;
    std::vector<double> rho_le_2sqrtphi;
    std::vector<double> rho_submult;
    double slack = 1e-8;
    bool pass = true;
};

namespace detail {

inline AuditFlags audit_from_values(const std::vector<int>& lags, double rho1,
                                    const std::vector<double>& rho,
                                    const std::vector<double>& beta,
                                    const std::vector<double>& phi) {
    AuditFlags flags;
    flags.lags = lags;
    for (std::size_t i = 0; i < lags.size(); ++i) {
        const double m1 = phi[i] - beta[i];
        const double m2 = 2.0 * std::sqrt(std::max(phi[i], 0.0)) - rho[i];
        const double m3 = std::pow(rho1, lags[i]) - rho[i];
        flags.beta_le_phi.push_back(m1);
        flags.rho_le_2sqrtphi.push_back(m2);
        flags.rho_submult.push_back(m3);
        flags.pass = flags.pass && m1 >= -flags.slack && m2 >= -flags.slack && m3 >= -flags.slack;
    }
    return flags;
}

} // namespace detail

inline AuditFlags inequality_audit(const TransitionMatrix& q, int max_lag) {
    if (max_lag < 1) throw InvalidParameter("inequality_audit: max_lag must be >= 1");
    std::vector<int> lags;
    std::vector<double> rho, beta, phi;
    TransitionMatrix qk = q.power(1);
    for (int k = 1; k <= max_lag; ++k) {
        if (k > 1) qk = TransitionMatrix::from_matrix(qk.matrix() * q.matrix());
        lags.push_back(k);
        rho.push_back(detail::deflated_operator_norm(qk.matrix()));
        beta.push_back(beta_n(qk, 1));
        phi.push_back(phi_n(qk, 1));
    }
    return detail::audit_from_values(lags, rho.front(), rho, beta, phi);
}

// Everything the CLI reports for one copula: per-lag estimates, the
// constant-minorant certificate and the audit margins.
struct MixingReport {
    int grid_n = 0;
    std::vector<int> lags;
    std::vector<double> rho;
    std::vector<double> beta;
    std::vector<double> phi;
    double rho1 = 0.0;        // always computed; anchors the submultiplicativity audit
    double rho1_bound = 1.0;  // constant-minorant certificate (1 when vacuous)
    double min_density = 0.0; // grid minimum of the AC density
    bool singular_part = false;
    AuditFlags audit;
};

inline MixingReport compute_mixing_report(const Copula& copula, int grid_n,
                                          const std::vector<int>& lags) {
    if (lags.empty()) throw InvalidParameter("compute_mixing_report: need at least one lag");
    for (int k : lags) {
        if (k < 1) throw InvalidParameter("compute_mixing_report: lags must be positive");
    }
    const TransitionMatrix q = TransitionMatrix::discretize(copula, grid_n);

    MixingReport report;
    report.grid_n = grid_n;
    report.lags = lags;
    report.rho1 = rho_n(q, 1);
    for (int k : lags) {
        const TransitionMatrix qk = q.power(k);
        report.rho.push_back(detail::deflated_operator_norm(qk.matrix()));
        report.beta.push_back(beta_n(qk, 1));
        report.phi.push_back(phi_n(qk, 1));
    }
    const MinorantCertificate cert = extract_constant_minorant(copula, grid_n);
    report.rho1_bound = cert.bound;
    report.min_density = cert.epsilon;
    report.singular_part = copula.has_singular_part();
    report.audit = detail::audit_from_values(lags, report.rho1, report.rho, report.beta, report.phi);
    return report;
}

} // namespace copmix
