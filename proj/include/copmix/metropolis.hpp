// Metropolis-Hastings chains and their copula.
//
// For a target density f with CDF F and a proposal q(x,y), the chain's copula
// splits into an absolutely continuous part with density
//   c(u,v) = q(F^{-1}(u), F^{-1}(v)) / f(F^{-1}(v)) * alpha(F^{-1}(u), F^{-1}(v))
// (a symmetric function: MH chains are reversible) and a singular part on the
// diagonal carrying the rejection mass
//   s(u) = 1 - integral_domain q(x,y) alpha(x,y) dy,   x = F^{-1}(u).
//
// Certificates: with a = inf q/f (independent proposal) or
// a = inf_{x,y} q(x,y)/f(y), k = sup q (general bounded proposal), the
// envelope eps2(v) = a*min(a f(F^{-1}(v))/q(F^{-1}(v)), 1), respectively
// a*min(a f(F^{-1}(v))/k, 1), certifies rho_1 <= 1 - (1/2) int eps2 < 1
// whenever a > 0.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "copmix/errors.hpp"
#include "copmix/marginal.hpp"
#include "copmix/quadrature.hpp"
#include "copmix/rng.hpp"
#include "copmix/transition.hpp"

namespace copmix {

// State-dependent proposal supplied as a density kernel plus an inverse-CDF
// sampler: sample(x, u) maps a uniform draw u to a proposed state.
struct GeneralKernel {
    std::function<double(double, double)> density; // q(x, y)
    std::function<double(double, double)> sample;  // (x, u) -> y
    std::string name = "general";
};

struct MhCertificate {
    double a = 0.0;                 // minorization constant: q >= a f on the grid
    std::optional<double> k;        // sup q (general proposals only)
    double rho1_bound = 1.0;        // 1 - (1/2) int eps2
    bool certified = false;
    std::string flag;               // "no minorization" / "k infinite" when not certified
    int axis_points = 0;            // grid resolution behind the inf/sup estimates
    double min_target_pdf = 0.0;    // grid min of f: evidence for the uniform-mixing hypothesis
};

class MhModel {
public:
    static MhModel independent(MarginalModel target, MarginalModel proposal) {
        if (std::fabs(proposal.lo() - target.lo()) > 1e-12 ||
            std::fabs(proposal.hi() - target.hi()) > 1e-12) {
            throw InvalidParameter("mh: independent proposal must live on the target domain");
        }
        return MhModel(std::move(target), IndependentProposal{std::move(proposal)});
    }

    // Uniform random-walk proposal on [x-h, x+h] clipped to the domain.
    static MhModel random_walk_uniform(MarginalModel target, double h) {
        if (!(h > 0.0) || h >= target.hi() - target.lo()) {
            throw InvalidParameter("mh: random-walk half-width must satisfy 0 < h < domain length");
        }
        const double lo = target.lo(), hi = target.hi();
        GeneralKernel kernel;
        kernel.density = [lo, hi, h](double x, double y) {
            const double a = std::max(lo, x - h), b = std::min(hi, x + h);
            if (y < a || y > b) return 0.0;
            return 1.0 / (b - a);
        };
        kernel.sample = [lo, hi, h](double x, double u) {
            const double a = std::max(lo, x - h), b = std::min(hi, x + h);
            return a + u * (b - a);
        };
        std::ostringstream name;
        name << "rw-uniform:h=" << h;
        kernel.name = name.str();
        return MhModel(std::move(target), std::move(kernel));
    }

    static MhModel general(MarginalModel target, GeneralKernel kernel) {
        if (!kernel.density || !kernel.sample) {
            throw InvalidParameter("mh: general proposal needs both a density and a sampler");
        }
        return MhModel(std::move(target), std::move(kernel));
    }

    bool is_independent() const { return std::holds_alternative<IndependentProposal>(proposal_); }
    const MarginalModel& target() const { return target_; }

    const MarginalModel& independent_proposal() const {
        return std::get<IndependentProposal>(proposal_).marginal;
    }

    std::string proposal_name() const {
        if (is_independent()) return "indep:" + independent_proposal().label();
        return std::get<GeneralKernel>(proposal_).name;
    }

    double proposal_density(double x, double y) const {
        if (y < target_.lo() || y > target_.hi()) return 0.0;
        if (is_independent()) return independent_proposal().pdf(y);
        return std::get<GeneralKernel>(proposal_).density(x, y);
    }

    double sample_proposal(double x, double u) const {
        if (is_independent()) return independent_proposal().quantile(u);
        return std::get<GeneralKernel>(proposal_).sample(x, u);
    }

    // alpha(x, y) = min{ f(y) q(y,x) / (f(x) q(x,y)), 1 }.
    double acceptance(double x, double y) const {
        const double fx = target_.pdf(x);
        if (fx <= 0.0) throw DegeneratePoint("acceptance: target density vanishes at x");
        const double qxy = proposal_density(x, y);
        if (qxy <= 0.0) throw DegeneratePoint("acceptance: proposal density vanishes at (x,y)");
        const double fy = target_.pdf(y);
        const double qyx = proposal_density(y, x);
        return std::min(1.0, (fy * qyx) / (fx * qxy));
    }

    // Density of the absolutely continuous copula part at (u, v).
    double copula_ac_density(double u, double v) const {
        const double x = target_.quantile(u);
        const double y = target_.quantile(v);
        const double fy = target_.pdf(y);
        if (fy <= 0.0) throw DegeneratePoint("mh copula density: target density vanishes at F^{-1}(v)");
        const double qxy = proposal_density(x, y);
        if (qxy <= 0.0) return 0.0; // no proposal mass, no AC mass
        return qxy / fy * acceptance(x, y);
    }

    // Probability of holding at the current state x = F^{-1}(u):
    // 1 - integral q(x,y) alpha(x,y) dy, composite Simpson on `nodes` points.
    double rejection_mass(double u, int nodes = 2000) const {
        const double x = target_.quantile(u);
        const double fx = target_.pdf(x);
        if (fx <= 0.0) throw DegeneratePoint("rejection mass: target density vanishes at F^{-1}(u)");
        auto integrand = [&](double y) {
            const double qxy = proposal_density(x, y);
            if (qxy <= 0.0) return 0.0;
            const double fy = target_.pdf(y);
            const double qyx = proposal_density(y, x);
            const double alpha = std::min(1.0, (fy * qyx) / (fx * qxy));
            return qxy * alpha;
        };
        const double accepted = composite_simpson(integrand, target_.lo(), target_.hi(), nodes);
        const double mass = 1.0 - accepted;
        if (mass < -1e-6 || mass > 1.0 + 1e-6) {
            throw NumericFailure("rejection mass: quadrature left [0,1]", mass);
        }
        return std::clamp(mass, 0.0, 1.0);
    }

    MhCertificate certify(int axis_points = 1025) const {
        return is_independent() ? certify_independent(axis_points) : certify_general(axis_points);
    }

    struct Path {
        std::vector<double> states; // length steps + 1, including x0
        long accepted = 0;
        std::uint64_t seed = 0;
    };

    // Propose from q(x,.), accept with probability alpha; two uniform draws
    // per step (proposal, acceptance), so paths are seed-deterministic.
    Path sample_path(double x0, long steps, std::uint64_t seed) const {
        if (steps < 1) throw InvalidParameter("mh sample: steps must be >= 1");
        if (x0 < target_.lo() || x0 > target_.hi() || target_.pdf(x0) <= 0.0) {
            throw ConfigError("mh sample: x0 must lie in the domain with f(x0) > 0");
        }
        Path path;
        path.seed = seed;
        path.states.reserve(static_cast<std::size_t>(steps) + 1);
        path.states.push_back(x0);
        UniformStream stream(seed);
        double x = x0;
        for (long t = 0; t < steps; ++t) {
            const double y = sample_proposal(x, stream.next());
            const double u = stream.next();
            // Guarded ratio: a vanishing denominator means the move is
            // impossible to balance, so it is rejected.
            const double fx = target_.pdf(x);
            const double qxy = proposal_density(x, y);
            double alpha = 0.0;
            if (fx > 0.0 && qxy > 0.0) {
                alpha = std::min(1.0, (target_.pdf(y) * proposal_density(y, x)) / (fx * qxy));
            }
            if (u <= alpha) {
                x = y;
                ++path.accepted;
            }
            path.states.push_back(x);
        }
        return path;
    }

    // Cell transition matrix of the MH copula: midpoint quadrature of the AC
    // density plus the rejection mass on the diagonal, then balanced to
    // doubly stochastic (the margins of the exact copula are uniform; the
    // balancing only removes midpoint-quadrature error).
    TransitionMatrix discretize_copula(int n) const {
        if (n < 2) throw InvalidParameter("mh discretize: grid size must be >= 2");
        Eigen::MatrixXd q(n, n);
        detail::parallel_rows(n, [&](int i) {
            const double u = (i + 0.5) / n;
            for (int j = 0; j < n; ++j) {
                q(i, j) = copula_ac_density(u, (j + 0.5) / n) / n;
            }
            q(i, i) += rejection_mass(u);
        });

        double adjustment = 0.0;
        for (int iter = 0; iter < 5000; ++iter) {
            double worst = 0.0;
            for (int i = 0; i < n; ++i) {
                const double s = q.row(i).sum();
                worst = std::max(worst, std::fabs(s - 1.0));
                if (s > 0.0) q.row(i) /= s;
            }
            for (int j = 0; j < n; ++j) {
                const double s = q.col(j).sum();
                worst = std::max(worst, std::fabs(s - 1.0));
                if (s > 0.0) q.col(j) /= s;
            }
            if (iter == 0) adjustment = worst;
            if (worst < 1e-13) break;
        }
        // One final row sweep so both margins close within 1e-12.
        for (int i = 0; i < n; ++i) {
            const double s = q.row(i).sum();
            if (s > 0.0) q.row(i) /= s;
        }
        return TransitionMatrix::from_matrix(std::move(q), adjustment);
    }

private:
    struct IndependentProposal {
        MarginalModel marginal;
    };

    MhModel(MarginalModel target, std::variant<IndependentProposal, GeneralKernel> proposal)
        : target_(std::move(target)), proposal_(std::move(proposal)) {
        validate_proposal();
    }

    // The proposal must be a probability density in y for every x, and its
    // support must be an interval (the bound for non-symmetric proposals
    // assumes connected support).
    void validate_proposal() const {
        const double lo = target_.lo(), hi = target_.hi();
        const int rows = is_independent() ? 1 : 17;
        for (int r = 0; r < rows; ++r) {
            const double x = lo + (hi - lo) * (r + 0.5) / rows;
            const double total = composite_simpson(
                [&](double y) { return proposal_density(x, y); }, lo, hi, 4096);
            if (std::fabs(total - 1.0) > 1e-4) {
                throw InvalidParameter("mh: proposal density does not integrate to 1 in y (got " +
                                       std::to_string(total) + ")");
            }
            // Interval-support scan: no positive-zero-positive pattern.
            constexpr int kSupportScan = 257;
            int first = -1, last = -1;
            std::vector<bool> positive(kSupportScan);
            for (int s = 0; s < kSupportScan; ++s) {
                const double y = lo + (hi - lo) * s / (kSupportScan - 1);
                positive[s] = proposal_density(x, y) > 0.0;
                if (positive[s]) {
                    if (first < 0) first = s;
                    last = s;
                }
            }
            for (int s = first; s >= 0 && s <= last; ++s) {
                if (!positive[s]) {
                    throw InvalidParameter("mh: proposal support must be an interval for each x");
                }
            }
        }
    }

    MhCertificate certify_independent(int axis_points) const {
        MhCertificate cert;
        cert.axis_points = axis_points;
        const double lo = target_.lo(), hi = target_.hi();
        const MarginalModel& prop = independent_proposal();

        double a = std::numeric_limits<double>::infinity();
        double min_f = std::numeric_limits<double>::infinity();
        for (int i = 0; i < axis_points; ++i) {
            const double y = lo + (hi - lo) * i / (axis_points - 1);
            const double fy = target_.pdf(y);
            min_f = std::min(min_f, fy);
            if (fy <= 0.0) continue; // a null set cannot break q >= a f
            a = std::min(a, prop.pdf(y) / fy);
        }
        if (!std::isfinite(a)) a = 0.0;
        cert.a = a;
        cert.min_target_pdf = min_f;
        if (a <= 1e-12) {
            cert.flag = "no minorization";
            cert.rho1_bound = 1.0;
            return cert;
        }
        // int_0^1 eps2(v) dv with v = F(x):
        // a * integral min{a f(x)/q(x), 1} f(x) dx.
        const double eps2_integral = a * composite_simpson(
            [&](double x) {
                const double fx = target_.pdf(x);
                if (fx <= 0.0) return 0.0;
                const double qx = prop.pdf(x);
                const double ratio = qx > 0.0 ? std::min(a * fx / qx, 1.0) : 1.0;
                return ratio * fx;
            },
            lo, hi, 2000);
        cert.rho1_bound = 1.0 - 0.5 * eps2_integral;
        cert.certified = cert.rho1_bound < 1.0;
        return cert;
    }

    MhCertificate certify_general(int axis_points) const {
        MhCertificate cert;
        cert.axis_points = axis_points;
        const double lo = target_.lo(), hi = target_.hi();

        double a = std::numeric_limits<double>::infinity();
        double k = 0.0;
        double min_f = std::numeric_limits<double>::infinity();
        bool unbounded = false;
        for (int i = 0; i < axis_points && !unbounded; ++i) {
            const double x = lo + (hi - lo) * i / (axis_points - 1);
            for (int j = 0; j < axis_points; ++j) {
                const double y = lo + (hi - lo) * j / (axis_points - 1);
                const double qxy = proposal_density(x, y);
                if (!std::isfinite(qxy)) {
                    unbounded = true;
                    break;
                }
                k = std::max(k, qxy);
                const double fy = target_.pdf(y);
                if (i == 0) min_f = std::min(min_f, fy);
                if (fy <= 0.0) continue;
                a = std::min(a, qxy / fy);
            }
        }
        cert.min_target_pdf = min_f;
        if (unbounded) {
            cert.flag = "k infinite";
            cert.rho1_bound = 1.0;
            return cert;
        }
        if (!std::isfinite(a)) a = 0.0;
        cert.a = a;
        cert.k = k;
        if (a <= 1e-12) {
            cert.flag = "no minorization";
            cert.rho1_bound = 1.0;
            return cert;
        }
        // eps2(v) = a * min{a f(F^{-1}(v))/k, 1}; integrate in x-space.
        const double eps2_integral = a * composite_simpson(
            [&](double x) {
                const double fx = target_.pdf(x);
                if (fx <= 0.0) return 0.0;
                return std::min(a * fx / k, 1.0) * fx;
            },
            lo, hi, 2000);
        cert.rho1_bound = 1.0 - 0.5 * eps2_integral;
        cert.certified = cert.rho1_bound < 1.0;
        return cert;
    }

    MarginalModel target_;
    std::variant<IndependentProposal, GeneralKernel> proposal_;
};

} // namespace copmix
