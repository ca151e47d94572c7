// Cell-to-cell transition operator of a copula chain.
//
// Cell i of an n-grid is ((i-1)/n, i/n].  The entry Q[i][j] is the
// probability of moving from cell i to cell j, recovered from second
// differences of the CDF, so singular mass (diagonal and anti-diagonal
// atoms) is captured exactly.  Uniform margins make Q doubly stochastic.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <thread>
#include <vector>

#include "copmix/copula.hpp"
#include "copmix/errors.hpp"

namespace copmix {

namespace detail {

// Row-chunked parallel loop; falls back to serial for small ranges.
template <typename Fn>
void parallel_rows(int count, Fn&& fn) {
    unsigned workers = std::thread::hardware_concurrency();
    if (workers < 2 || count < 64) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    workers = std::min<unsigned>(workers, 8);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int chunk = (count + static_cast<int>(workers) - 1) / static_cast<int>(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const int begin = static_cast<int>(w) * chunk;
        const int end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &fn] {
            for (int i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace detail

class TransitionMatrix {
public:
    // Q[i][j] = n * [C(i/n,j/n) - C((i-1)/n,j/n) - C(i/n,(j-1)/n) + C((i-1)/n,(j-1)/n)].
    static TransitionMatrix discretize(const Copula& copula, int n) {
        if (n < 2) throw InvalidParameter("discretize: grid size must be >= 2");

        // CDF values on the (n+1)^2 grid; rows computed in parallel.
        Eigen::MatrixXd cdf(n + 1, n + 1);
        detail::parallel_rows(n + 1, [&](int i) {
            const double u = static_cast<double>(i) / n;
            for (int j = 0; j <= n; ++j) {
                cdf(i, j) = copula.cdf(u, static_cast<double>(j) / n);
            }
        });

        Eigen::MatrixXd q(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                q(i, j) = n * (cdf(i + 1, j + 1) - cdf(i, j + 1) - cdf(i + 1, j) + cdf(i, j));
            }
        }
        return TransitionMatrix(std::move(q));
    }

    // Wraps an externally assembled doubly stochastic matrix (e.g. the
    // discretized Metropolis-Hastings copula).  `adjustment` records how much
    // rebalancing the assembly needed.
    static TransitionMatrix from_matrix(Eigen::MatrixXd q, double adjustment = 0.0) {
        TransitionMatrix t(std::move(q));
        t.renormalization_ = std::max(t.renormalization_, adjustment);
        return t;
    }

    int size() const { return static_cast<int>(matrix_.rows()); }
    double operator()(int i, int j) const { return matrix_(i, j); }
    const Eigen::MatrixXd& matrix() const { return matrix_; }

    // Largest row renormalization applied during construction.
    double renormalization() const { return renormalization_; }

    TransitionMatrix power(int k) const {
        if (k < 1) throw InvalidParameter("matrix_power: exponent must be >= 1");
        const int n = size();
        Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd base = matrix_;
        int e = k;
        bool first = true;
        while (e > 0) {
            if (e & 1) {
                result = first ? base : Eigen::MatrixXd(result * base);
                first = false;
            }
            e >>= 1;
            if (e > 0) base = base * base;
        }
        TransitionMatrix out(std::move(result));
        out.renormalization_ = renormalization_;
        return out;
    }

    double max_row_sum_error() const {
        return (matrix_.rowwise().sum().array() - 1.0).abs().maxCoeff();
    }

    double max_col_sum_error() const {
        return (matrix_.colwise().sum().array() - 1.0).abs().maxCoeff();
    }

    // CSV dump: first line "n=<n>", then n rows of n comma-separated entries,
    // row-major, full double precision.
    void write_csv(std::ostream& os) const {
        const int n = size();
        os << "n=" << n << "\n";
        os << std::setprecision(17);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (j) os << ",";
                os << matrix_(i, j);
            }
            os << "\n";
        }
    }

private:
    explicit TransitionMatrix(Eigen::MatrixXd q) : matrix_(std::move(q)) {
        const int n = size();
        // Floating-point cancellation in the CDF differences can leave tiny
        // negative entries; clamp and renormalize the affected rows.
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (matrix_(i, j) < 0.0) matrix_(i, j) = 0.0;
            }
            const double sum = matrix_.row(i).sum();
            if (std::fabs(sum - 1.0) > 1e-12 && sum > 0.0) {
                matrix_.row(i) /= sum;
                renormalization_ = std::max(renormalization_, std::fabs(sum - 1.0));
            }
        }
    }

    Eigen::MatrixXd matrix_;
    double renormalization_ = 0.0;
};

inline TransitionMatrix matrix_power(const TransitionMatrix& q, int k) { return q.power(k); }

} // namespace copmix
