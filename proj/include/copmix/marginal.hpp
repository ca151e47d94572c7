// Target/proposal marginal on a bounded working domain [lo, hi]:
// a density f, its tabulated CDF F on a uniform grid, and the monotone
// piecewise-linear inverse F^{-1}.  Unbounded targets are expected to be
// truncated by the caller before construction.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "copmix/errors.hpp"

namespace copmix {

class MarginalModel {
public:
    static constexpr int kDefaultNodes = 4096;

    // Tabulates the (possibly unnormalized) pdf on nodes+1 uniform points.
    // If the trapezoid integral differs from 1 by more than 1e-6 the density
    // is renormalized and the factor retained for inspection.
    MarginalModel(std::function<double(double)> pdf, double lo, double hi,
                  int nodes = kDefaultNodes, std::string label = "custom")
        : lo_(lo), hi_(hi), label_(std::move(label)) {
        if (!pdf) throw InvalidParameter("marginal: null pdf");
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
            throw InvalidParameter("marginal: domain must be a bounded interval [lo, hi], lo < hi");
        }
        if (nodes < 8) throw InvalidParameter("marginal: need at least 8 table nodes");

        const double h = (hi - lo) / nodes;
        std::vector<double> density(nodes + 1);
        for (int i = 0; i <= nodes; ++i) {
            const double value = pdf(lo + i * h);
            if (!(value >= 0.0) || !std::isfinite(value)) {
                throw InvalidParameter("marginal: pdf must be finite and nonnegative on the domain");
            }
            density[i] = value;
        }

        cdf_table_.assign(nodes + 1, 0.0);
        for (int i = 0; i < nodes; ++i) {
            cdf_table_[i + 1] = cdf_table_[i] + 0.5 * h * (density[i] + density[i + 1]);
        }
        const double total = cdf_table_.back();
        if (!(total > 0.0)) throw InvalidParameter("marginal: pdf integrates to zero on the domain");
        renorm_factor_ = total;
        if (std::fabs(total - 1.0) > 1e-6) {
            pdf_ = [raw = std::move(pdf), total](double x) { return raw(x) / total; };
        } else {
            pdf_ = std::move(pdf);
        }
        for (double& c : cdf_table_) c /= total;
        cdf_table_.back() = 1.0;

        max_pdf_ = 0.0;
        for (double d : density) max_pdf_ = std::max(max_pdf_, d / total);
    }

    static MarginalModel uniform(double lo = 0.0, double hi = 1.0) {
        const double height = 1.0 / (hi - lo);
        return MarginalModel([height](double) { return height; }, lo, hi,
                             kDefaultNodes, "uniform");
    }

    // Beta(p, q) on [0,1]; p, q >= 1 so the density stays bounded.
    static MarginalModel beta(double p, double q) {
        if (!(p >= 1.0 && q >= 1.0)) {
            throw InvalidParameter("beta marginal: need p >= 1 and q >= 1 (bounded density)");
        }
        const double log_norm = std::lgamma(p + q) - std::lgamma(p) - std::lgamma(q);
        auto pdf = [p, q, log_norm](double x) {
            if (x <= 0.0 || x >= 1.0) {
                // Endpoint limits: finite because p, q >= 1.
                if (x == 0.0 && p == 1.0) return std::exp(log_norm);
                if (x == 1.0 && q == 1.0) return std::exp(log_norm);
                return 0.0;
            }
            return std::exp(log_norm + (p - 1.0) * std::log(x) + (q - 1.0) * std::log(1.0 - x));
        };
        std::ostringstream name;
        name << "beta:p=" << p << ",q=" << q;
        return MarginalModel(pdf, 0.0, 1.0, kDefaultNodes, name.str());
    }

    static MarginalModel truncated_normal(double mu, double sigma, double lo = 0.0, double hi = 1.0) {
        if (!(sigma > 0.0)) throw InvalidParameter("truncnormal: sigma must be > 0");
        auto kernel = [mu, sigma](double x) {
            const double z = (x - mu) / sigma;
            return std::exp(-0.5 * z * z);
        };
        std::ostringstream name;
        name << "truncnormal:mu=" << mu << ",sigma=" << sigma;
        return MarginalModel(kernel, lo, hi, kDefaultNodes, name.str());
    }

    // Two-column CSV (x, pdf); x strictly increasing.  The density is
    // interpolated linearly between the given abscissae.
    static MarginalModel from_table_file(const std::string& path, std::string label = "") {
        std::ifstream in(path);
        if (!in) throw ConfigError("table marginal: cannot open " + path);
        std::vector<double> xs, ps;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream row(line);
            double x, p;
            if (!(row >> x >> p)) throw ConfigError("table marginal: bad row '" + line + "' in " + path);
            xs.push_back(x);
            ps.push_back(p);
        }
        return from_samples(std::move(xs), std::move(ps),
                            label.empty() ? "table:" + path : std::move(label));
    }

    static MarginalModel from_samples(std::vector<double> xs, std::vector<double> ps,
                                      std::string label = "table") {
        if (xs.size() != ps.size() || xs.size() < 2) {
            throw InvalidParameter("table marginal: need matching x/pdf columns, at least 2 rows");
        }
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            if (!(xs[i] < xs[i + 1])) throw InvalidParameter("table marginal: x must be strictly increasing");
        }
        const double lo = xs.front(), hi = xs.back();
        auto shared_xs = std::make_shared<std::vector<double>>(std::move(xs));
        auto shared_ps = std::make_shared<std::vector<double>>(std::move(ps));
        auto pdf = [shared_xs, shared_ps](double x) {
            const auto& gx = *shared_xs;
            const auto& gp = *shared_ps;
            if (x <= gx.front()) return gp.front();
            if (x >= gx.back()) return gp.back();
            const auto it = std::upper_bound(gx.begin(), gx.end(), x);
            const std::size_t j = static_cast<std::size_t>(it - gx.begin());
            const double t = (x - gx[j - 1]) / (gx[j] - gx[j - 1]);
            return gp[j - 1] + t * (gp[j] - gp[j - 1]);
        };
        return MarginalModel(pdf, lo, hi, kDefaultNodes, std::move(label));
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const std::string& label() const { return label_; }
    double renorm_factor() const { return renorm_factor_; }
    double max_pdf() const { return max_pdf_; }
    int nodes() const { return static_cast<int>(cdf_table_.size()) - 1; }

    double pdf(double x) const {
        if (x < lo_ || x > hi_) return 0.0;
        return pdf_(x);
    }

    // Piecewise-linear interpolant of the tabulated CDF.
    double cdf(double x) const {
        if (x <= lo_) return 0.0;
        if (x >= hi_) return 1.0;
        const int n = nodes();
        const double h = (hi_ - lo_) / n;
        const double s = (x - lo_) / h;
        int cell = static_cast<int>(s);
        if (cell >= n) cell = n - 1;
        const double t = s - cell;
        return cdf_table_[cell] + t * (cdf_table_[cell + 1] - cdf_table_[cell]);
    }

    // Generalized inverse of the tabulated CDF: inf{x : F(x) >= u}.
    // Exact linear inversion inside the bracketing cell; flat runs (pdf = 0)
    // resolve to their left edge.
    double quantile(double u) const {
        if (!(u >= 0.0 && u <= 1.0)) throw InvalidParameter("quantile: u outside [0,1]");
        if (u <= 0.0) return lo_;
        if (u >= 1.0) return quantile_of_one();
        const auto it = std::lower_bound(cdf_table_.begin(), cdf_table_.end(), u);
        int cell = static_cast<int>(it - cdf_table_.begin());
        if (cell == 0) return lo_;
        --cell; // cdf_table_[cell] < u <= cdf_table_[cell+1]
        const int n = nodes();
        const double h = (hi_ - lo_) / n;
        const double lo_val = cdf_table_[cell], hi_val = cdf_table_[cell + 1];
        if (hi_val <= lo_val) return lo_ + cell * h;
        const double t = (u - lo_val) / (hi_val - lo_val);
        return lo_ + (cell + t) * h;
    }

private:
    // inf{x : F(x) >= 1}: the left edge of a trailing zero-density run.
    double quantile_of_one() const {
        const int n = nodes();
        int cell = n;
        while (cell > 0 && cdf_table_[cell - 1] >= 1.0) --cell;
        return lo_ + (hi_ - lo_) * cell / n;
    }

    double lo_, hi_;
    std::function<double(double)> pdf_;
    std::vector<double> cdf_table_;
    std::string label_;
    double renorm_factor_ = 1.0;
    double max_pdf_ = 0.0;
};

} // namespace copmix
