// Bivariate copulas on the unit square with uniform margins.
//
// A Copula exposes four views of the same dependence structure:
//   cdf(u,v)             the joint CDF C(u,v),
//   conditional_cdf(u,v) the partial derivative in the first argument,
//                        which is the one-step transition CDF of the
//                        stationary Markov chain the copula generates,
//   ac_density(u,v)      the density of the absolutely continuous part,
//   atoms(u)             the atoms of the conditional law at u (the singular
//                        part; at most one on the diagonal v = u and one on
//                        the anti-diagonal v = 1 - u).
//
// Built-in families: independence, the Hoeffding bounds M and W, Clayton,
// Frechet, Mardia, convex mixtures, plus a finite-difference wrapper for
// user-supplied CDFs.  Values are immutable after construction and safe to
// share across threads.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "copmix/errors.hpp"

namespace copmix {

// One atom of the conditional law at a fixed u.
struct Atom {
    double location; // v-coordinate carrying the mass
    double mass;
};

enum class CopulaFamily { Independence, HoeffdingM, HoeffdingW, Clayton, Frechet, Mardia, Mixture, Custom };

namespace detail {

class CopulaModel {
public:
    virtual ~CopulaModel() = default;
    virtual double cdf(double u, double v) const = 0;
    virtual double conditional_cdf(double u, double v) const = 0;
    virtual double ac_density(double u, double v) const = 0;
    virtual std::vector<Atom> atoms(double u) const { (void)u; return {}; }
    virtual CopulaFamily family() const = 0;
    virtual std::string name() const = 0;
    // Total weight carried by independence components (recursively for mixtures).
    virtual double independence_weight() const { return 0.0; }
};

// Clamp used before evaluating densities that are unbounded at the corners
// (Clayton).  Documented as a bias source of the same magnitude.
constexpr double kDensityClamp = 1e-12;

inline double clamp_unit(double t) {
    return std::min(1.0 - kDensityClamp, std::max(kDensityClamp, t));
}

} // namespace detail

class Copula {
public:
    double cdf(double u, double v) const {
        require_unit(u, "cdf: u");
        require_unit(v, "cdf: v");
        return model_->cdf(u, v);
    }

    // dC/du at (u, v); nondecreasing and right-continuous in v.
    // Defined for u strictly inside (0, 1).
    double conditional_cdf(double u, double v) const {
        if (!(u > 0.0 && u < 1.0)) {
            throw BoundaryError("conditional_cdf: u must lie strictly inside (0,1)");
        }
        require_unit(v, "conditional_cdf: v");
        return model_->conditional_cdf(u, v);
    }

    double ac_density(double u, double v) const {
        require_unit(u, "ac_density: u");
        require_unit(v, "ac_density: v");
        return model_->ac_density(u, v);
    }

    // Atoms of the conditional law at u, sorted by location.
    std::vector<Atom> atoms(double u) const { return model_->atoms(u); }

    bool has_singular_part() const {
        auto a = model_->atoms(0.25);
        auto b = model_->atoms(0.75);
        return !a.empty() || !b.empty();
    }

    CopulaFamily family() const { return model_->family(); }
    std::string name() const { return model_->name(); }
    double independence_weight() const { return model_->independence_weight(); }

    explicit Copula(std::shared_ptr<const detail::CopulaModel> model) : model_(std::move(model)) {}

private:
    static void require_unit(double t, const char* what) {
        if (!(t >= 0.0 && t <= 1.0)) {
            throw BoundaryError(std::string(what) + " outside [0,1]");
        }
    }

    std::shared_ptr<const detail::CopulaModel> model_;
};

namespace detail {

class IndependenceModel final : public CopulaModel {
public:
    double cdf(double u, double v) const override { return u * v; }
    double conditional_cdf(double, double v) const override { return v; }
    double ac_density(double, double) const override { return 1.0; }
    CopulaFamily family() const override { return CopulaFamily::Independence; }
    std::string name() const override { return "indep"; }
    double independence_weight() const override { return 1.0; }
};

class HoeffdingMModel final : public CopulaModel {
public:
    double cdf(double u, double v) const override { return std::min(u, v); }
    double conditional_cdf(double u, double v) const override { return v >= u ? 1.0 : 0.0; }
    double ac_density(double, double) const override { return 0.0; }
    std::vector<Atom> atoms(double u) const override { return {{u, 1.0}}; }
    CopulaFamily family() const override { return CopulaFamily::HoeffdingM; }
    std::string name() const override { return "m"; }
};

class HoeffdingWModel final : public CopulaModel {
public:
    double cdf(double u, double v) const override { return std::max(u + v - 1.0, 0.0); }
    double conditional_cdf(double u, double v) const override { return v >= 1.0 - u ? 1.0 : 0.0; }
    double ac_density(double, double) const override { return 0.0; }
    std::vector<Atom> atoms(double u) const override { return {{1.0 - u, 1.0}}; }
    CopulaFamily family() const override { return CopulaFamily::HoeffdingW; }
    std::string name() const override { return "w"; }
};

class ClaytonModel final : public CopulaModel {
public:
    explicit ClaytonModel(double alpha) : alpha_(alpha) {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) {
            throw InvalidParameter("clayton: alpha must be finite and > 0 "
                                   "(the alpha -> 0 limit is the independence copula)");
        }
    }

    double cdf(double u, double v) const override {
        if (u <= 0.0 || v <= 0.0) return 0.0;
        if (u >= 1.0) return v;
        if (v >= 1.0) return u;
        const double s = std::pow(u, -alpha_) + std::pow(v, -alpha_) - 1.0;
        return std::pow(s, -1.0 / alpha_);
    }

    // Closed form: C_{,1}(u,v) = u^{-a-1} (u^{-a} + v^{-a} - 1)^{-1-1/a}.
    double conditional_cdf(double u, double v) const override {
        if (v <= 0.0) return 0.0;
        if (v >= 1.0) return 1.0;
        const double s = std::pow(u, -alpha_) + std::pow(v, -alpha_) - 1.0;
        return std::pow(u, -alpha_ - 1.0) * std::pow(s, -1.0 - 1.0 / alpha_);
    }

    double ac_density(double u, double v) const override {
        u = clamp_unit(u);
        v = clamp_unit(v);
        const double s = std::pow(u, -alpha_) + std::pow(v, -alpha_) - 1.0;
        return (1.0 + alpha_) * std::pow(u * v, -alpha_ - 1.0) * std::pow(s, -2.0 - 1.0 / alpha_);
    }

    CopulaFamily family() const override { return CopulaFamily::Clayton; }
    std::string name() const override {
        std::ostringstream os;
        os << "clayton:alpha=" << alpha_;
        return os.str();
    }

    double alpha() const { return alpha_; }

private:
    double alpha_;
};

// Shared math for Frechet and Mardia: a*M + (1-a-b)*P + b*W.
class FrechetLikeModel : public CopulaModel {
public:
    FrechetLikeModel(double a, double b) : a_(a), b_(b) {
        if (!(a >= 0.0 && b >= 0.0 && a + b <= 1.0 + 1e-15)) {
            throw InvalidParameter("frechet: weights need a >= 0, b >= 0, a + b <= 1");
        }
    }

    double cdf(double u, double v) const override {
        return a_ * std::min(u, v) + (1.0 - a_ - b_) * u * v + b_ * std::max(u + v - 1.0, 0.0);
    }

    double conditional_cdf(double u, double v) const override {
        double r = (1.0 - a_ - b_) * v;
        if (v >= u) r += a_;
        if (v >= 1.0 - u) r += b_;
        return r;
    }

    double ac_density(double, double) const override { return 1.0 - a_ - b_; }

    std::vector<Atom> atoms(double u) const override {
        std::vector<Atom> out;
        const double lo = std::min(u, 1.0 - u), hi = std::max(u, 1.0 - u);
        if (hi - lo < 1e-15) {
            // u = 1/2: diagonal and anti-diagonal coincide.
            if (a_ + b_ > 0.0) out.push_back({u, a_ + b_});
            return out;
        }
        const double mass_lo = (lo == u) ? a_ : b_;
        const double mass_hi = (hi == u) ? a_ : b_;
        if (mass_lo > 0.0) out.push_back({lo, mass_lo});
        if (mass_hi > 0.0) out.push_back({hi, mass_hi});
        return out;
    }

    double a() const { return a_; }
    double b() const { return b_; }

protected:
    double a_, b_;
};

class FrechetModel final : public FrechetLikeModel {
public:
    using FrechetLikeModel::FrechetLikeModel;
    CopulaFamily family() const override { return CopulaFamily::Frechet; }
    std::string name() const override {
        std::ostringstream os;
        os << "frechet:a=" << a_ << ",b=" << b_;
        return os.str();
    }
};

class MardiaModel final : public FrechetLikeModel {
public:
    explicit MardiaModel(double theta)
        : FrechetLikeModel(theta * theta * (1.0 + theta) / 2.0,
                           theta * theta * (1.0 - theta) / 2.0),
          theta_(theta) {
        if (!(theta >= -1.0 && theta <= 1.0)) {
            throw InvalidParameter("mardia: theta must lie in [-1, 1]");
        }
    }

    CopulaFamily family() const override { return CopulaFamily::Mardia; }
    std::string name() const override {
        std::ostringstream os;
        os << "mardia:theta=" << theta_;
        return os.str();
    }

    double theta() const { return theta_; }

private:
    double theta_;
};

class MixtureModel final : public CopulaModel {
public:
    MixtureModel(std::vector<Copula> components, std::vector<double> weights)
        : components_(std::move(components)), weights_(std::move(weights)) {
        if (components_.empty() || components_.size() != weights_.size()) {
            throw InvalidParameter("mix: need equally many components and weights, at least one");
        }
        double sum = 0.0;
        for (double w : weights_) {
            if (!(w >= 0.0)) throw InvalidParameter("mix: weights must be nonnegative");
            sum += w;
        }
        if (std::fabs(sum - 1.0) > 1e-12) {
            throw InvalidParameter("mix: weights must sum to 1 within 1e-12");
        }
    }

    double cdf(double u, double v) const override {
        double r = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i) r += weights_[i] * components_[i].cdf(u, v);
        return r;
    }

    double conditional_cdf(double u, double v) const override {
        double r = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i) {
            r += weights_[i] * components_[i].conditional_cdf(u, v);
        }
        return r;
    }

    double ac_density(double u, double v) const override {
        double r = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i) {
            r += weights_[i] * components_[i].ac_density(u, v);
        }
        return r;
    }

    std::vector<Atom> atoms(double u) const override {
        std::vector<Atom> merged;
        for (std::size_t i = 0; i < components_.size(); ++i) {
            if (weights_[i] == 0.0) continue;
            for (const Atom& a : components_[i].atoms(u)) {
                bool found = false;
                for (Atom& m : merged) {
                    if (std::fabs(m.location - a.location) < 1e-15) {
                        m.mass += weights_[i] * a.mass;
                        found = true;
                        break;
                    }
                }
                if (!found) merged.push_back({a.location, weights_[i] * a.mass});
            }
        }
        std::sort(merged.begin(), merged.end(),
                  [](const Atom& x, const Atom& y) { return x.location < y.location; });
        return merged;
    }

    CopulaFamily family() const override { return CopulaFamily::Mixture; }

    std::string name() const override {
        std::ostringstream os;
        os << "mix:";
        for (std::size_t i = 0; i < components_.size(); ++i) {
            if (i) os << "+";
            os << weights_[i] << "*" << components_[i].name();
        }
        return os.str();
    }

    double independence_weight() const override {
        double w = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i) {
            w += weights_[i] * components_[i].independence_weight();
        }
        return w;
    }

    const std::vector<Copula>& components() const { return components_; }
    const std::vector<double>& weights() const { return weights_; }

private:
    std::vector<Copula> components_;
    std::vector<double> weights_;
};

// Wraps a user-supplied CDF.  Derivatives fall back to central finite
// differences; no singular part is assumed.
class CustomCdfModel final : public CopulaModel {
public:
    CustomCdfModel(std::function<double(double, double)> cdf, std::string label)
        : cdf_(std::move(cdf)), label_(std::move(label)) {
        if (!cdf_) throw InvalidParameter("custom copula: null CDF");
    }

    double cdf(double u, double v) const override { return cdf_(u, v); }

    double conditional_cdf(double u, double v) const override {
        const double h = std::min({1e-6, 0.5 * u, 0.5 * (1.0 - u)});
        return (cdf_(u + h, v) - cdf_(u - h, v)) / (2.0 * h);
    }

    double ac_density(double u, double v) const override {
        // Second mixed difference; a larger step than the first-derivative
        // fallback keeps cancellation error below the truncation error.
        const double h = std::min({1e-4, 0.5 * u, 0.5 * (1.0 - u), 0.5 * v, 0.5 * (1.0 - v)});
        const double upp = cdf_(u + h, v + h), upm = cdf_(u + h, v - h);
        const double ump = cdf_(u - h, v + h), umm = cdf_(u - h, v - h);
        return (upp - upm - ump + umm) / (4.0 * h * h);
    }

    CopulaFamily family() const override { return CopulaFamily::Custom; }
    std::string name() const override { return label_; }

private:
    std::function<double(double, double)> cdf_;
    std::string label_;
};

} // namespace detail

inline Copula independence() { return Copula(std::make_shared<detail::IndependenceModel>()); }
inline Copula hoeffding_m() { return Copula(std::make_shared<detail::HoeffdingMModel>()); }
inline Copula hoeffding_w() { return Copula(std::make_shared<detail::HoeffdingWModel>()); }
inline Copula clayton(double alpha) { return Copula(std::make_shared<detail::ClaytonModel>(alpha)); }
inline Copula frechet(double a, double b) { return Copula(std::make_shared<detail::FrechetModel>(a, b)); }
inline Copula mardia(double theta) { return Copula(std::make_shared<detail::MardiaModel>(theta)); }

inline Copula mix(std::vector<Copula> components, std::vector<double> weights) {
    return Copula(std::make_shared<detail::MixtureModel>(std::move(components), std::move(weights)));
}

inline Copula custom_cdf(std::function<double(double, double)> cdf, std::string label = "custom") {
    return Copula(std::make_shared<detail::CustomCdfModel>(std::move(cdf), std::move(label)));
}

// Result of the axiom scan over a uniform grid.
struct AxiomReport {
    int grid_n = 0;
    double max_grounded_violation = 0.0; // |C(0,v)|, |C(u,0)|
    double max_margin_violation = 0.0;   // |C(u,1)-u|, |C(1,v)-v|
    double min_rectangle_mass = 0.0;     // smallest mass of a grid cell
    bool pass = false;
};

// Scans groundedness, uniform margins and 2-increasingness on an
// (n+1) x (n+1) uniform grid of CDF evaluations.
inline AxiomReport check_axioms(const Copula& copula, int grid_n) {
    if (grid_n < 2) throw InvalidParameter("check_axioms: grid_n must be >= 2");
    const int n = grid_n;
    AxiomReport report;
    report.grid_n = n;

    std::vector<double> grid(static_cast<std::size_t>(n + 1) * (n + 1));
    auto at = [&](int i, int j) -> double& { return grid[static_cast<std::size_t>(i) * (n + 1) + j]; };
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            at(i, j) = copula.cdf(static_cast<double>(i) / n, static_cast<double>(j) / n);
        }
    }

    double grounded = 0.0, margin = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / n;
        grounded = std::max({grounded, std::fabs(at(0, i)), std::fabs(at(i, 0))});
        margin = std::max({margin, std::fabs(at(i, n) - t), std::fabs(at(n, i) - t)});
    }

    double min_mass = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
            const double mass = at(i, j) - at(i - 1, j) - at(i, j - 1) + at(i - 1, j - 1);
            min_mass = std::min(min_mass, mass);
        }
    }

    report.max_grounded_violation = grounded;
    report.max_margin_violation = margin;
    report.min_rectangle_mass = min_mass;
    report.pass = grounded <= 1e-12 && margin <= 1e-12 && min_mass >= -1e-12;
    return report;
}

} // namespace copmix
