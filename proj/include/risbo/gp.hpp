#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "risbo/rng.hpp"

namespace risbo {

class SingularKernelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class KernelKind { kSquaredExponential, kMatern };

struct KernelSpec {
    KernelKind kind = KernelKind::kSquaredExponential;
    double length_scale = 1.0;  // h
    double matern_nu = 2.5;     // ignored for the SE kernel
    double jitter = 1e-6;       // observation-noise variance on the diagonal

    void validate() const {
        if (!(length_scale > 0.0)) throw std::invalid_argument("KernelSpec: length_scale must be > 0");
        if (kind == KernelKind::kMatern && !(matern_nu > 0.0))
            throw std::invalid_argument("KernelSpec: matern_nu must be > 0");
        if (jitter < 0.0) throw std::invalid_argument("KernelSpec: jitter must be >= 0");
    }
};

// Stationary kernel value at a given distance; k(0) = 1 for both kinds.
inline double kernel_eval(const KernelSpec& spec, double distance) {
    spec.validate();
    if (distance < 0.0) throw std::invalid_argument("kernel_eval: distance must be >= 0");
    const double h = spec.length_scale;
    if (spec.kind == KernelKind::kSquaredExponential)
        return std::exp(-distance * distance / (2.0 * h * h));
    if (distance == 0.0) return 1.0;
    const double nu = spec.matern_nu;
    const double t = std::sqrt(2.0 * nu) * distance / h;
    const double v =
        std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(t, nu) * std::cyl_bessel_k(nu, t);
    if (!std::isfinite(v)) return 0.0;  // Bessel underflow at large distance
    return std::clamp(v, 0.0, 1.0);
}

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
};

inline double acquisition(const Posterior& p, double beta) {
    if (beta < 0.0) throw std::invalid_argument("acquisition: beta must be >= 0");
    return p.mean - std::sqrt(beta) * std::sqrt(std::max(p.variance, 0.0));
}

// Sliding window of the last W (point, value) samples, oldest first.
class SampleWindow {
public:
    explicit SampleWindow(int capacity) : capacity_(capacity) {
        if (capacity < 1) throw std::invalid_argument("SampleWindow: capacity must be >= 1");
    }

    void add(Eigen::VectorXd x, double y) {
        if (!entries_.empty() && x.size() != entries_.front().first.size())
            throw std::invalid_argument("SampleWindow: dimension mismatch");
        entries_.emplace_back(std::move(x), y);
        if (static_cast<int>(entries_.size()) > capacity_) entries_.pop_front();
    }

    int size() const { return static_cast<int>(entries_.size()); }
    int capacity() const { return capacity_; }
    bool empty() const { return entries_.empty(); }
    int dim() const { return entries_.empty() ? 0 : static_cast<int>(entries_.front().first.size()); }
    const Eigen::VectorXd& point(int i) const { return entries_.at(i).first; }
    double value(int i) const { return entries_.at(i).second; }

private:
    int capacity_;
    std::deque<std::pair<Eigen::VectorXd, double>> entries_;
};

// Nonempty list of coordinate indices; used to restrict kernel distances to a
// segment of the input vector.
using CoordSet = std::vector<int>;

// Frozen GP posterior over one window state. The kernel matrix is factorized
// once (LLT, never an explicit inverse); each query then costs one kernel
// vector and one triangular solve. If the factorization fails the jitter
// escalates by x10 up to 1e-2 before reporting a singular kernel.
//
// Without a segment list, segment queries follow the printed recursion: a
// full-dimension Gram matrix against segment-restricted cross covariances.
// That mix is not a consistent joint Gaussian, so the variance is clamped.
// With a segment list the model is the calibrated additive GP instead: L
// independent subfunctions with prior variance 1/L each, Gram matrix
// (1/L) sum_l k(d_l), and properly scaled segment posteriors.
class WindowPosterior {
public:
    WindowPosterior(const SampleWindow& window, const KernelSpec& spec,
                    const std::vector<CoordSet>* additive_segments = nullptr)
        : spec_(spec) {
        spec_.validate();
        if (window.empty()) throw std::invalid_argument("WindowPosterior: empty window");
        const int n = window.size();
        points_.resize(n, window.dim());
        values_.resize(n);
        for (int i = 0; i < n; ++i) {
            points_.row(i) = window.point(i);
            values_(i) = window.value(i);
        }
        if (additive_segments != nullptr) segments_ = *additive_segments;

        Eigen::MatrixXd gram(n, n);
        for (int i = 0; i < n; ++i) {
            gram(i, i) = prior_variance();
            for (int j = i + 1; j < n; ++j) {
                gram(i, j) = cross_kernel(points_.row(i), points_.row(j));
                gram(j, i) = gram(i, j);
            }
        }
        double jitter = spec_.jitter;
        while (true) {
            Eigen::MatrixXd reg = gram;
            if (jitter > 0.0) reg.diagonal().array() += jitter;
            llt_.compute(reg);
            if (llt_.info() == Eigen::Success) break;
            jitter = (jitter == 0.0) ? 1e-6 : jitter * 10.0;
            if (jitter > 1e-2)
                throw SingularKernelError("WindowPosterior: kernel matrix not positive definite");
        }
        jitter_ = jitter;
        weights_ = llt_.solve(values_);
    }

    int size() const { return static_cast<int>(values_.size()); }
    int dim() const { return static_cast<int>(points_.cols()); }
    double effective_jitter() const { return jitter_; }
    const KernelSpec& kernel() const { return spec_; }

    // Posterior of the objective at a full-dimension query point.
    Posterior query(const Eigen::VectorXd& xq) const {
        if (xq.size() != points_.cols()) throw std::invalid_argument("query: dimension mismatch");
        Eigen::VectorXd k(size());
        for (int i = 0; i < size(); ++i) k(i) = cross_kernel(points_.row(i), xq.transpose());
        return finish(k, prior_variance());
    }

    // Posterior of a segment subfunction at segment-restricted coordinates.
    Posterior query_segment(const CoordSet& coords, const Eigen::VectorXd& xq_seg) const {
        if (static_cast<Eigen::Index>(coords.size()) != xq_seg.size())
            throw std::invalid_argument("query_segment: coordinate/point size mismatch");
        const double seg_var = segments_.empty() ? 1.0 : 1.0 / static_cast<double>(segments_.size());
        Eigen::VectorXd k(size());
        for (int i = 0; i < size(); ++i) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < coords.size(); ++c) {
                const double diff = points_(i, coords[c]) - xq_seg(static_cast<Eigen::Index>(c));
                d2 += diff * diff;
            }
            k(i) = seg_var * kernel_eval(spec_, std::sqrt(d2));
        }
        Posterior p = finish(k, seg_var);
        p.variance = std::min(p.variance, seg_var);
        return p;
    }

private:
    double prior_variance() const { return 1.0; }

    double cross_kernel(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) const {
        if (segments_.empty()) return kernel_eval(spec_, (a - b).norm());
        double sum = 0.0;
        for (const auto& seg : segments_) {
            double d2 = 0.0;
            for (int c : seg) {
                const double diff = a(c) - b(c);
                d2 += diff * diff;
            }
            sum += kernel_eval(spec_, std::sqrt(d2));
        }
        return sum / static_cast<double>(segments_.size());
    }

    Posterior finish(const Eigen::VectorXd& k, double k0) const {
        Posterior p;
        p.mean = k.dot(weights_);
        const Eigen::VectorXd v = llt_.matrixL().solve(k);
        p.variance = std::max(k0 - v.squaredNorm(), 0.0);
        return p;
    }

    KernelSpec spec_;
    Eigen::MatrixXd points_;   // one sample per row
    Eigen::VectorXd values_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd weights_;  // (K + jitter I)^{-1} y
    double jitter_ = 0.0;
    std::vector<CoordSet> segments_;
};

// One-shot windowed posterior at a query point.
inline Posterior posterior(const SampleWindow& window, const Eigen::VectorXd& xq,
                           const KernelSpec& spec) {
    return WindowPosterior(window, spec).query(xq);
}

namespace detail {

struct LmlParts {
    double quad = 0.0;     // y^T (K + jitter I)^{-1} y
    double log_det = 0.0;  // log |K + jitter I|
    int n = 0;
};

inline LmlParts lml_parts(const SampleWindow& window, const KernelSpec& spec) {
    if (window.empty()) throw std::invalid_argument("log_marginal_likelihood: empty window");
    const int n = window.size();
    Eigen::MatrixXd gram(n, n);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        y(i) = window.value(i);
        gram(i, i) = 1.0 + spec.jitter;
        for (int j = i + 1; j < n; ++j) {
            gram(i, j) = kernel_eval(spec, (window.point(i) - window.point(j)).norm());
            gram(j, i) = gram(i, j);
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw SingularKernelError("log_marginal_likelihood: kernel matrix not positive definite");
    LmlParts parts;
    parts.n = n;
    for (int i = 0; i < n; ++i) parts.log_det += 2.0 * std::log(llt.matrixL()(i, i));
    parts.quad = y.dot(llt.solve(y));
    return parts;
}

}  // namespace detail

// Gaussian log marginal likelihood of the window under the kernel.
inline double log_marginal_likelihood(const SampleWindow& window, const KernelSpec& spec) {
    const detail::LmlParts p = detail::lml_parts(window, spec);
    return -0.5 * p.quad - 0.5 * p.log_det - 0.5 * p.n * std::log(kTwoPi);
}

// Log marginal likelihood under the total-variance-normalized model
// C = (K + jitter I) / (1 + jitter). On standardized observations the plain
// likelihood cannot tell signal variance from noise variance (their sum is
// pinned), so it always drives the jitter to zero; normalizing the total
// keeps the split identifiable while preserving k(0) + noise = 1.
inline double log_marginal_likelihood_normalized(const SampleWindow& window,
                                                 const KernelSpec& spec) {
    const detail::LmlParts p = detail::lml_parts(window, spec);
    const double scale = 1.0 + spec.jitter;
    return -0.5 * scale * p.quad - 0.5 * (p.log_det - p.n * std::log(scale)) -
           0.5 * p.n * std::log(kTwoPi);
}

// Maximum-likelihood length scale over a log-spaced candidate grid,
// optionally jointly with the observation-noise variance over jitter_grid
// (pilot-estimated feedback is noisy, and a jitter fixed at the conditioning
// floor makes the GP interpolate that noise). Deterministic given the window;
// exact likelihood ties go to the larger h.
inline KernelSpec fit_lengthscale(const SampleWindow& window, KernelSpec spec, int grid_size = 16,
                                  double h_min = 0.05, double h_max = 5.0,
                                  const std::vector<double>& jitter_grid = {},
                                  bool normalize_total_variance = false) {
    if (window.size() < 3) throw std::invalid_argument("fit_lengthscale: need >= 3 samples");
    if (grid_size < 2 || !(h_min > 0.0) || !(h_max > h_min))
        throw std::invalid_argument("fit_lengthscale: bad candidate grid");
    std::vector<double> jitters = jitter_grid;
    if (jitters.empty()) jitters.push_back(spec.jitter);
    double best_h = 0.0;
    double best_jitter = 0.0;
    double best_lml = -std::numeric_limits<double>::infinity();
    int usable = 0;
    for (int g = 0; g < grid_size; ++g) {
        for (double jitter : jitters) {
            KernelSpec cand = spec;
            cand.length_scale =
                h_min * std::pow(h_max / h_min, static_cast<double>(g) / (grid_size - 1));
            cand.jitter = jitter;
            double lml;
            try {
                lml = normalize_total_variance ? log_marginal_likelihood_normalized(window, cand)
                                               : log_marginal_likelihood(window, cand);
            } catch (const SingularKernelError&) {
                continue;
            }
            if (!std::isfinite(lml)) continue;
            ++usable;
            if (lml >= best_lml) {
                best_lml = lml;
                best_h = cand.length_scale;
                best_jitter = cand.jitter;
            }
        }
    }
    if (usable == 0) throw SingularKernelError("fit_lengthscale: every candidate was singular");
    spec.length_scale = best_h;
    spec.jitter = best_jitter;
    return spec;
}

}  // namespace risbo
