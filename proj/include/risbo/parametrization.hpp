#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "risbo/system_model.hpp"

namespace risbo {

// Options for the real-vector design encoding. With full_sphere the last
// spherical angle lives on [0, 2pi) so the precoder map covers the whole
// power sphere; with it off the angle stays on [0, pi] as printed, which can
// only reach a nonnegative last weight coordinate. filter_scale widens the
// cos-angle filter range beyond [-1, 1] for non-Rayleigh settings.
struct ParamOptions {
    bool full_sphere = true;
    double filter_scale = 1.0;
};

inline int weight_count(const SystemConfig& cfg) { return 2 * cfg.bs_antennas * cfg.users; }

// D = 2(M+1)K + N - 1: N phases, 2MK-1 spherical angles, 2K filter angles.
inline int design_dim(const SystemConfig& cfg) {
    return cfg.ris_elements + weight_count(cfg) - 1 + 2 * cfg.users;
}

// Per-coordinate bounds plus the [0,1] normalization used for kernel
// distances; the angle blocks live on different scales so a shared
// length-scale is only meaningful on normalized coordinates.
struct DomainBox {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    int dim() const { return static_cast<int>(lower.size()); }

    void validate() const {
        if (lower.size() != upper.size()) throw std::invalid_argument("DomainBox: bound size mismatch");
        for (Eigen::Index i = 0; i < lower.size(); ++i)
            if (!(lower(i) < upper(i))) throw std::invalid_argument("DomainBox: lower >= upper");
    }

    Eigen::VectorXd normalize(const Eigen::VectorXd& x) const {
        if (x.size() != lower.size()) throw std::invalid_argument("DomainBox: dimension mismatch");
        return (x - lower).cwiseQuotient(upper - lower);
    }

    Eigen::VectorXd denormalize(const Eigen::VectorXd& u) const {
        if (u.size() != lower.size()) throw std::invalid_argument("DomainBox: dimension mismatch");
        return lower + u.cwiseProduct(upper - lower);
    }

    bool contains(const Eigen::VectorXd& x, double tol = 0.0) const {
        if (x.size() != lower.size()) return false;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (x(i) < lower(i) - tol || x(i) > upper(i) + tol) return false;
        return true;
    }
};

inline DomainBox make_domain_box(const SystemConfig& cfg, const ParamOptions& opts = {}) {
    cfg.validate();
    const int n = cfg.ris_elements;
    const int na = weight_count(cfg) - 1;  // spherical angle count
    const int nf = 2 * cfg.users;
    DomainBox box;
    box.lower = Eigen::VectorXd::Zero(n + na + nf);
    box.upper = Eigen::VectorXd::Constant(n + na + nf, kPi);
    box.upper.head(n).setConstant(kTwoPi);
    if (opts.full_sphere) box.upper(n + na - 1) = kTwoPi;
    return box;
}

// Spherical-coordinate map onto the radius-sqrt(P) sphere:
//   w_m = sqrt(P) cos(psi_m) prod_{j<m} sin(psi_j),  w_last = sqrt(P) prod_j sin(psi_j).
// The squared weights telescope to P for any angles.
inline Eigen::VectorXd spherical_to_weights(const Eigen::VectorXd& psi, double power) {
    if (!(power > 0.0)) throw std::invalid_argument("spherical_to_weights: power must be > 0");
    if (psi.size() < 1) throw std::invalid_argument("spherical_to_weights: empty angle vector");
    const Eigen::Index n = psi.size();
    Eigen::VectorXd w(n + 1);
    double prefix = std::sqrt(power);
    for (Eigen::Index m = 0; m < n; ++m) {
        w(m) = prefix * std::cos(psi(m));
        prefix *= std::sin(psi(m));
    }
    w(n) = prefix;
    return w;
}

// Inverse of spherical_to_weights. Inputs are renormalized onto the sphere
// first (the formulas presuppose full power). On the sphere the running sine
// product equals the remaining tail norm, so each angle is recovered as
// atan2(||w[m+1:]||, w[m]); that form does not compound rounding across
// angles the way the literal quotient recursion does. Angles past an
// exhausted tail are indeterminate and set to pi/2. In full-sphere mode the
// last angle is recovered with the signed last weight, so a negative one
// lands in (pi, 2pi).
inline Eigen::VectorXd weights_to_spherical(const Eigen::VectorXd& weights, double power,
                                            bool full_sphere = true) {
    if (!(power > 0.0)) throw std::invalid_argument("weights_to_spherical: power must be > 0");
    if (weights.size() < 2) throw std::invalid_argument("weights_to_spherical: need >= 2 weights");
    const double norm = weights.norm();
    if (norm == 0.0) throw std::invalid_argument("weights_to_spherical: zero weight vector");
    const double root_p = std::sqrt(power);
    const Eigen::VectorXd w = weights * (root_p / norm);
    const Eigen::Index n = weights.size() - 1;  // angle count
    const double degenerate = root_p * 1e-300;
    Eigen::VectorXd psi(n);
    for (Eigen::Index m = 0; m < n - 1; ++m) {
        const double tail = w.tail(w.size() - m - 1).norm();
        if (tail <= degenerate && std::abs(w(m)) <= degenerate) {
            psi(m) = kPi / 2.0;
            continue;
        }
        psi(m) = std::atan2(tail, w(m));  // in [0, pi] since tail >= 0
    }
    const double last_cos = w(n - 1);
    const double last_sin = w(n);
    if (std::abs(last_cos) <= degenerate && std::abs(last_sin) <= degenerate) {
        psi(n - 1) = kPi / 2.0;
    } else if (full_sphere) {
        double angle = std::atan2(last_sin, last_cos);
        if (angle < 0.0) angle += kTwoPi;
        psi(n - 1) = angle;
    } else {
        psi(n - 1) = std::atan2(std::abs(last_sin), last_cos);
    }
    return psi;
}

// Decode the unconstrained real vector x = [theta; psi; gamma] into
// (W, Phi, C). The weight vector realifies as [Re vec(W); Im vec(W)] with
// column-major vec, so the power constraint holds with equality by
// construction.
inline Design decode(const Eigen::VectorXd& x, const SystemConfig& cfg,
                     const ParamOptions& opts = {}) {
    cfg.validate();
    if (x.size() != design_dim(cfg))
        throw std::invalid_argument("decode: expected length " + std::to_string(design_dim(cfg)) +
                                    ", got " + std::to_string(x.size()));
    const int n = cfg.ris_elements;
    const int m = cfg.bs_antennas;
    const int k = cfg.users;
    const int nw = weight_count(cfg);

    Design d;
    d.phase_shifts.resize(n);
    for (int i = 0; i < n; ++i)
        d.phase_shifts(i) = std::polar(1.0, x(i));

    const Eigen::VectorXd w = spherical_to_weights(x.segment(n, nw - 1), cfg.power);
    Eigen::VectorXcd wc(m * k);
    for (int i = 0; i < m * k; ++i) wc(i) = std::complex<double>(w(i), w(m * k + i));
    d.precoder = Eigen::Map<const Eigen::MatrixXcd>(wc.data(), m, k);

    const Eigen::VectorXd gamma = x.tail(2 * k);
    d.filters.resize(k);
    for (int i = 0; i < k; ++i)
        d.filters(i) = opts.filter_scale *
                       std::complex<double>(std::cos(gamma(i)), std::cos(gamma(k + i)));
    return d;
}

// Inverse of decode up to the parametrization's reach: W is rescaled onto the
// power sphere and, without full_sphere, a negative last weight coordinate is
// reflected. Filters outside filter_scale * [-1, 1] cannot be represented.
inline Eigen::VectorXd encode(const Design& d, const SystemConfig& cfg,
                              const ParamOptions& opts = {}) {
    cfg.validate();
    const int n = cfg.ris_elements;
    const int m = cfg.bs_antennas;
    const int k = cfg.users;
    if (d.phase_shifts.size() != n || d.precoder.rows() != m || d.precoder.cols() != k ||
        d.filters.size() != k)
        throw std::invalid_argument("encode: design shape mismatch");

    Eigen::VectorXd x(design_dim(cfg));
    for (int i = 0; i < n; ++i) {
        double theta = std::arg(d.phase_shifts(i));
        if (theta < 0.0) theta += kTwoPi;
        x(i) = theta;
    }

    Eigen::VectorXd w(2 * m * k);
    const Eigen::Map<const Eigen::VectorXcd> wc(d.precoder.data(), m * k);
    for (int i = 0; i < m * k; ++i) {
        w(i) = wc(i).real();
        w(m * k + i) = wc(i).imag();
    }
    x.segment(n, 2 * m * k - 1) = weights_to_spherical(w, cfg.power, opts.full_sphere);

    for (int i = 0; i < k; ++i) {
        const double re = d.filters(i).real() / opts.filter_scale;
        const double im = d.filters(i).imag() / opts.filter_scale;
        if (std::abs(re) > 1.0 + 1e-12 || std::abs(im) > 1.0 + 1e-12)
            throw std::out_of_range("encode: filter outside the cos-angle range");
        x(n + 2 * m * k - 1 + i) = std::acos(std::clamp(re, -1.0, 1.0));
        x(n + 2 * m * k - 1 + k + i) = std::acos(std::clamp(im, -1.0, 1.0));
    }
    return x;
}

}  // namespace risbo
