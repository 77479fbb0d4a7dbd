// Independent reference implementations used only by the test suites. They
// deliberately avoid the library's solve paths (explicit inverses, direct
// formula transcriptions, exhaustive search) so agreement is meaningful.
#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "risbo/gp.hpp"
#include "risbo/known_csi.hpp"
#include "risbo/parametrization.hpp"
#include "risbo/rng.hpp"
#include "risbo/system_model.hpp"

namespace oracles {

// Windowed GP posterior computed the naive way: build the Gram matrix, invert
// it explicitly, apply the textbook formulas.
inline risbo::Posterior dense_posterior(const risbo::SampleWindow& win,
                                        const Eigen::VectorXd& xq, const risbo::KernelSpec& spec,
                                        double jitter) {
    const int n = win.size();
    Eigen::MatrixXd gram(n, n);
    Eigen::VectorXd y(n), k(n);
    for (int i = 0; i < n; ++i) {
        y(i) = win.value(i);
        k(i) = risbo::kernel_eval(spec, (win.point(i) - xq).norm());
        for (int j = 0; j < n; ++j)
            gram(i, j) = risbo::kernel_eval(spec, (win.point(i) - win.point(j)).norm());
    }
    gram.diagonal().array() += jitter;
    const Eigen::MatrixXd inv = gram.inverse();
    risbo::Posterior p;
    p.mean = k.dot(inv * y);
    p.variance = 1.0 - k.dot(inv * k);
    return p;
}

// Segment posterior as printed: full-dimension Gram matrix, segment-restricted
// cross-covariance vector.
inline risbo::Posterior dense_segment_posterior(const risbo::SampleWindow& win,
                                                const std::vector<int>& coords,
                                                const Eigen::VectorXd& xq_seg,
                                                const risbo::KernelSpec& spec, double jitter) {
    const int n = win.size();
    Eigen::MatrixXd gram(n, n);
    Eigen::VectorXd y(n), k(n);
    for (int i = 0; i < n; ++i) {
        y(i) = win.value(i);
        double d2 = 0.0;
        for (std::size_t c = 0; c < coords.size(); ++c) {
            const double diff = win.point(i)(coords[c]) - xq_seg(static_cast<Eigen::Index>(c));
            d2 += diff * diff;
        }
        k(i) = risbo::kernel_eval(spec, std::sqrt(d2));
        for (int j = 0; j < n; ++j)
            gram(i, j) = risbo::kernel_eval(spec, (win.point(i) - win.point(j)).norm());
    }
    gram.diagonal().array() += jitter;
    const Eigen::MatrixXd inv = gram.inverse();
    risbo::Posterior p;
    p.mean = k.dot(inv * y);
    p.variance = 1.0 - k.dot(inv * k);
    return p;
}

inline Eigen::MatrixXcd random_complex_matrix(Eigen::Index rows, Eigen::Index cols,
                                              risbo::Rng& rng) {
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.complex_gaussian(1.0);
    return m;
}

inline Eigen::VectorXcd random_unit_phases(Eigen::Index n, risbo::Rng& rng) {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = std::polar(1.0, rng.uniform(0.0, risbo::kTwoPi));
    return v;
}

inline risbo::ChannelRealization random_channel(int m, int n, int k, risbo::Rng& rng) {
    risbo::ChannelRealization ch;
    ch.bs_ris = random_complex_matrix(n, m, rng);
    ch.ris_user = random_complex_matrix(k, n, rng);
    return ch;
}

// A random design with the precoder scaled onto the power sphere and filters
// inside the unit box.
inline risbo::Design random_design(int m, int n, int k, double power, risbo::Rng& rng) {
    risbo::Design d;
    d.precoder = random_complex_matrix(m, k, rng);
    d.precoder *= std::sqrt(power) / d.precoder.norm();
    d.phase_shifts = random_unit_phases(n, rng);
    d.filters.resize(k);
    for (int i = 0; i < k; ++i)
        d.filters(i) = std::complex<double>(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    return d;
}

// Scaled Lagrangian objective for the precoder subproblem with the
// multiplier eliminated: ||A wbar - I||_F^2 + (noise_var/P) ||cbar||^2 ||wbar||_F^2.
// Its unconstrained minimizer corresponds to the constrained (W, alpha) pair.
inline double precoder_lagrangian(const Eigen::MatrixXcd& wbar, const Eigen::VectorXcd& cbar,
                                  const Eigen::VectorXcd& phi, const Eigen::MatrixXcd& H,
                                  const Eigen::MatrixXcd& F, double power, double noise_var) {
    const Eigen::MatrixXcd a = cbar.asDiagonal() * F * phi.asDiagonal() * H;
    Eigen::MatrixXcd err = a * wbar;
    err.diagonal().array() -= 1.0;
    return err.squaredNorm() + noise_var / power * cbar.squaredNorm() * wbar.squaredNorm();
}

// Best sum MSE over an exhaustive phase grid, with the precoder and filters
// re-derived in closed form at every grid point from multiple filter
// restarts. Small systems only.
inline double brute_force_known_csi_mse(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& F,
                                        double noise_var, double power, int grid, int restarts,
                                        int alternations, std::uint64_t seed) {
    const Eigen::Index n = H.rows();
    const Eigen::Index k = F.rows();
    risbo::ChannelRealization ch;
    ch.bs_ris = H;
    ch.ris_user = F;
    risbo::Rng rng(seed);

    std::vector<Eigen::VectorXcd> starts;
    starts.push_back(Eigen::VectorXcd::Constant(k, 1.0));
    for (int r = 1; r < restarts; ++r) {
        Eigen::VectorXcd c(k);
        for (Eigen::Index i = 0; i < k; ++i) c(i) = rng.complex_gaussian(1.0);
        starts.push_back(c);
    }

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> odo(n, 0);
    Eigen::VectorXcd phi(n);
    while (true) {
        for (Eigen::Index i = 0; i < n; ++i)
            phi(i) = std::polar(1.0, risbo::kTwoPi * odo[i] / grid);
        for (const auto& start : starts) {
            Eigen::VectorXcd cbar = start;
            risbo::Design d;
            d.phase_shifts = phi;
            for (int it = 0; it < alternations; ++it) {
                risbo::PrecoderUpdate pu;
                try {
                    pu = risbo::update_precoder(cbar, phi, H, F, power, noise_var);
                } catch (const std::invalid_argument&) {
                    break;  // degenerate filter start
                }
                d.precoder = pu.alpha * pu.wbar;
                d.filters = risbo::update_filter(d.precoder, phi, H, F, noise_var);
                cbar = pu.alpha * d.filters;
            }
            if (d.precoder.size() > 0)
                best = std::min(best, risbo::exact_sum_mse(d, ch, noise_var));
        }
        Eigen::Index carry = n - 1;
        while (carry >= 0 && ++odo[carry] == grid) odo[carry--] = 0;
        if (carry < 0) break;
    }
    return best;
}

// Exhaustive minimum of the phase quadratic on an N=2 grid.
inline double brute_force_phase_minimum(const risbo::MmState& st, int grid) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXcd phi(2);
    for (int i = 0; i < grid; ++i) {
        phi(0) = std::polar(1.0, risbo::kTwoPi * i / grid);
        for (int j = 0; j < grid; ++j) {
            phi(1) = std::polar(1.0, risbo::kTwoPi * j / grid);
            best = std::min(best, st.objective(phi));
        }
    }
    return best;
}

// Received-power optimum for a single user: matched beamforming in closed
// form at every point of an exhaustive phase grid (N = 2).
inline double brute_force_received_power(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& F,
                                         double power, double noise_var, int grid) {
    double best = 0.0;
    Eigen::VectorXcd phi(2);
    for (int i = 0; i < grid; ++i) {
        phi(0) = std::polar(1.0, risbo::kTwoPi * i / grid);
        for (int j = 0; j < grid; ++j) {
            phi(1) = std::polar(1.0, risbo::kTwoPi * j / grid);
            const Eigen::RowVectorXcd eff = F.row(0) * phi.asDiagonal() * H;
            best = std::max(best, power * eff.squaredNorm() + noise_var);
        }
    }
    return best;
}

}  // namespace oracles
