#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "risbo/system_model.hpp"

namespace risbo {

struct BaselineConfig {
    double outer_tol = 1e-6;       // epsilon on |delta sum MSE| between outer iterations
    int max_outer_iterations = 500;
    double mm_tol = 1e-9;
    int mm_max_iterations = 500;
    int wc_passes = 2;             // precoder/filter alternations per outer iteration
    // Initial phase vectors to try: the all-ones start plus fixed-seed random
    // phases. The alternation is a descent method and stalls in local optima
    // from a single start; the best run over the set is returned.
    int phase_restarts = 8;

    void validate() const {
        if (!(outer_tol > 0.0)) throw std::invalid_argument("BaselineConfig: outer_tol must be > 0");
        if (max_outer_iterations < 1)
            throw std::invalid_argument("BaselineConfig: max_outer_iterations must be >= 1");
        if (!(mm_tol > 0.0)) throw std::invalid_argument("BaselineConfig: mm_tol must be > 0");
        if (mm_max_iterations < 1)
            throw std::invalid_argument("BaselineConfig: mm_max_iterations must be >= 1");
        if (wc_passes < 1) throw std::invalid_argument("BaselineConfig: wc_passes must be >= 1");
        if (phase_restarts < 1)
            throw std::invalid_argument("BaselineConfig: phase_restarts must be >= 1");
    }
};

struct PrecoderUpdate {
    Eigen::MatrixXcd wbar;  // unnormalized precoder
    double alpha = 0.0;     // sqrt(P) / ||wbar||_F; alpha * wbar meets the power budget
};

// Stationary point of the scaled Lagrangian for fixed filters and phases:
//   wbar = (A^H A + (noise_var/P) tr{cbar^H cbar} I)^{-1} A^H,  A = Cbar F Phi H.
// The printed closed form cannot be multiplied as stated; this is the direct
// solution of d/dWbar* = 0 and is validated by finite-difference stationarity
// checks in the tests.
inline PrecoderUpdate update_precoder(const Eigen::VectorXcd& cbar, const Eigen::VectorXcd& phi,
                                      const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& F,
                                      double power, double noise_var) {
    if (!(power > 0.0)) throw std::invalid_argument("update_precoder: power must be > 0");
    if (F.cols() != H.rows() || phi.size() != H.rows() || cbar.size() != F.rows())
        throw std::invalid_argument("update_precoder: shape mismatch");
    const double filter_energy = cbar.squaredNorm();
    if (filter_energy == 0.0)
        throw std::invalid_argument("update_precoder: degenerate input (zero filters)");

    const Eigen::MatrixXcd a = cbar.asDiagonal() * F * phi.asDiagonal() * H;  // K x M
    Eigen::MatrixXcd lhs = a.adjoint() * a;
    lhs.diagonal().array() += noise_var / power * filter_energy;

    Eigen::LLT<Eigen::MatrixXcd> llt(lhs);
    PrecoderUpdate out;
    if (llt.info() == Eigen::Success) {
        out.wbar = llt.solve(a.adjoint());
    } else {
        Eigen::LDLT<Eigen::MatrixXcd> ldlt(lhs);
        if (ldlt.info() != Eigen::Success)
            throw std::invalid_argument("update_precoder: degenerate input (singular system)");
        out.wbar = ldlt.solve(a.adjoint());
    }
    const double norm = out.wbar.norm();
    if (norm == 0.0) throw std::invalid_argument("update_precoder: degenerate input (zero precoder)");
    out.alpha = std::sqrt(power) / norm;
    return out;
}

// Per-user Wiener filter for a fixed precoder and phases. The sum MSE is
// separable across the diagonal filter entries, so the minimizer is
//   c_k = conj(g_kk) / (||g_k||^2 + noise_var),  g = F Phi H W.
// Pass the power-normalized precoder; the result is then the actual filter C.
inline Eigen::VectorXcd update_filter(const Eigen::MatrixXcd& W, const Eigen::VectorXcd& phi,
                                      const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& F,
                                      double noise_var) {
    if (F.cols() != H.rows() || phi.size() != H.rows() || W.rows() != H.cols() ||
        W.cols() != F.rows())
        throw std::invalid_argument("update_filter: shape mismatch");
    const Eigen::MatrixXcd g = F * phi.asDiagonal() * H * W;  // K x K
    Eigen::VectorXcd c(g.rows());
    for (Eigen::Index k = 0; k < g.rows(); ++k) {
        const double denom = g.row(k).squaredNorm() + noise_var;
        c(k) = (denom > 0.0) ? std::conj(g(k, k)) / denom : std::complex<double>(0.0, 0.0);
    }
    return c;
}

// Largest eigenvalue of a Hermitian PSD matrix by power iteration from the
// normalized all-ones vector. The result is inflated by a relative 1e-9 so
// the majorizer built from it stays an upper bound despite the finite
// tolerance.
inline double power_iteration_lambda_max(const Eigen::MatrixXcd& hermitian, double rel_tol = 1e-10,
                                         int max_steps = 10000) {
    const Eigen::Index n = hermitian.rows();
    if (n == 0 || hermitian.cols() != n)
        throw std::invalid_argument("power_iteration_lambda_max: square matrix required");
    Eigen::VectorXcd v = Eigen::VectorXcd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double lambda = 0.0;
    for (int step = 0; step < max_steps; ++step) {
        const Eigen::VectorXcd w = hermitian * v;
        const double wn = w.norm();
        if (wn < 1e-300) return 0.0;  // (numerically) zero matrix
        const double rayleigh = std::real(v.dot(w));
        v = w / wn;
        if (step > 0 && std::abs(rayleigh - lambda) <= rel_tol * std::max(std::abs(rayleigh), 1e-30)) {
            lambda = rayleigh;
            return lambda * (1.0 + 1e-9);
        }
        lambda = rayleigh;
    }
    throw std::runtime_error("power_iteration_lambda_max: no convergence");
}

// Quadratic form of the phase subproblem: for fixed (W, C) the sum MSE equals
//   phi^H quad phi - 2 Re{phi^H linear} + const,
// with quad = (F^H C^H C F) hadamard (H W W^H H^H)^T and
// linear = conj(diag(H W C F)). The Hadamard orientation and the conjugate on
// the linear term are pinned by the trace-identity tests.
struct MmState {
    Eigen::VectorXcd phi;     // current unit-modulus iterate
    Eigen::MatrixXcd quad;    // Hermitian PSD
    Eigen::VectorXcd linear;
    double lambda_max = 0.0;

    double objective(const Eigen::VectorXcd& p) const {
        const std::complex<double> q = p.dot(quad * p);  // Eigen dot conjugates the left factor
        return std::real(q) - 2.0 * std::real(p.dot(linear));
    }
};

inline MmState build_mm_problem(const Eigen::MatrixXcd& W, const Eigen::VectorXcd& filters,
                                const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& F) {
    if (F.cols() != H.rows() || W.rows() != H.cols() || W.cols() != F.rows() ||
        filters.size() != F.rows())
        throw std::invalid_argument("build_mm_problem: shape mismatch");
    MmState st;
    const Eigen::VectorXcd gains = filters.cwiseAbs2().cast<std::complex<double>>();
    const Eigen::MatrixXcd a = F.adjoint() * gains.asDiagonal() * F;  // N x N
    const Eigen::MatrixXcd hw = H * W;                                              // N x K
    const Eigen::MatrixXcd b = hw * hw.adjoint();                                   // N x N
    st.quad = a.cwiseProduct(b.transpose());
    st.linear = (hw * filters.asDiagonal() * F).diagonal().conjugate();
    st.lambda_max = power_iteration_lambda_max(st.quad);
    st.phi = Eigen::VectorXcd::Constant(F.cols(), 1.0);
    return st;
}

struct MmResult {
    Eigen::VectorXcd phi;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Minimize the phase quadratic over unit-modulus entries by
// majorization-minimization: each step maximizes 2 Re{phi^H q} with
//   q = (lambda_max I - quad) phi + linear,
// whose solution is the entrywise phase alignment phi = exp(j arg(q)). The
// objective never increases; the printed recursion carries the opposite sign
// on the linear term and climbs instead, so the sign here is the one the
// descent tests pin down.
inline MmResult mm_phase(const MmState& state, double tol, int max_iterations) {
    if (!(tol > 0.0)) throw std::invalid_argument("mm_phase: tol must be > 0");
    if (max_iterations < 1) throw std::invalid_argument("mm_phase: max_iterations must be >= 1");
    if (state.phi.size() != state.quad.rows() || state.linear.size() != state.quad.rows())
        throw std::invalid_argument("mm_phase: inconsistent state");

    MmResult res;
    res.phi = state.phi;
    double f = state.objective(res.phi);
    for (int it = 1; it <= max_iterations; ++it) {
        Eigen::VectorXcd q = state.lambda_max * res.phi - state.quad * res.phi + state.linear;
        Eigen::VectorXcd next(res.phi.size());
        for (Eigen::Index i = 0; i < q.size(); ++i) {
            const double mag = std::abs(q(i));
            next(i) = (mag > 0.0) ? q(i) / mag : res.phi(i);  // flat direction: keep the phase
        }
        const double f_next = state.objective(next);
        res.phi = next;
        res.iterations = it;
        if (std::abs(f_next - f) < tol) {
            f = f_next;
            res.converged = true;
            break;
        }
        f = f_next;
    }
    res.objective = f;
    return res;
}

struct KnownCsiResult {
    Design design;
    std::vector<double> mse_trace;  // sum MSE after each outer iteration
    int outer_iterations = 0;
    bool converged = false;
};

namespace detail {

inline KnownCsiResult solve_known_csi_from(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& F,
                                           const BaselineConfig& cfg, double noise_var,
                                           double power, const Eigen::VectorXcd& phi0) {
    ChannelRealization ch;
    ch.bs_ris = H;
    ch.ris_user = F;

    KnownCsiResult res;
    Design d;
    d.phase_shifts = phi0;
    Eigen::VectorXcd cbar = Eigen::VectorXcd::Constant(F.rows(), 1.0);

    double prev = std::numeric_limits<double>::infinity();
    for (int outer = 1; outer <= cfg.max_outer_iterations; ++outer) {
        for (int pass = 0; pass < cfg.wc_passes; ++pass) {
            const PrecoderUpdate pu = update_precoder(cbar, d.phase_shifts, H, F, power, noise_var);
            d.precoder = pu.alpha * pu.wbar;
            d.filters = update_filter(d.precoder, d.phase_shifts, H, F, noise_var);
            cbar = pu.alpha * d.filters;
        }
        MmState st = build_mm_problem(d.precoder, d.filters, H, F);
        st.phi = d.phase_shifts;
        d.phase_shifts = mm_phase(st, cfg.mm_tol, cfg.mm_max_iterations).phi;

        const double mse = exact_sum_mse(d, ch, noise_var);
        res.mse_trace.push_back(mse);
        res.outer_iterations = outer;
        if (std::abs(prev - mse) < cfg.outer_tol) {
            res.converged = true;
            break;
        }
        prev = mse;
    }
    res.design = std::move(d);
    return res;
}

}  // namespace detail

// Alternating optimization with perfect CSI: closed-form precoder and filter
// updates, then MM for the phases, until the sum MSE improvement drops below
// outer_tol. Every block is a descent step, so each run's trace is
// non-increasing. The run is repeated from phase_restarts deterministic
// initial phase vectors and the best final sum MSE wins.
inline KnownCsiResult solve_known_csi(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& F,
                                      const BaselineConfig& cfg, double noise_var, double power) {
    cfg.validate();
    if (F.cols() != H.rows()) throw std::invalid_argument("solve_known_csi: shape mismatch");
    const Eigen::Index n = H.rows();

    Rng phase_rng(0x52495342ULL);  // fixed stream, the solver itself is deterministic
    KnownCsiResult best;
    for (int restart = 0; restart < cfg.phase_restarts; ++restart) {
        Eigen::VectorXcd phi0(n);
        if (restart == 0) {
            phi0.setConstant(1.0);
        } else {
            for (Eigen::Index i = 0; i < n; ++i)
                phi0(i) = std::polar(1.0, phase_rng.uniform(0.0, kTwoPi));
        }
        KnownCsiResult run = detail::solve_known_csi_from(H, F, cfg, noise_var, power, phi0);
        if (best.mse_trace.empty() || run.mse_trace.back() < best.mse_trace.back())
            best = std::move(run);
    }
    return best;
}

}  // namespace risbo
