#pragma once

// PHAV / DPHAV state constructors and photon statistics. A DPHAV state is a
// uniform phase mixture of coherent states |alpha + beta e^{i phi}>, so all
// quantities here reduce to periodic integrals over phi; the closed-form
// photon distribution is evaluated independently through a hypergeometric
// series and cross-checked against the quadrature path.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dphav/errors.hpp"
#include "dphav/fock.hpp"
#include "dphav/phase_grid.hpp"

namespace dphav {

/// Input-state parameters: displacement amplitude alpha and PHAV amplitude
/// beta. Both can be taken real and non-negative; the PHAV phase is erased
/// by averaging and the displacement phase is a free gauge.
struct DphavSpec {
    double alpha = 0.0;
    double beta = 0.0;

    static DphavSpec from_intensities(double alpha_sq, double beta_sq) {
        if (!(alpha_sq >= 0.0) || !(beta_sq >= 0.0))
            throw std::invalid_argument("DphavSpec: intensities must be non-negative");
        return DphavSpec{std::sqrt(alpha_sq), std::sqrt(beta_sq)};
    }

    double alpha_sq() const { return alpha * alpha; }
    double beta_sq() const { return beta * beta; }

    /// Mean photon number alpha^2 + beta^2.
    double mean_photons() const { return alpha * alpha + beta * beta; }

    /// Largest instantaneous intensity over the phase mixture, (alpha+beta)^2.
    double peak_intensity() const { return (alpha + beta) * (alpha + beta); }

    /// Detection at efficiency eta is equivalent to this rescaled state.
    DphavSpec rescaled(double eta) const {
        const double s = std::sqrt(eta);
        return DphavSpec{alpha * s, beta * s};
    }

    DphavSpec swapped() const { return DphavSpec{beta, alpha}; }
};

namespace detail {

inline void check_spec(const DphavSpec& spec) {
    if (!(spec.alpha >= 0.0) || !(spec.beta >= 0.0) || !std::isfinite(spec.alpha) ||
        !std::isfinite(spec.beta))
        throw std::invalid_argument("DphavSpec: amplitudes must be finite and non-negative");
}

inline void check_efficiency(double eta) {
    if (!(eta >= 0.0) || !(eta <= 1.0))
        throw std::invalid_argument("detection efficiency must lie in [0, 1]");
}

}  // namespace detail

/// Photon-number distribution on 0..n_max.
struct PhotonDistribution {
    std::vector<double> probs;

    int max_photon() const { return static_cast<int>(probs.size()) - 1; }

    double total() const {
        double s = 0.0;
        for (double p : probs) s += p;
        return s;
    }

    double mean() const {
        double m = 0.0;
        for (std::size_t k = 0; k < probs.size(); ++k)
            m += static_cast<double>(k) * probs[k];
        return m;
    }

    double variance() const {
        const double m = mean();
        double s2 = 0.0;
        for (std::size_t k = 0; k < probs.size(); ++k) {
            const double d = static_cast<double>(k) - m;
            s2 += d * d * probs[k];
        }
        return s2;
    }
};

/// Mean, variance and the excess-noise coefficient K of a photon
/// distribution; variance = mean (K mean + 1).
struct PhotonMoments {
    double mean = 0.0;
    double variance = 0.0;
    double k_factor = 0.0;
};

/// PHAV photon distribution: Poisson with mean beta^2.
inline PhotonDistribution phav_photon_dist(double beta_sq, int n_max) {
    if (!(beta_sq >= 0.0))
        throw std::invalid_argument("phav_photon_dist: mean must be non-negative");
    if (n_max < 0) throw std::invalid_argument("phav_photon_dist: n_max must be >= 0");
    PhotonDistribution d;
    d.probs.resize(static_cast<std::size_t>(n_max) + 1);
    detail::poisson_pmf_row(beta_sq, d.probs);
    return d;
}

/// DPHAV photon distribution by phase quadrature,
/// p_k = (2 pi)^-1 Int P_k(alpha^2 + beta^2 + 2 alpha beta cos phi) dphi.
/// This is the authoritative evaluation path.
inline PhotonDistribution dphav_photon_dist_quadrature(const DphavSpec& spec, int n_max,
                                                       const QuadraturePolicy& policy = {}) {
    detail::check_spec(spec);
    if (n_max < 0) throw std::invalid_argument("dphav_photon_dist_quadrature: n_max must be >= 0");
    const double a2b2 = spec.alpha_sq() + spec.beta_sq();
    const double cross = 2.0 * spec.alpha * spec.beta;
    auto eval = [&](std::size_t points) {
        PhaseGrid g(points);
        std::vector<double> acc(static_cast<std::size_t>(n_max) + 1, 0.0);
        std::vector<double> row(acc.size());
        for (std::size_t j = 0; j < g.size(); ++j) {
            detail::poisson_pmf_row(a2b2 + cross * g.cos_at(j), row);
            for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += row[k];
        }
        const double inv = 1.0 / static_cast<double>(g.size());
        for (double& p : acc) p *= inv;
        return acc;
    };
    auto dist = detail::refine_on_grid<std::vector<double>>(
        policy, eval, [](const std::vector<double>& a, const std::vector<double>& b) {
            double d = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
            return d;
        });
    return PhotonDistribution{std::move(dist)};
}

/// Stopping rule for hypergeometric series.
struct SeriesPolicy {
    // The outer binomial sum cancels severely (up to ~1e10 at k ~ 25), so the
    // series runs in extended precision and stops at its epsilon, not the
    // working double's.
    double term_tolerance = 2e-34;
    std::size_t max_terms = 100000;
};

namespace detail {

using quad = __float128;

/// 1F2(a; b1, b2; z) for positive parameters and z >= 0 (all terms positive).
inline quad hyp1f2(quad a, quad b1, quad b2, quad z, const SeriesPolicy& policy) {
    quad term = 1.0, sum = 1.0;
    for (std::size_t s = 0; s < policy.max_terms; ++s) {
        const quad sq = static_cast<quad>(static_cast<double>(s));
        term *= (a + sq) / ((b1 + sq) * (b2 + sq)) * z / (sq + 1.0);
        sum += term;
        if (term < static_cast<quad>(policy.term_tolerance) * sum) return sum;
    }
    throw NumericalError("hyp1f2: series did not converge within max_terms");
}

/// S_h(B) = (1/pi) Int_0^pi e^{B cos psi} cos^h psi dpsi, reduced to a 1F2
/// series (the even/odd h cases carry different parameter sets).
inline quad cosine_exp_moment(int h, quad B, const SeriesPolicy& policy) {
    const quad z = B * B / 4.0;
    if (h % 2 == 0) {
        const int t = h / 2;
        quad pre = 1.0;  // Gamma(t+1/2) / (Gamma(1/2) Gamma(t+1))
        for (int i = 1; i <= t; ++i) pre *= (static_cast<quad>(i) - 0.5) / static_cast<quad>(i);
        return pre * hyp1f2(static_cast<quad>(t) + 0.5, 0.5, static_cast<quad>(t) + 1.0, z, policy);
    }
    const int t = (h - 1) / 2;
    quad pre = B / 2.0;  // (B/2) Gamma(t+3/2) / (Gamma(3/2) Gamma(t+2))
    for (int i = 1; i <= t; ++i)
        pre *= (static_cast<quad>(i) + 0.5) / (static_cast<quad>(i) + 1.0);
    return pre *
           hyp1f2(static_cast<quad>(t) + 1.5, 1.5, static_cast<quad>(t) + 2.0, z, policy);
}

}  // namespace detail

/// Closed-form DPHAV photon probability at photon number k: the binomial
/// expansion of the phase integral in terms of 1F2 series, with
/// A = alpha^2 + beta^2 and B = 2 alpha beta. The alternating h-sum is
/// evaluated in extended precision; dphav_photon_dist_quadrature remains the
/// reference on any disagreement.
inline double dphav_photon_dist_closedform(const DphavSpec& spec, int k,
                                           const SeriesPolicy& policy = {}) {
    detail::check_spec(spec);
    if (k < 0) throw std::invalid_argument("dphav_photon_dist_closedform: k must be >= 0");
    const double a_sum = spec.alpha_sq() + spec.beta_sq();
    const double b_cross = 2.0 * spec.alpha * spec.beta;
    if (a_sum == 0.0) return k == 0 ? 1.0 : 0.0;

    using detail::quad;
    const quad ratio = static_cast<quad>(b_cross) / static_cast<quad>(a_sum);
    const quad B = static_cast<quad>(b_cross);
    quad sum = 0.0;
    quad coeff = 1.0;  // C(k,h) (-ratio)^h, advanced by recursion
    for (int h = 0; h <= k; ++h) {
        sum += coeff * detail::cosine_exp_moment(h, B, policy);
        coeff *= -ratio * static_cast<quad>(k - h) / static_cast<quad>(h + 1);
    }
    const double prefactor =
        std::exp(-a_sum + static_cast<double>(k) * std::log(a_sum) - detail::log_factorial(k));
    return static_cast<double>(sum) * prefactor;
}

/// Mean alpha^2 + beta^2, variance mean (K mean + 1) with
/// K = 2 alpha^2 beta^2 / (alpha^2 + beta^2)^2. Super-Poissonian whenever
/// both amplitudes are present: variance - mean = 2 alpha^2 beta^2.
inline PhotonMoments dphav_moments(const DphavSpec& spec) {
    detail::check_spec(spec);
    const double a2 = spec.alpha_sq(), b2 = spec.beta_sq();
    const double mean = a2 + b2;
    if (mean == 0.0) return PhotonMoments{0.0, 0.0, 0.0};
    const double k_factor = 2.0 * a2 * b2 / (mean * mean);
    return PhotonMoments{mean, mean * (k_factor * mean + 1.0), k_factor};
}

namespace detail {

/// Accumulates sum_j w_j |gamma_j><gamma_j| on the truncated Fock basis with
/// gamma_j = a + b e^{i phi_j}; returns the lower triangle (selfadjoint).
inline Eigen::MatrixXcd phase_mixture_accumulate(double a, double b, const PhaseGrid& grid,
                                                 const double* weights, int n_max) {
    const int d = n_max + 1;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
    Eigen::VectorXcd v(d);
    const double uniform_w = 1.0 / static_cast<double>(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double w = weights ? weights[j] : uniform_w;
        if (w == 0.0) continue;
        const std::complex<double> gamma(a + b * grid.cos_at(j), b * grid.sin_at(j));
        v[0] = std::exp(-0.5 * std::norm(gamma));
        for (int n = 0; n < n_max; ++n)
            v[n + 1] = v[n] * gamma / std::sqrt(static_cast<double>(n + 1));
        acc.selfadjointView<Eigen::Lower>().rankUpdate(v, w);
    }
    return acc;
}

/// Mirrors the lower triangle, asserts the real gauge (evenness of the
/// weights makes the matrix real; the residue is checked, not silently
/// dropped) and normalizes the trace.
inline FockDensityMatrix finalize_phase_mixture(const Eigen::MatrixXcd& acc,
                                                double trace_tolerance) {
    double imag_residue = 0.0;
    for (int c = 0; c < acc.cols(); ++c)
        for (int r = c; r < acc.rows(); ++r)
            imag_residue = std::max(imag_residue, std::abs(acc(r, c).imag()));
    if (imag_residue >= 1e-12)
        throw NumericalError("phase mixture density matrix: imaginary residue " +
                             std::to_string(imag_residue) + " exceeds the real-gauge bound");
    Eigen::MatrixXcd full = acc.selfadjointView<Eigen::Lower>();
    full = full.real().cast<std::complex<double>>();
    return FockDensityMatrix::from_hermitian(std::move(full), trace_tolerance);
}

inline FockDensityMatrix phase_mixture_matrix(double a, double b, const PhaseGrid& grid,
                                              const double* weights, int n_max,
                                              double trace_tolerance = 1e-8) {
    return finalize_phase_mixture(phase_mixture_accumulate(a, b, grid, weights, n_max),
                                  trace_tolerance);
}

}  // namespace detail

/// DPHAV density matrix rho_{nm} = (2 pi)^-1 Int <n|gamma(phi)><gamma(phi)|m> dphi
/// with gamma(phi) = alpha + beta e^{i phi}. The diagonal reproduces
/// dphav_photon_dist_quadrature.
inline FockDensityMatrix dphav_density_matrix(const DphavSpec& spec, int n_max,
                                              const QuadraturePolicy& policy = {}) {
    detail::check_spec(spec);
    if (n_max < 0) throw std::invalid_argument("dphav_density_matrix: n_max must be >= 0");
    auto eval = [&](std::size_t points) {
        return detail::phase_mixture_accumulate(spec.alpha, spec.beta, PhaseGrid(points), nullptr,
                                                n_max);
    };
    Eigen::MatrixXcd acc = detail::refine_on_grid<Eigen::MatrixXcd>(
        policy, eval, [](const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y) {
            return (x - y).cwiseAbs().maxCoeff();
        });
    return detail::finalize_phase_mixture(acc, 1e-8);
}

/// Rectangular phase-space sampling window with uniformly spaced nodes.
struct PhaseSpaceGrid {
    double x_min = -8.0, x_max = 8.0;
    int nx = 101;
    double p_min = -8.0, p_max = 8.0;
    int np = 101;

    static PhaseSpaceGrid centered(double extent, int n) {
        return PhaseSpaceGrid{-extent, extent, n, -extent, extent, n};
    }

    double x_at(int i) const {
        return nx == 1 ? x_min : x_min + (x_max - x_min) * static_cast<double>(i) / (nx - 1);
    }
    double p_at(int i) const {
        return np == 1 ? p_min : p_min + (p_max - p_min) * static_cast<double>(i) / (np - 1);
    }
    double cell_area() const {
        const double dx = nx == 1 ? 0.0 : (x_max - x_min) / (nx - 1);
        const double dp = np == 1 ? 0.0 : (p_max - p_min) / (np - 1);
        return dx * dp;
    }
};

/// W(x,p) sampled on a PhaseSpaceGrid. `coverage_ok` is false when the grid
/// misses part of the mixture (less than five vacuum standard deviations of
/// margin around the coherent-state centers).
struct WignerField {
    PhaseSpaceGrid grid;
    Eigen::MatrixXd values;  // (ix, ip)
    bool coverage_ok = true;

    double integral() const { return values.sum() * grid.cell_area(); }
};

/// Wigner function of the phase mixture Int p(phi) |gamma(phi)><gamma(phi)| dphi
/// with gamma(phi) = alpha_eff + beta_eff e^{i phi}, in the convention where
/// the vacuum has quadrature variance 1/2:
/// W(x,p) = Int p(phi) (1/pi) exp(-(x - sqrt(2) Re gamma)^2 - (p - sqrt(2) Im gamma)^2) dphi.
inline WignerField wigner_of_phase_mixture(double alpha_eff, double beta_eff,
                                           const PhaseDistribution& pd,
                                           const PhaseSpaceGrid& grid) {
    if (!(alpha_eff >= 0.0) || !(beta_eff >= 0.0))
        throw std::invalid_argument("wigner_of_phase_mixture: amplitudes must be non-negative");
    const double root2 = std::numbers::sqrt2;
    WignerField field;
    field.grid = grid;
    field.values = Eigen::MatrixXd::Zero(grid.nx, grid.np);

    Eigen::VectorXd ex(grid.nx), ep(grid.np);
    const double w_phase = pd.grid.step() / std::numbers::pi;
    for (std::size_t j = 0; j < pd.grid.size(); ++j) {
        const double w = pd.density[j] * w_phase;
        if (w == 0.0) continue;
        const double cx = root2 * (alpha_eff + beta_eff * pd.grid.cos_at(j));
        const double cp = root2 * beta_eff * pd.grid.sin_at(j);
        for (int i = 0; i < grid.nx; ++i) {
            const double dx = grid.x_at(i) - cx;
            ex[i] = std::exp(-dx * dx);
        }
        for (int i = 0; i < grid.np; ++i) {
            const double dp = grid.p_at(i) - cp;
            ep[i] = std::exp(-dp * dp);
        }
        field.values.noalias() += w * ex * ep.transpose();
    }

    // five standard deviations (sigma = 1/sqrt(2)) beyond the center envelope
    const double margin = 5.0 / root2;
    const double x_lo = root2 * (alpha_eff - beta_eff) - margin;
    const double x_hi = root2 * (alpha_eff + beta_eff) + margin;
    const double p_hi = root2 * beta_eff + margin;
    field.coverage_ok = grid.x_min <= x_lo && grid.x_max >= x_hi && grid.p_min <= -p_hi &&
                        grid.p_max >= p_hi;
    return field;
}

}  // namespace dphav
