#pragma once

// Truncated Fock-space primitives: coherent-state amplitudes, Hermitian
// density matrices and their spectra, von Neumann entropy.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>

#include "dphav/errors.hpp"

namespace dphav {

/// Controls how photon-number space is truncated. `tail_tolerance` bounds
/// the Poisson probability allowed beyond the cutoff; `hard_cap` bounds the
/// cutoff itself.
struct TruncationPolicy {
    double tail_tolerance = 1e-12;
    int hard_cap = 1024;
};

namespace detail {

inline double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

/// Poisson pmf, evaluated in log space so large k never overflows.
inline double poisson_pmf(int k, double mu) {
    if (k < 0) return 0.0;
    if (mu == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(-mu + static_cast<double>(k) * std::log(mu) - log_factorial(k));
}

/// Fills out[k] = P_k(mu) for k = 0..out.size()-1 using the forward
/// recursion; falls back to per-entry log-space evaluation when exp(-mu)
/// would underflow.
inline void poisson_pmf_row(double mu, std::span<double> out) {
    if (out.empty()) return;
    if (mu == 0.0) {
        out[0] = 1.0;
        for (std::size_t k = 1; k < out.size(); ++k) out[k] = 0.0;
        return;
    }
    if (mu < 700.0) {
        double p = std::exp(-mu);
        out[0] = p;
        for (std::size_t k = 1; k < out.size(); ++k) {
            p *= mu / static_cast<double>(k);
            out[k] = p;
        }
        return;
    }
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = poisson_pmf(static_cast<int>(k), mu);
}

/// Probability that a Poisson(mu) variate exceeds n_max, summed from above
/// until the terms stop mattering.
inline double poisson_tail(double mu, int n_max) {
    if (mu == 0.0) return 0.0;
    double tail = 0.0;
    double term = poisson_pmf(n_max + 1, mu);
    for (int k = n_max + 1; term > 0.0; ++k) {
        tail += term;
        term *= mu / static_cast<double>(k + 1);
        if (k > n_max + 1 && static_cast<double>(k) > mu && term < tail * 1e-18) break;
    }
    return tail;
}

}  // namespace detail

/// Smallest cutoff n_max whose Poisson tail at intensity `mean` is below the
/// policy tolerance. Starts from the rule n_max = ceil(mean + 10*sqrt(mean) + 20),
/// which already loses < 1e-12 probability across the intensity range this
/// library targets, and escalates if a tighter tolerance demands it.
inline int choose_cutoff(double mean, const TruncationPolicy& policy = {}) {
    if (!(mean >= 0.0))
        throw std::invalid_argument("choose_cutoff: mean intensity must be non-negative");
    if (policy.hard_cap < 1 || !(policy.tail_tolerance > 0.0) || !(policy.tail_tolerance < 1.0))
        throw std::invalid_argument("choose_cutoff: invalid truncation policy");
    const double guess = std::ceil(mean + 10.0 * std::sqrt(mean) + 20.0);
    if (guess > static_cast<double>(policy.hard_cap))
        throw TruncationError("choose_cutoff: mean intensity " + std::to_string(mean) +
                              " needs a cutoff beyond the hard cap " +
                              std::to_string(policy.hard_cap));
    int n_max = static_cast<int>(guess);
    while (detail::poisson_tail(mean, n_max) >= policy.tail_tolerance) {
        ++n_max;
        if (n_max > policy.hard_cap)
            throw TruncationError("choose_cutoff: mean intensity " + std::to_string(mean) +
                                  " needs a cutoff beyond the hard cap " +
                                  std::to_string(policy.hard_cap));
    }
    return n_max;
}

/// <n|gamma> = exp(-|gamma|^2/2) gamma^n / sqrt(n!), in log space.
inline std::complex<double> coherent_overlap(std::complex<double> gamma, int n) {
    if (n < 0) throw std::invalid_argument("coherent_overlap: photon number must be >= 0");
    const double r = std::abs(gamma);
    if (r == 0.0) return n == 0 ? 1.0 : 0.0;
    const double log_mag =
        -0.5 * r * r + static_cast<double>(n) * std::log(r) - 0.5 * detail::log_factorial(n);
    return std::polar(std::exp(log_mag), static_cast<double>(n) * std::arg(gamma));
}

/// <n|gamma> for n = 0..n_max via the stable amplitude recursion
/// v_{n+1} = v_n * gamma / sqrt(n+1).
inline Eigen::VectorXcd coherent_amplitudes(std::complex<double> gamma, int n_max) {
    Eigen::VectorXcd v(n_max + 1);
    v[0] = std::exp(-0.5 * std::norm(gamma));
    for (int n = 0; n < n_max; ++n)
        v[n + 1] = v[n] * gamma / std::sqrt(static_cast<double>(n + 1));
    return v;
}

/// Density matrix on the truncated photon-number basis {|0>, ..., |n_max>}.
/// Hermitian by construction and trace-normalized to 1; the raw trace must
/// already be within `trace_tolerance` of 1, otherwise the truncation was
/// too aggressive for the state.
class FockDensityMatrix {
public:
    static FockDensityMatrix from_hermitian(Eigen::MatrixXcd m, double trace_tolerance = 1e-8) {
        if (m.rows() != m.cols() || m.rows() < 1)
            throw std::invalid_argument("FockDensityMatrix: matrix must be square and non-empty");
        Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
        const double tr = h.real().trace();
        if (std::abs(tr - 1.0) > trace_tolerance)
            throw TruncationError("FockDensityMatrix: raw trace " + std::to_string(tr) +
                                  " deviates from 1 beyond tolerance; increase the cutoff");
        h /= tr;
        return FockDensityMatrix(std::move(h));
    }

    /// Diagonal matrix with the given spectrum (normalized the same way).
    static FockDensityMatrix from_spectrum(const Eigen::VectorXd& probs,
                                           double trace_tolerance = 1e-8) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(probs.size(), probs.size());
        m.diagonal() = probs.cast<std::complex<double>>();
        return from_hermitian(std::move(m), trace_tolerance);
    }

    int dim() const { return static_cast<int>(elements_.rows()); }
    const Eigen::MatrixXcd& elements() const { return elements_; }

    /// Diagonal in the photon-number basis, i.e. the photon distribution.
    Eigen::VectorXd diagonal() const { return elements_.diagonal().real(); }

    /// Ascending real spectrum from a Hermitian eigensolver.
    Eigen::VectorXd eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(elements_,
                                                               Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success)
            throw NumericalError("FockDensityMatrix: Hermitian eigensolver did not converge");
        return solver.eigenvalues();
    }

private:
    explicit FockDensityMatrix(Eigen::MatrixXcd m) : elements_(std::move(m)) {}
    Eigen::MatrixXcd elements_;
};

/// -sum lambda_i ln lambda_i in nats, with 0 ln 0 = 0. Eigenvalues below
/// `positivity_tolerance` (truncation noise) are clamped to zero.
inline double von_neumann_entropy(const FockDensityMatrix& rho,
                                  double positivity_tolerance = 1e-10) {
    const Eigen::VectorXd lambda = rho.eigenvalues();
    double s = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        const double l = lambda[i];
        if (l > positivity_tolerance) s -= l * std::log(l);
    }
    return s;
}

}  // namespace dphav
