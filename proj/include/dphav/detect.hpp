#pragma once

// Detection-layer transforms: Bernoulli (binomial thinning) efficiency map,
// the amplitude-rescaling equivalence it implies for classical states, joint
// two-arm detected distributions, and intensity correlation coefficients.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dphav/errors.hpp"
#include "dphav/fock.hpp"
#include "dphav/phase_grid.hpp"
#include "dphav/splitcond.hpp"
#include "dphav/states.hpp"

namespace dphav {

/// Binomial thinning at efficiency eta:
/// out[m] = sum_{s >= m} C(s, m) eta^m (1 - eta)^{s-m} dist[s].
inline PhotonDistribution bernoulli_map(const PhotonDistribution& dist, double eta) {
    detail::check_efficiency(eta);
    if (eta == 1.0) return dist;
    const std::size_t size = dist.probs.size();
    std::vector<double> out(size, 0.0);
    if (eta == 0.0) {
        if (!out.empty()) out[0] = dist.total();
        return PhotonDistribution{std::move(out)};
    }
    const double log_eta = std::log(eta);
    const double log_miss = std::log1p(-eta);
    for (std::size_t s = 0; s < size; ++s) {
        const double p = dist.probs[s];
        if (p == 0.0) continue;
        const double lf_s = detail::log_factorial(static_cast<int>(s));
        for (std::size_t m = 0; m <= s; ++m) {
            const double log_kernel = lf_s - detail::log_factorial(static_cast<int>(m)) -
                                      detail::log_factorial(static_cast<int>(s - m)) +
                                      static_cast<double>(m) * log_eta +
                                      static_cast<double>(s - m) * log_miss;
            out[m] += p * std::exp(log_kernel);
        }
    }
    return PhotonDistribution{std::move(out)};
}

/// Max-norm distance between thinning the DPHAV photon distribution and the
/// distribution of the amplitude-rescaled state (sqrt(eta) alpha, sqrt(eta) beta).
/// Both sides should agree to well below 1e-10.
inline double rescaling_equivalence_check(const DphavSpec& spec, double eta,
                                          const TruncationPolicy& trunc = {},
                                          const QuadraturePolicy& quadrature = {}) {
    detail::check_spec(spec);
    detail::check_efficiency(eta);
    const int n_max = choose_cutoff(spec.peak_intensity(), trunc);
    const PhotonDistribution thinned =
        bernoulli_map(dphav_photon_dist_quadrature(spec, n_max, quadrature), eta);
    const PhotonDistribution rescaled =
        dphav_photon_dist_quadrature(spec.rescaled(eta), n_max, quadrature);
    double diff = 0.0;
    for (std::size_t m = 0; m < thinned.probs.size(); ++m)
        diff = std::max(diff, std::abs(thinned.probs[m] - rescaled.probs[m]));
    return diff;
}

/// Joint detected-photon distribution over the two splitter outputs.
/// Conditioned on the mixture phase the arms are independent Poisson with a
/// common intensity, so the matrix is built by phase quadrature.
struct JointDetectedDistribution {
    Eigen::MatrixXd probs;  // (m1, m2)

    double total() const { return probs.sum(); }

    double mean1() const {
        double m = 0.0;
        for (Eigen::Index i = 0; i < probs.rows(); ++i)
            m += static_cast<double>(i) * probs.row(i).sum();
        return m;
    }
    double mean2() const {
        double m = 0.0;
        for (Eigen::Index j = 0; j < probs.cols(); ++j)
            m += static_cast<double>(j) * probs.col(j).sum();
        return m;
    }

    PhotonDistribution marginal1() const {
        std::vector<double> p(probs.rows());
        for (Eigen::Index i = 0; i < probs.rows(); ++i) p[i] = probs.row(i).sum();
        return PhotonDistribution{std::move(p)};
    }
    PhotonDistribution marginal2() const {
        std::vector<double> p(probs.cols());
        for (Eigen::Index j = 0; j < probs.cols(); ++j) p[j] = probs.col(j).sum();
        return PhotonDistribution{std::move(p)};
    }

    /// Pearson correlation coefficient of (m1, m2).
    double pearson() const {
        const double m1 = mean1(), m2 = mean2();
        double v1 = 0.0, v2 = 0.0, cov = 0.0;
        for (Eigen::Index i = 0; i < probs.rows(); ++i)
            for (Eigen::Index j = 0; j < probs.cols(); ++j) {
                const double p = probs(i, j);
                if (p == 0.0) continue;
                const double d1 = static_cast<double>(i) - m1;
                const double d2 = static_cast<double>(j) - m2;
                v1 += d1 * d1 * p;
                v2 += d2 * d2 * p;
                cov += d1 * d2 * p;
            }
        if (v1 <= 0.0 || v2 <= 0.0)
            throw DomainError("JointDetectedDistribution: degenerate marginals");
        return cov / std::sqrt(v1 * v2);
    }
};

inline JointDetectedDistribution joint_detected_dist(const DphavSpec& spec, double eta, int m_max,
                                                     const QuadraturePolicy& policy = {}) {
    detail::check_spec(spec);
    detail::check_efficiency(eta);
    if (m_max < 0) throw std::invalid_argument("joint_detected_dist: m_max must be >= 0");
    const SplitAmplitudes amps = split(spec);
    if (detail::poisson_tail(eta * amps.peak_intensity(), m_max) > 1e-6)
        throw TruncationError("joint_detected_dist: m_max too small for the detected intensity");
    const int d = m_max + 1;
    auto eval = [&](std::size_t points) {
        PhaseGrid grid(points);
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
        Eigen::VectorXd row(d);
        const double w = 1.0 / static_cast<double>(grid.size());
        std::vector<double> pmf(d);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            detail::poisson_pmf_row(eta * amps.intensity(grid.cos_at(j)), pmf);
            for (int m = 0; m < d; ++m) row[m] = pmf[m];
            acc.selfadjointView<Eigen::Lower>().rankUpdate(row, w);
        }
        Eigen::MatrixXd full = acc.selfadjointView<Eigen::Lower>();
        return full;
    };
    Eigen::MatrixXd probs = detail::refine_on_grid<Eigen::MatrixXd>(
        policy, eval, [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
            return (x - y).cwiseAbs().maxCoeff();
        });
    return JointDetectedDistribution{std::move(probs)};
}

/// Correlation coefficient of the two splitter outputs in terms of the input
/// intensities: C = a2 b2 / (a2 + b2 + a2 b2); symmetric in its arguments.
inline double correlation_formula(double alpha_sq, double beta_sq) {
    if (!(alpha_sq >= 0.0) || !(beta_sq >= 0.0))
        throw std::invalid_argument("correlation_formula: intensities must be non-negative");
    const double denom = alpha_sq + beta_sq + alpha_sq * beta_sq;
    if (denom == 0.0) return 0.0;
    return alpha_sq * beta_sq / denom;
}

/// Same coefficient from the pre-splitter single-beam photon statistics:
/// C = (variance - mean) / (variance + mean).
inline double correlation_from_stats(double mean, double variance) {
    if (!(mean >= 0.0) || !(variance >= 0.0))
        throw std::invalid_argument("correlation_from_stats: moments must be non-negative");
    if (mean == 0.0 && variance == 0.0)
        throw DomainError("correlation_from_stats: undefined for a vacuum beam");
    return (variance - mean) / (variance + mean);
}

}  // namespace dphav
