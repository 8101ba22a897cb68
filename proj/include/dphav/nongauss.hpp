#pragma once

// Non-Gaussianity quantification: quadrature covariances of conditional
// states, the matched reference Gaussian and its entropy, the relative
// entropy of non-Gaussianity delta, its diagonal closed form, and the
// detected-photon lower bound epsilon.

#include <cmath>
#include <string>
#include <vector>

#include "dphav/errors.hpp"
#include "dphav/fock.hpp"
#include "dphav/phase_grid.hpp"
#include "dphav/splitcond.hpp"
#include "dphav/states.hpp"

namespace dphav {

/// First and second quadrature moments in the convention where the vacuum
/// has variance 1/2. For the phase mixtures produced here the cross
/// covariance vanishes and var_y >= var_x >= 1/2.
struct CovarianceSummary {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double var_x = 0.5;
    double var_y = 0.5;
    double cov_xy = 0.0;
};

enum class NonGaussKind { delta_full, delta_diagonal, epsilon_bound };

/// s_reference - s_state together with the two entropies that produced it
/// (all in nats).
struct NonGaussReport {
    double s_reference = 0.0;
    double s_state = 0.0;
    double value = 0.0;
    NonGaussKind kind = NonGaussKind::delta_full;
};

/// Quadrature moments of the conditional mixture
/// Int p(phi) |a + b e^{i phi}><...| dphi:
/// mean_x = sqrt(2)(a + b c1), var_x = 1/2 + 2 b^2 (<cos^2> - c1^2),
/// var_y = 1/2 + 2 b^2 <sin^2>, with c1 = Int p cos and mean_y = cov_xy = 0
/// by the evenness of p.
inline CovarianceSummary covariance_of_conditional(const SplitAmplitudes& amps,
                                                   const PhaseDistribution& pd) {
    const double c1 = pd.expect([](const PhaseGrid& g, std::size_t j) { return g.cos_at(j); });
    const double c2 = pd.expect(
        [](const PhaseGrid& g, std::size_t j) { return g.cos_at(j) * g.cos_at(j); });
    const double s2 = pd.expect(
        [](const PhaseGrid& g, std::size_t j) { return g.sin_at(j) * g.sin_at(j); });
    const double b2 = amps.b_t * amps.b_t;
    CovarianceSummary cov;
    cov.mean_x = std::numbers::sqrt2 * (amps.a_t + amps.b_t * c1);
    cov.mean_y = 0.0;
    cov.var_x = 0.5 + 2.0 * b2 * (c2 - c1 * c1);
    cov.var_y = 0.5 + 2.0 * b2 * s2;
    cov.cov_xy = 0.0;
    return cov;
}

/// Entropy of the single-mode Gaussian state with the given covariance:
/// nu = sqrt(var_x var_y - cov^2), S = (nu + 1/2) ln(nu + 1/2) - (nu - 1/2) ln(nu - 1/2).
inline double reference_gaussian_entropy(const CovarianceSummary& cov) {
    const double det = cov.var_x * cov.var_y - cov.cov_xy * cov.cov_xy;
    if (det < 0.25 - 1e-12)
        throw DomainError("reference_gaussian_entropy: covariance violates the uncertainty bound"
                          " (det = " + std::to_string(det) + ")");
    const double nu = std::sqrt(std::max(det, 0.25));
    const double up = nu + 0.5;
    const double down = nu - 0.5;
    return up * std::log(up) - (down > 0.0 ? down * std::log(down) : 0.0);
}

/// Shannon entropy -sum p ln p of a photon distribution, in nats.
inline double shannon_entropy(const PhotonDistribution& dist) {
    double s = 0.0;
    for (double p : dist.probs)
        if (p > 0.0) s -= p * std::log(p);
    return s;
}

/// Entropy of the thermal (geometric) distribution with the given mean,
/// (nbar + 1) ln(nbar + 1) - nbar ln(nbar).
inline double thermal_entropy(double nbar) {
    if (!(nbar > 0.0)) return 0.0;
    return (nbar + 1.0) * std::log(nbar + 1.0) - nbar * std::log(nbar);
}

/// Relative entropy of non-Gaussianity delta = S(sigma) - S(rho), where
/// sigma is the Gaussian state matching the first and second moments of rho.
inline NonGaussReport delta_full(const FockDensityMatrix& rho, const CovarianceSummary& cov) {
    NonGaussReport report;
    report.kind = NonGaussKind::delta_full;
    report.s_reference = reference_gaussian_entropy(cov);
    report.s_state = von_neumann_entropy(rho);
    report.value = report.s_reference - report.s_state;
    return report;
}

namespace detail {

/// Poisson pmf truncated where the cumulative weight passes 1 - 1e-14.
inline PhotonDistribution poisson_dist_for_entropy(double mean) {
    constexpr double kTailCut = 1e-14;
    std::vector<double> probs;
    probs.reserve(64);
    double term = std::exp(-mean);
    double cum = 0.0;
    for (int k = 0; cum < 1.0 - kTailCut; ++k) {
        probs.push_back(term);
        cum += term;
        term *= mean / static_cast<double>(k + 1);
        if (k > 100000) throw NumericalError("poisson_dist_for_entropy: mean too large");
    }
    return PhotonDistribution{std::move(probs)};
}

}  // namespace detail

/// Closed-form delta for diagonal PHAV-like states: thermal reference
/// entropy at the same mean minus the Shannon entropy of the Poisson
/// distribution. Depends on the mean photon number only.
inline NonGaussReport delta_diagonal(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("delta_diagonal: mean must be >= 0");
    NonGaussReport report;
    report.kind = NonGaussKind::delta_diagonal;
    report.s_reference = thermal_entropy(mean);
    report.s_state = mean == 0.0 ? 0.0 : shannon_entropy(detail::poisson_dist_for_entropy(mean));
    report.value = report.s_reference - report.s_state;
    return report;
}

/// Detected-photon lower bound on the non-Gaussianity: the diagonal formula
/// with the measured distribution in place of the Poisson one,
/// epsilon = S_thermal(<m>) - H(detected).
inline NonGaussReport epsilon_bound(const PhotonDistribution& detected) {
    NonGaussReport report;
    report.kind = NonGaussKind::epsilon_bound;
    const double mean = detected.mean();
    report.s_reference = thermal_entropy(mean);
    report.s_state = shannon_entropy(detected);
    report.value = report.s_reference - report.s_state;
    return report;
}

}  // namespace dphav
