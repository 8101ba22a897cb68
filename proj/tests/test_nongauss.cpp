#include <catch2/catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <vector>

#include "dphav/nongauss.hpp"

using namespace dphav;

namespace {

// Builds the Gaussian state with quadrature variances (vx, vy) in the Fock
// basis by squeezing a thermal state, entirely independent of the formula
// under test: rho = S(r) rho_th(nbar) S(r)^dag with nu = sqrt(vx vy),
// nbar = nu - 1/2 and e^{2r} = vx / nu.
FockDensityMatrix gaussian_state_fock(double vx, double vy, int dim) {
    const double nu = std::sqrt(vx * vy);
    const double nbar = nu - 0.5;
    const double r = 0.25 * std::log(vx / vy);

    Eigen::VectorXd spectrum(dim);
    for (int k = 0; k < dim; ++k)
        spectrum[k] = std::pow(nbar / (nbar + 1.0), k) / (nbar + 1.0);

    // generator (r/2)(a^dag a^dag - a a) is real antisymmetric
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 0; n + 2 <= dim - 1; ++n) {
        const double c = std::sqrt(double(n + 1) * double(n + 2));
        gen(n + 2, n) += 0.5 * r * c;   // a^dag a^dag
        gen(n, n + 2) -= 0.5 * r * c;   // -a a
    }
    const Eigen::MatrixXd squeeze = gen.exp();
    Eigen::MatrixXd rho = squeeze * spectrum.asDiagonal() * squeeze.transpose();
    return FockDensityMatrix::from_hermitian(rho.cast<std::complex<double>>(), 1e-6);
}

const DphavSpec kBenchSpec = DphavSpec::from_intensities(6.17, 7.13);

}  // namespace

TEST_CASE("covariance of the unconditioned mixture", "[nongauss]") {
    const auto amps = split(DphavSpec::from_intensities(6.0, 4.0));
    const auto cov = covariance_of_conditional(amps, PhaseDistribution::uniform());
    const double b2 = amps.b_t * amps.b_t;
    CHECK_THAT(cov.var_x, Catch::Matchers::WithinAbs(0.5 + b2, 1e-12));
    CHECK_THAT(cov.var_y, Catch::Matchers::WithinAbs(0.5 + b2, 1e-12));
    CHECK_THAT(cov.mean_x, Catch::Matchers::WithinAbs(std::numbers::sqrt2 * amps.a_t, 1e-12));
    CHECK(cov.mean_y == 0.0);
    CHECK(cov.cov_xy == 0.0);
}

TEST_CASE("covariance of a coherent beam is shot noise", "[nongauss]") {
    const SplitAmplitudes amps{1.7, 0.0};
    const auto cov = covariance_of_conditional(amps, PhaseDistribution::uniform());
    CHECK_THAT(cov.var_x, Catch::Matchers::WithinAbs(0.5, 1e-14));
    CHECK_THAT(cov.var_y, Catch::Matchers::WithinAbs(0.5, 1e-14));
}

TEST_CASE("quadrature variances never fall below shot noise", "[nongauss]") {
    const auto amps = split(kBenchSpec);
    for (auto rule : {AcceptanceRule::all(), AcceptanceRule::eq(0), AcceptanceRule::eq(5),
                      AcceptanceRule::neq(3), AcceptanceRule::gt(6), AcceptanceRule::leq(2),
                      AcceptanceRule::window(2, 5)}) {
        const auto pd = phase_distribution(amps, rule);
        const auto cov = covariance_of_conditional(amps, pd);
        CHECK(cov.var_x >= 0.5 - 1e-12);
        CHECK(cov.var_y >= 0.5 - 1e-12);
    }
}

TEST_CASE("window-family rules keep var_y above var_x", "[nongauss]") {
    const auto amps = split(kBenchSpec);
    for (auto rule : {AcceptanceRule::all(), AcceptanceRule::eq(0), AcceptanceRule::eq(5),
                      AcceptanceRule::gt(6), AcceptanceRule::leq(2),
                      AcceptanceRule::window(2, 5)}) {
        const auto cov = covariance_of_conditional(amps, phase_distribution(amps, rule));
        CHECK(cov.var_y >= cov.var_x - 1e-12);
    }
}

TEST_CASE("the neq rule can reverse the variance ordering", "[nongauss]") {
    // Its acceptance is bimodal in the intensity: the phase density keeps mass
    // near both 0 and pi, which inflates the x spread beyond the y one.
    const auto amps = split(kBenchSpec);
    const auto cov = covariance_of_conditional(amps,
                                               phase_distribution(amps, AcceptanceRule::neq(3)));
    CHECK(cov.var_x > cov.var_y);
    CHECK(cov.var_y >= 0.5);
}

TEST_CASE("pd-route covariances equal operator averages on the state", "[nongauss]") {
    const auto amps = split(kBenchSpec);
    const int n_max = choose_cutoff(amps.peak_intensity());
    const int d = n_max + 1;
    Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(d, d), y = Eigen::MatrixXcd::Zero(d, d);
    for (int n = 0; n + 1 < d; ++n) {
        const double c = std::sqrt(double(n + 1) / 2.0);
        x(n, n + 1) = c;
        x(n + 1, n) = c;
        y(n, n + 1) = std::complex<double>(0.0, -c);
        y(n + 1, n) = std::complex<double>(0.0, c);
    }
    for (auto rule : {AcceptanceRule::eq(3), AcceptanceRule::neq(3), AcceptanceRule::leq(2)}) {
        const auto pd = phase_distribution(amps, rule);
        const auto cov = covariance_of_conditional(amps, pd);
        const Eigen::MatrixXcd& rho = conditional_density_matrix(amps, pd, n_max).elements();
        const double mean_x = (rho * x).trace().real();
        const double mean_y = (rho * y).trace().real();
        const double var_x = (rho * x * x).trace().real() - mean_x * mean_x;
        const double var_y = (rho * y * y).trace().real() - mean_y * mean_y;
        CHECK_THAT(cov.mean_x, Catch::Matchers::WithinAbs(mean_x, 1e-9));
        CHECK_THAT(mean_y, Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK_THAT(cov.var_x, Catch::Matchers::WithinAbs(var_x, 1e-8));
        CHECK_THAT(cov.var_y, Catch::Matchers::WithinAbs(var_y, 1e-8));
    }
}

TEST_CASE("reference gaussian entropy limits", "[nongauss]") {
    CHECK(reference_gaussian_entropy(CovarianceSummary{0.0, 0.0, 0.5, 0.5, 0.0}) == 0.0);
    CHECK_THAT(reference_gaussian_entropy(CovarianceSummary{0.0, 0.0, 1.5, 1.5, 0.0}),
               Catch::Matchers::WithinAbs(2.0 * std::log(2.0), 1e-13));
    CHECK_THROWS_AS(reference_gaussian_entropy(CovarianceSummary{0.0, 0.0, 0.3, 0.3, 0.0}),
                    DomainError);
}

TEST_CASE("reference gaussian entropy matches a Fock-basis construction", "[nongauss]") {
    // squeezed thermal state with var_x = 1, var_y = 1/2
    const auto rho = gaussian_state_fock(1.0, 0.5, 80);
    const double direct = von_neumann_entropy(rho);
    const double formula =
        reference_gaussian_entropy(CovarianceSummary{0.0, 0.0, 1.0, 0.5, 0.0});
    CHECK_THAT(formula, Catch::Matchers::WithinAbs(direct, 1e-8));

    // and for a generic covariance pair
    const auto rho2 = gaussian_state_fock(2.3, 0.9, 120);
    CHECK_THAT(reference_gaussian_entropy(CovarianceSummary{0.0, 0.0, 2.3, 0.9, 0.0}),
               Catch::Matchers::WithinAbs(von_neumann_entropy(rho2), 1e-7));
}

TEST_CASE("coherent states carry zero non-Gaussianity", "[nongauss]") {
    const SplitAmplitudes amps{1.5, 0.0};
    const auto pd = PhaseDistribution::uniform();
    const auto rho = conditional_density_matrix(amps, pd, choose_cutoff(amps.peak_intensity()));
    const auto report = delta_full(rho, covariance_of_conditional(amps, pd));
    CHECK_THAT(report.value, Catch::Matchers::WithinAbs(0.0, 1e-9));
}

TEST_CASE("displacement leaves delta unchanged", "[nongauss]") {
    const double beta_sq = 4.0;
    const auto phav_delta = delta_diagonal(beta_sq);
    for (double alpha : {0.0, 1.0, std::sqrt(7.0)}) {
        const DphavSpec spec{alpha, std::sqrt(beta_sq)};
        const int n_max = choose_cutoff(spec.peak_intensity());
        const auto rho = dphav_density_matrix(spec, n_max);
        const auto cov = covariance_of_conditional(SplitAmplitudes{spec.alpha, spec.beta},
                                                   PhaseDistribution::uniform());
        const auto report = delta_full(rho, cov);
        CHECK_THAT(report.value, Catch::Matchers::WithinAbs(phav_delta.value, 1e-8));
    }
}

TEST_CASE("conditioning on zero detected photons is almost Gaussian", "[nongauss]") {
    const auto amps = split(kBenchSpec);
    const int n_max = choose_cutoff(amps.peak_intensity());

    const auto pd_all = PhaseDistribution::uniform();
    const auto delta_all =
        delta_full(conditional_density_matrix(amps, pd_all, n_max),
                   covariance_of_conditional(amps, pd_all));

    // eq(0) drops the phase-sensitive non-Gaussianity far below the input's
    const auto pd0 = phase_distribution(amps, AcceptanceRule::eq(0));
    const auto delta0 = delta_full(conditional_density_matrix(amps, pd0, n_max),
                                   covariance_of_conditional(amps, pd0));
    CHECK(delta0.value < 0.15 * delta_all.value);

    // and it is the least non-Gaussian of all eq-conditioned states
    for (int m1 = 1; m1 <= 12; ++m1) {
        const auto pd = phase_distribution(amps, AcceptanceRule::eq(m1));
        const auto report = delta_full(conditional_density_matrix(amps, pd, n_max),
                                       covariance_of_conditional(amps, pd));
        CHECK(delta0.value < report.value);
    }

    // the detected-photon bound drops below the unconditioned arm's as well
    const double eta = 0.5;
    const int m_max = choose_cutoff(amps.peak_intensity());
    const double eps_all =
        epsilon_bound(conditional_detected_dist(amps, pd_all, eta, m_max)).value;
    const auto pd0_eta = phase_distribution(amps, AcceptanceRule::eq(0), eta);
    const double eps0 =
        epsilon_bound(conditional_detected_dist(amps, pd0_eta, eta, m_max)).value;
    CHECK(eps0 < eps_all);
}

TEST_CASE("diagonal closed form", "[nongauss]") {
    CHECK(delta_diagonal(0.0).value == 0.0);

    // against the full Fock machinery at the paper's phav intensity
    const double mean = 7.13;
    const int n_max = choose_cutoff(mean);
    const auto rho = dphav_density_matrix(DphavSpec{0.0, std::sqrt(mean)}, n_max);
    const auto cov = covariance_of_conditional(SplitAmplitudes{0.0, std::sqrt(mean)},
                                               PhaseDistribution::uniform());
    CHECK_THAT(delta_diagonal(mean).value,
               Catch::Matchers::WithinAbs(delta_full(rho, cov).value, 1e-8));

    // grows with the mean photon number
    double previous = 0.0;
    for (double nbar : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double value = delta_diagonal(nbar).value;
        CHECK(value > previous);
        previous = value;
    }
}

TEST_CASE("epsilon of a thermal distribution vanishes", "[nongauss]") {
    const double nbar = 2.4;
    PhotonDistribution thermal;
    double cum = 0.0;
    for (int k = 0; cum < 1.0 - 1e-14; ++k) {
        thermal.probs.push_back(std::pow(nbar / (nbar + 1.0), k) / (nbar + 1.0));
        cum += thermal.probs.back();
    }
    CHECK_THAT(epsilon_bound(thermal).value, Catch::Matchers::WithinAbs(0.0, 1e-9));
}

TEST_CASE("epsilon of a Poisson distribution is the diagonal delta", "[nongauss]") {
    const double mean = 3.2;
    PhotonDistribution poisson;
    double term = std::exp(-mean), cum = 0.0;
    for (int k = 0; cum < 1.0 - 1e-14; ++k) {
        poisson.probs.push_back(term);
        cum += term;
        term *= mean / double(k + 1);
    }
    const auto eps = epsilon_bound(poisson);
    const auto ref = delta_diagonal(mean);
    CHECK_THAT(eps.value, Catch::Matchers::WithinAbs(ref.value, 1e-10));
    CHECK(eps.s_reference <= ref.s_reference + 1e-9);
}

TEST_CASE("epsilon stays non-negative and grows towards the coherent limit", "[nongauss]") {
    // The detected-photon bound is a relative entropy against the mean-matched
    // thermal distribution, so it cannot turn over once the conditional states
    // approach narrow (Poisson-like) statistics at large conditioning values.
    const auto amps = split(kBenchSpec);
    const double eta = 0.5;
    const int m_max = choose_cutoff(amps.peak_intensity());
    std::vector<double> eps;
    for (int m1 = 0; m1 <= 12; ++m1) {
        const auto pd = phase_distribution(amps, AcceptanceRule::eq(m1), eta);
        eps.push_back(epsilon_bound(conditional_detected_dist(amps, pd, eta, m_max)).value);
    }
    for (double e : eps) CHECK(e >= -1e-12);
    // beyond the low-count dip the curve rises monotonically
    for (std::size_t i = 2; i < eps.size(); ++i) CHECK(eps[i] > eps[i - 1]);
}

TEST_CASE("the phase-sensitive delta has the interior maximum over conditioning values",
          "[nongauss]") {
    const auto amps = split(kBenchSpec);
    const int n_max = choose_cutoff(amps.peak_intensity());
    const auto pd_all = PhaseDistribution::uniform();
    const double delta_all =
        delta_full(conditional_density_matrix(amps, pd_all, n_max),
                   covariance_of_conditional(amps, pd_all))
            .value;
    std::vector<double> delta;
    for (int m1 = 0; m1 <= 12; ++m1) {
        const auto pd = phase_distribution(amps, AcceptanceRule::eq(m1));
        delta.push_back(delta_full(conditional_density_matrix(amps, pd, n_max),
                                   covariance_of_conditional(amps, pd))
                            .value);
    }
    std::size_t peak = 0;
    for (std::size_t i = 1; i < delta.size(); ++i)
        if (delta[i] > delta[peak]) peak = i;
    CHECK(peak > 0);
    CHECK(peak < delta.size() - 1);
    CHECK(delta[peak] > delta_all);
}

TEST_CASE("reports expose both entropies consistently", "[nongauss]") {
    const auto report = delta_diagonal(1.7);
    CHECK_THAT(report.value, Catch::Matchers::WithinAbs(report.s_reference - report.s_state,
                                                        1e-15));
    CHECK(report.kind == NonGaussKind::delta_diagonal);
}

TEST_CASE("swapped specs share statistics but not non-Gaussianity", "[nongauss]") {
    const auto spec = DphavSpec::from_intensities(3.0, 7.13);
    const auto swapped = spec.swapped();
    const double eta = 1.0;
    const auto rule = AcceptanceRule::eq(2);
    const auto amps_a = split(spec);
    const auto amps_b = split(swapped);
    const auto pd_a = phase_distribution(amps_a, rule, eta);
    const auto pd_b = phase_distribution(amps_b, rule, eta);
    const int m_max = choose_cutoff(amps_a.peak_intensity());

    // detected statistics coincide ...
    const auto dist_a = conditional_detected_dist(amps_a, pd_a, eta, m_max);
    const auto dist_b = conditional_detected_dist(amps_b, pd_b, eta, m_max);
    double diff = 0.0;
    for (int m = 0; m <= m_max; ++m)
        diff = std::max(diff, std::abs(dist_a.probs[m] - dist_b.probs[m]));
    CHECK(diff < 1e-12);
    CHECK_THAT(epsilon_bound(dist_a).value,
               Catch::Matchers::WithinAbs(epsilon_bound(dist_b).value, 1e-12));

    // ... while the phase-sensitive non-Gaussianity does not
    const auto delta_a = delta_full(conditional_density_matrix(amps_a, pd_a, m_max),
                                    covariance_of_conditional(amps_a, pd_a));
    const auto delta_b = delta_full(conditional_density_matrix(amps_b, pd_b, m_max),
                                    covariance_of_conditional(amps_b, pd_b));
    CHECK(std::abs(delta_a.value - delta_b.value) > 1e-3);
}

TEST_CASE("delta is non-negative across the conditioning pipeline", "[nongauss]") {
    const auto amps = split(kBenchSpec);
    const int n_max = choose_cutoff(amps.peak_intensity());
    for (auto rule : {AcceptanceRule::all(), AcceptanceRule::eq(0), AcceptanceRule::eq(6),
                      AcceptanceRule::gt(4), AcceptanceRule::leq(1), AcceptanceRule::neq(2)}) {
        const auto pd = phase_distribution(amps, rule, 0.8);
        const auto report = delta_full(conditional_density_matrix(amps, pd, n_max),
                                       covariance_of_conditional(amps, pd));
        CHECK(report.value >= -1e-9);
    }
}
