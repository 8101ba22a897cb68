#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "dphav/splitcond.hpp"
#include "dphav/states.hpp"

using namespace dphav;

namespace {

// Independent trapezoid rule for (2 pi)^-1 Int f(phi) dphi, kept local to the
// tests so the library quadrature has something to be checked against.
template <class F>
double reference_phase_average(F&& f, int n = 20000) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        const double phi = -std::numbers::pi + 2.0 * std::numbers::pi * j / n;
        acc += f(phi);
    }
    return acc / n;
}

double max_norm_diff(const PhotonDistribution& a, const PhotonDistribution& b) {
    REQUIRE(a.probs.size() == b.probs.size());
    double d = 0.0;
    for (std::size_t k = 0; k < a.probs.size(); ++k)
        d = std::max(d, std::abs(a.probs[k] - b.probs[k]));
    return d;
}

}  // namespace

TEST_CASE("phav distribution is Poisson", "[states]") {
    const auto vac = phav_photon_dist(0.0, 8);
    CHECK(vac.probs[0] == 1.0);
    for (int k = 1; k <= 8; ++k) CHECK(vac.probs[k] == 0.0);

    const auto unit = phav_photon_dist(1.0, 20);
    for (int k = 0; k <= 20; ++k)
        CHECK_THAT(unit.probs[k],
                   Catch::Matchers::WithinRel(std::exp(-1.0) / std::tgamma(double(k) + 1.0),
                                              1e-13));

    const auto paper = phav_photon_dist(7.13, choose_cutoff(7.13));
    CHECK_THAT(paper.mean(), Catch::Matchers::WithinAbs(7.13, 1e-10));
}

TEST_CASE("dphav quadrature distribution reduces to Poisson at the edges", "[states]") {
    const int n_max = 40;
    CHECK(max_norm_diff(dphav_photon_dist_quadrature(DphavSpec{0.0, 2.0}, n_max),
                        phav_photon_dist(4.0, n_max)) < 1e-14);
    CHECK(max_norm_diff(dphav_photon_dist_quadrature(DphavSpec{2.0, 0.0}, n_max),
                        phav_photon_dist(4.0, n_max)) < 1e-14);
}

TEST_CASE("dphav quadrature matches an independent quadrature", "[states]") {
    const auto spec = DphavSpec::from_intensities(6.17, 7.13);
    const int n_max = choose_cutoff(spec.peak_intensity());
    const auto dist = dphav_photon_dist_quadrature(spec, n_max);
    CHECK_THAT(dist.total(), Catch::Matchers::WithinAbs(1.0, 1e-11));
    for (int k : {0, 3, 7, 13, 21}) {
        const double expected = reference_phase_average([&](double phi) {
            const double mu = spec.mean_photons() + 2.0 * spec.alpha * spec.beta * std::cos(phi);
            return std::exp(-mu + k * std::log(mu) - std::lgamma(double(k) + 1.0));
        });
        CHECK_THAT(dist.probs[k], Catch::Matchers::WithinAbs(expected, 1e-12));
    }
}

TEST_CASE("dphav distribution is symmetric under amplitude exchange", "[states]") {
    for (auto [a2, b2] : std::vector<std::pair<double, double>>{
             {1.0, 6.0}, {3.0, 7.13}, {0.2, 4.4}}) {
        const auto spec = DphavSpec::from_intensities(a2, b2);
        const int n_max = choose_cutoff(spec.peak_intensity());
        CHECK(max_norm_diff(dphav_photon_dist_quadrature(spec, n_max),
                            dphav_photon_dist_quadrature(spec.swapped(), n_max)) < 1e-12);
    }
}

TEST_CASE("closed form collapses to Poisson when one amplitude vanishes", "[states]") {
    for (int k : {0, 1, 4, 9}) {
        CHECK_THAT(dphav_photon_dist_closedform(DphavSpec{0.0, std::sqrt(3.0)}, k),
                   Catch::Matchers::WithinRel(
                       std::exp(-3.0 + k * std::log(3.0) - std::lgamma(double(k) + 1.0)), 1e-13));
    }
}

TEST_CASE("closed form at k=0 equals the directly quadratured integrand", "[states]") {
    // (2 pi)^-1 Int exp(-2 - 2 cos phi) dphi at alpha = beta = 1
    const double expected =
        reference_phase_average([](double phi) { return std::exp(-2.0 - 2.0 * std::cos(phi)); });
    CHECK_THAT(dphav_photon_dist_closedform(DphavSpec{1.0, 1.0}, 0),
               Catch::Matchers::WithinAbs(expected, 1e-12));
}

TEST_CASE("closed form agrees with the quadrature oracle", "[states]") {
    const auto seven_six = DphavSpec{std::sqrt(7.0), std::sqrt(6.0)};
    const auto quad = dphav_photon_dist_quadrature(seven_six, 40);
    CHECK_THAT(dphav_photon_dist_closedform(seven_six, 13),
               Catch::Matchers::WithinAbs(quad.probs[13], 1e-8));

    for (double a2 : {1.0, 7.0})
        for (double b2 : {1.0, 6.0}) {
            const auto spec = DphavSpec::from_intensities(a2, b2);
            const auto q = dphav_photon_dist_quadrature(spec, 30);
            for (int k = 0; k <= 25; ++k)
                CHECK_THAT(dphav_photon_dist_closedform(spec, k),
                           Catch::Matchers::WithinAbs(q.probs[k], 1e-8));
        }
}

TEST_CASE("dphav moments", "[states]") {
    const auto poissonian = dphav_moments(DphavSpec{0.0, std::sqrt(7.13)});
    CHECK_THAT(poissonian.mean, Catch::Matchers::WithinAbs(7.13, 1e-14));
    CHECK_THAT(poissonian.variance, Catch::Matchers::WithinAbs(7.13, 1e-14));
    CHECK(poissonian.k_factor == 0.0);

    const auto balanced = dphav_moments(DphavSpec{1.0, 1.0});
    CHECK_THAT(balanced.mean, Catch::Matchers::WithinAbs(2.0, 1e-14));
    CHECK_THAT(balanced.variance, Catch::Matchers::WithinAbs(4.0, 1e-14));
    CHECK_THAT(balanced.k_factor, Catch::Matchers::WithinAbs(0.5, 1e-14));

    const auto degenerate = dphav_moments(DphavSpec{0.0, 0.0});
    CHECK(degenerate.mean == 0.0);
    CHECK(degenerate.variance == 0.0);
    CHECK(degenerate.k_factor == 0.0);
}

TEST_CASE("moments agree with the quadrature distribution", "[states]") {
    const auto spec = DphavSpec{std::sqrt(7.0), std::sqrt(6.0)};
    const auto moments = dphav_moments(spec);
    const auto dist = dphav_photon_dist_quadrature(spec, choose_cutoff(spec.peak_intensity()));
    CHECK_THAT(moments.mean, Catch::Matchers::WithinAbs(13.0, 1e-14));
    CHECK_THAT(dist.mean(), Catch::Matchers::WithinAbs(moments.mean, 1e-9));
    CHECK_THAT(dist.variance(), Catch::Matchers::WithinAbs(moments.variance, 1e-8));
}

TEST_CASE("super-Poissonian excess equals 2 alpha^2 beta^2", "[states]") {
    for (double a2 : {0.0, 0.5, 3.0, 7.0})
        for (double b2 : {0.0, 1.0, 6.0, 7.13}) {
            const auto m = dphav_moments(DphavSpec::from_intensities(a2, b2));
            CHECK_THAT(m.variance - m.mean,
                       Catch::Matchers::WithinAbs(2.0 * a2 * b2, 1e-11));
            CHECK(m.variance >= m.mean);
        }
}

TEST_CASE("phav density matrix is diagonal with Poisson entries", "[states]") {
    const double b2 = 4.0;
    const int n_max = choose_cutoff(b2);
    const auto rho = dphav_density_matrix(DphavSpec{0.0, 2.0}, n_max);
    const auto diag = rho.diagonal();
    const auto pois = phav_photon_dist(b2, n_max);
    double off_diag = 0.0;
    for (int r = 0; r < rho.dim(); ++r)
        for (int c = 0; c < rho.dim(); ++c)
            if (r != c) off_diag = std::max(off_diag, std::abs(rho.elements()(r, c)));
    CHECK(off_diag < 1e-14);
    for (int k = 0; k <= n_max; ++k)
        CHECK_THAT(diag[k], Catch::Matchers::WithinAbs(pois.probs[k], 1e-12));
}

TEST_CASE("coherent density matrix is the rank-1 projector", "[states]") {
    const double alpha = 1.4;
    const int n_max = choose_cutoff(alpha * alpha);
    const auto rho = dphav_density_matrix(DphavSpec{alpha, 0.0}, n_max);
    const Eigen::VectorXcd v = coherent_amplitudes(alpha, n_max);
    const Eigen::MatrixXcd proj = v * v.adjoint();
    CHECK((rho.elements() - proj).cwiseAbs().maxCoeff() < 1e-11);
    CHECK_THAT(von_neumann_entropy(rho), Catch::Matchers::WithinAbs(0.0, 1e-10));
}

TEST_CASE("dphav density matrix carries coherences and unit trace", "[states]") {
    const auto spec = DphavSpec{std::sqrt(7.0), std::sqrt(6.0)};
    const int n_max = choose_cutoff(spec.peak_intensity());
    const auto rho = dphav_density_matrix(spec, n_max);
    CHECK_THAT(rho.elements().real().trace(), Catch::Matchers::WithinAbs(1.0, 1e-10));
    double off_diag = 0.0;
    for (int r = 0; r < rho.dim(); ++r)
        for (int c = 0; c < rho.dim(); ++c)
            if (r != c) off_diag = std::max(off_diag, std::abs(rho.elements()(r, c)));
    CHECK(off_diag > 1e-3);

    // diagonal equals the quadrature photon distribution
    const auto dist = dphav_photon_dist_quadrature(spec, n_max);
    const auto diag = rho.diagonal();
    for (int k = 0; k <= n_max; ++k)
        CHECK_THAT(diag[k], Catch::Matchers::WithinAbs(dist.probs[k], 1e-11));
}

TEST_CASE("wigner of a coherent state is a single gaussian peak", "[states][wigner]") {
    const double alpha = 1.5;
    const auto pd = PhaseDistribution::uniform(256);
    const auto grid = PhaseSpaceGrid::centered(8.0, 161);
    const auto field = wigner_of_phase_mixture(alpha, 0.0, pd, grid);
    CHECK(field.coverage_ok);
    CHECK_THAT(field.integral(), Catch::Matchers::WithinAbs(1.0, 1e-6));

    Eigen::Index ix, ip;
    field.values.maxCoeff(&ix, &ip);
    CHECK_THAT(grid.x_at(int(ix)),
               Catch::Matchers::WithinAbs(std::numbers::sqrt2 * alpha, 0.11));
    CHECK_THAT(grid.p_at(int(ip)), Catch::Matchers::WithinAbs(0.0, 0.11));
    CHECK_THAT(field.values(ix, ip),
               Catch::Matchers::WithinAbs(1.0 / std::numbers::pi, 2e-3));
}

TEST_CASE("wigner of a phav state is a positive ring", "[states][wigner]") {
    const double beta = 2.0;
    const auto pd = PhaseDistribution::uniform(512);
    const auto grid = PhaseSpaceGrid::centered(9.0, 181);
    const auto field = wigner_of_phase_mixture(0.0, beta, pd, grid);
    CHECK(field.coverage_ok);
    CHECK(field.values.minCoeff() >= 0.0);
    CHECK_THAT(field.integral(), Catch::Matchers::WithinAbs(1.0, 1e-6));

    // crest sits near radius sqrt(2) beta, well above the center value
    const int mid_p = grid.np / 2;
    double crest = 0.0;
    for (int i = 0; i < grid.nx; ++i) crest = std::max(crest, field.values(i, mid_p));
    const double center = field.values(grid.nx / 2, mid_p);
    CHECK(crest > 4.0 * center);
}

TEST_CASE("wigner of a photon-subtracted state grows two lobes", "[states][wigner]") {
    const auto spec = DphavSpec{std::sqrt(7.0), std::sqrt(6.0)};
    const auto amps = split(spec);
    const int k = 6;  // below the (a+b)^2 ~ 12.98 threshold
    const auto pd = phase_distribution(amps, AcceptanceRule::eq(k));
    const auto grid = PhaseSpaceGrid::centered(9.0, 181);
    const auto field = wigner_of_phase_mixture(amps.a_t, amps.b_t, pd, grid);
    CHECK(field.coverage_ok);
    CHECK(field.values.minCoeff() >= 0.0);
    CHECK_THAT(field.integral(), Catch::Matchers::WithinAbs(1.0, 1e-6));

    const double phi_peak = peak_locations(amps, k)[1];
    const std::complex<double> gamma(amps.a_t + amps.b_t * std::cos(phi_peak),
                                     amps.b_t * std::sin(phi_peak));
    auto value_near = [&](double x, double p) {
        int best_i = 0, best_j = 0;
        double best = 1e300;
        for (int i = 0; i < grid.nx; ++i)
            if (std::abs(grid.x_at(i) - x) < best) { best = std::abs(grid.x_at(i) - x); best_i = i; }
        best = 1e300;
        for (int j = 0; j < grid.np; ++j)
            if (std::abs(grid.p_at(j) - p) < best) { best = std::abs(grid.p_at(j) - p); best_j = j; }
        return field.values(best_i, best_j);
    };
    const double cx = std::numbers::sqrt2 * gamma.real();
    const double cp = std::numbers::sqrt2 * gamma.imag();
    const double lobe_up = value_near(cx, cp);
    const double lobe_down = value_near(cx, -cp);
    const double saddle = value_near(cx, 0.0);
    CHECK(lobe_up > 2.0 * saddle);
    CHECK(lobe_down > 2.0 * saddle);
}

TEST_CASE("wigner flags a grid that misses the state", "[states][wigner]") {
    const auto pd = PhaseDistribution::uniform(128);
    const auto field = wigner_of_phase_mixture(2.0, 1.0, pd, PhaseSpaceGrid::centered(2.0, 41));
    CHECK_FALSE(field.coverage_ok);
}

TEST_CASE("degenerate spec produces the vacuum", "[states]") {
    const auto dist = dphav_photon_dist_quadrature(DphavSpec{0.0, 0.0}, 10);
    CHECK(dist.probs[0] == 1.0);
    const auto rho = dphav_density_matrix(DphavSpec{0.0, 0.0}, 10);
    CHECK_THAT(std::abs(rho.elements()(0, 0)), Catch::Matchers::WithinAbs(1.0, 1e-14));
    CHECK_THAT(von_neumann_entropy(rho), Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("invalid specs are rejected", "[states]") {
    CHECK_THROWS_AS(DphavSpec::from_intensities(-1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(dphav_photon_dist_quadrature(DphavSpec{-0.5, 1.0}, 10),
                    std::invalid_argument);
    CHECK_THROWS_AS(dphav_photon_dist_closedform(DphavSpec{1.0, 1.0}, -1),
                    std::invalid_argument);
}
