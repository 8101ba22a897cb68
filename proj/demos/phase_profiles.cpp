// Prints p(phi; k,k) profiles around the double-peak threshold for the
// alpha = sqrt(7), beta = sqrt(6) input, showing the two maxima collapse
// into a single one and then tighten towards the normal limit.

#include <cstdio>

#include "dphav/dphav.hpp"

int main() {
    using namespace dphav;
    const auto amps = split(DphavSpec{std::sqrt(7.0), std::sqrt(6.0)});
    std::printf("threshold (a+b)^2 = %.4f\n\n", amps.peak_intensity());
    for (int k : {6, 10, 12, 13, 26, 52}) {
        const auto pd = phase_distribution(amps, AcceptanceRule::eq(k));
        std::size_t jmax = 0;
        for (std::size_t j = 1; j < pd.density.size(); ++j)
            if (pd.density[j] > pd.density[jmax]) jmax = j;
        std::printf("k = %3d: acceptance %.5f, density max %.4f at phi = %+.4f", k,
                    pd.norm_constant, pd.density[jmax], pd.grid.angle(jmax));
        if (k < amps.peak_intensity())
            std::printf("  (formula: +-%.4f)", peak_locations(amps, k)[1]);
        else if (double(k) > amps.peak_intensity())
            std::printf("  (normal limit width^2 = %.4f)", gaussian_approx(amps, k));
        std::printf("\n");
    }
    return 0;
}
