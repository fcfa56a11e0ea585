// Calibrates a Gaussian to a set of tail constraints, then builds the
// maximum-entropy density with the same mean and compares the two.

#include <cstdio>

#include "maxent_tail/maxent_tail.hpp"

int main() {
    using namespace maxent_tail;

    const TailConstraints tc{-1.0, 0.05, -1.5};
    const auto fit = calibrate_gaussian(tc);
    std::printf("gaussian: mu = %.6f  sigma = %.6f  entropy = %.6f\n", fit.mu, fit.sigma,
                gaussian_entropy(fit.sigma));

    const auto model = build_case_a(tc, 0.05);
    std::printf("case A:   nu_plus = %.6f  entropy = %.6f  P(X > 0) = %.6f\n", *model.derived.nu_plus,
                model.density.entropy(), 1.0 - model.density.cdf(0.0));

    const auto res = feasibility_check(model.density, tc);
    std::printf("residuals: tail %.2e  shortfall %.2e\n", res.tail_prob_err, res.shortfall_err);

    const auto cf = characteristic_fn(model);
    for (std::size_t n : {1u, 30u}) {
        const auto grid = default_sum_grid(cf, n);
        const auto inv = invert_cf(npower(cf, n), grid);
        std::printf("sum of %zu periods: normalization defect %.2e\n", n, inv.normalization_defect);
    }
    return 0;
}
