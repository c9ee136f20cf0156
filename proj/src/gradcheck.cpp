#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "matt/numeric.hpp"

namespace matt {

GradCheckReport finite_difference_check(const std::function<double()>& loss, ParamStore& params,
                                        const GradCheckOptions& options) {
    GradCheckReport report;
    std::mt19937_64 rng(options.seed);
    const double h = options.step;

    for (auto& p : params.items()) {
        ParamCheck check;
        check.name = p.name;

        std::vector<std::size_t> indices(p.value.size());
        std::iota(indices.begin(), indices.end(), std::size_t{0});
        if (indices.size() > options.full_check_limit) {
            std::shuffle(indices.begin(), indices.end(), rng);
            indices.resize(std::max<std::size_t>(options.sample_size, 100));
            std::sort(indices.begin(), indices.end());
        }

        for (std::size_t idx : indices) {
            const double original = p.value[idx];
            p.value[idx] = original + h;
            const double plus = loss();
            p.value[idx] = original - h;
            const double minus = loss();
            p.value[idx] = original;

            const double numeric = (plus - minus) / (2.0 * h);
            const double analytic = p.grad[idx];
            const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            const double rel = std::abs(analytic - numeric) / denom;
            if (rel > check.max_rel_error || !std::isfinite(rel)) {
                check.max_rel_error = std::isfinite(rel) ? rel : INFINITY;
                check.worst_index = idx;
                check.worst_analytic = analytic;
                check.worst_numeric = numeric;
            }
            ++check.checked;
        }
        check.passed = check.max_rel_error <= options.tolerance;
        report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
        report.passed = report.passed && check.passed;
        report.params.push_back(std::move(check));
    }
    return report;
}

}  // namespace matt
