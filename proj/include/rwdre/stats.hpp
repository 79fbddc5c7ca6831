#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace rwdre {

struct MeanStat {
    double mean = 0.0;
    double std_error = 0.0;  // standard error of the mean
    std::size_t n = 0;
};

MeanStat mean_stat(const std::vector<double>& xs);

// Wilson score interval for a binomial proportion at z standard deviations.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z = 3.0);

// Asymptotic Kolmogorov distribution tail P(K > lambda).
double kolmogorov_tail(double lambda);

struct GofResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int dof = 0;
};

// One-sample Kolmogorov-Smirnov test against a continuous cdf, with the
// Stephens small-sample correction.
GofResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

// Pearson chi-square goodness of fit. `probs` are the model cell probabilities
// for the given observed counts; adjacent tail cells are pooled until every
// expected count is at least min_expected. The last cell should absorb the
// remaining mass.
GofResult chi_square_test(const std::vector<double>& observed, const std::vector<double>& probs,
                          double min_expected = 5.0);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double slope_lo = 0.0;  // confidence interval at the requested level
    double slope_hi = 0.0;
};

// Ordinary least squares of y on x with a Student-t interval for the slope.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y, double confidence = 0.99);

// Exponential rate fitted to right-censored exceedances: each sample above
// `threshold` contributes its excess, capped at censor - threshold. Returns
// the MLE and a chi-square interval at the requested level.
struct TailFit {
    double rate = 0.0;
    double rate_lo = 0.0;
    double rate_hi = 0.0;
    std::size_t exceedances = 0;
    std::size_t events = 0;  // uncensored exceedances
};
TailFit exponential_tail_fit(const std::vector<double>& samples, const std::vector<bool>& censored, double threshold,
                             double confidence = 0.99);

// Two-sided permutation p-value for a statistic over groups whose elements are
// shuffled within each group. Deterministic given the seed.
double permutation_p_value(const std::vector<std::vector<double>>& groups,
                           const std::function<double(const std::vector<std::vector<double>>&)>& statistic,
                           int permutations, std::uint64_t seed);

}  // namespace rwdre
