#include "rwdre/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>

#include "rwdre/errors.hpp"
#include "rwdre/random.hpp"

namespace rwdre {

MeanStat mean_stat(const std::vector<double>& xs) {
    MeanStat s;
    s.n = xs.size();
    if (xs.empty()) return s;
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(s.n);
    if (s.n < 2) return s;
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std_error = std::sqrt(ss / static_cast<double>(s.n - 1) / static_cast<double>(s.n));
    return s;
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double kolmogorov_tail(double lambda) {
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

GofResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw Error("KS test needs samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    const double root = std::sqrt(n);
    return {d, kolmogorov_tail((root + 0.12 + 0.11 / root) * d), 0};
}

GofResult chi_square_test(const std::vector<double>& observed, const std::vector<double>& probs,
                          double min_expected) {
    if (observed.size() != probs.size() || observed.empty()) throw Error("chi-square cells mismatch");
    const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
    std::vector<double> obs;
    std::vector<double> exp;
    double o_acc = 0.0;
    double e_acc = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        o_acc += observed[i];
        e_acc += probs[i] * total;
        if (e_acc >= min_expected) {
            obs.push_back(o_acc);
            exp.push_back(e_acc);
            o_acc = e_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (exp.empty()) {
            obs.push_back(o_acc);
            exp.push_back(e_acc);
        } else {
            obs.back() += o_acc;
            exp.back() += e_acc;
        }
    }
    GofResult r;
    for (std::size_t i = 0; i < obs.size(); ++i) r.statistic += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
    r.dof = static_cast<int>(obs.size()) - 1;
    if (r.dof < 1) return r;
    r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.dof), r.statistic));
    return r;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y, double confidence) {
    if (x.size() != y.size() || x.size() < 3) throw Error("linear fit needs at least three points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) throw Error("linear fit needs distinct x values");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        rss += r * r;
    }
    fit.slope_stderr = std::sqrt(rss / (n - 2.0) / sxx);
    const double t = boost::math::quantile(boost::math::students_t(n - 2.0), 0.5 + confidence / 2.0);
    fit.slope_lo = fit.slope - t * fit.slope_stderr;
    fit.slope_hi = fit.slope + t * fit.slope_stderr;
    return fit;
}

TailFit exponential_tail_fit(const std::vector<double>& samples, const std::vector<bool>& censored, double threshold,
                             double confidence) {
    TailFit fit;
    double exposure = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i] <= threshold) continue;
        ++fit.exceedances;
        exposure += samples[i] - threshold;
        if (!censored[i]) ++fit.events;
    }
    if (exposure <= 0.0) return fit;
    const double alpha = 1.0 - confidence;
    const double d = static_cast<double>(fit.events);
    fit.rate = d / exposure;
    fit.rate_lo = fit.events == 0
                      ? 0.0
                      : boost::math::quantile(boost::math::chi_squared(2.0 * d), alpha / 2.0) / (2.0 * exposure);
    fit.rate_hi = boost::math::quantile(boost::math::chi_squared(2.0 * d + 2.0), 1.0 - alpha / 2.0) / (2.0 * exposure);
    return fit;
}

double permutation_p_value(const std::vector<std::vector<double>>& groups,
                           const std::function<double(const std::vector<std::vector<double>>&)>& statistic,
                           int permutations, std::uint64_t seed) {
    const double observed = std::abs(statistic(groups));
    Rng rng(seed);
    auto shuffled = groups;
    int extreme = 0;
    for (int b = 0; b < permutations; ++b) {
        for (auto& g : shuffled) {
            for (std::size_t i = g.size(); i > 1; --i) std::swap(g[i - 1], g[rng.below(i)]);
        }
        if (std::abs(statistic(shuffled)) >= observed - 1e-12) ++extreme;
    }
    return (1.0 + extreme) / (1.0 + permutations);
}

}  // namespace rwdre
