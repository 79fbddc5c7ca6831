#include "rwdre/rate_spec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rwdre {

RateSpec RateSpec::independent(double d0, double d1) {
    RateSpec spec;
    spec.c0 = d0;
    spec.c1 = d1;
    return spec;
}

namespace {

void check_rate(double value, const char* field, bool strictly_positive) {
    if (!std::isfinite(value) || value < 0.0 || (strictly_positive && value == 0.0)) {
        throw ConfigError(field, strictly_positive ? "must be a finite positive rate"
                                                   : "must be a finite non-negative rate");
    }
}

void check_table(const std::vector<double>& table, std::size_t expected, const char* field) {
    if (table.size() != expected) {
        throw ConfigError(field, "needs one entry per patch (" + std::to_string(expected) + "), got " +
                                     std::to_string(table.size()));
    }
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (!(table[i] >= 0.0 && table[i] <= 1.0)) {
            throw ConfigError(std::string(field) + "[" + std::to_string(i) + "]", "probability outside [0,1]");
        }
    }
}

}  // namespace

void RateSpec::validate() const {
    check_rate(c0, "c0", true);
    check_rate(c1, "c1", true);
    check_rate(lambda0, "lambda0", false);
    check_rate(lambda1, "lambda1", false);
    if (range < 0 || range > 15) throw ConfigError("range", "must lie in [0, 15]");
    check_table(p0, patch_count(), "p0_table");
    check_table(p1, patch_count(), "p1_table");
}

MEpsilon compute_M_epsilon(const RateSpec& spec, int max_patch_bits) {
    spec.validate();
    const int bits = 2 * spec.range + 1;
    if (bits > max_patch_bits) {
        throw ConfigError("range", "patch enumeration needs 2^" + std::to_string(bits) +
                                       " entries, above the cap 2^" + std::to_string(max_patch_bits));
    }
    const Patch count = Patch{1} << bits;
    const Patch centre_bit = Patch{1} << spec.range;

    MEpsilon out;
    out.epsilon = std::numeric_limits<double>::infinity();
    for (int i = 0; i < bits; ++i) {
        if (i == spec.range) continue;
        const Patch flip = Patch{1} << i;
        double worst = 0.0;
        for (Patch patch = 0; patch < count; ++patch) {
            worst = std::max(worst, std::abs(spec.flip_rate(patch ^ flip) - spec.flip_rate(patch)));
        }
        out.M += worst;
    }
    for (Patch patch = 0; patch < count; ++patch) {
        out.epsilon = std::min(out.epsilon, spec.flip_rate(patch) + spec.flip_rate(patch ^ centre_bit));
    }
    return out;
}

}  // namespace rwdre
