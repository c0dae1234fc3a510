#include "probenorm/objective.hpp"

#include <cmath>
#include <sstream>

#include "probenorm/errors.hpp"

namespace probenorm {

namespace {

constexpr double kDenominatorGuard = 1e-9;

void check_inputs(const ForceReading& f, const ObjectiveConfig& config) {
    if (!std::isfinite(f.fx) || !std::isfinite(f.fy) || !std::isfinite(f.fz))
        throw InvalidInputError("objective: non-finite force reading");
    if (!std::isfinite(config.lambda) || config.lambda < 0.0)
        throw InvalidInputError("objective: lambda must be finite and non-negative");
    if (!std::isfinite(config.epsilon) || config.epsilon <= 0.0)
        throw InvalidInputError("objective: epsilon must be finite and positive");
}

}  // namespace

double l2_norm(const ForceReading& f) {
    return std::sqrt(f.fx * f.fx + f.fy * f.fy + f.fz * f.fz);
}

double objective(const ForceReading& f, const ObjectiveConfig& config) {
    check_inputs(f, config);
    const double denom = f.fx * f.fy + config.lambda * l2_norm(f) + config.epsilon;
    if (std::abs(denom) < kDenominatorGuard) {
        std::ostringstream msg;
        msg << "objective: denominator " << denom << " within " << kDenominatorGuard
            << " of zero (fx=" << f.fx << ", fy=" << f.fy << ", fz=" << f.fz << ")";
        throw DegenerateObjectiveError(msg.str());
    }
    return f.fz / denom;
}

NoiseRobustness objective_noise_robustness(std::span<const ForceReading> samples,
                                           const ObjectiveConfig& config) {
    if (samples.size() < 2)
        throw InvalidInputError("objective_noise_robustness: need at least two samples");
    double sum = 0.0;
    for (const ForceReading& f : samples) sum += objective(f, config);
    const double mean = sum / static_cast<double>(samples.size());
    double ss = 0.0;
    for (const ForceReading& f : samples) {
        const double d = objective(f, config) - mean;
        ss += d * d;
    }
    return {mean, std::sqrt(ss / static_cast<double>(samples.size() - 1))};
}

}  // namespace probenorm
