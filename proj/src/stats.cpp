#include "anomid/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>

#include "anomid/error.hpp"

namespace anomid {

BinomialEstimate clopper_pearson(std::int64_t successes, std::int64_t trials, double confidence) {
    if (trials < 1 || successes < 0 || successes > trials) throw InvalidArgument("need 0 <= successes <= trials, trials >= 1");
    if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidArgument("confidence must lie in (0, 1)");
    const double tail = 0.5 * (1.0 - confidence);
    const auto x = static_cast<double>(successes);
    const auto n = static_cast<double>(trials);
    BinomialEstimate e;
    e.successes = successes;
    e.trials = trials;
    e.rate = x / n;
    e.lower = successes == 0 ? 0.0 : boost::math::ibeta_inv(x, n - x + 1.0, tail);
    e.upper = successes == trials ? 1.0 : boost::math::ibeta_inv(x + 1.0, n - x, 1.0 - tail);
    return e;
}

MeanEstimate mean_and_se(std::span<const double> values) {
    MeanEstimate e;
    e.n = static_cast<std::int64_t>(values.size());
    if (values.empty()) throw InvalidArgument("mean of an empty sample");
    double sum = 0.0;
    for (double v : values) sum += v;
    e.mean = sum / static_cast<double>(e.n);
    if (e.n < 2) {
        e.se = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    e.se = std::sqrt(ss / static_cast<double>(e.n - 1)) / std::sqrt(static_cast<double>(e.n));
    return e;
}

double ratio_se(const MeanEstimate& num, const MeanEstimate& den) {
    const double q = num.mean / den.mean;
    const double rn = num.se / num.mean;
    const double rd = den.se / den.mean;
    return std::abs(q) * std::sqrt(rn * rn + rd * rd);
}

}  // namespace anomid
