#include "qmds/measurement.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <vector>
#include <numbers>

namespace qmds {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPercentile = 0.9;
// At ρ = 0 the density is uniform and ±0.9π holds exactly 90%.
constexpr double kMaxEpsilonDeg = 162.0;

double integrate_unnormalized(double lo, double hi, double rho) {
    if (hi <= lo) return 0.0;
    // exp(ρ (cos φ - 1)) keeps the integrand ≤ 1 for any ρ.
    auto f = [rho](double phi) { return std::exp(rho * (std::cos(phi) - 1.0)); };
    // Breakpoints at multiples of the peak width 1/√ρ.
    std::vector<double> cuts{lo};
    if (rho > 1.0) {
        for (double c : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0}) {
            const double x = c / std::sqrt(rho);
            if (x > lo && x < hi) cuts.push_back(x);
        }
    }
    cuts.push_back(hi);
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
        sum += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, cuts[k], cuts[k + 1], 8, 1e-12);
    return sum;
}

double uniform01(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

}  // namespace

const char* to_string(Scenario s) { return s == Scenario::I ? "I" : "II"; }

double tikhonov_mass(double bound, double rho) {
    if (bound <= 0.0) return 0.0;
    if (bound >= kPi) return 1.0;
    if (rho < 0.0) throw Error(ErrorCode::OutOfRange, "Tikhonov concentration must be >= 0");
    const double inside = integrate_unnormalized(0.0, bound, rho);
    const double outside = integrate_unnormalized(bound, kPi, rho);
    return inside / (inside + outside);
}

double epsilon_to_rho(double epsilon_deg) {
    if (!(epsilon_deg > 0.0) || !(epsilon_deg < kMaxEpsilonDeg)) {
        throw Error(ErrorCode::OutOfRange, "epsilon must lie in (0, 162) degrees, got " + std::to_string(epsilon_deg));
    }
    static std::mutex mutex;
    static std::map<double, double> cache;
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(epsilon_deg); it != cache.end()) return it->second;
    }

    const double bound = epsilon_deg * kPi / 180.0;
    auto excess = [bound](double rho) { return tikhonov_mass(bound, rho) - kPercentile; };

    double lo = 1e-6, hi = 1e8;
    bool geometric = true;
    if (excess(lo) >= 0.0) {
        hi = lo;
        lo = 0.0;
        geometric = false;
    } else if (excess(hi) < 0.0) {
        throw Error(ErrorCode::OutOfRange, "epsilon too small to resolve: " + std::to_string(epsilon_deg));
    }
    double rho = hi;
    for (int it = 0; it < 300; ++it) {
        rho = geometric ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        const double e = excess(rho);
        if (std::abs(e) < 1e-12) break;
        (e < 0.0 ? lo : hi) = rho;
        if (hi - lo <= 1e-14 * hi) break;
    }

    std::lock_guard lock(mutex);
    cache.emplace(epsilon_deg, rho);
    return rho;
}

double sample_distance(double d, double sigma_d, Rng& rng) {
    if (!(d > 0.0)) throw Error(ErrorCode::NonPositiveDistance, "distance must be positive");
    if (sigma_d < 0.0) throw Error(ErrorCode::OutOfRange, "sigma_d must be >= 0");
    if (sigma_d == 0.0) return d;
    const double shape = d * d / (sigma_d * sigma_d);
    const double scale = sigma_d * sigma_d / d;
    return std::gamma_distribution<double>(shape, scale)(rng);
}

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);  // [-π, π]
    return a <= -kPi ? a + 2.0 * kPi : a;
}

double reflect_angle(double a) { return std::abs(wrap_angle(a)); }

double sample_tikhonov(double rho, Rng& rng) {
    if (rho < 0.0) throw Error(ErrorCode::OutOfRange, "Tikhonov concentration must be >= 0");
    if (std::isinf(rho)) return 0.0;
    if (rho < 1e-8) return kPi - 2.0 * kPi * uniform01(rng);
    if (rho > 1e6) {
        // Wrapped normal with variance 1/ρ; indistinguishable at this concentration.
        return wrap_angle(std::normal_distribution<double>(0.0, 1.0 / std::sqrt(rho))(rng));
    }

    // Best & Fisher (1979) rejection sampler.
    double s;
    if (rho < 1e-5) {
        s = 1.0 / rho + rho;
    } else {
        const double r = 1.0 + std::sqrt(1.0 + 4.0 * rho * rho);
        const double t = (r - std::sqrt(2.0 * r)) / (2.0 * rho);
        s = (1.0 + t * t) / (2.0 * t);
    }
    double w;
    for (;;) {
        const double z = std::cos(kPi * uniform01(rng));
        w = (1.0 + s * z) / (s + z);
        const double y = rho * (s - w);
        const double v = uniform01(rng);
        if (y * (2.0 - y) - v >= 0.0 || std::log(y / v) + 1.0 - y >= 0.0) break;
    }
    const double angle = std::acos(std::clamp(w, -1.0, 1.0));
    return uniform01(rng) < 0.5 ? -angle : angle;
}

double sample_angle(double theta, double rho, Rng& rng) {
    return wrap_angle(theta + sample_tikhonov(rho, rng));
}

MeasurementSet synthesize(const TrueParameters& truth, const NoiseConfig& noise, Scenario scenario, Rng& rng) {
    const Index m = truth.size();
    const double rho = noise.epsilon_deg == 0.0 ? kNoAngleNoise : epsilon_to_rho(noise.epsilon_deg);

    MeasurementSet out;
    out.scenario = scenario;
    out.distance.resize(m);
    for (Index e = 0; e < m; ++e) {
        const EdgeParameters& p = truth.edges[static_cast<std::size_t>(e)];
        if (p.zero_length) throw Error(ErrorCode::DegenerateEdge, "edge " + std::to_string(e) + " has zero length");
        out.distance(e) = sample_distance(p.distance, noise.sigma_d, rng);
    }

    out.adoa = Eigen::MatrixXd::Zero(m, m);
    for (Index a = 0; a < m; ++a) {
        for (Index b = a + 1; b < m; ++b) {
            const double v = reflect_angle(truth.adoa(a, b) + sample_tikhonov(rho, rng));
            out.adoa(a, b) = v;
            out.adoa(b, a) = v;
        }
    }

    if (scenario == Scenario::II) {
        PlaneAngles angles{Eigen::MatrixX3d(m, 3), Eigen::MatrixX3d(m, 3)};
        for (Index e = 0; e < m; ++e) {
            const EdgeParameters& p = truth.edges[static_cast<std::size_t>(e)];
            for (Plane plane : kPlanes) {
                angles.azimuth(e, plane) = sample_angle(p.azimuth[plane], rho, rng);
                angles.elevation(e, plane) = reflect_angle(p.elevation[plane] + sample_tikhonov(rho, rng));
            }
        }
        out.angles = std::move(angles);
    }

    out.mask = Mask::Constant(m, m, true);
    return out;
}

Mask missing_mask(Index m, double fraction, Rng& rng) {
    if (!(fraction >= 0.0) || !(fraction < 1.0)) {
        throw Error(ErrorCode::OutOfRange, "missing fraction must lie in [0, 1)");
    }
    Mask mask = Mask::Constant(m, m, true);
    std::vector<std::pair<Index, Index>> pairs;
    pairs.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
    for (Index a = 0; a < m; ++a)
        for (Index b = a + 1; b < m; ++b) pairs.emplace_back(a, b);

    const auto remove = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pairs.size())));
    // Partial Fisher-Yates: the first `remove` slots become a uniform sample.
    for (std::size_t k = 0; k < remove; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, pairs.size() - 1);
        std::swap(pairs[k], pairs[pick(rng)]);
        mask(pairs[k].first, pairs[k].second) = false;
        mask(pairs[k].second, pairs[k].first) = false;
    }
    return mask;
}

bool is_symmetric(const Mask& mask) {
    if (mask.rows() != mask.cols()) return false;
    for (Index a = 0; a < mask.rows(); ++a)
        for (Index b = a + 1; b < mask.cols(); ++b)
            if (mask(a, b) != mask(b, a)) return false;
    return true;
}

}  // namespace qmds
