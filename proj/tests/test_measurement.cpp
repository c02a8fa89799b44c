#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace qmds;

namespace {

constexpr double kPi = std::numbers::pi;

// Central mass of the normalized Tikhonov density by composite Simpson,
// independent of the library quadrature.
double simpson_mass(double bound, double rho) {
    const int n = 200000;
    const double h = 2.0 * bound / n;
    const double norm = 2.0 * kPi * std::cyl_bessel_i(0.0, rho);
    auto f = [&](double phi) { return std::exp(rho * std::cos(phi)) / norm; };
    double s = f(-bound) + f(bound);
    for (int k = 1; k < n; ++k) s += f(-bound + k * h) * (k % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

double empirical_bound_deg(double rho, int draws, Rng& rng) {
    std::vector<double> a(static_cast<std::size_t>(draws));
    for (auto& v : a) v = std::abs(sample_tikhonov(rho, rng));
    const auto k = static_cast<std::size_t>(0.9 * draws);
    std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k), a.end());
    return a[k] * 180.0 / kPi;
}

}  // namespace

TEST_CASE("epsilon_to_rho") {
    const double r10 = epsilon_to_rho(10.0);
    CHECK(std::abs(simpson_mass(10.0 * kPi / 180.0, r10) - 0.9) < 1e-6);
    CHECK(std::abs(tikhonov_mass(10.0 * kPi / 180.0, r10) - 0.9) < 1e-9);

    double prev = std::numeric_limits<double>::infinity();
    for (double e : {10.0, 20.0, 30.0, 40.0, 50.0}) {
        const double r = epsilon_to_rho(e);
        CHECK(r < prev);
        CHECK(std::abs(simpson_mass(e * kPi / 180.0, r) - 0.9) < 1e-6);
        prev = r;
    }

    CHECK(epsilon_to_rho(161.9) < 0.01);
    CHECK(epsilon_to_rho(161.99) < epsilon_to_rho(161.9));
    CHECK(std::abs(tikhonov_mass(0.9 * kPi, 0.0) - 0.9) < 1e-12);

    CHECK_THROWS_AS(epsilon_to_rho(0.0), Error);
    CHECK_THROWS_AS(epsilon_to_rho(162.0), Error);
    CHECK_THROWS_AS(epsilon_to_rho(-5.0), Error);
}

TEST_CASE("sample_distance") {
    Rng rng(20);
    CHECK(sample_distance(5.0, 0.0, rng) == 5.0);
    CHECK_THROWS_AS(sample_distance(0.0, 1.0, rng), Error);
    CHECK_THROWS_AS(sample_distance(-1.0, 1.0, rng), Error);

    const int n = 1000000;
    double sum = 0.0, sum2 = 0.0;
    bool positive = true;
    for (int k = 0; k < n; ++k) {
        const double d = sample_distance(10.0, 2.0, rng);
        positive = positive && d > 0.0;
        sum += d;
        sum2 += d * d;
    }
    const double mean = sum / n, var = sum2 / n - mean * mean;
    CHECK(positive);
    CHECK(std::abs(mean - 10.0) <= 0.02);
    CHECK(std::abs(var - 4.0) <= 0.08);
}

TEST_CASE("gamma parameterization is exact") {
    for (auto [d, s] : {std::pair{10.0, 2.0}, {5.0, 1.0}, {0.3, 4.0}}) {
        const double alpha = d * d / (s * s), beta = s * s / d;
        CHECK(std::abs(alpha * beta - d) < 1e-12 * d);
        CHECK(std::abs(alpha * beta * beta - s * s) < 1e-12 * s * s);
    }
}

TEST_CASE("sample_angle") {
    Rng rng(21);
    int close = 0;
    for (int k = 0; k < 10000; ++k)
        if (std::abs(sample_tikhonov(1e6, rng)) < 0.01) ++close;
    CHECK(close > 9900);

    const int n = 100000;
    std::vector<double> u(static_cast<std::size_t>(n));
    for (auto& v : u) v = sample_tikhonov(0.0, rng);
    std::sort(u.begin(), u.end());
    double ks = 0.0;
    for (int k = 0; k < n; ++k) {
        const double cdf = (u[static_cast<std::size_t>(k)] + kPi) / (2.0 * kPi);
        ks = std::max({ks, std::abs(cdf - static_cast<double>(k) / n), std::abs(cdf - static_cast<double>(k + 1) / n)});
    }
    CHECK(ks < 0.01);
    CHECK(u.front() > -kPi);
    CHECK(u.back() <= kPi);

    CHECK(std::abs(empirical_bound_deg(epsilon_to_rho(30.0), 1000000, rng) - 30.0) < 1.0);

    CHECK(sample_tikhonov(kNoAngleNoise, rng) == 0.0);
    const double a = sample_angle(3.1, 50.0, rng);
    CHECK(a > -kPi);
    CHECK(a <= kPi);
}

TEST_CASE("angle wrapping") {
    CHECK(wrap_angle(-kPi) == kPi);
    CHECK(wrap_angle(kPi) == kPi);
    CHECK(std::abs(wrap_angle(3.0 * kPi / 2.0) + kPi / 2.0) < 1e-15);
    CHECK(std::abs(reflect_angle(-0.5) - 0.5) < 1e-15);
    CHECK(std::abs(reflect_angle(kPi + 0.25) - (kPi - 0.25)) < 1e-14);
}

TEST_CASE("synthesize") {
    Rng geo(22);
    const NetworkGeometry g = test::random_room_geometry(geo, 4);
    const EdgeSet e = edge_set(5, 4);
    const TrueParameters truth = true_parameters(g, e);

    Rng rng(23);
    const MeasurementSet near = synthesize(truth, {0.0, 0.01}, Scenario::II, rng);
    CHECK(near.angles.has_value());
    for (Index m = 0; m < truth.size(); ++m) {
        const EdgeParameters& p = truth.edges[static_cast<std::size_t>(m)];
        CHECK(near.distance(m) == p.distance);
        for (Plane plane : kPlanes) {
            CHECK(std::abs(wrap_angle(near.angles->azimuth(m, plane) - p.azimuth[plane])) < 1e-3);
            CHECK(std::abs(near.angles->elevation(m, plane) - p.elevation[plane]) < 1e-3);
        }
    }
    CHECK((near.adoa - truth.adoa).cwiseAbs().maxCoeff() < 1e-3);

    const MeasurementSet s1 = synthesize(truth, {1.0, 30.0}, Scenario::I, rng);
    CHECK_FALSE(s1.angles.has_value());
    CHECK(s1.scenario == Scenario::I);
    CHECK(s1.adoa == s1.adoa.transpose());
    CHECK(s1.adoa.diagonal().isZero(0.0));
    CHECK((s1.adoa.array() >= 0.0).all());
    CHECK((s1.adoa.array() <= kPi).all());
    CHECK(s1.mask.all());
    CHECK_FALSE(s1.has_missing());

    const MeasurementSet s2 = synthesize(truth, {1.0, 30.0}, Scenario::II, rng);
    CHECK((s2.angles->elevation.array() >= 0.0).all());
    CHECK((s2.angles->elevation.array() <= kPi).all());

    Rng a(99), b(99);
    const MeasurementSet x = synthesize(truth, {2.0, 40.0}, Scenario::II, a);
    const MeasurementSet y = synthesize(truth, {2.0, 40.0}, Scenario::II, b);
    CHECK(x.distance == y.distance);
    CHECK(x.adoa == y.adoa);
    CHECK(x.angles->azimuth == y.angles->azimuth);
    CHECK(x.angles->elevation == y.angles->elevation);

    const MeasurementSet exact = test::noiseless_measurements(truth, Scenario::II);
    CHECK(exact.adoa == truth.adoa);

    const TrueParameters bad = true_parameters(Points::Zero(2, 3));
    CHECK_THROWS_AS(synthesize(bad, {0.0, 0.0}, Scenario::I, rng), Error);
}

TEST_CASE("missing_mask") {
    Rng rng(24);
    CHECK(missing_mask(10, 0.0, rng).all());

    const Mask m = missing_mask(85, 0.3, rng);
    CHECK(is_symmetric(m));
    CHECK(m.diagonal().all());
    const Index off_removed = (m.array() == false).count() / 2;
    CHECK(off_removed == 1071);
    CHECK(85 * 84 / 2 == 3570);

    CHECK_THROWS_AS(missing_mask(5, 1.0, rng), Error);
    Mask asym = Mask::Constant(3, 3, true);
    asym(0, 1) = false;
    CHECK_FALSE(is_symmetric(asym));
}
