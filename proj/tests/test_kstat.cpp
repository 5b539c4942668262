#include <doctest.h>

#include <cmath>
#include <vector>

#include "pspec/kstat.hpp"
#include "pspec/rng.hpp"

using namespace pspec;
using kstat::Cx;

namespace {

// Direct k-statistics of real sample vectors via raw product means.
double k2_of(const std::vector<double>& x, const std::vector<double>& y) {
    const double m = x.size();
    Cx sx = 0, sy = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxy += x[i] * y[i];
    }
    return kstat::c2(m, sx / m, sy / m, sxy / m).real();
}

double k3_of(const std::vector<double>& x) {
    const double m = x.size();
    Cx s1 = 0, s2 = 0, s3 = 0;
    for (double v : x) {
        s1 += v;
        s2 += v * v;
        s3 += v * v * v;
    }
    Cx mx = s1 / m, mxy = s2 / m, mxyz = s3 / m;
    return kstat::c3(m, mx, mx, mx, mxy, mxy, mxy, mxyz).real();
}

double k4_of(const std::vector<double>& x) {
    const double m = x.size();
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (double v : x) {
        s1 += v;
        s2 += v * v;
        s3 += v * v * v;
        s4 += v * v * v * v;
    }
    kstat::RawMeans4 r;
    r.x = r.y = r.z = r.w = s1 / m;
    r.xy = r.xz = r.xw = r.yz = r.yw = r.zw = s2 / m;
    r.xyz = r.xyw = r.xzw = r.yzw = s3 / m;
    r.xyzw = s4 / m;
    return kstat::c4(m, r).real();
}

} // namespace

TEST_CASE("c2 of a pair matches the two-sample formula") {
    // m = 2: c2 = (x1-x2)(y1-y2)/2
    std::vector<double> x = {3.0, 7.0}, y = {-1.0, 5.0};
    CHECK(k2_of(x, y) == doctest::Approx((3.0 - 7.0) * (-1.0 - 5.0) / 2.0));
}

TEST_CASE("k-statistics are unbiased for known distributions") {
    // Monte Carlo bias check at >= 4 standard errors of the trial mean.
    const int trials = 4000, m = 12;
    Xoshiro256StarStar rng(11);

    double sum2 = 0, sum3 = 0, sum4 = 0, ss2 = 0, ss3 = 0, ss4 = 0;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> x(m);
        for (auto& v : x) v = rng.exponential(); // cumulants: 1, 1, 2, 6
        double k2 = k2_of(x, x), k3 = k3_of(x), k4 = k4_of(x);
        sum2 += k2;
        ss2 += k2 * k2;
        sum3 += k3;
        ss3 += k3 * k3;
        sum4 += k4;
        ss4 += k4 * k4;
    }
    auto check_near = [&](double sum, double ss, double truth) {
        double mean = sum / trials;
        double se = std::sqrt((ss / trials - mean * mean) / trials);
        CHECK(std::abs(mean - truth) < 4 * se);
    };
    check_near(sum2, ss2, 1.0);
    check_near(sum3, ss3, 2.0);
    check_near(sum4, ss4, 6.0);
}

TEST_CASE("poisson counts: c2 = c3 = c4 = lambda") {
    const double lambda = 3.0;
    const int trials = 4000, m = 16;
    Xoshiro256StarStar rng(5);
    auto poisson = [&]() {
        // inversion by multiplication of uniforms; lambda is small
        double L = std::exp(-lambda);
        int k = 0;
        double p = 1;
        do {
            ++k;
            p *= rng.uniform();
        } while (p > L);
        return static_cast<double>(k - 1);
    };
    double sum3 = 0, ss3 = 0, sum4 = 0, ss4 = 0;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> x(m);
        for (auto& v : x) v = poisson();
        double k3 = k3_of(x), k4 = k4_of(x);
        sum3 += k3;
        ss3 += k3 * k3;
        sum4 += k4;
        ss4 += k4 * k4;
    }
    auto se = [&](double sum, double ss) {
        double mean = sum / trials;
        return std::sqrt((ss / trials - mean * mean) / trials);
    };
    CHECK(std::abs(sum3 / trials - lambda) < 4 * se(sum3, ss3));
    CHECK(std::abs(sum4 / trials - lambda) < 4 * se(sum4, ss4));
}

TEST_CASE("gaussian samples: c3 and c4 shrink toward zero") {
    const int trials = 3000, m = 24;
    Xoshiro256StarStar rng(9);
    auto normal = [&]() {
        // Box-Muller
        double u1 = rng.uniform(), u2 = rng.uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    };
    double sum3 = 0, ss3 = 0, sum4 = 0, ss4 = 0;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> x(m);
        for (auto& v : x) v = normal();
        double k3 = k3_of(x), k4 = k4_of(x);
        sum3 += k3;
        ss3 += k3 * k3;
        sum4 += k4;
        ss4 += k4 * k4;
    }
    auto se = [&](double sum, double ss) {
        double mean = sum / trials;
        return std::sqrt((ss / trials - mean * mean) / trials);
    };
    CHECK(std::abs(sum3 / trials) < 4 * se(sum3, ss3));
    CHECK(std::abs(sum4 / trials) < 4 * se(sum4, ss4));
}
