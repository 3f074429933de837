#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "fibreflow/error.hpp"
#include "fibreflow/simd/kernels.hpp"

using namespace fibreflow;
namespace sd = fibreflow::simd;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng, double lo = -3.0, double hi = 3.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

// sizes exercising empty input, pure tails and full vectors
const std::size_t sizes[] = {0, 1, 3, 4, 7, 64, 1027};

}  // namespace

TEST_CASE("scalar reference kernels against direct formulas") {
    std::vector<double> a{2.0}, d{1.0}, br{0.0}, bi{1.0}, lo(1), hi(1);
    sd::scalar::hermitian_eigs({a, d, br, bi}, lo, hi);
    // eigenvalues of [[2, i], [-i, 1]] are (3 -+ sqrt 5) / 2
    CHECK(lo[0] == doctest::Approx((3.0 - std::sqrt(5.0)) / 2).epsilon(1e-15));
    CHECK(hi[0] == doctest::Approx((3.0 + std::sqrt(5.0)) / 2).epsilon(1e-15));

    std::vector<double> x{1, 2, 3}, y{-1, 0, 1}, out(3);
    sd::scalar::lincomb(2.0, x, 3.0, y, out);
    CHECK(out == std::vector<double>{-1, 4, 9});
    sd::scalar::relax_step(x, y, 0.5, 0.1, out);
    CHECK(out[2] == doctest::Approx(3.0 + 0.1 * (1.0 - 1.5)));
    CHECK(sd::scalar::min_value(y) == -1.0);
    CHECK(sd::scalar::max_abs(std::vector<double>{1.0, -4.0, 2.0}) == 4.0);
    CHECK(std::isinf(sd::scalar::min_value(std::span<const double>{})));
    CHECK(sd::scalar::max_abs(std::span<const double>{}) == 0.0);
}

TEST_CASE("AVX2 kernels are bit-identical to the scalar reference") {
    if (!sd::avx2_supported()) {
        MESSAGE("AVX2 not available; skipping equivalence");
        return;
    }
    std::mt19937_64 rng(7);
    for (std::size_t n : sizes) {
        CAPTURE(n);
        auto a = random_vec(n, rng, 0.1, 4.0), d = random_vec(n, rng, 0.1, 4.0);
        auto br = random_vec(n, rng), bi = random_vec(n, rng);
        std::vector<double> lo1(n), hi1(n), lo2(n), hi2(n);
        sd::scalar::hermitian_eigs({a, d, br, bi}, lo1, hi1);
        sd::avx2::hermitian_eigs({a, d, br, bi}, lo2, hi2);
        CHECK(same_bits(lo1, lo2));
        CHECK(same_bits(hi1, hi2));

        auto x = random_vec(n, rng), y = random_vec(n, rng);
        std::vector<double> o1(n), o2(n);
        sd::scalar::lincomb(0.37, x, -1.9, y, o1);
        sd::avx2::lincomb(0.37, x, -1.9, y, o2);
        CHECK(same_bits(o1, o2));

        sd::scalar::relax_step(x, y, 0.7, 0.013, o1);
        sd::avx2::relax_step(x, y, 0.7, 0.013, o2);
        CHECK(same_bits(o1, o2));

        std::vector<std::vector<double>> rows;
        for (int j = 0; j < 5; ++j) rows.push_back(random_vec(n, rng));
        const double* rp[5] = {rows[0].data(), rows[1].data(), rows[2].data(), rows[3].data(), rows[4].data()};
        const double c[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
        sd::scalar::stencil5(rp, c, 3.3, n, o1.data());
        sd::avx2::stencil5(rp, c, 3.3, n, o2.data());
        CHECK(same_bits(o1, o2));

        CHECK(same_bits(sd::scalar::min_value(x), sd::avx2::min_value(x)));
        CHECK(same_bits(sd::scalar::max_abs(x), sd::avx2::max_abs(x)));
    }
}

TEST_CASE("NaN propagates through reductions on both backends") {
    std::vector<double> x{1.0, 2.0, 3.0, std::nan(""), 5.0, 6.0};
    CHECK(std::isnan(sd::scalar::min_value(x)));
    CHECK(std::isnan(sd::scalar::max_abs(x)));
    if (sd::avx2_supported()) {
        CHECK(std::isnan(sd::avx2::min_value(x)));
        CHECK(std::isnan(sd::avx2::max_abs(x)));
        x[3] = 4.0;
        x[5] = -std::nan("");
        CHECK(std::isnan(sd::avx2::min_value(x)));
        CHECK(std::isnan(sd::avx2::max_abs(x)));
    }
}

TEST_CASE("backend selection") {
    const auto before = sd::active_backend();
    sd::set_backend(sd::Backend::scalar);
    CHECK(sd::active_backend() == sd::Backend::scalar);
    CHECK(sd::backend_name(sd::Backend::scalar) == "scalar");
    if (!sd::avx2_supported()) CHECK_THROWS_AS(sd::set_backend(sd::Backend::avx2), ConfigError);
    sd::set_backend(before);
}
