#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <numbers>
#include <sstream>

#include "speclab/lattice.hpp"
#include "speclab/spaces.hpp"

using namespace speclab;
using Catch::Approx;

namespace {
const double root2pi = std::sqrt(2.0 * std::numbers::pi);

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
    REQUIRE(a.lattice == b.lattice);
    double m = 0.0;
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        m = std::max(m, std::abs(a.coeffs[i] - b.coeffs[i]));
    return m;
}
}  // namespace

TEST_CASE("make_lattice mode sets") {
    auto l1 = make_lattice(1, 2);
    REQUIRE(l1.mode_count() == 5);
    std::vector<double> modes;
    for (std::size_t i = 0; i < l1.mode_count(); ++i) modes.push_back(l1.mode(i));
    REQUIRE(modes == std::vector<double>{-2, -1, 0, 1, 2});

    auto l2 = make_lattice(2, 1);
    std::vector<double> modes2;
    for (std::size_t i = 0; i < l2.mode_count(); ++i) modes2.push_back(l2.mode(i));
    REQUIRE(modes2 == std::vector<double>{-1, -0.5, 0, 0.5, 1});

    REQUIRE(make_lattice(4, 32).mode_count() == 257);

    REQUIRE_THROWS_AS(make_lattice(0, 4), usage_error);
    REQUIRE_THROWS_AS(make_lattice(4, 0), usage_error);
}

TEST_CASE("synthesize normalization") {
    auto lat = make_lattice(1, 4);
    SpectralField zero(lat);
    for (auto v : synthesize(zero, 16)) REQUIRE(std::abs(v) == 0.0);

    SpectralField c(lat);
    c.at_index(0) = root2pi;
    for (auto v : synthesize(c, 16)) REQUIRE(std::abs(v - 1.0) < 1e-14);

    // u_hat(1) = sqrt(2 pi) -> samples e^{i x_j}, by direct evaluation of the sum
    SpectralField e1(lat);
    e1.at_index(1) = root2pi;
    auto samples = synthesize(e1, 16);
    for (std::size_t j = 0; j < samples.size(); ++j) {
        double x = 2.0 * std::numbers::pi * j / 16.0;
        REQUIRE(std::abs(samples[j] - std::exp(cplx(0.0, x))) < 1e-13);
    }

    REQUIRE_THROWS_AS(synthesize(e1, 4), usage_error);
}

TEST_CASE("analyze inverts synthesize on band-limited data") {
    for (std::uint32_t lambda : {1u, 2u, 4u}) {
        auto lat = make_lattice(lambda, 8);
        auto f = random_band_limited(lat, 8.0, 0.5, 42 + lambda);
        for (std::size_t m : {lat.mode_count(), default_grid_size(lat)}) {
            auto back = analyze(synthesize(f, m), lat);
            REQUIRE(max_abs_diff(f, back) < 1e-12);
        }
    }
}

TEST_CASE("analyze of elementary fields") {
    auto lat = make_lattice(1, 4);
    std::vector<cplx> ones(16, cplx(1.0, 0.0));
    auto f = analyze(ones, lat);
    REQUIRE(std::abs(f.at_index(0) - root2pi) < 1e-13);
    for (std::int64_t k = -4; k <= 4; ++k)
        if (k != 0) REQUIRE(std::abs(f.at_index(k)) < 1e-13);

    // e^{ix/2} on T_2 concentrates at xi = 1/2 with u_hat = lambda sqrt(2 pi)
    auto lat2 = make_lattice(2, 2);
    std::size_t m = 32;
    std::vector<cplx> samples(m);
    for (std::size_t j = 0; j < m; ++j) {
        double x = lat2.circumference() * j / m;
        samples[j] = std::exp(cplx(0.0, 0.5 * x));
    }
    auto g = analyze(samples, lat2);
    REQUIRE(std::abs(g.at_index(1) - 2.0 * root2pi) < 1e-12);  // slot xi = 1/2
    for (std::int64_t k = -4; k <= 4; ++k)
        if (k != 1) REQUIRE(std::abs(g.at_index(k)) < 1e-12);

    std::vector<cplx> tooFew(3);
    REQUIRE_THROWS_AS(analyze(tooFew, lat2), usage_error);
}

TEST_CASE("convolution identities") {
    auto lat = make_lattice(2, 6);
    auto f = random_band_limited(lat, 3.0, 0.3, 7);

    SpectralField unit(lat);  // g == 1 on T_lambda
    unit.at_index(0) = root2pi * lat.lambda;
    auto conv = convolve(f, unit);
    REQUIRE(max_abs_diff(conv, f) < 1e-13);

    SpectralField a(lat), b(lat);
    a.at_index(2) = 1.5;            // xi = 1
    b.at_index(3) = cplx(0.0, 2.0); // xi = 3/2
    auto ab = convolve(a, b);
    for (std::int64_t k = -12; k <= 12; ++k) {
        cplx expect = (k == 5) ? a.at_index(2) * b.at_index(3) / (root2pi * double(lat.lambda))
                               : cplx(0.0);
        REQUIRE(std::abs(ab.at_index(k) - expect) < 1e-14);
    }

    auto lat1 = make_lattice(1, 6);
    REQUIRE_THROWS_AS(convolve(f, SpectralField(lat1)), usage_error);
}

TEST_CASE("convolve matches the physical-space product oracle") {
    for (std::uint32_t lambda : {1u, 3u}) {
        auto lat = make_lattice(lambda, 8);
        auto f = random_band_limited(lat, 8.0, 0.4, 11);
        auto g = random_band_limited(lat, 8.0, 0.4, 12);
        std::size_t m = default_grid_size(lat);  // >= 4 N lambda + 2: cubic-safe, here quadratic
        auto fs = synthesize(f, m);
        auto gs = synthesize(g, m);
        std::vector<cplx> prod(m);
        for (std::size_t j = 0; j < m; ++j) prod[j] = fs[j] * gs[j];
        auto viaPhysical = analyze(prod, lat);
        REQUIRE(max_abs_diff(convolve(f, g), viaPhysical) < 1e-10);
    }
}

TEST_CASE("random gaussian data") {
    auto lat = make_lattice(1, 500);

    auto a = random_gaussian_data(lat, 0.5, 99);
    auto b = random_gaussian_data(lat, 0.5, 99);
    REQUIRE(a.coeffs == b.coeffs);  // bit-reproducible per seed

    // fast decay => H^1 norm finite and small compared to mode count
    auto fast = random_gaussian_data(lat, 10.0, 1);
    REQUIRE(std::isfinite(sobolev_norm(fast, 1.0)));
    REQUIRE(sobolev_norm(fast, 1.0) < 50.0);

    // alpha = 0: flat expected magnitude E|u_hat|^2 = 2 pi across modes
    auto white = random_gaussian_data(lat, 0.0, 2);
    KahanSum mass;
    for (auto& c : white.coeffs) mass.add(std::norm(c));
    double mean = mass.value() / white.coeffs.size() / (2.0 * std::numbers::pi);
    REQUIRE(mean > 0.8);
    REQUIRE(mean < 1.2);

    // alpha = 0.5: tail sums of |u_hat|^p decay for p = 4 > 1/alpha
    auto rough = random_gaussian_data(lat, 0.5, 3);
    auto tail = [&](std::int64_t n0) {
        KahanSum t;
        for (std::int64_t n = -500; n <= 500; ++n)
            if (std::llabs(n) > n0) t.add(std::pow(std::abs(rough.at_index(n)), 4.0));
        return t.value();
    };
    REQUIRE(tail(100) < 0.5 * tail(10));
    REQUIRE(tail(400) < 0.5 * tail(100));

    REQUIRE_THROWS_AS(random_gaussian_data(lat, -1.0, 0), usage_error);
    REQUIRE_THROWS_AS(random_gaussian_data(make_lattice(2, 4), 1.0, 0), usage_error);
}

TEST_CASE("Parseval on the sampling grid") {
    for (std::uint32_t lambda : {1u, 2u, 4u}) {
        auto lat = make_lattice(lambda, 8);
        auto f = random_band_limited(lat, 8.0, 0.2, 5 + lambda);
        for (std::size_t m : {lat.mode_count(), default_grid_size(lat)}) {
            auto s = synthesize(f, m);
            KahanSum phys;
            for (auto& v : s) phys.add(std::norm(v));
            double lhs = phys.value() * lat.circumference() / double(m);
            double rhs = std::pow(spectral_l2_norm(f), 2);
            REQUIRE(lhs == Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_CASE("field serialization round-trips") {
    auto lat = make_lattice(3, 5);
    auto f = random_band_limited(lat, 5.0, 0.1, 21);

    auto j = field_to_json(f);
    auto fj = field_from_json(j);
    REQUIRE(fj.lattice == f.lattice);
    REQUIRE(fj.coeffs == f.coeffs);

    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    field_to_binary(f, ss);
    auto fb = field_from_binary(ss);
    REQUIRE(fb.lattice == f.lattice);
    REQUIRE(fb.coeffs == f.coeffs);  // bit-exact

    auto dir = std::filesystem::temp_directory_path() / "speclab_test_fields";
    std::filesystem::create_directories(dir);
    save_field(f, (dir / "f.json").string());
    save_field(f, (dir / "f.bin").string());
    REQUIRE(load_field((dir / "f.json").string()).coeffs == f.coeffs);
    REQUIRE(load_field((dir / "f.bin").string()).coeffs == f.coeffs);
}
