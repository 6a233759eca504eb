#include <catch2/catch_amalgamated.hpp>

#include <subsql/tmm.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

using namespace subsql;
using Catch::Approx;

namespace {

Stack random_stack(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> n_layers(1, 30);
    std::uniform_real_distribution<double> index(1.0, 4.0);
    std::uniform_real_distribution<double> thickness(0.0, 300.0);

    Stack s;
    s.incident_index = index(rng);
    s.exit_index = index(rng);
    const int n = n_layers(rng);
    for (int i = 0; i < n; ++i) {
        Material m{"m" + std::to_string(i), index(rng), 1000.0, 1e9, 1e-4};
        s.layers.push_back({m, thickness(rng)});
    }
    return s;
}

// contiguous R > 0.999 region containing 1078 nm, 0.1 nm resolution
double r999_span(const Stack& s) {
    double lo = 1078.0, hi = 1078.0;
    while (stack_rt(s, lo - 0.1).R > 0.999 && lo > 600.0) lo -= 0.1;
    while (stack_rt(s, hi + 0.1).R > 0.999 && hi < 1600.0) hi += 0.1;
    return hi - lo;
}

}  // namespace

TEST_CASE("layer matrix basics", "[tmm]") {
    SECTION("unit determinant") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> index(1.0, 4.0);
        std::uniform_real_distribution<double> thickness(0.0, 500.0);
        for (int i = 0; i < 200; ++i) {
            const TransferMatrix m = layer_matrix(index(rng), thickness(rng), 1078.0);
            CHECK(std::abs(m.determinant() - 1.0) < 1e-12);
        }
    }
    SECTION("quarter-wave structure") {
        const double n = 3.2;
        const TransferMatrix m = layer_matrix(n, 1078.0 / (4.0 * n), 1078.0);
        CHECK(std::abs(m.m11) < 1e-12);
        CHECK(std::abs(m.m22) < 1e-12);
        CHECK(std::abs(m.m12 - std::complex<double>{0.0, 1.0 / n}) < 1e-12);
        CHECK(std::abs(m.m21 - std::complex<double>{0.0, n}) < 1e-12);
    }
    SECTION("zero thickness is the identity") {
        const TransferMatrix m = layer_matrix(2.5, 0.0, 1078.0);
        CHECK(m.m11 == std::complex<double>{1.0, 0.0});
        CHECK(m.m12 == std::complex<double>{0.0, 0.0});
        CHECK(m.m21 == std::complex<double>{0.0, 0.0});
        CHECK(m.m22 == std::complex<double>{1.0, 0.0});
    }
    SECTION("argument validation") {
        CHECK_THROWS_AS(layer_matrix(0.5, 100.0, 1078.0), arg_error);
        CHECK_THROWS_AS(layer_matrix(2.0, -1.0, 1078.0), arg_error);
        CHECK_THROWS_AS(layer_matrix(2.0, 100.0, 0.0), arg_error);
    }
}

TEST_CASE("bare interface reproduces Fresnel reflectance", "[tmm]") {
    Stack s;  // no layers
    s.incident_index = 1.0;
    s.exit_index = 1.5;
    const RT rt = stack_rt(s, 1078.0);
    CHECK(rt.R == Approx(0.04).epsilon(1e-12));
    CHECK(rt.T == Approx(0.96).epsilon(1e-12));

    s.exit_index = 1.0;
    CHECK(stack_rt(s, 1078.0).R == Approx(0.0).margin(1e-15));
}

TEST_CASE("energy conservation against independent transmittance", "[tmm]") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 100; ++i) {
        const Stack s = random_stack(rng);
        std::uniform_real_distribution<double> lambda(600.0, 1600.0);
        const double lam = lambda(rng);
        const RT rt = stack_rt(s, lam);
        const double t_direct = transmittance_direct(s, lam);
        CHECK(std::abs(rt.R + t_direct - 1.0) < 1e-10);
        CHECK(rt.T == Approx(1.0 - rt.R));
        CHECK((rt.R >= 0.0 && rt.R <= 1.0));
    }
}

TEST_CASE("half-wave layer is absentee", "[tmm]") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> index(1.1, 4.0);
    for (int i = 0; i < 50; ++i) {
        Stack s = random_stack(rng);
        const double r0 = stack_rt(s, 1078.0).R;

        const double n_abs = index(rng);
        std::uniform_int_distribution<std::size_t> pos(0, s.layers.size());
        Material m{"absentee", n_abs, 1000.0, 1e9, 1e-4};
        s.layers.insert(s.layers.begin() + pos(rng), {m, 1078.0 / (2.0 * n_abs)});

        CHECK(std::abs(stack_rt(s, 1078.0).R - r0) < 1e-10);
    }
}

TEST_CASE("reciprocity: reversed stack transmits identically", "[tmm]") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 50; ++i) {
        const Stack s = random_stack(rng);
        Stack rev = s;
        std::reverse(rev.layers.begin(), rev.layers.end());
        std::swap(rev.incident_index, rev.exit_index);
        CHECK(stack_rt(rev, 1078.0).T == Approx(stack_rt(s, 1078.0).T).epsilon(1e-10));
    }
}

TEST_CASE("transmission falls monotonically with pair count", "[tmm]") {
    const MaterialRegistry mats = MaterialRegistry::defaults();
    double prev = 1e9;
    for (int pairs = 1; pairs <= 30; ++pairs) {
        const Stack s = make_mirror_stack(mats, 35.8, 34.7, pairs);
        const double t = transmission_ppm(s, 1078.0);
        CHECK(t < prev);
        prev = t;
    }
}

TEST_CASE("ppm transmission scale", "[tmm]") {
    // R = 0.99975 at a single interface corresponds to exactly 250 ppm.
    const double r_amp = std::sqrt(0.99975);
    Stack s;
    s.incident_index = (1.0 + r_amp) / (1.0 - r_amp);
    s.exit_index = 1.0;
    CHECK(transmission_ppm(s, 1078.0) == Approx(250.0).epsilon(1e-9));

    const Stack base = make_mirror_stack(MaterialRegistry::defaults());
    const RT rt = stack_rt(base, 1078.0);
    CHECK(transmission_ppm(base, 1078.0) == Approx((1.0 - rt.R) * 1e6));
}

TEST_CASE("frozen baseline transmission", "[tmm]") {
    const Stack base = make_mirror_stack(MaterialRegistry::defaults());
    const double ppm = transmission_ppm(base, 1078.0);

    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12e", ppm);
    CHECK(std::string(buf) == "4.077165219772e+02");

    // coarse sanity: within a factor of two of the 250 ppm target
    CHECK(ppm > 125.0);
    CHECK(ppm < 500.0);
}

TEST_CASE("reflectance spectrum shape", "[tmm]") {
    const Stack base = make_mirror_stack(MaterialRegistry::defaults());
    const ReflectanceSpectrum s = spectrum(base, 1000.0, 1160.0, 33);

    REQUIRE(s.wavelengths_nm.size() == 33);
    REQUIRE(s.R.size() == 33);
    REQUIRE(s.T.size() == 33);
    CHECK(s.wavelengths_nm.front() == Approx(1000.0));
    CHECK(s.wavelengths_nm.back() == Approx(1160.0));

    std::size_t i_max = 0;
    for (std::size_t i = 0; i < s.R.size(); ++i) {
        CHECK(s.R[i] + s.T[i] == Approx(1.0));
        if (s.R[i] > s.R[i_max]) i_max = i;
    }
    // stop band centered near the design wavelength
    CHECK(std::abs(s.wavelengths_nm[i_max] - 1078.0) <= 10.0);

    CHECK_THROWS_AS(spectrum(base, 1160.0, 1000.0, 33), arg_error);
    CHECK_THROWS_AS(spectrum(base, 1000.0, 1160.0, 1), arg_error);
}

TEST_CASE("spectrum csv format", "[tmm]") {
    const Stack base = make_mirror_stack(MaterialRegistry::defaults());
    const ReflectanceSpectrum s = spectrum(base, 1070.0, 1090.0, 3);

    std::ostringstream a, b;
    write_spectrum_csv(s, a);
    write_spectrum_csv(s, b);
    CHECK(a.str() == b.str());

    std::istringstream in(a.str());
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "wavelength_nm,R,T");
    REQUIRE(std::getline(in, line));
    // three %.12e fields
    double w = 0.0, r = 0.0, t = 0.0;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &w, &r, &t) == 3);
    CHECK(w == Approx(1070.0));
    CHECK(line.find('e') != std::string::npos);
    int rows = 1;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("support pair evaluator matches the full stack", "[tmm]") {
    const MaterialRegistry mats = MaterialRegistry::defaults();
    const Stack templ = make_mirror_stack(mats);
    const SupportPairEvaluator eval(templ, 1078.0);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> t(10.0, 120.0);
    for (int i = 0; i < 50; ++i) {
        const double t1 = t(rng), t2 = t(rng);
        Stack s = templ;
        s.layers[s.layers.size() - 2].thickness_nm = t1;
        s.layers[s.layers.size() - 1].thickness_nm = t2;
        CHECK(eval.ppm(t1, t2) == Approx(transmission_ppm(s, 1078.0)).epsilon(1e-12));
    }
}

TEST_CASE("thin support pair keeps the mirror bandwidth", "[tmm]") {
    const MaterialRegistry mats = MaterialRegistry::defaults();
    const Stack thin = make_mirror_stack(mats);              // 35.8/34.7 nm support
    const Stack full = make_mirror_stack(mats, 76.6, 89.5, 26);  // quarter-wave support

    const double ratio = r999_span(thin) / r999_span(full);
    CHECK(ratio > 0.9);
    CHECK(ratio < 1.1);
}
