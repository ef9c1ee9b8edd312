#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qspec/emitter.hpp"
#include "test_support.hpp"

using namespace qspec;
using qspec::testing::random_frequency;
using qspec::testing::random_model;

namespace
{
EmitterModel diag_model(std::initializer_list<double> levels, std::initializer_list<cdouble> coupling, double rate = 1.0)
{
    const int n = static_cast<int>(levels.size());
    CMatrix h = CMatrix::Zero(n, n);
    CVector g(n);
    int k = 0;
    for (double e : levels)
        h(k, k) = e, ++k;
    k = 0;
    for (cdouble c : coupling)
        g(k++) = c;
    return EmitterModel::create(h, g.normalized(), rate);
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
} // namespace

TEST_CASE("two-level susceptibility closed form")
{
    const auto tls = EmitterModel::two_level(0.0, 1.0);
    CHECK(susceptibility(tls, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(susceptibility(tls, -0.5) == doctest::Approx(-1.0).epsilon(1e-15));

    const auto shifted = EmitterModel::two_level(2.0, 3.0);
    CHECK(susceptibility(shifted, 2.0 + 1.5) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("symmetric cancellation midway between two lines")
{
    const double s = 1.0 / std::sqrt(2.0);
    const auto m = diag_model({1.0, 3.0}, {s, s});
    CHECK(std::abs(susceptibility(m, 2.0)) < 1e-15);
    CHECK(std::abs(susceptibility_spectral(m.spectrum(), m.rate(), 2.0)) < 1e-15);
}

TEST_CASE("pole proximity is reported, not silently evaluated")
{
    const auto tls = EmitterModel::two_level(0.25, 2.0);
    CHECK_THROWS_AS(susceptibility(tls, 0.25), Error);
    CHECK_THROWS_AS(susceptibility(tls, 0.25 + 1e-10), Error);
    CHECK_NOTHROW(susceptibility(tls, 0.25 + 1e-8));
    try
    {
        susceptibility(tls, 0.25);
    }
    catch (const Error &e)
    {
        CHECK(e.code() == Errc::PoleProximity);
    }
    CHECK_THROWS_AS(d_susceptibility(tls, 0.25, ParameterTag::gamma()), Error);
    CHECK_THROWS_AS(susceptibility_spectral(tls.spectrum(), tls.rate(), 0.25), Error);
}

TEST_CASE("spectral decomposition invariants")
{
    std::mt19937_64 rng(11);
    for (int n = 1; n <= 8; ++n)
    {
        const auto m = random_model(rng, n);
        const auto &d = m.spectrum();
        double sum = 0.0;
        for (double w : d.overlaps)
        {
            CHECK(w >= 0.0);
            sum += w;
        }
        CHECK(std::abs(sum - 1.0) < 1e-10);
        CHECK(std::is_sorted(d.eigenvalues.begin(), d.eigenvalues.end()));
    }
}

TEST_CASE("linear-solve and partial-fraction routes agree; both match explicit inversion")
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 10; ++trial)
    {
        const auto m = random_model(rng, 4);
        for (int k = 0; k < 100; ++k)
        {
            const double w = random_frequency(rng, m, 5.0, 1e-6);
            const double direct = susceptibility(m, w);
            CHECK(rel_err(susceptibility_spectral(m.spectrum(), m.rate(), w), direct) <= 1e-9);
            CHECK(rel_err(qspec::testing::chi_by_inverse(m, w), direct) <= 1e-9);
        }
    }
}

TEST_CASE("susceptibility is real for Hermitian H_M")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial)
    {
        const auto m = random_model(rng, 1 + trial % 6);
        for (int k = 0; k < 50; ++k)
        {
            const cdouble z = susceptibility_complex(m, random_frequency(rng, m, 5.0, 1e-6));
            CHECK(std::abs(z.imag()) <= 1e-12 * std::abs(z.real()) + 1e-15);
        }
    }
}

TEST_CASE("d_susceptibility closed forms on a two-level emitter")
{
    const auto tls = EmitterModel::two_level(0.0, 1.0);
    CHECK(d_susceptibility(tls, 0.5, ParameterTag::gamma()) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d_susceptibility(tls, 0.5, ParameterTag::detuning(1)) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(d_susceptibility(tls, 0.5, ParameterTag::detuning(2)), Error);
}

TEST_CASE("d_susceptibility matches central finite differences")
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 12; ++trial)
    {
        const int n = 1 + trial % 5;
        const auto m = random_model(rng, n, 1.0 + 0.25 * trial);
        const double h = 1e-6 * m.rate();
        for (int k = 0; k < 10; ++k)
        {
            const double w = random_frequency(rng, m, 4.0 * m.rate(), 0.05 * m.rate());
            const double fd_gamma =
                (susceptibility(m.with_rate(m.rate() + h), w) - susceptibility(m.with_rate(m.rate() - h), w)) / (2 * h);
            CHECK(rel_err(d_susceptibility(m, w, ParameterTag::gamma()), fd_gamma) <= 1e-5);
            for (int j = 1; j <= n; ++j)
            {
                const double fd = (susceptibility(m.with_detuning_shift(j, h), w) -
                                   susceptibility(m.with_detuning_shift(j, -h), w)) /
                                  (2 * h);
                const double an = d_susceptibility(m, w, ParameterTag::detuning(j));
                CHECK(an >= 0.0);
                CHECK(std::abs(an - fd) <= 1e-5 * std::abs(fd) + 1e-9);
            }
        }
    }
}

TEST_CASE("response extrema and pole limits on a two-level emitter")
{
    const auto tls = EmitterModel::two_level(0.0, 1.0);
    CHECK(response(tls, 0.5, ParameterTag::gamma()) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(response(tls, -0.5, ParameterTag::gamma()) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(response(tls, 0.0, ParameterTag::detuning(1)) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(response(tls, 0.0, ParameterTag::gamma()) == 0.0);
    // Just outside the guard band the direct formula joins the limit.
    CHECK(response(tls, 2e-9, ParameterTag::detuning(1)) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(std::abs(response(tls, 2e-9, ParameterTag::gamma())) < 1e-8);
}

TEST_CASE("response stays bounded and decays far from the spectrum")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial)
    {
        const int n = 1 + trial % 6;
        const auto m = random_model(rng, n, 0.5 + 0.1 * trial);
        const double rate = m.rate();
        for (int k = 0; k < 200; ++k)
        {
            const double w = random_frequency(rng, m, 10.0 * rate, 0.0);
            CHECK(std::abs(response(m, w, ParameterTag::gamma())) <= (1.0 + 1e-14) / rate);
            for (int j = 1; j <= n; ++j)
                CHECK(response(m, w, ParameterTag::detuning(j)) >= 0.0);
        }
        for (int j = 1; j <= n; ++j)
        {
            const double lo = m.min_eigenvalue() - 1e3 * rate, hi = m.max_eigenvalue() + 1e3 * rate;
            CHECK(response(m, lo, ParameterTag::detuning(j)) <= 1.01e-6 / rate);
            CHECK(response(m, hi, ParameterTag::detuning(j)) <= 1.01e-6 / rate);
        }
    }
}

TEST_CASE("response is continuous through every pole")
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial)
    {
        const int n = 2 + trial % 4;
        const auto m = random_model(rng, n, 1.0, 2.0, 1e-2);
        for (const Pole &p : m.poles())
            for (int j = 1; j <= n; ++j)
            {
                const auto theta = ParameterTag::detuning(j);
                const double at = response(m, p.position, theta);
                const double off = response(m, p.position + 1e-6, theta);
                CHECK(std::abs(at - off) <= 1e-4 * std::max(1.0, at));
            }
    }
}

TEST_CASE("dark states carry no pole and leave the response finite")
{
    const auto m = diag_model({-1.0, 2.0}, {1.0, 0.0});
    REQUIRE(m.poles().size() == 1);
    CHECK(m.poles()[0].position == doctest::Approx(-1.0));
    // Evaluating on the dark eigenvalue is legal.
    CHECK(std::isfinite(susceptibility(m, 2.0)));
    CHECK(response(m, 2.0, ParameterTag::detuning(2)) == 0.0);
    CHECK(response(m, 0.3, ParameterTag::detuning(2)) == 0.0);
}

TEST_CASE("degenerate bright eigenvalues form a single pole")
{
    const auto m = diag_model({1.0, 1.0, 3.0}, {0.6, 0.0, 0.8});
    REQUIRE(m.poles().size() == 2);
    CHECK(m.poles()[0].weight == doctest::Approx(0.36));
    // Pole limit agrees with a nearby direct evaluation.
    const double limit = response(m, 1.0, ParameterTag::detuning(1));
    CHECK(limit == doctest::Approx(response(m, 1.0 + 1e-7, ParameterTag::detuning(1))).epsilon(1e-6));
}

TEST_CASE("time kernel closed forms")
{
    const auto tls = EmitterModel::two_level(0.0, 1.0);
    CHECK(std::abs(kernel_time(tls, 0.0) - 1.0) < 1e-15);
    CHECK(std::abs(kernel_time(tls, 2.0) - std::exp(-1.0)) < 1e-14);
    CHECK(kernel_time(tls, -0.1) == cdouble(0.0));

    const auto detuned = EmitterModel::two_level(0.7, 2.0);
    for (double t : {0.1, 0.5, 1.7})
    {
        const cdouble expect = 2.0 * std::exp(cdouble(-1.0, -0.7) * t);
        CHECK(std::abs(kernel_time(detuned, t) - expect) < 1e-13);
    }
    const auto series = kernel_time_series(detuned, 0.01, 200);
    CHECK(std::abs(series[170] - kernel_time(detuned, 1.7)) < 1e-12);
}

TEST_CASE("Fourier transform of the time kernel reproduces the frequency kernel")
{
    std::mt19937_64 rng(17);
    const auto m = random_model(rng, 2, 1.0, 1.0, 0.2);
    const double dt = 1e-3;
    std::size_t count = 1;
    while (std::abs(kernel_time(m, static_cast<double>(count) * dt)) > 1e-10)
        count *= 2;
    const auto f = kernel_time_series(m, dt, count + 1);
    for (double w = -20.0; w <= 20.0; w += 0.5)
    {
        // Trapezoid on [0, T]; f is smooth there (Theta(0) = 1).
        cdouble acc = 0.5 * f.front();
        for (std::size_t k = 1; k + 1 < f.size(); ++k)
            acc += f[k] * std::polar(1.0, w * dt * static_cast<double>(k));
        acc += 0.5 * f.back() * std::polar(1.0, w * dt * static_cast<double>(count));
        acc *= dt;
        if (m.pole_near(w))
            continue;
        CHECK(std::abs(acc - kernel_freq(m, w)) <= 1e-4);
    }
}

TEST_CASE("frequency kernel pole limit and unitarity")
{
    const auto tls = EmitterModel::two_level(0.0, 1.0);
    CHECK(kernel_freq(tls, 0.0) == cdouble(2.0));
    CHECK(std::abs(1.0 - kernel_freq(tls, 0.0) - cdouble(-1.0)) < 1e-15);
    const cdouble at_one = kernel_freq(tls, 0.5); // chi = 1
    CHECK(std::abs(at_one - cdouble(1.0, 1.0)) < 1e-15);
    CHECK(std::abs(std::abs(1.0 - at_one) - 1.0) < 1e-15);

    std::mt19937_64 rng(3);
    const auto m = random_model(rng, 3);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k)
    {
        const double w = random_frequency(rng, m, 20.0, 0.0);
        worst = std::max(worst, std::abs(std::abs(1.0 - kernel_freq(m, w)) - 1.0));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("model validation names the violated invariant")
{
    const auto violated = [](auto &&fn) {
        try
        {
            fn();
        }
        catch (const Error &e)
        {
            return e.violated();
        }
        return std::string("none");
    };
    CMatrix h(2, 2);
    h << 0.0, cdouble(1.0, 0.5), cdouble(1.0, 0.5), 1.0;
    CVector g(2);
    g << 1.0, 0.0;
    CHECK(violated([&] { EmitterModel::create(h, g, 1.0); }) == "h_m_hermitian");
    h(1, 0) = std::conj(h(0, 1));
    CHECK(violated([&] { EmitterModel::create(h, 2.0 * g, 1.0); }) == "gamma_vec_normalized");
    CHECK(violated([&] { EmitterModel::create(h, g, 0.0); }) == "gamma_rate_positive");
    CHECK(violated([&] { EmitterModel::create(h, CVector::Ones(3) / std::sqrt(3.0), 1.0); }) == "gamma_vec_dimension");
    CHECK(violated([&] { EmitterModel::create(h, g, 1.0); }) == "none");
}

TEST_CASE("emitter JSON ingestion")
{
    const auto doc = nlohmann::json::parse(R"({
        "n": 2, "h_m_re": [[0.0, 0.3], [0.3, 1.0]], "h_m_im": [[0.0, 0.1], [-0.1, 0.0]],
        "gamma_vec_re": [0.6, 0.0], "gamma_vec_im": [0.0, 0.8], "gamma_rate": 2.0, "frequency_unit": "GHz"})");
    const auto m = emitter_from_json(doc);
    CHECK(m.dimension() == 2);
    CHECK(m.rate() == 2.0);
    CHECK(m.hamiltonian()(0, 1) == cdouble(0.3, 0.1));
    CHECK(m.coupling()(1) == cdouble(0.0, 0.8));
    CHECK(m.frequency_unit() == "GHz");
    CHECK(emitter_from_json(emitter_to_json(m)).hamiltonian() == m.hamiltonian());

    auto bad = doc;
    bad["h_m_im"][1][0] = 0.1;
    try
    {
        emitter_from_json(bad);
        FAIL("expected rejection");
    }
    catch (const Error &e)
    {
        CHECK(e.violated() == "h_m_hermitian");
    }
    bad = doc;
    bad["n"] = 3;
    CHECK_THROWS_AS(emitter_from_json(bad), Error);
    bad = doc;
    bad.erase("gamma_rate");
    CHECK_THROWS_AS(emitter_from_json(bad), Error);
}

TEST_CASE("parameter tags")
{
    CHECK(ParameterTag::parse("gamma") == ParameterTag::gamma());
    CHECK(ParameterTag::parse("Detuning:2") == ParameterTag::detuning(2));
    CHECK(ParameterTag::parse("delta(3)") == ParameterTag::detuning(3));
    CHECK_THROWS_AS(ParameterTag::parse("detuning:0"), Error);
    CHECK_THROWS_AS(ParameterTag::parse("omega"), Error);
    CHECK(ParameterTag::detuning(4).to_string() == "Detuning(4)");
}
