#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qspec/scattering.hpp"
#include "test_support.hpp"

using namespace qspec;
using qspec::testing::random_frequency;
using qspec::testing::random_model;

namespace
{
SampledField uniform_field(double lo, double hi, std::size_t n)
{
    SampledField f;
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k)
        f.freqs.push_back(lo + h * static_cast<double>(k));
    f.weights.assign(n, h);
    f.weights.front() = f.weights.back() = 0.5 * h;
    f.amps.assign(n, 0.0);
    return f;
}
} // namespace

TEST_CASE("on-resonance light is flipped, chi = 0 is transparent")
{
    const auto tls = EmitterModel::two_level(0.3, 1.0);
    CHECK(transmission(tls, 0.3) == cdouble(-1.0));
    CHECK(encoding_phase(tls, 0.3) == doctest::Approx(std::numbers::pi));

    const double s = 1.0 / std::sqrt(2.0);
    CMatrix h = CMatrix::Zero(2, 2);
    h(0, 0) = 1.0;
    h(1, 1) = 3.0;
    CVector g(2);
    g << s, s;
    const auto pair = EmitterModel::create(h, g, 1.0);
    CHECK(std::abs(transmission(pair, 2.0) - 1.0) < 1e-15);
    CHECK(std::abs(encoding_phase(pair, 2.0)) < 1e-15);
}

TEST_CASE("transmission is the exponential of minus i times the encoding phase")
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 5; ++trial)
    {
        const auto m = random_model(rng, 1 + trial);
        for (int k = 0; k < 100; ++k)
        {
            const double w = random_frequency(rng, m, 10.0, 1e-8);
            const cdouble t = transmission(m, w);
            CHECK(std::abs(t - std::polar(1.0, -encoding_phase(m, w))) < 1e-13);
            CHECK(std::abs(t - (1.0 - kernel_freq(m, w))) < 1e-13);
        }
    }
}

TEST_CASE("frequency-domain scattering is unitary and linear")
{
    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal;
    const auto m = random_model(rng, 3);
    SampledField x = uniform_field(-12.0, 12.0, 4001), y = x;
    for (std::size_t k = 0; k < x.size(); ++k)
    {
        x.amps[k] = cdouble(normal(rng), normal(rng));
        y.amps[k] = cdouble(normal(rng), normal(rng));
    }
    x = normalize(x);
    y = normalize(y);
    const ScatterResult sx = scatter_freq(m, x);
    const ScatterResult sy = scatter_freq(m, y);
    CHECK(sx.norm_error <= 1e-12);
    CHECK(sy.norm_error <= 1e-12);

    const cdouble a(0.3, -1.2), b(2.0, 0.5);
    SampledField z = x;
    for (std::size_t k = 0; k < z.size(); ++k)
        z.amps[k] = a * x.amps[k] + b * y.amps[k];
    const ScatterResult sz = scatter_freq(m, z);
    for (std::size_t k = 0; k < z.size(); ++k)
        CHECK(std::abs(sz.out.amps[k] - (a * sx.out.amps[k] + b * sy.out.amps[k])) <= 1e-13);

    const auto tls = EmitterModel::two_level(0.0, 1.0);
    const ScatterResult pulse = scatter_freq(tls, build_grid(tls, GaussianPulse{0.0, 0.64}, 20000));
    CHECK(pulse.norm_error <= 1e-12);
}

TEST_CASE("the zero field scatters to zero")
{
    const auto tls = EmitterModel::two_level(0.0, 1.0);
    const ScatterResult r = scatter_freq(tls, uniform_field(-5.0, 5.0, 101));
    for (cdouble a : r.out.amps)
        CHECK(a == cdouble(0.0));
    const TimeSamples t = scatter_time(tls, TimeSamples{0.0, 0.01, std::vector<cdouble>(50, 0.0)});
    for (cdouble a : t.values)
        CHECK(a == cdouble(0.0));
}

TEST_CASE("time-domain scattering preserves the photon norm")
{
    const auto tls = EmitterModel::two_level(0.0, 1.0);
    const double dt = 1e-3;
    const TimeSamples in = sample_time(DecayingExp{0.0, 1.0}, 0.0, dt, 40001);
    CHECK(in.norm_squared() == doctest::Approx(1.0).epsilon(1e-4));
    const TimeSamples out = scatter_time(tls, in);
    CHECK(out.norm_squared() == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("time and frequency pictures agree")
{
    const auto tls = EmitterModel::two_level(0.2, 1.0);
    const GaussianPulse pulse{0.0, 0.64};
    const double dt = 5e-3;
    const TimeSamples in = sample_time(pulse, -8.0, dt, 9601);
    const TimeSamples out = scatter_time(tls, in);

    const ScatterResult freq = scatter_freq(tls, build_grid(tls, pulse, 100000));
    std::vector<double> times;
    std::vector<std::size_t> index;
    for (std::size_t k = 0; k < out.values.size(); k += 400)
    {
        times.push_back(out.time(k));
        index.push_back(k);
    }
    const auto expect = inverse_fourier(freq.out, times);
    double worst = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j)
        worst = std::max(worst, std::abs(out.values[index[j]] - expect[j]));
    CHECK(worst <= 1e-4);
}

TEST_CASE("coarse time steps are refused")
{
    const auto tls = EmitterModel::two_level(0.0, 2.0);
    CHECK(recommended_time_step(tls) == doctest::Approx(0.005));
    try
    {
        scatter_time(tls, TimeSamples{0.0, 0.01, std::vector<cdouble>(10, 1.0)});
        FAIL("expected GridTooCoarse");
    }
    catch (const Error &e)
    {
        CHECK(e.code() == Errc::GridTooCoarse);
    }
    CHECK_NOTHROW(scatter_time(tls, TimeSamples{0.0, 0.005, std::vector<cdouble>(10, 1.0)}));
}
