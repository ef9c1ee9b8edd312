#include "qspec/scattering.hpp"

#include <cmath>
#include <numbers>

namespace qspec
{
double TimeSamples::norm_squared() const
{
    if (values.size() < 2)
        return 0.0;
    double sum = 0.5 * (std::norm(values.front()) + std::norm(values.back()));
    for (std::size_t i = 1; i + 1 < values.size(); ++i)
        sum += std::norm(values[i]);
    return sum * dt;
}

cdouble transmission(const EmitterModel &model, double omega)
{
    if (model.pole_near(omega))
        return -1.0;
    const double chi = susceptibility(model, omega);
    const cdouble i(0.0, 1.0);
    if (std::abs(chi) <= 1.0)
        return (1.0 - i * chi) / (1.0 + i * chi);
    const double inv = 1.0 / chi;
    return (inv - i) / (inv + i);
}

double encoding_phase(const EmitterModel &model, double omega)
{
    if (model.pole_near(omega))
        return std::numbers::pi;
    return 2.0 * std::atan(susceptibility(model, omega));
}

ScatterResult scatter_freq(const EmitterModel &model, const SampledField &in)
{
    ScatterResult result;
    result.out = in;
    result.phase_curve.resize(in.size());
    for (std::size_t k = 0; k < in.size(); ++k)
    {
        const double omega = in.freqs[k];
        result.out.amps[k] = in.amps[k] * transmission(model, omega);
        result.phase_curve[k] = encoding_phase(model, omega);
    }
    result.norm_error = std::abs(result.out.norm_squared() - 1.0);
    return result;
}

double recommended_time_step(const EmitterModel &model)
{
    const double spread = model.hamiltonian().operatorNorm();
    double dt = 0.01 / model.rate();
    if (spread > 0.0)
        dt = std::min(dt, 0.1 / spread);
    return dt;
}

TimeSamples scatter_time(const EmitterModel &model, const TimeSamples &in)
{
    if (!(in.dt > 0.0) || in.dt > 0.01 / model.rate() * (1.0 + 1e-9))
        throw Error(Errc::GridTooCoarse, "dt<=0.01/Gamma",
                    "time step " + std::to_string(in.dt) + " exceeds 0.01/Gamma = " + std::to_string(0.01 / model.rate()));
    const std::size_t n = in.values.size();
    const std::vector<cdouble> kernel = kernel_time_series(model, in.dt, n);

    TimeSamples out{in.t0, in.dt, std::vector<cdouble>(n)};
    for (std::size_t k = 0; k < n; ++k)
    {
        // Trapezoid over t' in [t0, t_k]; both endpoints carry half weight.
        cdouble acc = 0.0;
        if (k > 0)
        {
            acc = 0.5 * (kernel[0] * in.values[k] + kernel[k] * in.values[0]);
            for (std::size_t m = 1; m < k; ++m)
                acc += kernel[k - m] * in.values[m];
        }
        out.values[k] = in.values[k] - in.dt * acc;
    }
    return out;
}

TimeSamples sample_time(const PulseSpec &spec, double t0, double dt, std::size_t count)
{
    TimeSamples out{t0, dt, {}};
    out.values.reserve(count);
    for (std::size_t k = 0; k < count; ++k)
        out.values.push_back(time_amplitude(spec, out.time(k)));
    return out;
}

std::vector<cdouble> inverse_fourier(const SampledField &field, std::span<const double> times)
{
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    std::vector<cdouble> out;
    out.reserve(times.size());
    for (double t : times)
    {
        cdouble acc = 0.0;
        for (std::size_t k = 0; k < field.size(); ++k)
            acc += field.weights[k] * field.amps[k] * std::polar(1.0, -field.freqs[k] * t);
        out.push_back(norm * acc);
    }
    return out;
}

} // namespace qspec
