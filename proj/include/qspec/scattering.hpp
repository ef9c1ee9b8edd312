#ifndef QSPEC_SCATTERING_HPP
#define QSPEC_SCATTERING_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "qspec/emitter.hpp"
#include "qspec/pulse.hpp"

namespace qspec
{
struct ScatterResult
{
    SampledField out;
    std::vector<double> phase_curve; // 2 atan(chi) on out.freqs
    double norm_error = 0.0;         // | ||out||^2 - 1 |
};

// Uniformly sampled time-domain envelope.
struct TimeSamples
{
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<cdouble> values;

    double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
    double norm_squared() const; // trapezoid rule
};

// Transmission factor 1 - f~(omega) = (1 - i chi)/(1 + i chi); -1 at a pole.
cdouble transmission(const EmitterModel &model, double omega);

// 2 atan(chi(omega)), principal branch; pi at a pole.
double encoding_phase(const EmitterModel &model, double omega);

ScatterResult scatter_freq(const EmitterModel &model, const SampledField &in);

// Causal convolution xi_out = xi_in - f * xi_in by the trapezoid rule. The
// envelope is taken to vanish before the first sample.
TimeSamples scatter_time(const EmitterModel &model, const TimeSamples &in);

// min(0.01/Gamma, 0.1/||H_M||)
double recommended_time_step(const EmitterModel &model);

TimeSamples sample_time(const PulseSpec &spec, double t0, double dt, std::size_t count);

// xi(t) = int dw xi~(w) e^{-i w t} / sqrt(2 pi), trapezoid weights of the field.
std::vector<cdouble> inverse_fourier(const SampledField &field, std::span<const double> times);

} // namespace qspec

#endif // QSPEC_SCATTERING_HPP
