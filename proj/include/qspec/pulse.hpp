#ifndef QSPEC_PULSE_HPP
#define QSPEC_PULSE_HPP

#include <cstddef>
#include <filesystem>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qspec/emitter.hpp"

namespace qspec
{
enum class Regularization
{
    Lorentzian,
    Gaussian,
    Rectangular
};

const char *to_string(Regularization reg);
Regularization parse_regularization(const std::string &text);

// Unit-mass approximation of the Dirac delta with width kappa. The
// rectangular form is centred on zero.
double regularized_delta(Regularization reg, double kappa, double x);

// Two narrow lines of equal weight. The spectral intensity is
// (delta_k(w - omega_plus) + delta_k(w - omega_minus)) / 2; the amplitude
// carries the relative phase `phase` wherever the lower line dominates.
struct DeltaPair
{
    double omega_plus = 0.0;
    double omega_minus = 0.0;
    double kappa = 1.0;
    Regularization reg = Regularization::Lorentzian;
    double phase = 0.0;
};

// Spectral intensity is a normal density with standard deviation `bandwidth`.
struct GaussianPulse
{
    double center = 0.0;
    double bandwidth = 1.0;
};

// Flat spectrum on [center - width/2, center + width/2].
struct RectangularPulse
{
    double center = 0.0;
    double width = 1.0;
};

// sqrt(2 rate) exp(-rate t) for t >= 0 (Lorentzian spectrum of half-width `rate`).
struct DecayingExp
{
    double center = 0.0;
    double rate = 1.0;
};

// Time reverse of DecayingExp: sqrt(2 rate) exp(rate t) for t <= 0.
struct RisingExp
{
    double center = 0.0;
    double rate = 1.0;
};

// Constant envelope on 0 <= t <= duration (sinc spectrum).
struct TemporalBox
{
    double center = 0.0;
    double duration = 1.0;
};

struct TabulatedData
{
    std::vector<double> freqs;
    std::vector<cdouble> amps;
};

// Piecewise-linear interpolation of sampled amplitudes; zero outside the table.
struct Tabulated
{
    std::shared_ptr<const TabulatedData> data;
};

using PulseSpec = std::variant<DeltaPair, GaussianPulse, RectangularPulse, DecayingExp, RisingExp, TemporalBox, Tabulated>;

// Complex amplitudes on a strictly increasing frequency grid with trapezoid weights.
struct SampledField
{
    std::vector<double> freqs;
    std::vector<cdouble> amps;
    std::vector<double> weights;

    std::size_t size() const { return freqs.size(); }
    double norm_squared() const;
};

struct Window
{
    double lo = 0.0;
    double hi = 0.0;
};

void validate(const PulseSpec &spec);
std::string describe(const PulseSpec &spec);

cdouble amplitude(const PulseSpec &spec, double omega);

// Time-domain envelope xi(t), with xi~(w) = int dt xi(t) e^{i w t} / sqrt(2 pi).
// Only the shapes with a closed form are supported (Gaussian, exponentials, TemporalBox).
cdouble time_amplitude(const PulseSpec &spec, double t);

// Frequency window that every grid for (model, spec) should cover by default.
Window default_window(const EmitterModel &model, const PulseSpec &spec);

// Feature-aware trapezoid grid. `budget` is a lower bound on the point count;
// the grid is refined uniformly (in the sense of local spacing) until reached.
SampledField build_grid(const EmitterModel &model, const PulseSpec &spec, Window window, std::size_t budget);
SampledField build_grid(const EmitterModel &model, const PulseSpec &spec, std::size_t budget);

SampledField normalize(SampledField field);

// Two-column CSV: omega, re, im (lines starting with '#' and a non-numeric header are skipped).
Tabulated load_tabulated_csv(const std::filesystem::path &path);

PulseSpec pulse_from_json(const nlohmann::json &doc, const std::filesystem::path &base_dir = {});
nlohmann::json pulse_to_json(const PulseSpec &spec);

} // namespace qspec

#endif // QSPEC_PULSE_HPP
